#pragma once

#include <span>
#include <vector>

#include "flopsd/flow.hpp"
#include "flopsd/opsd.hpp"
#include "flopsd/sampler.hpp"
#include "flopsd/trainlog.hpp"

namespace flopsd {

// Vanilla SFT: flow-matching loss on the tune set under the student condition.
TrainLog sft_train(VelocityField& field, std::span<const TrainingPair> dataset,
                   const TuneConfig& cfg, Rng& rng, const EvalCallback& eval = nullptr);

// Rolls the teacher out under the multimodal condition for each dataset pair,
// returning the generated stand-in targets. Refreshed periodically during
// sft_from_teacher_samples_train; exposed for tests.
std::vector<Vec2> generate_teacher_targets(const VelocityField& teacher,
                                           std::span<const TrainingPair> dataset,
                                           const Schedule& schedule, Rng& rng);

// SFT where the dataset targets are replaced by teacher-generated samples.
TrainLog sft_from_teacher_samples_train(EmaPair& pair, std::span<const TrainingPair> dataset,
                                        const Schedule& schedule, const TuneConfig& cfg, Rng& rng,
                                        const EvalCallback& eval = nullptr);

// Off-policy distillation: the same velocity-matching loss as opsd_loss, but on
// states built from the targets via the interpolant x_{t_k} = (1-t_k) x0 + t_k eps
// at the schedule times, never from student roll-outs.
double offpolicy_loss(const EmaPair& pair, std::span<const TrainingPair> batch,
                      const Schedule& schedule, bool random_t, Rng& rng,
                      std::span<double> grad, const OpsdOptions& options = {});

TrainLog offpolicy_distill_train(EmaPair& pair, std::span<const TrainingPair> dataset,
                                 const Schedule& schedule, const TuneConfig& cfg, Rng& rng,
                                 const OpsdOptions& options = {},
                                 const EvalCallback& eval = nullptr);

}  // namespace flopsd
