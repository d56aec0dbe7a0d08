#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "flopsd/baselines.hpp"
#include "flopsd/checkpoint.hpp"
#include "flopsd/config.hpp"
#include "flopsd/dataset.hpp"
#include "flopsd/distill.hpp"
#include "flopsd/metrics.hpp"
#include "flopsd/opsd.hpp"
#include "flopsd/trainlog.hpp"

namespace flopsd {

// Fixed CSV schema shared by every run artifact. Metric cells are empty when
// a row carries no evaluation.
inline constexpr const char* kCsvHeader =
    "iter,method,seed,loss,concept_score,quality_proxy,sw2_target,energy_retained";

std::string hex64(uint64_t v);

// out_dir from the config, with the FLOPSD_RUNDIR environment variable as
// output-root override for relative paths.
std::string resolve_out_dir(const RunConfig& cfg);

Schedule config_schedule(const RunConfig& cfg);

// Dataset generation for both scenarios, seeded from the config seed: the
// customize scenario tunes on the concept-shift pairs, the domain-shift
// scenario tunes on style-transformed draws of every class but the hold-out.
Dataset build_dataset(const RunConfig& cfg);

VelocityField field_from_checkpoint(const Checkpoint& ckpt);

// Hash over (tune set, schedule, seed, optimizer settings); identical across
// the arms of one comparative run and recorded in every log.
uint64_t experiment_descriptor_hash(std::span<const TrainingPair> tune_set,
                                    const Schedule& schedule, uint64_t seed,
                                    const TuneConfig& cfg);

// Owns the fixed evaluation fixtures of one experiment: concept-target sample
// sets, cached dense-solve reference sets of the pretrained base, and data
// draws for the retention metric. Evaluation draws are keyed by
// (tune seed, iteration) so that all arms see identical evaluation noise.
class MetricsEvaluator {
  public:
    MetricsEvaluator(const RunConfig& cfg, const Schedule& schedule,
                     const VelocityField& base_reference);

    EvalMetrics evaluate(const VelocityField& field, uint64_t tune_seed, int64_t iter) const;

    const std::vector<int>& quality_labels() const { return quality_labels_; }

  private:
    RunConfig cfg_;
    Schedule schedule_;
    std::vector<std::pair<int, SampleSet>> concept_targets_;  // (label, target samples)
    std::vector<int> quality_labels_;
    std::vector<SampleSet> reference_sets_;  // dense base samples per quality label
    std::vector<SampleSet> data_sets_;       // data-distribution draws per quality label
};

// ----- compute stages (no file I/O) -----

VelocityField run_pretrain(const RunConfig& cfg, TrainLog* out_log = nullptr);

VelocityField run_distill(const RunConfig& cfg, const VelocityField& base,
                          TrainLog* out_log = nullptr);

struct TuneOutput {
    VelocityField tuned;
    TrainLog log;
};

// method: opsd | sft | sft-teacher | offpolicy | opsd-frozen | opsd-copy.
// The last two are the teacher-construction sweep variants.
TuneOutput run_tune(const RunConfig& cfg, const std::string& method, const VelocityField& start,
                    uint64_t tune_seed, const MetricsEvaluator* evaluator);

// ----- CLI entry points (write checkpoints, CSVs and manifests) -----

int cli_pretrain(const RunConfig& cfg);
int cli_distill(const RunConfig& cfg, const std::string& base_path);
int cli_tune(const RunConfig& cfg, const std::string& model_path, const std::string& base_path,
             const std::string& method);
int cli_eval(const RunConfig& cfg, const std::string& model_path, const std::string& base_path);
int cli_ablate(const RunConfig& cfg);
int cli_report(const std::string& rundir);

// CSV helpers (exposed for tests).
std::string csv_row(int64_t iter, const std::string& method, uint64_t seed, double loss,
                    const EvalMetrics& eval);
std::string train_log_csv(const TrainLog& log, uint64_t seed, int log_period);

struct CsvRow {
    int64_t iter = 0;
    std::string method;
    uint64_t seed = 0;
    double loss;
    EvalMetrics eval;
};
std::vector<CsvRow> parse_csv(const std::string& text);

double quantile(std::vector<double> values, double q);  // linear interpolation

}  // namespace flopsd
