#pragma once

#include <cstdint>
#include <span>
#include <string_view>
#include <utility>
#include <vector>

#include "flopsd/rng.hpp"

namespace flopsd {

enum class Activation { kTanh, kSilu };

std::string_view to_string(Activation a);
Activation activation_from_string(std::string_view s);

// Dense feed-forward network description. layer_sizes runs input -> hidden...
// -> output; the activation applies to all hidden layers, the output layer is
// linear. At least one hidden layer is required.
struct NetSpec {
    std::vector<int> layer_sizes;
    Activation activation = Activation::kSilu;

    int input_dim() const { return layer_sizes.front(); }
    int output_dim() const { return layer_sizes.back(); }
    int layers() const { return static_cast<int>(layer_sizes.size()) - 1; }
    void validate() const;  // throws std::invalid_argument

    bool operator==(const NetSpec&) const = default;
};

// Parameters and gradients are flat vectors in canonical order: for each layer
// in sequence, the weight matrix row-major (out x in, W[o * n_in + i]), then
// the bias vector. Checkpoints serialize exactly this order.
using ParamVector = std::vector<double>;
using GradVector = std::vector<double>;

int param_count(const NetSpec& spec);

// Reusable scratch for forward/backward passes; sized from a spec once and
// reused across calls to keep training loops allocation-free.
class Workspace {
  public:
    Workspace() = default;
    explicit Workspace(const NetSpec& spec) { resize(spec); }
    void resize(const NetSpec& spec);

    std::span<const double> output() const { return acts.back(); }

    std::vector<std::vector<double>> acts;  // acts[0] = input, acts[l+1] = layer l output
    std::vector<std::vector<double>> pres;  // pre-activations, per layer
    std::vector<double> delta;
    std::vector<double> delta_prev;
};

// Forward pass into the workspace; ws.output() holds the result afterwards.
void forward(const NetSpec& spec, std::span<const double> params, std::span<const double> input,
             Workspace& ws);

std::vector<double> forward(const NetSpec& spec, std::span<const double> params,
                            std::span<const double> input);

// Gradient of <upstream, net(input)> with respect to params and input.
// The workspace must hold the forward pass of the same (params, input).
// Parameter gradients are ACCUMULATED into param_grad; input_grad, when
// non-empty, is overwritten.
void backward(const NetSpec& spec, std::span<const double> params,
              std::span<const double> upstream, Workspace& ws, std::span<double> param_grad,
              std::span<double> input_grad = {});

// Allocating variant: returns (param_grad, input_grad).
std::pair<GradVector, std::vector<double>> backward(const NetSpec& spec,
                                                    std::span<const double> params,
                                                    std::span<const double> input,
                                                    std::span<const double> upstream);

// Fan-balanced init: weights ~ U(-a, a) with a = sqrt(6 / (n_in + n_out)),
// biases zero.
ParamVector init_params(const NetSpec& spec, Rng& rng);

struct AdamConfig {
    double lr = 1e-3;
    double beta1 = 0.9;
    double beta2 = 0.999;
    double eps = 1e-8;
};

struct AdamState {
    std::vector<double> m;
    std::vector<double> v;
    int64_t step = 0;

    void reset(size_t n) {
        m.assign(n, 0.0);
        v.assign(n, 0.0);
        step = 0;
    }
};

// Standard bias-corrected Adam step, in place. Throws NumericError on a
// non-finite gradient (the divergence signal used by every trainer).
void adam_update(std::span<double> params, std::span<const double> grad, AdamState& state,
                 const AdamConfig& cfg);

// Cosine decay from lr0 at iteration 0 to lr1 at the final iteration.
double cosine_lr(double lr0, double lr1, int it, int iters);

}  // namespace flopsd
