#include "flopsd/net.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

#include "flopsd/errors.hpp"

namespace flopsd {

std::string_view to_string(Activation a) {
    return a == Activation::kTanh ? "tanh" : "silu";
}

Activation activation_from_string(std::string_view s) {
    if (s == "tanh") return Activation::kTanh;
    if (s == "silu") return Activation::kSilu;
    throw std::invalid_argument("unknown activation: " + std::string(s));
}

void NetSpec::validate() const {
    if (layer_sizes.size() < 3) {
        throw std::invalid_argument("NetSpec needs at least one hidden layer");
    }
    for (int n : layer_sizes) {
        if (n <= 0) throw std::invalid_argument("NetSpec layer sizes must be positive");
    }
}

int param_count(const NetSpec& spec) {
    spec.validate();
    int total = 0;
    for (int l = 0; l < spec.layers(); ++l) {
        total += spec.layer_sizes[l] * spec.layer_sizes[l + 1] + spec.layer_sizes[l + 1];
    }
    return total;
}

void Workspace::resize(const NetSpec& spec) {
    spec.validate();
    const int layers = spec.layers();
    acts.resize(layers + 1);
    pres.resize(layers);
    int widest = 0;
    for (int l = 0; l <= layers; ++l) {
        acts[l].assign(spec.layer_sizes[l], 0.0);
        if (l < layers) pres[l].assign(spec.layer_sizes[l + 1], 0.0);
        if (spec.layer_sizes[l] > widest) widest = spec.layer_sizes[l];
    }
    delta.assign(widest, 0.0);
    delta_prev.assign(widest, 0.0);
}

namespace {

inline double sigmoid(double z) { return 1.0 / (1.0 + std::exp(-z)); }

inline double activate(Activation a, double z) {
    return a == Activation::kTanh ? std::tanh(z) : z * sigmoid(z);
}

// Derivative expressed from the pre-activation.
inline double activate_grad(Activation a, double z) {
    if (a == Activation::kTanh) {
        double t = std::tanh(z);
        return 1.0 - t * t;
    }
    double s = sigmoid(z);
    return s * (1.0 + z * (1.0 - s));
}

}  // namespace

void forward(const NetSpec& spec, std::span<const double> params, std::span<const double> input,
             Workspace& ws) {
    const int layers = spec.layers();
    if (static_cast<int>(input.size()) != spec.input_dim()) {
        throw std::invalid_argument("forward: input length != first layer size");
    }
    if (static_cast<int>(params.size()) != param_count(spec)) {
        throw std::invalid_argument("forward: params length mismatch");
    }
    if (ws.acts.size() != static_cast<size_t>(layers + 1) ||
        ws.acts[0].size() != input.size()) {
        ws.resize(spec);
    }

    for (size_t i = 0; i < input.size(); ++i) ws.acts[0][i] = input[i];

    size_t off = 0;
    for (int l = 0; l < layers; ++l) {
        const int n_in = spec.layer_sizes[l];
        const int n_out = spec.layer_sizes[l + 1];
        const double* w = params.data() + off;
        const double* b = w + static_cast<size_t>(n_in) * n_out;
        const double* in = ws.acts[l].data();
        double* pre = ws.pres[l].data();
        double* out = ws.acts[l + 1].data();
        const bool last = (l == layers - 1);

        for (int o = 0; o < n_out; ++o) {
            const double* wrow = w + static_cast<size_t>(o) * n_in;
            double z = b[o];
            for (int i = 0; i < n_in; ++i) z += wrow[i] * in[i];
            pre[o] = z;
            out[o] = last ? z : activate(spec.activation, z);
        }
        off += static_cast<size_t>(n_in) * n_out + n_out;
    }
}

std::vector<double> forward(const NetSpec& spec, std::span<const double> params,
                            std::span<const double> input) {
    Workspace ws(spec);
    forward(spec, params, input, ws);
    return {ws.output().begin(), ws.output().end()};
}

void backward(const NetSpec& spec, std::span<const double> params,
              std::span<const double> upstream, Workspace& ws, std::span<double> param_grad,
              std::span<double> input_grad) {
    const int layers = spec.layers();
    if (static_cast<int>(upstream.size()) != spec.output_dim()) {
        throw std::invalid_argument("backward: upstream length != output dim");
    }
    if (static_cast<int>(param_grad.size()) != param_count(spec)) {
        throw std::invalid_argument("backward: param_grad length mismatch");
    }
    if (!input_grad.empty() && static_cast<int>(input_grad.size()) != spec.input_dim()) {
        throw std::invalid_argument("backward: input_grad length mismatch");
    }

    // Offsets of each layer's parameter block.
    std::vector<size_t> offsets(layers);
    size_t off = 0;
    for (int l = 0; l < layers; ++l) {
        offsets[l] = off;
        off += static_cast<size_t>(spec.layer_sizes[l]) * spec.layer_sizes[l + 1] +
               spec.layer_sizes[l + 1];
    }

    // Output layer is linear, so delta starts as the upstream gradient itself.
    for (size_t o = 0; o < upstream.size(); ++o) ws.delta[o] = upstream[o];

    for (int l = layers - 1; l >= 0; --l) {
        const int n_in = spec.layer_sizes[l];
        const int n_out = spec.layer_sizes[l + 1];
        const double* w = params.data() + offsets[l];
        const double* in = ws.acts[l].data();
        double* gw = param_grad.data() + offsets[l];
        double* gb = gw + static_cast<size_t>(n_in) * n_out;

        for (int i = 0; i < n_in; ++i) ws.delta_prev[i] = 0.0;
        for (int o = 0; o < n_out; ++o) {
            const double d = ws.delta[o];
            const double* wrow = w + static_cast<size_t>(o) * n_in;
            double* grow = gw + static_cast<size_t>(o) * n_in;
            for (int i = 0; i < n_in; ++i) {
                grow[i] += d * in[i];
                ws.delta_prev[i] += d * wrow[i];
            }
            gb[o] += d;
        }

        if (l > 0) {
            // Pass through the previous layer's activation.
            const double* pre = ws.pres[l - 1].data();
            for (int i = 0; i < n_in; ++i) {
                ws.delta[i] = ws.delta_prev[i] * activate_grad(spec.activation, pre[i]);
            }
        } else if (!input_grad.empty()) {
            for (int i = 0; i < n_in; ++i) input_grad[i] = ws.delta_prev[i];
        }
    }
}

std::pair<GradVector, std::vector<double>> backward(const NetSpec& spec,
                                                    std::span<const double> params,
                                                    std::span<const double> input,
                                                    std::span<const double> upstream) {
    Workspace ws(spec);
    forward(spec, params, input, ws);
    GradVector grad(param_count(spec), 0.0);
    std::vector<double> input_grad(spec.input_dim(), 0.0);
    backward(spec, params, upstream, ws, grad, input_grad);
    return {std::move(grad), std::move(input_grad)};
}

ParamVector init_params(const NetSpec& spec, Rng& rng) {
    ParamVector params(param_count(spec), 0.0);
    size_t off = 0;
    for (int l = 0; l < spec.layers(); ++l) {
        const int n_in = spec.layer_sizes[l];
        const int n_out = spec.layer_sizes[l + 1];
        const double a = std::sqrt(6.0 / (n_in + n_out));
        for (int k = 0; k < n_in * n_out; ++k) params[off + k] = rng.uniform(-a, a);
        off += static_cast<size_t>(n_in) * n_out + n_out;  // biases stay zero
    }
    return params;
}

void adam_update(std::span<double> params, std::span<const double> grad, AdamState& state,
                 const AdamConfig& cfg) {
    if (params.size() != grad.size()) {
        throw std::invalid_argument("adam_update: params/grad size mismatch");
    }
    if (state.m.size() != params.size()) state.reset(params.size());
    for (double g : grad) {
        if (!std::isfinite(g)) throw NumericError("adam_update: non-finite gradient");
    }

    state.step += 1;
    const double bc1 = 1.0 - std::pow(cfg.beta1, static_cast<double>(state.step));
    const double bc2 = 1.0 - std::pow(cfg.beta2, static_cast<double>(state.step));
    for (size_t i = 0; i < params.size(); ++i) {
        state.m[i] = cfg.beta1 * state.m[i] + (1.0 - cfg.beta1) * grad[i];
        state.v[i] = cfg.beta2 * state.v[i] + (1.0 - cfg.beta2) * grad[i] * grad[i];
        const double mhat = state.m[i] / bc1;
        const double vhat = state.v[i] / bc2;
        params[i] -= cfg.lr * mhat / (std::sqrt(vhat) + cfg.eps);
    }
}

double cosine_lr(double lr0, double lr1, int it, int iters) {
    if (iters <= 1) return lr0;
    const double u = static_cast<double>(it) / (iters - 1);
    return lr1 + 0.5 * (lr0 - lr1) * (1.0 + std::cos(Rng::kPi * u));
}

}  // namespace flopsd
