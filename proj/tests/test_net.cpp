#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <vector>

#include "flopsd/checkpoint.hpp"
#include "flopsd/errors.hpp"
#include "flopsd/net.hpp"
#include "flopsd/rng.hpp"

using namespace flopsd;

namespace {

// Independent dense forward pass, written against the documented canonical
// parameter layout. Oracle for the production implementation.
std::vector<double> naive_forward(const NetSpec& spec, const ParamVector& params,
                                  const std::vector<double>& input) {
    std::vector<double> cur = input;
    size_t off = 0;
    for (int l = 0; l < spec.layers(); ++l) {
        const int n_in = spec.layer_sizes[l];
        const int n_out = spec.layer_sizes[l + 1];
        std::vector<double> next(n_out);
        for (int o = 0; o < n_out; ++o) {
            double z = params[off + static_cast<size_t>(n_in) * n_out + o];  // bias
            for (int i = 0; i < n_in; ++i) {
                z += params[off + static_cast<size_t>(o) * n_in + i] * cur[i];
            }
            if (l == spec.layers() - 1) {
                next[o] = z;
            } else if (spec.activation == Activation::kTanh) {
                next[o] = std::tanh(z);
            } else {
                next[o] = z / (1.0 + std::exp(-z));
            }
        }
        cur = std::move(next);
        off += static_cast<size_t>(n_in) * n_out + n_out;
    }
    return cur;
}

double dot_output(const NetSpec& spec, const ParamVector& params,
                  const std::vector<double>& input, const std::vector<double>& upstream) {
    const auto out = forward(spec, params, input);
    double acc = 0.0;
    for (size_t i = 0; i < out.size(); ++i) acc += upstream[i] * out[i];
    return acc;
}

double rel_err(double a, double b, double floor = 1e-8) {
    return std::abs(a - b) / std::max({std::abs(a), std::abs(b), floor});
}

NetSpec random_spec(Rng& rng) {
    NetSpec spec;
    const int hidden_layers = 1 + rng.uniform_int(2);
    spec.layer_sizes.push_back(2 + rng.uniform_int(9));
    for (int l = 0; l < hidden_layers; ++l) spec.layer_sizes.push_back(3 + rng.uniform_int(14));
    spec.layer_sizes.push_back(1 + rng.uniform_int(6));
    spec.activation = rng.uniform() < 0.5 ? Activation::kTanh : Activation::kSilu;
    return spec;
}

}  // namespace

TEST_SUITE("net") {

TEST_CASE("param_count matches layer arithmetic") {
    CHECK(param_count(NetSpec{{2, 3, 2}, Activation::kTanh}) == 17);
    CHECK(param_count(NetSpec{{8, 64, 64, 2}, Activation::kSilu}) == 4866);
}

TEST_CASE("spec without hidden layer is rejected") {
    CHECK_THROWS_AS(param_count(NetSpec{{5, 5}, Activation::kTanh}), std::invalid_argument);
    CHECK_THROWS_AS(param_count(NetSpec{{5, 0, 5}, Activation::kTanh}), std::invalid_argument);
}

TEST_CASE("zero params give zero output") {
    NetSpec spec{{4, 8, 3}, Activation::kSilu};
    ParamVector params(param_count(spec), 0.0);
    const auto out = forward(spec, params, std::vector<double>{1.0, -2.0, 0.5, 3.0});
    for (double v : out) CHECK(v == 0.0);
}

TEST_CASE("tanh net maps zero input to zero output with zero biases") {
    NetSpec spec{{3, 5, 3}, Activation::kTanh};
    Rng rng(7);
    ParamVector params = init_params(spec, rng);  // biases zero
    const auto out = forward(spec, params, std::vector<double>{0.0, 0.0, 0.0});
    for (double v : out) CHECK(v == 0.0);
}

TEST_CASE("forward matches the naive dense oracle") {
    Rng rng(11);
    for (int trial = 0; trial < 10; ++trial) {
        const NetSpec spec = random_spec(rng);
        ParamVector params = init_params(spec, rng);
        for (double& p : params) p += 0.05 * rng.normal();  // nonzero biases too
        std::vector<double> input(spec.input_dim());
        for (double& x : input) x = rng.normal();
        const auto got = forward(spec, params, input);
        const auto want = naive_forward(spec, params, input);
        REQUIRE(got.size() == want.size());
        for (size_t i = 0; i < got.size(); ++i) {
            CHECK(rel_err(got[i], want[i]) < 1e-12);
        }
    }
}

TEST_CASE("forward is deterministic") {
    Rng rng(3);
    const NetSpec spec = random_spec(rng);
    const ParamVector params = init_params(spec, rng);
    std::vector<double> input(spec.input_dim(), 0.25);
    const auto a = forward(spec, params, input);
    const auto b = forward(spec, params, input);
    CHECK(a == b);
}

TEST_CASE("backward: zero upstream gives zero gradients") {
    NetSpec spec{{3, 6, 2}, Activation::kSilu};
    Rng rng(5);
    const ParamVector params = init_params(spec, rng);
    const std::vector<double> input{0.3, -0.7, 1.1};
    const std::vector<double> upstream{0.0, 0.0};
    const auto [grad, in_grad] = backward(spec, params, input, upstream);
    for (double g : grad) CHECK(g == 0.0);
    for (double g : in_grad) CHECK(g == 0.0);
}

TEST_CASE("backward matches central finite differences") {
    Rng rng(17);
    const double h = 1e-5;
    for (int trial = 0; trial < 5; ++trial) {
        const NetSpec spec = random_spec(rng);
        ParamVector params = init_params(spec, rng);
        for (double& p : params) p += 0.05 * rng.normal();
        std::vector<double> input(spec.input_dim());
        for (double& x : input) x = rng.normal();
        std::vector<double> upstream(spec.output_dim());
        for (double& u : upstream) u = rng.normal();

        const auto [grad, in_grad] = backward(spec, params, input, upstream);

        for (size_t i = 0; i < params.size(); ++i) {
            ParamVector p = params;
            p[i] = params[i] + h;
            const double f_plus = dot_output(spec, p, input, upstream);
            p[i] = params[i] - h;
            const double f_minus = dot_output(spec, p, input, upstream);
            const double fd = (f_plus - f_minus) / (2.0 * h);
            CHECK(rel_err(grad[i], fd) < 1e-4);
        }
        for (size_t i = 0; i < input.size(); ++i) {
            auto x = input;
            x[i] = input[i] + h;
            const double f_plus = dot_output(spec, params, x, upstream);
            x[i] = input[i] - h;
            const double f_minus = dot_output(spec, params, x, upstream);
            const double fd = (f_plus - f_minus) / (2.0 * h);
            CHECK(rel_err(in_grad[i], fd) < 1e-4);
        }
    }
}

TEST_CASE("input gradient at the linearization point is W1^T W2^T upstream") {
    // tanh'(0) = 1, so with zero biases and zero input the net is locally the
    // product of its weight matrices.
    NetSpec spec{{3, 4, 2}, Activation::kTanh};
    Rng rng(23);
    const ParamVector params = init_params(spec, rng);
    const std::vector<double> input{0.0, 0.0, 0.0};
    const std::vector<double> upstream{0.8, -1.3};

    // W1 is 4x3 at offset 0, W2 is 2x4 after W1 and b1.
    const auto w1 = [&](int o, int i) { return params[static_cast<size_t>(o) * 3 + i]; };
    const size_t w2_off = 4 * 3 + 4;
    const auto w2 = [&](int o, int i) { return params[w2_off + static_cast<size_t>(o) * 4 + i]; };

    std::vector<double> hidden_grad(4, 0.0);
    for (int i = 0; i < 4; ++i) {
        for (int o = 0; o < 2; ++o) hidden_grad[i] += w2(o, i) * upstream[o];
    }
    std::vector<double> want(3, 0.0);
    for (int i = 0; i < 3; ++i) {
        for (int o = 0; o < 4; ++o) want[i] += w1(o, i) * hidden_grad[o];
    }

    const auto [grad, in_grad] = backward(spec, params, input, upstream);
    for (int i = 0; i < 3; ++i) CHECK(in_grad[i] == doctest::Approx(want[i]).epsilon(1e-12));
}

TEST_CASE("adam: zero gradient leaves params unchanged") {
    std::vector<double> params{1.0, -2.0, 3.0};
    const std::vector<double> grad{0.0, 0.0, 0.0};
    AdamState state;
    adam_update(params, grad, state, AdamConfig{.lr = 0.1});
    CHECK(params == std::vector<double>{1.0, -2.0, 3.0});
}

TEST_CASE("adam: bias-corrected first step moves by -lr") {
    std::vector<double> params{0.0};
    const std::vector<double> grad{1.0};
    AdamState state;
    adam_update(params, grad, state, AdamConfig{.lr = 0.1});
    CHECK(params[0] == doctest::Approx(-0.1).epsilon(1e-6));
}

TEST_CASE("adam converges on a quadratic and matches a scalar reference") {
    // Scalar reference implementation run side by side.
    double w_ref = 0.0, m = 0.0, v = 0.0;
    std::vector<double> w{0.0};
    AdamState state;
    const AdamConfig cfg{.lr = 0.1};
    for (int t = 1; t <= 100; ++t) {
        const double g_ref = 2.0 * (w_ref - 3.0);
        m = 0.9 * m + 0.1 * g_ref;
        v = 0.999 * v + 0.001 * g_ref * g_ref;
        const double mhat = m / (1.0 - std::pow(0.9, t));
        const double vhat = v / (1.0 - std::pow(0.999, t));
        w_ref -= 0.1 * mhat / (std::sqrt(vhat) + 1e-8);

        const std::vector<double> g{2.0 * (w[0] - 3.0)};
        adam_update(w, g, state, cfg);
    }
    CHECK(w[0] == doctest::Approx(w_ref).epsilon(1e-12));
    CHECK(std::abs(w[0] - 3.0) < 0.05);
}

TEST_CASE("adam rejects non-finite gradients") {
    std::vector<double> params{1.0};
    const std::vector<double> grad{std::nan("")};
    AdamState state;
    CHECK_THROWS_AS(adam_update(params, grad, state, AdamConfig{}), NumericError);
}

TEST_CASE("init_params stays inside fan-balanced bounds with zero biases") {
    NetSpec spec{{4, 6, 2}, Activation::kSilu};
    Rng rng(41);
    const ParamVector params = init_params(spec, rng);
    const double a1 = std::sqrt(6.0 / (4 + 6));
    for (int k = 0; k < 4 * 6; ++k) CHECK(std::abs(params[k]) <= a1);
    for (int k = 4 * 6; k < 4 * 6 + 6; ++k) CHECK(params[k] == 0.0);
    const double a2 = std::sqrt(6.0 / (6 + 2));
    for (int k = 0; k < 6 * 2; ++k) CHECK(std::abs(params[4 * 6 + 6 + k]) <= a2);
}

TEST_CASE("checkpoint round-trip is bit-identical") {
    NetSpec spec{{5, 7, 3}, Activation::kTanh};
    Rng rng(29);
    ParamVector params = init_params(spec, rng);
    for (double& p : params) p += rng.normal();

    const auto path = std::filesystem::temp_directory_path() / "flopsd_test_ckpt.bin";
    save_checkpoint(path.string(), spec, params);
    const Checkpoint loaded = load_checkpoint(path.string());
    CHECK(loaded.spec == spec);
    CHECK(loaded.params == params);

    std::vector<double> input(spec.input_dim(), 0.7);
    CHECK(forward(spec, params, input) == forward(loaded.spec, loaded.params, input));
    std::filesystem::remove(path);
}

TEST_CASE("checkpoint rejects bad magic and truncation") {
    NetSpec spec{{3, 4, 2}, Activation::kSilu};
    Rng rng(31);
    const ParamVector params = init_params(spec, rng);
    auto bytes = serialize_checkpoint(spec, params);

    auto bad = bytes;
    bad[0] = 'X';
    CHECK_THROWS_AS(deserialize_checkpoint(bad), UsageError);

    auto truncated = bytes;
    truncated.resize(truncated.size() - 5);
    CHECK_THROWS_AS(deserialize_checkpoint(truncated), UsageError);

    CHECK_THROWS_AS(load_checkpoint("/nonexistent/flopsd.ckpt"), UsageError);
}

TEST_CASE("checkpoint hash is stable and parameter-sensitive") {
    NetSpec spec{{3, 4, 2}, Activation::kSilu};
    Rng rng(37);
    ParamVector params = init_params(spec, rng);
    const uint64_t h1 = checkpoint_hash(spec, params);
    CHECK(checkpoint_hash(spec, params) == h1);
    params[0] += 1e-12;
    CHECK(checkpoint_hash(spec, params) != h1);
}

}  // TEST_SUITE
