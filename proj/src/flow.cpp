#include "flopsd/flow.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

#include "flopsd/errors.hpp"

namespace flopsd {

std::array<double, kTimeEmbedDim> time_embed(double t) {
    std::array<double, kTimeEmbedDim> out;
    int j = 0;
    for (int k : {1, 2, 4, 8}) {
        const double a = 2.0 * Rng::kPi * k * t;
        out[j++] = std::sin(a);
        out[j++] = std::cos(a);
    }
    return out;
}

void Condition::write_to(std::span<double> out) const {
    if (out.size() != static_cast<size_t>(dim())) {
        throw std::invalid_argument("Condition::write_to: size mismatch");
    }
    size_t i = 0;
    for (double v : label_embed) out[i++] = v;
    out[i++] = context_slot.x;
    out[i++] = context_slot.y;
    out[i] = context_flag;
}

namespace {

void check_label(int label, int n_classes) {
    if (n_classes <= 0) throw std::invalid_argument("n_classes must be positive");
    if (label < 0 || label >= n_classes) {
        throw std::invalid_argument("label " + std::to_string(label) + " out of range [0, " +
                                    std::to_string(n_classes) + ")");
    }
}

}  // namespace

Condition encode_student(int label, int n_classes) {
    check_label(label, n_classes);
    Condition c;
    c.label_embed.assign(n_classes, 0.0);
    c.label_embed[label] = 1.0;
    c.context_slot = {0.0, 0.0};
    c.context_flag = 0.0;
    return c;
}

Condition encode_teacher(int label, const Vec2& target, int n_classes) {
    check_label(label, n_classes);
    if (!target.finite()) throw std::invalid_argument("encode_teacher: non-finite target");
    Condition c;
    c.label_embed.assign(n_classes, 0.0);
    c.label_embed[label] = 1.0;
    c.context_slot = target;
    c.context_flag = 1.0;
    return c;
}

void VelocityField::validate() const {
    spec.validate();
    if (n_classes <= 0) throw std::invalid_argument("VelocityField: n_classes must be positive");
    if (spec.input_dim() != kSampleDim + kTimeEmbedDim + cond_dim()) {
        throw std::invalid_argument("VelocityField: spec input dim != sample + time + cond dims");
    }
    if (spec.output_dim() != kSampleDim) {
        throw std::invalid_argument("VelocityField: spec output dim != sample dim");
    }
}

VelocityField make_velocity_field(int n_classes, const std::vector<int>& hidden,
                                  Activation activation, Rng& rng) {
    VelocityField f;
    f.n_classes = n_classes;
    f.spec.activation = activation;
    f.spec.layer_sizes.push_back(VelocityField::kSampleDim + kTimeEmbedDim + n_classes + 3);
    for (int h : hidden) f.spec.layer_sizes.push_back(h);
    f.spec.layer_sizes.push_back(VelocityField::kSampleDim);
    f.spec.validate();
    f.params = init_params(f.spec, rng);
    f.validate();
    return f;
}

FieldEval::FieldEval(const VelocityField& field) : field_(&field), ws_(field.spec) {
    field.validate();
    input_.assign(field.spec.input_dim(), 0.0);
}

Vec2 FieldEval::operator()(const Vec2& x, double t, const Condition& c) {
    if (t < 0.0 || t > 1.0) throw std::invalid_argument("velocity: t outside [0, 1]");
    if (c.dim() != field_->cond_dim()) {
        throw std::invalid_argument("velocity: condition dimension mismatch");
    }
    input_[0] = x.x;
    input_[1] = x.y;
    const auto te = time_embed(t);
    for (int i = 0; i < kTimeEmbedDim; ++i) input_[2 + i] = te[i];
    c.write_to(std::span<double>(input_).subspan(2 + kTimeEmbedDim));
    forward(field_->spec, field_->params, input_, ws_);
    return {ws_.output()[0], ws_.output()[1]};
}

void FieldEval::backward(std::span<const double> upstream, std::span<double> param_grad) {
    flopsd::backward(field_->spec, field_->params, upstream, ws_, param_grad);
}

Vec2 velocity(const VelocityField& field, const Vec2& x, double t, const Condition& c) {
    FieldEval eval(field);
    return eval(x, t, c);
}

double fm_loss_grad_given(const VelocityField& field, std::span<const TrainingPair> batch,
                          std::span<const FmDraw> draws, std::span<double> grad) {
    if (batch.empty()) throw std::invalid_argument("fm loss: empty batch");
    if (batch.size() != draws.size()) {
        throw std::invalid_argument("fm loss: batch/draws size mismatch");
    }
    if (static_cast<int>(grad.size()) != param_count(field.spec)) {
        throw std::invalid_argument("fm loss: grad size mismatch");
    }

    for (double& g : grad) g = 0.0;
    FieldEval eval(field);
    const double inv_b = 1.0 / static_cast<double>(batch.size());
    double loss = 0.0;
    double upstream[2];

    for (size_t i = 0; i < batch.size(); ++i) {
        const TrainingPair& pair = batch[i];
        const FmDraw& d = draws[i];
        const Condition c = d.use_teacher
                                ? encode_teacher(pair.label, pair.target, field.n_classes)
                                : encode_student(pair.label, field.n_classes);
        const Vec2 xt = interpolate(pair.target, d.eps, d.t);
        const Vec2 u_star = target_velocity(pair.target, d.eps);
        const Vec2 v = eval(xt, d.t, c);
        const Vec2 r = v - u_star;
        loss += r.squared_norm() * inv_b;
        upstream[0] = 2.0 * inv_b * r.x;
        upstream[1] = 2.0 * inv_b * r.y;
        eval.backward(upstream, grad);
    }
    return loss;
}

FmLossResult fm_loss_and_grad(const VelocityField& field, std::span<const TrainingPair> batch,
                              CondMode mode, double dropout_p, Rng& rng) {
    if (batch.empty()) throw std::invalid_argument("fm loss: empty batch");
    if (mode == CondMode::kDropout && (dropout_p < 0.0 || dropout_p > 1.0)) {
        throw std::invalid_argument("fm loss: dropout probability outside [0, 1]");
    }

    std::vector<FmDraw> draws(batch.size());
    for (auto& d : draws) {
        d.t = rng.uniform();
        d.eps = rng.normal2();
        const double coin = rng.uniform();
        switch (mode) {
            case CondMode::kStudent: d.use_teacher = false; break;
            case CondMode::kTeacher: d.use_teacher = true; break;
            case CondMode::kDropout: d.use_teacher = coin < dropout_p; break;
        }
    }

    FmLossResult res;
    res.grad.assign(param_count(field.spec), 0.0);
    res.loss = fm_loss_grad_given(field, batch, draws, res.grad);
    return res;
}

}  // namespace flopsd
