#pragma once

// Two-hidden-layer ReLU network with an action head. All parameters live in one
// flat vector in the order W1, b1, W2, b2, W3, b3, log_std (log_std only for a
// Gaussian head); layer matrices are row-major views into it.

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <string>
#include <vector>

#include "rvs/common.hpp"
#include "rvs/nn/head.hpp"
#include "rvs/nn/matrix.hpp"

namespace rvs {

/// Per-forward scratch kept for the backward pass. gate_k holds the ReLU
/// indicator times the dropout scale for hidden layer k, so h_k = z_k * gate_k.
struct ForwardCache {
    Matrix input;
    Matrix h1, h2;
    Matrix gate1, gate2;
    Matrix out;
};

enum class GateMode {
    compute,  // derive ReLU gates (and dropout masks in train mode) from this pass
    frozen,   // reuse the gates already stored in the cache
};

class MlpPolicy {
public:
    MlpPolicy() = default;

    static MlpPolicy init(std::size_t input_dim, std::size_t hidden_width, const HeadSpec& head, double dropout_p,
                          std::uint64_t seed) {
        MlpPolicy p(input_dim, hidden_width, head, dropout_p);
        Rng rng = make_rng(seed, "init");
        auto fill = [&](std::size_t layer) {
            const auto& s = p.shapes_[layer];
            const double limit = std::sqrt(6.0 / static_cast<double>(s.in));
            double* w = p.params_.data() + s.w_offset;
            for (std::size_t i = 0; i < s.out * s.in; ++i) w[i] = uniform(rng, -limit, limit);
        };
        for (std::size_t layer = 0; layer < 3; ++layer) fill(layer);
        return p;
    }

    std::size_t input_dim() const noexcept { return input_dim_; }
    std::size_t hidden_width() const noexcept { return width_; }
    double dropout() const noexcept { return dropout_; }
    const HeadSpec& head() const noexcept { return head_; }
    std::size_t output_dim() const noexcept { return head_.output_dim(); }
    std::size_t param_count() const noexcept { return static_cast<std::size_t>(params_.size()); }

    Vector& params() noexcept { return params_; }
    const Vector& params() const noexcept { return params_; }

    ConstMatrixMap weights(std::size_t layer) const {
        const auto& s = shapes_.at(layer);
        return {params_.data() + s.w_offset, static_cast<Eigen::Index>(s.out), static_cast<Eigen::Index>(s.in)};
    }
    ConstVectorMap bias(std::size_t layer) const {
        const auto& s = shapes_.at(layer);
        return {params_.data() + s.b_offset, static_cast<Eigen::Index>(s.out)};
    }
    MatrixMap weights(std::size_t layer) {
        const auto& s = shapes_.at(layer);
        return {params_.data() + s.w_offset, static_cast<Eigen::Index>(s.out), static_cast<Eigen::Index>(s.in)};
    }
    VectorMap bias(std::size_t layer) {
        const auto& s = shapes_.at(layer);
        return {params_.data() + s.b_offset, static_cast<Eigen::Index>(s.out)};
    }

    bool has_log_std() const noexcept { return head_.kind == HeadKind::gaussian; }
    ConstVectorMap log_std() const {
        return {params_.data() + log_std_offset_, static_cast<Eigen::Index>(has_log_std() ? head_.action_dims : 0)};
    }
    VectorMap log_std() {
        return {params_.data() + log_std_offset_, static_cast<Eigen::Index>(has_log_std() ? head_.action_dims : 0)};
    }
    std::size_t log_std_offset() const noexcept { return log_std_offset_; }

    void clamp_log_std() {
        auto ls = log_std();
        for (Eigen::Index i = 0; i < ls.size(); ++i) ls[i] = std::clamp(ls[i], kLogStdMin, kLogStdMax);
    }

    /// Same architecture (dims, head, dropout); parameters may differ.
    bool same_shape(const MlpPolicy& o) const {
        return input_dim_ == o.input_dim_ && width_ == o.width_ && head_ == o.head_ && dropout_ == o.dropout_;
    }

    bool operator==(const MlpPolicy& o) const {
        return same_shape(o) && params_ == o.params_ && input_shift_ == o.input_shift_ && input_scale_ == o.input_scale_;
    }

    /// Fixed affine map applied to raw inputs before the first layer:
    /// x -> (x - shift) * scale. Not trained. Identity by default.
    void set_input_normalization(const Vector& shift, const Vector& scale) {
        const auto n = static_cast<Eigen::Index>(input_dim_);
        if (shift.size() != n || scale.size() != n) throw UsageError("normalization has the wrong dimension");
        if (!shift.allFinite() || !scale.allFinite() || (scale.array() <= 0.0).any()) {
            throw UsageError("normalization needs finite shifts and positive scales");
        }
        input_shift_ = shift;
        input_scale_ = scale;
    }
    const Vector& input_shift() const noexcept { return input_shift_; }
    const Vector& input_scale() const noexcept { return input_scale_; }

    /// Restore from raw parts; used by checkpoint loading.
    static MlpPolicy from_parts(std::size_t input_dim, std::size_t hidden_width, const HeadSpec& head,
                                double dropout_p, const Vector& params) {
        MlpPolicy p(input_dim, hidden_width, head, dropout_p);
        if (params.size() != p.params_.size()) throw UsageError("parameter vector has the wrong length");
        p.params_ = params;
        return p;
    }

private:
    struct Shape {
        std::size_t in = 0, out = 0, w_offset = 0, b_offset = 0;
    };

    MlpPolicy(std::size_t input_dim, std::size_t width, const HeadSpec& head, double dropout_p)
        : input_dim_(input_dim), width_(width), dropout_(dropout_p), head_(head) {
        if (input_dim == 0 || width == 0) throw UsageError("network dimensions must be positive");
        if (!(dropout_p >= 0.0 && dropout_p < 1.0)) throw UsageError("dropout must be in [0, 1)");
        head_.validate();
        const std::array<std::size_t, 4> dims{input_dim, width, width, head_.output_dim()};
        std::size_t off = 0;
        for (std::size_t l = 0; l < 3; ++l) {
            shapes_[l] = Shape{dims[l], dims[l + 1], off, off + dims[l] * dims[l + 1]};
            off = shapes_[l].b_offset + dims[l + 1];
        }
        log_std_offset_ = off;
        if (has_log_std()) off += head_.action_dims;
        params_ = Vector::Zero(static_cast<Eigen::Index>(off));
        input_shift_ = Vector::Zero(static_cast<Eigen::Index>(input_dim));
        input_scale_ = Vector::Ones(static_cast<Eigen::Index>(input_dim));
    }

    std::size_t input_dim_ = 0;
    std::size_t width_ = 0;
    double dropout_ = 0.0;
    HeadSpec head_;
    std::array<Shape, 3> shapes_{};
    std::size_t log_std_offset_ = 0;
    Vector params_;
    Vector input_shift_, input_scale_;
};

namespace detail {

inline void hidden_layer(const Matrix& in, ConstMatrixMap w, ConstVectorMap b, Matrix& h, Matrix& gate,
                         GateMode mode, bool train, double dropout, Rng* rng) {
    h.noalias() = in * w.transpose();
    h.rowwise() += b.transpose();
    const Eigen::Index n = h.size();
    double* z = h.data();
    if (mode == GateMode::compute) {
        gate.resize(h.rows(), h.cols());
        double* g = gate.data();
        if (train && dropout > 0.0) {
            if (rng == nullptr) throw UsageError("train-mode dropout needs a random stream");
            // Compare the top 53 bits of the raw engine output against p * 2^53.
            const auto threshold = static_cast<std::uint64_t>(dropout * 9007199254740992.0);
            const double scale = 1.0 / (1.0 - dropout);
            // Draw first, then mask: interleaving engine calls with the stores
            // made the compiler reload engine state on every element.
            thread_local std::vector<std::uint64_t> draws;
            draws.resize(static_cast<std::size_t>(n));
            for (auto& d : draws) d = (*rng)();
            for (Eigen::Index i = 0; i < n; ++i) {
                g[i] = (z[i] > 0.0 && (draws[static_cast<std::size_t>(i)] >> 11) >= threshold) ? scale : 0.0;
            }
        } else {
            for (Eigen::Index i = 0; i < n; ++i) g[i] = z[i] > 0.0 ? 1.0 : 0.0;
        }
    } else if (gate.rows() != h.rows() || gate.cols() != h.cols()) {
        throw UsageError("frozen gates do not match the batch shape");
    }
    const double* g = gate.data();
    for (Eigen::Index i = 0; i < n; ++i) z[i] *= g[i];
}

}  // namespace detail

/// Forward pass. Returns head parameters in cache.out (logits for categorical,
/// means for Gaussian; the Gaussian log_std lives in the policy).
inline const Matrix& forward(const MlpPolicy& policy, const Matrix& inputs, bool train_mode, Rng* rng,
                             ForwardCache& cache, GateMode mode = GateMode::compute) {
    if (static_cast<std::size_t>(inputs.cols()) != policy.input_dim()) {
        throw UsageError("input has " + std::to_string(inputs.cols()) + " columns, network expects " +
                         std::to_string(policy.input_dim()));
    }
    if (!all_finite(inputs.data(), static_cast<std::size_t>(inputs.size()))) {
        throw NumericError("non-finite network input");
    }
    cache.input = inputs;
    cache.input.rowwise() -= policy.input_shift().transpose();
    cache.input.array().rowwise() *= policy.input_scale().transpose().array();
    detail::hidden_layer(cache.input, policy.weights(0), policy.bias(0), cache.h1, cache.gate1, mode, train_mode,
                         policy.dropout(), rng);
    detail::hidden_layer(cache.h1, policy.weights(1), policy.bias(1), cache.h2, cache.gate2, mode, train_mode,
                         policy.dropout(), rng);
    cache.out.noalias() = cache.h2 * policy.weights(2).transpose();
    cache.out.rowwise() += policy.bias(2).transpose();
    return cache.out;
}

/// Backpropagate d(loss)/d(out) and d(loss)/d(log_std) into a flat gradient
/// vector laid out like policy.params().
inline void backward(const MlpPolicy& policy, const ForwardCache& cache, const Matrix& d_out, const Vector& d_log_std,
                     Vector& grad) {
    grad.resize(policy.params().size());
    auto gw = [&](std::size_t layer) {
        auto w = policy.weights(layer);
        return MatrixMap(grad.data() + (w.data() - policy.params().data()), w.rows(), w.cols());
    };
    auto gb = [&](std::size_t layer) {
        auto b = policy.bias(layer);
        return VectorMap(grad.data() + (b.data() - policy.params().data()), b.size());
    };

    gw(2).noalias() = d_out.transpose() * cache.h2;
    gb(2) = d_out.colwise().sum().transpose();
    // Reused per thread: fresh batch-by-width temporaries every step cost a
    // page-faulting allocation each.
    thread_local Matrix dz, dz1;
    dz.noalias() = d_out * policy.weights(2);
    dz.array() *= cache.gate2.array();
    gw(1).noalias() = dz.transpose() * cache.h1;
    gb(1) = dz.colwise().sum().transpose();
    dz1.noalias() = dz * policy.weights(1);
    dz1.array() *= cache.gate1.array();
    gw(0).noalias() = dz1.transpose() * cache.input;
    gb(0) = dz1.colwise().sum().transpose();

    if (policy.has_log_std()) {
        VectorMap(grad.data() + policy.log_std_offset(), d_log_std.size()) = d_log_std;
    }
}

}  // namespace rvs
