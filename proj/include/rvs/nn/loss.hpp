#pragma once

// Negative log-likelihood of actions under the head distribution, averaged over
// the batch, together with its gradient w.r.t. the head outputs and log_std.

#include <cmath>
#include <cstddef>
#include <numbers>

#include "rvs/common.hpp"
#include "rvs/nn/mlp.hpp"

namespace rvs {

struct NllResult {
    double loss = 0.0;
    Matrix d_out;           // same shape as the head output
    Vector d_log_std;       // Gaussian only
    std::size_t clamped = 0;  // categorical actions outside [low, high]
};

inline NllResult nll_loss(const HeadSpec& head, const Matrix& out, const Vector& log_std, const Matrix& actions,
                          bool want_grad = true) {
    const Eigen::Index n = out.rows();
    if (n == 0) throw UsageError("empty batch");
    if (static_cast<std::size_t>(out.cols()) != head.output_dim()) throw UsageError("head output has wrong width");
    if (actions.rows() != n || static_cast<std::size_t>(actions.cols()) != head.action_dims) {
        throw UsageError("action batch shape does not match the head");
    }
    NllResult r;
    const double inv_n = 1.0 / static_cast<double>(n);
    if (want_grad) r.d_out = Matrix::Zero(out.rows(), out.cols());
    double total = 0.0;

    if (head.kind == HeadKind::categorical) {
        const auto bins = static_cast<Eigen::Index>(head.bins);
        for (Eigen::Index i = 0; i < n; ++i) {
            for (std::size_t d = 0; d < head.action_dims; ++d) {
                bool clamped = false;
                const auto target = static_cast<Eigen::Index>(head.bin_index(d, actions(i, static_cast<Eigen::Index>(d)), clamped));
                if (clamped) ++r.clamped;
                const Eigen::Index base = static_cast<Eigen::Index>(d) * bins;
                double mx = out(i, base);
                for (Eigen::Index k = 1; k < bins; ++k) mx = std::max(mx, out(i, base + k));
                double sum = 0.0;
                for (Eigen::Index k = 0; k < bins; ++k) sum += std::exp(out(i, base + k) - mx);
                const double log_z = mx + std::log(sum);
                total += log_z - out(i, base + target);
                if (want_grad) {
                    for (Eigen::Index k = 0; k < bins; ++k) {
                        r.d_out(i, base + k) = std::exp(out(i, base + k) - log_z) * inv_n;
                    }
                    r.d_out(i, base + target) -= inv_n;
                }
            }
        }
    } else {
        const auto dims = static_cast<Eigen::Index>(head.action_dims);
        if (log_std.size() != dims) throw UsageError("log_std has wrong length");
        if (want_grad) r.d_log_std = Vector::Zero(dims);
        const double half_log_2pi = 0.5 * std::log(2.0 * std::numbers::pi);
        for (Eigen::Index d = 0; d < dims; ++d) {
            const double inv_var = std::exp(-2.0 * log_std[d]);
            double sq_sum = 0.0;
            for (Eigen::Index i = 0; i < n; ++i) {
                const double diff = actions(i, d) - out(i, d);
                const double sq = diff * diff * inv_var;
                sq_sum += sq;
                total += 0.5 * sq + log_std[d] + half_log_2pi;
                if (want_grad) r.d_out(i, d) = -diff * inv_var * inv_n;
            }
            if (want_grad) r.d_log_std[d] = (static_cast<double>(n) - sq_sum) * inv_n;
        }
    }
    r.loss = total * inv_n;
    return r;
}

/// Forward, loss and backward in one call; returns the loss and fills `grad`.
inline NllResult loss_and_gradient(const MlpPolicy& policy, const Matrix& inputs, const Matrix& actions,
                                   bool train_mode, Rng* rng, ForwardCache& cache, Vector& grad,
                                   GateMode mode = GateMode::compute) {
    forward(policy, inputs, train_mode, rng, cache, mode);
    const Vector log_std = policy.log_std();
    NllResult r = nll_loss(policy.head(), cache.out, log_std, actions, true);
    backward(policy, cache, r.d_out, r.d_log_std, grad);
    return r;
}

/// Loss only, eval mode.
inline double evaluate_loss(const MlpPolicy& policy, const Matrix& inputs, const Matrix& actions) {
    ForwardCache cache;
    forward(policy, inputs, false, nullptr, cache);
    const Vector log_std = policy.log_std();
    return nll_loss(policy.head(), cache.out, log_std, actions, false).loss;
}

}  // namespace rvs
