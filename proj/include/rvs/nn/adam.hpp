#pragma once

#include <cmath>
#include <cstdint>

#include "rvs/common.hpp"
#include "rvs/nn/mlp.hpp"

namespace rvs {

struct AdamState {
    static constexpr double beta1 = 0.9;
    static constexpr double beta2 = 0.999;
    static constexpr double eps = 1e-8;

    Vector m;
    Vector v;
    std::uint64_t step = 0;

    static AdamState for_policy(const MlpPolicy& p) {
        return {Vector::Zero(p.params().size()), Vector::Zero(p.params().size()), 0};
    }

    bool operator==(const AdamState&) const = default;
};

/// Bias-corrected Adam update on a flat parameter vector. Rejects non-finite
/// gradients before touching any state.
inline void adam_update(Vector& params, const Vector& grad, AdamState& s, double lr) {
    if (grad.size() != params.size() || s.m.size() != params.size() || s.v.size() != params.size()) {
        throw UsageError("gradient / optimizer shape does not match parameters");
    }
    if (!all_finite(grad.data(), static_cast<std::size_t>(grad.size()))) {
        throw NumericError("non-finite gradient; optimizer step aborted");
    }
    ++s.step;
    const double t = static_cast<double>(s.step);
    const double c1 = 1.0 - std::pow(AdamState::beta1, t);
    const double c2 = 1.0 - std::pow(AdamState::beta2, t);
    // Elementwise; a zero gradient with zero moments leaves a parameter exactly unchanged.
    s.m = AdamState::beta1 * s.m + (1.0 - AdamState::beta1) * grad;
    s.v = AdamState::beta2 * s.v + (1.0 - AdamState::beta2) * grad.cwiseProduct(grad);
    params.array() -= lr * (s.m.array() / c1) / ((s.v.array() / c2).sqrt() + AdamState::eps);
}

inline void adam_step(MlpPolicy& policy, const Vector& grad, AdamState& s, double lr) {
    adam_update(policy.params(), grad, s, lr);
    policy.clamp_log_std();
}

}  // namespace rvs
