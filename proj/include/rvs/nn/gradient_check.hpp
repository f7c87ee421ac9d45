#pragma once

// Central-difference verification of backprop. ReLU gates and dropout masks
// are taken from one unperturbed pass and held fixed for every perturbed
// evaluation, so a perturbation can never flip a unit across its kink.

#include <algorithm>
#include <cmath>

#include "rvs/common.hpp"
#include "rvs/nn/loss.hpp"

namespace rvs {

struct GradientCheckResult {
    double max_relative_error = 0.0;
    Eigen::Index worst_index = -1;
    Vector analytic;
    Vector numeric;
};

inline double relative_error(double ga, double gn) {
    return std::abs(ga - gn) / std::max(1e-8, std::abs(ga) + std::abs(gn));
}

inline GradientCheckResult gradient_check(const MlpPolicy& policy, const Matrix& inputs, const Matrix& actions,
                                          double epsilon, bool train_mode = false, Rng* rng = nullptr) {
    if (!(epsilon > 0.0 && epsilon <= 1e-3)) throw UsageError("gradient check epsilon must be in (0, 1e-3]");
    GradientCheckResult r;
    ForwardCache cache;
    loss_and_gradient(policy, inputs, actions, train_mode, rng, cache, r.analytic);

    MlpPolicy probe = policy;
    ForwardCache frozen = cache;
    auto loss_at = [&]() {
        forward(probe, inputs, train_mode, nullptr, frozen, GateMode::frozen);
        const Vector log_std = probe.log_std();
        return nll_loss(probe.head(), frozen.out, log_std, actions, false).loss;
    };

    r.numeric.resize(r.analytic.size());
    for (Eigen::Index i = 0; i < probe.params().size(); ++i) {
        const double saved = probe.params()[i];
        probe.params()[i] = saved + epsilon;
        const double up = loss_at();
        probe.params()[i] = saved - epsilon;
        const double down = loss_at();
        probe.params()[i] = saved;
        r.numeric[i] = (up - down) / (2.0 * epsilon);
        const double err = relative_error(r.analytic[i], r.numeric[i]);
        if (err > r.max_relative_error || r.worst_index < 0) {
            r.max_relative_error = err;
            r.worst_index = i;
        }
    }
    return r;
}

}  // namespace rvs
