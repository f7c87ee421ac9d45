#pragma once

// Dataset filters for the behavior-cloning baselines, train/validation split,
// and score normalization.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <functional>
#include <numeric>
#include <vector>

#include "rvs/common.hpp"
#include "rvs/data/trajectory.hpp"

namespace rvs {

/// Indices of the ceil(fraction * N) trajectories with the largest `score`,
/// ties going to the earlier index, returned in dataset order.
inline std::vector<std::size_t> top_fraction_indices(const std::vector<double>& score, double fraction) {
    if (!(fraction > 0.0 && fraction <= 1.0)) throw UsageError("fraction must be in (0, 1]");
    const std::size_t n = score.size();
    const auto keep = std::min(n, static_cast<std::size_t>(std::ceil(fraction * static_cast<double>(n))));
    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return score[a] > score[b]; });
    order.resize(keep);
    std::sort(order.begin(), order.end());
    return order;
}

inline Dataset select(const Dataset& ds, const std::vector<std::size_t>& indices) {
    Dataset out = ds.empty_like();
    out.trajectories.reserve(indices.size());
    for (std::size_t i : indices) out.trajectories.push_back(ds.trajectories.at(i));
    return out;
}

inline Dataset filter_top_fraction(const Dataset& ds, double fraction) {
    std::vector<double> totals;
    totals.reserve(ds.size());
    for (const auto& t : ds.trajectories) totals.push_back(t.total_reward());
    Dataset out = select(ds, top_fraction_indices(totals, fraction));
    out.provenance = ds.provenance + " | top " + std::to_string(fraction) + " by return";
    return out;
}

using SuccessPredicate = std::function<bool(const Trajectory&)>;

inline bool any_reward_one(const Trajectory& t) {
    return std::any_of(t.rewards.begin(), t.rewards.end(), [](double r) { return r == 1.0; });
}

inline Dataset filter_successful(const Dataset& ds, const SuccessPredicate& pred = any_reward_one) {
    Dataset out = ds.empty_like();
    for (const auto& t : ds.trajectories) {
        if (pred(t)) out.trajectories.push_back(t);
    }
    if (out.trajectories.empty()) throw UsageError("no trajectory satisfies the success predicate");
    out.provenance = ds.provenance + " | successful only";
    return out;
}

struct Split {
    Dataset train;
    Dataset validation;
    std::vector<std::size_t> train_indices;       // positions in the source dataset
    std::vector<std::size_t> validation_indices;
};

/// Trajectory-level split: floor(train_fraction * N) trajectories (at least 1,
/// at most N - 1) go to training. Each side keeps dataset order.
inline Split split_train_validation(const Dataset& ds, double train_fraction, std::uint64_t seed) {
    const std::size_t n = ds.size();
    if (n < 2) throw UsageError("splitting needs at least two trajectories");
    if (!(train_fraction > 0.0 && train_fraction < 1.0)) throw UsageError("train fraction must be in (0, 1)");
    auto n_train = static_cast<std::size_t>(std::floor(train_fraction * static_cast<double>(n)));
    n_train = std::clamp<std::size_t>(n_train, 1, n - 1);

    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), std::size_t{0});
    Rng rng = make_rng(seed, "split");
    for (std::size_t i = n - 1; i > 0; --i) std::swap(order[i], order[uniform_index(rng, i + 1)]);

    Split s;
    s.train_indices.assign(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(n_train));
    s.validation_indices.assign(order.begin() + static_cast<std::ptrdiff_t>(n_train), order.end());
    std::sort(s.train_indices.begin(), s.train_indices.end());
    std::sort(s.validation_indices.begin(), s.validation_indices.end());
    s.train = select(ds, s.train_indices);
    s.validation = select(ds, s.validation_indices);
    return s;
}

inline double normalized_score(double raw_return, double random_ref, double expert_ref) {
    if (expert_ref == random_ref) throw UsageError("reference scores must differ");
    return 100.0 * (raw_return - random_ref) / (expert_ref - random_ref);
}

}  // namespace rvs
