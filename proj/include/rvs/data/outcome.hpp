#pragma once

// Hindsight outcomes: future-state goals and average reward-to-go, plus the
// batch sampler that turns a dataset into (state, condition, action) triples.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <functional>
#include <map>
#include <span>
#include <string>
#include <variant>
#include <vector>

#include "rvs/common.hpp"
#include "rvs/data/trajectory.hpp"
#include "rvs/nn/matrix.hpp"

namespace rvs {

using GoalExtractor = std::function<std::vector<double>(std::span<const double>)>;

struct GoalExtractorEntry {
    GoalExtractor fn;
    std::size_t min_state_dim = 1;
    // Output dimension as a function of the state dimension.
    std::function<std::size_t(std::size_t)> dim;
};

inline const std::map<std::string, GoalExtractorEntry>& goal_extractors() {
    static const std::map<std::string, GoalExtractorEntry> registry{
        {"identity",
         {[](std::span<const double> s) { return std::vector<double>(s.begin(), s.end()); }, 1,
          [](std::size_t d) { return d; }}},
        {"xy",
         {[](std::span<const double> s) { return std::vector<double>(s.begin(), s.begin() + 2); }, 2,
          [](std::size_t) { return std::size_t{2}; }}},
    };
    return registry;
}

inline const GoalExtractorEntry& goal_extractor(const std::string& id) {
    const auto& reg = goal_extractors();
    auto it = reg.find(id);
    if (it == reg.end()) throw UsageError("unknown goal extractor '" + id + "'");
    return it->second;
}

/// Unconditioned behavior cloning: no condition vector.
struct NoOutcome {
    bool operator==(const NoOutcome&) const = default;
};

struct GoalOutcome {
    std::string extractor_id = "identity";
    bool operator==(const GoalOutcome&) const = default;
};

/// Average reward-to-go. With `normalize`, the scalar is mapped by
/// (w - lo) / (hi - lo) using bounds recorded from the training data.
struct AvgReturnOutcome {
    bool normalize = false;
    double lo = 0.0;
    double hi = 1.0;
    bool operator==(const AvgReturnOutcome&) const = default;

    double encode(double w) const { return normalize ? (w - lo) / (hi - lo) : w; }
};

using OutcomeSpec = std::variant<NoOutcome, GoalOutcome, AvgReturnOutcome>;

inline std::string outcome_name(const OutcomeSpec& o) {
    if (std::holds_alternative<NoOutcome>(o)) return "none";
    if (std::holds_alternative<GoalOutcome>(o)) return "goal";
    return "return";
}

inline std::size_t condition_dim(const OutcomeSpec& o, std::size_t state_dim) {
    if (std::holds_alternative<NoOutcome>(o)) return 0;
    if (const auto* g = std::get_if<GoalOutcome>(&o)) {
        const auto& e = goal_extractor(g->extractor_id);
        if (state_dim < e.min_state_dim) throw UsageError("goal extractor '" + g->extractor_id + "' needs a larger state");
        return e.dim(state_dim);
    }
    return 1;
}

/// Goal for timestep t: extractor applied to a state drawn uniformly from the
/// observed future s_{t+1}..s_{T-1}.
inline std::vector<double> sample_goal(const Trajectory& traj, std::size_t t, const GoalExtractor& extract, Rng& rng) {
    const std::size_t T = traj.length();
    if (t + 1 >= T) throw UsageError("timestep has no future state to relabel with");
    const std::size_t future = t + 1 + uniform_index(rng, T - 1 - t);
    return extract(traj.state(future));
}

/// (sum_{t'=t}^{T-1} r_t') / (H - t). Rewards past the end of the trajectory
/// count as zero while H stays in the denominator.
inline double avg_return_to_go(const Trajectory& traj, std::size_t t, std::size_t horizon) {
    const std::size_t T = traj.length();
    if (t >= T) throw UsageError("timestep past the end of the trajectory");
    if (horizon < T) throw UsageError("horizon shorter than the trajectory");
    double sum = 0.0;
    for (std::size_t k = t; k < T; ++k) sum += traj.rewards[k];
    return sum / static_cast<double>(horizon - t);
}

/// Min/max of the average return-to-go over every timestep of a dataset.
inline AvgReturnOutcome normalized_return_outcome(const Dataset& ds) {
    double lo = INFINITY, hi = -INFINITY;
    for (const auto& tr : ds.trajectories) {
        for (std::size_t t = 0; t < tr.length(); ++t) {
            const double w = avg_return_to_go(tr, t, ds.horizon);
            lo = std::min(lo, w);
            hi = std::max(hi, w);
        }
    }
    if (!(hi > lo)) hi = lo + 1.0;
    return AvgReturnOutcome{true, lo, hi};
}

struct Batch {
    Matrix inputs;   // [state | condition]
    Matrix actions;
    std::vector<std::size_t> trajectory_index;
    std::vector<std::size_t> timestep;
};

enum class TimestepSampling {
    per_trajectory,   // trajectory uniform, then t uniform within it
    length_weighted,  // (trajectory, t) uniform over all valid pairs
};

/// Draws training triples from a fixed dataset. Holds precomputed indices, so
/// build one per dataset and reuse it.
class BatchSampler {
public:
    BatchSampler(const Dataset& ds, OutcomeSpec spec, TimestepSampling rule = TimestepSampling::per_trajectory)
        : ds_(&ds), spec_(std::move(spec)), rule_(rule) {
        ds.validate();
        cond_dim_ = rvs::condition_dim(spec_, ds.state_dim);
        if (const auto* g = std::get_if<GoalOutcome>(&spec_)) extract_ = goal_extractor(g->extractor_id).fn;
        const bool goal = std::holds_alternative<GoalOutcome>(spec_);
        std::size_t cum = 0;
        for (std::size_t i = 0; i < ds.size(); ++i) {
            const std::size_t T = ds.trajectories[i].length();
            const std::size_t valid = goal ? T - 1 : T;
            if (valid == 0) continue;
            eligible_.push_back(i);
            cum += valid;
            cumulative_.push_back(cum);
        }
        if (eligible_.empty()) {
            throw UsageError("goal relabeling needs at least one trajectory of length 2 or more");
        }
    }

    std::size_t input_dim() const noexcept { return ds_->state_dim + cond_dim_; }
    std::size_t condition_dim() const noexcept { return cond_dim_; }
    const std::vector<std::size_t>& eligible() const noexcept { return eligible_; }

    void sample(std::size_t batch_size, Rng& rng, Batch& out) const {
        if (batch_size == 0) throw UsageError("batch size must be positive");
        const auto n = static_cast<Eigen::Index>(batch_size);
        out.inputs.resize(n, static_cast<Eigen::Index>(input_dim()));
        out.actions.resize(n, static_cast<Eigen::Index>(ds_->action_dim));
        out.trajectory_index.resize(batch_size);
        out.timestep.resize(batch_size);
        for (std::size_t b = 0; b < batch_size; ++b) {
            std::size_t slot;
            std::size_t t;
            if (rule_ == TimestepSampling::per_trajectory) {
                slot = uniform_index(rng, eligible_.size());
                t = uniform_index(rng, valid_count(slot));
            } else {
                const std::size_t k = uniform_index(rng, cumulative_.back());
                slot = static_cast<std::size_t>(std::upper_bound(cumulative_.begin(), cumulative_.end(), k) -
                                                cumulative_.begin());
                t = k - (slot == 0 ? 0 : cumulative_[slot - 1]);
            }
            write_example(eligible_[slot], t, rng, out, static_cast<Eigen::Index>(b));
        }
    }

private:
    std::size_t valid_count(std::size_t slot) const {
        return cumulative_[slot] - (slot == 0 ? 0 : cumulative_[slot - 1]);
    }

    void write_example(std::size_t ti, std::size_t t, Rng& rng, Batch& out, Eigen::Index row) const {
        const Trajectory& tr = ds_->trajectories[ti];
        const auto s = tr.state(t);
        Eigen::Index c = 0;
        for (double v : s) out.inputs(row, c++) = v;
        if (std::holds_alternative<GoalOutcome>(spec_)) {
            for (double v : sample_goal(tr, t, extract_, rng)) out.inputs(row, c++) = v;
        } else if (const auto* r = std::get_if<AvgReturnOutcome>(&spec_)) {
            out.inputs(row, c++) = r->encode(avg_return_to_go(tr, t, ds_->horizon));
        }
        const auto a = tr.action(t);
        for (std::size_t d = 0; d < a.size(); ++d) out.actions(row, static_cast<Eigen::Index>(d)) = a[d];
        out.trajectory_index[static_cast<std::size_t>(row)] = ti;
        out.timestep[static_cast<std::size_t>(row)] = t;
    }

    const Dataset* ds_;
    OutcomeSpec spec_;
    TimestepSampling rule_;
    std::size_t cond_dim_ = 0;
    GoalExtractor extract_;
    std::vector<std::size_t> eligible_;
    std::vector<std::size_t> cumulative_;
};

inline Batch build_batch(const Dataset& ds, const OutcomeSpec& spec, std::size_t batch_size, Rng& rng) {
    Batch b;
    BatchSampler(ds, spec).sample(batch_size, rng, b);
    return b;
}

}  // namespace rvs
