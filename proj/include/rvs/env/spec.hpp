#pragma once

// Environment interface. Environments are stateless objects: reset and step
// are pure functions of their arguments, and all randomness is supplied by the
// caller (seeds for resets, streams for policies).

#include <cmath>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <json.hpp>

#include "rvs/common.hpp"
#include "rvs/nn/head.hpp"

namespace rvs {

struct ActionSpace {
    bool discrete = true;
    std::size_t n = 0;          // discrete: number of actions
    std::size_t dims = 1;       // continuous: box dimension (discrete actions are 1-d indices)
    std::vector<double> low;    // continuous only
    std::vector<double> high;

    static ActionSpace discrete_space(std::size_t n) { return {true, n, 1, {}, {}}; }
    static ActionSpace box(std::size_t dims, double lo, double hi) {
        return {false, 0, dims, std::vector<double>(dims, lo), std::vector<double>(dims, hi)};
    }

    bool contains(std::span<const double> a) const {
        if (a.size() != dims) return false;
        if (discrete) return a[0] >= 0.0 && a[0] < static_cast<double>(n) && a[0] == std::floor(a[0]);
        for (std::size_t d = 0; d < dims; ++d) {
            if (!(a[d] >= low[d] && a[d] <= high[d])) return false;
        }
        return true;
    }
};

struct ReferenceScores {
    double random_return = 0.0;
    double expert_return = 1.0;
};

struct EnvSpec {
    std::string id;
    std::size_t state_dim = 0;
    ActionSpace action_space;
    std::size_t horizon = 50;
    std::string goal_extractor_id;  // empty when the env has no goal space
    std::size_t goal_dim = 0;
    ReferenceScores reference;
    double success_radius = 0.0;    // goal reached when extractor(obs) is within this distance
    bool goal_task = false;         // evaluation commands goals (success metric defined)
    std::vector<std::string> scripted_policies;
    std::string description;

    std::size_t action_dim() const { return action_space.dims; }

    /// Categorical heads over a discrete space get one bin per action with
    /// integer bin centers; boxes get `bins` bins per dimension.
    HeadSpec head(HeadKind kind, std::size_t bins = 15) const {
        if (action_space.discrete) {
            if (kind != HeadKind::categorical) throw UsageError(id + " has discrete actions; use a categorical head");
            return HeadSpec::categorical(1, action_space.n, {-0.5}, {static_cast<double>(action_space.n) - 0.5});
        }
        if (kind == HeadKind::gaussian) return HeadSpec::gaussian(action_space.dims);
        return HeadSpec::categorical(action_space.dims, bins, action_space.low, action_space.high);
    }

    nlohmann::json to_json() const {
        nlohmann::json j{{"id", id},
                         {"state_dim", state_dim},
                         {"horizon", horizon},
                         {"goal_extractor", goal_extractor_id},
                         {"goal_dim", goal_dim},
                         {"random_return", reference.random_return},
                         {"expert_return", reference.expert_return},
                         {"success_radius", success_radius},
                         {"goal_task", goal_task}};
        if (action_space.discrete) {
            j["action_space"] = {{"type", "discrete"}, {"n", action_space.n}};
        } else {
            j["action_space"] = {{"type", "box"}, {"low", action_space.low}, {"high", action_space.high}};
        }
        return j;
    }
};

struct EnvState {
    std::vector<double> observation;
    std::vector<double> goal;
    bool has_goal = false;
    std::size_t elapsed = 0;
    bool done = false;
    bool success = false;
    std::size_t clip_count = 0;  // continuous actions clipped into the box so far

    bool operator==(const EnvState&) const = default;
};

struct StepResult {
    EnvState state;
    double reward = 0.0;
    bool done = false;
    std::vector<double> executed_action;  // action after clipping / rounding
};

inline double euclidean(std::span<const double> a, std::span<const double> b) {
    double s = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) s += (a[i] - b[i]) * (a[i] - b[i]);
    return std::sqrt(s);
}

class Environment {
public:
    virtual ~Environment() = default;

    virtual const EnvSpec& spec() const = 0;

    /// Start state drawn from the env's initial distribution using `seed`. The
    /// start depends on the seed only, never on the goal.
    virtual EnvState reset(std::uint64_t seed, const std::optional<std::vector<double>>& goal) const = 0;

    /// State placed at a given observation (scripted collectors choose starts).
    virtual EnvState reset_at(const std::vector<double>& observation,
                              const std::optional<std::vector<double>>& goal) const = 0;

    virtual StepResult step(const EnvState& state, std::span<const double> action) const = 0;

    virtual bool goal_in_space(std::span<const double> goal) const = 0;

    /// Uniform draw from the goal space.
    virtual std::vector<double> sample_goal(Rng& rng) const = 0;

    /// Goal used for evaluation rollouts; uniform over the goal space unless
    /// the env fixes its evaluation task.
    virtual std::vector<double> sample_eval_goal(std::uint64_t seed) const {
        Rng rng = make_rng(seed, "eval-goal");
        return sample_goal(rng);
    }

    virtual std::vector<double> random_action(Rng& rng) const = 0;

    /// Scripted behavior policies. `setup` builds the episode's start state and
    /// goal; `act` chooses an action.
    virtual EnvState scripted_setup(const std::string& policy, std::uint64_t seed, Rng& rng) const {
        require_policy(policy);
        const std::optional<std::vector<double>> goal =
            spec().goal_task ? std::optional<std::vector<double>>(sample_goal(rng)) : std::nullopt;
        return reset(seed, goal);
    }
    virtual std::vector<double> scripted_action(const std::string& policy, const EnvState& state, double noise,
                                                Rng& rng) const = 0;

    bool goal_reached(std::span<const double> observation, std::span<const double> goal) const {
        return euclidean(observation.subspan(0, goal.size()), goal) <= spec().success_radius;
    }

protected:
    void require_policy(const std::string& policy) const {
        for (const auto& p : spec().scripted_policies) {
            if (p == policy) return;
        }
        std::string known;
        for (const auto& p : spec().scripted_policies) known += (known.empty() ? "" : ", ") + p;
        throw UsageError("collector '" + policy + "' is not available for " + spec().id + " (available: random" +
                         (known.empty() ? "" : ", " + known) + ")");
    }

    void check_goal(const std::optional<std::vector<double>>& goal) const {
        if (goal && !goal_in_space(*goal)) throw UsageError("goal outside the goal space of " + spec().id);
    }

    void check_steppable(const EnvState& s) const {
        if (s.done) throw UsageError("cannot step a finished episode");
    }
};

}  // namespace rvs
