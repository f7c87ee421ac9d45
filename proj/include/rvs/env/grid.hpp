#pragma once

// Shared gridworld mechanics: layout parsing, moves, walls, shortest paths.

#include <array>
#include <cmath>
#include <deque>
#include <limits>
#include <string>
#include <vector>

#include "rvs/env/spec.hpp"

namespace rvs {

struct Cell {
    int x = 0;
    int y = 0;
    bool operator==(const Cell&) const = default;
};

// Action indices: 0 up, 1 down, 2 left, 3 right, 4 stay.
inline constexpr std::array<Cell, 5> kMoves{{{0, -1}, {0, 1}, {-1, 0}, {1, 0}, {0, 0}}};
inline constexpr int kStay = 4;

class Grid {
public:
    Grid() = default;

    /// Rows of equal length; '#' is a wall, anything else is free.
    explicit Grid(std::vector<std::string> rows) : rows_(std::move(rows)) {
        if (rows_.empty()) throw UsageError("empty grid layout");
        for (const auto& r : rows_) {
            if (r.size() != rows_[0].size()) throw UsageError("grid rows differ in length");
        }
        for (int y = 0; y < height(); ++y) {
            for (int x = 0; x < width(); ++x) {
                if (free({x, y})) free_cells_.push_back({x, y});
            }
        }
    }

    int width() const { return static_cast<int>(rows_[0].size()); }
    int height() const { return static_cast<int>(rows_.size()); }
    char at(Cell c) const { return rows_[static_cast<std::size_t>(c.y)][static_cast<std::size_t>(c.x)]; }
    bool inside(Cell c) const { return c.x >= 0 && c.y >= 0 && c.x < width() && c.y < height(); }
    bool free(Cell c) const { return inside(c) && at(c) != '#'; }
    const std::vector<Cell>& free_cells() const { return free_cells_; }

    Cell move(Cell c, int action) const {
        const Cell n{c.x + kMoves[static_cast<std::size_t>(action)].x, c.y + kMoves[static_cast<std::size_t>(action)].y};
        return free(n) ? n : c;
    }

    std::vector<Cell> cells_marked(const std::string& marks) const {
        std::vector<Cell> out;
        for (const auto& c : free_cells_) {
            if (marks.find(at(c)) != std::string::npos) out.push_back(c);
        }
        return out;
    }

    /// BFS distance from every cell to `target` (-1 when unreachable).
    std::vector<int> distances_to(Cell target) const {
        std::vector<int> dist(static_cast<std::size_t>(width() * height()), -1);
        std::deque<Cell> q{target};
        dist[index(target)] = 0;
        while (!q.empty()) {
            const Cell c = q.front();
            q.pop_front();
            for (int a = 0; a < 4; ++a) {
                const Cell n = move(c, a);
                if (dist[index(n)] < 0) {
                    dist[index(n)] = dist[index(c)] + 1;
                    q.push_back(n);
                }
            }
        }
        return dist;
    }

    /// A uniformly chosen action that moves one step closer to the target of
    /// `dist`; "stay" when already there.
    int greedy_action(const std::vector<int>& dist, Cell c, Rng& rng) const {
        const int here = dist[index(c)];
        if (here <= 0) return kStay;
        std::vector<int> best;
        for (int a = 0; a < 4; ++a) {
            if (dist[index(move(c, a))] == here - 1) best.push_back(a);
        }
        return best[uniform_index(rng, best.size())];
    }

    std::size_t index(Cell c) const { return static_cast<std::size_t>(c.y * width() + c.x); }

    static Cell cell_of(std::span<const double> obs) {
        return {static_cast<int>(std::lround(obs[0])), static_cast<int>(std::lround(obs[1]))};
    }
    static std::vector<double> obs_of(Cell c) { return {static_cast<double>(c.x), static_cast<double>(c.y)}; }

    bool is_cell_vector(std::span<const double> v) const {
        if (v.size() != 2) return false;
        if (v[0] != std::floor(v[0]) || v[1] != std::floor(v[1])) return false;
        return free(cell_of(v));
    }

private:
    std::vector<std::string> rows_;
    std::vector<Cell> free_cells_;
};

/// Goal-reaching gridworld: observation (x, y), 5 moves, reward 1 on reaching
/// the goal cell, which ends the episode.
class GridEnvironment : public Environment {
public:
    const EnvSpec& spec() const override { return spec_; }
    const Grid& grid() const { return grid_; }

    EnvState reset_at(const std::vector<double>& observation,
                      const std::optional<std::vector<double>>& goal) const override {
        if (!grid_.is_cell_vector(observation)) throw UsageError("start is not a free cell of " + spec_.id);
        check_goal(goal);
        EnvState s;
        s.observation = observation;
        if (goal) {
            s.goal = *goal;
            s.has_goal = true;
            if (observation == *goal) s.done = s.success = true;
        }
        return s;
    }

    StepResult step(const EnvState& state, std::span<const double> action) const override {
        check_steppable(state);
        if (action.size() != 1) throw UsageError("grid actions are a single index");
        const long a = std::lround(action[0]);
        if (a < 0 || a > 4 || std::abs(action[0] - static_cast<double>(a)) > 1e-9) {
            throw UsageError("grid action out of range: " + std::to_string(action[0]));
        }
        StepResult r;
        r.state = state;
        r.executed_action = {static_cast<double>(a)};
        r.state.observation = Grid::obs_of(grid_.move(Grid::cell_of(state.observation), static_cast<int>(a)));
        ++r.state.elapsed;
        if (state.has_goal && r.state.observation == state.goal) {
            r.reward = 1.0;
            r.state.success = true;
            r.state.done = true;
        }
        if (r.state.elapsed >= spec_.horizon) r.state.done = true;
        r.done = r.state.done;
        return r;
    }

    bool goal_in_space(std::span<const double> goal) const override { return grid_.is_cell_vector(goal); }

    std::vector<double> sample_goal(Rng& rng) const override {
        return Grid::obs_of(grid_.free_cells()[uniform_index(rng, grid_.free_cells().size())]);
    }

    std::vector<double> random_action(Rng& rng) const override {
        return {static_cast<double>(uniform_index(rng, 5))};
    }

protected:
    GridEnvironment(EnvSpec spec, Grid grid) : spec_(std::move(spec)), grid_(std::move(grid)) {
        spec_.state_dim = 2;
        spec_.action_space = ActionSpace::discrete_space(5);
        spec_.goal_extractor_id = "identity";
        spec_.goal_dim = 2;
        spec_.success_radius = 0.0;
        // Precomputed so concurrent rollouts only read.
        distances_.resize(static_cast<std::size_t>(grid_.width() * grid_.height()));
        for (const auto& c : grid_.free_cells()) distances_[grid_.index(c)] = grid_.distances_to(c);
    }

    /// Shortest-path policy toward the goal with "stay" once there; with
    /// probability `noise` a uniform random action instead.
    std::vector<double> toward(Cell target, const EnvState& state, double noise, Rng& rng) const {
        if (noise > 0.0 && uniform01(rng) < noise) return random_action(rng);
        const auto& dist = cached_distances(target);
        return {static_cast<double>(grid_.greedy_action(dist, Grid::cell_of(state.observation), rng))};
    }

    const std::vector<int>& cached_distances(Cell target) const { return distances_.at(grid_.index(target)); }

    EnvSpec spec_;
    Grid grid_;
    std::vector<std::vector<int>> distances_;
};

}  // namespace rvs
