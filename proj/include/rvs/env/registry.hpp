#pragma once

#include <memory>
#include <string>
#include <vector>

#include "rvs/env/four_rooms.hpp"
#include "rvs/env/point_reach.hpp"
#include "rvs/env/stitch_maze.hpp"
#include "rvs/env/two_mode_line.hpp"

namespace rvs {

inline std::vector<std::string> env_ids() { return {"four_rooms", "point_reach", "stitch_maze", "two_mode_line"}; }

inline std::shared_ptr<const Environment> make_environment(const std::string& id) {
    if (id == "four_rooms") return std::make_shared<FourRooms>();
    if (id == "point_reach") return std::make_shared<PointReach>();
    if (id == "stitch_maze") return std::make_shared<StitchMaze>();
    if (id == "two_mode_line") return std::make_shared<TwoModeLine>();
    std::string known;
    for (const auto& e : env_ids()) known += (known.empty() ? "" : ", ") + e;
    throw UsageError("unknown env '" + id + "' (available: " + known + ")");
}

/// Dataset header must agree with the env it claims to come from.
inline void check_compatible(const Environment& env, const Dataset& ds) {
    const auto& s = env.spec();
    if (ds.env_id != s.id) throw UsageError("dataset is for '" + ds.env_id + "', not '" + s.id + "'");
    if (ds.state_dim != s.state_dim || ds.action_dim != s.action_dim() || ds.horizon != s.horizon) {
        throw UsageError("dataset dimensions or horizon do not match env '" + s.id + "'");
    }
}

}  // namespace rvs
