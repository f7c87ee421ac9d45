// Goal-conditioned policy on a reward task: which goal should it be given?
// Compares goals taken from high-reward trajectories, from long trajectories,
// and a search that scores candidate goals with environment rollouts.

#include <iostream>

#include "rvs/rvs.hpp"

using namespace rvs;

int main() {
    auto env = make_environment("four_rooms");
    const Dataset ds = collect_random(*env, 20000, 2);
    TrainConfig cfg;
    cfg.steps = 2000;
    const TrainResult res = train(ds, env->spec(), cfg);

    StrategyOptions opt;
    opt.n_rollouts = 100;
    opt.optimized_candidates = 20;
    const auto rows =
        goal_strategy_compare(*env, ds, res.artifact, {"reward_goal", "length_goal", "optimized_goal"}, 4, opt);
    std::cout << strategy_csv(rows);
}
