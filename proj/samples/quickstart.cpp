// Collect random FourRooms data, train a goal-conditioned policy and plain BC
// on it, and compare their goal success. A small budget keeps this to about a
// minute; raise `steps` toward the 20k default for the full effect.

#include <iostream>

#include "rvs/rvs.hpp"

using namespace rvs;

int main() {
    auto env = make_environment("four_rooms");
    const Dataset ds = collect_random(*env, 50000, 0);
    std::cout << ds.size() << " trajectories, " << ds.transition_count() << " transitions\n";

    TrainConfig cfg;
    cfg.steps = 3000;
    cfg.eval_every = 1000;
    const TrainResult goal = train(ds, env->spec(), cfg);
    cfg.outcome = "none";
    const TrainResult bc = train(ds, env->spec(), cfg);

    for (const auto& r : goal.metrics.records) {
        std::cout << "step " << r.step << "  train " << r.train_loss << "  val " << r.val_loss << "\n";
    }
    const EvalReport g = evaluate(*env, goal.artifact, EvalGoal{}, 200, 1);
    const EvalReport b = evaluate(*env, bc.artifact, Unconditioned{}, 200, 1);
    std::cout << "goal-conditioned success " << *g.success_rate << "%, BC " << *b.success_rate << "%\n";

    save_checkpoint(goal.artifact, "four_rooms_goal.rvsc");
    std::cout << "checkpoint written to four_rooms_goal.rvsc\n";
}
