// Return conditioning on a dataset with two return modes: sweep the target
// between them and print what the policy actually achieves.

#include <iomanip>
#include <iostream>

#include "rvs/rvs.hpp"

using namespace rvs;

int main() {
    auto env = make_environment("two_mode_line");
    const Dataset ds = collect_scripted(*env, {"medium", "expert"}, 1000, 0, 0.1);

    TrainConfig cfg;
    cfg.outcome = "return";
    cfg.head = "gaussian";
    cfg.steps = 5000;
    const TrainResult res = train(ds, env->spec(), cfg);

    const auto rows = reward_target_sweep(*env, res.artifact, parse_targets("20:50:2.5"), 20, 3);
    std::cout << "target  achieved\n";
    for (const auto& r : rows) {
        std::cout << std::setw(6) << r.target << "  " << std::setw(8) << std::fixed << std::setprecision(2)
                  << r.report.mean_return << std::defaultfloat << "\n";
    }
}
