#pragma once

// Hyperparameter sweeps: the cross product of width, dropout and batch size,
// each trained under every seed. Cells are independent and run in parallel.

#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "rvs/train/trainer.hpp"
#include "rvs/util/parallel.hpp"

namespace rvs {

struct SweepAxes {
    std::vector<std::size_t> width;
    std::vector<double> dropout;
    std::vector<std::size_t> batch;
};

struct SweepRow {
    std::size_t cell = 0;  // position in (width, dropout, batch, seed) order
    std::size_t width = 0;
    double dropout = 0.0;
    std::size_t batch = 0;
    std::uint64_t seed = 0;
    double final_train_loss = NAN;
    double final_val_loss = NAN;
    std::optional<double> eval_return;
    std::optional<double> eval_success;
    std::string error;  // non-empty when the run failed

    bool operator==(const SweepRow& o) const {
        auto same = [](double x, double y) { return x == y || (std::isnan(x) && std::isnan(y)); };
        return cell == o.cell && width == o.width && dropout == o.dropout && batch == o.batch && seed == o.seed &&
               same(final_train_loss, o.final_train_loss) && same(final_val_loss, o.final_val_loss) &&
               eval_return == o.eval_return && eval_success == o.eval_success && error == o.error;
    }
};

/// Post-training evaluation of a finished artifact; it must be a pure
/// function of (artifact, seed).
using ArtifactEvaluator = std::function<EvalMetrics(const PolicyArtifact&, std::uint64_t seed)>;

/// Config for one cell. Empty axes keep the base value.
inline TrainConfig sweep_cell_config(const TrainConfig& base, std::size_t width, double dropout, std::size_t batch,
                                     std::uint64_t seed) {
    TrainConfig c = base;
    c.hidden_width = width;
    c.dropout = dropout;
    c.batch_size = batch;
    c.seed = seed;
    return c;
}

inline std::vector<SweepRow> sweep_cells(const TrainConfig& base, const SweepAxes& axes,
                                         const std::vector<std::uint64_t>& seeds) {
    const auto widths = axes.width.empty() ? std::vector<std::size_t>{base.hidden_width} : axes.width;
    const auto dropouts = axes.dropout.empty() ? std::vector<double>{base.dropout} : axes.dropout;
    const auto batches = axes.batch.empty() ? std::vector<std::size_t>{base.batch_size} : axes.batch;
    if (seeds.empty()) throw UsageError("a sweep needs at least one seed");
    std::vector<SweepRow> rows;
    for (auto w : widths) {
        for (auto d : dropouts) {
            for (auto b : batches) {
                for (auto s : seeds) {
                    SweepRow r;
                    r.cell = rows.size();
                    r.width = w;
                    r.dropout = d;
                    r.batch = b;
                    r.seed = s;
                    rows.push_back(r);
                }
            }
        }
    }
    return rows;
}

/// Evaluation seed of a trained cell; derived from the run seed alone so that
/// retraining a row's (config, seed) reproduces its metrics.
inline std::uint64_t sweep_eval_seed(std::uint64_t run_seed) { return derive_seed(run_seed, "sweep-eval"); }

/// Trains one row in place; failures are recorded, never thrown.
inline void run_sweep_cell(const Dataset& ds, const EnvSpec& env, const TrainConfig& base,
                           const ArtifactEvaluator& evaluate, SweepRow& row) {
    try {
        const TrainConfig c = sweep_cell_config(base, row.width, row.dropout, row.batch, row.seed);
        TrainResult res = train(ds, env, c);
        const auto& last = res.metrics.records.back();
        row.final_train_loss = last.train_loss;
        row.final_val_loss = last.val_loss;
        if (evaluate) {
            const EvalMetrics e = evaluate(res.artifact, sweep_eval_seed(row.seed));
            row.eval_return = e.mean_return;
            row.eval_success = e.success_rate;
        }
    } catch (const std::exception& e) {
        row.error = e.what();
    }
}

inline std::vector<SweepRow> run_sweep(const Dataset& ds, const EnvSpec& env, const TrainConfig& base,
                                       const SweepAxes& axes, const std::vector<std::uint64_t>& seeds,
                                       const ArtifactEvaluator& evaluate, std::size_t workers = 1) {
    std::vector<SweepRow> rows = sweep_cells(base, axes, seeds);
    for (const auto& r : rows) sweep_cell_config(base, r.width, r.dropout, r.batch, r.seed).validate();
    parallel_for(rows.size(), workers, [&](std::size_t i) { run_sweep_cell(ds, env, base, evaluate, rows[i]); });
    return rows;
}

inline std::string sweep_csv(const std::vector<SweepRow>& rows) {
    std::string out = "cell,width,dropout,batch,seed,final_train_loss,final_val_loss,eval_return,eval_success,error\n";
    for (const auto& r : rows) {
        out += std::to_string(r.cell) + "," + std::to_string(r.width) + "," + csv_number(r.dropout) + "," +
               std::to_string(r.batch) + "," + std::to_string(r.seed) + "," + csv_number(r.final_train_loss) + "," +
               csv_number(r.final_val_loss) + "," + csv_number(r.eval_return) + "," + csv_number(r.eval_success) +
               "," + csv_text(r.error) + "\n";
    }
    return out;
}

}  // namespace rvs
