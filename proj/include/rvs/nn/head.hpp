#pragma once

// Action heads: factorized categorical over per-dimension bins, or a diagonal
// Gaussian with a state-independent log standard deviation.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <string>
#include <vector>

#include "rvs/common.hpp"

namespace rvs {

enum class HeadKind { categorical, gaussian };

inline constexpr double kLogStdMin = -5.0;
inline constexpr double kLogStdMax = 2.0;

struct HeadSpec {
    HeadKind kind = HeadKind::categorical;
    std::size_t action_dims = 1;
    std::size_t bins = 15;          // categorical only
    std::vector<double> low;        // categorical only, one entry per action dim
    std::vector<double> high;

    static HeadSpec categorical(std::size_t dims, std::size_t bins, std::vector<double> low, std::vector<double> high) {
        HeadSpec h{HeadKind::categorical, dims, bins, std::move(low), std::move(high)};
        h.validate();
        return h;
    }

    static HeadSpec gaussian(std::size_t dims) {
        HeadSpec h{HeadKind::gaussian, dims, 0, {}, {}};
        h.validate();
        return h;
    }

    void validate() const {
        if (action_dims == 0) throw UsageError("action head needs at least one action dimension");
        if (kind == HeadKind::categorical) {
            if (bins < 2) throw UsageError("categorical head needs at least 2 bins per dimension");
            if (low.size() != action_dims || high.size() != action_dims) {
                throw UsageError("categorical head bounds must have one entry per action dimension");
            }
            for (std::size_t d = 0; d < action_dims; ++d) {
                if (!(high[d] > low[d])) throw UsageError("categorical head bounds need high > low");
            }
        }
    }

    /// Width of the network output layer.
    std::size_t output_dim() const { return kind == HeadKind::categorical ? action_dims * bins : action_dims; }

    double bin_width(std::size_t d) const { return (high[d] - low[d]) / static_cast<double>(bins); }

    double bin_center(std::size_t d, std::size_t k) const {
        return low[d] + (static_cast<double>(k) + 0.5) * bin_width(d);
    }

    /// Bin index for an action value. Values outside [low, high] go to the edge
    /// bin and set `clamped`.
    std::size_t bin_index(std::size_t d, double value, bool& clamped) const {
        clamped = false;
        if (value < low[d] || value > high[d]) clamped = true;
        const double pos = std::floor((value - low[d]) / bin_width(d));
        if (!(pos >= 0.0)) return 0;
        return std::min(static_cast<std::size_t>(pos), bins - 1);
    }

    bool operator==(const HeadSpec&) const = default;
};

inline std::string to_string(HeadKind k) { return k == HeadKind::categorical ? "categorical" : "gaussian"; }

inline HeadKind head_kind_from_string(const std::string& s) {
    if (s == "categorical") return HeadKind::categorical;
    if (s == "gaussian") return HeadKind::gaussian;
    throw UsageError("unknown head '" + s + "' (expected categorical or gaussian)");
}

}  // namespace rvs
