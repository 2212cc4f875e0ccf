// Solver-independent description of a network configuration: device states,
// routed flows or paths, link weights, and the power the producer claims.
#pragma once

#include <optional>
#include <string>
#include <vector>

#include "eanm/model.hpp"

namespace eanm {

enum class CommodityKind { PerDemand, PerSource, PerDestination };

struct Solution {
    std::string variant;  // routing | energy | protection.<mode> | multiperiod | sp_ecmp
    CommodityKind commodities = CommodityKind::PerDemand;
    bool alr = false;    // link_state holds config indices instead of card counts
    bool smart = false;  // protection accounting: only primary carriers count
    bool shared_backup = false;
    bool has_protection = false;
    int num_periods = 1;

    // Indexed [period][node] / [period][arc], aligned with the instance order.
    std::vector<std::vector<bool>> node_on;
    std::vector<std::vector<int>> link_state;

    // Splittable commodity flows, [period][commodity][arc]; empty for
    // path-based variants.
    std::vector<std::string> commodity_keys;  // "d0" / "s:N1" / "t:N2"
    std::vector<std::vector<std::vector<double>>> flows;

    // Path-based variants, [period][demand] -> arc index sequence.
    std::vector<std::vector<std::vector<int>>> primary;
    std::vector<std::vector<std::vector<int>>> backup;

    std::optional<std::vector<double>> weights;  // per arc, sp_ecmp variant
    double total_power = 0.0;
};

}  // namespace eanm
