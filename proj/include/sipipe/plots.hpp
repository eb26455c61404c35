#pragma once

#include <string>
#include <utility>
#include <vector>

namespace sipipe {

// Rejection-rate curves over one grid variable, one series per method.
struct RateTable {
    std::string grid_name; // "n", "d" or "delta"
    std::vector<double> grid;
    std::vector<std::pair<std::string, std::vector<double>>> series;
    double alpha = 0.05;
};

// Writes <basename>.csv and <basename>.svg under out_dir. CSV schema: first
// column is the grid variable, then one column per method, rates in [0, 1].
// The SVG draws one polyline per method plus a dashed alpha reference line.
void emit_plots(const RateTable& table, const std::string& kind, const std::string& out_dir,
                const std::string& basename);

} // namespace sipipe
