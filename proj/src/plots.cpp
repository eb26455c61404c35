#include "sipipe/plots.hpp"

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <sstream>

#include "sipipe/errors.hpp"

namespace sipipe {

namespace {

const char* kPalette[] = {"#1f77b4", "#ff7f0e", "#2ca02c", "#d62728", "#9467bd", "#8c564b"};

std::string fmt(double v) {
    std::ostringstream os;
    os << std::setprecision(6) << v;
    return os.str();
}

} // namespace

void emit_plots(const RateTable& table, const std::string& kind, const std::string& out_dir,
                const std::string& basename) {
    if (table.grid.empty() || table.series.empty()) throw ConfigError("emit_plots: empty table");
    for (const auto& [name, values] : table.series) {
        if (values.size() != table.grid.size()) {
            throw ConfigError("emit_plots: series '" + name + "' length mismatch");
        }
    }
    std::filesystem::create_directories(out_dir);
    const std::string stem = out_dir + "/" + basename;

    {
        std::ofstream csv(stem + ".csv");
        if (!csv) throw ConfigError("cannot write: " + stem + ".csv");
        csv << table.grid_name;
        for (const auto& [name, values] : table.series) csv << ',' << name;
        csv << '\n';
        csv << std::setprecision(10);
        for (std::size_t i = 0; i < table.grid.size(); ++i) {
            csv << table.grid[i];
            for (const auto& [name, values] : table.series) csv << ',' << values[i];
            csv << '\n';
        }
    }

    const double W = 640, H = 420;
    const double ml = 70, mr = 160, mt = 40, mb = 55;
    const double pw = W - ml - mr, ph = H - mt - mb;
    double ymax = table.alpha;
    for (const auto& [name, values] : table.series) {
        for (double v : values) ymax = std::max(ymax, v);
    }
    ymax = std::min(1.0, ymax * 1.15 + 1e-9);
    const double xmin = table.grid.front(), xmax = table.grid.back();
    const double xspan = xmax > xmin ? xmax - xmin : 1.0;
    const auto px = [&](double x) { return ml + pw * (x - xmin) / xspan; };
    const auto py = [&](double y) { return mt + ph * (1.0 - y / ymax); };

    std::ofstream svg(stem + ".svg");
    if (!svg) throw ConfigError("cannot write: " + stem + ".svg");
    svg << "<svg xmlns='http://www.w3.org/2000/svg' width='" << W << "' height='" << H << "'>\n";
    svg << "<rect width='100%' height='100%' fill='white'/>\n";
    svg << "<text x='" << W / 2 << "' y='20' text-anchor='middle' font-size='15'>"
        << (kind == "power" ? "rejection rate vs signal" : "rejection rate vs " + table.grid_name)
        << "</text>\n";
    // axes
    svg << "<line x1='" << ml << "' y1='" << mt << "' x2='" << ml << "' y2='" << mt + ph
        << "' stroke='black'/>\n";
    svg << "<line x1='" << ml << "' y1='" << mt + ph << "' x2='" << ml + pw << "' y2='" << mt + ph
        << "' stroke='black'/>\n";
    for (int t = 0; t <= 4; ++t) {
        const double yv = ymax * t / 4.0;
        svg << "<text x='" << ml - 8 << "' y='" << py(yv) + 4
            << "' text-anchor='end' font-size='11'>" << fmt(yv) << "</text>\n";
        svg << "<line x1='" << ml - 4 << "' y1='" << py(yv) << "' x2='" << ml << "' y2='" << py(yv)
            << "' stroke='black'/>\n";
    }
    for (double gx : table.grid) {
        svg << "<text x='" << px(gx) << "' y='" << mt + ph + 18
            << "' text-anchor='middle' font-size='11'>" << fmt(gx) << "</text>\n";
        svg << "<line x1='" << px(gx) << "' y1='" << mt + ph << "' x2='" << px(gx) << "' y2='"
            << mt + ph + 4 << "' stroke='black'/>\n";
    }
    svg << "<text x='" << ml + pw / 2 << "' y='" << H - 12 << "' text-anchor='middle' font-size='13'>"
        << table.grid_name << "</text>\n";
    // alpha reference
    svg << "<line x1='" << ml << "' y1='" << py(table.alpha) << "' x2='" << ml + pw << "' y2='"
        << py(table.alpha) << "' stroke='gray' stroke-dasharray='6,4'/>\n";
    svg << "<text x='" << ml + pw + 6 << "' y='" << py(table.alpha) + 4
        << "' font-size='11' fill='gray'>alpha=" << fmt(table.alpha) << "</text>\n";

    int ci = 0;
    for (const auto& [name, values] : table.series) {
        const char* color = kPalette[ci % 6];
        svg << "<polyline fill='none' stroke='" << color << "' stroke-width='2' points='";
        for (std::size_t i = 0; i < table.grid.size(); ++i) {
            svg << px(table.grid[i]) << ',' << py(std::clamp(values[i], 0.0, 1.0)) << ' ';
        }
        svg << "'/>\n";
        for (std::size_t i = 0; i < table.grid.size(); ++i) {
            svg << "<circle cx='" << px(table.grid[i]) << "' cy='"
                << py(std::clamp(values[i], 0.0, 1.0)) << "' r='3' fill='" << color << "'/>\n";
        }
        const double ly = mt + 16 + 18 * ci;
        svg << "<line x1='" << ml + pw + 8 << "' y1='" << ly << "' x2='" << ml + pw + 30 << "' y2='"
            << ly << "' stroke='" << color << "' stroke-width='2'/>\n";
        svg << "<text x='" << ml + pw + 36 << "' y='" << ly + 4 << "' font-size='12'>" << name
            << "</text>\n";
        ++ci;
    }
    svg << "</svg>\n";
}

} // namespace sipipe
