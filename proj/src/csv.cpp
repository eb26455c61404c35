#include "sipipe/csv.hpp"

#include <cmath>
#include <fstream>
#include <iomanip>
#include <sstream>

#include "sipipe/errors.hpp"

namespace sipipe {

DataMatrix ingest_csv(const std::string& path, const CsvOptions& opt) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open data file: " + path);

    std::vector<std::vector<double>> rows;
    std::string line;
    bool first = true;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        if (first && opt.header) {
            first = false;
            continue;
        }
        first = false;
        std::vector<double> row;
        std::stringstream ss(line);
        std::string cell;
        while (std::getline(ss, cell, opt.delimiter)) {
            std::size_t used = 0;
            double v;
            try {
                v = std::stod(cell, &used);
            } catch (const std::exception&) {
                throw ConfigError("line " + std::to_string(lineno) + ": cannot parse '" + cell + "'");
            }
            while (used < cell.size() && std::isspace(static_cast<unsigned char>(cell[used]))) ++used;
            if (used != cell.size()) {
                throw ConfigError("line " + std::to_string(lineno) + ": trailing junk in '" + cell + "'");
            }
            if (!std::isfinite(v)) {
                throw ConfigError("line " + std::to_string(lineno) + ": non-finite value");
            }
            if (opt.log1p) {
                if (v <= -1.0) {
                    throw ConfigError("line " + std::to_string(lineno) +
                                      ": log1p transform undefined for values <= -1");
                }
                v = std::log1p(v);
            }
            row.push_back(v);
        }
        if (!rows.empty() && row.size() != rows.front().size()) {
            throw ConfigError("line " + std::to_string(lineno) + ": ragged row");
        }
        rows.push_back(std::move(row));
    }
    if (rows.empty() || rows.front().empty()) throw ConfigError("data file is empty: " + path);

    Eigen::MatrixXd X(static_cast<Eigen::Index>(rows.size()), static_cast<Eigen::Index>(rows.front().size()));
    for (std::size_t i = 0; i < rows.size(); ++i) {
        for (std::size_t j = 0; j < rows[i].size(); ++j) {
            X(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = rows[i][j];
        }
    }
    return DataMatrix(std::move(X));
}

void write_matrix_csv(const std::string& path, const Eigen::MatrixXd& X) {
    std::ofstream out(path);
    if (!out) throw ConfigError("cannot write: " + path);
    out << std::setprecision(17);
    for (Eigen::Index i = 0; i < X.rows(); ++i) {
        for (Eigen::Index j = 0; j < X.cols(); ++j) {
            if (j) out << ',';
            out << X(i, j);
        }
        out << '\n';
    }
}

void write_records_csv(const std::string& path, const std::vector<TestRecord>& records) {
    std::ofstream out(path);
    if (!out) throw ConfigError("cannot write: " + path);
    out << "pipeline,feature,z_obs,sigma_T,p_selective,p_naive,p_bonferroni,p_wopp,n_intervals,"
           "runtime_ms\n";
    out << std::setprecision(12);
    for (const TestRecord& r : records) {
        out << r.pipeline << ',' << r.feature << ',' << r.z_obs << ',' << r.sigma_T << ','
            << r.p_selective << ',' << r.p_naive << ',' << r.p_bonferroni << ',' << r.p_wopp << ','
            << r.n_intervals << ',' << r.runtime_ms << '\n';
    }
}

} // namespace sipipe
