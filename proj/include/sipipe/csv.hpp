#pragma once

#include <string>
#include <vector>

#include "sipipe/inference.hpp"
#include "sipipe/types.hpp"

namespace sipipe {

struct CsvOptions {
    bool header = false;   // skip the first row
    char delimiter = ',';
    bool log1p = false;    // apply log(1 + x) per entry after parsing
};

// Strict numeric matrix reader; rejects ragged rows and non-finite values.
DataMatrix ingest_csv(const std::string& path, const CsvOptions& opt = {});

void write_matrix_csv(const std::string& path, const Eigen::MatrixXd& X);

// One row per test: pipeline, feature, z_obs, sigma_T, p_selective, p_naive,
// p_bonferroni, p_wopp, n_intervals, runtime_ms.
void write_records_csv(const std::string& path, const std::vector<TestRecord>& records);

} // namespace sipipe
