#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <map>
#include <optional>
#include <vector>

#include "stratrand/stratum.hpp"

namespace stratrand {

// One enrolled subject. Arms are 1..k; arm 0 means not yet assigned.
struct SubjectRecord {
    std::int64_t id = 0;
    StratumKey stratum;
    Eigen::VectorXd x;            // adjustment covariates, length p (may be 0)
    int arm = 0;
    std::optional<double> y;
};

struct TrialDataset {
    int k = 2;                    // number of arms
    int p = 0;                    // covariate dimension
    std::vector<SubjectRecord> subjects;
};

// Per (arm, stratum) sufficient statistics, accumulated in one pass with
// Welford-style centered updates: means plus centered second-moment sums.
struct CellSummary {
    std::int64_t n = 0;
    double mean_y = 0.0;
    double ss_y = 0.0;            // sum (y - mean_y)^2
    Eigen::VectorXd mean_x;       // p
    Eigen::MatrixXd gram;         // sum (x - mean_x)(x - mean_x)^T
    Eigen::VectorXd xy;           // sum (x - mean_x)(y - mean_y)
};

// Per-stratum statistics pooled over every arm.
struct ZSummary {
    std::int64_t n = 0;
    Eigen::VectorXd mean_x;       // pooled mean of x within the stratum
    Eigen::MatrixXd cxx;          // pooled sum (x - mean_x)(x - mean_x)^T
    std::vector<CellSummary> arm; // size k, index arm-1
};

struct DatasetSummary {
    int k = 0;
    int p = 0;
    std::int64_t n = 0;
    std::map<StratumKey, ZSummary> strata;   // deterministic (lexicographic) order
};

// Single pass over the dataset. Throws IncompleteRecord when a subject lacks
// an arm or outcome, has an arm outside 1..k, or a covariate vector whose
// length differs from dataset.p; throws ConfigMismatch when stratum keys have
// inconsistent factor counts.
DatasetSummary summarize(const TrialDataset& dataset);

} // namespace stratrand
