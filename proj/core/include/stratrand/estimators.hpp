#pragma once

#include <Eigen/Dense>
#include <map>
#include <string>
#include <vector>

#include "stratrand/dataset.hpp"

namespace stratrand {

// Pairwise treatment contrast: estimand is E[Y^(t)] - E[Y^(s)].
struct ContrastSpec {
    int t = 2;
    int s = 1;

    std::string str() const { return std::to_string(t) + "-" + std::to_string(s); }
};

struct EstimateOptions {
    // Drop strata where a contrast arm has no subjects (reweighting the
    // remaining strata) instead of throwing EmptyCell.
    bool drop_incomplete_strata = false;
    // Optional sink for non-fatal warnings (small cells, dropped strata).
    std::vector<std::string>* warnings = nullptr;
};

// Solves gram * beta = xy for a symmetric PSD gram matrix; the slope of the
// within-cell least-squares fit when gram/xy are centered sums. Throws
// SingularGram when the reciprocal condition number (min/max eigenvalue)
// is below 1e-12. p = 0 returns an empty vector.
Eigen::VectorXd ols_slope(const Eigen::MatrixXd& gram, const Eigen::VectorXd& xy);

// Fitted slopes per (arm, stratum) and the pooled per-stratum slope.
// The pooled fit shares one slope across arms but centers x at each arm's
// own mean, so gram/xy are simply summed over arms.
struct StratumCoefs {
    std::map<StratumKey, std::vector<Eigen::VectorXd>> per_arm;  // index arm-1
    std::map<StratumKey, Eigen::VectorXd> pooled;
};

// Within-cell slopes for every (arm, stratum) plus pooled slopes.
// Floors: n_t(z) >= p+2 per cell, sum_t n_t(z) >= p+k+1 for the pooled fit
// (InsufficientCell otherwise); a warning is recorded for cells below 10.
StratumCoefs beta_hats(const DatasetSummary& summary, const EstimateOptions& opts = {});

// Stratified difference of arm means, weighted by stratum sizes n(z)/n.
// Needs at least one subject in both contrast arms of every stratum
// (EmptyCell otherwise, unless opts.drop_incomplete_strata).
double theta_hat(const DatasetSummary& summary, const ContrastSpec& c,
                 const EstimateOptions& opts = {});

// Same weighting with arm means replaced by regression-adjusted means
// mean_y - (mean_x_arm - mean_x_stratum)' beta, using per-arm slopes.
double theta_hat_A(const DatasetSummary& summary, const ContrastSpec& c,
                   const EstimateOptions& opts = {});

// Regression-adjusted estimator with the pooled per-stratum slope in both
// arms.
double theta_hat_B(const DatasetSummary& summary, const ContrastSpec& c,
                   const EstimateOptions& opts = {});

// Convenience overloads that summarize the dataset first.
double theta_hat(const TrialDataset& dataset, const ContrastSpec& c,
                 const EstimateOptions& opts = {});
double theta_hat_A(const TrialDataset& dataset, const ContrastSpec& c,
                   const EstimateOptions& opts = {});
double theta_hat_B(const TrialDataset& dataset, const ContrastSpec& c,
                   const EstimateOptions& opts = {});

namespace detail {

// Strata retained for a contrast under the given options, with the total
// count over retained strata (the reweighting denominator).
struct UsedStrata {
    std::vector<const std::pair<const StratumKey, ZSummary>*> strata;
    double denom = 0.0;
};
UsedStrata used_strata(const DatasetSummary& summary, const ContrastSpec& c,
                       const EstimateOptions& opts);

// Cell slope with floor checks and small-cell warning.
Eigen::VectorXd cell_slope(const CellSummary& cell, int arm, const StratumKey& z,
                           int p, const EstimateOptions& opts);

// Pooled slope across all arms of one stratum (arm-wise centered sums).
Eigen::VectorXd pooled_slope(const ZSummary& zsum, const StratumKey& z, int k, int p);

} // namespace detail

} // namespace stratrand
