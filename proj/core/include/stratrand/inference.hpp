#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <vector>

#include "stratrand/allocation.hpp"
#include "stratrand/estimators.hpp"

namespace stratrand {

// Variance estimator family, matching the point estimator it pairs with:
// U for the unadjusted stratified difference, A for the per-arm-slope
// adjusted estimator, B for the pooled-slope adjusted estimator.
enum class VarKind { U, A, B };

// Between-arm sampling variance component sigma2_main (kind-specific) plus
// the across-strata component sigma2_V shared by all three estimators.
// se = sqrt((sigma2_main + sigma2_V) / n).
struct VarianceComponents {
    VarKind kind = VarKind::U;
    double sig2_main = 0.0;
    double sig2_V = 0.0;
    bool v_clamped = false;   // sigma2_V hit the 0 floor
    std::int64_t n = 0;       // subjects behind the estimate
};

// sum_z w_z { S2_t(z)/pi_t + S2_s(z)/pi_s } with raw within-cell outcome
// variances (divisor n_t(z)-1; needs n_t(z) >= 2, InsufficientCell below).
double var_hat_U(const DatasetSummary& summary, const ContrastSpec& c,
                 const AllocationSpec& alloc, const EstimateOptions& opts = {});

// sum_z w_z (mean_t(z) - mean_s(z))^2 - theta^2, clamped at 0 (flagged via
// *clamped). theta must be the unadjusted stratified estimate.
double var_hat_V(const DatasetSummary& summary, const ContrastSpec& c,
                 double theta, bool* clamped = nullptr, const EstimateOptions& opts = {});

// Residual version of var_hat_U using per-cell slopes plus the quadratic
// slope-difference term (beta_t-beta_s)' SigmaHat(z) (beta_t-beta_s), where
// SigmaHat(z) is the all-arm within-stratum covariance (divisor n(z)-1).
double var_hat_A(const DatasetSummary& summary, const ContrastSpec& c,
                 const AllocationSpec& alloc, const EstimateOptions& opts = {});

// Residual version of var_hat_U using the pooled per-stratum slope in both
// arms (no quadratic term).
double var_hat_B(const DatasetSummary& summary, const ContrastSpec& c,
                 const AllocationSpec& alloc, const EstimateOptions& opts = {});

// Both components for the requested kind (sigma2_V computed alongside).
VarianceComponents variance_components(const DatasetSummary& summary, const ContrastSpec& c,
                                       const AllocationSpec& alloc, VarKind kind,
                                       const EstimateOptions& opts = {});

struct InferenceReport {
    double estimate = 0.0;
    double se = 0.0;
    double ci_low = 0.0;
    double ci_high = 0.0;
    double p_value = 1.0;     // two-sided, H0: contrast = 0
    double alpha = 0.05;
    VarKind kind = VarKind::U;
    bool v_clamped = false;
};

// Normal-quantile interval: estimate +/- q_{1-alpha/2} * se (1.959964 at the
// default alpha).
InferenceReport make_report(double estimate, const VarianceComponents& comps,
                            double alpha = 0.05);

// Population-level variance gaps between the three estimator limits, given
// per-stratum covariate covariances and slopes. weights are stratum
// probabilities; beta_pool is the pooled-slope limit (allocation-weighted
// average of per-arm slopes over all arms).
struct StratumMixture {
    std::vector<double> weights;
    std::vector<Eigen::MatrixXd> sigma;       // var(X | Z=z)
    std::vector<Eigen::VectorXd> beta_t;
    std::vector<Eigen::VectorXd> beta_s;
    std::vector<Eigen::VectorXd> beta_pool;
};
struct VarianceGaps {
    double u_minus_a = 0.0;   // limit var of unadjusted minus per-arm-adjusted
    double b_minus_a = 0.0;   // limit var of pooled-slope minus per-arm-adjusted
};
// Both gaps are nonnegative for any allocation and any pooled slope.
VarianceGaps variance_gaps(const StratumMixture& mix, double pi_t, double pi_s);

} // namespace stratrand
