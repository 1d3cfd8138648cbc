#pragma once

#include <array>
#include <cstdint>
#include <functional>
#include <string>

#include "stratrand/dgp.hpp"
#include "stratrand/inference.hpp"
#include "stratrand/randomizers.hpp"

namespace stratrand {

// One simulated-trial configuration. The scheme's allocation defines k and
// must match the case's arm count; the adjustment covariate is X2 (p = 1).
struct ScenarioSpec {
    DGPSpec dgp;
    ZSpec z;
    SchemeConfig scheme;
    std::int64_t n = 500;
    ContrastSpec contrast;
    double alpha = 0.05;

    void validate() const;   // throws ConfigError
};

// Outcome of one replication for one estimator family.
struct RepOutcome {
    bool ok = false;
    double estimate = 0.0;
    double se = 0.0;
    bool covered = false;
    bool v_clamped = false;
    std::string error;       // why the estimator failed, when !ok
};

struct RepResult {
    std::array<RepOutcome, 3> out;   // indexed by VarKind: U, A, B
};

// Replacement subject source for the replication engine; must mimic
// draw_subject's contract for `arms` arms. Lets callers plug degenerate or
// custom generators under the same harness.
using SubjectDrawer = std::function<Subject(RngStream&)>;

// Runs one simulated trial: subjects drawn from the scenario's case, strata
// formed by its z variant, arms assigned by its scheme, then all three
// estimators with variance estimates and CI coverage against the true theta.
// Deterministic given (master_seed, rep_index), whatever ran before.
RepResult run_replication(const ScenarioSpec& sc, std::uint64_t master_seed,
                          std::int64_t rep_index);
RepResult run_replication_with(const ScenarioSpec& sc, const SubjectDrawer& draw,
                               double theta_true, std::uint64_t master_seed,
                               std::int64_t rep_index);

struct EstimatorSummary {
    std::int64_t ok_count = 0;
    std::int64_t fail_count = 0;
    double mean_estimate = 0.0;
    double bias = 0.0;
    double sd = 0.0;          // sample SD across replications (NaN if missing)
    double se_avg = 0.0;      // mean estimated SE
    double cp = 0.0;          // CI coverage proportion (NaN if degenerate)
    std::int64_t clamp_count = 0;
    bool sd_missing = false;  // fewer than 2 successful replications
    bool cp_degenerate = false;   // no sampling variability; coverage not meaningful
    bool high_fail = false;   // more than 1% of replications failed
    std::string first_error;  // sample failure message, for reporting
};

struct SimSummary {
    std::int64_t reps = 0;
    double theta = 0.0;       // true contrast value
    std::array<EstimatorSummary, 3> est;   // U, A, B
};

// Runs `reps` replications on `workers` threads and aggregates in
// replication-index order, so results are identical for any worker count.
SimSummary monte_carlo(const ScenarioSpec& sc, std::int64_t reps,
                       std::uint64_t master_seed, int workers = 1);
SimSummary monte_carlo_with(const ScenarioSpec& sc, const SubjectDrawer& draw,
                            double theta_true, std::int64_t reps,
                            std::uint64_t master_seed, int workers = 1);

// Population (large-n limit) variance constants of the three estimators for
// a scenario family, computed by high-precision stratified Monte Carlo over
// W only: X1 alternates deterministically, X2 uses antithetic noise pairs,
// and the outcome noise is integrated analytically through the closed-form
// conditional moments of each case. n_draws is the number of W draws.
struct PopulationVariances {
    double u = 0.0;   // unadjusted estimator
    double a = 0.0;   // per-arm-slope adjusted
    double b = 0.0;   // pooled-slope adjusted
    double v = 0.0;   // across-strata component (common to all three)
    double theta = 0.0;
};
PopulationVariances population_variances(const DGPSpec& dgp, const ZSpec& zspec,
                                         const AllocationSpec& alloc, const ContrastSpec& c,
                                         std::int64_t n_draws, std::uint64_t seed);

// Splits each replication's estimator error into the within-stratum part
// (arm-mean noise, U) and the stratum-composition part (V), using the exact
// conditional outcome means, and reports their correlation across
// replications. Degenerate when either component has (numerically) zero
// variance, e.g. when E[Y^(t)-Y^(s) | Z] is constant.
struct UVCheck {
    double corr = 0.0;
    bool degenerate = false;
    std::int64_t reps = 0;
};
UVCheck uv_correlation_check(const ScenarioSpec& sc, std::int64_t reps,
                             std::uint64_t master_seed, int workers = 1);

} // namespace stratrand
