#include "stratrand/inference.hpp"

#include <cmath>

#include "stratrand/allocation.hpp"
#include "stratrand/errors.hpp"
#include "stratrand/normal.hpp"

namespace stratrand {

namespace {

// Sample variance of the within-cell regression residuals y - b'x around
// their mean, divisor n-1. With b equal to the cell's own least-squares
// slope this reduces to (ss_y - b'xy)/(n-1); the explicit quadratic form
// also covers pooled slopes.
double resid_var(const CellSummary& cell, const Eigen::VectorXd& b,
                 int arm, const StratumKey& z) {
    if (cell.n < 2)
        throw InsufficientCell("arm " + std::to_string(arm) + ", stratum " + z.str() +
                               ": need at least 2 subjects for a variance, have " +
                               std::to_string(cell.n));
    double ss = cell.ss_y;
    if (b.size() > 0) ss += -2.0 * b.dot(cell.xy) + b.dot(cell.gram * b);
    return ss / static_cast<double>(cell.n - 1);
}

double raw_var(const CellSummary& cell, int arm, const StratumKey& z) {
    return resid_var(cell, Eigen::VectorXd(), arm, z);
}

void check_alloc(const DatasetSummary& summary, const AllocationSpec& alloc) {
    if (alloc.k() != summary.k)
        throw ConfigMismatch("allocation has " + std::to_string(alloc.k()) +
                             " arms, dataset has " + std::to_string(summary.k));
}

} // namespace

double var_hat_U(const DatasetSummary& summary, const ContrastSpec& c,
                 const AllocationSpec& alloc, const EstimateOptions& opts) {
    check_alloc(summary, alloc);
    const auto used = detail::used_strata(summary, c, opts);
    const double pit = alloc.pi_value(c.t), pis = alloc.pi_value(c.s);
    double acc = 0.0;
    for (const auto* kv : used.strata) {
        const auto& zsum = kv->second;
        const double w = static_cast<double>(zsum.n) / used.denom;
        acc += w * (raw_var(zsum.arm[c.t - 1], c.t, kv->first) / pit +
                    raw_var(zsum.arm[c.s - 1], c.s, kv->first) / pis);
    }
    return acc;
}

double var_hat_V(const DatasetSummary& summary, const ContrastSpec& c,
                 double theta, bool* clamped, const EstimateOptions& opts) {
    const auto used = detail::used_strata(summary, c, opts);
    double acc = 0.0;
    for (const auto* kv : used.strata) {
        const auto& zsum = kv->second;
        const double w = static_cast<double>(zsum.n) / used.denom;
        const double d = zsum.arm[c.t - 1].mean_y - zsum.arm[c.s - 1].mean_y;
        acc += w * d * d;
    }
    acc -= theta * theta;
    if (clamped) *clamped = acc < 0.0;
    return acc < 0.0 ? 0.0 : acc;
}

double var_hat_A(const DatasetSummary& summary, const ContrastSpec& c,
                 const AllocationSpec& alloc, const EstimateOptions& opts) {
    check_alloc(summary, alloc);
    const auto used = detail::used_strata(summary, c, opts);
    const double pit = alloc.pi_value(c.t), pis = alloc.pi_value(c.s);
    double acc = 0.0;
    for (const auto* kv : used.strata) {
        const auto& z = kv->first;
        const auto& zsum = kv->second;
        const double w = static_cast<double>(zsum.n) / used.denom;
        const auto& ct = zsum.arm[c.t - 1];
        const auto& cs = zsum.arm[c.s - 1];
        const Eigen::VectorXd bt = detail::cell_slope(ct, c.t, z, summary.p, opts);
        const Eigen::VectorXd bs = detail::cell_slope(cs, c.s, z, summary.p, opts);
        double quad = 0.0;
        if (summary.p > 0) {
            const Eigen::VectorXd d = bt - bs;
            quad = d.dot(zsum.cxx * d) / static_cast<double>(zsum.n - 1);
        }
        acc += w * (resid_var(ct, bt, c.t, z) / pit + resid_var(cs, bs, c.s, z) / pis + quad);
    }
    return acc;
}

double var_hat_B(const DatasetSummary& summary, const ContrastSpec& c,
                 const AllocationSpec& alloc, const EstimateOptions& opts) {
    check_alloc(summary, alloc);
    const auto used = detail::used_strata(summary, c, opts);
    const double pit = alloc.pi_value(c.t), pis = alloc.pi_value(c.s);
    double acc = 0.0;
    for (const auto* kv : used.strata) {
        const auto& z = kv->first;
        const auto& zsum = kv->second;
        const double w = static_cast<double>(zsum.n) / used.denom;
        const Eigen::VectorXd b = detail::pooled_slope(zsum, z, summary.k, summary.p);
        acc += w * (resid_var(zsum.arm[c.t - 1], b, c.t, z) / pit +
                    resid_var(zsum.arm[c.s - 1], b, c.s, z) / pis);
    }
    return acc;
}

VarianceComponents variance_components(const DatasetSummary& summary, const ContrastSpec& c,
                                       const AllocationSpec& alloc, VarKind kind,
                                       const EstimateOptions& opts) {
    VarianceComponents out;
    out.kind = kind;
    switch (kind) {
        case VarKind::U: out.sig2_main = var_hat_U(summary, c, alloc, opts); break;
        case VarKind::A: out.sig2_main = var_hat_A(summary, c, alloc, opts); break;
        case VarKind::B: out.sig2_main = var_hat_B(summary, c, alloc, opts); break;
    }
    // The across-strata component always uses the unadjusted stratified
    // estimate (it measures variation of the stratum-level contrast).
    const double theta = theta_hat(summary, c, opts);
    out.sig2_V = var_hat_V(summary, c, theta, &out.v_clamped, opts);
    out.n = std::llround(detail::used_strata(summary, c, opts).denom);
    return out;
}

InferenceReport make_report(double estimate, const VarianceComponents& comps, double alpha) {
    if (!(alpha > 0.0 && alpha < 1.0)) throw ConfigError("alpha must be in (0,1)");
    if (comps.n <= 0) throw ConfigMismatch("make_report: nonpositive n");
    InferenceReport r;
    r.estimate = estimate;
    r.alpha = alpha;
    r.kind = comps.kind;
    r.v_clamped = comps.v_clamped;
    r.se = std::sqrt((comps.sig2_main + comps.sig2_V) / static_cast<double>(comps.n));
    const double q = normal_quantile(1.0 - alpha / 2.0);
    r.ci_low = estimate - q * r.se;
    r.ci_high = estimate + q * r.se;
    r.p_value = r.se > 0.0 ? two_sided_p(estimate / r.se) : (estimate == 0.0 ? 1.0 : 0.0);
    return r;
}

VarianceGaps variance_gaps(const StratumMixture& mix, double pi_t, double pi_s) {
    const std::size_t m = mix.weights.size();
    if (mix.sigma.size() != m || mix.beta_t.size() != m || mix.beta_s.size() != m ||
        mix.beta_pool.size() != m)
        throw ConfigMismatch("variance_gaps: per-stratum lists have unequal lengths");
    if (!(pi_t > 0.0 && pi_s > 0.0 && pi_t + pi_s <= 1.0 + 1e-12))
        throw ConfigError("variance_gaps: invalid allocation proportions");
    const double pisum = pi_t + pi_s;
    VarianceGaps g;
    for (std::size_t i = 0; i < m; ++i) {
        const auto& S = mix.sigma[i];
        const auto qf = [&](const Eigen::VectorXd& v) { return v.dot(S * v); };
        const Eigen::VectorXd mixv = pi_s * mix.beta_t[i] + pi_t * mix.beta_s[i];
        const Eigen::VectorXd diff = mix.beta_t[i] - mix.beta_s[i];
        g.u_minus_a += mix.weights[i] * (qf(mixv) / (pi_t * pi_s * pisum) +
                                         qf(diff) * (1.0 / pisum - 1.0));
        g.b_minus_a += mix.weights[i] * (qf(mix.beta_t[i] - mix.beta_pool[i]) / pi_t +
                                         qf(mix.beta_s[i] - mix.beta_pool[i]) / pi_s -
                                         qf(diff));
    }
    return g;
}

} // namespace stratrand
