#include "stratrand/estimators.hpp"

#include "stratrand/errors.hpp"

namespace stratrand {

Eigen::VectorXd ols_slope(const Eigen::MatrixXd& gram, const Eigen::VectorXd& xy) {
    const auto p = gram.rows();
    if (p == 0) return Eigen::VectorXd();
    if (gram.cols() != p || xy.size() != p)
        throw ConfigMismatch("ols_slope: dimension mismatch");
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(gram);
    const auto& ev = es.eigenvalues();
    const double lmax = ev.maxCoeff();
    const double lmin = ev.minCoeff();
    if (!(lmax > 0.0) || lmin / lmax < 1e-12)
        throw SingularGram("ols_slope: gram matrix singular (rcond " +
                           std::to_string(lmax > 0.0 ? lmin / lmax : 0.0) + ")");
    return es.eigenvectors() * (ev.cwiseInverse().asDiagonal() * (es.eigenvectors().transpose() * xy));
}

namespace detail {

UsedStrata used_strata(const DatasetSummary& summary, const ContrastSpec& c,
                       const EstimateOptions& opts) {
    if (c.t == c.s || c.t < 1 || c.t > summary.k || c.s < 1 || c.s > summary.k)
        throw ConfigMismatch("contrast " + c.str() + " invalid for k=" + std::to_string(summary.k));
    UsedStrata out;
    std::int64_t dropped = 0;
    for (const auto& kv : summary.strata) {
        const auto& zsum = kv.second;
        const bool complete = zsum.arm[c.t - 1].n > 0 && zsum.arm[c.s - 1].n > 0;
        if (!complete) {
            if (!opts.drop_incomplete_strata) {
                const int missing = zsum.arm[c.t - 1].n == 0 ? c.t : c.s;
                throw EmptyCell("stratum " + kv.first.str() + " has no subjects in arm " +
                                std::to_string(missing));
            }
            dropped += zsum.n;
            if (opts.warnings)
                opts.warnings->push_back("dropped stratum " + kv.first.str() + " (" +
                                         std::to_string(zsum.n) + " subjects): missing contrast arm");
            continue;
        }
        out.strata.push_back(&kv);
        out.denom += static_cast<double>(zsum.n);
    }
    if (out.strata.empty())
        throw EmptyCell("no stratum has subjects in both arms of contrast " + c.str());
    (void)dropped;
    return out;
}

Eigen::VectorXd cell_slope(const CellSummary& cell, int arm, const StratumKey& z,
                           int p, const EstimateOptions& opts) {
    if (p == 0) return Eigen::VectorXd();
    if (cell.n < p + 2)
        throw InsufficientCell("arm " + std::to_string(arm) + ", stratum " + z.str() + ": " +
                               std::to_string(cell.n) + " subjects < floor " + std::to_string(p + 2) +
                               " for a within-cell slope");
    if (cell.n < 10 && opts.warnings)
        opts.warnings->push_back("arm " + std::to_string(arm) + ", stratum " + z.str() +
                                 ": only " + std::to_string(cell.n) +
                                 " subjects (fewer than 10) behind a fitted slope");
    try {
        return ols_slope(cell.gram, cell.xy);
    } catch (const SingularGram&) {
        throw SingularGram("arm " + std::to_string(arm) + ", stratum " + z.str() +
                           ": covariate gram matrix singular");
    }
}

Eigen::VectorXd pooled_slope(const ZSummary& zsum, const StratumKey& z, int k, int p) {
    if (p == 0) return Eigen::VectorXd();
    if (zsum.n < p + k + 1)
        throw InsufficientCell("stratum " + z.str() + ": " + std::to_string(zsum.n) +
                               " subjects < floor " + std::to_string(p + k + 1) +
                               " for the pooled slope");
    Eigen::MatrixXd gram = Eigen::MatrixXd::Zero(p, p);
    Eigen::VectorXd xy = Eigen::VectorXd::Zero(p);
    for (const auto& cell : zsum.arm) {
        if (cell.n == 0) continue;
        gram += cell.gram;
        xy += cell.xy;
    }
    try {
        return ols_slope(gram, xy);
    } catch (const SingularGram&) {
        throw SingularGram("stratum " + z.str() + ": pooled covariate gram matrix singular");
    }
}

} // namespace detail

double theta_hat(const DatasetSummary& summary, const ContrastSpec& c,
                 const EstimateOptions& opts) {
    const auto used = detail::used_strata(summary, c, opts);
    double acc = 0.0;
    for (const auto* kv : used.strata) {
        const auto& zsum = kv->second;
        const double w = static_cast<double>(zsum.n) / used.denom;
        acc += w * (zsum.arm[c.t - 1].mean_y - zsum.arm[c.s - 1].mean_y);
    }
    return acc;
}

namespace {

double adjusted_contrast(const DatasetSummary& summary, const ContrastSpec& c,
                         const EstimateOptions& opts, bool pooled) {
    const auto used = detail::used_strata(summary, c, opts);
    const int p = summary.p;
    double acc = 0.0;
    for (const auto* kv : used.strata) {
        const auto& z = kv->first;
        const auto& zsum = kv->second;
        const double w = static_cast<double>(zsum.n) / used.denom;
        if (p == 0) {
            acc += w * (zsum.arm[c.t - 1].mean_y - zsum.arm[c.s - 1].mean_y);
            continue;
        }
        Eigen::VectorXd bt, bs;
        if (pooled) {
            bt = detail::pooled_slope(zsum, z, summary.k, p);
            bs = bt;
        } else {
            bt = detail::cell_slope(zsum.arm[c.t - 1], c.t, z, p, opts);
            bs = detail::cell_slope(zsum.arm[c.s - 1], c.s, z, p, opts);
        }
        const auto adj = [&](const CellSummary& cell, const Eigen::VectorXd& b) {
            return cell.mean_y - (cell.mean_x - zsum.mean_x).dot(b);
        };
        acc += w * (adj(zsum.arm[c.t - 1], bt) - adj(zsum.arm[c.s - 1], bs));
    }
    return acc;
}

} // namespace

double theta_hat_A(const DatasetSummary& summary, const ContrastSpec& c,
                   const EstimateOptions& opts) {
    return adjusted_contrast(summary, c, opts, /*pooled=*/false);
}

double theta_hat_B(const DatasetSummary& summary, const ContrastSpec& c,
                   const EstimateOptions& opts) {
    return adjusted_contrast(summary, c, opts, /*pooled=*/true);
}

StratumCoefs beta_hats(const DatasetSummary& summary, const EstimateOptions& opts) {
    StratumCoefs out;
    for (const auto& [z, zsum] : summary.strata) {
        std::vector<Eigen::VectorXd> arms(summary.k);
        for (int t = 1; t <= summary.k; ++t)
            arms[t - 1] = detail::cell_slope(zsum.arm[t - 1], t, z, summary.p, opts);
        out.per_arm[z] = std::move(arms);
        out.pooled[z] = detail::pooled_slope(zsum, z, summary.k, summary.p);
    }
    return out;
}

double theta_hat(const TrialDataset& d, const ContrastSpec& c, const EstimateOptions& o) {
    return theta_hat(summarize(d), c, o);
}
double theta_hat_A(const TrialDataset& d, const ContrastSpec& c, const EstimateOptions& o) {
    return theta_hat_A(summarize(d), c, o);
}
double theta_hat_B(const TrialDataset& d, const ContrastSpec& c, const EstimateOptions& o) {
    return theta_hat_B(summarize(d), c, o);
}

} // namespace stratrand
