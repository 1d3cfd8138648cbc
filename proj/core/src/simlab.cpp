#include "stratrand/simlab.hpp"

#include <atomic>
#include <cmath>
#include <limits>
#include <map>
#include <mutex>
#include <thread>
#include <vector>

#include "stratrand/errors.hpp"

namespace stratrand {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

void parallel_for(std::int64_t count, int workers, const std::function<void(std::int64_t)>& fn) {
    if (workers <= 1 || count < 2) {
        for (std::int64_t i = 0; i < count; ++i) fn(i);
        return;
    }
    std::atomic<std::int64_t> next{0};
    std::vector<std::thread> pool;
    const int nthreads = static_cast<int>(std::min<std::int64_t>(workers, count));
    pool.reserve(nthreads);
    std::exception_ptr first_error;
    std::mutex err_mutex;
    for (int w = 0; w < nthreads; ++w) {
        pool.emplace_back([&] {
            for (;;) {
                const std::int64_t i = next.fetch_add(1);
                if (i >= count) return;
                try {
                    fn(i);
                } catch (...) {
                    std::lock_guard<std::mutex> lock(err_mutex);
                    if (!first_error) first_error = std::current_exception();
                    return;
                }
            }
        });
    }
    for (auto& t : pool) t.join();
    if (first_error) std::rethrow_exception(first_error);
}

} // namespace

void ScenarioSpec::validate() const {
    scheme.validate();
    if (scheme.alloc.k() != dgp.arms())
        throw ConfigError("case " + sim_case_name(dgp.scase) + " has " +
                          std::to_string(dgp.arms()) + " arms but allocation " +
                          scheme.alloc.str() + " has " + std::to_string(scheme.alloc.k()));
    if (scheme.factor_count != z.factor_count())
        throw ConfigError("scheme factor_count " + std::to_string(scheme.factor_count) +
                          " does not match z variant " + z_variant_name(z.variant));
    if (contrast.t == contrast.s || contrast.t < 1 || contrast.t > dgp.arms() ||
        contrast.s < 1 || contrast.s > dgp.arms())
        throw ConfigError("contrast " + contrast.str() + " invalid for case " +
                          sim_case_name(dgp.scase));
    if (n < 1) throw ConfigError("scenario n must be >= 1");
    if (!(alpha > 0.0 && alpha < 1.0)) throw ConfigError("alpha must be in (0,1)");
}

RepResult run_replication_with(const ScenarioSpec& sc, const SubjectDrawer& draw,
                               double theta_true, std::uint64_t master_seed,
                               std::int64_t rep_index) {
    sc.validate();
    RngStream gen(master_seed, static_cast<std::uint64_t>(rep_index) * 4);
    Randomizer rnd(sc.scheme, RngStream(master_seed, static_cast<std::uint64_t>(rep_index) * 4 + 1));

    TrialDataset ds;
    ds.k = sc.scheme.alloc.k();
    ds.p = 1;
    ds.subjects.reserve(static_cast<std::size_t>(sc.n));
    for (std::int64_t i = 0; i < sc.n; ++i) {
        const Subject s = draw(gen);
        SubjectRecord rec;
        rec.id = i + 1;
        rec.stratum = sc.z.key_for(s.x1, s.x2);
        rec.x = Eigen::VectorXd::Constant(1, s.x2);
        rec.arm = rnd.assign(rec.stratum);
        rec.y = s.y[rec.arm - 1];
        ds.subjects.push_back(std::move(rec));
    }
    const DatasetSummary summary = summarize(ds);

    RepResult result;
    for (int idx = 0; idx < 3; ++idx) {
        const auto kind = static_cast<VarKind>(idx);
        auto& out = result.out[idx];
        try {
            double est = 0.0;
            switch (kind) {
                case VarKind::U: est = theta_hat(summary, sc.contrast); break;
                case VarKind::A: est = theta_hat_A(summary, sc.contrast); break;
                case VarKind::B: est = theta_hat_B(summary, sc.contrast); break;
            }
            const auto comps = variance_components(summary, sc.contrast, sc.scheme.alloc, kind);
            const auto report = make_report(est, comps, sc.alpha);
            out.ok = true;
            out.estimate = est;
            out.se = report.se;
            out.covered = report.ci_low <= theta_true && theta_true <= report.ci_high;
            out.v_clamped = report.v_clamped;
        } catch (const EstimationError& e) {
            out.ok = false;
            out.error = e.what();
        }
    }
    return result;
}

RepResult run_replication(const ScenarioSpec& sc, std::uint64_t master_seed,
                          std::int64_t rep_index) {
    const DGPSpec dgp = sc.dgp;
    return run_replication_with(
        sc, [dgp](RngStream& rng) { return draw_subject(dgp, rng); },
        true_theta(sc.dgp, sc.contrast), master_seed, rep_index);
}

SimSummary monte_carlo_with(const ScenarioSpec& sc, const SubjectDrawer& draw,
                            double theta_true, std::int64_t reps,
                            std::uint64_t master_seed, int workers) {
    sc.validate();
    if (reps < 1) throw ConfigError("monte_carlo needs at least 1 replication");
    std::vector<RepResult> results(static_cast<std::size_t>(reps));
    parallel_for(reps, workers, [&](std::int64_t i) {
        results[static_cast<std::size_t>(i)] =
            run_replication_with(sc, draw, theta_true, master_seed, i);
    });

    SimSummary sum;
    sum.reps = reps;
    sum.theta = theta_true;
    for (int idx = 0; idx < 3; ++idx) {
        auto& es = sum.est[idx];
        // Two passes in replication-index order: moments are identical for
        // any worker count.
        double mean_est = 0.0, mean_se = 0.0;
        std::int64_t covered = 0;
        for (const auto& r : results) {
            const auto& o = r.out[idx];
            if (!o.ok) {
                es.fail_count += 1;
                if (es.first_error.empty()) es.first_error = o.error;
                continue;
            }
            es.ok_count += 1;
            mean_est += o.estimate;
            mean_se += o.se;
            covered += o.covered ? 1 : 0;
            es.clamp_count += o.v_clamped ? 1 : 0;
        }
        if (es.ok_count > 0) {
            mean_est /= static_cast<double>(es.ok_count);
            mean_se /= static_cast<double>(es.ok_count);
        }
        double ss = 0.0;
        for (const auto& r : results) {
            const auto& o = r.out[idx];
            if (o.ok) ss += (o.estimate - mean_est) * (o.estimate - mean_est);
        }
        es.mean_estimate = mean_est;
        es.bias = es.ok_count > 0 ? mean_est - theta_true : kNaN;
        es.se_avg = es.ok_count > 0 ? mean_se : kNaN;
        if (es.ok_count >= 2) {
            es.sd = std::sqrt(ss / static_cast<double>(es.ok_count - 1));
        } else {
            es.sd = kNaN;
            es.sd_missing = true;
        }
        es.cp_degenerate = es.ok_count >= 2 && es.sd == 0.0;
        es.cp = es.ok_count > 0 && !es.cp_degenerate
                    ? static_cast<double>(covered) / static_cast<double>(es.ok_count)
                    : kNaN;
        es.high_fail = es.fail_count > reps / 100;
    }
    return sum;
}

SimSummary monte_carlo(const ScenarioSpec& sc, std::int64_t reps,
                       std::uint64_t master_seed, int workers) {
    const DGPSpec dgp = sc.dgp;
    return monte_carlo_with(
        sc, [dgp](RngStream& rng) { return draw_subject(dgp, rng); },
        true_theta(sc.dgp, sc.contrast), reps, master_seed, workers);
}

PopulationVariances population_variances(const DGPSpec& dgp, const ZSpec& zspec,
                                         const AllocationSpec& alloc, const ContrastSpec& c,
                                         std::int64_t n_draws, std::uint64_t seed) {
    if (alloc.k() != dgp.arms())
        throw ConfigError("allocation arm count does not match case " + sim_case_name(dgp.scase));
    if (c.t == c.s || c.t < 1 || c.t > alloc.k() || c.s < 1 || c.s > alloc.k())
        throw ConfigError("invalid contrast " + c.str());
    if (n_draws < 4) throw ConfigError("population_variances needs n_draws >= 4");

    const int k = dgp.arms();
    struct ZAcc {
        double w = 0.0, sx = 0.0, sxx = 0.0;
        std::array<double, 3> sm{}, smm{}, sxm{}, sv{};
    };
    std::map<StratumKey, ZAcc> acc;

    RngStream rng(seed, 0);
    std::int64_t pairs = (n_draws + 1) / 2;
    pairs += pairs & 1;   // even pair count keeps X1 exactly balanced
    const double total = static_cast<double>(2 * pairs);
    for (std::int64_t j = 0; j < pairs; ++j) {
        const double x1 = static_cast<double>(j & 1);
        const double mu = x1 - 0.5;
        const double eps = rng.next_normal();
        for (int sign = 0; sign < 2; ++sign) {
            const double x2 = mu + (sign == 0 ? eps : -eps);
            auto& a = acc[zspec.key_for(x1, x2)];
            a.w += 1.0;
            a.sx += x2;
            a.sxx += x2 * x2;
            for (int arm = 1; arm <= k; ++arm) {
                const double m = outcome_mean(dgp, arm, x1, x2);
                const double sd = outcome_sd(dgp, arm, x1);
                a.sm[arm - 1] += m;
                a.smm[arm - 1] += m * m;
                a.sxm[arm - 1] += x2 * m;
                a.sv[arm - 1] += sd * sd;
            }
        }
    }

    const double pit = alloc.pi_value(c.t), pis = alloc.pi_value(c.s);
    PopulationVariances out;
    double e_delta = 0.0, e_delta2 = 0.0;
    for (const auto& [z, a] : acc) {
        const double w = a.w / total;
        const double mx = a.sx / a.w;
        const double varx = a.sxx / a.w - mx * mx;
        std::array<double, 3> em{}, varm{}, cov{}, vary{}, beta{};
        double beta_pool = 0.0;
        for (int arm = 1; arm <= k; ++arm) {
            em[arm - 1] = a.sm[arm - 1] / a.w;
            varm[arm - 1] = a.smm[arm - 1] / a.w - em[arm - 1] * em[arm - 1];
            cov[arm - 1] = a.sxm[arm - 1] / a.w - mx * em[arm - 1];
            vary[arm - 1] = varm[arm - 1] + a.sv[arm - 1] / a.w;
            beta[arm - 1] = varx > 0.0 ? cov[arm - 1] / varx : 0.0;
            beta_pool += alloc.pi_value(arm) * beta[arm - 1];
        }
        const auto resid = [&](int arm, double b) {
            return vary[arm - 1] - 2.0 * b * cov[arm - 1] + b * b * varx;
        };
        const double bt = beta[c.t - 1], bs = beta[c.s - 1];
        out.u += w * (vary[c.t - 1] / pit + vary[c.s - 1] / pis);
        out.a += w * (resid(c.t, bt) / pit + resid(c.s, bs) / pis + (bt - bs) * (bt - bs) * varx);
        out.b += w * (resid(c.t, beta_pool) / pit + resid(c.s, beta_pool) / pis);
        const double delta = em[c.t - 1] - em[c.s - 1];
        e_delta += w * delta;
        e_delta2 += w * delta * delta;
    }
    out.theta = e_delta;
    out.v = std::max(0.0, e_delta2 - e_delta * e_delta);
    return out;
}

UVCheck uv_correlation_check(const ScenarioSpec& sc, std::int64_t reps,
                             std::uint64_t master_seed, int workers) {
    sc.validate();
    if (reps < 2) throw ConfigError("uv_correlation_check needs at least 2 replications");
    const double theta = true_theta(sc.dgp, sc.contrast);
    std::map<StratumKey, double> delta;
    for (const auto& z : sc.z.strata())
        delta[z] = stratum_outcome_mean(sc.dgp, sc.contrast.t, sc.z, z) -
                   stratum_outcome_mean(sc.dgp, sc.contrast.s, sc.z, z);

    const DGPSpec dgp = sc.dgp;
    std::vector<double> us(reps, kNaN), vs(reps, kNaN);
    parallel_for(reps, workers, [&](std::int64_t r) {
        RngStream gen(master_seed, static_cast<std::uint64_t>(r) * 4);
        Randomizer rnd(sc.scheme, RngStream(master_seed, static_cast<std::uint64_t>(r) * 4 + 1));
        struct Cell { std::int64_t n = 0; double sum = 0.0; };
        std::map<StratumKey, std::array<Cell, 2>> cells;
        std::map<StratumKey, std::int64_t> zn;
        for (std::int64_t i = 0; i < sc.n; ++i) {
            const Subject s = draw_subject(dgp, gen);
            const StratumKey z = sc.z.key_for(s.x1, s.x2);
            const int arm = rnd.assign(z);
            zn[z] += 1;
            if (arm == sc.contrast.t) {
                cells[z][0].n += 1;
                cells[z][0].sum += s.y[arm - 1];
            } else if (arm == sc.contrast.s) {
                cells[z][1].n += 1;
                cells[z][1].sum += s.y[arm - 1];
            }
        }
        double u = 0.0, v = 0.0;
        for (const auto& [z, count] : zn) {
            const auto it = cells.find(z);
            if (it == cells.end() || it->second[0].n == 0 || it->second[1].n == 0)
                return;   // incomplete stratum: replication unusable for the split
            const double w = static_cast<double>(count) / static_cast<double>(sc.n);
            const double diff = it->second[0].sum / static_cast<double>(it->second[0].n) -
                                it->second[1].sum / static_cast<double>(it->second[1].n);
            u += w * (diff - delta.at(z));
            v += w * delta.at(z);
        }
        us[static_cast<std::size_t>(r)] = u;
        vs[static_cast<std::size_t>(r)] = v - theta;
    });

    UVCheck out;
    double mu = 0.0, mv = 0.0;
    std::int64_t m = 0;
    for (std::int64_t r = 0; r < reps; ++r) {
        if (std::isnan(us[r])) continue;
        mu += us[r];
        mv += vs[r];
        m += 1;
    }
    out.reps = m;
    if (m < 2) {
        out.degenerate = true;
        return out;
    }
    mu /= static_cast<double>(m);
    mv /= static_cast<double>(m);
    double suu = 0.0, svv = 0.0, suv = 0.0;
    for (std::int64_t r = 0; r < reps; ++r) {
        if (std::isnan(us[r])) continue;
        suu += (us[r] - mu) * (us[r] - mu);
        svv += (vs[r] - mv) * (vs[r] - mv);
        suv += (us[r] - mu) * (vs[r] - mv);
    }
    if (suu < 1e-20 || svv < 1e-20) {
        out.degenerate = true;
        out.corr = 0.0;
        return out;
    }
    out.corr = suv / std::sqrt(suu * svv);
    return out;
}

} // namespace stratrand
