#include "stratrand/commands.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <ostream>
#include <sstream>
#include <thread>

#include "stratrand/csv.hpp"
#include "stratrand/errors.hpp"
#include "stratrand/report_tables.hpp"
#include "stratrand/simlab.hpp"

namespace stratrand {

namespace {

int guarded(std::ostream& err, const std::function<void()>& body) {
    try {
        body();
        return 0;
    } catch (const ConfigError& e) {
        err << "config error: " << e.what() << '\n';
        return 2;
    } catch (const Error& e) {
        err << "error: " << e.what() << '\n';
        return 3;
    } catch (const std::exception& e) {
        err << "error: " << e.what() << '\n';
        return 3;
    }
}

void warn_unused(const KeyVal& cfg, std::ostream& err) {
    for (const auto& k : cfg.unused_keys())
        err << "warning: unrecognized config key '" << k << "'\n";
}

int default_workers() {
    const unsigned hw = std::thread::hardware_concurrency();
    return hw == 0 ? 1 : static_cast<int>(hw);
}

// Scheme knobs shared by simulate / randomize / diagnose configs.
SchemeConfig scheme_from_config(const KeyVal& cfg, Scheme scheme,
                                const AllocationSpec& alloc) {
    SchemeConfig sc;
    sc.scheme = scheme;
    sc.alloc = alloc;
    sc.block_size = static_cast<int>(cfg.get_int("block_size", 0));
    sc.coin_p = cfg.get_double("coin_p", 2.0 / 3.0);
    sc.urn_alpha = cfg.get_int("urn_alpha", 1);
    sc.urn_beta = cfg.get_int("urn_beta", 1);
    sc.min_q = cfg.get_double("min_q", 0.8);
    for (const auto& w : cfg.get_list("margin_weights"))
        sc.margin_weights.push_back(std::stod(w));
    return sc;
}

std::vector<ContrastSpec> contrasts_from_config(const KeyVal& cfg, int k) {
    std::vector<ContrastSpec> out;
    const auto items = cfg.get_list("contrasts");
    if (items.empty()) {
        // Default: every pairwise contrast t > s.
        for (int t = 2; t <= k; ++t)
            for (int s = 1; s < t; ++s) out.push_back({t, s});
        return out;
    }
    for (const auto& item : items) {
        const auto dash = item.find('-');
        if (dash == std::string::npos)
            throw ConfigError("contrast '" + item + "' is not of the form t-s");
        ContrastSpec c;
        try {
            c.t = std::stoi(item.substr(0, dash));
            c.s = std::stoi(item.substr(dash + 1));
        } catch (const std::exception&) {
            throw ConfigError("contrast '" + item + "' is not of the form t-s");
        }
        if (c.t < 1 || c.t > k || c.s < 1 || c.s > k || c.t == c.s)
            throw ConfigError("contrast '" + item + "' invalid for k=" + std::to_string(k));
        out.push_back(c);
    }
    return out;
}

const char* estimator_label(VarKind k) {
    switch (k) {
        case VarKind::U: return "theta";
        case VarKind::A: return "theta_A";
        case VarKind::B: return "theta_B";
    }
    return "?";
}

std::string summary_flags(const EstimatorSummary& es) {
    std::string f;
    const auto add = [&](const char* tok) {
        if (!f.empty()) f += ';';
        f += tok;
    };
    if (es.sd_missing) add("sd_missing");
    if (es.cp_degenerate) add("cp_degenerate");
    if (es.high_fail) add("high_fail");
    return f;
}

} // namespace

int cmd_simulate(const KeyVal& cfg, std::ostream& out, std::ostream& err) {
    return guarded(err, [&] {
        const auto case_names = cfg.require_list("cases");
        const auto z_names = cfg.require_list("z");
        const auto n_list = cfg.require_list("n");
        const auto alloc_names = cfg.require_list("allocations");
        const auto scheme_names = cfg.require_list("schemes");
        const std::int64_t reps = cfg.get_int("reps", 2000);
        const std::uint64_t seed = cfg.get_u64("seed", 20260813u);
        const int workers = static_cast<int>(cfg.get_int("workers", default_workers()));
        const double alpha = cfg.get_double("alpha", 0.05);
        const std::string out_path = cfg.get("out");
        if (reps < 1) throw ConfigError("reps must be >= 1");
        if (workers < 1) throw ConfigError("workers must be >= 1");

        std::vector<AllocationSpec> allocs;
        for (const auto& a : alloc_names) allocs.push_back(AllocationSpec::parse(a));
        // Scheme knobs are read eagerly so config typos surface before the run.
        std::vector<Scheme> schemes;
        for (const auto& s : scheme_names) schemes.push_back(scheme_from_name(s));

        CsvTable csv;
        csv.header = {"case", "z", "n", "alloc", "scheme", "contrast", "estimator",
                      "theta", "reps", "ok", "fail", "bias", "sd", "se_avg", "cp",
                      "clamp_count", "flags"};

        for (const auto& case_name : case_names) {
            const SimCase scase = sim_case_from_name(case_name);
            for (const auto& alloc : allocs) {
                DGPSpec dgp;
                dgp.scase = scase;
                dgp.phi = cfg.get_double("phi", 1.0);
                dgp.psi = cfg.get_double("psi", 1.0);
                if (alloc.k() != dgp.arms())
                    throw ConfigError("case " + case_name + " has " + std::to_string(dgp.arms()) +
                                      " arms; allocation " + alloc.str() + " does not match");
                for (const auto& z_name : z_names) {
                    ZSpec zspec{z_variant_from_name(z_name)};
                    for (const auto& n_str : n_list) {
                        const std::int64_t n = std::stoll(n_str);
                        for (const Scheme scheme : schemes) {
                            ScenarioSpec sc;
                            sc.dgp = dgp;
                            sc.z = zspec;
                            sc.scheme = scheme_from_config(cfg, scheme, alloc);
                            sc.scheme.factor_count = zspec.factor_count();
                            sc.scheme.factor_levels = zspec.factor_levels();
                            sc.n = n;
                            sc.alpha = alpha;
                            for (const auto& contrast : contrasts_from_config(cfg, alloc.k())) {
                                sc.contrast = contrast;
                                sc.validate();
                                const SimSummary sum = monte_carlo(sc, reps, seed, workers);

                                out << "case " << case_name << "  z=" << z_name
                                    << "  n=" << n << "  alloc=" << alloc.str()
                                    << "  scheme=" << scheme_name(scheme)
                                    << "  contrast=" << contrast.str()
                                    << "  theta=" << fmt_fixed(sum.theta, 4) << '\n';
                                TextTable t({"estimator", "bias", "sd", "se_avg", "cp", "fail"});
                                for (int idx = 0; idx < 3; ++idx) {
                                    const auto& es = sum.est[idx];
                                    t.add_row({estimator_label(static_cast<VarKind>(idx)),
                                               fmt_fixed(es.bias, 4), fmt_fixed(es.sd, 4),
                                               fmt_fixed(es.se_avg, 4), fmt_fixed(es.cp, 4),
                                               std::to_string(es.fail_count)});
                                    csv.rows.push_back(
                                        {case_name, z_name, std::to_string(n), alloc.str(),
                                         scheme_name(scheme), contrast.str(),
                                         estimator_label(static_cast<VarKind>(idx)),
                                         fmt_g17(sum.theta), std::to_string(reps),
                                         std::to_string(es.ok_count), std::to_string(es.fail_count),
                                         std::isnan(es.bias) ? "" : fmt_g17(es.bias),
                                         std::isnan(es.sd) ? "" : fmt_g17(es.sd),
                                         std::isnan(es.se_avg) ? "" : fmt_g17(es.se_avg),
                                         std::isnan(es.cp) ? "" : fmt_g17(es.cp),
                                         std::to_string(es.clamp_count), summary_flags(es)});
                                    if (es.high_fail)
                                        err << "warning: " << case_name << "/" << z_name << "/n="
                                            << n << " " << estimator_label(static_cast<VarKind>(idx))
                                            << ": " << es.fail_count << "/" << reps
                                            << " replications failed (first: " << es.first_error
                                            << ")\n";
                                }
                                t.print(out, 2);
                                out << '\n';
                            }
                        }
                    }
                }
            }
        }
        if (!out_path.empty()) {
            csv_write_file(out_path, csv);
            err << "wrote " << csv.rows.size() << " rows to " << out_path << '\n';
        }
        warn_unused(cfg, err);
    });
}

namespace {

// Maps the distinct values of a CSV column to codes 0..L-1 in sorted order.
struct LevelMap {
    std::vector<std::string> levels;   // sorted
    std::int32_t code(const std::string& v) const {
        const auto it = std::lower_bound(levels.begin(), levels.end(), v);
        if (it == levels.end() || *it != v) return -1;
        return static_cast<std::int32_t>(it - levels.begin());
    }
};

LevelMap level_map(const CsvTable& t, int col) {
    LevelMap m;
    m.levels.reserve(t.rows.size());
    for (const auto& row : t.rows) m.levels.push_back(row[col]);
    std::sort(m.levels.begin(), m.levels.end());
    m.levels.erase(std::unique(m.levels.begin(), m.levels.end()), m.levels.end());
    return m;
}

double parse_double_cell(const CsvTable& t, std::size_t row, int col, const std::string& what) {
    const std::string& v = t.rows[row][col];
    try {
        std::size_t pos = 0;
        const double x = std::stod(v, &pos);
        if (pos != v.size()) throw std::invalid_argument("trail");
        return x;
    } catch (const std::exception&) {
        throw DataError(what + " row " + std::to_string(row + 2) + ": cannot parse number from '" +
                        v + "' in column '" + t.header[col] + "'");
    }
}

} // namespace

int cmd_analyze(const KeyVal& cfg, std::ostream& out, std::ostream& err) {
    return guarded(err, [&] {
        const std::string input = cfg.require("input");
        const std::string outcome_col = cfg.require("outcome");
        const std::string arm_col = cfg.require("arm");
        const auto strata_cols = cfg.require_list("strata");
        const auto covariate_cols = cfg.get_list("covariates");
        const AllocationSpec alloc = AllocationSpec::parse(cfg.require("allocation"));
        const double alpha = cfg.get_double("alpha", 0.05);
        EstimateOptions opts;
        opts.drop_incomplete_strata = cfg.get_bool("drop_incomplete_strata", false);
        std::vector<std::string> warnings;
        opts.warnings = &warnings;
        const std::string out_path = cfg.get("out");
        const auto arm_order = cfg.get_list("arms");

        const CsvTable t = csv_read_file(input);
        const int yc = t.require_column(outcome_col);
        const int ac = t.require_column(arm_col);
        std::vector<int> zc, xc;
        for (const auto& c : strata_cols) zc.push_back(t.require_column(c));
        for (const auto& c : covariate_cols) xc.push_back(t.require_column(c));
        if (t.rows.empty()) throw DataError(input + ": no data rows");

        // Arm labels -> 1..k, sorted unless an explicit order is given.
        std::vector<std::string> arm_labels;
        if (!arm_order.empty()) {
            arm_labels = arm_order;
        } else {
            arm_labels = level_map(t, ac).levels;
        }
        if (static_cast<int>(arm_labels.size()) != alloc.k())
            throw ConfigError("found " + std::to_string(arm_labels.size()) +
                              " arm labels but allocation " + alloc.str() + " has " +
                              std::to_string(alloc.k()) + " arms");
        const auto arm_index = [&](const std::string& v) -> int {
            for (std::size_t i = 0; i < arm_labels.size(); ++i)
                if (arm_labels[i] == v) return static_cast<int>(i) + 1;
            return -1;
        };

        std::vector<LevelMap> z_levels;
        for (int c : zc) z_levels.push_back(level_map(t, c));

        TrialDataset ds;
        ds.k = alloc.k();
        ds.p = static_cast<int>(xc.size());
        ds.subjects.reserve(t.rows.size());
        for (std::size_t r = 0; r < t.rows.size(); ++r) {
            SubjectRecord rec;
            rec.id = static_cast<std::int64_t>(r) + 2;   // CSV line number
            const int arm = arm_index(t.rows[r][ac]);
            if (arm < 0)
                throw DataError(input + " row " + std::to_string(r + 2) + ": arm label '" +
                                t.rows[r][ac] + "' not among configured arms");
            rec.arm = arm;
            std::vector<std::int32_t> codes;
            for (std::size_t f = 0; f < zc.size(); ++f)
                codes.push_back(z_levels[f].code(t.rows[r][zc[f]]));
            rec.stratum = StratumKey(std::move(codes));
            rec.x = Eigen::VectorXd(ds.p);
            for (std::size_t j = 0; j < xc.size(); ++j)
                rec.x[static_cast<Eigen::Index>(j)] = parse_double_cell(t, r, xc[j], input);
            rec.y = parse_double_cell(t, r, yc, input);
            ds.subjects.push_back(std::move(rec));
        }

        const DatasetSummary summary = summarize(ds);

        out << "subjects: " << summary.n << "   strata: " << summary.strata.size()
            << "   covariates: " << ds.p << '\n';
        out << "arms:";
        for (std::size_t i = 0; i < arm_labels.size(); ++i) {
            std::int64_t n_arm = 0;
            for (const auto& [z, zs] : summary.strata) n_arm += zs.arm[i].n;
            out << ' ' << (i + 1) << '=' << arm_labels[i] << " (n=" << n_arm << ")";
        }
        out << "\n\n";

        CsvTable res;
        res.header = {"contrast", "estimator", "estimate", "se", "ci_low", "ci_high",
                      "p_value", "n", "sig2_main", "sig2_V", "v_clamped"};
        TextTable table({"contrast", "estimator", "estimate", "se", "ci_low", "ci_high", "p"});
        bool any_clamp = false;
        for (const auto& contrast : contrasts_from_config(cfg, alloc.k())) {
            for (int idx = 0; idx < 3; ++idx) {
                const auto kind = static_cast<VarKind>(idx);
                double est = 0.0;
                switch (kind) {
                    case VarKind::U: est = theta_hat(summary, contrast, opts); break;
                    case VarKind::A: est = theta_hat_A(summary, contrast, opts); break;
                    case VarKind::B: est = theta_hat_B(summary, contrast, opts); break;
                }
                const auto comps = variance_components(summary, contrast, alloc, kind, opts);
                const auto rep = make_report(est, comps, alpha);
                any_clamp = any_clamp || rep.v_clamped;
                table.add_row({contrast.str(), estimator_label(kind), fmt_fixed(est, 4),
                               fmt_fixed(rep.se, 4), fmt_fixed(rep.ci_low, 4),
                               fmt_fixed(rep.ci_high, 4), fmt_fixed(rep.p_value, 4)});
                res.rows.push_back({contrast.str(), estimator_label(kind), fmt_g17(est),
                                    fmt_g17(rep.se), fmt_g17(rep.ci_low), fmt_g17(rep.ci_high),
                                    fmt_g17(rep.p_value), std::to_string(comps.n),
                                    fmt_g17(comps.sig2_main), fmt_g17(comps.sig2_V),
                                    rep.v_clamped ? "1" : "0"});
            }
        }
        table.print(out);
        if (any_clamp)
            out << "note: an across-strata variance component was clamped at 0\n";

        std::sort(warnings.begin(), warnings.end());
        warnings.erase(std::unique(warnings.begin(), warnings.end()), warnings.end());
        for (const auto& w : warnings) err << "warning: " << w << '\n';
        if (!out_path.empty()) csv_write_file(out_path, res);
        warn_unused(cfg, err);
    });
}

int cmd_randomize(const KeyVal& cfg, std::ostream& out, std::ostream& err) {
    return guarded(err, [&] {
        const std::string input = cfg.require("input");
        const AllocationSpec alloc = AllocationSpec::parse(cfg.require("allocation"));
        const Scheme scheme = scheme_from_name(cfg.require("scheme"));
        const std::uint64_t seed = cfg.get_u64("seed", 0);
        const std::string out_path = cfg.get("out");
        const auto arm_labels = cfg.get_list("arm_labels");
        if (!arm_labels.empty() && static_cast<int>(arm_labels.size()) != alloc.k())
            throw ConfigError("arm_labels must list exactly " + std::to_string(alloc.k()) +
                              " labels");

        // factors = column:levels pairs, e.g. "site:3,grade:2"
        const auto factor_items = cfg.require_list("factors");
        std::vector<std::string> factor_cols;
        std::vector<int> factor_levels;
        for (const auto& item : factor_items) {
            const auto colon = item.find(':');
            if (colon == std::string::npos)
                throw ConfigError("factor '" + item + "' is not of the form column:levels");
            factor_cols.push_back(trim(item.substr(0, colon)));
            try {
                factor_levels.push_back(std::stoi(item.substr(colon + 1)));
            } catch (const std::exception&) {
                throw ConfigError("factor '" + item + "' is not of the form column:levels");
            }
        }

        SchemeConfig sc = scheme_from_config(cfg, scheme, alloc);
        sc.factor_count = static_cast<int>(factor_cols.size());
        sc.factor_levels = factor_levels;
        sc.validate();

        CsvTable t = csv_read_file(input);
        std::vector<int> fcols;
        for (const auto& c : factor_cols) fcols.push_back(t.require_column(c));

        Randomizer rnd(sc, RngStream(seed, 0));
        t.header.push_back("arm");
        for (std::size_t r = 0; r < t.rows.size(); ++r) {
            std::vector<std::int32_t> codes;
            for (std::size_t f = 0; f < fcols.size(); ++f) {
                const std::string& v = t.rows[r][fcols[f]];
                std::int32_t code = -1;
                try {
                    std::size_t pos = 0;
                    code = std::stoi(v, &pos);
                    if (pos != v.size()) code = -1;
                } catch (const std::exception&) {
                    code = -1;
                }
                if (code < 0 || code >= factor_levels[f])
                    throw DataError(input + " row " + std::to_string(r + 2) +
                                    ": unknown category code '" + v + "' in column '" +
                                    factor_cols[f] + "' (expected 0.." +
                                    std::to_string(factor_levels[f] - 1) + ")");
                codes.push_back(code);
            }
            const int arm = rnd.assign(StratumKey(std::move(codes)));
            t.rows[r].push_back(arm_labels.empty() ? std::to_string(arm)
                                                   : arm_labels[arm - 1]);
        }

        if (out_path.empty()) csv_write(out, t);
        else {
            csv_write_file(out_path, t);
            err << "wrote " << t.rows.size() << " assignments to " << out_path << '\n';
        }
        warn_unused(cfg, err);
    });
}

int cmd_diagnose(const KeyVal& cfg, std::ostream& out, std::ostream& err) {
    return guarded(err, [&] {
        const auto scheme_names = cfg.require_list("schemes");
        const AllocationSpec alloc = AllocationSpec::parse(cfg.require("allocation"));
        const ZSpec zspec{z_variant_from_name(cfg.get("z", "x1_d2"))};
        const int reps = static_cast<int>(cfg.get_int("reps", 300));
        const std::uint64_t seed = cfg.get_u64("seed", 20260813u);
        const std::string out_path = cfg.get("out");
        std::vector<std::int64_t> n_grid;
        for (const auto& item : cfg.get_list("n_grid")) n_grid.push_back(std::stoll(item));
        if (n_grid.empty()) n_grid = {500, 2000, 8000};

        CsvTable csv;
        csv.header = {"scheme", "n", "stratum", "median_scaled_imbalance"};

        for (const auto& name : scheme_names) {
            SchemeConfig sc = scheme_from_config(cfg, scheme_from_name(name), alloc);
            sc.factor_count = zspec.factor_count();
            sc.factor_levels = zspec.factor_levels();
            const auto law = zspec.law();
            const ScalingReport rep = classify_imbalance(sc, law, n_grid, reps, seed);

            out << "scheme " << name << "  alloc=" << alloc.str()
                << "  z=" << z_variant_name(zspec.variant) << "  reps=" << reps << '\n';
            std::vector<std::string> header{"n", "pooled"};
            for (const auto& z : rep.strata) header.push_back(z.str());
            TextTable table(header);
            for (std::size_t gi = 0; gi < rep.n_grid.size(); ++gi) {
                std::vector<std::string> row{std::to_string(rep.n_grid[gi]),
                                             fmt_fixed(rep.pooled_median[gi], 4)};
                for (std::size_t j = 0; j < rep.strata.size(); ++j) {
                    row.push_back(fmt_fixed(rep.stratum_median[gi][j], 4));
                    csv.rows.push_back({name, std::to_string(rep.n_grid[gi]),
                                        rep.strata[j].str(),
                                        fmt_g17(rep.stratum_median[gi][j])});
                }
                csv.rows.push_back({name, std::to_string(rep.n_grid[gi]), "pooled",
                                    fmt_g17(rep.pooled_median[gi])});
                table.add_row(std::move(row));
            }
            table.print(out, 2);
            out << "  shrink ratio (first/last): " << fmt_fixed(rep.shrink_ratio, 3)
                << "   max cross-stratum |corr|: " << fmt_fixed(rep.max_cross_corr, 3) << '\n';
            out << "  verdict: " << rep.verdict_text << "\n\n";
        }
        if (!out_path.empty()) csv_write_file(out_path, csv);
        warn_unused(cfg, err);
    });
}

} // namespace stratrand
