#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "stratrand/commands.hpp"
#include "stratrand/errors.hpp"
#include "stratrand/keyval.hpp"

namespace {

struct CommonFlags {
    std::string config_path;
    std::string seed, workers, reps, out, alpha;
    std::vector<std::string> sets;
    bool drop_incomplete = false;
};

void add_common(CLI::App* sub, CommonFlags* f, bool analysis) {
    sub->add_option("--config", f->config_path, "key = value configuration file");
    sub->add_option("--seed", f->seed, "master seed (overrides config)");
    sub->add_option("--out", f->out, "output CSV path (overrides config)");
    sub->add_option("--set", f->sets, "extra key=value override (repeatable)");
    if (!analysis) {
        sub->add_option("--workers", f->workers, "worker threads (overrides config)");
        sub->add_option("--reps", f->reps, "replications (overrides config)");
    }
    sub->add_option("--alpha", f->alpha, "two-sided level (overrides config)");
    if (analysis)
        sub->add_flag("--drop-incomplete-strata", f->drop_incomplete,
                      "drop strata missing a contrast arm instead of erroring");
}

stratrand::KeyVal merge(const CommonFlags& f) {
    stratrand::KeyVal cfg;
    if (!f.config_path.empty()) cfg = stratrand::KeyVal::from_file(f.config_path);
    if (!f.seed.empty()) cfg.set("seed", f.seed);
    if (!f.workers.empty()) cfg.set("workers", f.workers);
    if (!f.reps.empty()) cfg.set("reps", f.reps);
    if (!f.out.empty()) cfg.set("out", f.out);
    if (!f.alpha.empty()) cfg.set("alpha", f.alpha);
    if (f.drop_incomplete) cfg.set("drop_incomplete_strata", "true");
    for (const auto& kv : f.sets) {
        const auto eq = kv.find('=');
        if (eq == std::string::npos || eq == 0)
            throw stratrand::ConfigError("--set expects key=value, got '" + kv + "'");
        cfg.set(stratrand::trim(kv.substr(0, eq)), stratrand::trim(kv.substr(eq + 1)));
    }
    return cfg;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"covariate-adaptive randomization, stratified estimation and simulation"};
    app.require_subcommand(1);

    CommonFlags sim_f, ana_f, rnd_f, dia_f;
    auto* sim = app.add_subcommand("simulate", "run Monte Carlo scenario grids");
    add_common(sim, &sim_f, false);
    auto* ana = app.add_subcommand("analyze", "estimate treatment contrasts from a trial CSV");
    add_common(ana, &ana_f, true);
    auto* rnd = app.add_subcommand("randomize", "assign arms to a subject stream CSV");
    add_common(rnd, &rnd_f, false);
    auto* dia = app.add_subcommand("diagnose", "imbalance scaling diagnostics for schemes");
    add_common(dia, &dia_f, false);

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int rc = app.exit(e);
        return rc == 0 ? 0 : 2;
    }

    try {
        if (sim->parsed()) return stratrand::cmd_simulate(merge(sim_f), std::cout, std::cerr);
        if (ana->parsed()) return stratrand::cmd_analyze(merge(ana_f), std::cout, std::cerr);
        if (rnd->parsed()) return stratrand::cmd_randomize(merge(rnd_f), std::cout, std::cerr);
        if (dia->parsed()) return stratrand::cmd_diagnose(merge(dia_f), std::cout, std::cerr);
    } catch (const stratrand::ConfigError& e) {
        std::cerr << "config error: " << e.what() << '\n';
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 3;
    }
    return 2;
}
