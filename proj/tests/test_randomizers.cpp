#include "doctest.h"

#include <array>
#include <cmath>
#include <map>
#include <numeric>
#include <vector>

#include "stratrand/errors.hpp"
#include "stratrand/randomizers.hpp"

using namespace stratrand;

namespace {

// Mirror of the engine's categorical draw so replay tests can share a stream.
int pick_like(RngStream& rng, const std::vector<double>& probs) {
    const double u = rng.next_unit();
    double cum = 0.0;
    for (std::size_t t = 0; t < probs.size(); ++t) {
        cum += probs[t];
        if (u < cum) return static_cast<int>(t) + 1;
    }
    return static_cast<int>(probs.size());
}

SchemeConfig base_cfg(Scheme s, const std::string& ratio = "1:1") {
    SchemeConfig cfg;
    cfg.scheme = s;
    cfg.alloc = AllocationSpec::parse(ratio);
    return cfg;
}

} // namespace

TEST_CASE("scheme names round-trip") {
    for (auto s : {Scheme::Simple, Scheme::PermutedBlock, Scheme::BiasedCoin,
                   Scheme::Urn, Scheme::Minimization})
        CHECK(scheme_from_name(scheme_name(s)) == s);
    CHECK_THROWS_AS((void)scheme_from_name("coin"), ConfigError);
}

TEST_CASE("config validation") {
    auto cfg = base_cfg(Scheme::Simple);
    cfg.factor_count = 0;
    CHECK_THROWS_AS(cfg.validate(), ConfigError);

    cfg = base_cfg(Scheme::Simple);
    cfg.factor_levels = {2, 2};   // factor_count is 1
    CHECK_THROWS_AS(cfg.validate(), ConfigError);

    cfg = base_cfg(Scheme::PermutedBlock, "1:2");
    CHECK(cfg.resolved_block_size() == 6);
    cfg.block_size = 4;           // not a multiple of 3
    CHECK_THROWS_AS(cfg.validate(), ConfigError);
    cfg.block_size = 9;
    CHECK_NOTHROW(cfg.validate());

    cfg = base_cfg(Scheme::BiasedCoin, "1:2:2");
    CHECK_THROWS_AS(cfg.validate(), ConfigError);
    cfg = base_cfg(Scheme::BiasedCoin);
    cfg.coin_p = 0.5;
    CHECK_THROWS_AS(cfg.validate(), ConfigError);
    cfg.coin_p = 1.0;
    CHECK_NOTHROW(cfg.validate());

    cfg = base_cfg(Scheme::Urn, "1:2");
    CHECK_THROWS_AS(cfg.validate(), ConfigError);
    cfg = base_cfg(Scheme::Urn);
    cfg.urn_beta = 0;
    CHECK_THROWS_AS(cfg.validate(), ConfigError);

    cfg = base_cfg(Scheme::Minimization);
    cfg.min_q = 0.0;
    CHECK_THROWS_AS(cfg.validate(), ConfigError);
    cfg.min_q = 0.8;
    cfg.factor_count = 2;
    cfg.margin_weights = {1.0};
    CHECK_THROWS_AS(cfg.validate(), ConfigError);
    cfg.margin_weights = {0.0, 0.0};
    CHECK_THROWS_AS(cfg.validate(), ConfigError);
    cfg.margin_weights = {0.0, 2.5};
    CHECK_NOTHROW(cfg.validate());
}

TEST_CASE("stratum key checking") {
    auto cfg = base_cfg(Scheme::Simple);
    cfg.factor_count = 2;
    cfg.factor_levels = {2, 3};
    Randomizer r(cfg, RngStream(1, 0));
    CHECK_NOTHROW((void)r.assign(StratumKey{1, 2}));
    CHECK_THROWS_AS((void)r.assign(StratumKey{1}), ConfigMismatch);
    CHECK_THROWS_AS((void)r.assign(StratumKey{1, 3}), ConfigMismatch);
    CHECK_THROWS_AS((void)r.assign(StratumKey{-1, 0}), ConfigMismatch);
    CHECK_THROWS_AS((void)r.imbalance(StratumKey{0}), ConfigMismatch);
}

TEST_CASE("determinism and stream separation") {
    const auto cfg = base_cfg(Scheme::Urn);
    Randomizer a(cfg, RngStream(11, 4));
    Randomizer b(cfg, RngStream(11, 4));
    Randomizer c(cfg, RngStream(11, 5));
    bool diverged = false;
    for (int i = 0; i < 200; ++i) {
        const StratumKey z{i % 2};
        const int arm = a.assign(z);
        CHECK(b.assign(z) == arm);
        diverged |= c.assign(z) != arm;
    }
    CHECK(diverged);
}

TEST_CASE("simple randomization matches the target law") {
    auto cfg = base_cfg(Scheme::Simple, "1:2:2");
    Randomizer r(cfg, RngStream(2026, 1));
    std::array<std::int64_t, 3> hits{};
    const int n = 100000;
    for (int i = 0; i < n; ++i) hits[r.assign(StratumKey{0}) - 1] += 1;
    CHECK(std::fabs(static_cast<double>(hits[0]) / n - 0.2) < 0.005);
    CHECK(std::fabs(static_cast<double>(hits[1]) / n - 0.4) < 0.005);
    CHECK(std::fabs(static_cast<double>(hits[2]) / n - 0.4) < 0.005);
    CHECK(r.assigned_total() == n);
    CHECK(r.count(StratumKey{0}, 1) == hits[0]);
}

TEST_CASE("permuted blocks balance every completed block") {
    auto cfg = base_cfg(Scheme::PermutedBlock);
    cfg.block_size = 4;
    Randomizer r(cfg, RngStream(7, 0));
    const StratumKey z0{0}, z1{1};
    std::map<std::vector<int>, int> block_patterns;
    std::vector<int> current;
    for (int i = 0; i < 4000; ++i) {
        const int arm = r.assign(z0);
        current.push_back(arm);
        const auto d = r.imbalance(z0);
        CHECK(std::fabs(d[0]) <= 2.0);          // half the block, 1:1
        CHECK(d[0] + d[1] == doctest::Approx(0.0).epsilon(1e-12));
        if (current.size() == 4) {
            CHECK(r.count(z0, 1) == r.count(z0, 2));   // block boundary
            block_patterns[current] += 1;
            current.clear();
        }
        if (i % 3 == 0) (void)r.assign(z1);     // interleaved stratum, own blocks
    }
    CHECK(block_patterns.size() == 6);          // all (4 choose 2) orderings occur
    CHECK(std::fabs(r.imbalance(z1)[0]) <= 2.0);

    SUBCASE("multi-arm block composition") {
        auto c3 = base_cfg(Scheme::PermutedBlock, "1:2:2");
        c3.block_size = 5;
        Randomizer m(c3, RngStream(7, 1));
        for (int i = 0; i < 200; ++i) (void)m.assign(StratumKey{0});
        CHECK(m.count(StratumKey{0}, 1) == 40);
        CHECK(m.count(StratumKey{0}, 2) == 80);
        CHECK(m.count(StratumKey{0}, 3) == 80);
    }
}

TEST_CASE("permuted block replay: shuffle and pops share the stream") {
    auto cfg = base_cfg(Scheme::PermutedBlock);
    cfg.block_size = 6;
    RngStream mine(31, 9);
    Randomizer r(cfg, RngStream(31, 9));
    std::vector<int> blk;
    for (int i = 0; i < 60; ++i) {
        if (blk.empty()) {
            blk = {1, 1, 1, 2, 2, 2};
            for (std::size_t j = blk.size() - 1; j > 0; --j)
                std::swap(blk[j], blk[mine.next_below(j + 1)]);
        }
        const int want = blk.back();
        blk.pop_back();
        CHECK(r.assign(StratumKey{0}) == want);
    }
}

TEST_CASE("biased coin replay and containment") {
    auto cfg = base_cfg(Scheme::BiasedCoin);
    cfg.coin_p = 0.7;
    RngStream mine(5, 2);
    Randomizer r(cfg, RngStream(5, 2));
    RngStream zdraw(5, 99);
    std::map<int, std::array<std::int64_t, 2>> mycounts;
    double maxd = 0.0;
    for (int i = 0; i < 10000; ++i) {
        const int code = static_cast<int>(zdraw.next_below(2));
        auto& cnt = mycounts[code];
        const std::int64_t d = cnt[0] - cnt[1];
        std::vector<double> probs;
        if (d < 0) probs = {0.7, 0.3};
        else if (d > 0) probs = {0.3, 0.7};
        else probs = {0.5, 0.5};
        const int want = pick_like(mine, probs);
        CHECK(r.assign(StratumKey{code}) == want);
        cnt[want - 1] += 1;
        maxd = std::max(maxd, std::fabs(r.imbalance(StratumKey{code})[0]));
    }
    CHECK(maxd < 25.0);   // drift toward balance keeps D_1 tight
}

TEST_CASE("urn replay follows the ball bookkeeping") {
    auto cfg = base_cfg(Scheme::Urn);
    cfg.urn_alpha = 2;
    cfg.urn_beta = 3;
    RngStream mine(88, 3);
    Randomizer r(cfg, RngStream(88, 3));
    RngStream zdraw(88, 42);
    std::map<int, std::array<std::int64_t, 2>> balls;
    for (int i = 0; i < 600; ++i) {
        const int code = static_cast<int>(zdraw.next_below(3));
        auto it = balls.find(code);
        if (it == balls.end()) it = balls.emplace(code, std::array<std::int64_t, 2>{2, 2}).first;
        auto& b = it->second;
        const double tot = static_cast<double>(b[0] + b[1]);
        const int want = pick_like(mine, {b[0] / tot, b[1] / tot});
        CHECK(r.assign(StratumKey{code}) == want);
        b[want == 1 ? 1 : 0] += 3;   // opposite arm gains beta balls
    }
}

TEST_CASE("urn balances harder than simple randomization") {
    const int reps = 200, n = 400;
    double msd_urn = 0.0, msd_simple = 0.0;
    for (int rep = 0; rep < reps; ++rep) {
        Randomizer u(base_cfg(Scheme::Urn), RngStream(3030, 2 * rep));
        Randomizer s(base_cfg(Scheme::Simple), RngStream(3030, 2 * rep + 1));
        for (int i = 0; i < n; ++i) {
            (void)u.assign(StratumKey{0});
            (void)s.assign(StratumKey{0});
        }
        msd_urn += u.imbalance(StratumKey{0})[0] * u.imbalance(StratumKey{0})[0];
        msd_simple += s.imbalance(StratumKey{0})[0] * s.imbalance(StratumKey{0})[0];
    }
    CHECK(msd_urn < 0.6 * msd_simple);   // ~n/12 vs n/4 in the limit
}

TEST_CASE("minimization picks margin-spread minimizers") {
    auto cfg = base_cfg(Scheme::Minimization, "1:2:2");
    cfg.factor_count = 2;
    cfg.factor_levels = {2, 3};
    cfg.min_q = 1.0;   // deterministic on a unique minimizer
    Randomizer r(cfg, RngStream(61, 8));
    RngStream zdraw(61, 15);

    const int k = 3;
    const std::vector<double> adj = {10.0, 5.0, 5.0};   // parts_sum * lcm/part
    std::vector<std::map<int, std::vector<std::int64_t>>> margins(2);
    for (int i = 0; i < 500; ++i) {
        const StratumKey z{static_cast<int>(zdraw.next_below(2)),
                           static_cast<int>(zdraw.next_below(3))};
        std::vector<double> spread(k, 0.0);
        for (int f = 0; f < 2; ++f) {
            auto& m = margins[f][z.codes[f]];
            if (m.empty()) m.assign(k, 0);
            for (int c = 0; c < k; ++c) {
                double sum = 0.0, sumsq = 0.0;
                for (int t = 0; t < k; ++t) {
                    const double v = (static_cast<double>(m[t]) + (t == c ? 1.0 : 0.0)) * adj[t];
                    sum += v;
                    sumsq += v * v;
                }
                spread[c] += k * sumsq - sum * sum;
            }
        }
        const double best = *std::min_element(spread.begin(), spread.end());

        // q = 1: a unique minimizer is forced, ties stay inside the argmin set
        const int arm = r.assign(z);
        CHECK(spread[arm - 1] == best);
        margins[0][z.codes[0]][arm - 1] += 1;
        margins[1][z.codes[1]][arm - 1] += 1;
    }
}

TEST_CASE("zero-weight factors are ignored by minimization") {
    auto cfg = base_cfg(Scheme::Minimization);
    cfg.factor_count = 2;
    cfg.factor_levels = {4, 2};
    cfg.margin_weights = {0.0, 1.0};
    cfg.min_q = 1.0;
    Randomizer r(cfg, RngStream(14, 3));
    RngStream zdraw(14, 77);
    std::map<int, std::array<std::int64_t, 2>> m2;   // margins of factor 2 only
    for (int i = 0; i < 400; ++i) {
        const StratumKey z{static_cast<int>(zdraw.next_below(4)),
                           static_cast<int>(zdraw.next_below(2))};
        auto& m = m2[z.codes[1]];
        const std::int64_t d = m[0] - m[1];
        const int arm = r.assign(z);
        if (d < 0) CHECK(arm == 1);
        else if (d > 0) CHECK(arm == 2);
        m[arm - 1] += 1;
    }
}

TEST_CASE("minimization with one factor reduces to the biased coin") {
    auto mcfg = base_cfg(Scheme::Minimization);
    mcfg.factor_levels = {3};
    mcfg.min_q = 0.8;
    auto ccfg = base_cfg(Scheme::BiasedCoin);
    ccfg.factor_levels = {3};
    ccfg.coin_p = 0.8;
    Randomizer mini(mcfg, RngStream(99, 1));
    Randomizer coin(ccfg, RngStream(99, 1));
    RngStream zdraw(99, 60);
    for (int i = 0; i < 2000; ++i) {
        const StratumKey z{static_cast<int>(zdraw.next_below(3))};
        CHECK(mini.assign(z) == coin.assign(z));
    }
}

TEST_CASE("imbalance bookkeeping") {
    auto cfg = base_cfg(Scheme::Simple, "1:2:2");
    Randomizer r(cfg, RngStream(50, 0));
    CHECK(r.imbalance(StratumKey{3}) == std::vector<double>{0.0, 0.0, 0.0});
    for (int i = 0; i < 97; ++i) (void)r.assign(StratumKey{0});
    const auto d = r.imbalance(StratumKey{0});
    const auto& cnt = r.stratum_counts().at(StratumKey{0});
    CHECK(d[0] == doctest::Approx(cnt[0] - 0.2 * 97).epsilon(1e-12));
    CHECK(d[0] + d[1] + d[2] == doctest::Approx(0.0).epsilon(1e-10));
}

TEST_CASE("imbalance scaling classifier") {
    DiscreteStratumLaw law;
    law.keys = {StratumKey{0}, StratumKey{1}};
    law.probs = {0.5, 0.5};
    const std::vector<std::int64_t> grid = {400, 6400};

    SUBCASE("permuted blocks vanish") {
        auto cfg = base_cfg(Scheme::PermutedBlock);
        cfg.block_size = 4;
        const auto rep = classify_imbalance(cfg, law, grid, 200, 1234);
        CHECK(rep.verdict == ImbalanceClass::Vanishing);
        CHECK(rep.pooled_median.back() < rep.pooled_median.front());
    }
    SUBCASE("simple randomization stabilizes, strata independent") {
        const auto rep = classify_imbalance(base_cfg(Scheme::Simple), law, grid, 200, 1234);
        CHECK(rep.verdict == ImbalanceClass::StableIndependent);
        // n^{-1/2} |D_1| has median ~ 0.674 * sqrt(pi1 pi2) = 0.337 under simple draws
        CHECK(rep.pooled_median.back() == doctest::Approx(0.337).epsilon(0.25));
        CHECK(rep.max_cross_corr < 0.2);
    }
    SUBCASE("input validation") {
        CHECK_THROWS_AS((void)classify_imbalance(base_cfg(Scheme::Simple), law, grid, 100, 1),
                        ConfigError);
        CHECK_THROWS_AS((void)classify_imbalance(base_cfg(Scheme::Simple), law, {400}, 200, 1),
                        ConfigError);
        DiscreteStratumLaw bad = law;
        bad.probs = {0.5, 0.6};
        CHECK_THROWS_AS((void)classify_imbalance(base_cfg(Scheme::Simple), bad, grid, 200, 1),
                        ConfigError);
        DiscreteStratumLaw twof;
        twof.keys = {StratumKey{0, 0}};
        twof.probs = {1.0};
        CHECK_THROWS_AS((void)classify_imbalance(base_cfg(Scheme::Simple), twof, grid, 200, 1),
                        ConfigMismatch);
    }
}
