#include "stratrand/randomizers.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "stratrand/errors.hpp"

namespace stratrand {

Scheme scheme_from_name(const std::string& name) {
    if (name == "simple") return Scheme::Simple;
    if (name == "permuted_block") return Scheme::PermutedBlock;
    if (name == "biased_coin") return Scheme::BiasedCoin;
    if (name == "urn") return Scheme::Urn;
    if (name == "minimization") return Scheme::Minimization;
    throw ConfigError("unknown scheme '" + name +
                      "' (expected simple, permuted_block, biased_coin, urn, minimization)");
}

std::string scheme_name(Scheme s) {
    switch (s) {
        case Scheme::Simple: return "simple";
        case Scheme::PermutedBlock: return "permuted_block";
        case Scheme::BiasedCoin: return "biased_coin";
        case Scheme::Urn: return "urn";
        case Scheme::Minimization: return "minimization";
    }
    return "?";
}

int SchemeConfig::resolved_block_size() const {
    return block_size > 0 ? block_size : static_cast<int>(2 * alloc.parts_sum());
}

void SchemeConfig::validate() const {
    if (factor_count < 1) throw ConfigError("factor_count must be >= 1");
    if (!factor_levels.empty()) {
        if (static_cast<int>(factor_levels.size()) != factor_count)
            throw ConfigError("factor_levels has " + std::to_string(factor_levels.size()) +
                              " entries, factor_count is " + std::to_string(factor_count));
        for (int l : factor_levels)
            if (l < 1) throw ConfigError("factor level counts must be >= 1");
    }
    switch (scheme) {
        case Scheme::Simple:
            break;
        case Scheme::PermutedBlock:
            alloc.validate_block_size(resolved_block_size());
            break;
        case Scheme::BiasedCoin:
            if (alloc.k() != 2) throw ConfigError("biased_coin needs exactly 2 arms");
            if (!(coin_p > 0.5 && coin_p <= 1.0))
                throw ConfigError("coin_p must lie in (0.5, 1]");
            break;
        case Scheme::Urn:
            if (alloc.k() != 2 || !alloc.balanced())
                throw ConfigError("urn scheme needs 2 arms with 1:1 allocation");
            if (urn_alpha < 1 || urn_beta < 1)
                throw ConfigError("urn_alpha and urn_beta must be >= 1");
            break;
        case Scheme::Minimization: {
            if (!(min_q > 0.0 && min_q <= 1.0))
                throw ConfigError("min_q must lie in (0, 1]");
            if (!margin_weights.empty()) {
                if (static_cast<int>(margin_weights.size()) != factor_count)
                    throw ConfigError("margin_weights has " + std::to_string(margin_weights.size()) +
                                      " entries, factor_count is " + std::to_string(factor_count));
                double sum = 0.0;
                for (double w : margin_weights) {
                    if (w < 0.0) throw ConfigError("margin weights must be nonnegative");
                    sum += w;
                }
                if (!(sum > 0.0)) throw ConfigError("margin weights must not all be zero");
            }
            break;
        }
    }
}

Randomizer::Randomizer(SchemeConfig cfg, RngStream rng)
    : cfg_(std::move(cfg)), rng_(rng) {
    cfg_.validate();
    pi_ = cfg_.alloc.pi_values();
    margins_.resize(cfg_.factor_count);
    // Exact allocation-adjusted counts: with pi_t = a_t/S the quantity
    // n_t/pi_t scaled by lcm(a) is the integer n_t * S * (lcm(a)/a_t).
    const auto& parts = cfg_.alloc.integer_parts();
    std::int64_t L = 1;
    for (auto a : parts) L = std::lcm(L, a);
    adj_mult_.reserve(parts.size());
    for (auto a : parts) adj_mult_.push_back(cfg_.alloc.parts_sum() * (L / a));
}

void Randomizer::check_key(const StratumKey& z) const {
    if (z.factors() != cfg_.factor_count)
        throw ConfigMismatch("stratum " + z.str() + " has " + std::to_string(z.factors()) +
                             " factors, randomizer expects " + std::to_string(cfg_.factor_count));
    for (int f = 0; f < z.factors(); ++f) {
        if (z.codes[f] < 0)
            throw ConfigMismatch("stratum " + z.str() + ": negative category code");
        if (!cfg_.factor_levels.empty() && z.codes[f] >= cfg_.factor_levels[f])
            throw ConfigMismatch("stratum " + z.str() + ": factor " + std::to_string(f + 1) +
                                 " code " + std::to_string(z.codes[f]) + " outside 0.." +
                                 std::to_string(cfg_.factor_levels[f] - 1));
    }
}

int Randomizer::pick(const std::vector<double>& probs) {
    const double u = rng_.next_unit();
    double cum = 0.0;
    for (std::size_t t = 0; t < probs.size(); ++t) {
        cum += probs[t];
        if (u < cum) return static_cast<int>(t) + 1;
    }
    return static_cast<int>(probs.size());
}

int Randomizer::assign_simple() { return pick(pi_); }

int Randomizer::assign_block(const StratumKey& z) {
    auto& blk = blocks_[z];
    if (blk.empty()) {
        const int m = cfg_.resolved_block_size() / static_cast<int>(cfg_.alloc.parts_sum());
        const auto& parts = cfg_.alloc.integer_parts();
        for (int t = 0; t < cfg_.alloc.k(); ++t)
            blk.insert(blk.end(), static_cast<std::size_t>(m * parts[t]), t + 1);
        for (std::size_t i = blk.size() - 1; i > 0; --i)
            std::swap(blk[i], blk[rng_.next_below(i + 1)]);
    }
    const int arm = blk.back();
    blk.pop_back();
    return arm;
}

int Randomizer::assign_coin(const StratumKey& z) {
    const auto it = counts_.find(z);
    const std::int64_t n1 = it == counts_.end() ? 0 : it->second[0];
    const std::int64_t n = it == counts_.end() ? 0 : it->second[0] + it->second[1];
    // sign of D_1(z) = n_1 - pi_1 n, computed exactly: S*n_1 - a_1*n
    const auto& parts = cfg_.alloc.integer_parts();
    const std::int64_t e1 = cfg_.alloc.parts_sum() * n1 - parts[0] * n;
    std::vector<double> probs(2);
    if (e1 < 0) { probs[0] = cfg_.coin_p; probs[1] = 1.0 - cfg_.coin_p; }
    else if (e1 > 0) { probs[0] = 1.0 - cfg_.coin_p; probs[1] = cfg_.coin_p; }
    else { probs[0] = pi_[0]; probs[1] = pi_[1]; }   // balanced: target ratio
    return pick(probs);
}

int Randomizer::assign_urn(const StratumKey& z) {
    auto [it, fresh] = urns_.try_emplace(z, std::array<std::int64_t, 2>{cfg_.urn_alpha, cfg_.urn_alpha});
    auto& balls = it->second;
    const double total = static_cast<double>(balls[0] + balls[1]);
    const int arm = pick({static_cast<double>(balls[0]) / total,
                          static_cast<double>(balls[1]) / total});
    balls[arm == 1 ? 1 : 0] += cfg_.urn_beta;
    return arm;
}

int Randomizer::assign_minimization(const StratumKey& z) {
    const int k = cfg_.alloc.k();
    const bool exact_weights = cfg_.margin_weights.empty() ||
        std::all_of(cfg_.margin_weights.begin(), cfg_.margin_weights.end(),
                    [](double w) { return w == 1.0; });

    std::vector<__int128> exact_total(k, 0);
    std::vector<double> total(k, 0.0);
    for (int f = 0; f < cfg_.factor_count; ++f) {
        const double w = cfg_.margin_weights.empty() ? 1.0 : cfg_.margin_weights[f];
        if (w == 0.0 && !exact_weights) continue;
        const auto it = margins_[f].find(z.codes[f]);
        static const std::vector<std::int64_t> zeros_proto;
        const std::vector<std::int64_t>* cnt = it == margins_[f].end() ? nullptr : &it->second;
        for (int c = 0; c < k; ++c) {
            // Hypothetically add the candidate, then measure spread of the
            // allocation-adjusted counts: k*sum(v^2) - (sum v)^2, an exact
            // integer proportional to their sample variance.
            __int128 sum = 0, sumsq = 0;
            for (int t = 0; t < k; ++t) {
                const std::int64_t base = cnt ? (*cnt)[t] : 0;
                const __int128 v = static_cast<__int128>(base + (t == c ? 1 : 0)) * adj_mult_[t];
                sum += v;
                sumsq += v * v;
            }
            const __int128 spread = static_cast<__int128>(k) * sumsq - sum * sum;
            if (exact_weights) exact_total[c] += spread;
            else total[c] += w * static_cast<double>(spread);
        }
    }

    std::vector<bool> in_min(k, false);
    int min_count = 0;
    if (exact_weights) {
        const __int128 best = *std::min_element(exact_total.begin(), exact_total.end());
        for (int c = 0; c < k; ++c) in_min[c] = exact_total[c] == best;
    } else {
        const double best = *std::min_element(total.begin(), total.end());
        const double tol = 1e-9 * std::max(1.0, std::fabs(best));
        for (int c = 0; c < k; ++c) in_min[c] = total[c] <= best + tol;
    }
    for (int c = 0; c < k; ++c) min_count += in_min[c] ? 1 : 0;

    std::vector<double> probs(k, 0.0);
    if (min_count == 1) {
        // Unique minimizer gets q, the rest share 1-q proportionally to pi.
        double rest = 0.0;
        for (int c = 0; c < k; ++c)
            if (!in_min[c]) rest += pi_[c];
        for (int c = 0; c < k; ++c)
            probs[c] = in_min[c] ? cfg_.min_q : (1.0 - cfg_.min_q) * pi_[c] / rest;
    } else {
        // Ties resolved pi-proportionally within the minimizer set.
        double inside = 0.0;
        for (int c = 0; c < k; ++c)
            if (in_min[c]) inside += pi_[c];
        for (int c = 0; c < k; ++c)
            probs[c] = in_min[c] ? pi_[c] / inside : 0.0;
    }
    return pick(probs);
}

int Randomizer::assign(const StratumKey& z) {
    check_key(z);
    int arm = 0;
    switch (cfg_.scheme) {
        case Scheme::Simple: arm = assign_simple(); break;
        case Scheme::PermutedBlock: arm = assign_block(z); break;
        case Scheme::BiasedCoin: arm = assign_coin(z); break;
        case Scheme::Urn: arm = assign_urn(z); break;
        case Scheme::Minimization: arm = assign_minimization(z); break;
    }
    auto& cnt = counts_[z];
    if (cnt.empty()) cnt.assign(cfg_.alloc.k(), 0);
    cnt[arm - 1] += 1;
    for (int f = 0; f < cfg_.factor_count && cfg_.scheme == Scheme::Minimization; ++f) {
        auto& m = margins_[f][z.codes[f]];
        if (m.empty()) m.assign(cfg_.alloc.k(), 0);
        m[arm - 1] += 1;
    }
    total_ += 1;
    return arm;
}

std::vector<double> Randomizer::imbalance(const StratumKey& z) const {
    check_key(z);
    const int k = cfg_.alloc.k();
    std::vector<double> d(k, 0.0);
    const auto it = counts_.find(z);
    if (it == counts_.end()) return d;
    const double n = static_cast<double>(
        std::accumulate(it->second.begin(), it->second.end(), std::int64_t{0}));
    for (int t = 0; t < k; ++t)
        d[t] = static_cast<double>(it->second[t]) - pi_[t] * n;
    return d;
}

std::int64_t Randomizer::count(const StratumKey& z, int arm) const {
    const auto it = counts_.find(z);
    if (it == counts_.end()) return 0;
    return it->second.at(arm - 1);
}

namespace {

double median_of(std::vector<double> v) {
    if (v.empty()) return 0.0;
    const std::size_t mid = v.size() / 2;
    std::nth_element(v.begin(), v.begin() + mid, v.end());
    double hi = v[mid];
    if (v.size() % 2 == 1) return hi;
    std::nth_element(v.begin(), v.begin() + mid - 1, v.begin() + mid);
    return 0.5 * (v[mid - 1] + hi);
}

double pearson(const std::vector<double>& a, const std::vector<double>& b) {
    const std::size_t n = a.size();
    double ma = 0.0, mb = 0.0;
    for (std::size_t i = 0; i < n; ++i) { ma += a[i]; mb += b[i]; }
    ma /= n; mb /= n;
    double saa = 0.0, sbb = 0.0, sab = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        saa += (a[i] - ma) * (a[i] - ma);
        sbb += (b[i] - mb) * (b[i] - mb);
        sab += (a[i] - ma) * (b[i] - mb);
    }
    if (saa < 1e-30 || sbb < 1e-30) return 0.0;
    return sab / std::sqrt(saa * sbb);
}

} // namespace

ScalingReport classify_imbalance(const SchemeConfig& cfg, const DiscreteStratumLaw& law,
                                 const std::vector<std::int64_t>& n_grid, int reps,
                                 std::uint64_t seed) {
    cfg.validate();
    if (reps < 200) throw ConfigError("classify_imbalance needs at least 200 replications");
    if (n_grid.size() < 2 || !std::is_sorted(n_grid.begin(), n_grid.end()) || n_grid.front() < 2)
        throw ConfigError("classify_imbalance needs an increasing n grid with >= 2 points");
    if (law.keys.empty() || law.keys.size() != law.probs.size())
        throw ConfigError("stratum law is empty or inconsistent");
    double psum = 0.0;
    for (double p : law.probs) {
        if (p <= 0.0) throw ConfigError("stratum law probabilities must be positive");
        psum += p;
    }
    if (std::fabs(psum - 1.0) > 1e-9) throw ConfigError("stratum law probabilities must sum to 1");
    for (const auto& z : law.keys)
        if (z.factors() != cfg.factor_count)
            throw ConfigMismatch("stratum law key " + z.str() + " does not match factor_count");

    const std::size_t nz = law.keys.size();
    ScalingReport rep;
    rep.n_grid = n_grid;
    rep.strata = law.keys;
    rep.stratum_median.resize(n_grid.size());
    rep.pooled_median.resize(n_grid.size());

    std::vector<std::vector<double>> d_at_max(nz);   // per stratum, across reps
    for (std::size_t gi = 0; gi < n_grid.size(); ++gi) {
        std::vector<std::vector<double>> per_stratum(nz);
        std::vector<double> pooled;
        pooled.reserve(static_cast<std::size_t>(reps) * nz);
        for (int r = 0; r < reps; ++r) {
            const std::uint64_t base = (static_cast<std::uint64_t>(gi + 1) << 33) +
                                       static_cast<std::uint64_t>(r) * 2;
            RngStream zs(seed, base);
            Randomizer rnd(cfg, RngStream(seed, base + 1));
            for (std::int64_t i = 0; i < n_grid[gi]; ++i) {
                const double u = zs.next_unit();
                double cum = 0.0;
                std::size_t j = nz - 1;
                for (std::size_t l = 0; l < nz; ++l) {
                    cum += law.probs[l];
                    if (u < cum) { j = l; break; }
                }
                rnd.assign(law.keys[j]);
            }
            for (std::size_t j = 0; j < nz; ++j) {
                const auto it = rnd.stratum_counts().find(law.keys[j]);
                const std::int64_t nzj = it == rnd.stratum_counts().end()
                    ? 0
                    : std::accumulate(it->second.begin(), it->second.end(), std::int64_t{0});
                const double d1 = rnd.imbalance(law.keys[j])[0];
                if (gi + 1 == n_grid.size()) d_at_max[j].push_back(d1);
                if (nzj == 0) continue;
                const double stat = std::fabs(d1) / std::sqrt(static_cast<double>(nzj));
                per_stratum[j].push_back(stat);
                pooled.push_back(stat);
            }
        }
        rep.stratum_median[gi].resize(nz);
        for (std::size_t j = 0; j < nz; ++j)
            rep.stratum_median[gi][j] = median_of(std::move(per_stratum[j]));
        rep.pooled_median[gi] = median_of(std::move(pooled));
    }

    for (std::size_t j = 0; j < nz; ++j)
        for (std::size_t l = j + 1; l < nz; ++l)
            rep.max_cross_corr = std::max(rep.max_cross_corr,
                                          std::fabs(pearson(d_at_max[j], d_at_max[l])));

    const double first = rep.pooled_median.front();
    const double last = rep.pooled_median.back();
    const double expect = std::sqrt(static_cast<double>(n_grid.back()) /
                                    static_cast<double>(n_grid.front()));
    rep.shrink_ratio = last > 0.0 ? first / last : std::numeric_limits<double>::infinity();
    if (last == 0.0 || rep.shrink_ratio >= 0.6 * expect) {
        rep.verdict = ImbalanceClass::Vanishing;
        rep.verdict_text = "scaled imbalance shrinks with n (within-stratum balance enforced)";
    } else if (rep.shrink_ratio >= 1.0 / 1.4 && rep.shrink_ratio <= 1.4) {
        if (nz > 1 && rep.max_cross_corr >= 0.2) {
            rep.verdict = ImbalanceClass::StableDependent;
            rep.verdict_text = "scaled imbalance stabilizes but strata are correlated "
                               "(only marginal balance enforced)";
        } else {
            rep.verdict = ImbalanceClass::StableIndependent;
            rep.verdict_text = "scaled imbalance stabilizes with near-independent strata";
        }
    } else {
        rep.verdict = ImbalanceClass::Inconclusive;
        rep.verdict_text = "scaling pattern inconclusive on this grid";
    }
    return rep;
}

} // namespace stratrand
