#pragma once

#include <array>
#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "stratrand/allocation.hpp"
#include "stratrand/rng.hpp"
#include "stratrand/stratum.hpp"

namespace stratrand {

enum class Scheme { Simple, PermutedBlock, BiasedCoin, Urn, Minimization };

Scheme scheme_from_name(const std::string& name);   // "simple", "permuted_block", ...
std::string scheme_name(Scheme s);

struct SchemeConfig {
    Scheme scheme = Scheme::Simple;
    AllocationSpec alloc = AllocationSpec::from_ratio({1, 1});
    int factor_count = 1;             // stratification factors per key
    std::vector<int> factor_levels;   // optional per-factor level counts; validates codes

    int block_size = 0;               // PermutedBlock; 0 means 2 * alloc.parts_sum()
    double coin_p = 2.0 / 3.0;        // BiasedCoin: weight on the under-represented arm
    std::int64_t urn_alpha = 1;       // Urn: initial balls per arm
    std::int64_t urn_beta = 1;        // Urn: balls added to the opposite arm per draw
    std::vector<double> margin_weights;  // Minimization; empty = equal weights
    double min_q = 0.8;               // Minimization: weight on a unique minimizer

    int resolved_block_size() const;
    void validate() const;            // throws ConfigError
};

// Stateful assignment engine. Simple, biased-coin, urn and minimization all
// consume exactly one uniform per assignment through a shared categorical
// draw, so two randomizers fed identical streams and identical per-step
// probability vectors produce identical assignment sequences (the
// minimization/biased-coin reduction property relies on this). PermutedBlock
// instead consumes block_size-1 draws whenever it opens a fresh block.
class Randomizer {
public:
    Randomizer(SchemeConfig cfg, RngStream rng);

    // Assigns the next subject with stratum z; returns the arm in 1..k.
    int assign(const StratumKey& z);

    // Within-stratum imbalances D_t(z) = n_t(z) - pi_t * n(z), t = 1..k.
    // A stratum never seen yet is all zeros.
    std::vector<double> imbalance(const StratumKey& z) const;

    const std::map<StratumKey, std::vector<std::int64_t>>& stratum_counts() const {
        return counts_;
    }
    std::int64_t count(const StratumKey& z, int arm) const;
    std::int64_t assigned_total() const { return total_; }
    const SchemeConfig& config() const { return cfg_; }

private:
    void check_key(const StratumKey& z) const;
    int pick(const std::vector<double>& probs);
    int assign_simple();
    int assign_block(const StratumKey& z);
    int assign_coin(const StratumKey& z);
    int assign_urn(const StratumKey& z);
    int assign_minimization(const StratumKey& z);

    SchemeConfig cfg_;
    RngStream rng_;
    std::vector<double> pi_;
    std::int64_t total_ = 0;
    std::map<StratumKey, std::vector<std::int64_t>> counts_;
    std::map<StratumKey, std::vector<int>> blocks_;              // remaining slots
    std::map<StratumKey, std::array<std::int64_t, 2>> urns_;
    // Minimization: per factor, per level code, per arm assignment counts.
    std::vector<std::map<std::int32_t, std::vector<std::int64_t>>> margins_;
    std::vector<std::int64_t> adj_mult_;   // n_t * adj_mult_[t] = scaled n_t/pi_t, exact
};

// How the within-stratum imbalance of a scheme behaves as n grows.
enum class ImbalanceClass {
    Vanishing,            // n(z)^{-1/2} |D_t(z)| shrinks toward 0
    StableIndependent,    // stabilizes, strata roughly uncorrelated
    StableDependent,      // stabilizes but strata strongly correlated
    Inconclusive,
};

struct ScalingReport {
    std::vector<std::int64_t> n_grid;
    std::vector<StratumKey> strata;
    // median over replications of n(z)^{-1/2} |D_1(z)|, per grid point and stratum
    std::vector<std::vector<double>> stratum_median;
    std::vector<double> pooled_median;         // per grid point, all strata pooled
    double shrink_ratio = 0.0;                 // pooled_median first / last
    double max_cross_corr = 0.0;               // across strata, at the largest n
    ImbalanceClass verdict = ImbalanceClass::Inconclusive;
    std::string verdict_text;
};

// Monte Carlo scaling diagnostic: runs `reps` independent trials at each n in
// n_grid (increasing, at least two points; reps >= 200), drawing strata from
// `law`, and classifies the scheme from the scaling of the pooled median and
// the cross-stratum correlation of D_1(z) at the largest n.
ScalingReport classify_imbalance(const SchemeConfig& cfg, const DiscreteStratumLaw& law,
                                 const std::vector<std::int64_t>& n_grid, int reps,
                                 std::uint64_t seed);

} // namespace stratrand
