#pragma once

#include <array>
#include <cstdint>
#include <string>
#include <vector>

#include "stratrand/allocation.hpp"
#include "stratrand/estimators.hpp"
#include "stratrand/rng.hpp"
#include "stratrand/stratum.hpp"

namespace stratrand {

// Built-in benchmark data-generating processes. All share the covariate pair
// W = (X1, X2) with X1 ~ Bernoulli(1/2) and X2 | X1 ~ N(X1 - 1/2, 1); the
// adjustment covariate is X = X2 (p = 1). Potential outcomes, arm by arm:
//   I:   Y1 ~ N(4 X1 + 2 X2, 1),            Y2 ~ N(phi + 4 X1 + 2 X2, 1)
//   II:  Y1 ~ N(4 X1 - 2 X2, 1),            Y2 as in I
//   III: Y1 = 1/4 + 3 X1 + X2^2/5 + (X1 + 1/2) eps,  Y2 as in I   (noise SD X1+1/2)
//   IV:  three arms: Y1, Y2 as in III, Y3 ~ N(psi + 1 + 2 X1 - X2, 1)
enum class SimCase { I, II, III, IV };

SimCase sim_case_from_name(const std::string& name);   // "I".."IV"
std::string sim_case_name(SimCase c);

struct DGPSpec {
    SimCase scase = SimCase::I;
    double phi = 1.0;   // arm-2 shift
    double psi = 1.0;   // arm-3 shift (case IV)

    int arms() const { return scase == SimCase::IV ? 3 : 2; }
};

// Stratification variants over W:
//   X1     : Z = X1 (one factor, 2 strata)
//   X1_D2  : Z = (X1, X2 discretized at {0})            (4 strata)
//   X1_D4  : Z = (X1, X2 discretized at {-0.8, 0, 0.8}) (8 strata)
enum class ZVariant { X1, X1_D2, X1_D4 };

ZVariant z_variant_from_name(const std::string& name);  // "x1", "x1_d2", "x1_d4"
std::string z_variant_name(ZVariant v);

struct ZSpec {
    ZVariant variant = ZVariant::X1;

    int factor_count() const { return variant == ZVariant::X1 ? 1 : 2; }
    std::vector<int> factor_levels() const;
    std::vector<double> cutpoints() const;               // X2 bin edges
    StratumKey key_for(double x1, double x2) const;
    std::vector<StratumKey> strata() const;              // lexicographic
    double stratum_prob(const StratumKey& z) const;      // exact, via normal CDF
    DiscreteStratumLaw law() const;
};

struct Subject {
    double x1 = 0.0;
    double x2 = 0.0;
    std::array<double, 3> y{};   // potential outcomes, index arm-1
};

// Draws covariates then the potential outcomes of every arm, consuming
// 1 + 1 + arms() stream values in that fixed order.
Subject draw_subject(const DGPSpec& dgp, RngStream& rng);

// Conditional mean / sd of Y^(arm) given W.
double outcome_mean(const DGPSpec& dgp, int arm, double x1, double x2);
double outcome_sd(const DGPSpec& dgp, int arm, double x1);

// E[Y^(arm) | Z = z], in closed form (truncated-normal moments of X2).
double stratum_outcome_mean(const DGPSpec& dgp, int arm, const ZSpec& zspec,
                            const StratumKey& z);

// Conditional moments E[X2 | z] and E[X2^2 | z] under a stratification.
void stratum_x2_moments(const ZSpec& zspec, const StratumKey& z,
                        double* m1, double* m2);

// theta = E[Y^(t)] - E[Y^(s)], exact.
double true_theta(const DGPSpec& dgp, const ContrastSpec& c);

// Expected size of the smallest (arm, stratum) cell:
// n * min_z pr(Z=z) * min_t pi_t.
double expected_min_cell(std::int64_t n, const ZSpec& zspec, const AllocationSpec& alloc);

// Mean and truncated second moment of a standard normal restricted to (a,b);
// infinite bounds allowed.
void truncated_std_normal_moments(double a, double b, double* m1, double* m2);

} // namespace stratrand
