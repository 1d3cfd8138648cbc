#include "stratrand/dgp.hpp"

#include <cmath>
#include <limits>
#include <numbers>

#include "stratrand/errors.hpp"
#include "stratrand/normal.hpp"

namespace stratrand {

SimCase sim_case_from_name(const std::string& name) {
    if (name == "I") return SimCase::I;
    if (name == "II") return SimCase::II;
    if (name == "III") return SimCase::III;
    if (name == "IV") return SimCase::IV;
    throw ConfigError("unknown case '" + name + "' (expected I, II, III or IV)");
}

std::string sim_case_name(SimCase c) {
    switch (c) {
        case SimCase::I: return "I";
        case SimCase::II: return "II";
        case SimCase::III: return "III";
        case SimCase::IV: return "IV";
    }
    return "?";
}

ZVariant z_variant_from_name(const std::string& name) {
    if (name == "x1") return ZVariant::X1;
    if (name == "x1_d2") return ZVariant::X1_D2;
    if (name == "x1_d4") return ZVariant::X1_D4;
    throw ConfigError("unknown z variant '" + name + "' (expected x1, x1_d2, x1_d4)");
}

std::string z_variant_name(ZVariant v) {
    switch (v) {
        case ZVariant::X1: return "x1";
        case ZVariant::X1_D2: return "x1_d2";
        case ZVariant::X1_D4: return "x1_d4";
    }
    return "?";
}

std::vector<double> ZSpec::cutpoints() const {
    switch (variant) {
        case ZVariant::X1: return {};
        case ZVariant::X1_D2: return {0.0};
        case ZVariant::X1_D4: return {-0.8, 0.0, 0.8};
    }
    return {};
}

std::vector<int> ZSpec::factor_levels() const {
    if (variant == ZVariant::X1) return {2};
    return {2, static_cast<int>(cutpoints().size()) + 1};
}

StratumKey ZSpec::key_for(double x1, double x2) const {
    const auto code1 = static_cast<std::int32_t>(x1 > 0.5 ? 1 : 0);
    if (variant == ZVariant::X1) return StratumKey{code1};
    std::int32_t bin = 0;
    for (double c : cutpoints())
        if (x2 >= c) ++bin;
    return StratumKey{code1, bin};
}

std::vector<StratumKey> ZSpec::strata() const {
    std::vector<StratumKey> out;
    const auto levels = factor_levels();
    if (levels.size() == 1) {
        for (std::int32_t a = 0; a < levels[0]; ++a) out.push_back(StratumKey{a});
        return out;
    }
    for (std::int32_t a = 0; a < levels[0]; ++a)
        for (std::int32_t b = 0; b < levels[1]; ++b) out.push_back(StratumKey{a, b});
    return out;
}

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

// Bin bounds for the X2 factor, in the X2 scale.
void bin_bounds(const std::vector<double>& cuts, std::int32_t bin, double* lo, double* hi) {
    *lo = bin == 0 ? -kInf : cuts[bin - 1];
    *hi = bin == static_cast<std::int32_t>(cuts.size()) ? kInf : cuts[bin];
}

double std_normal_pdf(double x) {
    if (std::isinf(x)) return 0.0;
    return std::exp(-0.5 * x * x) / std::sqrt(2.0 * std::numbers::pi);
}

void check_key(const ZSpec& zspec, const StratumKey& z) {
    const auto levels = zspec.factor_levels();
    if (z.factors() != static_cast<int>(levels.size()))
        throw ConfigMismatch("stratum " + z.str() + " does not match z variant " +
                             z_variant_name(zspec.variant));
    for (std::size_t f = 0; f < levels.size(); ++f)
        if (z.codes[f] < 0 || z.codes[f] >= levels[f])
            throw ConfigMismatch("stratum " + z.str() + " outside z variant " +
                                 z_variant_name(zspec.variant));
}

} // namespace

double ZSpec::stratum_prob(const StratumKey& z) const {
    check_key(*this, z);
    if (variant == ZVariant::X1) return 0.5;
    const double mu = z.codes[0] == 1 ? 0.5 : -0.5;   // X2 | X1 ~ N(X1 - 1/2, 1)
    double lo, hi;
    bin_bounds(cutpoints(), z.codes[1], &lo, &hi);
    const double plo = std::isinf(lo) ? 0.0 : normal_cdf(lo - mu);
    const double phi_ = std::isinf(hi) ? 1.0 : normal_cdf(hi - mu);
    return 0.5 * (phi_ - plo);
}

DiscreteStratumLaw ZSpec::law() const {
    DiscreteStratumLaw law;
    for (const auto& z : strata()) {
        law.keys.push_back(z);
        law.probs.push_back(stratum_prob(z));
    }
    return law;
}

double outcome_mean(const DGPSpec& dgp, int arm, double x1, double x2) {
    if (arm < 1 || arm > dgp.arms())
        throw ConfigMismatch("arm " + std::to_string(arm) + " invalid for case " +
                             sim_case_name(dgp.scase));
    if (arm == 2) return dgp.phi + 4.0 * x1 + 2.0 * x2;
    if (arm == 3) return dgp.psi + 1.0 + 2.0 * x1 - x2;
    switch (dgp.scase) {
        case SimCase::I: return 4.0 * x1 + 2.0 * x2;
        case SimCase::II: return 4.0 * x1 - 2.0 * x2;
        case SimCase::III:
        case SimCase::IV: return 0.25 + 3.0 * x1 + 0.2 * x2 * x2;
    }
    return 0.0;
}

double outcome_sd(const DGPSpec& dgp, int arm, double x1) {
    // Arm 1 in cases III/IV is heteroscedastic with noise SD x1 + 0.5; all
    // other arm/case combinations have unit noise.
    if (arm == 1 && (dgp.scase == SimCase::III || dgp.scase == SimCase::IV))
        return x1 + 0.5;
    return 1.0;
}

Subject draw_subject(const DGPSpec& dgp, RngStream& rng) {
    Subject s;
    s.x1 = rng.next_unit() < 0.5 ? 0.0 : 1.0;
    s.x2 = (s.x1 - 0.5) + rng.next_normal();
    for (int arm = 1; arm <= dgp.arms(); ++arm)
        s.y[arm - 1] = outcome_mean(dgp, arm, s.x1, s.x2) +
                       outcome_sd(dgp, arm, s.x1) * rng.next_normal();
    return s;
}

void truncated_std_normal_moments(double a, double b, double* m1, double* m2) {
    const double Za = std::isinf(a) ? (a < 0 ? 0.0 : 1.0) : normal_cdf(a);
    const double Zb = std::isinf(b) ? (b < 0 ? 0.0 : 1.0) : normal_cdf(b);
    const double mass = Zb - Za;
    if (!(mass > 0.0)) throw ConfigError("empty truncation interval");
    const double pa = std_normal_pdf(a), pb = std_normal_pdf(b);
    *m1 = (pa - pb) / mass;
    const double apa = std::isinf(a) ? 0.0 : a * pa;
    const double bpb = std::isinf(b) ? 0.0 : b * pb;
    *m2 = 1.0 + (apa - bpb) / mass;
}

void stratum_x2_moments(const ZSpec& zspec, const StratumKey& z, double* m1, double* m2) {
    check_key(zspec, z);
    const double mu = z.codes[0] == 1 ? 0.5 : -0.5;
    if (zspec.variant == ZVariant::X1) {
        *m1 = mu;
        *m2 = 1.0 + mu * mu;
        return;
    }
    double lo, hi;
    bin_bounds(zspec.cutpoints(), z.codes[1], &lo, &hi);
    double t1, t2;   // moments of (X2 - mu) truncated to (lo-mu, hi-mu)
    truncated_std_normal_moments(std::isinf(lo) ? lo : lo - mu,
                                 std::isinf(hi) ? hi : hi - mu, &t1, &t2);
    *m1 = mu + t1;
    *m2 = mu * mu + 2.0 * mu * t1 + t2;
}

double stratum_outcome_mean(const DGPSpec& dgp, int arm, const ZSpec& zspec,
                            const StratumKey& z) {
    if (arm < 1 || arm > dgp.arms())
        throw ConfigMismatch("arm " + std::to_string(arm) + " invalid for case " +
                             sim_case_name(dgp.scase));
    double m1, m2;
    stratum_x2_moments(zspec, z, &m1, &m2);
    const double x1 = z.codes[0] == 1 ? 1.0 : 0.0;
    if (arm == 2) return dgp.phi + 4.0 * x1 + 2.0 * m1;
    if (arm == 3) return dgp.psi + 1.0 + 2.0 * x1 - m1;
    switch (dgp.scase) {
        case SimCase::I: return 4.0 * x1 + 2.0 * m1;
        case SimCase::II: return 4.0 * x1 - 2.0 * m1;
        case SimCase::III:
        case SimCase::IV: return 0.25 + 3.0 * x1 + 0.2 * m2;
    }
    return 0.0;
}

double true_theta(const DGPSpec& dgp, const ContrastSpec& c) {
    // E[X1] = 1/2, E[X2] = 0, E[X2^2] = 1 + 1/4.
    const auto arm_mean = [&](int arm) {
        if (arm < 1 || arm > dgp.arms())
            throw ConfigMismatch("contrast arm " + std::to_string(arm) + " invalid for case " +
                                 sim_case_name(dgp.scase));
        if (arm == 2) return dgp.phi + 2.0;
        if (arm == 3) return dgp.psi + 2.0;
        switch (dgp.scase) {
            case SimCase::I:
            case SimCase::II: return 2.0;
            case SimCase::III:
            case SimCase::IV: return 0.25 + 1.5 + 0.2 * 1.25;
        }
        return 0.0;
    };
    return arm_mean(c.t) - arm_mean(c.s);
}

double expected_min_cell(std::int64_t n, const ZSpec& zspec, const AllocationSpec& alloc) {
    if (n < 1) throw ConfigError("expected_min_cell needs n >= 1");
    double minp = 1.0;
    for (const auto& z : zspec.strata()) minp = std::min(minp, zspec.stratum_prob(z));
    double minpi = 1.0;
    for (int t = 1; t <= alloc.k(); ++t) minpi = std::min(minpi, alloc.pi_value(t));
    return static_cast<double>(n) * minp * minpi;
}

} // namespace stratrand
