#pragma once

namespace stratrand {

// Standard normal CDF, accurate to ~1e-15 (complementary error function).
double normal_cdf(double x);

// Standard normal quantile, Wichura's AS 241 PPND16 rational approximations
// (relative error ~1e-16 over (0,1)). Throws std::domain_error outside (0,1).
double normal_quantile(double p);

// Two-sided p-value for an asymptotically standard normal statistic.
double two_sided_p(double zstat);

} // namespace stratrand
