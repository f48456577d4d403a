#pragma once

namespace rwpm {

// Analytic tails for p-series and exponentially damped p-series. All sums are
// over integers n > m with m >= 1; accuracy targets ~1e-12 relative, verified
// against brute-force reference summation in the tests.

// sum_{n > m} n^{-s} for s > 1 (Euler-Maclaurin).
double powerlaw_tail(double s, double m);

// sum_{n=1}^{inf} n^{-s} for s > 1 (partial sum + powerlaw_tail).
double zeta_sum(double s);

// sum_{n > m} n^{-s} e^{-f n} for s > 1, f >= 0 (Euler-Maclaurin with the
// damped integral in closed form; reduces to powerlaw_tail at f = 0). The
// explicit-summation fallback engages when the Euler-Maclaurin error terms
// are not yet small at n = m.
double damped_tail(double s, double f, double m);

// The s = 3/2 case (renewal K-tail).
double damped_tail_32(double f, double m);

}  // namespace rwpm
