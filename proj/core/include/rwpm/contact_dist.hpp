#pragma once

#include <string>
#include <vector>

#include "rwpm/renewal.hpp"

namespace rwpm {

// Distribution of the contact count R_N = |tau cap {1..N}|.
//
// Two exact routes, both O(k_max) truncated convolutions of the K-table:
//   - direct: plain nonnegative summation, relative accuracy ~1e-13; used for
//     N <= direct-threshold and wherever tiny tail values matter.
//   - fft: FFTW-accelerated truncated convolutions, absolute accuracy ~1e-12;
//     used for large N where the direct route is too slow. Plans use
//     FFTW_ESTIMATE only (deterministic).
// The vector is truncated at the smallest k_stop with
// P(R_N > k_stop) < 1e-11; entries sum to 1 within 1e-10.
std::vector<double> contact_count_dist(const RenewalLaw& law, int N);

// Force one route (tests cross-check them).
std::vector<double> contact_count_dist_direct(const RenewalLaw& law, int N, int k_cap = -1);
std::vector<double> contact_count_dist_fft(const RenewalLaw& law, int N, int k_cap = -1);

// P(R_N >= k) = P(tau_k <= N) by binary exponentiation of truncated direct
// convolutions: all-nonnegative arithmetic, so tiny tail probabilities
// (~1e-15) keep relative accuracy.
double contact_tail_prob(const RenewalLaw& law, int N, int k);

// Kolmogorov-Smirnov distance between the exact law of c_K R_N / sqrt(N) and
// the half-normal limit |Z| / sqrt(2 pi).
double ks_halfnormal(const RenewalLaw& law, int N);

// Conditioning comparison E[f | 2N in tau] / E[f] for a family of built-in
// nonnegative functionals of tau cap {1..N}. All ratios are exact DP
// evaluations on the mass sequence.
struct ConditioningEntry {
    std::string name;
    double unconditioned = 0;
    double conditioned = 0;
    double ratio = 0;
    bool skipped = false;  // zero denominator
};

struct ConditioningReport {
    std::vector<ConditioningEntry> entries;
    double max_ratio = 0;
};

// Built-ins: "const" (f == 1), "mid-contact" (1{N in tau}),
// "count-threshold" (1{R_N >= ceil(sqrt(N))}), "sqrt-gap" (sqrt(tau_1) 1{R_N >= 2}).
ConditioningReport conditioning_ratio(const RenewalLaw& law, int N);

// Exact conditional mean E[R_N | N in tau] (for sampler validation).
double conditional_mean_contacts(const RenewalLaw& law, int N);

}  // namespace rwpm
