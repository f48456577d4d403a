#pragma once

#include <cstdint>
#include <vector>

#include "rwpm/environment.hpp"
#include "rwpm/pinning.hpp"
#include "rwpm/renewal.hpp"

namespace rwpm {

// Coarse-grained block decomposition on N = m * L: blocks
// B_i = {(i-1)L + 1, ..., iL}, i = 1..m. For a subset I of {1..m} (bitmask,
// bit i-1 <=> block i), Z^I restricts the pinned partition sum to renewal
// configurations whose contact set hits exactly the blocks in I (at least one
// contact in every block of I, none elsewhere, and N itself a contact).
// Identity: sum over I of Z^I = full pinned sum. m must carry bit m-1 set
// (N is always a contact) or the profile is exactly zero and gets flagged.
struct CoarseProfile {
    std::uint32_t subset = 0;
    double log_z = 0;   // log Z^I (or log P_I for the contact measure)
    double value = 0;   // exp(log_z); 0 for empty profiles
    bool empty = false; // subset cannot carry a contact configuration
};

struct CoarseDecomposition {
    int m = 0;
    int L = 0;
    std::vector<CoarseProfile> profiles;  // all 2^m subsets, ascending mask
    double log_total = 0;                 // log sum_I value
};

// Annealed weights: each contact at gap n contributes z K(n).
CoarseDecomposition coarse_decompose_annealed(const RenewalLaw& law, int m, int L, double z);

// Contact-measure probabilities: P_I = P(renewal visits exactly blocks I | N in tau)
// computed from the K-only DP; sum_I P_I = 1 after dividing by u_N (kept
// unnormalised in log_z, normalised in value).
CoarseDecomposition coarse_decompose_contact(const RenewalLaw& law, int m, int L);

// Quenched weights z K(n) w(z, n, dY): per-environment, log-space DP.
CoarseDecomposition coarse_decompose_quenched(const CouplingParams& params,
                                              const Environment& env_y,
                                              const RenewalLaw& law,
                                              const WeightEvaluator& weights,
                                              int m, int L);

// Single-subset versions (avoid the 2^m sweep when only one I is wanted).
double block_log_partition(const CouplingParams& params, const Environment& env_y,
                           const RenewalLaw& law, const WeightEvaluator& weights,
                           int m, int L, std::uint32_t subset);
double block_visit_prob(const RenewalLaw& law, int m, int L, std::uint32_t subset);

// Least-squares decay fit of log P_I against the summed log block gaps.
// For I = {i_1 < ... < i_k} (i_k = m), x_I = sum_j log(i_j - i_{j-1}) with
// i_0 = 0, so the entry gap counts too. Fit over all I containing m with
// |I| >= 2. Expected slope near -3/2 for a 1/2-stable renewal.
struct ProfileDecayFit {
    std::vector<double> x;      // x_I per subset used
    std::vector<double> log_p;  // log P_I
    double slope = 0;
    double intercept = 0;
};
ProfileDecayFit profile_gap_decay(const RenewalLaw& law, int m, int L);

// Fractional-moment envelope on the coarse renewal. tilde-K(n) = n^{-6/5} / ctilde
// with ctilde = zeta(6/5) is a probability (recurrent, infinite-mean renewal).
// The envelope is E_{tilde-tau}[W_eff^{|tilde-tau cap {1..m}|}] with effective
// per-contact weight W_eff = ctilde * (3 c2 eta)^gamma: each raw gap factor
// gap^{-6/5} = ctilde * tilde-K(gap) donates one ctilde to the contact it ends
// at. Computed by the pinned DP e_0 = 1, e_n = W_eff sum_k tilde-K(k) e_{n-k}
// closed with the free tail sum_n e_n P(gap > m - n). Bounded in m iff
// W_eff <= 1, i.e. iff the bare weight (3 c2 eta)^gamma stays below 1/ctilde;
// `weight` and `threshold` report that pair. At W_eff = 1 the pinned sequence
// is exactly the mass sequence of the tilde-K renewal (e_n = u~_n) and the
// free value is identically 1. The default eta makes W_eff = (3/4)^gamma.
struct EnvelopeResult {
    double log_value = 0;  // log E[W_eff^{contacts}], free endpoint
    double weight = 0;     // bare weight (3 c2 eta)^gamma
    double threshold = 0;  // its boundedness threshold, 1 / ctilde
    double ctilde = 0;     // zeta(6/5)
    std::vector<double> pinned;  // e_1..e_m (diagnostic; e_n = u~_n at W_eff = 1)
};
EnvelopeResult coarse_envelope(double eta, double gamma, double c2, int m);

// The eta with ctilde * (3 c2 eta)^gamma = (3/4)^gamma: eta = 1/((4 c2) ctilde^{1/gamma}).
double envelope_default_eta(double c2, double gamma);

}  // namespace rwpm
