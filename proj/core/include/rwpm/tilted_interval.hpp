#pragma once

#include <cstdint>
#include <vector>

#include "rwpm/rng.hpp"
#include "rwpm/stats.hpp"
#include "rwpm/walk_model.hpp"

namespace rwpm {

// Tilted one-gap statistics: moments of the Y-increments Delta_1..Delta_r
// inside a renewal gap of length r, i.e. Y conditioned on the meeting event
// {X_r = Y_r} with X averaged out. For product-form model pairs everything
// reduces to per-coordinate marked convolutions of the difference axis law
// q = py * reflect(px):
//   t_r   = q^{*r}                        (bridge table; s(r) = t_r(0)^d)
//   m1(u) = sum_{b-a=u} b py(b) px(a)     (one Y-increment marked)
//   m2(u) = sum_{b-a=u} b^2 py(b) px(a)   (squared mark)
// then with all quantities divided by t_r(0):
//   delta_sq = E[|Delta_1|^2 | meet]          = d (m2 * q^{r-1})(0) / t
//   pair_correlation = E[Delta_i . Delta_j | meet], i != j
//                                              = d (m1 * m1 * q^{r-2})(0) / t
//   a_of_r = -pair_correlation  (positive; r a(r) -> C_{X,Y})
//   b_of_r = E[|Y_r|^2 | meet] / r, computed independently from the r-step
//            marginal tables: d * sum_u u^2 tx_r(u) ty_r(u) / (r sum_u tx ty)
// Internal consistency (asserted to ~1e-9): b = delta_sq + (r-1) pair_corr.
struct TiltedIntervalStats {
    int r = 0;
    double log_bridge_prob = 0;   // log P(X_r = Y_r)
    double pair_correlation = 0;  // E[Delta_i . Delta_j | meet], i != j
    double delta_sq = 0;          // E[|Delta_1|^2 | meet]
    double b_of_r = 0;            // E[|Y_r|^2 | meet] / r
    double a_of_r = 0;            // -pair_correlation
};

// Exact marked-convolution route. Requires product-form models of equal dim;
// r >= 2 for the pair statistics (r = 1 fills only delta_sq / b_of_r).
TiltedIntervalStats tilted_interval_stats(const WalkModel& mx, const WalkModel& my, int r);

// Brute-force oracle over per-coordinate step sequences: enumerates all
// (alpha_1..alpha_r, beta_1..beta_r) pairs coordinate-wise (cost
// (|ax||ay|)^r) and combines coordinates by independence. r <= ~6.
TiltedIntervalStats tilted_interval_enumerate(const WalkModel& mx, const WalkModel& my, int r);

// Heavyweight oracle enumerating full d-dimensional step sequences of both
// walks, (|supp X| |supp Y|)^r terms; validates the coordinate combination
// itself. Guarded: throws std::runtime_error above ~2^30 terms.
TiltedIntervalStats tilted_interval_enumerate_vector(const WalkModel& mx, const WalkModel& my, int r);

// Gaussian limits: r*a_of_r -> correction, delta_sq -> w_limit, b_of_r -> b_limit.
struct TiltedLimits {
    double correction = 0;  // C_{X,Y} = tr Sigma_Y - tr((Sigma_X^-1 + Sigma_Y^-1)^-1)
    double w_limit = 0;     // tr Sigma_Y
    double b_limit = 0;     // tr((Sigma_X^-1 + Sigma_Y^-1)^-1)
};
TiltedLimits tilted_limits(const WalkModel& mx, const WalkModel& my);

// C_{X,Y} from the covariance pair alone; throws std::invalid_argument unless
// both are SPD; asserts positivity of the result.
double cxy_constant(const SmallMat& sigma_x, const SmallMat& sigma_y);

// Quartic moments E[(Delta_i . Delta_j)(Delta_k . Delta_l) | meet] at the
// canonical index choices (values are index-free by exchangeability):
//   iij      : j = i pattern across the two dot products, three distinct
//              steps in one interval of length r (needs r >= 3)
//   ijkl_same: four distinct steps, one interval (needs r >= 4)
//   ijkl_cross: each dot product pairs one step from an interval of length r
//              with one from an independent interval of length s; equals
//              pair_corr(r) * pair_corr(s) / d by coordinate pairing.
struct QuarticMoments {
    int r = 0;
    int s = 0;
    double iij = 0;
    double ijkl_same = 0;
    double ijkl_cross = 0;
};
QuarticMoments quartic_moments(const WalkModel& mx, const WalkModel& my, int r, int s);

// Per-coordinate brute-force oracle for E[Delta_i . Delta_j | meet] at
// explicit steps (checks exchangeability over (i, j)). 1-based, i != j <= r.
double pair_correlation_enumerate_at(const WalkModel& mx, const WalkModel& my, int r,
                                     int i, int j);

// Per-coordinate brute-force oracle for one same-interval quartic at explicit
// steps (i, j)(k, l), repetitions allowed, 1-based, all <= r. r <= ~6.
double quartic_enumerate_at(const WalkModel& mx, const WalkModel& my, int r,
                            int i, int j, int k, int l);

// Same-pattern full d-dimensional enumeration (guarded like the vector oracle).
double quartic_enumerate_at_vector(const WalkModel& mx, const WalkModel& my, int r,
                                   int i, int j, int k, int l);

// Monte Carlo estimates of the same one-interval moments.
//   rejection: sample free (X, Y) pairs, keep those with X_r = Y_r --
//              acceptance ~ p^{X-Y}_r(0), practical for r <= ~15.
//   bridge   : exact sequential per-coordinate sampler of the conditioned
//              pair law (no rejection), any r.
enum class TiltedMcMethod { rejection, bridge };

struct TiltedMcEstimate {
    int r = 0;
    int samples = 0;           // accepted samples
    std::int64_t attempts = 0;  // draws incl. rejected (rejection method)
    MeanStderr pair_correlation;  // (Delta_1 . Delta_2)
    MeanStderr delta_sq;          // |Delta_1|^2
    MeanStderr quartic_iij;       // (Delta_1 . Delta_2)(Delta_1 . Delta_3), r >= 3
    MeanStderr quartic_ijkl;      // (Delta_1 . Delta_2)(Delta_3 . Delta_4), r >= 4
};

TiltedMcEstimate tilted_interval_mc(const WalkModel& mx, const WalkModel& my, int r,
                                    int samples, RngStream& rng, TiltedMcMethod method);

// Scans r = 2, 3, ... for the first positive a_of_r (the d = 4 bandwidth
// offset pick). Requires dim == 4. found == false if the cap is hit.
struct D4Scan {
    int p0 = 0;
    bool found = false;
    std::vector<int> r;
    std::vector<double> a;  // a_of_r at each scanned r
};
D4Scan d4_pick_p0(const WalkModel& mx, const WalkModel& my, int r_cap = 64);

}  // namespace rwpm
