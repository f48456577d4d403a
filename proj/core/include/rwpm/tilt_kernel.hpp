#pragma once

#include <cstdint>
#include <vector>

#include "rwpm/environment.hpp"
#include "rwpm/rng.hpp"
#include "rwpm/walk_model.hpp"

namespace rwpm {

// Block correlation kernel for the change of measure.
//   longrange: M_ij = c_M / (sqrt(L log L) sqrt(|i-j|)), M_ii = 0 (natural log);
//   bandwidth: entries `amplitude / sqrt(L)` exactly on the p0-th off-diagonals.
// Symmetric with zero diagonal in both cases.
struct TiltKernel {
    enum class Kind { longrange, bandwidth };
    Kind kind = Kind::longrange;
    int L = 0;
    double c_m = 0;      // longrange amplitude
    int p0 = 0;          // bandwidth offset
    double amplitude = 0;  // bandwidth amplitude

    static TiltKernel longrange(int L, double c_m);
    static TiltKernel bandwidth(int L, int p0, double amplitude);

    double entry(int i, int j) const;  // 1-based block-slot indices
};

struct KernelNorms {
    double frobenius_sq = 0;
    double operator_bound = 0;  // Frobenius norm dominates the spectral radius
};

// Exact double-sum norms (closed loop, O(L)).
KernelNorms kernel_norms(const TiltKernel& k);

// Longrange amplitude c_M that hits a target Frobenius norm^2 at block
// length L (the "small enough c_M" dial made explicit).
double amplitude_for_frobenius(int L, double target_frobenius_sq);

// Penalty F(Y) = - sum_{i != j} M_ij Delta_i . Delta_j over one block of L
// increments.
//   penalty        : exact dense O(L^2) double sum.
//   penalty_fft    : same value via per-coordinate autocorrelations (FFT);
//                    exact up to rounding, O(L log L). Longrange kernels only.
//   penalty_screened: truncates the kernel at |i-j| <= window; flagged
//                    approximate, for L > ~1e4 scans.
double penalty(const TiltKernel& k, const std::vector<Point>& increments, int dim);
double penalty_fft(const TiltKernel& k, const std::vector<Point>& increments, int dim);
double penalty_screened(const TiltKernel& k, const std::vector<Point>& increments, int dim, int window);

// g_I = prod_{k in I} exp(-F_k 1{F_k >= 0}) in (0, 1]; equals 1 iff every
// F_k < 0.
double g_factor(const std::vector<double>& block_penalties);

// Monte Carlo estimate of E[exp(gamma/(1-gamma) * F_1 * 1{F_1 >= 0})] over
// blocks of L i.i.d. increments of `my`, with a 99% CI and the empirical tail
// of S = gamma/(1-gamma) * F_1^+ on a fixed u-grid. Deterministic given
// master_seed; c_m = 0 returns exactly 1.
struct BorneMEstimate {
    double mean = 0;
    double stderr_ = 0;
    double ci99_high = 0;
    std::vector<double> tail_u;     // grid for P(S >= u)
    std::vector<double> tail_prob;
    int samples = 0;
};

BorneMEstimate borne_m_check(const TiltKernel& k, const WalkModel& my, double gamma,
                             int samples, std::uint64_t master_seed, unsigned workers = 1);

}  // namespace rwpm
