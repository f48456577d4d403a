#pragma once

#include <cstdint>
#include <vector>

#include "rwpm/pinning.hpp"

namespace rwpm {

// Annealed free energy: the unique F >= 0 with z * sum_n K(n) e^{-F n} = 1
// for z > 1 (analytic K-tail included), and 0 for z <= 1. Bisection on
// [0, log z + 1] to 1e-12; the residual at the root is <= ~1e-10.
double annealed_free_energy(double z, const RenewalLaw& law);

// Residual z * sum_n K(n) e^{-F n} - 1 (exposed for the root-quality checks).
double annealed_fe_residual(double z, const RenewalLaw& law, double F);

// Annealed critical coupling beta_c = log(1 + 1/G), i.e. z = 1.
double annealed_beta_c(const RenewalLaw& law);

// Monte Carlo free-energy estimate at fixed N: mean and standard error of
// (1/N) log Z^beta over env_count independent environments, plus the exact
// annealed counterpart (1/N) log E^Y[Z^beta]. Deterministic given master_seed
// (per-task streams; reduction ordered by task index).
struct FreeEnergyEstimate {
    double mean = 0;
    double stderr_ = 0;
    double annealed = 0;  // (1/N) log((1+z')/z' * a_N)
    int N = 0;
    int env_count = 0;
};

FreeEnergyEstimate quenched_free_energy_estimate(const CouplingParams& params, const WalkModel& my,
                                                 const RenewalLaw& law, const WeightEvaluator& weights,
                                                 int N, int env_count, std::uint64_t master_seed,
                                                 unsigned workers = 1);

// Fractional-moment estimate E^Y[(Z*_N)^gamma] with CI inputs, over an
// N-ladder so boundedness in N can be inspected (bounded => zero free energy
// at that z). Requires gamma in (0, 1).
struct FractionalMomentPoint {
    int N = 0;
    double mean = 0;
    double stderr_ = 0;
    double annealed_log = 0;  // log E^Y[Z*_N] = log a_N, for envelope checks
};

std::vector<FractionalMomentPoint> fractional_moment_estimate(
    const CouplingParams& params, const WalkModel& my, const RenewalLaw& law,
    const WeightEvaluator& weights, const std::vector<int>& N_ladder, int env_count,
    double gamma, std::uint64_t master_seed, unsigned workers = 1);

}  // namespace rwpm
