#pragma once

#include <cstdint>
#include <memory>
#include <vector>

#include "rwpm/environment.hpp"
#include "rwpm/pmf.hpp"
#include "rwpm/renewal.hpp"

namespace rwpm {

// Coupling strength in its three equivalent parametrizations:
// z' = e^beta - 1 and z = z' * G. Constructible from any one of them; the
// trio stays mutually consistent to 1e-12.
struct CouplingParams {
    double beta = 0;
    double z_prime = 0;
    double z = 0;
    double green = 0;

    static CouplingParams from_z(double z, double green);
    static CouplingParams from_beta(double beta, double green);
    static CouplingParams from_z_prime(double z_prime, double green);
};

// Evaluates the per-gap weight w(z, n, x) = z * p^X_n(x) / p^{X-Y}_n(0).
// Exact 1-d tables for n <= crossover; Gaussian local-limit numerator above
// (the denominator stays exact from the renewal table). log_weight returns
// -inf for displacements unreachable under the exact tables.
class WeightEvaluator {
public:
    WeightEvaluator(const WalkModel& mx, const RenewalLaw& law, int crossover);

    double log_weight(double z, int n, const Point& x) const;
    double weight(double z, int n, const Point& x) const;
    int crossover() const { return crossover_; }
    bool used_llt() const { return used_llt_; }  // any query above the crossover so far

private:
    WalkModel mx_;
    const RenewalLaw* law_;
    int crossover_;
    std::shared_ptr<AxisTableCache> axis_cache_;        // product-form models
    std::vector<LatticePmf> exact_pmfs_;                // fallback, n <= crossover
    SmallMat sigma_inv_;
    double log_det_sigma_ = 0;
    mutable bool used_llt_ = false;
};

// Endpoint-pinned partition values along the DP:
//   Z*_0 = 1,  Z*_n = sum_{m<n} Z*_m K(n-m) w(z, n-m, Y_n - Y_m).
// log_values[n] = log Z*_n (-inf where the value is exactly 0, e.g. z = 0).
// The unnormalized collision-weight partition is
// Z^beta_n = ((1+z')/z') Z*_n.
struct PartitionTable {
    std::vector<double> log_values;
    CouplingParams params;
    std::uint64_t env_seed = 0;
    int crossover = 0;
    bool llt_used = false;

    double log_zstar(int n) const { return log_values[static_cast<std::size_t>(n)]; }
    double log_zbeta(int n) const;
    int N() const { return static_cast<int>(log_values.size()) - 1; }
};

// Log-space DP with per-step log-sum-exp: immune to overflow/underflow for
// any (z, N) in range. Requires env.n <= law.n_max.
PartitionTable quenched_partition(const CouplingParams& params, const Environment& env,
                                  const RenewalLaw& law, const WeightEvaluator& weights);

// Direct-space DP (no rescaling): oracle for scale robustness where it does
// not overflow. Returns Z*_0..Z*_N.
std::vector<double> quenched_partition_direct(const CouplingParams& params, const Environment& env,
                                              const RenewalLaw& law, const WeightEvaluator& weights);

// Annealed DP a_n = z * sum_m K(m) a_{n-m}, a_0 = 1 (equals E^Y[Z*_N], and the
// K~-mass sequence at z = 1). Returns log a_N.
double annealed_partition(double z, const RenewalLaw& law, int N);
// Whole table a_0..a_N in log space.
std::vector<double> annealed_partition_table(double z, const RenewalLaw& law, int N);

}  // namespace rwpm
