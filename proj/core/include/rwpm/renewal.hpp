#pragma once

#include <optional>
#include <string>
#include <vector>

#include "rwpm/walk_model.hpp"

namespace rwpm {

// Renewal inter-arrival law K(n) = p^{X-Y}_n(0) / G restricted to n <= n_max,
// where G = sum_{n>=1} p^{X-Y}_n(0) (finite for d >= 3). Invariants:
//   - K(n) >= 0, and sum K(n) + tail_mass in [1 - 1e-6, 1];
//   - K(n) n^{3/2} settles: relative fluctuation < 2% over the last decade;
//   - green = partial sum of p_n(0) to n_max + analytic c n^{-3/2} tail with c
//     fitted on the last decade; ck = c / green.
struct RenewalLaw {
    std::string model_x, model_y;  // catalogue ids or "custom"
    int dim = 0;
    int n_max = 0;
    std::vector<double> k;  // k[n], n in [1, n_max]; k[0] = 0
    double green = 0;
    double ck = 0;         // K(n) ~ ck * n^{-3/2}
    double ck2 = 0;        // sub-leading fit: K(n) ~ ck n^{-3/2} (1 + ck2 / n)
    double tail_mass = 0;  // sum_{n > n_max} K(n), analytic

    // Derived, rebuilt by finalize_tables(): suffix[n] = P(gap > n), n in [0, n_max].
    std::vector<double> suffix;

    double K(int n) const { return k[static_cast<std::size_t>(n)]; }
    // Exact return probability p^{X-Y}_n(0) = K(n) * G.
    double p0(int n) const { return k[static_cast<std::size_t>(n)] * green; }
    // P(inter-arrival > n), using the analytic tail beyond n_max.
    double gap_tail(int n) const;
    // Rebuilds the suffix table from k + the analytic tail (call after editing k).
    void finalize_tables();
};

// Builds the law from the model pair. Requires dim >= 3 (transience of X - Y);
// lower dimensions throw std::invalid_argument. Product-form pairs stream 1-d
// tables and support n_max up to ~2e5; other pairs use sparse d-dim
// convolution behind a cost guard (throws std::runtime_error when infeasible).
RenewalLaw build_renewal(const WalkModel& mx, const WalkModel& my, int n_max);

// Finite-horizon variant for DP cross-checks in any dimension: green is the
// PARTIAL sum of p_n(0) up to n_max (no tail, tail_mass = 0, ck = 0). The
// quenched/annealed DPs only ever use z * K(n) = z' * p_n(0), where green
// cancels, so this normalization is exact for horizon-N comparisons (N <=
// n_max) even where the true Green's number diverges (d <= 2).
RenewalLaw finite_horizon_renewal(const WalkModel& mx, const WalkModel& my, int n_max);

// Renewal mass sequence u_n = P(n in tau): u_0 = 1,
// u_n = sum_{m=1}^{n} K(m) u_{n-m}. Requires N <= n_max.
struct MassSequence {
    std::vector<double> u;  // size N + 1
    double at(int n) const { return u[static_cast<std::size_t>(n)]; }
    int N() const { return static_cast<int>(u.size()) - 1; }
};

MassSequence mass_sequence(const RenewalLaw& law, int N);

// Versioned JSON cache on disk keyed by (model ids, n_max). Returns the loaded
// law when a compatible blob exists; save overwrites.
std::string renewal_cache_dir();  // RWPM_CACHE_DIR env or "rwpm_cache"
std::optional<RenewalLaw> load_renewal(const std::string& dir, const std::string& model_x,
                                       const std::string& model_y, int n_max);
void save_renewal(const std::string& dir, const RenewalLaw& law);

// Convenience: load from cache or build + save. Uses renewal_cache_dir() when
// dir is empty.
RenewalLaw cached_renewal(const WalkModel& mx, const WalkModel& my, int n_max,
                          const std::string& dir = "");

}  // namespace rwpm
