#include "rwpm/renewal_sampler.hpp"

#include <algorithm>
#include <stdexcept>

namespace rwpm {

std::vector<int> sample_renewal(const RenewalLaw& law, const MassSequence& mass, int N,
                                RngStream& rng, bool conditioned_on_N) {
    if (N < 0 || N > law.n_max) throw std::invalid_argument("sample_renewal: N out of [0, n_max]");
    std::vector<int> points;
    if (N == 0) return points;

    if (!conditioned_on_N) {
        // Cumulative jump law over [1, N]; mass beyond N is the stop atom.
        std::vector<double> cum(static_cast<std::size_t>(N) + 1, 0.0);
        for (int j = 1; j <= N; ++j)
            cum[static_cast<std::size_t>(j)] = cum[static_cast<std::size_t>(j) - 1] + law.k[static_cast<std::size_t>(j)];
        int cur = 0;
        for (;;) {
            int rem = N - cur;
            if (rem <= 0) break;
            double u = rng.next_double();
            if (u >= cum[static_cast<std::size_t>(rem)]) break;  // jump beyond the horizon
            int j = static_cast<int>(std::upper_bound(cum.begin() + 1, cum.begin() + rem + 1, u) -
                                     cum.begin());
            cur += j;
            points.push_back(cur);
        }
        return points;
    }

    if (mass.N() < N) throw std::invalid_argument("sample_renewal: mass sequence shorter than N");
    if (mass.at(N) <= 0) throw std::runtime_error("sample_renewal: u_N vanishes, cannot condition");
    // Backward: P(previous = t - j | current = t) = K(j) u_{t-j} / u_t, and
    // sum_j K(j) u_{t-j} = u_t exactly (the DP identity), so the scan below
    // always terminates; j = t is the fallback against rounding.
    int t = N;
    while (t > 0) {
        points.push_back(t);
        double target = rng.next_double() * mass.at(t);
        double acc = 0;
        int pick = t;
        for (int j = 1; j <= t; ++j) {
            acc += law.k[static_cast<std::size_t>(j)] * mass.at(t - j);
            if (acc > target) {
                pick = j;
                break;
            }
        }
        t -= pick;
    }
    std::reverse(points.begin(), points.end());
    return points;
}

}  // namespace rwpm
