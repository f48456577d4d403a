#include "rwpm/free_energy.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "rwpm/parallel.hpp"
#include "rwpm/stats.hpp"
#include "rwpm/tail_sums.hpp"

namespace rwpm {

double annealed_fe_residual(double z, const RenewalLaw& law, double F) {
    if (F < 0) throw std::invalid_argument("annealed_fe_residual: negative F");
    double s = 0;
    for (int n = law.n_max; n >= 1; --n)
        s += law.k[static_cast<std::size_t>(n)] * std::exp(-F * n);
    if (law.ck != 0.0)
        s += law.ck * (damped_tail(1.5, F, law.n_max) + law.ck2 * damped_tail(2.5, F, law.n_max));
    return z * s - 1.0;
}

double annealed_free_energy(double z, const RenewalLaw& law) {
    if (z < 0) throw std::invalid_argument("annealed_free_energy: negative z");
    if (z <= 1.0) return 0.0;
    double lo = 0.0, hi = std::log(z) + 1.0;
    // residual(lo) = z - 1 > 0; residual(hi) <= z e^{-hi} - 1 = 1/e - 1 < 0.
    for (int it = 0; it < 200 && hi - lo > 1e-12 * hi; ++it) {
        double mid = 0.5 * (lo + hi);
        if (annealed_fe_residual(z, law, mid) > 0)
            lo = mid;
        else
            hi = mid;
    }
    return 0.5 * (lo + hi);
}

double annealed_beta_c(const RenewalLaw& law) { return std::log1p(1.0 / law.green); }

FreeEnergyEstimate quenched_free_energy_estimate(const CouplingParams& params, const WalkModel& my,
                                                 const RenewalLaw& law, const WeightEvaluator& weights,
                                                 int N, int env_count, std::uint64_t master_seed,
                                                 unsigned workers) {
    if (N < 1 || N > law.n_max) throw std::invalid_argument("quenched_free_energy_estimate: N out of range");
    if (env_count < 1) throw std::invalid_argument("quenched_free_energy_estimate: env_count must be >= 1");
    std::vector<double> vals(static_cast<std::size_t>(env_count));
    parallel_for_tasks(static_cast<std::size_t>(env_count), workers, [&](std::size_t i) {
        RngStream rng(master_seed, i);
        Environment env = sample_path(my, N, rng);
        PartitionTable table = quenched_partition(params, env, law, weights);
        vals[i] = table.log_zbeta(N) / N;
    });
    MeanStderr ms = mean_stderr(vals);
    FreeEnergyEstimate est;
    est.mean = ms.mean;
    est.stderr_ = ms.stderr_;
    est.annealed =
        (std::log1p(params.z_prime) - std::log(params.z_prime) + annealed_partition(params.z, law, N)) / N;
    est.N = N;
    est.env_count = env_count;
    return est;
}

std::vector<FractionalMomentPoint> fractional_moment_estimate(
    const CouplingParams& params, const WalkModel& my, const RenewalLaw& law,
    const WeightEvaluator& weights, const std::vector<int>& N_ladder, int env_count, double gamma,
    std::uint64_t master_seed, unsigned workers) {
    if (gamma <= 0 || gamma >= 1) throw std::invalid_argument("fractional_moment_estimate: gamma in (0,1)");
    if (N_ladder.empty()) throw std::invalid_argument("fractional_moment_estimate: empty ladder");
    if (env_count < 2) throw std::invalid_argument("fractional_moment_estimate: env_count must be >= 2");
    if (!std::is_sorted(N_ladder.begin(), N_ladder.end()) || N_ladder.front() < 1 ||
        N_ladder.back() > law.n_max)
        throw std::invalid_argument("fractional_moment_estimate: ladder must be sorted in [1, n_max]");
    int top = N_ladder.back();
    std::size_t L = N_ladder.size();
    std::vector<std::vector<double>> vals(L, std::vector<double>(static_cast<std::size_t>(env_count)));
    parallel_for_tasks(static_cast<std::size_t>(env_count), workers, [&](std::size_t i) {
        RngStream rng(master_seed, i);
        Environment env = sample_path(my, top, rng);
        PartitionTable table = quenched_partition(params, env, law, weights);
        for (std::size_t j = 0; j < L; ++j)
            vals[j][i] = std::exp(gamma * table.log_zstar(N_ladder[j]));
    });
    std::vector<double> log_a = annealed_partition_table(params.z, law, top);
    std::vector<FractionalMomentPoint> out(L);
    for (std::size_t j = 0; j < L; ++j) {
        MeanStderr ms = mean_stderr(vals[j]);
        out[j].N = N_ladder[j];
        out[j].mean = ms.mean;
        out[j].stderr_ = ms.stderr_;
        out[j].annealed_log = log_a[static_cast<std::size_t>(N_ladder[j])];
    }
    return out;
}

}  // namespace rwpm
