#pragma once

// Shared experiment implementations behind run_config and the recipes. Each
// ex_* function appends records in a canonical deterministic order; record
// content must not depend on ctx.workers.

#include <cstdint>
#include <string>
#include <vector>

#include "rwpm/experiment.hpp"
#include "rwpm/renewal.hpp"
#include "rwpm/walk_model.hpp"

namespace rwpm::detail {

// Stable per-experiment seed offsets: sub-master = task_seed(master, offset).
enum SeedOffset : std::uint64_t {
    kSeedPartitionOracle = 101,
    kSeedAnnealedMean = 102,
    kSeedFreeEnergy = 103,
    kSeedFracMoment = 104,
    kSeedCoarse = 105,
    kSeedBorneM = 106,
};

// Lazily shared per-pair state: model pair (mx = my = catalogue id) plus the
// cached renewal law at n_max.
struct Lab {
    std::string model_id;
    WalkModel mx, my;
    RenewalLaw law;
    ExperimentContext ctx;
};

Lab make_lab(const std::string& model_id, int n_max, const ExperimentContext& ctx,
             bool with_law = true);

void ex_annealed(const Lab& lab, const std::vector<double>& zs, const std::vector<int>& ns,
                 std::vector<Record>& out);
void ex_critical_point(const Lab& lab, const std::vector<double>& zs, std::vector<Record>& out);
void ex_partition_oracle(const Lab& lab, const std::vector<int>& ns, const std::vector<double>& zs,
                         int envs, int crossover, std::vector<Record>& out);
void ex_annealed_mean(const Lab& lab, const std::vector<double>& zs, int n, int envs, int crossover,
                      std::vector<Record>& out);
void ex_free_energy(const Lab& lab, const std::vector<double>& zs, const std::vector<int>& ns,
                    int envs, std::vector<Record>& out);
void ex_frac_moment(const Lab& lab, const std::vector<double>& zs, const std::vector<double>& gammas,
                    const std::vector<int>& ns, int envs, int crossover, std::vector<Record>& out);
void ex_doney(const Lab& lab, const std::vector<int>& ns, std::vector<Record>& out);
void ex_half_normal(const Lab& lab, const std::vector<int>& ns, std::vector<Record>& out);
void ex_chernoff(const Lab& lab, const std::vector<int>& ns, std::vector<Record>& out);
void ex_conditioning(const Lab& lab, const std::vector<int>& ns, std::vector<Record>& out);
void ex_a_of_r(const Lab& lab, const std::vector<int>& rs, bool enum_checks,
               std::vector<Record>& out);
void ex_tilt_moments(const Lab& lab, const std::vector<int>& rs, std::vector<Record>& out);
void ex_quartic(const Lab& lab, const std::vector<int>& rs, std::vector<Record>& out);
void ex_d4_scan(const std::string& model_id, std::vector<Record>& out);
void ex_kernel_norms(const std::vector<int>& ls, const std::vector<double>& c_ms,
                     std::vector<Record>& out);
void ex_borne_m(const Lab& lab, const std::vector<int>& ls, const std::vector<double>& c_ms,
                const std::vector<double>& gammas, int samples, std::vector<Record>& out);
void ex_coarse_identity(const Lab& lab, const std::vector<int>& ms, const std::vector<int>& ls,
                        const std::vector<double>& zs, int envs, int crossover,
                        std::vector<Record>& out);
// Emits per-subset visit probabilities plus the decay-fit slope; returns the
// empirical per-contact constant exp(fit of log P_I + (7/5) x_I against |I|).
double ex_profile_decay(const Lab& lab, int m, int L, std::vector<Record>& out);
void ex_envelope(const std::vector<double>& gammas, const std::vector<int>& ms, double c2,
                 std::vector<Record>& out);

// Deterministic output order: sort by (experiment, params, method, seed).
void canonicalize_records(std::vector<Record>& recs);

}  // namespace rwpm::detail
