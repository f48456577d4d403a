#include <iterator>
#include <stdexcept>
#include <string>
#include <vector>

#include "experiments_internal.hpp"
#include "rwpm/experiment.hpp"
#include "rwpm/renewal.hpp"
#include "rwpm/tilt_kernel.hpp"
#include "rwpm/walk_model.hpp"

namespace rwpm {
namespace {

// Standard-grid defaults. Horizon 1e5 covers every N ladder below; the
// crossover keeps quenched weight tables exact through gap 128 (free-energy
// runs override it to N internally so the Jensen comparison stays exact).
constexpr int kSuiteHorizon = 100000;
constexpr int kSuiteCrossover = 128;
constexpr double kSuiteGamma = 6.0 / 7.0;
constexpr double kFrobeniusTarget = 0.05;

ExperimentConfig suite_cfg(const std::string& id) {
    ExperimentConfig cfg;
    cfg.experiment = id;
    cfg.model = "lazy3";
    cfg.n_max = kSuiteHorizon;
    cfg.crossover = kSuiteCrossover;
    return cfg;
}

void run_into(const ExperimentConfig& cfg, const ExperimentContext& ctx,
              std::vector<Record>& out) {
    std::vector<Record> recs = run_config(cfg, ctx);
    out.insert(out.end(), std::make_move_iterator(recs.begin()),
               std::make_move_iterator(recs.end()));
}

// Exact-oracle block: DP vs enumeration at tiny N, and the mean of the
// quenched partition function against the annealed DP.
std::vector<Record> slice_oracles(const ExperimentContext& ctx) {
    std::vector<Record> out;
    {
        ExperimentConfig cfg = suite_cfg("partition-oracle");
        cfg.n = {2, 3, 4};
        cfg.z = {0.5, 1.0, 2.0};
        cfg.envs = 20;
        run_into(cfg, ctx, out);
    }
    {
        ExperimentConfig cfg = suite_cfg("annealed-mean");
        cfg.z = {0.8, 1.0, 1.3};
        cfg.n = {64};
        cfg.envs = 10000;
        run_into(cfg, ctx, out);
    }
    return out;
}

// Free-energy block: critical-point identities, quenched-vs-annealed grid,
// fractional moments, and the plain annealed ladder.
std::vector<Record> slice_fe_grid(const ExperimentContext& ctx) {
    std::vector<Record> out;
    {
        ExperimentConfig cfg = suite_cfg("critical-point");
        cfg.z = {0.5, 0.8, 1.0, 1.2, 1.5};
        run_into(cfg, ctx, out);
    }
    {
        ExperimentConfig cfg = suite_cfg("free-energy");
        cfg.z = {0.8, 1.0, 1.2, 1.5};
        cfg.n = {1024};
        cfg.envs = 300;
        run_into(cfg, ctx, out);
    }
    {
        ExperimentConfig cfg = suite_cfg("frac-moment");
        cfg.z = {1.0};
        cfg.gamma = {0.5};
        cfg.n = {256, 512, 1024};
        cfg.envs = 200;
        run_into(cfg, ctx, out);
    }
    {
        ExperimentConfig cfg = suite_cfg("annealed");
        cfg.z = {0.5, 1.0, 1.2};
        cfg.n = {10, 100, 1000};
        run_into(cfg, ctx, out);
    }
    return out;
}

// Contact-process asymptotics: local limit constant, half-normal range law,
// range large deviations, and the conditioning ratios.
std::vector<Record> slice_contact(const ExperimentContext& ctx) {
    std::vector<Record> out;
    {
        ExperimentConfig cfg = suite_cfg("doney");
        cfg.n = {100, 1000, 10000};
        run_into(cfg, ctx, out);
    }
    {
        ExperimentConfig cfg = suite_cfg("half-normal-ks");
        cfg.n = {100, 1000, 10000};
        run_into(cfg, ctx, out);
    }
    {
        ExperimentConfig cfg = suite_cfg("chernoff-tail");
        cfg.n = {10000};
        run_into(cfg, ctx, out);
    }
    {
        ExperimentConfig cfg = suite_cfg("conditioning");
        cfg.n = {1024};
        run_into(cfg, ctx, out);
    }
    return out;
}

// Tilted-interval constants: A(r) ladder with small-r enumeration checks,
// second moments, quartic patterns, the d = 4 sign scan, and kernel norms.
std::vector<Record> slice_tilt(const ExperimentContext& ctx) {
    std::vector<Record> out;
    {
        ExperimentConfig cfg = suite_cfg("a-of-r");
        cfg.r = {3, 50, 100, 150, 200};
        run_into(cfg, ctx, out);
    }
    {
        ExperimentConfig cfg = suite_cfg("tilt-moments");
        cfg.r = {50, 100, 200};
        run_into(cfg, ctx, out);
    }
    {
        ExperimentConfig cfg = suite_cfg("quartic");
        cfg.r = {3, 4, 5};
        run_into(cfg, ctx, out);
    }
    {
        ExperimentConfig cfg = suite_cfg("d4-scan");
        cfg.model = "lazy4";
        run_into(cfg, ctx, out);
    }
    {
        ExperimentConfig cfg = suite_cfg("kernel-norms");
        cfg.l = {1000};
        cfg.c_m = {amplitude_for_frobenius(1000, kFrobeniusTarget)};
        run_into(cfg, ctx, out);
    }
    return out;
}

// Coarse-grained block decompositions plus the pinned-envelope closure.
// The envelope run emits the m = 8, L = 64 visit-profile fit it consumes.
std::vector<Record> slice_coarse(const ExperimentContext& ctx) {
    std::vector<Record> out;
    {
        ExperimentConfig cfg = suite_cfg("coarse-identity");
        cfg.m = {3};
        cfg.l = {8};
        cfg.z = {1.0, 1.2};
        cfg.envs = 10;
        run_into(cfg, ctx, out);
    }
    {
        ExperimentConfig cfg = suite_cfg("envelope");
        cfg.gamma = {kSuiteGamma};
        cfg.m = {16, 64, 256, 1024};
        run_into(cfg, ctx, out);
    }
    return out;
}

// Exponential moment of the positive tilted-cost overshoot.
std::vector<Record> slice_borne(const ExperimentContext& ctx) {
    std::vector<Record> out;
    ExperimentConfig cfg = suite_cfg("borne-m");
    cfg.l = {1000};
    cfg.c_m = {amplitude_for_frobenius(1000, kFrobeniusTarget)};
    cfg.gamma = {kSuiteGamma};
    cfg.samples = 100000;
    run_into(cfg, ctx, out);
    return out;
}

std::vector<Record> paper_suite(const ExperimentContext& ctx) {
    std::vector<Record> out;
    for (auto* slice : {slice_oracles, slice_fe_grid, slice_contact, slice_tilt, slice_coarse,
                        slice_borne}) {
        std::vector<Record> recs = slice(ctx);
        out.insert(out.end(), std::make_move_iterator(recs.begin()),
                   std::make_move_iterator(recs.end()));
    }
    return out;
}

// Fast everything-touches pass: every experiment id at toy sizes.
std::vector<Record> smoke(const ExperimentContext& ctx) {
    auto smoke_cfg = [](const std::string& id) {
        ExperimentConfig cfg;
        cfg.experiment = id;
        cfg.model = "lazy3";
        cfg.n_max = 4096;
        cfg.crossover = 64;
        return cfg;
    };
    std::vector<Record> out;
    {
        ExperimentConfig cfg = smoke_cfg("annealed");
        cfg.z = {1.0};
        cfg.n = {10};
        run_into(cfg, ctx, out);
    }
    {
        ExperimentConfig cfg = smoke_cfg("critical-point");
        cfg.z = {0.8, 1.2};
        run_into(cfg, ctx, out);
    }
    {
        ExperimentConfig cfg = smoke_cfg("partition-oracle");
        cfg.n = {2, 3};
        cfg.z = {1.0};
        cfg.envs = 5;
        run_into(cfg, ctx, out);
    }
    {
        ExperimentConfig cfg = smoke_cfg("annealed-mean");
        cfg.z = {1.0};
        cfg.n = {32};
        cfg.envs = 500;
        run_into(cfg, ctx, out);
    }
    {
        ExperimentConfig cfg = smoke_cfg("free-energy");
        cfg.z = {1.2};
        cfg.n = {128};
        cfg.envs = 30;
        run_into(cfg, ctx, out);
    }
    {
        ExperimentConfig cfg = smoke_cfg("frac-moment");
        cfg.z = {1.0};
        cfg.gamma = {0.5};
        cfg.n = {64, 128};
        cfg.envs = 20;
        run_into(cfg, ctx, out);
    }
    {
        ExperimentConfig cfg = smoke_cfg("doney");
        cfg.n = {100, 1000};
        run_into(cfg, ctx, out);
    }
    {
        ExperimentConfig cfg = smoke_cfg("half-normal-ks");
        cfg.n = {256};
        run_into(cfg, ctx, out);
    }
    {
        ExperimentConfig cfg = smoke_cfg("chernoff-tail");
        cfg.n = {1024};
        run_into(cfg, ctx, out);
    }
    {
        ExperimentConfig cfg = smoke_cfg("conditioning");
        cfg.n = {256};
        run_into(cfg, ctx, out);
    }
    {
        ExperimentConfig cfg = smoke_cfg("a-of-r");
        cfg.r = {3, 50};
        run_into(cfg, ctx, out);
    }
    {
        ExperimentConfig cfg = smoke_cfg("tilt-moments");
        cfg.r = {50};
        run_into(cfg, ctx, out);
    }
    {
        ExperimentConfig cfg = smoke_cfg("quartic");
        cfg.r = {3, 4};
        run_into(cfg, ctx, out);
    }
    {
        ExperimentConfig cfg = smoke_cfg("d4-scan");
        cfg.model = "lazy4";
        run_into(cfg, ctx, out);
    }
    {
        ExperimentConfig cfg = smoke_cfg("kernel-norms");
        cfg.l = {100};
        cfg.c_m = {amplitude_for_frobenius(100, kFrobeniusTarget)};
        run_into(cfg, ctx, out);
    }
    {
        ExperimentConfig cfg = smoke_cfg("borne-m");
        cfg.l = {64};
        cfg.c_m = {amplitude_for_frobenius(64, kFrobeniusTarget)};
        cfg.gamma = {kSuiteGamma};
        cfg.samples = 2000;
        run_into(cfg, ctx, out);
    }
    {
        ExperimentConfig cfg = smoke_cfg("coarse-identity");
        cfg.m = {2};
        cfg.l = {4};
        cfg.z = {1.0};
        cfg.envs = 3;
        run_into(cfg, ctx, out);
    }
    {
        ExperimentConfig cfg = smoke_cfg("profile-decay");
        cfg.m = {6};
        cfg.l = {16};
        run_into(cfg, ctx, out);
    }
    {
        ExperimentConfig cfg = smoke_cfg("envelope");
        cfg.gamma = {kSuiteGamma};
        cfg.m = {16, 64};
        run_into(cfg, ctx, out);
    }
    return out;
}

}  // namespace

const std::vector<Recipe>& recipe_registry() {
    static const std::vector<Recipe> recipes = {
        {"paper-suite",
         "full standard grid: every experiment behind the acceptance checks",
         paper_suite},
        {"oracles",
         "quenched DP vs path enumeration, sample mean vs exact annealed DP",
         slice_oracles},
        {"fe-grid",
         "critical-point identities, quenched vs annealed free energy, fractional moments",
         slice_fe_grid},
        {"contact-asymptotics",
         "contact-mass constant, half-normal range law, range tails, conditioning ratios",
         slice_contact},
        {"tilt-constants",
         "A(r) ladder with enumeration checks, tilted moments, quartics, d = 4 scan, kernel norms",
         slice_tilt},
        {"coarse-profiles",
         "block decomposition identities, visit-profile decay fit, pinned envelope",
         slice_coarse},
        {"borne-m",
         "exponential moment of the positive tilted-cost overshoot (99% CI)",
         slice_borne},
        {"smoke",
         "fast everything-touches pass at toy sizes",
         smoke},
    };
    return recipes;
}

const Recipe* find_recipe(const std::string& name) {
    for (const Recipe& r : recipe_registry())
        if (r.name == name) return &r;
    return nullptr;
}

std::vector<Record> run_recipe(const std::string& name, const ExperimentContext& ctx) {
    const Recipe* r = find_recipe(name);
    if (!r) throw std::invalid_argument("run_recipe: unknown recipe '" + name + "'");
    std::vector<Record> recs = r->run(ctx);
    detail::canonicalize_records(recs);
    return recs;
}

std::vector<std::string> build_caches(const std::string& cache_dir, int n_max) {
    std::string dir = cache_dir.empty() ? renewal_cache_dir() : cache_dir;
    std::vector<std::string> paths;
    for (const char* id : {"lazy3", "srw3"}) {
        WalkModel m = model_by_id(id);
        cached_renewal(m, m, n_max, dir);
        // mirrors the cache blob naming used by the loader
        paths.push_back(dir + "/renewal_" + m.name + "_" + m.name + "_" +
                        std::to_string(n_max) + ".json");
    }
    return paths;
}

}  // namespace rwpm
