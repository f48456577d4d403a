#include "rwpm/experiment.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <map>
#include <set>
#include <stdexcept>

#include "experiments_internal.hpp"
#include "rwpm/coarse.hpp"
#include "rwpm/contact_dist.hpp"
#include "rwpm/environment.hpp"
#include "rwpm/free_energy.hpp"
#include "rwpm/parallel.hpp"
#include "rwpm/pinning.hpp"
#include "rwpm/renewal.hpp"
#include "rwpm/stats.hpp"
#include "rwpm/tilt_kernel.hpp"
#include "rwpm/tilted_interval.hpp"

namespace rwpm {

namespace {

const std::set<std::string>& known_experiments() {
    static const std::set<std::string> ids = {
        "annealed",        "free-energy",     "frac-moment",   "partition-oracle",
        "annealed-mean",   "critical-point",  "doney",         "half-normal-ks",
        "chernoff-tail",   "conditioning",    "a-of-r",        "tilt-moments",
        "quartic",         "d4-scan",         "kernel-norms",  "borne-m",
        "coarse-identity", "profile-decay",   "envelope",
    };
    return ids;
}

// Experiments that never touch a renewal law (no n_max/model-dim demands).
// Experiments that never touch the renewal law: pure interval/kernel
// computations. They skip the cache bootstrap and the n_max checks.
bool needs_law(const std::string& id) {
    return id != "kernel-norms" && id != "d4-scan" && id != "a-of-r" &&
           id != "tilt-moments" && id != "quartic" && id != "borne-m";
}

std::string trim(const std::string& s) {
    std::size_t b = s.find_first_not_of(" \t");
    if (b == std::string::npos) return "";
    std::size_t e = s.find_last_not_of(" \t");
    return s.substr(b, e - b + 1);
}

bool parse_int_strict(const std::string& s, long long* out) {
    if (s.empty()) return false;
    char* end = nullptr;
    long long v = std::strtoll(s.c_str(), &end, 10);
    if (end == s.c_str() || *end != '\0') return false;
    *out = v;
    return true;
}

bool parse_double_strict(const std::string& s, double* out) {
    if (s.empty()) return false;
    char* end = nullptr;
    double v = std::strtod(s.c_str(), &end);
    if (end == s.c_str() || *end != '\0') return false;
    *out = v;
    return true;
}

}  // namespace

ExperimentConfig parse_config(const std::string& text) {
    ExperimentConfig cfg;
    std::vector<std::string> errors;
    std::set<std::string> seen_scalars;

    std::vector<std::string> lines;
    std::string cur;
    for (char c : text) {
        if (c == '\n') {
            lines.push_back(cur);
            cur.clear();
        } else {
            cur += c;
        }
    }
    if (!cur.empty()) lines.push_back(cur);

    for (std::size_t li = 0; li < lines.size(); ++li) {
        std::string line = lines[li];
        std::size_t hash = line.find('#');
        if (hash != std::string::npos) line = line.substr(0, hash);
        line = trim(line);
        if (line.empty()) continue;
        auto bad = [&](const std::string& why) {
            errors.push_back("line " + std::to_string(li + 1) + ": " + why + " ('" + trim(lines[li]) + "')");
        };
        std::size_t eq = line.find('=');
        if (eq == std::string::npos) {
            bad("expected key = value");
            continue;
        }
        std::string key = trim(line.substr(0, eq));
        std::string val = trim(line.substr(eq + 1));
        if (key.empty() || val.empty()) {
            bad("empty key or value");
            continue;
        }

        long long iv = 0;
        double dv = 0;
        auto scalar_once = [&](const char* k) {
            if (seen_scalars.count(k)) {
                bad(std::string("duplicate scalar key '") + k + "'");
                return false;
            }
            seen_scalars.insert(k);
            return true;
        };

        if (key == "z" || key == "beta" || key == "gamma" || key == "c_m") {
            if (!parse_double_strict(val, &dv)) {
                bad("bad real value");
                continue;
            }
            if (key == "z") cfg.z.push_back(dv);
            else if (key == "beta") cfg.beta.push_back(dv);
            else if (key == "gamma") cfg.gamma.push_back(dv);
            else cfg.c_m.push_back(dv);
        } else if (key == "n" || key == "l" || key == "m" || key == "r") {
            if (!parse_int_strict(val, &iv)) {
                bad("bad integer value");
                continue;
            }
            if (key == "n") cfg.n.push_back(static_cast<int>(iv));
            else if (key == "l") cfg.l.push_back(static_cast<int>(iv));
            else if (key == "m") cfg.m.push_back(static_cast<int>(iv));
            else cfg.r.push_back(static_cast<int>(iv));
        } else if (key == "experiment") {
            if (scalar_once("experiment")) cfg.experiment = val;
        } else if (key == "model") {
            if (scalar_once("model")) cfg.model = val;
        } else if (key == "out") {
            if (scalar_once("out")) cfg.out = val;
        } else if (key == "envs" || key == "samples" || key == "crossover" || key == "n_max" ||
                   key == "workers") {
            if (!parse_int_strict(val, &iv)) {
                bad("bad integer value");
                continue;
            }
            if (!scalar_once(key.c_str())) continue;
            if (key == "envs") cfg.envs = static_cast<int>(iv);
            else if (key == "samples") cfg.samples = static_cast<int>(iv);
            else if (key == "crossover") cfg.crossover = static_cast<int>(iv);
            else if (key == "n_max") cfg.n_max = static_cast<int>(iv);
            else cfg.workers = static_cast<unsigned>(iv);
        } else if (key == "seed") {
            if (!parse_int_strict(val, &iv) || iv < 0) {
                bad("bad seed value");
                continue;
            }
            if (scalar_once("seed")) cfg.seed = static_cast<std::uint64_t>(iv);
        } else {
            bad("unknown key '" + key + "'");
        }
    }

    if (!errors.empty()) {
        std::string msg = "parse_config:";
        for (const std::string& e : errors) msg += "\n  " + e;
        throw std::invalid_argument(msg);
    }
    return cfg;
}

std::vector<std::string> config_errors(const ExperimentConfig& cfg) {
    std::vector<std::string> errs;
    const std::string& id = cfg.experiment;
    if (id.empty()) {
        errs.push_back("experiment: missing");
        return errs;
    }
    if (!known_experiments().count(id)) {
        errs.push_back("experiment: unknown id '" + id + "'");
        return errs;
    }

    int dim = 0;
    try {
        dim = model_by_id(cfg.model).dim;
    } catch (const std::exception& e) {
        errs.push_back(std::string("model: ") + e.what());
    }
    if (dim > 0) {
        if (needs_law(id) && dim < 3) errs.push_back("model: renewal experiments need d >= 3");
        if (id == "d4-scan" && dim != 4) errs.push_back("model: d4-scan needs a d = 4 model");
    }

    if (!cfg.z.empty() && !cfg.beta.empty()) errs.push_back("z and beta are mutually exclusive");
    for (double z : cfg.z)
        if (!(z >= 0)) errs.push_back("z: values must be >= 0");
    for (double b : cfg.beta)
        if (!(b >= 0)) errs.push_back("beta: values must be >= 0");
    for (double g : cfg.gamma)
        if (!(g > 0 && g < 1)) errs.push_back("gamma: values must be in (0, 1)");
    for (double c : cfg.c_m)
        if (!(c >= 0)) errs.push_back("c_m: values must be >= 0");
    for (int n : cfg.n)
        if (n < 1) errs.push_back("n: values must be >= 1");
    for (int l : cfg.l)
        if (l < 1) errs.push_back("l: values must be >= 1");
    for (int m : cfg.m)
        if (m < 1) errs.push_back("m: values must be >= 1");
    for (int r : cfg.r)
        if (r < 1) errs.push_back("r: values must be >= 1");
    if (needs_law(id)) {
        if (cfg.n_max < 100) errs.push_back("n_max: must be >= 100");
        if (cfg.crossover < 1 || cfg.crossover > cfg.n_max)
            errs.push_back("crossover: must be in [1, n_max]");
        for (int n : cfg.n)
            if (n > cfg.n_max) errs.push_back("n: values must be <= n_max");
    }
    if (cfg.workers < 1) errs.push_back("workers: must be >= 1");

    bool coupling = !cfg.z.empty() || !cfg.beta.empty();
    auto need = [&](bool ok, const char* what) {
        if (!ok) errs.push_back(std::string(id) + ": needs " + what);
    };
    if (id == "annealed") {
        need(coupling, "z or beta grid");
        need(!cfg.n.empty(), "n grid");
    } else if (id == "free-energy") {
        need(coupling, "z or beta grid");
        need(!cfg.n.empty(), "n grid");
        need(cfg.envs >= 2, "envs >= 2");
    } else if (id == "frac-moment") {
        need(coupling, "z or beta grid");
        need(!cfg.gamma.empty(), "gamma grid");
        need(!cfg.n.empty(), "n grid");
        need(cfg.envs >= 2, "envs >= 2");
    } else if (id == "partition-oracle") {
        need(coupling, "z or beta grid");
        need(!cfg.n.empty(), "n grid");
        need(cfg.envs >= 1, "envs >= 1");
        for (int n : cfg.n)
            if (n > 4) errs.push_back("partition-oracle: n > 4 is not enumerable");
    } else if (id == "annealed-mean") {
        need(coupling, "z or beta grid");
        need(!cfg.n.empty(), "n grid");
        need(cfg.envs >= 2, "envs >= 2");
    } else if (id == "critical-point") {
        need(coupling, "z or beta grid");
    } else if (id == "doney" || id == "half-normal-ks" || id == "chernoff-tail" ||
               id == "conditioning") {
        need(!cfg.n.empty(), "n grid");
        if (id == "conditioning")
            for (int n : cfg.n)
                if (2 * n > cfg.n_max) errs.push_back("conditioning: needs 2n <= n_max");
    } else if (id == "a-of-r" || id == "tilt-moments" || id == "quartic") {
        need(!cfg.r.empty(), "r grid");
        if (id != "tilt-moments")
            for (int r : cfg.r)
                if (r < 2) errs.push_back(id + ": r values must be >= 2");
    } else if (id == "d4-scan") {
        // model-dim check above is the whole contract
    } else if (id == "kernel-norms") {
        need(!cfg.l.empty(), "l grid");
        need(!cfg.c_m.empty(), "c_m grid");
        for (int l : cfg.l)
            if (l < 2) errs.push_back("kernel-norms: l values must be >= 2");
    } else if (id == "borne-m") {
        need(!cfg.l.empty(), "l grid");
        need(!cfg.c_m.empty(), "c_m grid");
        need(!cfg.gamma.empty(), "gamma grid");
        need(cfg.samples >= 2, "samples >= 2");
        for (int l : cfg.l)
            if (l < 2) errs.push_back("borne-m: l values must be >= 2");
    } else if (id == "coarse-identity") {
        need(coupling, "z or beta grid");
        need(!cfg.m.empty(), "m grid");
        need(!cfg.l.empty(), "l grid");
        need(cfg.envs >= 1, "envs >= 1");
        for (int m : cfg.m) {
            if (m > 20) errs.push_back("coarse-identity: m values must be <= 20 (2^m sweep)");
            for (int l : cfg.l)
                if (m * l > cfg.n_max) errs.push_back("coarse-identity: m*l must be <= n_max");
        }
    } else if (id == "profile-decay") {
        need(!cfg.m.empty(), "m grid");
        need(!cfg.l.empty(), "l grid");
        for (int m : cfg.m) {
            if (m < 2) errs.push_back("profile-decay: m values must be >= 2");
            if (m > 20) errs.push_back("profile-decay: m values must be <= 20 (2^m sweep)");
            for (int l : cfg.l)
                if (m * l > cfg.n_max) errs.push_back("profile-decay: m*l must be <= n_max");
        }
    } else if (id == "envelope") {
        need(!cfg.gamma.empty(), "gamma grid");
        need(!cfg.m.empty(), "m grid");
        // the empirical c2 fit runs on the m = 8, L = 64 visit profile
        need(cfg.n_max >= 512, "n_max >= 512");
    }
    return errs;
}

namespace detail {

Lab make_lab(const std::string& model_id, int n_max, const ExperimentContext& ctx, bool with_law) {
    Lab lab;
    lab.model_id = model_id;
    lab.mx = model_by_id(model_id);
    lab.my = lab.mx;
    if (with_law) lab.law = cached_renewal(lab.mx, lab.my, n_max, ctx.cache_dir);
    lab.ctx = ctx;
    return lab;
}

void ex_annealed(const Lab& lab, const std::vector<double>& zs, const std::vector<int>& ns,
                 std::vector<Record>& out) {
    for (double z : zs)
        for (int n : ns) {
            Record r;
            r.experiment = "annealed";
            r.params = ParamTuple().add("model", lab.model_id).add("z", z).add("n", n).str();
            r.value = annealed_partition(z, lab.law, n);
            r.method = "exact-dp";
            out.push_back(std::move(r));
        }
}

void ex_critical_point(const Lab& lab, const std::vector<double>& zs, std::vector<Record>& out) {
    {
        Record r;
        r.experiment = "betac-identity";
        r.params = ParamTuple().add("model", lab.model_id).str();
        r.value = std::expm1(annealed_beta_c(lab.law)) * lab.law.green;
        r.method = "exact";
        out.push_back(std::move(r));
    }
    for (double z : zs) {
        double f = annealed_free_energy(z, lab.law);
        Record r;
        r.experiment = "annealed-fe";
        r.params = ParamTuple().add("model", lab.model_id).add("z", z).str();
        r.value = f;
        r.method = "exact";
        out.push_back(std::move(r));
        if (z > 1) {
            Record q;
            q.experiment = "annealed-fe-residual";
            q.params = ParamTuple().add("model", lab.model_id).add("z", z).str();
            q.value = std::fabs(annealed_fe_residual(z, lab.law, f));
            q.method = "exact";
            out.push_back(std::move(q));
        }
    }
}

void ex_partition_oracle(const Lab& lab, const std::vector<int>& ns, const std::vector<double>& zs,
                         int envs, int crossover, std::vector<Record>& out) {
    std::uint64_t sub = task_seed(lab.ctx.master_seed, kSeedPartitionOracle);
    WeightEvaluator weights(lab.mx, lab.law, crossover);
    for (int n : ns) {
        if (n > 4) throw std::invalid_argument("ex_partition_oracle: n > 4 is not enumerable");
        for (int e = 0; e < envs; ++e) {
            RngStream rng(sub, static_cast<std::uint64_t>(e) * 8 + static_cast<std::uint64_t>(n));
            Environment env = sample_path(lab.my, n, rng);

            // Collision-count histogram over all X paths: hist[c] sums the
            // probability of paths with X_n = Y_n and c collisions before n.
            std::vector<double> hist(static_cast<std::size_t>(n), 0.0);
            auto dfs = [&](auto&& self, int k, const Point& x, int coll, double prob) -> void {
                if (k == n) {
                    if (x == env.position(n)) hist[static_cast<std::size_t>(coll)] += prob;
                    return;
                }
                for (const auto& [stp, p] : lab.mx.support) {
                    Point nx = add(x, stp);
                    int ncoll = coll + (k + 1 < n && nx == env.position(k + 1) ? 1 : 0);
                    self(self, k + 1, nx, ncoll, prob * p);
                }
            };
            dfs(dfs, 0, zero_point(), 0, 1.0);

            for (double z : zs) {
                CouplingParams params = CouplingParams::from_z(z, lab.law.green);
                double zp = params.z_prime;
                double z_enum = 0;
                for (std::size_t c = 0; c < hist.size(); ++c)
                    z_enum += hist[c] * std::pow(1.0 + zp, static_cast<double>(c));
                z_enum *= zp;
                if (z_enum <= 0) throw std::logic_error("ex_partition_oracle: enumeration sum vanished");
                double z_dp = std::exp(quenched_partition(params, env, lab.law, weights).log_zstar(n));
                Record r;
                r.experiment = "partition-oracle";
                r.params = ParamTuple()
                               .add("model", lab.model_id)
                               .add("n", n)
                               .add("z", z)
                               .add("env", e)
                               .str();
                r.value = std::fabs(z_dp / z_enum - 1.0);
                r.method = "dp-vs-enum";
                r.seed = rng.seed();
                out.push_back(std::move(r));
            }
        }
    }
}

void ex_annealed_mean(const Lab& lab, const std::vector<double>& zs, int n, int envs, int crossover,
                      std::vector<Record>& out) {
    std::uint64_t sub = task_seed(lab.ctx.master_seed, kSeedAnnealedMean);
    WeightEvaluator weights(lab.mx, lab.law, crossover);
    std::vector<CouplingParams> params;
    params.reserve(zs.size());
    for (double z : zs) params.push_back(CouplingParams::from_z(z, lab.law.green));

    std::vector<std::vector<double>> vals(zs.size(), std::vector<double>(static_cast<std::size_t>(envs)));
    parallel_for_tasks(static_cast<std::size_t>(envs), lab.ctx.workers, [&](std::size_t e) {
        RngStream rng(sub, e);
        Environment env = sample_path(lab.my, n, rng);
        for (std::size_t zi = 0; zi < zs.size(); ++zi)
            vals[zi][e] = std::exp(quenched_partition(params[zi], env, lab.law, weights).log_zstar(n));
    });

    for (std::size_t zi = 0; zi < zs.size(); ++zi) {
        MeanStderr ms = mean_stderr(vals[zi]);
        Record r;
        r.experiment = "annealed-mean";
        r.params = ParamTuple()
                       .add("model", lab.model_id)
                       .add("n", n)
                       .add("z", zs[zi])
                       .add("envs", envs)
                       .str();
        r.value = ms.mean;
        r.has_stderr = true;
        r.stderr_ = ms.stderr_;
        r.method = "mc";
        r.seed = sub;
        out.push_back(std::move(r));

        Record x;
        x.experiment = "annealed-exact";
        x.params = ParamTuple().add("model", lab.model_id).add("n", n).add("z", zs[zi]).str();
        x.value = std::exp(annealed_partition(zs[zi], lab.law, n));
        x.method = "exact-dp";
        out.push_back(std::move(x));
    }
}

void ex_free_energy(const Lab& lab, const std::vector<double>& zs, const std::vector<int>& ns,
                    int envs, std::vector<Record>& out) {
    std::uint64_t sub = task_seed(lab.ctx.master_seed, kSeedFreeEnergy);
    // crossover = N keeps every gap weight on the exact tables, so the
    // annealed value is the exact mean of the sampled quantity.
    std::map<int, WeightEvaluator> weights_by_n;
    std::uint64_t idx = 0;
    for (double z : zs)
        for (int n : ns) {
            auto it = weights_by_n.find(n);
            if (it == weights_by_n.end())
                it = weights_by_n.emplace(n, WeightEvaluator(lab.mx, lab.law, n)).first;
            CouplingParams params = CouplingParams::from_z(z, lab.law.green);
            FreeEnergyEstimate est = quenched_free_energy_estimate(
                params, lab.my, lab.law, it->second, n, envs, task_seed(sub, idx), lab.ctx.workers);
            ++idx;

            Record r;
            r.experiment = "fe-quenched";
            r.params = ParamTuple()
                           .add("model", lab.model_id)
                           .add("n", n)
                           .add("z", z)
                           .add("envs", envs)
                           .str();
            r.value = est.mean;
            r.has_stderr = true;
            r.stderr_ = est.stderr_;
            r.method = "mc";
            r.seed = task_seed(sub, idx - 1);
            out.push_back(std::move(r));

            Record a;
            a.experiment = "fe-annealed";
            a.params = ParamTuple().add("model", lab.model_id).add("n", n).add("z", z).str();
            a.value = est.annealed;
            a.method = "exact-dp";
            out.push_back(std::move(a));
        }
}

void ex_frac_moment(const Lab& lab, const std::vector<double>& zs, const std::vector<double>& gammas,
                    const std::vector<int>& ns, int envs, int crossover, std::vector<Record>& out) {
    std::uint64_t sub = task_seed(lab.ctx.master_seed, kSeedFracMoment);
    WeightEvaluator weights(lab.mx, lab.law, crossover);
    std::uint64_t idx = 0;
    for (double z : zs)
        for (double gamma : gammas) {
            CouplingParams params = CouplingParams::from_z(z, lab.law.green);
            std::vector<FractionalMomentPoint> pts = fractional_moment_estimate(
                params, lab.my, lab.law, weights, ns, envs, gamma, task_seed(sub, idx), lab.ctx.workers);
            ++idx;
            for (const FractionalMomentPoint& p : pts) {
                Record r;
                r.experiment = "frac-moment";
                r.params = ParamTuple()
                               .add("model", lab.model_id)
                               .add("z", z)
                               .add("gamma", gamma)
                               .add("n", p.N)
                               .add("envs", envs)
                               .str();
                r.value = p.mean;
                r.has_stderr = true;
                r.stderr_ = p.stderr_;
                r.method = "mc";
                r.seed = task_seed(sub, idx - 1);
                out.push_back(std::move(r));

                Record a;
                a.experiment = "frac-moment-annealed";
                a.params =
                    ParamTuple().add("model", lab.model_id).add("z", z).add("n", p.N).str();
                a.value = p.annealed_log;
                a.method = "exact-dp";
                out.push_back(std::move(a));
            }
        }
}

void ex_doney(const Lab& lab, const std::vector<int>& ns, std::vector<Record>& out) {
    int n_top = *std::max_element(ns.begin(), ns.end());
    MassSequence u = mass_sequence(lab.law, n_top);
    for (int n : ns) {
        Record r;
        r.experiment = "doney";
        r.params = ParamTuple().add("model", lab.model_id).add("n", n).str();
        r.value = u.at(n) * 2.0 * M_PI * lab.law.ck * std::sqrt(static_cast<double>(n)) - 1.0;
        r.method = "exact-dp";
        out.push_back(std::move(r));
    }
}

void ex_half_normal(const Lab& lab, const std::vector<int>& ns, std::vector<Record>& out) {
    for (int n : ns) {
        Record r;
        r.experiment = "half-normal-ks";
        r.params = ParamTuple().add("model", lab.model_id).add("n", n).str();
        r.value = ks_halfnormal(lab.law, n);
        r.method = "exact-conv";
        out.push_back(std::move(r));
    }
}

void ex_chernoff(const Lab& lab, const std::vector<int>& ns, std::vector<Record>& out) {
    const int alphas[] = {2, 4, 8};
    for (int n : ns)
        for (int alpha : alphas) {
            int k = static_cast<int>(std::lround(alpha * std::sqrt(static_cast<double>(n))));
            Record r;
            r.experiment = "chernoff-tail";
            r.params = ParamTuple()
                           .add("model", lab.model_id)
                           .add("n", n)
                           .add("alpha", alpha)
                           .add("k", k)
                           .str();
            r.value = std::log(contact_tail_prob(lab.law, n, k));
            r.method = "exact-conv";
            out.push_back(std::move(r));
        }
}

void ex_conditioning(const Lab& lab, const std::vector<int>& ns, std::vector<Record>& out) {
    for (int n : ns) {
        ConditioningReport rep = conditioning_ratio(lab.law, n);
        for (const ConditioningEntry& e : rep.entries) {
            if (e.skipped) continue;
            Record r;
            r.experiment = "conditioning";
            r.params =
                ParamTuple().add("model", lab.model_id).add("n", n).add("name", e.name).str();
            r.value = e.ratio;
            r.method = "exact-dp";
            out.push_back(std::move(r));
        }
    }
}

void ex_a_of_r(const Lab& lab, const std::vector<int>& rs, bool enum_checks,
               std::vector<Record>& out) {
    for (int r : rs) {
        TiltedIntervalStats st = tilted_interval_stats(lab.mx, lab.my, r);
        Record rec;
        rec.experiment = "a-of-r";
        rec.params = ParamTuple().add("model", lab.model_id).add("r", r).str();
        rec.value = st.a_of_r;
        rec.method = "exact-conv";
        out.push_back(std::move(rec));
    }
    if (enum_checks) {
        for (int r = 2; r <= 4; ++r) {
            double a_conv = tilted_interval_stats(lab.mx, lab.my, r).a_of_r;
            double a_enum = tilted_interval_enumerate(lab.mx, lab.my, r).a_of_r;
            Record rec;
            rec.experiment = "a-enum-check";
            rec.params = ParamTuple().add("model", lab.model_id).add("r", r).str();
            rec.value = std::fabs(a_conv / a_enum - 1.0);
            rec.method = "conv-vs-enum";
            out.push_back(std::move(rec));
        }
    }
}

void ex_tilt_moments(const Lab& lab, const std::vector<int>& rs, std::vector<Record>& out) {
    for (int r : rs) {
        TiltedIntervalStats st = tilted_interval_stats(lab.mx, lab.my, r);
        for (const char* stat : {"delta_sq", "b_of_r"}) {
            Record rec;
            rec.experiment = "tilt-moments";
            rec.params =
                ParamTuple().add("model", lab.model_id).add("r", r).add("stat", stat).str();
            rec.value = std::string(stat) == "delta_sq" ? st.delta_sq : st.b_of_r;
            rec.method = "exact-conv";
            out.push_back(std::move(rec));
        }
    }
}

void ex_quartic(const Lab& lab, const std::vector<int>& rs, std::vector<Record>& out) {
    auto push = [&](int r, int s, const char* pattern, double v) {
        if (std::isnan(v)) return;
        Record rec;
        rec.experiment = "quartic";
        rec.params = ParamTuple()
                         .add("model", lab.model_id)
                         .add("r", r)
                         .add("s", s)
                         .add("pattern", pattern)
                         .str();
        rec.value = v;
        rec.method = "exact-conv";
        out.push_back(std::move(rec));
    };
    for (int r : rs) {
        QuarticMoments q = quartic_moments(lab.mx, lab.my, r, r);
        push(r, r, "iij", q.iij);
        push(r, r, "ijkl_same", q.ijkl_same);
        push(r, r, "ijkl_cross", q.ijkl_cross);
    }
    for (std::size_t i = 0; i < rs.size(); ++i)
        for (std::size_t j = i + 1; j < rs.size(); ++j)
            push(rs[i], rs[j], "ijkl_cross", quartic_moments(lab.mx, lab.my, rs[i], rs[j]).ijkl_cross);
}

void ex_d4_scan(const std::string& model_id, std::vector<Record>& out) {
    WalkModel m = model_by_id(model_id);
    D4Scan scan = d4_pick_p0(m, m, 64);
    for (std::size_t i = 0; i < scan.r.size(); ++i) {
        Record rec;
        rec.experiment = "d4-scan";
        rec.params = ParamTuple().add("model", model_id).add("r", scan.r[i]).str();
        rec.value = scan.a[i];
        rec.method = "exact-conv";
        out.push_back(std::move(rec));
    }
    Record pick;
    pick.experiment = "d4-pick";
    pick.params = ParamTuple().add("model", model_id).str();
    pick.value = scan.found ? scan.p0 : 0;  // 0 = no positive entry below the cap
    pick.method = "exact-conv";
    out.push_back(std::move(pick));
}

void ex_kernel_norms(const std::vector<int>& ls, const std::vector<double>& c_ms,
                     std::vector<Record>& out) {
    for (int l : ls)
        for (double c_m : c_ms) {
            KernelNorms norms = kernel_norms(TiltKernel::longrange(l, c_m));
            for (const char* stat : {"frobenius_sq", "operator_bound"}) {
                Record rec;
                rec.experiment = "kernel-norms";
                rec.params = ParamTuple().add("l", l).add("c_m", c_m).add("stat", stat).str();
                rec.value = std::string(stat) == "frobenius_sq" ? norms.frobenius_sq
                                                                : norms.operator_bound;
                rec.method = "exact";
                out.push_back(std::move(rec));
            }
        }
}

void ex_borne_m(const Lab& lab, const std::vector<int>& ls, const std::vector<double>& c_ms,
                const std::vector<double>& gammas, int samples, std::vector<Record>& out) {
    std::uint64_t sub = task_seed(lab.ctx.master_seed, kSeedBorneM);
    std::uint64_t idx = 0;
    for (int l : ls)
        for (double c_m : c_ms)
            for (double gamma : gammas) {
                std::uint64_t seed = task_seed(sub, idx++);
                BorneMEstimate est = borne_m_check(TiltKernel::longrange(l, c_m), lab.my, gamma,
                                                   samples, seed, lab.ctx.workers);
                ParamTuple base;
                base.add("model", lab.model_id).add("l", l).add("c_m", c_m).add("gamma", gamma);
                Record r;
                r.experiment = "borne-m";
                r.params = ParamTuple(base).add("samples", samples).str();
                r.value = est.mean;
                r.has_stderr = true;
                r.stderr_ = est.stderr_;
                r.method = "mc";
                r.seed = seed;
                out.push_back(std::move(r));
                for (std::size_t j = 0; j < est.tail_u.size(); ++j) {
                    Record t;
                    t.experiment = "borne-m-tail";
                    t.params = ParamTuple(base).add("u", est.tail_u[j]).str();
                    t.value = est.tail_prob[j];
                    t.method = "mc";
                    t.seed = seed;
                    out.push_back(std::move(t));
                }
            }
}

void ex_coarse_identity(const Lab& lab, const std::vector<int>& ms, const std::vector<int>& ls,
                        const std::vector<double>& zs, int envs, int crossover,
                        std::vector<Record>& out) {
    std::uint64_t sub = task_seed(lab.ctx.master_seed, kSeedCoarse);
    WeightEvaluator weights(lab.mx, lab.law, crossover);
    std::uint64_t idx = 0;
    for (int m : ms)
        for (int l : ls) {
            int n = m * l;
            for (double z : zs) {
                CouplingParams params = CouplingParams::from_z(z, lab.law.green);
                for (int e = 0; e < envs; ++e) {
                    RngStream rng(sub, idx++);
                    Environment env = sample_path(lab.my, n, rng);
                    CoarseDecomposition dec =
                        coarse_decompose_quenched(params, env, lab.law, weights, m, l);
                    double log_full = quenched_partition(params, env, lab.law, weights).log_zstar(n);
                    Record r;
                    r.experiment = "coarse-identity";
                    r.params = ParamTuple()
                                   .add("model", lab.model_id)
                                   .add("m", m)
                                   .add("l", l)
                                   .add("z", z)
                                   .add("env", e)
                                   .add("kind", "quenched")
                                   .str();
                    r.value = std::fabs(std::expm1(dec.log_total - log_full));
                    r.method = "exact-dp";
                    r.seed = rng.seed();
                    out.push_back(std::move(r));
                }
            }
            CoarseDecomposition dec = coarse_decompose_contact(lab.law, m, l);
            Record r;
            r.experiment = "coarse-identity";
            r.params = ParamTuple()
                           .add("model", lab.model_id)
                           .add("m", m)
                           .add("l", l)
                           .add("kind", "contact")
                           .str();
            r.value = std::fabs(std::expm1(dec.log_total));
            r.method = "exact-dp";
            out.push_back(std::move(r));
        }
}

double ex_profile_decay(const Lab& lab, int m, int L, std::vector<Record>& out) {
    ProfileDecayFit fit = profile_gap_decay(lab.law, m, L);

    // Per-subset records plus the residual-vs-size fit giving the empirical
    // per-contact constant.
    std::vector<double> sizes, resid;
    for (std::uint32_t s = 0; s < (1u << m); ++s) {
        if (!((s >> (m - 1)) & 1u)) continue;
        if (__builtin_popcount(s) < 2) continue;
        double p = block_visit_prob(lab.law, m, L, s);
        if (p <= 0) continue;
        double lp = std::log(p);
        double x = 0;
        int prev = 0;
        for (int b = 1; b <= m; ++b)
            if ((s >> (b - 1)) & 1u) {
                x += std::log(static_cast<double>(b - prev));
                prev = b;
            }
        Record r;
        r.experiment = "profile-decay";
        r.params = ParamTuple()
                       .add("model", lab.model_id)
                       .add("m", m)
                       .add("l", L)
                       .add("subset", static_cast<std::uint64_t>(s))
                       .str();
        r.value = lp;
        r.method = "exact-dp";
        out.push_back(std::move(r));
        sizes.push_back(static_cast<double>(__builtin_popcount(s)));
        resid.push_back(lp + 1.4 * x);
    }
    double log_c2 = ls_slope(sizes, resid);
    double c2 = std::exp(log_c2);

    auto fit_rec = [&](const char* stat, double v) {
        Record r;
        r.experiment = "profile-decay-fit";
        r.params = ParamTuple()
                       .add("model", lab.model_id)
                       .add("m", m)
                       .add("l", L)
                       .add("stat", stat)
                       .str();
        r.value = v;
        r.method = "fit";
        out.push_back(std::move(r));
    };
    fit_rec("slope", fit.slope);
    fit_rec("intercept", fit.intercept);
    fit_rec("c2", c2);
    return c2;
}

void ex_envelope(const std::vector<double>& gammas, const std::vector<int>& ms, double c2,
                 std::vector<Record>& out) {
    for (double gamma : gammas) {
        double eta = envelope_default_eta(c2, gamma);
        for (int m : ms) {
            EnvelopeResult res = coarse_envelope(eta, gamma, c2, m);
            Record r;
            r.experiment = "envelope";
            r.params = ParamTuple()
                           .add("gamma", gamma)
                           .add("m", m)
                           .add("eta", eta)
                           .add("c2", c2)
                           .str();
            r.value = res.log_value;
            r.method = "exact-dp";
            out.push_back(std::move(r));
        }
    }
}

// Single-writer ordering: records sorted by parameter tuple so output files
// do not depend on worker scheduling or emission order.
void canonicalize_records(std::vector<Record>& recs) {
    std::stable_sort(recs.begin(), recs.end(), [](const Record& a, const Record& b) {
        if (a.experiment != b.experiment) return a.experiment < b.experiment;
        if (a.params != b.params) return a.params < b.params;
        if (a.method != b.method) return a.method < b.method;
        return a.seed < b.seed;
    });
}

}  // namespace detail

std::vector<Record> run_config(const ExperimentConfig& cfg, const ExperimentContext& ctx) {
    std::vector<std::string> errs = config_errors(cfg);
    if (!errs.empty()) {
        std::string msg = "run_config: invalid config:";
        for (const std::string& e : errs) msg += "\n  " + e;
        throw std::invalid_argument(msg);
    }
    const std::string& id = cfg.experiment;
    std::vector<Record> out;

    if (id == "kernel-norms") {
        detail::ex_kernel_norms(cfg.l, cfg.c_m, out);
        return out;
    }
    if (id == "d4-scan") {
        detail::ex_d4_scan(cfg.model, out);
        return out;
    }

    detail::Lab lab = detail::make_lab(cfg.model, cfg.n_max, ctx, needs_law(id));
    std::vector<double> zs = cfg.z;
    if (!cfg.beta.empty() && needs_law(id)) {
        zs.clear();
        for (double b : cfg.beta) zs.push_back(CouplingParams::from_beta(b, lab.law.green).z);
    }

    if (id == "annealed") {
        detail::ex_annealed(lab, zs, cfg.n, out);
    } else if (id == "critical-point") {
        detail::ex_critical_point(lab, zs, out);
    } else if (id == "free-energy") {
        detail::ex_free_energy(lab, zs, cfg.n, cfg.envs, out);
    } else if (id == "frac-moment") {
        detail::ex_frac_moment(lab, zs, cfg.gamma, cfg.n, cfg.envs, cfg.crossover, out);
    } else if (id == "partition-oracle") {
        detail::ex_partition_oracle(lab, cfg.n, zs, cfg.envs, cfg.crossover, out);
    } else if (id == "annealed-mean") {
        for (int n : cfg.n) detail::ex_annealed_mean(lab, zs, n, cfg.envs, cfg.crossover, out);
    } else if (id == "doney") {
        detail::ex_doney(lab, cfg.n, out);
    } else if (id == "half-normal-ks") {
        detail::ex_half_normal(lab, cfg.n, out);
    } else if (id == "chernoff-tail") {
        detail::ex_chernoff(lab, cfg.n, out);
    } else if (id == "conditioning") {
        detail::ex_conditioning(lab, cfg.n, out);
    } else if (id == "a-of-r") {
        bool enum_checks = std::any_of(cfg.r.begin(), cfg.r.end(), [](int r) { return r <= 4; });
        detail::ex_a_of_r(lab, cfg.r, enum_checks, out);
    } else if (id == "tilt-moments") {
        detail::ex_tilt_moments(lab, cfg.r, out);
    } else if (id == "quartic") {
        detail::ex_quartic(lab, cfg.r, out);
    } else if (id == "borne-m") {
        detail::ex_borne_m(lab, cfg.l, cfg.c_m, cfg.gamma, cfg.samples, out);
    } else if (id == "coarse-identity") {
        detail::ex_coarse_identity(lab, cfg.m, cfg.l, zs, cfg.envs, cfg.crossover, out);
    } else if (id == "profile-decay") {
        for (int m : cfg.m)
            for (int l : cfg.l) detail::ex_profile_decay(lab, m, l, out);
    } else if (id == "envelope") {
        // Empirical per-contact constant from the visit-probability fit.
        double c2 = detail::ex_profile_decay(lab, 8, 64, out);
        detail::ex_envelope(cfg.gamma, cfg.m, c2, out);
    } else {
        throw std::logic_error("run_config: unhandled experiment id " + id);
    }
    detail::canonicalize_records(out);
    return out;
}

}  // namespace rwpm
