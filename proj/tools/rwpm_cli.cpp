#include <chrono>
#include <cstdint>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"
#include "rwpm/coarse.hpp"
#include "rwpm/csv.hpp"
#include "rwpm/environment.hpp"
#include "rwpm/experiment.hpp"
#include "rwpm/pinning.hpp"
#include "rwpm/renewal.hpp"
#include "rwpm/rng.hpp"
#include "rwpm/version.hpp"
#include "rwpm/walk_model.hpp"

namespace {

using Clock = std::chrono::steady_clock;

double ms_since(Clock::time_point t0) {
    return std::chrono::duration<double, std::milli>(Clock::now() - t0).count();
}

std::string fmt10(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.10g", v);
    return buf;
}

// Writes records to `out` (stdout when empty) plus a JSON metadata sidecar
// <out>.meta.json. The CSV bytes are the reproducibility contract; the
// sidecar carries context (model, horizons, seed, wall time).
void emit(const std::vector<rwpm::Record>& recs, const std::string& out, nlohmann::json meta) {
    if (out.empty()) {
        std::cout << rwpm::to_csv(recs);
        return;
    }
    rwpm::write_csv(out, recs);
    meta["schema"] = "rwpm-meta v1";
    meta["version"] = rwpm::kVersion;
    meta["records"] = recs.size();
    std::ofstream f(out + ".meta.json", std::ios::binary);
    if (!f) throw std::runtime_error("cannot write " + out + ".meta.json");
    f << meta.dump(2) << "\n";
    std::cerr << "wrote " << recs.size() << " records to " << out << "\n";
}

// Flags shared by every experiment-shaped subcommand; CLI values win over
// config-file values only when actually passed.
struct CommonFlags {
    std::uint64_t seed = 1;
    unsigned workers = 1;
    int crossover = 0;  // 0 = keep config default
    int n_max = 0;      // 0 = keep config default
    std::string cache_dir;
    std::string out;
    CLI::Option* seed_opt = nullptr;
    CLI::Option* workers_opt = nullptr;
};

void add_common(CLI::App* sc, CommonFlags& fl, bool with_horizons = true) {
    fl.seed_opt = sc->add_option("--seed", fl.seed, "master seed (derives all task streams)");
    fl.workers_opt = sc->add_option("--workers", fl.workers, "worker threads");
    sc->add_option("--cache-dir", fl.cache_dir, "renewal cache directory");
    sc->add_option("--out", fl.out, "output CSV path (stdout when omitted)");
    if (with_horizons) {
        sc->add_option("--n-max", fl.n_max, "renewal-law horizon");
        sc->add_option("--crossover", fl.crossover, "exact-pmf horizon in the weight evaluator");
    }
}

int run_experiment(rwpm::ExperimentConfig cfg, const CommonFlags& fl, const std::string& command) {
    if (fl.seed_opt && fl.seed_opt->count()) cfg.seed = fl.seed;
    if (fl.workers_opt && fl.workers_opt->count()) cfg.workers = fl.workers;
    if (fl.n_max > 0) cfg.n_max = fl.n_max;
    if (fl.crossover > 0) cfg.crossover = fl.crossover;
    rwpm::ExperimentContext ctx{cfg.seed, cfg.workers, fl.cache_dir};

    auto t0 = Clock::now();
    std::vector<rwpm::Record> recs;
    try {
        recs = rwpm::run_config(cfg, ctx);
    } catch (const std::invalid_argument& e) {
        std::cerr << "error: invalid config:\n" << e.what() << "\n";
        return 2;
    }
    nlohmann::json meta;
    meta["command"] = command;
    meta["experiment"] = cfg.experiment;
    meta["model"] = cfg.model;
    meta["n_max"] = cfg.n_max;
    meta["crossover"] = cfg.crossover;
    meta["seed"] = cfg.seed;
    meta["workers"] = cfg.workers;
    meta["wall_ms"] = ms_since(t0);
    std::string out = !fl.out.empty() ? fl.out : cfg.out;
    emit(recs, out, std::move(meta));
    return 0;
}

int cmd_run(const std::string& recipe, const std::string& config_path, const CommonFlags& fl) {
    if (recipe.empty() == config_path.empty()) {
        std::cerr << "error: pass exactly one of --recipe / --config\n";
        return 2;
    }
    if (!recipe.empty()) {
        rwpm::ExperimentContext ctx{fl.seed, fl.workers, fl.cache_dir};
        auto t0 = Clock::now();
        std::vector<rwpm::Record> recs;
        try {
            recs = rwpm::run_recipe(recipe, ctx);
        } catch (const std::invalid_argument& e) {
            std::cerr << "error: " << e.what() << "\n";
            return 2;
        }
        nlohmann::json meta;
        meta["command"] = "run";
        meta["recipe"] = recipe;
        meta["seed"] = fl.seed;
        meta["workers"] = fl.workers;
        meta["wall_ms"] = ms_since(t0);
        emit(recs, fl.out, std::move(meta));
        return 0;
    }
    std::ifstream f(config_path, std::ios::binary);
    if (!f) {
        std::cerr << "error: cannot read config " << config_path << "\n";
        return 2;
    }
    std::stringstream ss;
    ss << f.rdbuf();
    rwpm::ExperimentConfig cfg;
    try {
        cfg = rwpm::parse_config(ss.str());
    } catch (const std::invalid_argument& e) {
        std::cerr << "error: bad config:\n" << e.what() << "\n";
        return 2;
    }
    return run_experiment(std::move(cfg), fl, "run");
}

int cmd_verify(const std::string& input, const std::string& rerun_recipe, const CommonFlags& fl) {
    std::ifstream f(input, std::ios::binary);
    if (!f) {
        std::cerr << "error: cannot read " << input << "\n";
        return 2;
    }
    std::stringstream ss;
    ss << f.rdbuf();
    std::string text = ss.str();
    std::vector<rwpm::Record> recs;
    try {
        recs = rwpm::parse_csv(text);
    } catch (const std::exception& e) {
        std::cout << "input\tnan\t0\tparseable\terror\t0\t" << e.what() << "\n";
        return 2;
    }
    rwpm::VerifyReport rep = rwpm::verify_results(recs);
    std::cout << "criterion\tmeasured\tthreshold\trelation\tverdict\texpected_red\tnote\n";
    for (const rwpm::VerifyLine& l : rep.lines)
        std::cout << l.criterion << "\t" << fmt10(l.measured) << "\t" << fmt10(l.threshold) << "\t"
                  << l.relation << "\t" << l.verdict << "\t" << (l.expected_red ? 1 : 0) << "\t"
                  << l.note << "\n";
    int rc = rep.exit_code();
    if (!rerun_recipe.empty()) {
        rwpm::ExperimentContext ctx{fl.seed, fl.workers, fl.cache_dir};
        std::string why;
        bool same = rwpm::verify_recipe(rerun_recipe, ctx, text, &why);
        std::cout << "reproducibility\t" << (same ? 0 : 1) << "\t0\t==\t"
                  << (same ? "pass" : "fail") << "\t0\t"
                  << (same ? "re-run of '" + rerun_recipe + "' is byte-identical" : why) << "\n";
        if (!same && rc == 0) rc = 1;
    }
    return rc;
}

int cmd_coarse(const std::string& model_id, int m, int L, double z, bool z_given,
               const std::string& kind, std::uint32_t subset, bool subset_given, bool sweep_all,
               const CommonFlags& fl) {
    if (subset_given == sweep_all) {
        std::cerr << "error: pass exactly one of --subset / --sweep-all\n";
        return 2;
    }
    if ((kind == "annealed" || kind == "quenched") && !z_given) {
        std::cerr << "error: --z is required for kind " << kind << "\n";
        return 2;
    }
    int n_max = fl.n_max > 0 ? fl.n_max : 100000;
    int crossover = fl.crossover > 0 ? fl.crossover : 128;
    rwpm::WalkModel model = rwpm::model_by_id(model_id);
    auto t0 = Clock::now();
    rwpm::RenewalLaw law = rwpm::cached_renewal(model, model, n_max, fl.cache_dir);

    std::vector<rwpm::Record> recs;
    auto push = [&](std::uint32_t mask, double value, std::uint64_t seed) {
        rwpm::Record rec;
        rec.experiment = "coarse-block";
        rwpm::ParamTuple p;
        p.add("model", model_id).add("m", m).add("l", L);
        if (kind != "contact") p.add("z", z);
        p.add("kind", kind).add("subset", static_cast<std::uint64_t>(mask));
        rec.params = p.str();
        rec.value = value;
        rec.method = "exact-dp";
        rec.seed = seed;
        recs.push_back(std::move(rec));
    };

    if (kind == "contact") {
        if (sweep_all) {
            rwpm::CoarseDecomposition dec = rwpm::coarse_decompose_contact(law, m, L);
            for (const rwpm::CoarseProfile& p : dec.profiles) push(p.subset, p.value, 0);
        } else {
            push(subset, rwpm::block_visit_prob(law, m, L, subset), 0);
        }
    } else if (kind == "annealed") {
        rwpm::CoarseDecomposition dec = rwpm::coarse_decompose_annealed(law, m, L, z);
        for (const rwpm::CoarseProfile& p : dec.profiles)
            if (sweep_all || p.subset == subset) push(p.subset, p.log_z, 0);
    } else {
        rwpm::CouplingParams params = rwpm::CouplingParams::from_z(z, law.green);
        rwpm::RngStream rng(fl.seed, 0);
        rwpm::Environment env = rwpm::sample_path(model, m * L, rng);
        rwpm::WeightEvaluator weights(model, law, crossover);
        if (sweep_all) {
            rwpm::CoarseDecomposition dec =
                rwpm::coarse_decompose_quenched(params, env, law, weights, m, L);
            for (const rwpm::CoarseProfile& p : dec.profiles) push(p.subset, p.log_z, rng.seed());
        } else {
            push(subset, rwpm::block_log_partition(params, env, law, weights, m, L, subset),
                 rng.seed());
        }
    }

    nlohmann::json meta;
    meta["command"] = "coarse";
    meta["model"] = model_id;
    meta["m"] = m;
    meta["l"] = L;
    meta["kind"] = kind;
    meta["n_max"] = n_max;
    meta["crossover"] = crossover;
    meta["seed"] = fl.seed;
    meta["workers"] = 1;
    meta["wall_ms"] = ms_since(t0);
    emit(recs, fl.out, std::move(meta));
    return 0;
}

// Option bundle for the pinning trio (free-energy / annealed / frac-moment).
struct PinningArgs {
    CLI::App* sc = nullptr;
    std::string model = "lazy3";
    std::vector<double> z, beta, gamma;
    std::vector<int> n;
    int envs = 100;
    CommonFlags fl;
};

void add_pinning(CLI::App& app, const char* id, const char* desc, PinningArgs& a,
                 bool with_envs, bool with_gamma) {
    a.sc = app.add_subcommand(id, desc);
    a.sc->add_option("--model", a.model, "walk model id");
    a.sc->add_option("--z", a.z, "coupling grid")->delimiter(',');
    a.sc->add_option("--beta", a.beta, "inverse-temperature grid")->delimiter(',');
    a.sc->add_option("--N", a.n, "polymer length ladder")->delimiter(',');
    if (with_envs) a.sc->add_option("--envs", a.envs, "environment count");
    if (with_gamma)
        a.sc->add_option("--gamma", a.gamma, "fractional exponents in (0,1)")->delimiter(',');
    add_common(a.sc, a.fl);
}

int run_pinning(const PinningArgs& a, const std::string& id) {
    rwpm::ExperimentConfig cfg;
    cfg.experiment = id;
    cfg.model = a.model;
    cfg.z = a.z;
    cfg.beta = a.beta;
    cfg.gamma = a.gamma;
    cfg.n = a.n;
    cfg.envs = a.envs;
    return run_experiment(std::move(cfg), a.fl, id);
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"random-walk pinning laboratory"};
    app.set_version_flag("--version", std::string(rwpm::kVersion));
    app.require_subcommand(1);

    // run
    std::string run_recipe_name, run_config_path;
    CommonFlags run_fl;
    CLI::App* sc_run = app.add_subcommand("run", "run a named recipe or a key=value config file");
    {
        auto* opt_r = sc_run->add_option("--recipe", run_recipe_name, "recipe name (see list-recipes)");
        auto* opt_c = sc_run->add_option("--config", run_config_path, "config file path");
        opt_r->excludes(opt_c);
        opt_c->excludes(opt_r);
        add_common(sc_run, run_fl);
    }

    // verify
    std::string v_input, v_rerun;
    CommonFlags v_fl;
    CLI::App* sc_verify = app.add_subcommand("verify", "threshold report over a results CSV");
    {
        sc_verify->add_option("--input", v_input, "results CSV produced by run")->required();
        sc_verify->add_option("--rerun-recipe", v_rerun,
                              "re-run this recipe and byte-compare against --input");
        add_common(sc_verify, v_fl, /*with_horizons=*/false);
    }

    // cache-build
    int cb_n_max = 100000;
    std::string cb_dir;
    CLI::App* sc_cache = app.add_subcommand("cache-build", "build the renewal-law caches");
    sc_cache->add_option("--n-max", cb_n_max, "horizon");
    sc_cache->add_option("--cache-dir", cb_dir, "cache directory");

    // list-recipes
    CLI::App* sc_list = app.add_subcommand("list-recipes", "list the named recipes");

    // pinning trio
    PinningArgs fe, an, fm;
    add_pinning(app, "free-energy", "quenched free-energy estimate vs the annealed value", fe,
                /*with_envs=*/true, /*with_gamma=*/false);
    add_pinning(app, "annealed", "exact annealed partition ladder", an,
                /*with_envs=*/false, /*with_gamma=*/false);
    add_pinning(app, "frac-moment", "fractional moments over an N ladder", fm,
                /*with_envs=*/true, /*with_gamma=*/true);

    // tilt group
    CLI::App* tilt = app.add_subcommand("tilt", "tilted-measure constants and kernel checks");
    tilt->require_subcommand(1);

    int tk_L = 100;
    double tk_cm = 0;
    CommonFlags tk_fl;
    CLI::App* sc_tk = tilt->add_subcommand("kernel-norms", "Frobenius and operator norms");
    sc_tk->add_option("--L", tk_L, "kernel size")->required();
    sc_tk->add_option("--c-m", tk_cm, "kernel strength")->required();
    add_common(sc_tk, tk_fl, false);

    std::string tb_model = "lazy3";
    int tb_L = 100, tb_samples = 1000;
    double tb_cm = 0, tb_gamma = 6.0 / 7.0;
    CommonFlags tb_fl;
    CLI::App* sc_tb = tilt->add_subcommand("borne-m", "exponential overshoot moment");
    sc_tb->add_option("--model", tb_model, "walk model id");
    sc_tb->add_option("--L", tb_L, "kernel size")->required();
    sc_tb->add_option("--c-m", tb_cm, "kernel strength")->required();
    sc_tb->add_option("--gamma", tb_gamma, "fractional exponent");
    sc_tb->add_option("--samples", tb_samples, "MC sample count");
    add_common(sc_tb, tb_fl);

    std::string ta_model = "lazy3";
    std::vector<int> ta_r;
    CommonFlags ta_fl;
    CLI::App* sc_ta = tilt->add_subcommand("a-of-r", "interval constant ladder");
    sc_ta->add_option("--model", ta_model, "walk model id");
    sc_ta->add_option("--r-list", ta_r, "interval lengths")->required()->delimiter(',');
    add_common(sc_ta, ta_fl);

    std::string tq_model = "lazy3";
    std::vector<int> tq_r;
    CommonFlags tq_fl;
    CLI::App* sc_tq = tilt->add_subcommand("quartic", "quartic moment patterns");
    sc_tq->add_option("--model", tq_model, "walk model id");
    sc_tq->add_option("--r-list", tq_r, "interval lengths")->required()->delimiter(',');
    add_common(sc_tq, tq_fl);

    std::string td_model = "lazy4";
    CommonFlags td_fl;
    CLI::App* sc_td = tilt->add_subcommand("d4-scan", "first positive interval constant, d = 4");
    sc_td->add_option("--model", td_model, "d = 4 walk model id");
    add_common(sc_td, td_fl, false);

    // coarse
    std::string co_model = "lazy3", co_kind = "annealed";
    int co_m = 3, co_L = 8;
    double co_z = 1.0;
    std::uint32_t co_subset = 0;
    bool co_sweep = false;
    CommonFlags co_fl;
    CLI::App* sc_co = app.add_subcommand("coarse", "block decomposition profiles");
    CLI::Option* co_z_opt;
    CLI::Option* co_subset_opt;
    {
        sc_co->add_option("--model", co_model, "walk model id");
        sc_co->add_option("--m", co_m, "block count")->required();
        sc_co->add_option("--L", co_L, "block length")->required();
        co_z_opt = sc_co->add_option("--z", co_z, "coupling (annealed/quenched kinds)");
        sc_co->add_option("--kind", co_kind, "annealed | contact | quenched")
            ->check(CLI::IsMember({"annealed", "contact", "quenched"}));
        co_subset_opt =
            sc_co->add_option("--subset", co_subset, "single block bitmask (bit i-1 = block i)");
        sc_co->add_flag("--sweep-all", co_sweep, "all 2^m subsets");
        add_common(sc_co, co_fl);
    }

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        int code = app.exit(e);
        return code == 0 ? 0 : 2;
    }

    try {
        if (app.got_subcommand(sc_run)) return cmd_run(run_recipe_name, run_config_path, run_fl);
        if (app.got_subcommand(sc_verify)) return cmd_verify(v_input, v_rerun, v_fl);
        if (app.got_subcommand(sc_cache)) {
            for (const std::string& p : rwpm::build_caches(cb_dir, cb_n_max))
                std::cout << p << "\n";
            return 0;
        }
        if (app.got_subcommand(sc_list)) {
            for (const rwpm::Recipe& r : rwpm::recipe_registry())
                std::cout << r.name << "\t" << r.description << "\n";
            return 0;
        }
        if (app.got_subcommand(fe.sc)) return run_pinning(fe, "free-energy");
        if (app.got_subcommand(an.sc)) return run_pinning(an, "annealed");
        if (app.got_subcommand(fm.sc)) return run_pinning(fm, "frac-moment");
        if (app.got_subcommand(tilt)) {
            if (tilt->got_subcommand(sc_tk)) {
                rwpm::ExperimentConfig cfg;
                cfg.experiment = "kernel-norms";
                cfg.l = {tk_L};
                cfg.c_m = {tk_cm};
                return run_experiment(std::move(cfg), tk_fl, "tilt kernel-norms");
            }
            if (tilt->got_subcommand(sc_tb)) {
                rwpm::ExperimentConfig cfg;
                cfg.experiment = "borne-m";
                cfg.model = tb_model;
                cfg.l = {tb_L};
                cfg.c_m = {tb_cm};
                cfg.gamma = {tb_gamma};
                cfg.samples = tb_samples;
                return run_experiment(std::move(cfg), tb_fl, "tilt borne-m");
            }
            if (tilt->got_subcommand(sc_ta)) {
                rwpm::ExperimentConfig cfg;
                cfg.experiment = "a-of-r";
                cfg.model = ta_model;
                cfg.r = ta_r;
                return run_experiment(std::move(cfg), ta_fl, "tilt a-of-r");
            }
            if (tilt->got_subcommand(sc_tq)) {
                rwpm::ExperimentConfig cfg;
                cfg.experiment = "quartic";
                cfg.model = tq_model;
                cfg.r = tq_r;
                return run_experiment(std::move(cfg), tq_fl, "tilt quartic");
            }
            if (tilt->got_subcommand(sc_td)) {
                rwpm::ExperimentConfig cfg;
                cfg.experiment = "d4-scan";
                cfg.model = td_model;
                return run_experiment(std::move(cfg), td_fl, "tilt d4-scan");
            }
        }
        if (app.got_subcommand(sc_co))
            return cmd_coarse(co_model, co_m, co_L, co_z, co_z_opt->count() > 0, co_kind,
                              co_subset, co_subset_opt->count() > 0, co_sweep, co_fl);
        std::cerr << "error: no action selected\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    }
}
