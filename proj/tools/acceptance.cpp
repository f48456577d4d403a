#include <algorithm>
#include <chrono>
#include <cstdio>
#include <cstdlib>
#include <iostream>
#include <map>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "rwpm/csv.hpp"
#include "rwpm/experiment.hpp"
#include "rwpm/version.hpp"

// Acceptance harness: runs the standard grid, evaluates every criterion at
// its stated tolerance, prints one PASS/FAIL line per criterion plus the
// detailed measurements, and re-runs the whole grid to check byte-identical
// reproducibility. Exit 0 when all non-expected-red criteria pass (with
// --strict, expected-red failures flip the exit code too), 1 on failure,
// 2 on error.

namespace {

using Clock = std::chrono::steady_clock;

double secs_since(Clock::time_point t0) {
    return std::chrono::duration<double>(Clock::now() - t0).count();
}

std::string fmt(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.6g", v);
    return buf;
}

// Same ordering contract run_recipe uses, so the concatenation of the slice
// outputs serializes exactly like the one-shot full recipe.
void canonical_sort(std::vector<rwpm::Record>& recs) {
    std::stable_sort(recs.begin(), recs.end(), [](const rwpm::Record& a, const rwpm::Record& b) {
        if (a.experiment != b.experiment) return a.experiment < b.experiment;
        if (a.params != b.params) return a.params < b.params;
        if (a.method != b.method) return a.method < b.method;
        return a.seed < b.seed;
    });
}

const std::vector<std::string>& slice_names() {
    static const std::vector<std::string> names = {
        "oracles",         "fe-grid", "contact-asymptotics", "tilt-constants",
        "coarse-profiles", "borne-m",
    };
    return names;
}

std::vector<rwpm::Record> run_suite(const rwpm::ExperimentContext& ctx,
                                    std::map<std::string, double>* wall, bool verbose) {
    std::vector<rwpm::Record> all;
    for (const std::string& name : slice_names()) {
        auto t0 = Clock::now();
        std::vector<rwpm::Record> recs = rwpm::run_recipe(name, ctx);
        double dt = secs_since(t0);
        if (wall) (*wall)[name] = dt;
        if (verbose)
            std::cout << "  " << name << ": " << recs.size() << " records in " << fmt(dt)
                      << " s\n"
                      << std::flush;
        all.insert(all.end(), recs.begin(), recs.end());
    }
    canonical_sort(all);
    return all;
}

int leading_number(const std::string& criterion) {
    return std::atoi(criterion.c_str());
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"acceptance harness for the pinning laboratory"};
    app.set_version_flag("--version", std::string(rwpm::kVersion));
    bool strict = false;
    std::uint64_t seed = 1;
    unsigned workers = 1;
    std::string cache_dir;
    std::string out = "acceptance_results.csv";
    app.add_flag("--strict", strict, "expected-red failures also flip the exit code");
    app.add_option("--seed", seed, "master seed");
    app.add_option("--workers", workers, "worker threads");
    app.add_option("--cache-dir", cache_dir, "renewal cache directory");
    app.add_option("--out", out, "where to write the suite CSV");
    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        int code = app.exit(e);
        return code == 0 ? 0 : 2;
    }

    try {
        rwpm::ExperimentContext ctx{seed, workers, cache_dir};

        std::cout << "building renewal caches (horizon 100000)..." << std::flush;
        auto t_cache = Clock::now();
        rwpm::build_caches(cache_dir, 100000);
        std::cout << " done in " << fmt(secs_since(t_cache)) << " s\n";

        std::cout << "running the standard grid:\n" << std::flush;
        std::map<std::string, double> wall;
        std::vector<rwpm::Record> records = run_suite(ctx, &wall, /*verbose=*/true);
        std::string csv1 = rwpm::to_csv(records);
        rwpm::write_csv(out, records);
        std::cout << "wrote " << records.size() << " records to " << out << "\n" << std::flush;

        rwpm::VerifyReport rep = rwpm::verify_results(records);

        // Runtime checks folded into criteria 1 and 2: the oracle slice wall
        // time bounds both of their stated budgets from above.
        double oracle_wall = wall["oracles"];
        {
            rwpm::VerifyLine l;
            l.criterion = "1-runtime";
            l.measured = oracle_wall;
            l.threshold = 120;
            l.relation = "<=";
            l.verdict = oracle_wall <= 120 ? "pass" : "fail";
            l.note = "oracle slice wall time (s), upper bound for the enumeration check";
            if (l.verdict == "fail") rep.any_unexpected_fail = true;
            rep.lines.push_back(std::move(l));
        }
        {
            rwpm::VerifyLine l;
            l.criterion = "2-runtime";
            l.measured = oracle_wall;
            l.threshold = 300;
            l.relation = "<=";
            l.verdict = oracle_wall <= 300 ? "pass" : "fail";
            l.note = "oracle slice wall time (s), upper bound for the annealed-mean check";
            if (l.verdict == "fail") rep.any_unexpected_fail = true;
            rep.lines.push_back(std::move(l));
        }

        // Reproducibility: full second run must serialize to identical bytes.
        std::cout << "re-running the grid for the byte-identity check...\n" << std::flush;
        std::vector<rwpm::Record> records2 = run_suite(ctx, nullptr, /*verbose=*/false);
        bool repro = rwpm::to_csv(records2) == csv1;
        {
            rwpm::VerifyLine l;
            l.criterion = "12-reproducibility";
            l.measured = repro ? 0 : 1;
            l.threshold = 0;
            l.relation = "<=";
            l.verdict = repro ? "pass" : "fail";
            l.note = repro ? "second full run is byte-identical" : "second full run differs";
            if (!repro) rep.any_unexpected_fail = true;
            rep.lines.push_back(std::move(l));
        }

        std::stable_sort(rep.lines.begin(), rep.lines.end(),
                         [](const rwpm::VerifyLine& a, const rwpm::VerifyLine& b) {
                             int na = leading_number(a.criterion), nb = leading_number(b.criterion);
                             if (na != nb) return na < nb;
                             return a.criterion < b.criterion;
                         });

        // Per-criterion verdicts aggregated over the detail lines.
        std::map<int, std::string> verdicts;
        for (const rwpm::VerifyLine& l : rep.lines) {
            int k = leading_number(l.criterion);
            std::string& v = verdicts.emplace(k, "PASS").first->second;
            if (l.verdict == "pass") continue;
            if (l.verdict == "fail" && l.expected_red) {
                if (v == "PASS") v = "FAIL (expected)";
            } else {
                v = "FAIL";
            }
        }

        std::cout << "\n=== criteria ===\n";
        for (const auto& [k, v] : verdicts) {
            std::printf("criterion %2d: %s\n", k, v.c_str());
        }
        std::cout << "\n=== detail ===\n";
        for (const rwpm::VerifyLine& l : rep.lines) {
            const char* tag = l.verdict == "pass" ? "PASS" : (l.expected_red ? "FAIL*" : "FAIL");
            std::printf("[%-5s] %-24s %12s %-2s %-8s  %s\n", tag, l.criterion.c_str(),
                        fmt(l.measured).c_str(), l.relation.c_str(), fmt(l.threshold).c_str(),
                        l.note.c_str());
        }
        std::cout << "(FAIL* = documented expected-red check; does not flip the exit code "
                     "unless --strict)\n"
                  << std::flush;

        bool any_red_at_all = false;
        for (const rwpm::VerifyLine& l : rep.lines)
            if (l.verdict != "pass") any_red_at_all = true;
        if (rep.any_error) return 2;
        int rc = rep.exit_code();
        if (rc == 0 && strict && any_red_at_all) rc = 1;
        return rc;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    }
}
