#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <limits>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include "rwpm/experiment.hpp"
#include "rwpm/stats.hpp"

namespace rwpm {
namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr double kNan = std::numeric_limits<double>::quiet_NaN();

// Reference constants for the d = 3 lazy pair grid: tilted second-moment
// limit per coordinate sum, interval-constant limit, and the r * A(r) limit.
constexpr double kLazyDeltaSqLimit = 1.5;
constexpr double kLazyBLimit = 0.75;
constexpr double kLazyRALimit = 0.75;

std::string short6(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.6g", v);
    return buf;
}

std::map<std::string, std::string> parse_params(const std::string& s) {
    std::map<std::string, std::string> out;
    std::size_t pos = 0;
    while (pos < s.size()) {
        std::size_t semi = s.find(';', pos);
        if (semi == std::string::npos) semi = s.size();
        std::string item = s.substr(pos, semi - pos);
        std::size_t eq = item.find('=');
        if (eq != std::string::npos) out[item.substr(0, eq)] = item.substr(eq + 1);
        pos = semi + 1;
    }
    return out;
}

struct Row {
    const Record* rec = nullptr;
    std::map<std::string, std::string> kv;

    std::string str(const std::string& k) const {
        auto it = kv.find(k);
        return it == kv.end() ? std::string() : it->second;
    }
    double num(const std::string& k) const {
        auto it = kv.find(k);
        if (it == kv.end()) return kNan;
        return std::strtod(it->second.c_str(), nullptr);
    }
};

struct Checker {
    std::map<std::string, std::vector<Row>> by_exp;
    std::vector<VerifyLine> lines;

    const std::vector<Row>* rows(const std::string& id) const {
        auto it = by_exp.find(id);
        return it == by_exp.end() ? nullptr : &it->second;
    }

    void push(const std::string& criterion, double measured, double threshold,
              const std::string& relation, bool ok, const std::string& note,
              bool expected_red = false) {
        VerifyLine l;
        l.criterion = criterion;
        l.measured = measured;
        l.threshold = threshold;
        l.relation = relation;
        l.verdict = ok ? "pass" : "fail";
        l.expected_red = expected_red;
        l.note = note;
        lines.push_back(std::move(l));
    }

    void missing(const std::string& criterion, double threshold, const std::string& relation,
                 const std::string& note) {
        VerifyLine l;
        l.criterion = criterion;
        l.measured = kNan;
        l.threshold = threshold;
        l.relation = relation;
        l.verdict = "missing";
        l.note = note;
        lines.push_back(std::move(l));
    }
};

// Max of value over rows; NaN if any value is NaN (forces a fail verdict).
double max_value(const std::vector<Row>& rs, std::string* where = nullptr) {
    double worst = -kInf;
    for (const Row& r : rs) {
        double v = r.rec->value;
        if (std::isnan(v)) return kNan;
        if (v > worst) {
            worst = v;
            if (where) *where = r.rec->params;
        }
    }
    return worst;
}

// Rows keyed by one numeric parameter, ascending, later rows win on ties.
std::map<double, double> series_by(const std::vector<Row>& rs, const std::string& key,
                                   const std::string& model_filter = "") {
    std::map<double, double> out;
    for (const Row& r : rs) {
        if (!model_filter.empty() && r.str("model") != model_filter) continue;
        out[r.num(key)] = r.rec->value;
    }
    return out;
}

// Worst consecutive ratio |v_{i+1}| / |v_i|; < 1 everywhere means the
// magnitudes strictly decrease along the series.
double worst_ratio(const std::vector<double>& mags) {
    double worst = -kInf;
    for (std::size_t i = 0; i + 1 < mags.size(); ++i) {
        if (std::isnan(mags[i]) || std::isnan(mags[i + 1])) return kNan;
        double ratio;
        if (mags[i] > 0)
            ratio = mags[i + 1] / mags[i];
        else
            ratio = mags[i + 1] == 0 ? 0.0 : kInf;
        worst = std::max(worst, ratio);
    }
    return worst;
}

void check_partition_oracle(Checker& c) {
    const char* id = "1-partition-oracle";
    const auto* rs = c.rows("partition-oracle");
    if (!rs) {
        c.missing(id, 1e-10, "<=", "no partition-oracle records");
        return;
    }
    std::string where;
    double worst = max_value(*rs, &where);
    c.push(id, worst, 1e-10, "<=", worst <= 1e-10,
           "max relative gap, quenched DP vs full path enumeration (" + where + ")");
}

void check_annealed_identity(Checker& c) {
    const char* id = "2-annealed-identity";
    const auto* means = c.rows("annealed-mean");
    const auto* exacts = c.rows("annealed-exact");
    if (!means || !exacts) {
        c.missing(id, 3, "<=", "needs annealed-mean and annealed-exact records");
        return;
    }
    std::map<std::string, double> exact;
    for (const Row& r : *exacts)
        exact[r.str("model") + "|" + r.str("n") + "|" + r.str("z")] = r.rec->value;
    double worst = -kInf;
    std::string where;
    for (const Row& r : *means) {
        auto it = exact.find(r.str("model") + "|" + r.str("n") + "|" + r.str("z"));
        if (it == exact.end()) {
            c.missing(id, 3, "<=", "annealed-exact partner absent for " + r.rec->params);
            return;
        }
        double diff = std::fabs(r.rec->value - it->second);
        double se = r.rec->has_stderr ? r.rec->stderr_ : 0;
        double t = se > 0 ? diff / se : (diff == 0 ? 0.0 : kInf);
        if (std::isnan(t)) {
            worst = kNan;
            where = r.rec->params;
            break;
        }
        if (t > worst) {
            worst = t;
            where = r.rec->params;
        }
    }
    c.push(id, worst, 3, "<=", worst <= 3,
           "max |sample mean - exact annealed DP| in standard errors (" + where + ")");
}

void check_critical_point(Checker& c) {
    {
        const auto* rs = c.rows("betac-identity");
        if (!rs) {
            c.missing("3-betac-identity", 1e-12, "<=", "no betac-identity records");
        } else {
            double worst = -kInf;
            for (const Row& r : *rs) {
                double v = std::fabs(r.rec->value - 1);
                if (std::isnan(v)) {
                    worst = kNan;
                    break;
                }
                worst = std::max(worst, v);
            }
            c.push("3-betac-identity", worst, 1e-12, "<=", worst <= 1e-12,
                   "max |(e^{beta_c} - 1) * G - 1| over models");
        }
    }
    const auto* fe = c.rows("annealed-fe");
    if (!fe) {
        c.missing("3-fe-subcritical", 0, "<=", "no annealed-fe records");
        c.missing("3-fe-supercritical", 1e-3, ">", "no annealed-fe records");
    } else {
        double worst_sub = -kInf;
        bool any_sub = false;
        for (const Row& r : *fe) {
            if (r.num("z") <= 1.0) {
                any_sub = true;
                if (std::isnan(r.rec->value)) {
                    worst_sub = kNan;
                    break;
                }
                worst_sub = std::max(worst_sub, r.rec->value);
            }
        }
        if (any_sub)
            c.push("3-fe-subcritical", worst_sub, 0, "<=", worst_sub <= 0,
                   "max annealed free energy over z <= 1 (should vanish identically)");
        else
            c.missing("3-fe-subcritical", 0, "<=", "no z <= 1 rows");

        bool found = false;
        for (const Row& r : *fe) {
            if (std::fabs(r.num("z") - 1.2) < 1e-12) {
                c.push("3-fe-supercritical", r.rec->value, 1e-3, ">", r.rec->value > 1e-3,
                       "annealed free energy at z = 1.2");
                found = true;
                break;
            }
        }
        if (!found) c.missing("3-fe-supercritical", 1e-3, ">", "no z = 1.2 row");
    }
    const auto* resid = c.rows("annealed-fe-residual");
    if (!resid) {
        c.missing("3-fe-residual", 1e-10, "<=", "no annealed-fe-residual records");
    } else {
        double worst = max_value(*resid);
        c.push("3-fe-residual", worst, 1e-10, "<=", worst <= 1e-10,
               "max |1 - z * sum_n K(n) e^{-F n}| at the fitted root");
    }
}

void check_doney(Checker& c) {
    const auto* rs = c.rows("doney");
    if (!rs) {
        c.missing("4-doney-value", 0.1, "<=", "no doney records");
        c.missing("4-doney-decreasing", 1, "<", "no doney records");
        return;
    }
    std::map<double, double> by_n = series_by(*rs, "n", "lazy3");
    if (by_n.empty()) {
        c.missing("4-doney-value", 0.1, "<=", "no lazy3 rows");
        c.missing("4-doney-decreasing", 1, "<", "no lazy3 rows");
        return;
    }
    double n_top = by_n.rbegin()->first;
    double v_top = std::fabs(by_n.rbegin()->second);
    c.push("4-doney-value", v_top, 0.1, "<=", v_top <= 0.1,
           "|u_n * 2 pi c_K sqrt(n) - 1| at n = " + short6(n_top));
    if (by_n.size() < 2) {
        c.missing("4-doney-decreasing", 1, "<", "needs at least two n points");
        return;
    }
    std::vector<double> mags;
    for (const auto& [n, v] : by_n) mags.push_back(std::fabs(v));
    double worst = worst_ratio(mags);
    c.push("4-doney-decreasing", worst, 1, "<", worst < 1,
           "worst consecutive |error| ratio along the n ladder");
}

void check_a_of_r(Checker& c) {
    {
        const auto* rs = c.rows("a-enum-check");
        if (!rs) {
            c.missing("5-a-enum", 1e-12, "<=", "no a-enum-check records");
        } else {
            double worst = max_value(*rs);
            c.push("5-a-enum", worst, 1e-12, "<=", worst <= 1e-12,
                   "max relative gap, convolution A(r) vs direct enumeration, r <= 4");
        }
    }
    const auto* rs = c.rows("a-of-r");
    if (!rs) {
        c.missing("5-ra-limit", 0.15, "<=", "no a-of-r records");
        c.missing("5-ra-monotone", 1, "<", "no a-of-r records");
        return;
    }
    std::map<double, double> by_r = series_by(*rs, "r", "lazy3");
    if (by_r.empty()) {
        c.missing("5-ra-limit", 0.15, "<=", "no lazy3 rows");
        c.missing("5-ra-monotone", 1, "<", "no lazy3 rows");
        return;
    }
    double r_top = by_r.rbegin()->first;
    double gap_top = std::fabs(r_top * by_r.rbegin()->second / kLazyRALimit - 1);
    c.push("5-ra-limit", gap_top, 0.15, "<=", gap_top <= 0.15,
           "|r A(r) / (3/4) - 1| at r = " + short6(r_top));
    std::vector<double> gaps;
    for (const auto& [r, a] : by_r) {
        if (r < 50) continue;
        gaps.push_back(std::fabs(r * a / kLazyRALimit - 1));
    }
    if (gaps.size() < 2) {
        c.missing("5-ra-monotone", 1, "<", "needs at least two r >= 50 points");
        return;
    }
    double worst = worst_ratio(gaps);
    c.push("5-ra-monotone", worst, 1, "<", worst < 1,
           "worst consecutive limit-gap ratio along r >= 50");
}

void check_tilt_moments(Checker& c) {
    const auto* rs = c.rows("tilt-moments");
    if (!rs) {
        c.missing("6-delta-sq", 0.05, "<=", "no tilt-moments records");
        c.missing("6-b-of-r", 0.10, "<=", "no tilt-moments records");
        return;
    }
    auto check_stat = [&](const char* criterion, const char* stat, double limit, double tol) {
        std::map<double, double> by_r;
        for (const Row& r : *rs)
            if (r.str("model") == "lazy3" && r.str("stat") == stat) by_r[r.num("r")] = r.rec->value;
        if (by_r.empty()) {
            c.missing(criterion, tol, "<=", std::string("no lazy3 ") + stat + " rows");
            return;
        }
        double r_top = by_r.rbegin()->first;
        double v = by_r.rbegin()->second;
        double gap = std::fabs(v / limit - 1);
        c.push(criterion, gap, tol, "<=", gap <= tol,
               std::string("|") + stat + " / " + short6(limit) + " - 1| at r = " + short6(r_top) +
                   " (value " + short6(v) + ")");
    };
    check_stat("6-delta-sq", "delta_sq", kLazyDeltaSqLimit, 0.05);
    check_stat("6-b-of-r", "b_of_r", kLazyBLimit, 0.10);
}

void check_borne_m(Checker& c) {
    const char* id = "7-borne-m";
    const auto* rs = c.rows("borne-m");
    if (!rs) {
        c.missing(id, 4, "<=", "no borne-m records");
        return;
    }
    double worst = -kInf;
    std::string where;
    for (const Row& r : *rs) {
        double se = r.rec->has_stderr ? r.rec->stderr_ : 0;
        double hi = r.rec->value + z_quantile_two_sided(0.99) * se;
        if (std::isnan(hi)) {
            worst = kNan;
            where = r.rec->params;
            break;
        }
        if (hi > worst) {
            worst = hi;
            where = r.rec->params;
        }
    }
    c.push(id, worst, 4, "<=", worst <= 4,
           "99% CI upper bound of the exponential overshoot moment (" + where + ")");
}

void check_coarse(Checker& c) {
    const auto* rs = c.rows("coarse-identity");
    if (!rs) {
        c.missing("8-coarse-quenched", 1e-10, "<=", "no coarse-identity records");
        c.missing("8-coarse-contact", 1e-10, "<=", "no coarse-identity records");
        return;
    }
    auto check_kind = [&](const char* criterion, const char* kind, const char* what) {
        double worst = -kInf;
        bool any = false;
        for (const Row& r : *rs) {
            if (r.str("kind") != kind) continue;
            any = true;
            double v = r.rec->value;
            if (std::isnan(v)) {
                worst = kNan;
                break;
            }
            worst = std::max(worst, v);
        }
        if (!any)
            c.missing(criterion, 1e-10, "<=", std::string("no kind = ") + kind + " rows");
        else
            c.push(criterion, worst, 1e-10, "<=", worst <= 1e-10, what);
    };
    check_kind("8-coarse-quenched", "quenched",
               "max |sum over block profiles / full partition function - 1|");
    check_kind("8-coarse-contact", "contact",
               "max |sum over block visit profiles / u_N - 1|");
}

void check_half_normal(Checker& c) {
    const auto* rs = c.rows("half-normal-ks");
    if (!rs) {
        c.missing("9-ks-value", 0.05, "<=", "no half-normal-ks records");
        c.missing("9-ks-decreasing", 1, "<", "no half-normal-ks records");
        return;
    }
    std::map<double, double> by_n = series_by(*rs, "n", "lazy3");
    if (by_n.empty()) {
        c.missing("9-ks-value", 0.05, "<=", "no lazy3 rows");
        c.missing("9-ks-decreasing", 1, "<", "no lazy3 rows");
        return;
    }
    double n_top = by_n.rbegin()->first;
    double v_top = by_n.rbegin()->second;
    c.push("9-ks-value", v_top, 0.05, "<=", v_top <= 0.05,
           "KS distance, scaled contact count vs half-normal, n = " + short6(n_top));
    if (by_n.size() < 2) {
        c.missing("9-ks-decreasing", 1, "<", "needs at least two n points");
        return;
    }
    std::vector<double> mags;
    for (const auto& [n, v] : by_n) mags.push_back(std::fabs(v));
    double worst = worst_ratio(mags);
    c.push("9-ks-decreasing", worst, 1, "<", worst < 1,
           "worst consecutive KS ratio along the n ladder");
}

void check_jensen(Checker& c) {
    const char* id = "10-jensen";
    const auto* quen = c.rows("fe-quenched");
    const auto* ann = c.rows("fe-annealed");
    if (!quen || !ann) {
        c.missing(id, 0, "<=", "needs fe-quenched and fe-annealed records");
        return;
    }
    std::map<std::string, double> exact;
    for (const Row& r : *ann)
        exact[r.str("model") + "|" + r.str("n") + "|" + r.str("z")] = r.rec->value;
    double worst = -kInf;
    std::string where;
    for (const Row& r : *quen) {
        auto it = exact.find(r.str("model") + "|" + r.str("n") + "|" + r.str("z"));
        if (it == exact.end()) {
            c.missing(id, 0, "<=", "fe-annealed partner absent for " + r.rec->params);
            return;
        }
        double se = r.rec->has_stderr ? r.rec->stderr_ : 0;
        double slack = r.rec->value - it->second - 3 * se;
        if (std::isnan(slack)) {
            worst = kNan;
            where = r.rec->params;
            break;
        }
        if (slack > worst) {
            worst = slack;
            where = r.rec->params;
        }
    }
    c.push(id, worst, 0, "<=", worst <= 0,
           "max (quenched mean - annealed - 3 se) over the grid (" + where + ")");
}

void check_chernoff(Checker& c) {
    const auto* rs = c.rows("chernoff-tail");
    if (!rs) {
        c.missing("11-chernoff-decreasing", 0, "<", "no chernoff-tail records");
        c.missing("11-chernoff-steepening", 0, "<=", "no chernoff-tail records");
        return;
    }
    double n_top = -kInf;
    for (const Row& r : *rs)
        if (r.str("model") == "lazy3") n_top = std::max(n_top, r.num("n"));
    std::map<double, double> by_alpha;
    for (const Row& r : *rs)
        if (r.str("model") == "lazy3" && r.num("n") == n_top) by_alpha[r.num("alpha")] = r.rec->value;
    if (by_alpha.size() < 2) {
        c.missing("11-chernoff-decreasing", 0, "<", "needs at least two alpha points");
        c.missing("11-chernoff-steepening", 0, "<=", "needs alpha = 2, 4, 8 rows");
        return;
    }
    double worst = -kInf;
    double prev = kNan;
    bool first = true;
    for (const auto& [a, y] : by_alpha) {
        if (!first) worst = std::max(worst, y - prev);
        prev = y;
        first = false;
    }
    c.push("11-chernoff-decreasing", worst, 0, "<", worst < 0,
           "max consecutive increase of log P(R_n >= alpha sqrt(n)) along alpha");

    auto get = [&](double a) {
        auto it = by_alpha.find(a);
        return it == by_alpha.end() ? kNan : it->second;
    };
    double y2 = get(2), y4 = get(4), y8 = get(8);
    if (std::isnan(y2) || std::isnan(y4) || std::isnan(y8)) {
        c.missing("11-chernoff-steepening", 0, "<=", "needs alpha = 2, 4, 8 rows");
        return;
    }
    double s1 = (y4 - y2) / 12;  // chord slope in alpha^2 over [4, 16]
    double s2 = (y8 - y4) / 48;  // chord slope in alpha^2 over [16, 64]
    double measured = s2 - s1;
    c.push("11-chernoff-steepening", measured, 0, "<=", measured <= 0,
           "chord slopes vs alpha^2: s1 = " + short6(s1) + ", s2 = " + short6(s2) +
               "; the log-tail is asymptotically linear in alpha^2, so chords flatten toward the "
               "limiting rate instead of steepening; retained as a documented red check",
           /*expected_red=*/true);
}

}  // namespace

int VerifyReport::exit_code() const {
    if (any_error) return 2;
    if (any_unexpected_fail || any_missing) return 1;
    return 0;
}

VerifyReport verify_results(const std::vector<Record>& records) {
    VerifyReport rep;
    if (records.empty()) {
        VerifyLine l;
        l.criterion = "input";
        l.measured = kNan;
        l.threshold = 0;
        l.relation = "nonempty";
        l.verdict = "error";
        l.note = "no records to verify";
        rep.lines.push_back(std::move(l));
        rep.any_error = true;
        return rep;
    }
    Checker c;
    for (const Record& r : records) c.by_exp[r.experiment].push_back(Row{&r, parse_params(r.params)});

    check_partition_oracle(c);
    check_annealed_identity(c);
    check_critical_point(c);
    check_doney(c);
    check_a_of_r(c);
    check_tilt_moments(c);
    check_borne_m(c);
    check_coarse(c);
    check_half_normal(c);
    check_jensen(c);
    check_chernoff(c);

    rep.lines = std::move(c.lines);
    for (const VerifyLine& l : rep.lines) {
        if (l.verdict == "error") rep.any_error = true;
        if (l.verdict == "missing") rep.any_missing = true;
        if (l.verdict == "fail" && !l.expected_red) rep.any_unexpected_fail = true;
    }
    return rep;
}

bool verify_recipe(const std::string& name, const ExperimentContext& ctx,
                   const std::string& expected_csv, std::string* why) {
    std::vector<Record> recs = run_recipe(name, ctx);
    std::string got = to_csv(recs);
    if (got == expected_csv) return true;
    if (why) {
        std::istringstream a(got), b(expected_csv);
        std::string la, lb;
        int lineno = 0;
        *why = "outputs differ";
        while (true) {
            ++lineno;
            bool more_a = static_cast<bool>(std::getline(a, la));
            bool more_b = static_cast<bool>(std::getline(b, lb));
            if (!more_a && !more_b) {
                *why = "outputs differ only in trailing bytes";
                break;
            }
            if (!more_a || !more_b || la != lb) {
                *why = "line " + std::to_string(lineno) + ": re-run '" +
                       (more_a ? la : std::string("<eof>")) + "' vs expected '" +
                       (more_b ? lb : std::string("<eof>")) + "'";
                break;
            }
        }
    }
    return false;
}

}  // namespace rwpm
