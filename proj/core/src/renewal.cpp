#include "rwpm/renewal.hpp"

#include <cmath>
#include <filesystem>
#include <fstream>
#include <stdexcept>

#include <json.hpp>

#include "rwpm/pmf.hpp"
#include "rwpm/stats.hpp"
#include "rwpm/tail_sums.hpp"
#include "rwpm/version.hpp"

namespace rwpm {

namespace {

// Sparse-route guard: d-dim supports beyond this are infeasible here. The
// sparse path exists for low-dimensional cross-checks and exotic pairs.
constexpr std::size_t kSparseCap = 65536;

bool is_simple_walk(const WalkModel& m) {
    if (static_cast<int>(m.support.size()) != 2 * m.dim) return false;
    double p = 1.0 / (2.0 * m.dim);
    for (const auto& [x, q] : m.support) {
        if (linf_norm(x) != 1 || norm2(x) != 1) return false;
        if (std::fabs(q - p) > 1e-15) return false;
    }
    return true;
}

// p^{X-Y}_n(0) for n in [1, n_max]. Three routes:
//  - product pairs: stream the shared 1-d table of the difference law,
//    p0(n) = t_n(0)^d; cost O(n_max^{3/2}) after truncation;
//  - two d=3 nearest-neighbour walks: X_n - Y_n is one walk at 2n steps, and
//    (36 n)^n-normalized closed-walk counts satisfy a 3-term recurrence
//      n^3 b(n) = (2(2n-1)(10n^2-10n+3)/36) b(n-1) - ((n-1)(2n-1)(2n-3)/36) b(n-2)
//    with b(0) = 1, b(1) = 1/6; forward-stable (contaminating root ~ 1/9);
//  - anything else: sparse d-dim convolution behind kSparseCap.
std::vector<double> return_prob_sequence(const WalkModel& mx, const WalkModel& my, int n_max) {
    std::vector<double> p0(static_cast<std::size_t>(n_max) + 1, 0.0);
    if (mx.product_form && my.product_form) {
        WalkModel diff = difference_model(mx, my);
        AxisTable t = axis_delta();
        for (int n = 1; n <= n_max; ++n) {
            t = axis_convolve(t, diff.axis_pmf, diff.axis_radius);
            double v = 1.0, a0 = t.at(0);
            for (int c = 0; c < diff.dim; ++c) v *= a0;
            p0[static_cast<std::size_t>(n)] = v;
        }
        return p0;
    }
    if (mx.dim == 3 && is_simple_walk(mx) && is_simple_walk(my)) {
        double bm2 = 1.0, bm1 = 1.0 / 6.0;
        p0[1] = bm1;
        for (int n = 2; n <= n_max; ++n) {
            double dn = n;
            double b = (2.0 * (2 * dn - 1) * (10 * dn * dn - 10 * dn + 3) / 36.0 * bm1 -
                        (dn - 1) * (2 * dn - 1) * (2 * dn - 3) / 36.0 * bm2) /
                       (dn * dn * dn);
            p0[static_cast<std::size_t>(n)] = b;
            bm2 = bm1;
            bm1 = b;
        }
        return p0;
    }
    WalkModel diff = difference_model(mx, my);
    std::unordered_map<std::uint64_t, double> cur;
    cur[pack_point(zero_point())] = 1.0;
    for (int n = 1; n <= n_max; ++n) {
        std::unordered_map<std::uint64_t, double> next;
        next.reserve(cur.size() * 2);
        for (const auto& [k, p] : cur) {
            Point base = unpack_point(k);
            for (const auto& [step, ps] : diff.support) next[pack_point(add(base, step))] += p * ps;
        }
        if (next.size() > kSparseCap)
            throw std::runtime_error("build_renewal: sparse route support exceeds cap at n=" +
                                     std::to_string(n) + "; only product-form and d=3 nearest-neighbour pairs scale");
        cur = std::move(next);
        auto it = cur.find(pack_point(zero_point()));
        p0[static_cast<std::size_t>(n)] = it == cur.end() ? 0.0 : it->second;
    }
    return p0;
}

}  // namespace

double RenewalLaw::gap_tail(int n) const {
    if (n < 0) throw std::invalid_argument("gap_tail: negative n");
    if (n <= n_max) return suffix[static_cast<std::size_t>(n)];
    if (ck == 0.0) return 0.0;
    return ck * (powerlaw_tail(1.5, n) + ck2 * powerlaw_tail(2.5, n));
}

void RenewalLaw::finalize_tables() {
    tail_mass = ck == 0.0 ? 0.0 : ck * (powerlaw_tail(1.5, n_max) + ck2 * powerlaw_tail(2.5, n_max));
    suffix.assign(static_cast<std::size_t>(n_max) + 1, 0.0);
    suffix[static_cast<std::size_t>(n_max)] = tail_mass;
    for (int n = n_max - 1; n >= 0; --n)
        suffix[static_cast<std::size_t>(n)] = suffix[static_cast<std::size_t>(n) + 1] + k[static_cast<std::size_t>(n) + 1];
}

RenewalLaw build_renewal(const WalkModel& mx, const WalkModel& my, int n_max) {
    if (mx.dim != my.dim) throw std::invalid_argument("build_renewal: dimension mismatch");
    if (mx.dim < 3) throw std::invalid_argument("build_renewal: needs dim >= 3 (transient difference walk)");
    if (n_max < 100) throw std::invalid_argument("build_renewal: n_max must be >= 100 for the tail fit");

    std::vector<double> p0 = return_prob_sequence(mx, my, n_max);

    // Fit p0(n) n^{3/2} ~ c + b/n over the last decade (least squares in 1/n).
    int lo = n_max / 10;
    std::vector<double> xs, ys;
    xs.reserve(static_cast<std::size_t>(n_max - lo) + 1);
    ys.reserve(xs.capacity());
    for (int n = lo; n <= n_max; ++n) {
        xs.push_back(1.0 / n);
        ys.push_back(p0[static_cast<std::size_t>(n)] * std::pow(n, 1.5));
    }
    double b = ls_slope(xs, ys);
    double mean_x = 0, mean_y = 0;
    for (std::size_t i = 0; i < xs.size(); ++i) {
        mean_x += xs[i];
        mean_y += ys[i];
    }
    mean_x /= static_cast<double>(xs.size());
    mean_y /= static_cast<double>(ys.size());
    double c = mean_y - b * mean_x;
    // Settling guard: the two-term model must describe the last decade to 2%,
    // otherwise the analytic tail below is not trustworthy.
    double worst = 0;
    for (std::size_t i = 0; i < xs.size(); ++i) {
        double r = std::fabs(ys[i] - (c + b * xs[i]));
        if (r > worst) worst = r;
    }
    if (c <= 0 || worst / c > 0.02)
        throw std::runtime_error("build_renewal: p0 n^{3/2} has not settled over the last decade");

    double partial = 0;
    for (int n = 1; n <= n_max; ++n) partial += p0[static_cast<std::size_t>(n)];
    double green = partial + c * powerlaw_tail(1.5, n_max) + b * powerlaw_tail(2.5, n_max);

    RenewalLaw law;
    law.model_x = mx.name;
    law.model_y = my.name;
    law.dim = mx.dim;
    law.n_max = n_max;
    law.green = green;
    law.ck = c / green;
    law.ck2 = b / c;
    law.k.assign(static_cast<std::size_t>(n_max) + 1, 0.0);
    for (int n = 1; n <= n_max; ++n) law.k[static_cast<std::size_t>(n)] = p0[static_cast<std::size_t>(n)] / green;
    law.finalize_tables();
    return law;
}

RenewalLaw finite_horizon_renewal(const WalkModel& mx, const WalkModel& my, int n_max) {
    if (mx.dim != my.dim) throw std::invalid_argument("finite_horizon_renewal: dimension mismatch");
    if (n_max < 1) throw std::invalid_argument("finite_horizon_renewal: n_max must be >= 1");
    std::vector<double> p0 = return_prob_sequence(mx, my, n_max);
    double partial = 0;
    for (int n = 1; n <= n_max; ++n) partial += p0[static_cast<std::size_t>(n)];
    RenewalLaw law;
    law.model_x = mx.name;
    law.model_y = my.name;
    law.dim = mx.dim;
    law.n_max = n_max;
    law.green = partial;
    law.ck = 0;
    law.ck2 = 0;
    law.k.assign(static_cast<std::size_t>(n_max) + 1, 0.0);
    for (int n = 1; n <= n_max; ++n) law.k[static_cast<std::size_t>(n)] = p0[static_cast<std::size_t>(n)] / partial;
    law.finalize_tables();
    return law;
}

MassSequence mass_sequence(const RenewalLaw& law, int N) {
    if (N < 0 || N > law.n_max) throw std::invalid_argument("mass_sequence: N out of [0, n_max]");
    MassSequence m;
    m.u.assign(static_cast<std::size_t>(N) + 1, 0.0);
    m.u[0] = 1.0;
    for (int n = 1; n <= N; ++n) {
        double s = 0;
        for (int j = 1; j <= n; ++j)
            s += law.k[static_cast<std::size_t>(j)] * m.u[static_cast<std::size_t>(n - j)];
        m.u[static_cast<std::size_t>(n)] = s;
    }
    return m;
}

std::string renewal_cache_dir() {
    const char* env = std::getenv("RWPM_CACHE_DIR");
    return env && *env ? std::string(env) : std::string("rwpm_cache");
}

namespace {

std::string blob_path(const std::string& dir, const std::string& model_x, const std::string& model_y,
                      int n_max) {
    return dir + "/renewal_" + model_x + "_" + model_y + "_" + std::to_string(n_max) + ".json";
}

}  // namespace

std::optional<RenewalLaw> load_renewal(const std::string& dir, const std::string& model_x,
                                       const std::string& model_y, int n_max) {
    std::ifstream in(blob_path(dir, model_x, model_y, n_max));
    if (!in) return std::nullopt;
    nlohmann::json j;
    try {
        in >> j;
    } catch (const nlohmann::json::exception&) {
        return std::nullopt;
    }
    if (!j.is_object() || j.value("schema", "") != kRenewalBlobSchema) return std::nullopt;
    if (j.value("model_x", "") != model_x || j.value("model_y", "") != model_y ||
        j.value("n_max", -1) != n_max)
        return std::nullopt;
    RenewalLaw law;
    law.model_x = model_x;
    law.model_y = model_y;
    law.dim = j.value("dim", 0);
    law.n_max = n_max;
    law.green = j.value("green", 0.0);
    law.ck = j.value("ck", 0.0);
    law.ck2 = j.value("ck2", 0.0);
    law.k = j.value("k", std::vector<double>{});
    if (static_cast<int>(law.k.size()) != n_max + 1) return std::nullopt;
    law.finalize_tables();
    return law;
}

void save_renewal(const std::string& dir, const RenewalLaw& law) {
    std::filesystem::create_directories(dir);
    nlohmann::json j;
    j["schema"] = kRenewalBlobSchema;
    j["version"] = kVersion;
    j["model_x"] = law.model_x;
    j["model_y"] = law.model_y;
    j["dim"] = law.dim;
    j["n_max"] = law.n_max;
    j["green"] = law.green;
    j["ck"] = law.ck;
    j["ck2"] = law.ck2;
    j["k"] = law.k;
    std::string path = blob_path(dir, law.model_x, law.model_y, law.n_max);
    std::string tmp = path + ".tmp";
    {
        std::ofstream out(tmp);
        if (!out) throw std::runtime_error("save_renewal: cannot write " + tmp);
        out << j.dump();
    }
    std::filesystem::rename(tmp, path);
}

RenewalLaw cached_renewal(const WalkModel& mx, const WalkModel& my, int n_max, const std::string& dir) {
    std::string d = dir.empty() ? renewal_cache_dir() : dir;
    if (auto law = load_renewal(d, mx.name, my.name, n_max)) return *law;
    RenewalLaw law = build_renewal(mx, my, n_max);
    save_renewal(d, law);
    return law;
}

}  // namespace rwpm
