#include "rwpm/coarse.hpp"

#include <cmath>
#include <functional>
#include <limits>
#include <stdexcept>

#include "rwpm/stats.hpp"
#include "rwpm/tail_sums.hpp"

namespace rwpm {

namespace {

constexpr double kNegInf = -std::numeric_limits<double>::infinity();

// Streaming log-sum-exp accumulator.
struct LogSum {
    double peak = kNegInf;
    double s = 0;

    void add(double t) {
        if (t == kNegInf) return;
        if (t <= peak) {
            s += std::exp(t - peak);
        } else {
            s = s * std::exp(peak - t) + 1.0;
            peak = t;
        }
    }
    double value() const { return peak == kNegInf ? kNegInf : peak + std::log(s); }
};

// log weight of one renewal gap of length g landing at absolute position q.
using GapLogW = std::function<double(int g, int q)>;

void check_grid(const RenewalLaw& law, int m, int L, const char* who) {
    if (m < 1 || L < 1) throw std::invalid_argument(std::string(who) + ": m, L must be >= 1");
    if (m > 20) throw std::invalid_argument(std::string(who) + ": m > 20 is a 2^m sweep, refusing");
    if (m * L > law.n_max) throw std::invalid_argument(std::string(who) + ": m*L exceeds law.n_max");
}

// Log mass of renewal configurations on {1..mL} whose contact set hits
// exactly the blocks of `subset` (>= 1 contact per listed block, none
// elsewhere) and ends with a contact at mL. Entry into each block scans the
// previous block's endpoints; within-block closure is a second DP. O(|I| L^2).
double subset_log_mass(int m, int L, std::uint32_t subset, const GapLogW& logw) {
    if (subset == 0 || !((subset >> (m - 1)) & 1u)) return kNegInf;
    std::vector<int> pos_prev{0};
    std::vector<double> lv_prev{0.0};
    std::vector<double> lv(static_cast<std::size_t>(L));
    for (int b = 1; b <= m; ++b) {
        if (!((subset >> (b - 1)) & 1u)) continue;
        int lo = (b - 1) * L + 1, hi = b * L;
        for (int q = lo; q <= hi; ++q) {
            LogSum acc;
            for (std::size_t i = 0; i < pos_prev.size(); ++i)
                if (lv_prev[i] != kNegInf) acc.add(lv_prev[i] + logw(q - pos_prev[i], q));
            for (int q2 = lo; q2 < q; ++q2) {
                double l2 = lv[static_cast<std::size_t>(q2 - lo)];
                if (l2 != kNegInf) acc.add(l2 + logw(q - q2, q));
            }
            lv[static_cast<std::size_t>(q - lo)] = acc.value();
        }
        pos_prev.resize(static_cast<std::size_t>(L));
        lv_prev.assign(lv.begin(), lv.end());
        for (int q = lo; q <= hi; ++q) pos_prev[static_cast<std::size_t>(q - lo)] = q;
    }
    return lv_prev.back();
}

CoarseDecomposition decompose(int m, int L, const GapLogW& logw, double normalize_log) {
    CoarseDecomposition d;
    d.m = m;
    d.L = L;
    d.profiles.reserve(std::size_t{1} << m);
    LogSum total;
    for (std::uint32_t s = 0; s < (1u << m); ++s) {
        CoarseProfile p;
        p.subset = s;
        p.log_z = subset_log_mass(m, L, s, logw);
        p.empty = (p.log_z == kNegInf);
        p.value = p.empty ? 0.0 : std::exp(p.log_z - normalize_log);
        total.add(p.log_z);
        d.profiles.push_back(p);
    }
    d.log_total = total.value() - normalize_log;
    return d;
}

GapLogW contact_logw(const RenewalLaw& law) {
    return [&law](int g, int) { return std::log(law.K(g)); };
}

GapLogW quenched_logw(const CouplingParams& params, const Environment& env_y,
                      const RenewalLaw& law, const WeightEvaluator& weights) {
    return [&params, &env_y, &law, &weights](int g, int q) {
        double lk = std::log(law.K(g));
        if (lk == kNegInf) return kNegInf;
        Point dy = sub(env_y.position(q), env_y.position(q - g));
        return lk + weights.log_weight(params.z, g, dy);
    };
}

}  // namespace

CoarseDecomposition coarse_decompose_annealed(const RenewalLaw& law, int m, int L, double z) {
    check_grid(law, m, L, "coarse_decompose_annealed");
    if (z < 0) throw std::invalid_argument("coarse_decompose_annealed: z must be >= 0");
    double log_z = std::log(z);
    return decompose(m, L, [&law, log_z](int g, int) { return log_z + std::log(law.K(g)); }, 0.0);
}

CoarseDecomposition coarse_decompose_contact(const RenewalLaw& law, int m, int L) {
    check_grid(law, m, L, "coarse_decompose_contact");
    double u_n = mass_sequence(law, m * L).at(m * L);
    if (u_n <= 0) throw std::runtime_error("coarse_decompose_contact: u_N vanishes");
    return decompose(m, L, contact_logw(law), std::log(u_n));
}

CoarseDecomposition coarse_decompose_quenched(const CouplingParams& params,
                                              const Environment& env_y, const RenewalLaw& law,
                                              const WeightEvaluator& weights, int m, int L) {
    check_grid(law, m, L, "coarse_decompose_quenched");
    if (env_y.n < m * L) throw std::invalid_argument("coarse_decompose_quenched: environment too short");
    return decompose(m, L, quenched_logw(params, env_y, law, weights), 0.0);
}

double block_log_partition(const CouplingParams& params, const Environment& env_y,
                           const RenewalLaw& law, const WeightEvaluator& weights, int m, int L,
                           std::uint32_t subset) {
    check_grid(law, m, L, "block_log_partition");
    if (subset >= (1u << m)) throw std::invalid_argument("block_log_partition: subset out of range");
    if (env_y.n < m * L) throw std::invalid_argument("block_log_partition: environment too short");
    return subset_log_mass(m, L, subset, quenched_logw(params, env_y, law, weights));
}

double block_visit_prob(const RenewalLaw& law, int m, int L, std::uint32_t subset) {
    check_grid(law, m, L, "block_visit_prob");
    if (subset >= (1u << m)) throw std::invalid_argument("block_visit_prob: subset out of range");
    double u_n = mass_sequence(law, m * L).at(m * L);
    if (u_n <= 0) throw std::runtime_error("block_visit_prob: u_N vanishes");
    double lm = subset_log_mass(m, L, subset, contact_logw(law));
    return lm == kNegInf ? 0.0 : std::exp(lm - std::log(u_n));
}

ProfileDecayFit profile_gap_decay(const RenewalLaw& law, int m, int L) {
    check_grid(law, m, L, "profile_gap_decay");
    if (m < 2) throw std::invalid_argument("profile_gap_decay: needs m >= 2");
    double log_un = std::log(mass_sequence(law, m * L).at(m * L));
    GapLogW logw = contact_logw(law);
    ProfileDecayFit fit;
    for (std::uint32_t s = 0; s < (1u << m); ++s) {
        if (!((s >> (m - 1)) & 1u)) continue;
        if (__builtin_popcount(s) < 2) continue;
        double lp = subset_log_mass(m, L, s, logw) - log_un;
        if (lp == kNegInf) continue;
        double x = 0;
        int prev = 0;
        for (int b = 1; b <= m; ++b)
            if ((s >> (b - 1)) & 1u) {
                x += std::log(static_cast<double>(b - prev));
                prev = b;
            }
        fit.x.push_back(x);
        fit.log_p.push_back(lp);
    }
    fit.slope = ls_slope(fit.x, fit.log_p);
    double mx = 0, my = 0;
    for (std::size_t i = 0; i < fit.x.size(); ++i) {
        mx += fit.x[i];
        my += fit.log_p[i];
    }
    mx /= static_cast<double>(fit.x.size());
    my /= static_cast<double>(fit.x.size());
    fit.intercept = my - fit.slope * mx;
    return fit;
}

EnvelopeResult coarse_envelope(double eta, double gamma, double c2, int m) {
    if (!(eta > 0) || !(c2 > 0)) throw std::invalid_argument("coarse_envelope: eta, c2 must be > 0");
    if (!(gamma > 0 && gamma < 1)) throw std::invalid_argument("coarse_envelope: gamma must be in (0, 1)");
    if (m < 1) throw std::invalid_argument("coarse_envelope: m must be >= 1");
    constexpr double kAlpha = 1.2;  // coarse gap exponent 6/5

    EnvelopeResult res;
    res.ctilde = zeta_sum(kAlpha);
    res.weight = std::pow(3.0 * c2 * eta, gamma);
    res.threshold = 1.0 / res.ctilde;
    double weff = res.ctilde * res.weight;

    std::vector<double> kt(static_cast<std::size_t>(m) + 1, 0.0);
    for (int n = 1; n <= m; ++n) kt[static_cast<std::size_t>(n)] = std::pow(n, -kAlpha) / res.ctilde;
    std::vector<double> e(static_cast<std::size_t>(m) + 1, 0.0);
    e[0] = 1.0;
    for (int n = 1; n <= m; ++n) {
        double s = 0;
        for (int k = 1; k <= n; ++k) s += kt[static_cast<std::size_t>(k)] * e[static_cast<std::size_t>(n - k)];
        e[static_cast<std::size_t>(n)] = weff * s;
    }
    double val = 0;
    for (int n = 0; n <= m; ++n) {
        double tail = (n == m) ? 1.0 : powerlaw_tail(kAlpha, m - n) / res.ctilde;
        val += e[static_cast<std::size_t>(n)] * tail;
    }
    res.log_value = std::log(val);
    res.pinned.assign(e.begin() + 1, e.end());
    return res;
}

double envelope_default_eta(double c2, double gamma) {
    if (!(c2 > 0)) throw std::invalid_argument("envelope_default_eta: c2 must be > 0");
    if (!(gamma > 0 && gamma < 1)) throw std::invalid_argument("envelope_default_eta: gamma must be in (0, 1)");
    return 1.0 / ((4.0 * c2) * std::pow(zeta_sum(1.2), 1.0 / gamma));
}

}  // namespace rwpm
