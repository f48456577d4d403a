#include "rwpm/contact_dist.hpp"

#include <cmath>
#include <stdexcept>

#include "fft_engine.hpp"
#include "rwpm/stats.hpp"

namespace rwpm {

namespace {

constexpr double kTailStop = 1e-11;  // adaptive k cut: P(R_N > k) below this
constexpr int kDirectMaxN = 1024;    // auto-route threshold

void check_horizon(const RenewalLaw& law, int N, const char* who) {
    if (N < 0 || N > law.n_max) throw std::invalid_argument(std::string(who) + ": N out of [0, n_max]");
}

// c(t) = sum_j a(j) b(t - j) for t <= N, all-nonnegative direct summation.
std::vector<double> convolve_trunc(const std::vector<double>& a, const std::vector<double>& b, int N) {
    std::vector<double> c(static_cast<std::size_t>(N) + 1, 0.0);
    for (int j = 0; j <= N; ++j) {
        double aj = a[static_cast<std::size_t>(j)];
        if (aj == 0.0) continue;
        int top = N - j;
        for (int i = 0; i <= top && i < static_cast<int>(b.size()); ++i)
            c[static_cast<std::size_t>(j + i)] += aj * b[static_cast<std::size_t>(i)];
    }
    return c;
}

// K^{*k} truncated to [0, N] by square-and-multiply. Truncation commutes with
// the product here: every summand landing at t <= N has all partial sums
// <= t, so dropping mass beyond N never affects entries below it.
std::vector<double> kfold_trunc(const RenewalLaw& law, int N, int k) {
    std::vector<double> base(law.k.begin(), law.k.begin() + std::min<std::size_t>(law.k.size(), static_cast<std::size_t>(N) + 1));
    base.resize(static_cast<std::size_t>(N) + 1, 0.0);
    std::vector<double> result(static_cast<std::size_t>(N) + 1, 0.0);
    result[0] = 1.0;
    int e = k;
    while (e > 0) {
        if (e & 1) result = convolve_trunc(result, base, N);
        e >>= 1;
        if (e > 0) base = convolve_trunc(base, base, N);
    }
    return result;
}

}  // namespace

std::vector<double> contact_count_dist_direct(const RenewalLaw& law, int N, int k_cap) {
    check_horizon(law, N, "contact_count_dist_direct");
    std::vector<double> out;
    out.push_back(law.gap_tail(N));
    double total = out[0];
    std::vector<double> f(static_cast<std::size_t>(N) + 1, 0.0);
    f[0] = 1.0;
    for (int k = 1; k <= N; ++k) {
        if (k_cap >= 0 && k > k_cap) break;
        if (k_cap < 0 && 1.0 - total < kTailStop) break;
        std::vector<double> g(static_cast<std::size_t>(N) + 1, 0.0);
        for (int j = k - 1; j < N; ++j) {
            double fj = f[static_cast<std::size_t>(j)];
            if (fj == 0.0) continue;
            for (int i = 1; i + j <= N; ++i)
                g[static_cast<std::size_t>(j + i)] += fj * law.k[static_cast<std::size_t>(i)];
        }
        f = std::move(g);
        double pk = 0;
        for (int t = k; t <= N; ++t) pk += f[static_cast<std::size_t>(t)] * law.gap_tail(N - t);
        out.push_back(pk);
        total += pk;
    }
    return out;
}

std::vector<double> contact_count_dist_fft(const RenewalLaw& law, int N, int k_cap) {
    check_horizon(law, N, "contact_count_dist_fft");
    std::vector<double> out;
    out.push_back(law.gap_tail(N));
    double total = out[0];
    if (N == 0) return out;

    std::size_t M = detail::next_pow2(2 * static_cast<std::size_t>(N) + 2);
    detail::FftEngine eng(M);

    // K-hat, computed once.
    std::vector<double> khat_re(eng.spec_size()), khat_im(eng.spec_size());
    for (std::size_t i = 0; i < M; ++i) eng.real_buf()[i] = 0.0;
    for (int n = 1; n <= N; ++n) eng.real_buf()[n] = law.k[static_cast<std::size_t>(n)];
    eng.forward();
    for (std::size_t i = 0; i < eng.spec_size(); ++i) {
        khat_re[i] = eng.spec_buf()[i][0];
        khat_im[i] = eng.spec_buf()[i][1];
    }

    std::vector<double> f(static_cast<std::size_t>(N) + 1, 0.0);
    f[0] = 1.0;
    for (int k = 1; k <= N; ++k) {
        if (k_cap >= 0 && k > k_cap) break;
        if (k_cap < 0 && 1.0 - total < kTailStop) break;
        for (std::size_t i = 0; i <= static_cast<std::size_t>(N); ++i) eng.real_buf()[i] = f[i];
        for (std::size_t i = static_cast<std::size_t>(N) + 1; i < M; ++i) eng.real_buf()[i] = 0.0;
        eng.forward();
        for (std::size_t i = 0; i < eng.spec_size(); ++i) {
            double re = eng.spec_buf()[i][0], im = eng.spec_buf()[i][1];
            eng.spec_buf()[i][0] = re * khat_re[i] - im * khat_im[i];
            eng.spec_buf()[i][1] = re * khat_im[i] + im * khat_re[i];
        }
        eng.backward();
        double inv_m = 1.0 / static_cast<double>(M);
        for (int t = 0; t <= N; ++t) {
            double v = t < k ? 0.0 : eng.real_buf()[t] * inv_m;
            f[static_cast<std::size_t>(t)] = v > 0.0 ? v : 0.0;
        }
        double pk = 0;
        for (int t = k; t <= N; ++t) pk += f[static_cast<std::size_t>(t)] * law.gap_tail(N - t);
        out.push_back(pk);
        total += pk;
    }
    return out;
}

std::vector<double> contact_count_dist(const RenewalLaw& law, int N) {
    return N <= kDirectMaxN ? contact_count_dist_direct(law, N) : contact_count_dist_fft(law, N);
}

double contact_tail_prob(const RenewalLaw& law, int N, int k) {
    check_horizon(law, N, "contact_tail_prob");
    if (k <= 0) return 1.0;
    if (k > N) return 0.0;
    std::vector<double> fk = kfold_trunc(law, N, k);
    double p = 0;
    for (int t = k; t <= N; ++t) p += fk[static_cast<std::size_t>(t)];
    return p;
}

double ks_halfnormal(const RenewalLaw& law, int N) {
    if (N < 1) throw std::invalid_argument("ks_halfnormal: N must be >= 1");
    std::vector<double> dist = contact_count_dist(law, N);
    std::vector<double> points(dist.size());
    double scale = law.ck / std::sqrt(static_cast<double>(N));
    for (std::size_t k = 0; k < dist.size(); ++k) points[k] = scale * static_cast<double>(k);
    return ks_distance_atomic_vs_cdf(points, dist, halfnormal_scaled_cdf);
}

ConditioningReport conditioning_ratio(const RenewalLaw& law, int N) {
    if (N < 1 || 2 * N > law.n_max)
        throw std::invalid_argument("conditioning_ratio: needs 1 <= N and 2N <= n_max");
    MassSequence mass = mass_sequence(law, 2 * N);
    const std::vector<double>& u = mass.u;
    double u2n = u[static_cast<std::size_t>(2 * N)];

    ConditioningReport rep;
    auto push = [&](const std::string& name, double unc, double cond) {
        ConditioningEntry e;
        e.name = name;
        e.unconditioned = unc;
        e.conditioned = cond;
        if (unc > 0) {
            e.ratio = cond / unc;
            if (e.ratio > rep.max_ratio) rep.max_ratio = e.ratio;
        } else {
            e.skipped = true;
        }
        rep.entries.push_back(e);
    };

    push("const", 1.0, 1.0);

    double un = u[static_cast<std::size_t>(N)];
    push("mid-contact", un, un * un / u2n);

    int k = static_cast<int>(std::ceil(std::sqrt(static_cast<double>(N))));
    std::vector<double> fk = kfold_trunc(law, N, k);
    double unc_ct = 0, cond_ct = 0;
    for (int t = k; t <= N; ++t) {
        double ft = fk[static_cast<std::size_t>(t)];
        unc_ct += ft;
        cond_ct += ft * u[static_cast<std::size_t>(2 * N - t)];
    }
    push("count-threshold", unc_ct, cond_ct / u2n);

    double unc_sg = 0, cond_sg = 0;
    for (int j = 1; j < N; ++j) {
        double w = std::sqrt(static_cast<double>(j)) * law.k[static_cast<std::size_t>(j)];
        if (w == 0.0) continue;
        unc_sg += w * (1.0 - law.gap_tail(N - j));
        double inner = 0;
        for (int g = 1; g <= N - j; ++g)
            inner += law.k[static_cast<std::size_t>(g)] * u[static_cast<std::size_t>(2 * N - j - g)];
        cond_sg += w * inner;
    }
    push("sqrt-gap", unc_sg, cond_sg / u2n);

    return rep;
}

double conditional_mean_contacts(const RenewalLaw& law, int N) {
    if (N < 1 || N > law.n_max)
        throw std::invalid_argument("conditional_mean_contacts: N out of [1, n_max]");
    MassSequence mass = mass_sequence(law, N);
    double un = mass.at(N);
    if (un <= 0) throw std::runtime_error("conditional_mean_contacts: u_N vanishes");
    double s = 0;
    for (int t = 1; t <= N; ++t) s += mass.at(t) * mass.at(N - t);
    return s / un;
}

}  // namespace rwpm
