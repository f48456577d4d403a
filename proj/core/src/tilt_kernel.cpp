#include "rwpm/tilt_kernel.hpp"

#include <cmath>
#include <mutex>
#include <stdexcept>
#include <thread>

#include "fft_engine.hpp"
#include "rwpm/parallel.hpp"
#include "rwpm/stats.hpp"

namespace rwpm {

namespace {

void check_block(const TiltKernel& k, const std::vector<Point>& increments) {
    if (static_cast<int>(increments.size()) != k.L)
        throw std::invalid_argument("penalty: increment count != L");
}

// sum_{k=1}^{L-1} (L - k) / k, the pair-count weighted harmonic sum in the
// longrange Frobenius norm.
double harmonic_pair_sum(int L) {
    double s = 0;
    for (int k = 1; k < L; ++k) s += static_cast<double>(L - k) / k;
    return s;
}

double dot_dim(const Point& a, const Point& b, int dim) {
    double s = 0;
    for (int c = 0; c < dim; ++c) s += static_cast<double>(a[static_cast<std::size_t>(c)]) * b[static_cast<std::size_t>(c)];
    return s;
}

// FFT penalty with a caller-supplied engine (reused across samples inside
// borne_m_check). Engine size must be >= 2L.
double penalty_fft_with(const TiltKernel& k, const std::vector<Point>& increments, int dim,
                        detail::FftEngine& eng) {
    int L = k.L;
    std::size_t M = eng.size();
    double total = 0;  // sum_g g^{-1/2} C_g over all coordinates
    for (int c = 0; c < dim; ++c) {
        double* re = eng.real_buf();
        for (int i = 0; i < L; ++i) re[i] = increments[static_cast<std::size_t>(i)][static_cast<std::size_t>(c)];
        for (std::size_t i = static_cast<std::size_t>(L); i < M; ++i) re[i] = 0.0;
        eng.forward();
        for (std::size_t i = 0; i < eng.spec_size(); ++i) {
            double a = eng.spec_buf()[i][0], b = eng.spec_buf()[i][1];
            eng.spec_buf()[i][0] = a * a + b * b;
            eng.spec_buf()[i][1] = 0.0;
        }
        eng.backward();
        for (int g = 1; g < L; ++g) total += re[g] / std::sqrt(static_cast<double>(g));
    }
    total /= static_cast<double>(M);  // unnormalized inverse transform
    return -2.0 * k.c_m / std::sqrt(static_cast<double>(L) * std::log(static_cast<double>(L))) * total;
}

}  // namespace

TiltKernel TiltKernel::longrange(int L, double c_m) {
    if (L < 2) throw std::invalid_argument("TiltKernel::longrange: L must be >= 2");
    if (c_m < 0) throw std::invalid_argument("TiltKernel::longrange: negative c_m");
    TiltKernel k;
    k.kind = Kind::longrange;
    k.L = L;
    k.c_m = c_m;
    return k;
}

TiltKernel TiltKernel::bandwidth(int L, int p0, double amplitude) {
    if (L < 1) throw std::invalid_argument("TiltKernel::bandwidth: L must be >= 1");
    if (p0 < 1) throw std::invalid_argument("TiltKernel::bandwidth: p0 must be >= 1");
    if (amplitude < 0) throw std::invalid_argument("TiltKernel::bandwidth: negative amplitude");
    TiltKernel k;
    k.kind = Kind::bandwidth;
    k.L = L;
    k.p0 = p0;
    k.amplitude = amplitude;
    return k;
}

double TiltKernel::entry(int i, int j) const {
    if (i < 1 || i > L || j < 1 || j > L) throw std::invalid_argument("TiltKernel::entry: index out of [1, L]");
    if (i == j) return 0.0;
    int g = i > j ? i - j : j - i;
    if (kind == Kind::longrange)
        return c_m / (std::sqrt(static_cast<double>(L) * std::log(static_cast<double>(L))) *
                      std::sqrt(static_cast<double>(g)));
    return g == p0 ? amplitude / std::sqrt(static_cast<double>(L)) : 0.0;
}

KernelNorms kernel_norms(const TiltKernel& k) {
    KernelNorms n;
    if (k.kind == TiltKernel::Kind::longrange) {
        double denom = static_cast<double>(k.L) * std::log(static_cast<double>(k.L));
        n.frobenius_sq = 2.0 * k.c_m * k.c_m / denom * harmonic_pair_sum(k.L);
    } else {
        int pairs = k.L - k.p0;
        n.frobenius_sq = pairs > 0 ? 2.0 * pairs * k.amplitude * k.amplitude / k.L : 0.0;
    }
    n.operator_bound = std::sqrt(n.frobenius_sq);
    return n;
}

double amplitude_for_frobenius(int L, double target_frobenius_sq) {
    if (L < 2) throw std::invalid_argument("amplitude_for_frobenius: L must be >= 2");
    if (target_frobenius_sq < 0) throw std::invalid_argument("amplitude_for_frobenius: negative target");
    double denom = static_cast<double>(L) * std::log(static_cast<double>(L));
    return std::sqrt(target_frobenius_sq * denom / (2.0 * harmonic_pair_sum(L)));
}

double penalty(const TiltKernel& k, const std::vector<Point>& increments, int dim) {
    check_block(k, increments);
    double f = 0;
    for (int i = 1; i <= k.L; ++i)
        for (int j = i + 1; j <= k.L; ++j) {
            double m = k.entry(i, j);
            if (m == 0.0) continue;
            f += m * dot_dim(increments[static_cast<std::size_t>(i - 1)],
                             increments[static_cast<std::size_t>(j - 1)], dim);
        }
    return -2.0 * f;
}

double penalty_fft(const TiltKernel& k, const std::vector<Point>& increments, int dim) {
    if (k.kind != TiltKernel::Kind::longrange)
        throw std::invalid_argument("penalty_fft: longrange kernels only");
    check_block(k, increments);
    detail::FftEngine eng(detail::next_pow2(2 * static_cast<std::size_t>(k.L)));
    return penalty_fft_with(k, increments, dim, eng);
}

double penalty_screened(const TiltKernel& k, const std::vector<Point>& increments, int dim, int window) {
    check_block(k, increments);
    if (window < 1) throw std::invalid_argument("penalty_screened: window must be >= 1");
    double f = 0;
    int gmax = window < k.L - 1 ? window : k.L - 1;
    for (int g = 1; g <= gmax; ++g) {
        double m = k.entry(1, 1 + g);
        if (m == 0.0) continue;
        double cg = 0;
        for (int i = 0; i + g < k.L; ++i)
            cg += dot_dim(increments[static_cast<std::size_t>(i)], increments[static_cast<std::size_t>(i + g)], dim);
        f += m * cg;
    }
    return -2.0 * f;
}

double g_factor(const std::vector<double>& block_penalties) {
    double s = 0;
    for (double f : block_penalties)
        if (f > 0) s += f;
    return std::exp(-s);
}

BorneMEstimate borne_m_check(const TiltKernel& k, const WalkModel& my, double gamma, int samples,
                             std::uint64_t master_seed, unsigned workers) {
    if (gamma <= 0 || gamma >= 1) throw std::invalid_argument("borne_m_check: gamma in (0,1)");
    if (samples < 2) throw std::invalid_argument("borne_m_check: need samples >= 2");
    double factor = gamma / (1.0 - gamma);
    std::vector<double> s_plus(static_cast<std::size_t>(samples));

    unsigned hw = default_workers();
    unsigned nthreads = workers < hw ? workers : hw;
    if (nthreads < 1) nthreads = 1;
    if (nthreads > static_cast<unsigned>(samples)) nthreads = static_cast<unsigned>(samples);
    bool longrange = k.kind == TiltKernel::Kind::longrange;

    // Worker w handles samples w, w + nthreads, ...; the per-task seed stream
    // makes the result independent of nthreads. Each worker owns one FFT
    // engine so plans are built nthreads times, not `samples` times.
    std::mutex err_mutex;
    std::exception_ptr first_error;
    auto body = [&](unsigned w) {
        try {
            detail::FftEngine eng(detail::next_pow2(2 * static_cast<std::size_t>(k.L)));
            for (int i = static_cast<int>(w); i < samples; i += static_cast<int>(nthreads)) {
                RngStream rng(master_seed, static_cast<std::uint64_t>(i));
                Environment env = sample_path(my, k.L, rng);
                double f = longrange ? penalty_fft_with(k, env.increments, my.dim, eng)
                                     : penalty_screened(k, env.increments, my.dim, k.p0);
                s_plus[static_cast<std::size_t>(i)] = f > 0 ? factor * f : 0.0;
            }
        } catch (...) {
            std::lock_guard<std::mutex> lk(err_mutex);
            if (!first_error) first_error = std::current_exception();
        }
    };
    if (nthreads <= 1) {
        body(0);
    } else {
        std::vector<std::thread> pool;
        pool.reserve(nthreads);
        for (unsigned w = 0; w < nthreads; ++w) pool.emplace_back(body, w);
        for (auto& th : pool) th.join();
    }
    if (first_error) std::rethrow_exception(first_error);

    std::vector<double> vals(s_plus.size());
    for (std::size_t i = 0; i < s_plus.size(); ++i) vals[i] = std::exp(s_plus[i]);
    MeanStderr ms = mean_stderr(vals);

    BorneMEstimate est;
    est.mean = ms.mean;
    est.stderr_ = ms.stderr_;
    est.ci99_high = ms.mean + z_quantile_two_sided(0.99) * ms.stderr_;
    est.samples = samples;
    for (int j = 0; j <= 40; ++j) {
        double u = 0.05 * j;
        int count = 0;
        for (double s : s_plus)
            if (s >= u) ++count;
        est.tail_u.push_back(u);
        est.tail_prob.push_back(static_cast<double>(count) / samples);
    }
    return est;
}

}  // namespace rwpm
