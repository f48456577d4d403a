#pragma once

#include <cmath>
#include <cstddef>
#include <stdexcept>
#include <vector>

namespace rwpm {

// Mean / standard error over a fixed sample vector. Summation order is the
// vector order, so results are deterministic whenever the vector is filled by
// task index (see parallel.hpp).
struct MeanStderr {
    double mean = 0;
    double stderr_ = 0;  // standard error of the mean
    std::size_t n = 0;
};

inline MeanStderr mean_stderr(const std::vector<double>& xs) {
    MeanStderr r;
    r.n = xs.size();
    if (r.n == 0) return r;
    double s = 0;
    for (double x : xs) s += x;
    r.mean = s / static_cast<double>(r.n);
    if (r.n < 2) return r;
    double ss = 0;
    for (double x : xs) {
        double d = x - r.mean;
        ss += d * d;
    }
    double var = ss / static_cast<double>(r.n - 1);
    r.stderr_ = std::sqrt(var / static_cast<double>(r.n));
    return r;
}

// Least-squares slope of y against x.
inline double ls_slope(const std::vector<double>& x, const std::vector<double>& y) {
    if (x.size() != y.size() || x.size() < 2) throw std::invalid_argument("ls_slope: need >= 2 points");
    double mx = 0, my = 0;
    for (std::size_t i = 0; i < x.size(); ++i) { mx += x[i]; my += y[i]; }
    mx /= static_cast<double>(x.size());
    my /= static_cast<double>(x.size());
    double num = 0, den = 0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        num += (x[i] - mx) * (y[i] - my);
        den += (x[i] - mx) * (x[i] - mx);
    }
    if (den == 0) throw std::invalid_argument("ls_slope: degenerate abscissa");
    return num / den;
}

// Two-sided z quantile for the usual confidence levels.
inline double z_quantile_two_sided(double level) {
    if (level == 0.99) return 2.5758293035489004;
    if (level == 0.95) return 1.959963984540054;
    if (level == 0.999) return 3.2905267314918945;
    throw std::invalid_argument("z_quantile_two_sided: unsupported level");
}

// Half-normal scaled by 1/sqrt(2*pi): CDF of |Z|/sqrt(2*pi) at u >= 0.
inline double halfnormal_scaled_cdf(double u) {
    if (u <= 0) return 0.0;
    // P(|Z| <= sqrt(2*pi) u) = erf(sqrt(pi) u)
    return std::erf(std::sqrt(M_PI) * u);
}

// Kolmogorov-Smirnov distance between an atomic law (atoms[i] at points[i],
// points strictly increasing) and a continuous CDF evaluated by `cdf`.
template <typename Cdf>
double ks_distance_atomic_vs_cdf(const std::vector<double>& points,
                                 const std::vector<double>& atoms, Cdf&& cdf) {
    if (points.size() != atoms.size()) throw std::invalid_argument("ks: size mismatch");
    double acc = 0, d = 0;
    for (std::size_t i = 0; i < points.size(); ++i) {
        double g = cdf(points[i]);
        double below = std::fabs(acc - g);        // left limit of the atomic CDF
        acc += atoms[i];
        double above = std::fabs(acc - g);        // right value
        if (below > d) d = below;
        if (above > d) d = above;
    }
    // Residual mass beyond the last tabulated atom also bounds the gap at +inf.
    double tail = std::fabs(1.0 - acc);
    if (tail > d) d = tail;
    return d;
}

}  // namespace rwpm
