#include "rwpm/tail_sums.hpp"

#include <array>
#include <cmath>
#include <stdexcept>

namespace rwpm {

namespace {

// Euler-Maclaurin for sum_{n >= A} f(n) with f smooth and decaying:
//   integral_A^inf f + f(A)/2 - f'(A)/12 + f'''(A)/720 - f'''''(A)/30240
// Error is O(f^(7)(A)), driven below 1e-16 relative by pushing A out first.

double powerlaw_em_from(double s, double A) {
    double integral = std::pow(A, 1.0 - s) / (s - 1.0);
    double f0 = std::pow(A, -s);
    double d1 = -s * std::pow(A, -s - 1.0);
    double d3 = -s * (s + 1.0) * (s + 2.0) * std::pow(A, -s - 3.0);
    double d5 = -s * (s + 1.0) * (s + 2.0) * (s + 3.0) * (s + 4.0) * std::pow(A, -s - 5.0);
    return integral + 0.5 * f0 - d1 / 12.0 + d3 / 720.0 - d5 / 30240.0;
}

// integral_a^inf x^{-t} e^{-f x} dx for half-integer t, by downward reduction
//   I(t) = (a^{1-t} e^{-f a} - f I(t-1)) / (t - 1),   I(1/2) = sqrt(pi/f) erfc(sqrt(f a)).
// Stable because the reduction is only entered once f*a = O(10) (see damped_tail).
double damped_integral_halfint(double t, double f, double a) {
    int steps = static_cast<int>(std::lround(t - 0.5));
    double I = std::sqrt(M_PI / f) * std::erfc(std::sqrt(f * a));
    double efa = std::exp(-f * a);
    for (int k = 1; k <= steps; ++k) {
        double tk = 0.5 + k;
        I = (std::pow(a, 1.0 - tk) * efa - f * I) / (tk - 1.0);
    }
    return I;
}

// Derivatives of f(x) = x^{-s} e^{-f x}: f^(k)(x) = e^{-f x} sum_j c[k][j] x^{-s-j}.
double damped_em_from(double s, double f, double A) {
    constexpr int kOrder = 5;
    std::array<std::array<double, kOrder + 2>, kOrder + 1> c{};
    c[0][0] = 1.0;
    for (int k = 0; k < kOrder; ++k)
        for (int j = 0; j <= k; ++j) {
            c[static_cast<std::size_t>(k + 1)][static_cast<std::size_t>(j + 1)] -=
                (s + j) * c[static_cast<std::size_t>(k)][static_cast<std::size_t>(j)];
            c[static_cast<std::size_t>(k + 1)][static_cast<std::size_t>(j)] -=
                f * c[static_cast<std::size_t>(k)][static_cast<std::size_t>(j)];
        }
    auto deriv = [&](int k) {
        double v = 0;
        for (int j = k; j >= 0; --j)
            v += c[static_cast<std::size_t>(k)][static_cast<std::size_t>(j)] * std::pow(A, -s - j);
        return v * std::exp(-f * A);
    };
    double integral = damped_integral_halfint(s, f, A);
    return integral + 0.5 * deriv(0) - deriv(1) / 12.0 + deriv(3) / 720.0 - deriv(5) / 30240.0;
}

bool is_half_integer(double s) {
    double twice = 2.0 * s;
    return std::fabs(twice - std::lround(twice)) < 1e-12 && std::lround(twice) % 2 != 0;
}

}  // namespace

double powerlaw_tail(double s, double m) {
    if (s <= 1.0) throw std::invalid_argument("powerlaw_tail: requires s > 1");
    if (m < 1.0) throw std::invalid_argument("powerlaw_tail: requires m >= 1");
    double a = std::floor(m) + 1.0;
    double A = a;
    if (A < 32.0) A = 32.0;
    if (A < std::ceil(10.0 * s)) A = std::ceil(10.0 * s);
    double sum = 0;
    for (double n = a; n < A; n += 1.0) sum += std::pow(n, -s);
    return sum + powerlaw_em_from(s, A);
}

double zeta_sum(double s) {
    if (s <= 1.0) throw std::invalid_argument("zeta_sum: requires s > 1");
    double sum = 0;
    for (int n = 1; n <= 64; ++n) sum += std::pow(n, -s);
    return sum + powerlaw_tail(s, 64.0);
}

double damped_tail(double s, double f, double m) {
    if (s <= 1.0) throw std::invalid_argument("damped_tail: requires s > 1");
    if (m < 1.0) throw std::invalid_argument("damped_tail: requires m >= 1");
    if (f < 0.0 || !std::isfinite(f)) throw std::invalid_argument("damped_tail: requires f >= 0");
    if (f == 0.0) return powerlaw_tail(s, m);
    double a = std::floor(m) + 1.0;
    if (f >= 0.09) {
        // Damping dominates: the series converges geometrically, sum it out.
        double sum = 0;
        for (double n = a;; n += 1.0) {
            double term = std::pow(n, -s) * std::exp(-f * n);
            sum += term;
            if (term <= sum * 1e-17) break;
        }
        return sum;
    }
    if (!is_half_integer(s))
        throw std::invalid_argument("damped_tail: damped integral needs half-integer s when 0 < f < 0.09");
    // Advance explicitly until the local log-derivative s/n + f is small, so the
    // Euler-Maclaurin remainder and the erfc reduction are both well conditioned.
    double sum = 0;
    double n = a;
    while (s / n + f > 0.1) {
        sum += std::pow(n, -s) * std::exp(-f * n);
        n += 1.0;
    }
    return sum + damped_em_from(s, f, n);
}

double damped_tail_32(double f, double m) { return damped_tail(1.5, f, m); }

}  // namespace rwpm
