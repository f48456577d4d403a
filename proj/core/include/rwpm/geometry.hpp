#pragma once

#include <array>
#include <cstdint>
#include <cstdlib>
#include <stdexcept>

namespace rwpm {

// Hard upper bound on lattice dimension; the catalogue covers d in {1,2,3,4}.
inline constexpr int kMaxDim = 4;

// Lattice point. Coordinates beyond `dim` of the owning object must be zero so
// equality and hashing work on the raw array.
using Point = std::array<int, kMaxDim>;

inline Point zero_point() { return Point{0, 0, 0, 0}; }

inline Point negate(const Point& p) {
    return Point{-p[0], -p[1], -p[2], -p[3]};
}

inline Point add(const Point& a, const Point& b) {
    return Point{a[0] + b[0], a[1] + b[1], a[2] + b[2], a[3] + b[3]};
}

inline Point sub(const Point& a, const Point& b) {
    return Point{a[0] - b[0], a[1] - b[1], a[2] - b[2], a[3] - b[3]};
}

inline long norm2(const Point& p) {
    long s = 0;
    for (int c : p) s += static_cast<long>(c) * c;
    return s;
}

inline int linf_norm(const Point& p) {
    int m = 0;
    for (int c : p) m = std::abs(c) > m ? std::abs(c) : m;
    return m;
}

// Packs a point into a 64-bit key (16 bits per coordinate, biased).
// Only valid for |coordinate| < 32768; sparse tables enforce this bound.
inline std::uint64_t pack_point(const Point& p) {
    std::uint64_t k = 0;
    for (int c = 0; c < kMaxDim; ++c) {
        int v = p[c];
        if (v <= -32768 || v >= 32768) throw std::overflow_error("pack_point: coordinate out of range");
        k = (k << 16) | static_cast<std::uint16_t>(v + 32768);
    }
    return k;
}

inline Point unpack_point(std::uint64_t k) {
    Point p{};
    for (int c = kMaxDim - 1; c >= 0; --c) {
        p[c] = static_cast<int>(k & 0xFFFF) - 32768;
        k >>= 16;
    }
    return p;
}

// Dense symmetric d x d matrix, d <= 4. Plain storage so public headers carry
// no linear-algebra dependency.
struct SmallMat {
    int dim = 0;
    std::array<std::array<double, kMaxDim>, kMaxDim> a{};

    double& operator()(int i, int j) { return a[i][j]; }
    double operator()(int i, int j) const { return a[i][j]; }

    static SmallMat identity(int d, double scale = 1.0) {
        SmallMat m;
        m.dim = d;
        for (int i = 0; i < d; ++i) m.a[i][i] = scale;
        return m;
    }
    double trace() const {
        double t = 0;
        for (int i = 0; i < dim; ++i) t += a[i][i];
        return t;
    }
};

// Implemented in small_linalg.cpp. Throw std::invalid_argument on singular or
// non-positive-definite input where the operation requires it.
double determinant(const SmallMat& m);
SmallMat inverse(const SmallMat& m);
SmallMat mat_add(const SmallMat& x, const SmallMat& y);
// x * v restricted to dim coordinates.
std::array<double, kMaxDim> mat_vec(const SmallMat& m, const std::array<double, kMaxDim>& v);
bool is_spd(const SmallMat& m);

}  // namespace rwpm
