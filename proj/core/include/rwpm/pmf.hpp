#pragma once

#include <cstdint>
#include <deque>
#include <functional>
#include <memory>
#include <unordered_map>
#include <vector>

#include "rwpm/walk_model.hpp"

namespace rwpm {

// Symmetric 1-d probability table on [-radius, radius], index i <-> point
// i - radius. Entries below kAxisTruncation are dropped from the ends; the
// dropped mass is ~1e-300 * width, irrelevant at our 1e-12 targets.
inline constexpr double kAxisTruncation = 1e-300;

struct AxisTable {
    int n = 0;       // step count
    int radius = 0;  // table half-width
    std::vector<double> v;

    double at(int x) const {
        int i = x + radius;
        if (i < 0 || i >= static_cast<int>(v.size())) return 0.0;
        return v[static_cast<std::size_t>(i)];
    }
    double sum() const {
        double s = 0;
        for (double e : v) s += e;
        return s;
    }
};

// One convolution step with a 1-d kernel (kernel.radius small). Truncates at
// kAxisTruncation.
AxisTable axis_convolve(const AxisTable& t, const std::vector<double>& kernel, int kernel_radius);

AxisTable axis_delta();  // n = 0: point mass at 0

// Exact n-step distribution of `model`. Product-form models carry only the
// shared 1-d table (point queries take a product; the d-dimensional support is
// never materialized). Other models hold a sparse map, built by direct
// convolution with a cost guard.
struct LatticePmf {
    int dim = 0;
    int n = 0;
    bool product_form = false;
    AxisTable axis;                                   // product route
    std::unordered_map<std::uint64_t, double> entries;  // sparse route
    bool periodic = false;

    double at(const Point& x) const;
    double total_mass() const;
    // Number of stored entries (product route: the 1-d table length).
    std::size_t stored_size() const;
};

// Exact n-fold convolution of the one-step law. n = 0 returns the point mass
// at the origin. Sparse route throws std::runtime_error when the projected
// support exceeds `sparse_entry_cap` (default 2^22).
LatticePmf n_step_pmf(const WalkModel& model, int n, std::size_t sparse_entry_cap = (1u << 22));

// Iterates (point, probability) over the full support; product-form tables
// materialize lazily through the callback. Throws std::runtime_error if the
// support size exceeds `cap` (guards the d = 3, large-n product case).
void for_each_entry(const LatticePmf& pmf, std::size_t cap,
                    const std::function<void(const Point&, double)>& fn);

// Gaussian local-limit estimate (2 pi n)^{-d/2} det(Sigma)^{-1/2}
// exp(-x . Sigma^{-1} x / (2n)), doubled and parity-gated when the model is
// periodic (odd-parity points get 0).
double llt_estimate(const WalkModel& model, int n, const Point& x);

// Shared cache of 1-d tables per (model name, n); thread-safe reads after a
// warm-up call. Table n is built incrementally from table n-1.
class AxisTableCache {
public:
    explicit AxisTableCache(const WalkModel& model);
    const AxisTable& table(int n);  // builds up to n on first use
    const WalkModel& model() const { return model_; }

private:
    WalkModel model_;
    std::deque<AxisTable> tables_;  // deque: growth never invalidates handed-out refs
};

}  // namespace rwpm
