#pragma once

#include <string>
#include <utility>
#include <vector>

#include "rwpm/geometry.hpp"

namespace rwpm {

// Symmetric finite-support increment law on Z^d with its covariance matrix.
// Invariants (checked by validate()):
//   - probabilities sum to 1 within 1e-12, all >= 0;
//   - for every (x, p) in the support, (-x, p) is present (hence zero mean);
//   - covariance == sum p(x) x x^T within 1e-12, nonsingular;
//   - support finite (bounded increments).
struct WalkModel {
    int dim = 0;
    std::vector<std::pair<Point, double>> support;
    SmallMat covariance;
    bool periodic = false;  // true for the nearest-neighbour walk: p_n lives on a parity sublattice
    std::string name;

    // Set when the joint law factorizes over coordinates with the same 1-d
    // marginal on [-axis_radius, axis_radius]. Enables 1-d table pipelines.
    bool product_form = false;
    std::vector<double> axis_pmf;  // index i <-> increment i - axis_radius
    int axis_radius = 0;

    double max_step_norm() const {
        int m = 0;
        for (const auto& [x, p] : support) {
            (void)p;
            int v = linf_norm(x);
            if (v > m) m = v;
        }
        return m;
    }
};

// Validates the WalkModel invariants; throws std::invalid_argument with a
// description of the first violated one.
void validate_model(const WalkModel& m);

// Per-coordinate lazy walk: each coordinate independently 0 w.p. 1/2 and +-1
// w.p. 1/4. Aperiodic; covariance (1/2) I.
WalkModel make_lazy_product(int dim);

// Nearest-neighbour walk: +-e_i w.p. 1/(2d). Periodic; covariance (1/d) I.
WalkModel make_simple_walk(int dim);

// Custom law from an explicit support list; validated on construction.
WalkModel make_custom(int dim, const std::vector<std::pair<Point, double>>& support,
                      const std::string& name = "custom");

// Catalogue lookup by string id: "lazy1".."lazy4", "srw1".."srw4".
// Throws std::invalid_argument for unknown ids.
WalkModel model_by_id(const std::string& id);

// Law of X - Y for independent X ~ mx, Y ~ my: support is mx convolved with
// the reflection of my; covariance is the sum. Dimension mismatch throws.
// Product form is preserved when both inputs share it.
WalkModel difference_model(const WalkModel& mx, const WalkModel& my);

}  // namespace rwpm
