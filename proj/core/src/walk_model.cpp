#include "rwpm/walk_model.hpp"

#include <cmath>
#include <cstdlib>
#include <stdexcept>
#include <unordered_map>

namespace rwpm {

namespace {

int coord_sum(const Point& p) {
    int s = 0;
    for (int c : p) s += c;
    return s;
}

// Parity classification of the support: 0 = every step has even coordinate
// sum, 1 = every step odd, -1 = mixed. Walks in class 0 stay on the even
// sublattice; class 1 alternates sublattices with n. Both have their local
// density doubled on the live sublattice.
int support_parity(const std::vector<std::pair<Point, double>>& support) {
    bool all_even = true, all_odd = true;
    for (const auto& [x, p] : support) {
        (void)p;
        if (std::abs(coord_sum(x)) % 2 == 0)
            all_odd = false;
        else
            all_even = false;
    }
    if (all_even) return 0;
    if (all_odd) return 1;
    return -1;
}

SmallMat covariance_of(int dim, const std::vector<std::pair<Point, double>>& support) {
    SmallMat c;
    c.dim = dim;
    for (const auto& [x, p] : support)
        for (int i = 0; i < dim; ++i)
            for (int j = 0; j < dim; ++j) c.a[i][j] += p * x[i] * x[j];
    return c;
}

}  // namespace

void validate_model(const WalkModel& m) {
    if (m.dim < 1 || m.dim > kMaxDim) throw std::invalid_argument("walk model: dimension out of range");
    if (m.support.empty()) throw std::invalid_argument("walk model: empty support");
    double mass = 0;
    std::unordered_map<std::uint64_t, double> by_point;
    for (const auto& [x, p] : m.support) {
        if (p < 0) throw std::invalid_argument("walk model: negative probability");
        for (int c = m.dim; c < kMaxDim; ++c)
            if (x[c] != 0) throw std::invalid_argument("walk model: nonzero coordinate beyond dim");
        mass += p;
        by_point[pack_point(x)] += p;
    }
    if (std::fabs(mass - 1.0) > 1e-12) throw std::invalid_argument("walk model: probabilities do not sum to 1");
    for (const auto& [k, p] : by_point) {
        auto it = by_point.find(pack_point(negate(unpack_point(k))));
        if (it == by_point.end() || std::fabs(it->second - p) > 1e-12)
            throw std::invalid_argument("walk model: support not reflection symmetric");
    }
    SmallMat c = covariance_of(m.dim, m.support);
    for (int i = 0; i < m.dim; ++i)
        for (int j = 0; j < m.dim; ++j)
            if (std::fabs(c.a[i][j] - m.covariance.a[i][j]) > 1e-12)
                throw std::invalid_argument("walk model: covariance does not match support");
    if (!is_spd(m.covariance)) throw std::invalid_argument("walk model: covariance is singular");
    if (m.product_form) {
        if (m.axis_radius < 1 || m.axis_pmf.size() != static_cast<std::size_t>(2 * m.axis_radius + 1))
            throw std::invalid_argument("walk model: axis table size mismatch");
        double s = 0;
        for (double e : m.axis_pmf) s += e;
        if (std::fabs(s - 1.0) > 1e-12) throw std::invalid_argument("walk model: axis pmf does not sum to 1");
    }
}

WalkModel make_lazy_product(int dim) {
    if (dim < 1 || dim > kMaxDim) throw std::invalid_argument("make_lazy_product: dimension out of range");
    WalkModel m;
    m.dim = dim;
    m.name = "lazy" + std::to_string(dim);
    m.product_form = true;
    m.axis_pmf = {0.25, 0.5, 0.25};
    m.axis_radius = 1;
    m.periodic = false;
    m.covariance = SmallMat::identity(dim, 0.5);
    // Enumerate {-1,0,1}^dim.
    int total = 1;
    for (int i = 0; i < dim; ++i) total *= 3;
    for (int e = 0; e < total; ++e) {
        Point x = zero_point();
        double p = 1.0;
        int rem = e;
        for (int i = 0; i < dim; ++i) {
            int digit = rem % 3;
            rem /= 3;
            x[i] = digit - 1;
            p *= m.axis_pmf[static_cast<std::size_t>(digit)];
        }
        m.support.emplace_back(x, p);
    }
    validate_model(m);
    return m;
}

WalkModel make_simple_walk(int dim) {
    if (dim < 1 || dim > kMaxDim) throw std::invalid_argument("make_simple_walk: dimension out of range");
    WalkModel m;
    m.dim = dim;
    m.name = "srw" + std::to_string(dim);
    m.periodic = true;
    m.covariance = SmallMat::identity(dim, 1.0 / dim);
    double p = 1.0 / (2 * dim);
    for (int i = 0; i < dim; ++i) {
        Point x = zero_point();
        x[i] = 1;
        m.support.emplace_back(x, p);
        x[i] = -1;
        m.support.emplace_back(x, p);
    }
    validate_model(m);
    return m;
}

WalkModel make_custom(int dim, const std::vector<std::pair<Point, double>>& support,
                      const std::string& name) {
    WalkModel m;
    m.dim = dim;
    m.name = name;
    m.support = support;
    m.covariance = covariance_of(dim, support);
    m.periodic = support_parity(support) >= 0;
    validate_model(m);
    return m;
}

WalkModel model_by_id(const std::string& id) {
    if (id.size() == 5 && id.compare(0, 4, "lazy") == 0 && id[4] >= '1' && id[4] <= '4')
        return make_lazy_product(id[4] - '0');
    if (id.size() == 4 && id.compare(0, 3, "srw") == 0 && id[3] >= '1' && id[3] <= '4')
        return make_simple_walk(id[3] - '0');
    throw std::invalid_argument("model_by_id: unknown id '" + id + "'");
}

WalkModel difference_model(const WalkModel& mx, const WalkModel& my) {
    if (mx.dim != my.dim) throw std::invalid_argument("difference_model: dimension mismatch");
    WalkModel m;
    m.dim = mx.dim;
    m.name = "diff_" + mx.name + "_" + my.name;
    std::unordered_map<std::uint64_t, double> acc;
    for (const auto& [a, pa] : mx.support)
        for (const auto& [b, pb] : my.support) acc[pack_point(sub(a, b))] += pa * pb;
    for (const auto& [k, p] : acc) m.support.emplace_back(unpack_point(k), p);
    m.covariance = mat_add(mx.covariance, my.covariance);
    m.periodic = support_parity(m.support) >= 0;
    if (mx.product_form && my.product_form) {
        m.product_form = true;
        m.axis_radius = mx.axis_radius + my.axis_radius;
        m.axis_pmf.assign(static_cast<std::size_t>(2 * m.axis_radius + 1), 0.0);
        for (std::size_t i = 0; i < mx.axis_pmf.size(); ++i)
            for (std::size_t j = 0; j < my.axis_pmf.size(); ++j)
                m.axis_pmf[i + my.axis_pmf.size() - 1 - j] += mx.axis_pmf[i] * my.axis_pmf[j];
    }
    validate_model(m);
    return m;
}

}  // namespace rwpm
