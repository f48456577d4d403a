#include "rwpm/pmf.hpp"

#include <cmath>
#include <stdexcept>

namespace rwpm {

namespace {

int coord_sum(const Point& p) {
    int s = 0;
    for (int c : p) s += c;
    return s;
}

// -1 mixed, 0 all-even, 1 all-odd coordinate sums (see walk_model.cpp).
int support_parity(const WalkModel& m) {
    bool all_even = true, all_odd = true;
    for (const auto& [x, p] : m.support) {
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

void trim_table(AxisTable& t) {
    std::size_t lo = 0, hi = t.v.size();
    while (lo + 1 < hi && t.v[lo] < kAxisTruncation) ++lo;
    while (hi > lo + 1 && t.v[hi - 1] < kAxisTruncation) --hi;
    if (lo > 0 || hi < t.v.size()) {
        t.v = std::vector<double>(t.v.begin() + static_cast<std::ptrdiff_t>(lo),
                                  t.v.begin() + static_cast<std::ptrdiff_t>(hi));
        t.radius -= static_cast<int>(lo);
    }
}

void enumerate_product(const AxisTable& axis, int dim, Point& x, int coord, double prob,
                       const std::function<void(const Point&, double)>& fn) {
    if (coord == dim) {
        fn(x, prob);
        return;
    }
    for (std::size_t i = 0; i < axis.v.size(); ++i) {
        if (axis.v[i] == 0.0) continue;
        x[static_cast<std::size_t>(coord)] = static_cast<int>(i) - axis.radius;
        enumerate_product(axis, dim, x, coord + 1, prob * axis.v[i], fn);
    }
    x[static_cast<std::size_t>(coord)] = 0;
}

}  // namespace

AxisTable axis_convolve(const AxisTable& t, const std::vector<double>& kernel, int kernel_radius) {
    if (kernel.size() != static_cast<std::size_t>(2 * kernel_radius + 1))
        throw std::invalid_argument("axis_convolve: kernel size mismatch");
    AxisTable out;
    out.n = t.n + 1;
    out.radius = t.radius + kernel_radius;
    out.v.assign(t.v.size() + kernel.size() - 1, 0.0);
    for (std::size_t i = 0; i < t.v.size(); ++i) {
        if (t.v[i] == 0.0) continue;
        for (std::size_t j = 0; j < kernel.size(); ++j) out.v[i + j] += t.v[i] * kernel[j];
    }
    trim_table(out);
    return out;
}

AxisTable axis_delta() {
    AxisTable t;
    t.n = 0;
    t.radius = 0;
    t.v = {1.0};
    return t;
}

double LatticePmf::at(const Point& x) const {
    if (product_form) {
        double p = 1.0;
        for (int i = 0; i < dim; ++i) {
            p *= axis.at(x[static_cast<std::size_t>(i)]);
            if (p == 0.0) return 0.0;
        }
        return p;
    }
    auto it = entries.find(pack_point(x));
    return it == entries.end() ? 0.0 : it->second;
}

double LatticePmf::total_mass() const {
    if (product_form) {
        double s = axis.sum();
        double m = 1.0;
        for (int i = 0; i < dim; ++i) m *= s;
        return m;
    }
    double m = 0;
    for (const auto& [k, p] : entries) {
        (void)k;
        m += p;
    }
    return m;
}

std::size_t LatticePmf::stored_size() const {
    return product_form ? axis.v.size() : entries.size();
}

LatticePmf n_step_pmf(const WalkModel& model, int n, std::size_t sparse_entry_cap) {
    if (n < 0) throw std::invalid_argument("n_step_pmf: negative step count");
    LatticePmf pmf;
    pmf.dim = model.dim;
    pmf.n = n;
    pmf.periodic = model.periodic;
    pmf.product_form = model.product_form;
    if (model.product_form) {
        AxisTable t = axis_delta();
        for (int s = 0; s < n; ++s) t = axis_convolve(t, model.axis_pmf, model.axis_radius);
        pmf.axis = std::move(t);
        return pmf;
    }
    std::unordered_map<std::uint64_t, double> cur;
    cur[pack_point(zero_point())] = 1.0;
    for (int s = 0; s < n; ++s) {
        std::unordered_map<std::uint64_t, double> next;
        next.reserve(cur.size() * 2);
        for (const auto& [k, p] : cur) {
            Point base = unpack_point(k);
            for (const auto& [step, ps] : model.support) next[pack_point(add(base, step))] += p * ps;
        }
        if (next.size() > sparse_entry_cap)
            throw std::runtime_error("n_step_pmf: sparse support exceeds entry cap at n=" + std::to_string(s + 1));
        cur = std::move(next);
    }
    pmf.entries = std::move(cur);
    return pmf;
}

void for_each_entry(const LatticePmf& pmf, std::size_t cap,
                    const std::function<void(const Point&, double)>& fn) {
    if (pmf.product_form) {
        double width = static_cast<double>(pmf.axis.v.size());
        double total = 1;
        for (int i = 0; i < pmf.dim; ++i) total *= width;
        if (total > static_cast<double>(cap)) throw std::runtime_error("for_each_entry: product support exceeds cap");
        Point x = zero_point();
        enumerate_product(pmf.axis, pmf.dim, x, 0, 1.0, fn);
        return;
    }
    if (pmf.entries.size() > cap) throw std::runtime_error("for_each_entry: sparse support exceeds cap");
    for (const auto& [k, p] : pmf.entries) fn(unpack_point(k), p);
}

double llt_estimate(const WalkModel& model, int n, const Point& x) {
    if (n < 1) throw std::invalid_argument("llt_estimate: n must be >= 1");
    int parity = support_parity(model);
    if (parity == 1 && std::abs(coord_sum(x) - n) % 2 == 1) return 0.0;
    if (parity == 0 && std::abs(coord_sum(x)) % 2 == 1) return 0.0;
    SmallMat inv = inverse(model.covariance);
    std::array<double, kMaxDim> xd{};
    for (int i = 0; i < model.dim; ++i) xd[static_cast<std::size_t>(i)] = x[static_cast<std::size_t>(i)];
    std::array<double, kMaxDim> sx = mat_vec(inv, xd);
    double quad = 0;
    for (int i = 0; i < model.dim; ++i) quad += xd[static_cast<std::size_t>(i)] * sx[static_cast<std::size_t>(i)];
    double det = determinant(model.covariance);
    double dens = std::pow(2.0 * M_PI * n, -0.5 * model.dim) / std::sqrt(det) * std::exp(-quad / (2.0 * n));
    if (parity >= 0) dens *= 2.0;
    return dens;
}

AxisTableCache::AxisTableCache(const WalkModel& model) : model_(model) {
    if (!model.product_form) throw std::invalid_argument("AxisTableCache: model is not product form");
    tables_.push_back(axis_delta());
}

const AxisTable& AxisTableCache::table(int n) {
    if (n < 0) throw std::invalid_argument("AxisTableCache::table: negative n");
    while (static_cast<int>(tables_.size()) <= n)
        tables_.push_back(axis_convolve(tables_.back(), model_.axis_pmf, model_.axis_radius));
    return tables_[static_cast<std::size_t>(n)];
}

}  // namespace rwpm
