#include <cmath>
#include <cstdint>
#include <string>
#include <unordered_map>
#include <vector>

#include "doctest.h"
#include "rwpm/pmf.hpp"
#include "rwpm/walk_model.hpp"

using namespace rwpm;

namespace {

// Brute-force n-step endpoint law by recursion over the support list.
// Independent of the convolution pipeline under test.
using Dist = std::unordered_map<std::uint64_t, double>;

void dfs_steps(const WalkModel& m, int depth, const Point& pos, double prob, Dist& out) {
    if (depth == 0) {
        out[pack_point(pos)] += prob;
        return;
    }
    for (const auto& [step, p] : m.support) dfs_steps(m, depth - 1, add(pos, step), prob * p, out);
}

Dist dfs_dist(const WalkModel& m, int n) {
    Dist out;
    dfs_steps(m, n, zero_point(), 1.0, out);
    return out;
}

// C(2n, n) / 4^n in long double: the central value of the per-coordinate
// lazy law after n steps (characteristic function cos^2(theta/2)).
double central_binomial_over_4n(int n) {
    long double v = 1.0L;
    for (int k = 1; k <= n; ++k) v *= static_cast<long double>(n + k) / (4.0L * k);
    return static_cast<double>(v);
}

}  // namespace

TEST_SUITE("walks") {

TEST_CASE("catalogue invariants") {
    for (std::string id : {"lazy1", "lazy2", "lazy3", "lazy4", "srw1", "srw2", "srw3", "srw4"}) {
        WalkModel m = model_by_id(id);
        CHECK_NOTHROW(validate_model(m));
        CHECK(m.name == id);
        int d = id.back() - '0';
        CHECK(m.dim == d);
        bool lazy = id[0] == 'l';
        double var = lazy ? 0.5 : 1.0 / d;
        for (int i = 0; i < d; ++i) {
            CHECK(m.covariance(i, i) == doctest::Approx(var).epsilon(1e-14));
            for (int j = 0; j < d; ++j)
                if (i != j) CHECK(m.covariance(i, j) == doctest::Approx(0.0).epsilon(1e-14));
        }
        CHECK(m.periodic == !lazy);
        if (lazy) {
            CHECK(m.product_form);
            CHECK(m.axis_radius == 1);
            REQUIRE(m.axis_pmf.size() == 3);
            CHECK(m.axis_pmf[0] == doctest::Approx(0.25).epsilon(1e-15));
            CHECK(m.axis_pmf[1] == doctest::Approx(0.50).epsilon(1e-15));
        }
        CHECK(m.support.size() == (lazy ? std::size_t(std::pow(3, d) + 0.5) : std::size_t(2 * d)));
    }
    CHECK_THROWS_AS(model_by_id("lazy5"), std::invalid_argument);
    CHECK_THROWS_AS(model_by_id(""), std::invalid_argument);
}

TEST_CASE("custom model validation rejects broken laws") {
    // Missing the mirror image of (1, 0, ...).
    std::vector<std::pair<Point, double>> bad = {{Point{1, 0, 0, 0}, 0.5}, {Point{0, 0, 0, 0}, 0.5}};
    CHECK_THROWS_AS(make_custom(1, bad), std::invalid_argument);
    std::vector<std::pair<Point, double>> neg = {
        {Point{1, 0, 0, 0}, 0.75}, {Point{-1, 0, 0, 0}, 0.75}, {Point{0, 0, 0, 0}, -0.5}};
    CHECK_THROWS_AS(make_custom(1, neg), std::invalid_argument);
    std::vector<std::pair<Point, double>> ok = {
        {Point{2, 0, 0, 0}, 0.25}, {Point{-2, 0, 0, 0}, 0.25}, {Point{0, 0, 0, 0}, 0.5}};
    WalkModel m = make_custom(1, ok, "stride2");
    CHECK(m.covariance(0, 0) == doctest::Approx(2.0).epsilon(1e-14));
}

TEST_CASE("n-step pmf matches path enumeration") {
    struct Case { const char* id; int n; };
    for (const Case& c : {Case{"lazy1", 8}, Case{"lazy2", 6}, Case{"lazy3", 4},
                          Case{"srw2", 6}, Case{"srw3", 5}}) {
        WalkModel m = model_by_id(c.id);
        Dist ref = dfs_dist(m, c.n);
        LatticePmf pmf = n_step_pmf(m, c.n);
        CHECK(pmf.total_mass() == doctest::Approx(1.0).epsilon(1e-12));
        // Every enumerated atom is reproduced...
        for (const auto& [key, p] : ref) {
            Point x = unpack_point(key);
            CHECK(pmf.at(x) == doctest::Approx(p).epsilon(1e-12));
        }
        // ...and the pipeline emits exactly the same support.
        std::size_t seen = 0;
        for_each_entry(pmf, 1u << 22, [&](const Point& x, double p) {
            if (p == 0.0) return;  // product tables can carry truncated-zero edge cells
            auto it = ref.find(pack_point(x));
            REQUIRE(it != ref.end());
            CHECK(p == doctest::Approx(it->second).epsilon(1e-12));
            ++seen;
        });
        CHECK(seen == ref.size());
    }
}

TEST_CASE("lazy central value has the binomial closed form") {
    WalkModel m1 = model_by_id("lazy1");
    for (int n : {1, 2, 5, 10, 20}) {
        LatticePmf pmf = n_step_pmf(m1, n);
        CHECK(pmf.at(zero_point()) == doctest::Approx(central_binomial_over_4n(n)).epsilon(1e-13));
    }
    // Product form: the d = 3 central value is the cube of the axis value.
    WalkModel m3 = model_by_id("lazy3");
    for (int n : {3, 12}) {
        double axis = central_binomial_over_4n(n);
        CHECK(n_step_pmf(m3, n).at(zero_point()) ==
              doctest::Approx(axis * axis * axis).epsilon(1e-13));
    }
}

TEST_CASE("difference model composes supports and covariances") {
    WalkModel lz = model_by_id("lazy3");
    WalkModel diff = difference_model(lz, lz);
    CHECK(diff.dim == 3);
    CHECK(diff.product_form);
    CHECK(diff.axis_radius == 2);
    CHECK_NOTHROW(validate_model(diff));
    for (int i = 0; i < 3; ++i) CHECK(diff.covariance(i, i) == doctest::Approx(1.0).epsilon(1e-14));

    WalkModel sw = model_by_id("srw3");
    WalkModel dsw = difference_model(sw, sw);
    // {0} + 6 double steps + 12 mixed corners.
    CHECK(dsw.support.size() == 19);
    CHECK_FALSE(dsw.product_form);
    CHECK_NOTHROW(validate_model(dsw));
    CHECK_THROWS_AS(difference_model(model_by_id("lazy2"), lz), std::invalid_argument);
}

TEST_CASE("axis table cache matches one-shot tables") {
    WalkModel m = model_by_id("lazy3");
    AxisTableCache cache(m);
    for (int n : {1, 4, 9}) {
        const AxisTable& t = cache.table(n);
        LatticePmf pmf = n_step_pmf(m, n);
        CHECK(t.n == n);
        for (int x = -n; x <= n; ++x) CHECK(t.at(x) == doctest::Approx(pmf.axis.at(x)).epsilon(1e-14));
        CHECK(t.sum() == doctest::Approx(1.0).epsilon(1e-13));
    }
    // Growing the cache must not disturb previously returned tables.
    const AxisTable& t4 = cache.table(4);
    double v = t4.at(2);
    cache.table(40);
    CHECK(t4.at(2) == v);
}

TEST_CASE("gaussian estimate tracks the exact law") {
    WalkModel m = model_by_id("lazy3");
    auto rel_gap = [&](int n, const Point& x) {
        double exact = n_step_pmf(m, n).at(x);
        REQUIRE(exact > 0);
        return std::fabs(llt_estimate(m, n, x) / exact - 1.0);
    };
    double at40 = rel_gap(40, zero_point());
    double at400 = rel_gap(400, zero_point());
    CHECK(at40 < 0.1);
    CHECK(at400 < 0.01);
    CHECK(at400 < at40);
    CHECK(rel_gap(400, Point{10, 4, 2, 0}) < 0.05);
}

TEST_CASE("gaussian estimate respects periodicity") {
    WalkModel sw = model_by_id("srw3");
    // Odd-parity (point, n) combinations are unreachable and estimate to zero.
    CHECK(llt_estimate(sw, 401, zero_point()) == 0.0);
    CHECK(llt_estimate(sw, 400, Point{1, 0, 0, 0}) == 0.0);
    CHECK(llt_estimate(sw, 400, zero_point()) > 0.0);
    // Reachable points carry the doubled lattice constant.
    double est = llt_estimate(sw, 400, zero_point());
    double closed = 2.0 * std::pow(3.0 / (2.0 * M_PI * 400.0), 1.5);
    CHECK(est == doctest::Approx(closed).epsilon(1e-12));
}

}  // TEST_SUITE
