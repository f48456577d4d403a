#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <vector>

#include "doctest.h"
#include "rwpm/renewal.hpp"
#include "rwpm/walk_model.hpp"
#include "test_util.hpp"

using namespace rwpm;
using rwpm_test::law3;
using rwpm_test::scratch_dir;

namespace {

// Closed 2n-step walk count of the d = 3 nearest-neighbour walk by direct
// recursion; P(X_n = Y_n) for the srw pair equals count(2n) / 6^{2n}.
long closed_walk_count(int steps, int x, int y, int z) {
    if (steps == 0) return x == 0 && y == 0 && z == 0 ? 1 : 0;
    return closed_walk_count(steps - 1, x + 1, y, z) + closed_walk_count(steps - 1, x - 1, y, z) +
           closed_walk_count(steps - 1, x, y + 1, z) + closed_walk_count(steps - 1, x, y - 1, z) +
           closed_walk_count(steps - 1, x, y, z + 1) + closed_walk_count(steps - 1, x, y, z - 1);
}

// C(4n, 2n) / 16^n in long double: the 2-radius binomial axis law of the
// lazy-pair difference walk at the origin after n steps.
double diff_axis_central(int n) {
    long double v = 1.0L;
    for (int k = 1; k <= 2 * n; ++k) v *= static_cast<long double>(2 * n + k) / (4.0L * k);
    return static_cast<double>(v);
}

}  // namespace

TEST_SUITE("renewal") {

TEST_CASE("lazy pair return probabilities have the binomial closed form") {
    const RenewalLaw& law = law3();
    CHECK(law.dim == 3);
    for (int n : {1, 2, 3, 5, 10, 30}) {
        double axis = diff_axis_central(n);
        CHECK(law.p0(n) == doctest::Approx(axis * axis * axis).epsilon(1e-12));
    }
}

TEST_CASE("srw pair return probabilities match path counts") {
    RenewalLaw law = build_renewal(model_by_id("srw3"), model_by_id("srw3"), 200);
    for (int n = 1; n <= 4; ++n) {
        double ref = static_cast<double>(closed_walk_count(2 * n, 0, 0, 0)) / std::pow(36.0, n);
        CHECK(law.p0(n) == doctest::Approx(ref).epsilon(1e-12));
    }
}

TEST_CASE("inter-arrival law is normalized including the analytic tail") {
    const RenewalLaw& law = law3();
    CHECK(law.K(0) == 0.0);
    double sum = 0;
    for (int n = 1; n <= law.n_max; ++n) {
        CHECK(law.K(n) >= 0.0);
        sum += law.K(n);
    }
    CHECK(std::fabs(sum + law.tail_mass - 1.0) <= 1e-6);
    CHECK(law.tail_mass > 0.0);
    CHECK(law.green > 0.0);
    CHECK(law.ck > 0.0);
}

TEST_CASE("kernel decay follows the fitted power law") {
    const RenewalLaw& law = law3();
    for (int n : {500, 2000, 5000}) {
        double model = law.ck * std::pow(n, -1.5) * (1.0 + law.ck2 / n);
        CHECK(std::fabs(law.K(n) / model - 1.0) <= 1e-4);
    }
}

TEST_CASE("gap tail agrees with suffix sums and decreases beyond the horizon") {
    const RenewalLaw& law = law3();
    double acc = law.tail_mass;
    for (int n = law.n_max - 1; n >= law.n_max - 50; --n) {
        acc += law.K(n + 1);
        CHECK(law.gap_tail(n) == doctest::Approx(acc).epsilon(1e-13));
    }
    // Brute partial sums from the front.
    double total = 0;
    for (int n = 1; n <= law.n_max; ++n) total += law.K(n);
    CHECK(law.gap_tail(0) == doctest::Approx(total + law.tail_mass).epsilon(1e-13));
    double head = 0;
    for (int n = 1; n <= 20; ++n) head += law.K(n);
    CHECK(law.gap_tail(20) == doctest::Approx(law.gap_tail(0) - head).epsilon(1e-12));
    // Analytic continuation stays monotone across the horizon.
    CHECK(law.gap_tail(law.n_max + 1) < law.gap_tail(law.n_max));
    CHECK(law.gap_tail(2 * law.n_max) < law.gap_tail(law.n_max + 1));
}

TEST_CASE("mass sequence solves its renewal recursion") {
    const RenewalLaw& law = law3();
    MassSequence mass = mass_sequence(law, 300);
    REQUIRE(mass.N() == 300);
    CHECK(mass.at(0) == 1.0);
    std::vector<double> u(301, 0.0);
    u[0] = 1.0;
    for (int n = 1; n <= 300; ++n) {
        double s = 0;
        for (int m = 1; m <= n; ++m) s += law.K(m) * u[static_cast<std::size_t>(n - m)];
        u[static_cast<std::size_t>(n)] = s;
        CHECK(mass.at(n) == doctest::Approx(s).epsilon(1e-13));
    }
}

TEST_CASE("mass sequence approaches its power-law scale") {
    const RenewalLaw& law = law3();
    MassSequence mass = mass_sequence(law, 2000);
    // u_n * 2 pi ck sqrt(n) -> 1 for a transient-return kernel of this type.
    double v = mass.at(2000) * 2.0 * M_PI * law.ck * std::sqrt(2000.0);
    CHECK(std::fabs(v - 1.0) < 0.05);
}

TEST_CASE("finite-horizon variant uses the partial green number") {
    RenewalLaw law = finite_horizon_renewal(model_by_id("lazy1"), model_by_id("lazy1"), 120);
    CHECK(law.tail_mass == 0.0);
    CHECK(law.ck == 0.0);
    double partial = 0;
    for (int n = 1; n <= 120; ++n) {
        double axis = diff_axis_central(n);
        CHECK(law.p0(n) == doctest::Approx(axis).epsilon(1e-12));
        partial += axis;
    }
    CHECK(law.green == doctest::Approx(partial).epsilon(1e-13));
    CHECK_THROWS_AS(build_renewal(model_by_id("lazy1"), model_by_id("lazy1"), 200),
                    std::invalid_argument);
}

TEST_CASE("disk cache round-trips bitwise and rejects foreign blobs") {
    std::string dir = scratch_dir() + "/cache_roundtrip";
    std::filesystem::remove_all(dir);
    RenewalLaw law = build_renewal(model_by_id("lazy3"), model_by_id("lazy3"), 300);
    save_renewal(dir, law);
    auto loaded = load_renewal(dir, law.model_x, law.model_y, 300);
    REQUIRE(loaded.has_value());
    CHECK(loaded->green == law.green);
    CHECK(loaded->ck == law.ck);
    CHECK(loaded->ck2 == law.ck2);
    CHECK(loaded->tail_mass == law.tail_mass);
    REQUIRE(loaded->k.size() == law.k.size());
    for (std::size_t i = 0; i < law.k.size(); ++i) CHECK(loaded->k[i] == law.k[i]);
    REQUIRE(loaded->suffix.size() == law.suffix.size());
    for (std::size_t i = 0; i < law.suffix.size(); ++i) CHECK(loaded->suffix[i] == law.suffix[i]);

    CHECK_FALSE(load_renewal(dir, law.model_x, law.model_y, 301).has_value());
    CHECK_FALSE(load_renewal(dir, "lazy4", law.model_y, 300).has_value());

    // Corrupt blob: loader must fall back to "absent", not crash.
    std::string blob = dir + "/renewal_lazy3_lazy3_300.json";
    REQUIRE(std::filesystem::exists(blob));
    std::ofstream(blob) << "{\"schema\": \"rwpm-renewal v1\", \"broken\": true}";
    CHECK_FALSE(load_renewal(dir, law.model_x, law.model_y, 300).has_value());
    std::ofstream(blob) << "not json at all";
    CHECK_FALSE(load_renewal(dir, law.model_x, law.model_y, 300).has_value());

    // cached_renewal rebuilds over the corrupt blob and leaves a loadable one.
    RenewalLaw again = cached_renewal(model_by_id("lazy3"), model_by_id("lazy3"), 300, dir);
    CHECK(again.green == law.green);
    CHECK(load_renewal(dir, law.model_x, law.model_y, 300).has_value());
}

}  // TEST_SUITE
