#include <cmath>
#include <vector>

#include "doctest.h"
#include "rwpm/contact_dist.hpp"
#include "rwpm/renewal_sampler.hpp"
#include "rwpm/rng.hpp"
#include "rwpm/stats.hpp"
#include "test_util.hpp"

using namespace rwpm;
using rwpm_test::law3;

TEST_SUITE("contact") {

TEST_CASE("contact-count routes agree and are normalized") {
    const RenewalLaw& law = law3();
    for (int N : {64, 1000}) {
        std::vector<double> direct = contact_count_dist_direct(law, N);
        std::vector<double> fft = contact_count_dist_fft(law, N);
        std::vector<double> dflt = contact_count_dist(law, N);
        std::size_t len = std::min(direct.size(), fft.size());
        REQUIRE(len > 4);
        for (std::size_t k = 0; k < len; ++k)
            CHECK(std::fabs(direct[k] - fft[k]) <= 1e-11);
        double sum = 0;
        for (double p : direct) {
            CHECK(p >= 0.0);
            sum += p;
        }
        CHECK(std::fabs(sum - 1.0) <= 1e-10);
        // The default picker returns one of the two.
        REQUIRE(dflt.size() >= 4);
        CHECK(std::fabs(dflt[2] - direct[2]) <= 1e-11);
    }
    // No-contact atom in closed form: P(R_N = 0) = P(first gap > N).
    std::vector<double> d64 = contact_count_dist_direct(law, 64);
    CHECK(d64[0] == doctest::Approx(law.gap_tail(64)).epsilon(1e-12));
}

TEST_CASE("tail probabilities match distribution suffix sums") {
    const RenewalLaw& law = law3();
    int N = 500;
    std::vector<double> dist = contact_count_dist_direct(law, N);
    for (int k : {0, 1, 3, 8, 20}) {
        double suffix = 0;
        for (std::size_t j = static_cast<std::size_t>(k); j < dist.size(); ++j) suffix += dist[j];
        CHECK(contact_tail_prob(law, N, k) == doctest::Approx(suffix).epsilon(1e-9));
    }
    CHECK(contact_tail_prob(law, N, 0) == doctest::Approx(1.0).epsilon(1e-12));
    // Deep tail beyond the truncated vector: positive and strictly decreasing.
    int k_deep = static_cast<int>(dist.size()) + 10;
    double t1 = contact_tail_prob(law, N, k_deep);
    double t2 = contact_tail_prob(law, N, k_deep + 5);
    CHECK(t1 > 0.0);
    CHECK(t2 < t1);
}

TEST_CASE("sampler reproduces exact contact statistics") {
    const RenewalLaw& law = law3();
    int N = 500;
    MassSequence mass = mass_sequence(law, N);
    std::vector<double> dist = contact_count_dist_direct(law, N);
    double exact_mean = 0;
    for (std::size_t k = 0; k < dist.size(); ++k) exact_mean += static_cast<double>(k) * dist[k];

    RngStream rng(31);
    int samples = 4000;
    std::vector<double> counts, first_is_one;
    counts.reserve(static_cast<std::size_t>(samples));
    for (int s = 0; s < samples; ++s) {
        std::vector<int> tau = sample_renewal(law, mass, N, rng, false);
        counts.push_back(static_cast<double>(tau.size()));
        first_is_one.push_back(!tau.empty() && tau.front() == 1 ? 1.0 : 0.0);
        for (std::size_t i = 0; i + 1 < tau.size(); ++i) REQUIRE(tau[i] < tau[i + 1]);
        if (!tau.empty()) REQUIRE(tau.back() <= N);
    }
    MeanStderr mc = mean_stderr(counts);
    CHECK(std::fabs(mc.mean - exact_mean) <= 4.0 * mc.stderr_);
    MeanStderr mf = mean_stderr(first_is_one);
    CHECK(std::fabs(mf.mean - law.K(1)) <= 4.0 * mf.stderr_);

    // Conditioned variant: endpoint always present, mean matches the exact one.
    std::vector<double> cond_counts;
    for (int s = 0; s < samples; ++s) {
        std::vector<int> tau = sample_renewal(law, mass, N, rng, true);
        REQUIRE(!tau.empty());
        REQUIRE(tau.back() == N);
        cond_counts.push_back(static_cast<double>(tau.size()));
    }
    MeanStderr cc = mean_stderr(cond_counts);
    CHECK(std::fabs(cc.mean - conditional_mean_contacts(law, N)) <= 4.0 * cc.stderr_);
    CHECK(conditional_mean_contacts(law, N) > exact_mean);
}

TEST_CASE("scaled contact count approaches the half-normal law") {
    const RenewalLaw& law = law3();
    double d256 = ks_halfnormal(law, 256);
    double d1024 = ks_halfnormal(law, 1024);
    double d4096 = ks_halfnormal(law, 4096);
    CHECK(d1024 < d256);
    CHECK(d4096 < d1024);
    CHECK(d4096 < 0.05);
}

TEST_CASE("half-normal cdf helper") {
    CHECK(halfnormal_scaled_cdf(0.0) == 0.0);
    CHECK(halfnormal_scaled_cdf(-1.0) == 0.0);
    CHECK(halfnormal_scaled_cdf(10.0) == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(halfnormal_scaled_cdf(0.3) > halfnormal_scaled_cdf(0.2));
    // Median of |Z|/sqrt(2 pi): erf(sqrt(pi) u) = 1/2.
    CHECK(halfnormal_scaled_cdf(0.26907846) == doctest::Approx(0.5).epsilon(1e-4));
}

TEST_CASE("ks helper on hand-checkable atomic laws") {
    auto cdf = [](double u) { return u < 0 ? 0.0 : (u > 1 ? 1.0 : u); };  // uniform on [0,1]
    // Single atom at 0.3: gap max(0.3 - 0, 1 - 0.3) = 0.7.
    CHECK(ks_distance_atomic_vs_cdf({0.3}, {1.0}, cdf) == doctest::Approx(0.7).epsilon(1e-15));
    // Two half atoms at the quartiles: gap 0.25 on each side.
    CHECK(ks_distance_atomic_vs_cdf({0.25, 0.75}, {0.5, 0.5}, cdf) == doctest::Approx(0.25).epsilon(1e-15));
    // Missing mass shows up as a tail gap.
    CHECK(ks_distance_atomic_vs_cdf({0.5}, {0.6}, cdf) == doctest::Approx(0.5).epsilon(1e-15));
}

TEST_CASE("conditioning comparison is exact and sane") {
    const RenewalLaw& law = law3();
    ConditioningReport rep = conditioning_ratio(law, 256);
    REQUIRE(rep.entries.size() >= 4);
    double max_ratio = 0;
    bool saw_const = false;
    for (const auto& e : rep.entries) {
        if (e.skipped) continue;
        CHECK(e.unconditioned > 0);
        CHECK(e.conditioned > 0);
        CHECK(e.ratio == doctest::Approx(e.conditioned / e.unconditioned).epsilon(1e-13));
        CHECK(e.ratio < 10.0);
        if (e.ratio > max_ratio) max_ratio = e.ratio;
        if (e.name == "const") {
            saw_const = true;
            CHECK(e.ratio == doctest::Approx(1.0).epsilon(1e-12));
        }
        if (e.name == "mid-contact") CHECK(e.ratio > 1.0);
    }
    CHECK(saw_const);
    CHECK(rep.max_ratio == doctest::Approx(max_ratio).epsilon(1e-13));
}

}  // TEST_SUITE
