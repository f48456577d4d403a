#include <cmath>
#include <vector>

#include "doctest.h"
#include "rwpm/coarse.hpp"
#include "rwpm/environment.hpp"
#include "rwpm/pinning.hpp"
#include "rwpm/rng.hpp"
#include "rwpm/tail_sums.hpp"
#include "test_util.hpp"

using namespace rwpm;
using rwpm_test::law3;

TEST_SUITE("coarse") {

TEST_CASE("annealed block profiles sum to the pinned partition") {
    const RenewalLaw& law = law3();
    for (double z : {0.8, 1.3}) {
        CoarseDecomposition dec = coarse_decompose_annealed(law, 3, 6, z);
        REQUIRE(dec.profiles.size() == 8);
        double sum = 0;
        for (const auto& p : dec.profiles) {
            // Subsets without the final block cannot host the pinned endpoint.
            if ((p.subset & 4u) == 0) {
                CHECK(p.empty);
                CHECK(p.value == 0.0);
            }
            sum += p.value;
        }
        double full = std::exp(annealed_partition(z, law, 18));
        CHECK(std::fabs(sum / full - 1.0) <= 1e-10);
        CHECK(dec.log_total == doctest::Approx(std::log(full)).epsilon(1e-10));
    }
}

TEST_CASE("contact-measure profiles form a probability vector") {
    const RenewalLaw& law = law3();
    CoarseDecomposition dec = coarse_decompose_contact(law, 4, 5);
    REQUIRE(dec.profiles.size() == 16);
    double sum = 0;
    for (const auto& p : dec.profiles) {
        CHECK(p.value >= 0.0);
        sum += p.value;
        CHECK(p.value == doctest::Approx(block_visit_prob(law, 4, 5, p.subset)).epsilon(1e-12));
    }
    CHECK(std::fabs(sum - 1.0) <= 1e-10);
}

TEST_CASE("quenched block profiles sum to the full DP") {
    const RenewalLaw& law = law3();
    WalkModel my = model_by_id("lazy3");
    WeightEvaluator weights(my, law, 32);
    RngStream rng(13);
    Environment env = sample_path(my, 15, rng);
    CouplingParams params = CouplingParams::from_z(1.1, law.green);
    CoarseDecomposition dec = coarse_decompose_quenched(params, env, law, weights, 3, 5);
    double sum = 0;
    for (const auto& p : dec.profiles) {
        sum += p.value;
        if (!p.empty)
            CHECK(p.log_z == doctest::Approx(
                block_log_partition(params, env, law, weights, 3, 5, p.subset)).epsilon(1e-12));
    }
    PartitionTable table = quenched_partition(params, env, law, weights);
    CHECK(std::fabs(sum / std::exp(table.log_zstar(15)) - 1.0) <= 1e-10);
}

TEST_CASE("gap-decay fit sees the stable-renewal exponent") {
    const RenewalLaw& law = law3();
    ProfileDecayFit fit = profile_gap_decay(law, 6, 16);
    REQUIRE(fit.x.size() == fit.log_p.size());
    REQUIRE(fit.x.size() > 8);
    CHECK(fit.slope < -1.0);
    CHECK(fit.slope > -2.2);
}

TEST_CASE("envelope reduces to the bare renewal at unit effective weight") {
    double gamma = 6.0 / 7.0;
    double c2 = 0.8;
    // Bare weight equal to the threshold makes W_eff = 1 exactly.
    double eta = std::pow(1.0 / zeta_sum(1.2), 1.0 / gamma) / (3.0 * c2);
    EnvelopeResult env = coarse_envelope(eta, gamma, c2, 64);
    CHECK(env.ctilde == doctest::Approx(zeta_sum(1.2)).epsilon(1e-13));
    CHECK(env.weight == doctest::Approx(env.threshold).epsilon(1e-12));
    CHECK(std::fabs(env.log_value) <= 1e-10);

    // The pinned diagnostic sequence is then the mass sequence of the
    // power-law inter-arrival law; recompute it directly.
    int m = 64;
    std::vector<double> ktilde(static_cast<std::size_t>(m) + 1, 0.0);
    for (int n = 1; n <= m; ++n) ktilde[static_cast<std::size_t>(n)] = std::pow(n, -1.2) / env.ctilde;
    std::vector<double> u(static_cast<std::size_t>(m) + 1, 0.0);
    u[0] = 1.0;
    for (int n = 1; n <= m; ++n) {
        double s = 0;
        for (int j = 1; j <= n; ++j) s += ktilde[static_cast<std::size_t>(j)] * u[static_cast<std::size_t>(n - j)];
        u[static_cast<std::size_t>(n)] = s;
    }
    REQUIRE(env.pinned.size() == static_cast<std::size_t>(m));
    for (int n = 1; n <= m; ++n)
        CHECK(env.pinned[static_cast<std::size_t>(n - 1)] ==
              doctest::Approx(u[static_cast<std::size_t>(n)]).epsilon(1e-10));
}

TEST_CASE("envelope with the default dial is bounded and settling") {
    double gamma = 6.0 / 7.0;
    double c2 = 0.8;
    double eta = envelope_default_eta(c2, gamma);
    EnvelopeResult e = coarse_envelope(eta, gamma, c2, 16);
    // The default dial lands the effective weight at (3/4)^gamma.
    CHECK(e.ctilde * e.weight == doctest::Approx(std::pow(0.75, gamma)).epsilon(1e-12));
    CHECK(e.weight < e.threshold);
    double v16 = e.log_value;
    double v64 = coarse_envelope(eta, gamma, c2, 64).log_value;
    double v256 = coarse_envelope(eta, gamma, c2, 256).log_value;
    double v1024 = coarse_envelope(eta, gamma, c2, 1024).log_value;
    CHECK(v64 < v16);
    CHECK(v256 < v64);
    CHECK(v1024 < v256);
    // Subcritical weight decays like a power of m (the no-contact path alone
    // contributes ~ m^{-1/5}), so each quadrupling drops the log value by at
    // most (1/5) log 4. Exponential blow-down or blow-up would smash through
    // that ceiling immediately.
    double ceiling = 0.2 * std::log(4.0);
    CHECK(v64 - v256 < ceiling);
    CHECK(v256 - v1024 < ceiling);
    CHECK(v1024 > -0.2 * std::log(1024.0) - 1.0);
}

TEST_CASE("supercritical effective weight blows up instead") {
    double gamma = 6.0 / 7.0;
    double c2 = 0.8;
    double eta_hot = 3.0 * std::pow(1.0 / zeta_sum(1.2), 1.0 / gamma) / (3.0 * c2);
    EnvelopeResult e = coarse_envelope(eta_hot, gamma, c2, 256);
    CHECK(e.weight > e.threshold);
    CHECK(e.log_value > coarse_envelope(eta_hot, gamma, c2, 64).log_value);
    CHECK(e.log_value > 1.0);
}

}  // TEST_SUITE
