#include <cmath>
#include <vector>

#include "doctest.h"
#include "rwpm/environment.hpp"
#include "rwpm/rng.hpp"
#include "rwpm/tilt_kernel.hpp"
#include "rwpm/tilted_interval.hpp"
#include "rwpm/walk_model.hpp"

using namespace rwpm;

namespace {

double brute_frobenius_sq(const TiltKernel& k) {
    double s = 0;
    for (int i = 1; i <= k.L; ++i)
        for (int j = 1; j <= k.L; ++j) s += k.entry(i, j) * k.entry(i, j);
    return s;
}

}  // namespace

TEST_SUITE("tilt") {

TEST_CASE("kernel entries follow their closed forms") {
    TiltKernel lr = TiltKernel::longrange(100, 0.3);
    for (int i : {1, 7, 100}) CHECK(lr.entry(i, i) == 0.0);
    CHECK(lr.entry(3, 11) == lr.entry(11, 3));
    double expected = 0.3 / (std::sqrt(100.0 * std::log(100.0)) * std::sqrt(4.0));
    CHECK(lr.entry(1, 5) == doctest::Approx(expected).epsilon(1e-14));

    TiltKernel bw = TiltKernel::bandwidth(64, 2, 0.5);
    CHECK(bw.entry(4, 4) == 0.0);
    CHECK(bw.entry(4, 6) == doctest::Approx(0.5 / std::sqrt(64.0)).epsilon(1e-14));
    CHECK(bw.entry(4, 5) == 0.0);
    CHECK(bw.entry(4, 7) == 0.0);
    CHECK(bw.entry(6, 4) == bw.entry(4, 6));
}

TEST_CASE("norms match brute-force double sums") {
    for (const TiltKernel& k : {TiltKernel::longrange(50, 0.4), TiltKernel::longrange(200, 0.05),
                                TiltKernel::bandwidth(50, 2, 0.3), TiltKernel::bandwidth(128, 3, 0.7)}) {
        KernelNorms n = kernel_norms(k);
        CHECK(n.frobenius_sq == doctest::Approx(brute_frobenius_sq(k)).epsilon(1e-12));
        CHECK(n.operator_bound == doctest::Approx(std::sqrt(n.frobenius_sq)).epsilon(1e-14));
    }
}

TEST_CASE("amplitude dial hits the frobenius target") {
    for (int L : {50, 1000}) {
        for (double target : {0.05, 0.5}) {
            double c = amplitude_for_frobenius(L, target);
            CHECK(c > 0);
            KernelNorms n = kernel_norms(TiltKernel::longrange(L, c));
            CHECK(n.frobenius_sq == doctest::Approx(target).epsilon(1e-12));
        }
    }
}

TEST_CASE("penalty routes agree") {
    WalkModel my = model_by_id("lazy3");
    RngStream rng(17);
    Environment env = sample_path(my, 256, rng);
    TiltKernel k = TiltKernel::longrange(256, 0.6);
    double dense = penalty(k, env.increments, 3);
    CHECK(std::fabs(penalty_fft(k, env.increments, 3) - dense) <= 1e-9);
    // Full-window screening is the dense sum; narrow windows converge to it.
    CHECK(penalty_screened(k, env.increments, 3, 256) == doctest::Approx(dense).epsilon(1e-12));
    double w32 = penalty_screened(k, env.increments, 3, 32);
    CHECK(std::fabs(w32 - dense) < std::fabs(dense) + 1.0);

    TiltKernel bw = TiltKernel::bandwidth(256, 2, 0.4);
    CHECK(penalty_screened(bw, env.increments, 3, 256) == doctest::Approx(penalty(bw, env.increments, 3)).epsilon(1e-12));
}

TEST_CASE("block factor") {
    CHECK(g_factor({-1.0, -2.5}) == 1.0);
    CHECK(g_factor({0.5, -1.0}) == doctest::Approx(std::exp(-0.5)).epsilon(1e-15));
    CHECK(g_factor({0.5, 0.25}) == doctest::Approx(std::exp(-0.75)).epsilon(1e-15));
    double g = g_factor({3.0, -1.0, 2.0});
    CHECK(g > 0.0);
    CHECK(g <= 1.0);
}

TEST_CASE("overshoot moment estimator is calibrated and deterministic") {
    WalkModel my = model_by_id("lazy3");
    TiltKernel zero = TiltKernel::longrange(32, 0.0);
    BorneMEstimate flat = borne_m_check(zero, my, 6.0 / 7.0, 200, 5, 1);
    CHECK(flat.mean == 1.0);
    CHECK(flat.stderr_ == 0.0);

    TiltKernel k = TiltKernel::longrange(32, amplitude_for_frobenius(32, 0.05));
    BorneMEstimate a = borne_m_check(k, my, 6.0 / 7.0, 1500, 5, 1);
    BorneMEstimate b = borne_m_check(k, my, 6.0 / 7.0, 1500, 5, 3);
    CHECK(a.mean == b.mean);
    CHECK(a.stderr_ == b.stderr_);
    CHECK(a.samples == 1500);
    CHECK(a.mean >= 1.0);
    CHECK(a.ci99_high == doctest::Approx(a.mean + 2.5758293035489004 * a.stderr_).epsilon(1e-12));
    REQUIRE(a.tail_u.size() == a.tail_prob.size());
    REQUIRE(!a.tail_u.empty());
    for (std::size_t i = 1; i < a.tail_prob.size(); ++i) {
        CHECK(a.tail_prob[i] <= a.tail_prob[i - 1]);
        CHECK(a.tail_u[i] > a.tail_u[i - 1]);
    }
}

TEST_CASE("interval statistics: streamed tables vs per-coordinate enumeration") {
    for (const char* id : {"lazy2", "lazy3", "lazy4"}) {
        WalkModel m = model_by_id(id);
        for (int r : {2, 3, 4}) {
            TiltedIntervalStats fast = tilted_interval_stats(m, m, r);
            TiltedIntervalStats ref = tilted_interval_enumerate(m, m, r);
            CHECK(fast.log_bridge_prob == doctest::Approx(ref.log_bridge_prob).epsilon(1e-11));
            CHECK(fast.delta_sq == doctest::Approx(ref.delta_sq).epsilon(1e-11));
            CHECK(fast.pair_correlation == doctest::Approx(ref.pair_correlation).epsilon(1e-11));
            CHECK(fast.b_of_r == doctest::Approx(ref.b_of_r).epsilon(1e-11));
            CHECK(fast.a_of_r == -fast.pair_correlation);
        }
    }
}

TEST_CASE("interval statistics: full-vector enumeration validates the coordinate product") {
    WalkModel m1 = model_by_id("lazy1");
    for (int r : {2, 3, 4}) {
        TiltedIntervalStats fast = tilted_interval_stats(m1, m1, r);
        TiltedIntervalStats ref = tilted_interval_enumerate_vector(m1, m1, r);
        CHECK(fast.delta_sq == doctest::Approx(ref.delta_sq).epsilon(1e-11));
        CHECK(fast.pair_correlation == doctest::Approx(ref.pair_correlation).epsilon(1e-11));
    }
    WalkModel m2 = model_by_id("lazy2");
    TiltedIntervalStats fast2 = tilted_interval_stats(m2, m2, 3);
    TiltedIntervalStats ref2 = tilted_interval_enumerate_vector(m2, m2, 3);
    CHECK(fast2.delta_sq == doctest::Approx(ref2.delta_sq).epsilon(1e-11));
    CHECK(fast2.pair_correlation == doctest::Approx(ref2.pair_correlation).epsilon(1e-11));
    WalkModel m3 = model_by_id("lazy3");
    TiltedIntervalStats fast3 = tilted_interval_stats(m3, m3, 2);
    TiltedIntervalStats ref3 = tilted_interval_enumerate_vector(m3, m3, 2);
    CHECK(fast3.b_of_r == doctest::Approx(ref3.b_of_r).epsilon(1e-11));
}

TEST_CASE("second-moment identity ties the three statistics together") {
    WalkModel m = model_by_id("lazy3");
    for (int r : {2, 5, 17, 50}) {
        TiltedIntervalStats s = tilted_interval_stats(m, m, r);
        CHECK(s.b_of_r == doctest::Approx(s.delta_sq + (r - 1) * s.pair_correlation).epsilon(1e-9));
    }
}

TEST_CASE("pair correlation is exchangeable across step indices") {
    WalkModel m = model_by_id("lazy3");
    double ref = pair_correlation_enumerate_at(m, m, 4, 1, 2);
    for (auto [i, j] : {std::pair{1, 3}, std::pair{2, 4}, std::pair{3, 4}, std::pair{4, 1}}) {
        CHECK(pair_correlation_enumerate_at(m, m, 4, i, j) == doctest::Approx(ref).epsilon(1e-12));
    }
    CHECK(tilted_interval_stats(m, m, 4).pair_correlation == doctest::Approx(ref).epsilon(1e-11));
}

TEST_CASE("quartic moments match per-index enumeration") {
    WalkModel m = model_by_id("lazy3");
    QuarticMoments q = quartic_moments(m, m, 4, 4);
    CHECK(q.iij == doctest::Approx(quartic_enumerate_at(m, m, 4, 1, 2, 1, 3)).epsilon(1e-10));
    CHECK(q.ijkl_same == doctest::Approx(quartic_enumerate_at(m, m, 4, 1, 2, 3, 4)).epsilon(1e-10));
    // Pattern exchangeability.
    CHECK(quartic_enumerate_at(m, m, 4, 2, 4, 2, 1) == doctest::Approx(q.iij).epsilon(1e-10));
    // Cross-interval factorization over independent gaps.
    TiltedIntervalStats s3 = tilted_interval_stats(m, m, 3);
    TiltedIntervalStats s5 = tilted_interval_stats(m, m, 5);
    QuarticMoments qc = quartic_moments(m, m, 3, 5);
    CHECK(qc.ijkl_cross == doctest::Approx(s3.pair_correlation * s5.pair_correlation / 3.0).epsilon(1e-11));
}

TEST_CASE("quartic coordinate product validated by full-vector enumeration") {
    WalkModel m2 = model_by_id("lazy2");
    CHECK(quartic_enumerate_at(m2, m2, 3, 1, 2, 1, 3) ==
          doctest::Approx(quartic_enumerate_at_vector(m2, m2, 3, 1, 2, 1, 3)).epsilon(1e-10));
    WalkModel m1 = model_by_id("lazy1");
    CHECK(quartic_enumerate_at(m1, m1, 4, 1, 2, 3, 4) ==
          doctest::Approx(quartic_enumerate_at_vector(m1, m1, 4, 1, 2, 3, 4)).epsilon(1e-10));
}

TEST_CASE("monte carlo estimates agree with the exact statistics") {
    WalkModel m = model_by_id("lazy3");
    TiltedIntervalStats s4 = tilted_interval_stats(m, m, 4);
    RngStream rng(23);
    TiltedMcEstimate rej = tilted_interval_mc(m, m, 4, 20000, rng, TiltedMcMethod::rejection);
    CHECK(rej.samples == 20000);
    CHECK(rej.attempts > rej.samples);
    CHECK(std::fabs(rej.pair_correlation.mean - s4.pair_correlation) <= 4.0 * rej.pair_correlation.stderr_);
    CHECK(std::fabs(rej.delta_sq.mean - s4.delta_sq) <= 4.0 * rej.delta_sq.stderr_);

    QuarticMoments q4 = quartic_moments(m, m, 4, 4);
    CHECK(std::fabs(rej.quartic_iij.mean - q4.iij) <= 4.0 * rej.quartic_iij.stderr_);
    CHECK(std::fabs(rej.quartic_ijkl.mean - q4.ijkl_same) <= 4.0 * rej.quartic_ijkl.stderr_);

    TiltedIntervalStats s12 = tilted_interval_stats(m, m, 12);
    TiltedMcEstimate br = tilted_interval_mc(m, m, 12, 20000, rng, TiltedMcMethod::bridge);
    CHECK(std::fabs(br.pair_correlation.mean - s12.pair_correlation) <= 4.0 * br.pair_correlation.stderr_);
    CHECK(std::fabs(br.delta_sq.mean - s12.delta_sq) <= 4.0 * br.delta_sq.stderr_);

    // Bridge route keeps working far beyond the rejection cap.
    TiltedIntervalStats s60 = tilted_interval_stats(m, m, 60);
    TiltedMcEstimate far = tilted_interval_mc(m, m, 60, 8000, rng, TiltedMcMethod::bridge);
    CHECK(std::fabs(far.delta_sq.mean - s60.delta_sq) <= 4.0 * far.delta_sq.stderr_);
    CHECK_THROWS_AS(tilted_interval_mc(m, m, 40, 10, rng, TiltedMcMethod::rejection),
                    std::invalid_argument);
}

TEST_CASE("gaussian limits from the covariance pair") {
    WalkModel m3 = model_by_id("lazy3");
    TiltedLimits lim3 = tilted_limits(m3, m3);
    CHECK(lim3.w_limit == doctest::Approx(1.5).epsilon(1e-12));
    CHECK(lim3.b_limit == doctest::Approx(0.75).epsilon(1e-12));
    CHECK(lim3.correction == doctest::Approx(0.75).epsilon(1e-12));
    CHECK(cxy_constant(m3.covariance, m3.covariance) == doctest::Approx(0.75).epsilon(1e-12));

    WalkModel m4 = model_by_id("lazy4");
    TiltedLimits lim4 = tilted_limits(m4, m4);
    CHECK(lim4.w_limit == doctest::Approx(2.0).epsilon(1e-12));
    CHECK(lim4.correction == doctest::Approx(1.0).epsilon(1e-12));

    // Mixed covariances: trace algebra by hand.
    WalkModel sw = model_by_id("srw3");
    double c = cxy_constant(sw.covariance, m3.covariance);
    // tr Sigma_Y - tr((3I + 2I)^{-1}) with Sigma_X = I/3, Sigma_Y = I/2.
    CHECK(c == doctest::Approx(1.5 - 3.0 / 5.0).epsilon(1e-12));
}

TEST_CASE("interval statistics drift toward their gaussian limits") {
    WalkModel m = model_by_id("lazy3");
    double prev_gap_ra = 1e9, prev_gap_dsq = 1e9;
    for (int r : {10, 50, 200}) {
        TiltedIntervalStats s = tilted_interval_stats(m, m, r);
        double gap_ra = std::fabs(r * s.a_of_r - 0.75);
        double gap_dsq = std::fabs(s.delta_sq - 1.5);
        CHECK(gap_ra < prev_gap_ra);
        CHECK(gap_dsq < prev_gap_dsq);
        prev_gap_ra = gap_ra;
        prev_gap_dsq = gap_dsq;
    }
    TiltedIntervalStats s200 = tilted_interval_stats(m, m, 200);
    CHECK(std::fabs(s200.delta_sq / 1.5 - 1.0) < 0.05);
    CHECK(std::fabs(s200.b_of_r / 0.75 - 1.0) < 0.10);
    CHECK(std::fabs(200.0 * s200.a_of_r / 0.75 - 1.0) < 0.15);
}

TEST_CASE("bandwidth offset scan in four dimensions") {
    WalkModel m = model_by_id("lazy4");
    D4Scan scan = d4_pick_p0(m, m);
    CHECK(scan.found);
    CHECK(scan.p0 == 2);
    REQUIRE(!scan.r.empty());
    CHECK(scan.r.back() == scan.p0);
    CHECK(scan.a.back() > 0.0);
    CHECK_THROWS_AS(d4_pick_p0(model_by_id("lazy3"), model_by_id("lazy3")), std::invalid_argument);
}

}  // TEST_SUITE
