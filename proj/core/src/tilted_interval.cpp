#include "rwpm/tilted_interval.hpp"

#include "rwpm/environment.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace rwpm {

namespace {

// Plain 1-d table on [-radius, radius]; index u + radius.
struct Sym {
    int radius = 0;
    std::vector<double> v{1.0};

    double at(int u) const {
        int i = u + radius;
        if (i < 0 || i >= static_cast<int>(v.size())) return 0.0;
        return v[static_cast<std::size_t>(i)];
    }
};

Sym conv(const Sym& a, const Sym& b) {
    Sym c;
    c.radius = a.radius + b.radius;
    c.v.assign(a.v.size() + b.v.size() - 1, 0.0);
    for (std::size_t i = 0; i < a.v.size(); ++i) {
        if (a.v[i] == 0.0) continue;
        for (std::size_t j = 0; j < b.v.size(); ++j) c.v[i + j] += a.v[i] * b.v[j];
    }
    return c;
}

// (a * b)(0) = sum_u a(u) b(-u).
double conv_at_zero(const Sym& a, const Sym& b) {
    double s = 0;
    for (int u = -a.radius; u <= a.radius; ++u) s += a.at(u) * b.at(-u);
    return s;
}

struct AxisSupport {
    std::vector<int> val;
    std::vector<double> p;
};

AxisSupport axis_support(const WalkModel& m) {
    AxisSupport s;
    for (int u = -m.axis_radius; u <= m.axis_radius; ++u) {
        double p = m.axis_pmf[static_cast<std::size_t>(u + m.axis_radius)];
        if (p > 0) {
            s.val.push_back(u);
            s.p.push_back(p);
        }
    }
    return s;
}

void require_product_pair(const WalkModel& mx, const WalkModel& my, const char* who) {
    if (mx.dim != my.dim) throw std::invalid_argument(std::string(who) + ": dimension mismatch");
    if (!mx.product_form || !my.product_form)
        throw std::invalid_argument(std::string(who) + ": needs product-form models");
}

// Marked one-step tables over u = beta - alpha:
//   q(u)  = sum px(a) py(b), m1(u) = sum b px py, m2(u) = sum b^2 px py.
struct MarkedStep {
    Sym q, m1, m2;
};

MarkedStep marked_step(const WalkModel& mx, const WalkModel& my) {
    MarkedStep ms;
    int rq = mx.axis_radius + my.axis_radius;
    for (Sym* t : {&ms.q, &ms.m1, &ms.m2}) {
        t->radius = rq;
        t->v.assign(static_cast<std::size_t>(2 * rq + 1), 0.0);
    }
    for (int a = -mx.axis_radius; a <= mx.axis_radius; ++a) {
        double pa = mx.axis_pmf[static_cast<std::size_t>(a + mx.axis_radius)];
        if (pa == 0.0) continue;
        for (int b = -my.axis_radius; b <= my.axis_radius; ++b) {
            double pb = my.axis_pmf[static_cast<std::size_t>(b + my.axis_radius)];
            if (pb == 0.0) continue;
            std::size_t i = static_cast<std::size_t>((b - a) + rq);
            double w = pa * pb;
            ms.q.v[i] += w;
            ms.m1.v[i] += b * w;
            ms.m2.v[i] += static_cast<double>(b) * b * w;
        }
    }
    return ms;
}

std::vector<Sym> bridge_tables(const Sym& q, int r) {
    std::vector<Sym> t(static_cast<std::size_t>(r) + 1);
    for (int k = 1; k <= r; ++k) t[static_cast<std::size_t>(k)] = conv(t[static_cast<std::size_t>(k) - 1], q);
    return t;
}

Sym self_convolutions(const std::vector<double>& pmf, int radius, int r) {
    Sym kernel;
    kernel.radius = radius;
    kernel.v = pmf;
    Sym t;
    for (int k = 0; k < r; ++k) t = conv(t, kernel);
    return t;
}

// Per-coordinate enumeration over all (alpha_1..alpha_r, beta_1..beta_r) with
// sum alpha = sum beta; fn(beta_steps, path_prob) on each meeting leaf.
template <typename Fn>
void enumerate_pairs_1d(const AxisSupport& sx, const AxisSupport& sy, int r, Fn&& fn) {
    std::vector<int> beta(static_cast<std::size_t>(r));
    int ry_max = 0;
    for (int v : sy.val) ry_max = std::max(ry_max, std::abs(v));
    // Enumerate the x-leg fully, then the y-leg pruned against the target sum.
    auto walk_y = [&](auto&& self, int k, int sb, int sa, double prob) -> void {
        if (k == r) {
            if (sb == sa) fn(beta, prob);
            return;
        }
        int remaining = r - k - 1;
        for (std::size_t s = 0; s < sy.val.size(); ++s) {
            int nb = sb + sy.val[s];
            if (std::abs(sa - nb) > remaining * ry_max) continue;
            beta[static_cast<std::size_t>(k)] = sy.val[s];
            self(self, k + 1, nb, sa, prob * sy.p[s]);
        }
    };
    auto walk_x = [&](auto&& self, int k, int sa, double prob) -> void {
        if (k == r) {
            walk_y(walk_y, 0, 0, sa, prob);
            return;
        }
        for (std::size_t s = 0; s < sx.val.size(); ++s)
            self(self, k + 1, sa + sx.val[s], prob * sx.p[s]);
    };
    walk_x(walk_x, 0, 0, 1.0);
}

void check_enum_cost(const WalkModel& mx, const WalkModel& my, int r, double cap, const char* who) {
    double per = static_cast<double>(mx.product_form ? axis_support(mx).val.size() : mx.support.size()) *
                 static_cast<double>(my.product_form ? axis_support(my).val.size() : my.support.size());
    if (std::pow(per, r) > cap)
        throw std::runtime_error(std::string(who) + ": enumeration cost exceeds guard at r=" + std::to_string(r));
}

// Full d-dimensional enumeration; fn(beta_steps, path_prob) on leaves with
// X_r == Y_r.
template <typename Fn>
void enumerate_pairs_vec(const WalkModel& mx, const WalkModel& my, int r, Fn&& fn) {
    double per = static_cast<double>(mx.support.size()) * static_cast<double>(my.support.size());
    if (std::pow(per, r) > static_cast<double>(1u << 30))
        throw std::runtime_error("tilted_interval_enumerate_vector: cost exceeds guard");
    int step_max = static_cast<int>(mx.max_step_norm() + my.max_step_norm());
    std::vector<Point> beta(static_cast<std::size_t>(r));
    auto walk_y = [&](auto&& self, int k, const Point& py, const Point& target, double prob) -> void {
        if (k == r) {
            if (py == target) fn(beta, prob);
            return;
        }
        int remaining = r - k - 1;
        for (const auto& [stp, p] : my.support) {
            Point np = add(py, stp);
            if (linf_norm(sub(target, np)) > remaining * step_max) continue;
            beta[static_cast<std::size_t>(k)] = stp;
            self(self, k + 1, np, target, prob * p);
        }
    };
    auto walk_x = [&](auto&& self, int k, const Point& px, double prob) -> void {
        if (k == r) {
            walk_y(walk_y, 0, zero_point(), px, prob);
            return;
        }
        for (const auto& [stp, p] : mx.support) self(self, k + 1, add(px, stp), prob * p);
    };
    walk_x(walk_x, 0, zero_point(), 1.0);
}

double dot_points(const Point& a, const Point& b, int dim) {
    double s = 0;
    for (int c = 0; c < dim; ++c) s += static_cast<double>(a[static_cast<std::size_t>(c)]) * b[static_cast<std::size_t>(c)];
    return s;
}

}  // namespace

TiltedIntervalStats tilted_interval_stats(const WalkModel& mx, const WalkModel& my, int r) {
    require_product_pair(mx, my, "tilted_interval_stats");
    if (r < 1) throw std::invalid_argument("tilted_interval_stats: r must be >= 1");
    MarkedStep ms = marked_step(mx, my);
    std::vector<Sym> t = bridge_tables(ms.q, r);
    double T = t[static_cast<std::size_t>(r)].at(0);
    if (T <= 0) throw std::runtime_error("tilted_interval_stats: bridge probability vanishes");
    int d = mx.dim;

    TiltedIntervalStats st;
    st.r = r;
    st.log_bridge_prob = d * std::log(T);
    st.delta_sq = d * conv_at_zero(ms.m2, t[static_cast<std::size_t>(r - 1)]) / T;
    if (r >= 2) {
        Sym h = conv(ms.m1, ms.m1);
        st.pair_correlation = d * conv_at_zero(h, t[static_cast<std::size_t>(r - 2)]) / T;
        st.a_of_r = -st.pair_correlation;
    }

    // Independent second route through the r-step marginals.
    Sym tx = self_convolutions(mx.axis_pmf, mx.axis_radius, r);
    Sym ty = self_convolutions(my.axis_pmf, my.axis_radius, r);
    double num = 0, den = 0;
    for (int u = -ty.radius; u <= ty.radius; ++u) {
        double w = tx.at(u) * ty.at(u);
        den += w;
        num += static_cast<double>(u) * u * w;
    }
    if (den <= 0) throw std::runtime_error("tilted_interval_stats: meeting probability vanishes");
    st.b_of_r = d * num / (r * den);

    double expect = st.delta_sq + (r - 1) * st.pair_correlation;
    if (std::fabs(st.b_of_r - expect) > 1e-9 * std::max(1.0, std::fabs(st.b_of_r)))
        throw std::logic_error("tilted_interval_stats: moment identity violated across routes");
    return st;
}

TiltedIntervalStats tilted_interval_enumerate(const WalkModel& mx, const WalkModel& my, int r) {
    require_product_pair(mx, my, "tilted_interval_enumerate");
    if (r < 1) throw std::invalid_argument("tilted_interval_enumerate: r must be >= 1");
    check_enum_cost(mx, my, r, 4e7, "tilted_interval_enumerate");
    AxisSupport sx = axis_support(mx), sy = axis_support(my);
    double z1 = 0, s_m2 = 0, s_pair = 0, s_ysq = 0;
    enumerate_pairs_1d(sx, sy, r, [&](const std::vector<int>& beta, double prob) {
        z1 += prob;
        double b1 = beta[0];
        s_m2 += b1 * b1 * prob;
        if (r >= 2) s_pair += b1 * beta[1] * prob;
        int sum = 0;
        for (int b : beta) sum += b;
        s_ysq += static_cast<double>(sum) * sum * prob;
    });
    if (z1 <= 0) throw std::runtime_error("tilted_interval_enumerate: bridge probability vanishes");
    int d = mx.dim;
    TiltedIntervalStats st;
    st.r = r;
    st.log_bridge_prob = d * std::log(z1);
    st.delta_sq = d * s_m2 / z1;
    if (r >= 2) {
        st.pair_correlation = d * s_pair / z1;
        st.a_of_r = -st.pair_correlation;
    }
    st.b_of_r = d * s_ysq / (r * z1);
    return st;
}

TiltedIntervalStats tilted_interval_enumerate_vector(const WalkModel& mx, const WalkModel& my, int r) {
    if (mx.dim != my.dim) throw std::invalid_argument("tilted_interval_enumerate_vector: dimension mismatch");
    if (r < 1) throw std::invalid_argument("tilted_interval_enumerate_vector: r must be >= 1");
    int d = mx.dim;
    double z1 = 0, s_d2 = 0, s_pair = 0, s_ysq = 0;
    enumerate_pairs_vec(mx, my, r, [&](const std::vector<Point>& beta, double prob) {
        z1 += prob;
        s_d2 += dot_points(beta[0], beta[0], d) * prob;
        if (r >= 2) s_pair += dot_points(beta[0], beta[1], d) * prob;
        Point y = zero_point();
        for (const Point& b : beta) y = add(y, b);
        s_ysq += static_cast<double>(norm2(y)) * prob;
    });
    if (z1 <= 0) throw std::runtime_error("tilted_interval_enumerate_vector: bridge probability vanishes");
    TiltedIntervalStats st;
    st.r = r;
    st.log_bridge_prob = std::log(z1);
    st.delta_sq = s_d2 / z1;
    if (r >= 2) {
        st.pair_correlation = s_pair / z1;
        st.a_of_r = -st.pair_correlation;
    }
    st.b_of_r = s_ysq / (r * z1);
    return st;
}

double cxy_constant(const SmallMat& sigma_x, const SmallMat& sigma_y) {
    if (sigma_x.dim != sigma_y.dim) throw std::invalid_argument("cxy_constant: dimension mismatch");
    if (!is_spd(sigma_x) || !is_spd(sigma_y))
        throw std::invalid_argument("cxy_constant: covariance matrices must be SPD");
    SmallMat harm = inverse(mat_add(inverse(sigma_x), inverse(sigma_y)));
    double c = sigma_y.trace() - harm.trace();
    if (!(c > 0)) throw std::logic_error("cxy_constant: nonpositive result");
    return c;
}

TiltedLimits tilted_limits(const WalkModel& mx, const WalkModel& my) {
    if (mx.dim != my.dim) throw std::invalid_argument("tilted_limits: dimension mismatch");
    TiltedLimits lim;
    lim.correction = cxy_constant(mx.covariance, my.covariance);
    lim.w_limit = my.covariance.trace();
    lim.b_limit = inverse(mat_add(inverse(mx.covariance), inverse(my.covariance))).trace();
    return lim;
}

QuarticMoments quartic_moments(const WalkModel& mx, const WalkModel& my, int r, int s) {
    require_product_pair(mx, my, "quartic_moments");
    if (r < 2 || s < 2) throw std::invalid_argument("quartic_moments: needs r, s >= 2");
    MarkedStep ms = marked_step(mx, my);
    std::vector<Sym> t = bridge_tables(ms.q, r);
    double T = t[static_cast<std::size_t>(r)].at(0);
    if (T <= 0) throw std::runtime_error("quartic_moments: bridge probability vanishes");
    int d = mx.dim;
    double nan = std::numeric_limits<double>::quiet_NaN();

    Sym h2 = conv(ms.m1, ms.m1);
    double p2_over_t = conv_at_zero(h2, t[static_cast<std::size_t>(r - 2)]) / T;

    QuarticMoments qm;
    qm.r = r;
    qm.s = s;
    if (r >= 3) {
        Sym h3 = conv(ms.m2, h2);
        double n3 = conv_at_zero(h3, t[static_cast<std::size_t>(r - 3)]) / T;
        qm.iij = d * n3 + d * (d - 1) * p2_over_t * p2_over_t;
    } else {
        qm.iij = nan;
    }
    if (r >= 4) {
        Sym h4 = conv(h2, h2);
        double n4 = conv_at_zero(h4, t[static_cast<std::size_t>(r - 4)]) / T;
        qm.ijkl_same = d * n4 + d * (d - 1) * p2_over_t * p2_over_t;
    } else {
        qm.ijkl_same = nan;
    }
    double pair_r = d * p2_over_t;
    double pair_s = tilted_interval_stats(mx, my, s).pair_correlation;
    qm.ijkl_cross = pair_r * pair_s / d;
    return qm;
}

double pair_correlation_enumerate_at(const WalkModel& mx, const WalkModel& my, int r, int i, int j) {
    require_product_pair(mx, my, "pair_correlation_enumerate_at");
    if (r < 2 || i < 1 || j < 1 || i > r || j > r || i == j)
        throw std::invalid_argument("pair_correlation_enumerate_at: need distinct 1-based i, j <= r, r >= 2");
    check_enum_cost(mx, my, r, 4e7, "pair_correlation_enumerate_at");
    AxisSupport sx = axis_support(mx), sy = axis_support(my);
    double z1 = 0, sij = 0;
    enumerate_pairs_1d(sx, sy, r, [&](const std::vector<int>& beta, double prob) {
        z1 += prob;
        sij += static_cast<double>(beta[static_cast<std::size_t>(i - 1)]) *
               beta[static_cast<std::size_t>(j - 1)] * prob;
    });
    if (z1 <= 0) throw std::runtime_error("pair_correlation_enumerate_at: bridge probability vanishes");
    return mx.dim * sij / z1;
}

double quartic_enumerate_at(const WalkModel& mx, const WalkModel& my, int r, int i, int j, int k,
                            int l) {
    require_product_pair(mx, my, "quartic_enumerate_at");
    for (int idx : {i, j, k, l})
        if (idx < 1 || idx > r) throw std::invalid_argument("quartic_enumerate_at: indices must be 1-based <= r");
    check_enum_cost(mx, my, r, 4e7, "quartic_enumerate_at");
    AxisSupport sx = axis_support(mx), sy = axis_support(my);
    double z1 = 0, sij = 0, skl = 0, sijkl = 0;
    enumerate_pairs_1d(sx, sy, r, [&](const std::vector<int>& beta, double prob) {
        double bi = beta[static_cast<std::size_t>(i - 1)], bj = beta[static_cast<std::size_t>(j - 1)];
        double bk = beta[static_cast<std::size_t>(k - 1)], bl = beta[static_cast<std::size_t>(l - 1)];
        z1 += prob;
        sij += bi * bj * prob;
        skl += bk * bl * prob;
        sijkl += bi * bj * bk * bl * prob;
    });
    if (z1 <= 0) throw std::runtime_error("quartic_enumerate_at: bridge probability vanishes");
    // E[(D_i . D_j)(D_k . D_l)]: d aligned-coordinate terms plus d(d-1) terms
    // where the two dot products pick different coordinates and factorize.
    int d = mx.dim;
    return d * (sijkl / z1) + d * (d - 1) * (sij / z1) * (skl / z1);
}

double quartic_enumerate_at_vector(const WalkModel& mx, const WalkModel& my, int r, int i, int j,
                                   int k, int l) {
    if (mx.dim != my.dim) throw std::invalid_argument("quartic_enumerate_at_vector: dimension mismatch");
    for (int idx : {i, j, k, l})
        if (idx < 1 || idx > r)
            throw std::invalid_argument("quartic_enumerate_at_vector: indices must be 1-based <= r");
    int d = mx.dim;
    double z1 = 0, val = 0;
    enumerate_pairs_vec(mx, my, r, [&](const std::vector<Point>& beta, double prob) {
        z1 += prob;
        val += dot_points(beta[static_cast<std::size_t>(i - 1)], beta[static_cast<std::size_t>(j - 1)], d) *
               dot_points(beta[static_cast<std::size_t>(k - 1)], beta[static_cast<std::size_t>(l - 1)], d) *
               prob;
    });
    if (z1 <= 0) throw std::runtime_error("quartic_enumerate_at_vector: bridge probability vanishes");
    return val / z1;
}

TiltedMcEstimate tilted_interval_mc(const WalkModel& mx, const WalkModel& my, int r, int samples,
                                    RngStream& rng, TiltedMcMethod method) {
    if (mx.dim != my.dim) throw std::invalid_argument("tilted_interval_mc: dimension mismatch");
    if (r < 2 || samples < 2) throw std::invalid_argument("tilted_interval_mc: need r >= 2, samples >= 2");
    int d = mx.dim;
    std::vector<double> pair_v, dsq_v, iij_v, ijkl_v;
    pair_v.reserve(static_cast<std::size_t>(samples));
    dsq_v.reserve(static_cast<std::size_t>(samples));

    TiltedMcEstimate est;
    est.r = r;

    auto record = [&](const std::vector<Point>& delta) {
        dsq_v.push_back(dot_points(delta[0], delta[0], d));
        pair_v.push_back(dot_points(delta[0], delta[1], d));
        if (r >= 3) iij_v.push_back(dot_points(delta[0], delta[1], d) * dot_points(delta[0], delta[2], d));
        if (r >= 4) ijkl_v.push_back(dot_points(delta[0], delta[1], d) * dot_points(delta[2], delta[3], d));
    };

    if (method == TiltedMcMethod::rejection) {
        // Acceptance is the d-dim return probability ~ r^{-d/2}: hard-capped.
        if (r > 32) throw std::invalid_argument("tilted_interval_mc: rejection impractical beyond r = 32");
        constexpr std::int64_t kMaxAttempts = 200000000;
        int accepted = 0;
        while (accepted < samples) {
            if (est.attempts >= kMaxAttempts)
                throw std::runtime_error("tilted_interval_mc: acceptance too low, attempts exhausted");
            ++est.attempts;
            Environment ex = sample_path(mx, r, rng);
            Environment ey = sample_path(my, r, rng);
            if (!(ex.position(r) == ey.position(r))) continue;
            ++accepted;
            record(ey.increments);
        }
        est.samples = samples;
    } else {
        require_product_pair(mx, my, "tilted_interval_mc(bridge)");
        MarkedStep ms = marked_step(mx, my);
        std::vector<Sym> t = bridge_tables(ms.q, r);
        if (t[static_cast<std::size_t>(r)].at(0) <= 0)
            throw std::runtime_error("tilted_interval_mc: bridge probability vanishes");
        AxisSupport sx = axis_support(mx), sy = axis_support(my);
        std::vector<Point> delta(static_cast<std::size_t>(r));
        for (int n = 0; n < samples; ++n) {
            for (Point& p : delta) p = zero_point();
            for (int c = 0; c < d; ++c) {
                int s = 0;  // difference sum the remaining steps must achieve
                for (int k = 0; k < r; ++k) {
                    int rem = r - k;  // steps left including this one
                    double norm = t[static_cast<std::size_t>(rem)].at(s);
                    double target = rng.next_double() * norm;
                    double acc = 0;
                    int chosen_b = sy.val.back();
                    int chosen_u = 0;
                    bool done = false;
                    for (std::size_t ia = 0; ia < sx.val.size() && !done; ++ia)
                        for (std::size_t ib = 0; ib < sy.val.size() && !done; ++ib) {
                            int u = sy.val[ib] - sx.val[ia];
                            double w = sx.p[ia] * sy.p[ib] * t[static_cast<std::size_t>(rem - 1)].at(s - u);
                            if (w == 0.0) continue;
                            acc += w;
                            chosen_b = sy.val[ib];
                            chosen_u = u;
                            if (acc > target) done = true;
                        }
                    delta[static_cast<std::size_t>(k)][static_cast<std::size_t>(c)] = chosen_b;
                    s -= chosen_u;
                }
            }
            record(delta);
        }
        est.samples = samples;
        est.attempts = samples;
    }

    est.pair_correlation = mean_stderr(pair_v);
    est.delta_sq = mean_stderr(dsq_v);
    est.quartic_iij = mean_stderr(iij_v);
    est.quartic_ijkl = mean_stderr(ijkl_v);
    return est;
}

D4Scan d4_pick_p0(const WalkModel& mx, const WalkModel& my, int r_cap) {
    if (mx.dim != 4 || my.dim != 4) throw std::invalid_argument("d4_pick_p0: needs d = 4 models");
    if (r_cap < 2) throw std::invalid_argument("d4_pick_p0: r_cap must be >= 2");
    D4Scan scan;
    for (int r = 2; r <= r_cap; ++r) {
        TiltedIntervalStats st = tilted_interval_stats(mx, my, r);
        scan.r.push_back(r);
        scan.a.push_back(st.a_of_r);
        if (st.a_of_r > 0) {
            scan.found = true;
            scan.p0 = r;
            break;
        }
    }
    return scan;
}

}  // namespace rwpm
