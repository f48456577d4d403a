#include "rwpm/pinning.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>

namespace rwpm {

namespace {

constexpr double kNegInf = -std::numeric_limits<double>::infinity();

int coord_sum(const Point& p) {
    int s = 0;
    for (int c : p) s += c;
    return s;
}

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

}  // namespace

CouplingParams CouplingParams::from_z(double z, double green) {
    if (z < 0 || green <= 0) throw std::invalid_argument("CouplingParams: need z >= 0, green > 0");
    CouplingParams p;
    p.green = green;
    p.z = z;
    p.z_prime = z / green;
    p.beta = std::log1p(p.z_prime);
    return p;
}

CouplingParams CouplingParams::from_beta(double beta, double green) {
    if (beta < 0 || green <= 0) throw std::invalid_argument("CouplingParams: need beta >= 0, green > 0");
    CouplingParams p;
    p.green = green;
    p.beta = beta;
    p.z_prime = std::expm1(beta);
    p.z = p.z_prime * green;
    return p;
}

CouplingParams CouplingParams::from_z_prime(double z_prime, double green) {
    if (z_prime < 0 || green <= 0) throw std::invalid_argument("CouplingParams: need z' >= 0, green > 0");
    CouplingParams p;
    p.green = green;
    p.z_prime = z_prime;
    p.beta = std::log1p(z_prime);
    p.z = z_prime * green;
    return p;
}

WeightEvaluator::WeightEvaluator(const WalkModel& mx, const RenewalLaw& law, int crossover)
    : mx_(mx), law_(&law), crossover_(crossover) {
    if (crossover < 1) throw std::invalid_argument("WeightEvaluator: crossover must be >= 1");
    if (crossover > law.n_max) throw std::invalid_argument("WeightEvaluator: crossover beyond n_max");
    if (mx.product_form) {
        axis_cache_ = std::make_shared<AxisTableCache>(mx);
        axis_cache_->table(crossover);  // warm up: reads are lock-free afterwards
    } else {
        exact_pmfs_.reserve(static_cast<std::size_t>(crossover) + 1);
        std::size_t stored = 0;
        for (int n = 0; n <= crossover; ++n) {
            exact_pmfs_.push_back(n_step_pmf(mx_, n));
            stored += exact_pmfs_.back().stored_size();
            if (stored > (std::size_t{3} << 23))
                throw std::runtime_error("WeightEvaluator: exact tables too large; lower the crossover");
        }
    }
    sigma_inv_ = inverse(mx.covariance);
    log_det_sigma_ = std::log(determinant(mx.covariance));
}

double WeightEvaluator::log_weight(double z, int n, const Point& x) const {
    if (z < 0) throw std::invalid_argument("log_weight: negative z");
    if (n < 1 || n > law_->n_max) throw std::invalid_argument("log_weight: n out of [1, n_max]");
    if (z == 0) return kNegInf;
    double kn = law_->k[static_cast<std::size_t>(n)];
    if (kn <= 0) throw std::runtime_error("log_weight: return probability vanishes at n=" + std::to_string(n));
    double log_num;
    if (n <= crossover_) {
        if (axis_cache_) {
            const AxisTable& t = axis_cache_->table(n);
            log_num = 0;
            for (int c = 0; c < mx_.dim; ++c) {
                double p = t.at(x[static_cast<std::size_t>(c)]);
                if (p <= 0) return kNegInf;
                log_num += std::log(p);
            }
        } else {
            double p = exact_pmfs_[static_cast<std::size_t>(n)].at(x);
            if (p <= 0) return kNegInf;
            log_num = std::log(p);
        }
    } else {
        used_llt_ = true;
        int parity = support_parity(mx_);
        if (parity == 1 && std::abs(coord_sum(x) - n) % 2 == 1) return kNegInf;
        if (parity == 0 && std::abs(coord_sum(x)) % 2 == 1) return kNegInf;
        std::array<double, kMaxDim> xd{};
        for (int c = 0; c < mx_.dim; ++c) xd[static_cast<std::size_t>(c)] = x[static_cast<std::size_t>(c)];
        std::array<double, kMaxDim> sx = mat_vec(sigma_inv_, xd);
        double quad = 0;
        for (int c = 0; c < mx_.dim; ++c) quad += xd[static_cast<std::size_t>(c)] * sx[static_cast<std::size_t>(c)];
        log_num = -0.5 * mx_.dim * std::log(2.0 * M_PI * n) - 0.5 * log_det_sigma_ - quad / (2.0 * n);
        if (parity >= 0) log_num += std::log(2.0);
    }
    double log_den = std::log(kn) + std::log(law_->green);
    return std::log(z) + log_num - log_den;
}

double WeightEvaluator::weight(double z, int n, const Point& x) const {
    return std::exp(log_weight(z, n, x));
}

double PartitionTable::log_zbeta(int n) const {
    return std::log1p(params.z_prime) - std::log(params.z_prime) + log_zstar(n);
}

PartitionTable quenched_partition(const CouplingParams& params, const Environment& env,
                                  const RenewalLaw& law, const WeightEvaluator& weights) {
    int N = env.n;
    if (N > law.n_max) throw std::invalid_argument("quenched_partition: horizon beyond n_max");
    PartitionTable table;
    table.params = params;
    table.env_seed = env.seed;
    table.crossover = weights.crossover();
    table.log_values.assign(static_cast<std::size_t>(N) + 1, kNegInf);
    table.log_values[0] = 0.0;

    std::vector<double> log_k(static_cast<std::size_t>(N) + 1, kNegInf);
    for (int j = 1; j <= N; ++j) {
        double kj = law.k[static_cast<std::size_t>(j)];
        if (kj > 0) log_k[static_cast<std::size_t>(j)] = std::log(kj);
    }

    std::vector<double> terms;
    terms.reserve(static_cast<std::size_t>(N));
    for (int n = 1; n <= N; ++n) {
        terms.clear();
        double peak = kNegInf;
        for (int m = 0; m < n; ++m) {
            double base = table.log_values[static_cast<std::size_t>(m)];
            if (base == kNegInf) continue;
            int j = n - m;
            if (log_k[static_cast<std::size_t>(j)] == kNegInf) continue;
            double lw = weights.log_weight(params.z, j, sub(env.position(n), env.position(m)));
            double term = base + log_k[static_cast<std::size_t>(j)] + lw;
            if (term == kNegInf || std::isnan(term)) continue;
            terms.push_back(term);
            if (term > peak) peak = term;
        }
        if (terms.empty()) continue;  // stays -inf
        double s = 0;
        for (double t : terms) s += std::exp(t - peak);
        table.log_values[static_cast<std::size_t>(n)] = peak + std::log(s);
    }
    table.llt_used = weights.used_llt();
    return table;
}

std::vector<double> quenched_partition_direct(const CouplingParams& params, const Environment& env,
                                              const RenewalLaw& law, const WeightEvaluator& weights) {
    int N = env.n;
    if (N > law.n_max) throw std::invalid_argument("quenched_partition_direct: horizon beyond n_max");
    std::vector<double> v(static_cast<std::size_t>(N) + 1, 0.0);
    v[0] = 1.0;
    for (int n = 1; n <= N; ++n) {
        double s = 0;
        for (int m = 0; m < n; ++m) {
            double base = v[static_cast<std::size_t>(m)];
            if (base == 0.0) continue;
            int j = n - m;
            double kj = law.k[static_cast<std::size_t>(j)];
            if (kj == 0.0) continue;
            s += base * kj * weights.weight(params.z, j, sub(env.position(n), env.position(m)));
        }
        v[static_cast<std::size_t>(n)] = s;
    }
    return v;
}

std::vector<double> annealed_partition_table(double z, const RenewalLaw& law, int N) {
    if (N < 0 || N > law.n_max) throw std::invalid_argument("annealed_partition_table: N out of [0, n_max]");
    if (z < 0) throw std::invalid_argument("annealed_partition_table: negative z");
    std::vector<double> log_a(static_cast<std::size_t>(N) + 1, kNegInf);
    log_a[0] = 0.0;
    if (z == 0) return log_a;
    double log_z = std::log(z);
    std::vector<double> log_k(static_cast<std::size_t>(N) + 1, kNegInf);
    for (int j = 1; j <= N; ++j) {
        double kj = law.k[static_cast<std::size_t>(j)];
        if (kj > 0) log_k[static_cast<std::size_t>(j)] = std::log(kj);
    }
    std::vector<double> terms;
    terms.reserve(static_cast<std::size_t>(N));
    for (int n = 1; n <= N; ++n) {
        terms.clear();
        double peak = kNegInf;
        for (int m = 1; m <= n; ++m) {
            double term = log_k[static_cast<std::size_t>(m)] + log_a[static_cast<std::size_t>(n - m)];
            if (term == kNegInf) continue;
            terms.push_back(term);
            if (term > peak) peak = term;
        }
        if (terms.empty()) continue;
        double s = 0;
        for (double t : terms) s += std::exp(t - peak);
        log_a[static_cast<std::size_t>(n)] = log_z + peak + std::log(s);
    }
    return log_a;
}

double annealed_partition(double z, const RenewalLaw& law, int N) {
    return annealed_partition_table(z, law, N).back();
}

}  // namespace rwpm
