#include "rwpm/environment.hpp"

namespace rwpm {

Environment sample_path(const WalkModel& model, int n, RngStream& rng) {
    if (n < 0) throw std::invalid_argument("sample_path: negative length");
    Environment env;
    env.dim = model.dim;
    env.n = n;
    env.seed = rng.seed();
    env.increments.reserve(static_cast<std::size_t>(n));
    env.positions.reserve(static_cast<std::size_t>(n) + 1);
    env.positions.push_back(zero_point());
    if (model.product_form) {
        DiscreteSampler axis(model.axis_pmf);
        for (int k = 0; k < n; ++k) {
            Point inc = zero_point();
            for (int c = 0; c < model.dim; ++c)
                inc[static_cast<std::size_t>(c)] = static_cast<int>(axis.sample(rng)) - model.axis_radius;
            env.increments.push_back(inc);
            env.positions.push_back(add(env.positions.back(), inc));
        }
    } else {
        std::vector<double> w;
        w.reserve(model.support.size());
        for (const auto& [x, p] : model.support) {
            (void)x;
            w.push_back(p);
        }
        DiscreteSampler pick(w);
        for (int k = 0; k < n; ++k) {
            const Point& inc = model.support[pick.sample(rng)].first;
            env.increments.push_back(inc);
            env.positions.push_back(add(env.positions.back(), inc));
        }
    }
    return env;
}

}  // namespace rwpm
