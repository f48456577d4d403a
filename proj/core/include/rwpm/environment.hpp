#pragma once

#include <cstdint>
#include <vector>

#include "rwpm/rng.hpp"
#include "rwpm/walk_model.hpp"

namespace rwpm {

// One quenched trajectory: n i.i.d. increments of a walk plus the positions
// prefix. positions[k] = sum of the first k increments, positions[0] = 0.
struct Environment {
    int dim = 0;
    int n = 0;
    std::uint64_t seed = 0;  // stream seed that generated the increments
    std::vector<Point> increments;  // size n
    std::vector<Point> positions;   // size n + 1

    const Point& position(int k) const { return positions[static_cast<std::size_t>(k)]; }
};

// Draws n i.i.d. increments from the model's law; deterministic given the
// stream state. Product-form models sample per coordinate, others by
// inverse CDF over the support list.
Environment sample_path(const WalkModel& model, int n, RngStream& rng);

}  // namespace rwpm
