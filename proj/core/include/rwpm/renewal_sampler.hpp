#pragma once

#include <vector>

#include "rwpm/renewal.hpp"
#include "rwpm/rng.hpp"

namespace rwpm {

// Renewal points of tau in {1..N}, strictly increasing.
//
// Unconditioned: i.i.d. jumps from K with an explicit overflow atom of mass
// P(jump > N - current); drawing it ends the path, so the law of tau cap
// {1..N} is exact (in particular P(1 in tau) = K(1) exactly).
//
// Conditioned on {N in tau}: exact backward sampling from N using the mass
// sequence, P(previous = t - j | current = t) = K(j) u_{t-j} / u_t; the
// result always contains N.
std::vector<int> sample_renewal(const RenewalLaw& law, const MassSequence& mass, int N,
                                RngStream& rng, bool conditioned_on_N);

}  // namespace rwpm
