#pragma once

#include <cmath>
#include <random>
#include <vector>

#include "hetsched/model.hpp"

// Seeded random problem instances shared by the tests, the acceptance suite
// and the optimize/bench commands.

namespace hetsched::instances {

struct RateRange {
  double lo = 0.1;
  double hi = 1000.0;
};

template <typename URNG>
double log_uniform(URNG& rng, RateRange r) {
  std::uniform_real_distribution<double> u(std::log(r.lo), std::log(r.hi));
  return std::exp(u(rng));
}

template <typename URNG>
AffinityMatrix random_affinity(URNG& rng, std::size_t k, std::size_t l, RateRange r = {}) {
  Grid<double> g(k, l);
  for (std::size_t i = 0; i < k; ++i)
    for (std::size_t j = 0; j < l; ++j) g(i, j) = log_uniform(rng, r);
  return AffinityMatrix(std::move(g));
}

// 2x2 matrix with mu11 > mu12 and mu21 < mu22, by rejection.
template <typename URNG>
AffinityMatrix random_two_type_affinity(URNG& rng, RateRange r = {}) {
  for (;;) {
    auto mu = random_affinity(rng, 2, 2, r);
    if (mu.is_two_type_affinity()) return mu;
  }
}

template <typename URNG>
std::vector<long> random_row_totals(URNG& rng, std::size_t k, long lo, long hi) {
  std::uniform_int_distribution<long> d(lo, hi);
  std::vector<long> out(k);
  for (auto& n : out) n = d(rng);
  return out;
}

}  // namespace hetsched::instances
