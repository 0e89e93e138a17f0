#pragma once

#include <string_view>

#include "hetsched/model.hpp"

// Optimal placement for two task types on two processor types. The best
// state depends only on the ordering of the four rates:
//
//   P1-biased          mu12 > mu22          one P1 task alone on P1: (1, N2)
//   P2-biased          mu21 > mu11          one P2 task alone on P2: (N1, 1)
//   (general) symm.    otherwise            every task on its favourite: (N1, N2)
//   homogeneous / big.LITTLE-like           any state with both processors busy
//
// The first two are "accelerate the fastest" (AF), the symmetric cases are
// "best fit" (BF).

namespace hetsched::cab {

enum class Regime { Homogeneous, BigLittleLike, Symmetric, GeneralSymmetric, P1Biased, P2Biased };

enum class PolicyChoice { AF, BF, Any };

constexpr std::string_view to_string(Regime r) {
  switch (r) {
    case Regime::Homogeneous: return "Homogeneous";
    case Regime::BigLittleLike: return "BigLittleLike";
    case Regime::Symmetric: return "Symmetric";
    case Regime::GeneralSymmetric: return "GeneralSymmetric";
    case Regime::P1Biased: return "P1Biased";
    case Regime::P2Biased: return "P2Biased";
  }
  return "?";
}

constexpr std::string_view to_string(PolicyChoice p) {
  switch (p) {
    case PolicyChoice::AF: return "AF";
    case PolicyChoice::BF: return "BF";
    case PolicyChoice::Any: return "Any";
  }
  return "?";
}

constexpr PolicyChoice policy_for(Regime r) {
  switch (r) {
    case Regime::P1Biased:
    case Regime::P2Biased: return PolicyChoice::AF;
    case Regime::Symmetric:
    case Regime::GeneralSymmetric: return PolicyChoice::BF;
    default: return PolicyChoice::Any;
  }
}

struct CabSolution {
  Regime regime = Regime::GeneralSymmetric;
  SystemState2 targetState;
  double xMax = 0.0;
  PolicyChoice policyChoice = PolicyChoice::BF;
  // Non-affinity regimes: every state with -N1 < n22 - n11 < N2 is optimal,
  // targetState is one representative.
  bool band = false;

  bool is_optimal_state(const SystemState2& s, long n1, long n2) const {
    if (!band) return s == targetState;
    const long d = s.n22 - s.n11;
    return -n1 < d && d < n2;
  }
};

inline Regime classify(const AffinityMatrix& mu) {
  if (mu.task_types() != 2 || mu.processor_types() != 2)
    throw Error("classification needs a 2x2 affinity matrix");
  const double m11 = mu(0, 0), m12 = mu(0, 1), m21 = mu(1, 0), m22 = mu(1, 1);

  if (m11 == m12 && m12 == m21 && m21 == m22) return Regime::Homogeneous;
  if (m11 == m21 && m22 == m12) return Regime::BigLittleLike;
  if (!(m11 > m12 && m21 < m22)) throw Error("not a valid affinity system");
  if (m11 == m22 && m12 == m21) return Regime::Symmetric;
  // Under strict affinity these two conditions cannot hold together.
  if (m12 > m22) return Regime::P1Biased;
  if (m21 > m11) return Regime::P2Biased;
  // Ties mu12 == mu22 or mu21 == mu11 land here: BF is co-optimal.
  return Regime::GeneralSymmetric;
}

namespace detail {

// Exhaustive search over (n11, n22); first strict maximum in
// (n11, n22)-ascending order.
inline SystemState2 enumerate_best_state(const AffinityMatrix& mu, long n1, long n2) {
  SystemState2 best{0, 0};
  double best_x = -1.0;
  for (long a = 0; a <= n1; ++a)
    for (long b = 0; b <= n2; ++b) {
      const double x = throughput_state2(mu, {a, b}, n1, n2);
      if (x > best_x + 1e-12 * std::abs(best_x)) {
        best_x = x;
        best = {a, b};
      }
    }
  return best;
}

}  // namespace detail

// Target state for a given regime. Split out from target_state() so callers
// can supply their own regime.
inline CabSolution target_for_regime(const AffinityMatrix& mu, Regime regime, long n1, long n2) {
  if (mu.task_types() != 2 || mu.processor_types() != 2)
    throw Error("CAB needs a 2x2 affinity matrix");
  if (n1 < 0 || n2 < 0) throw Error("population counts must be nonnegative");
  if (n1 + n2 == 0) throw Error("empty population");

  CabSolution sol;
  sol.regime = regime;
  sol.policyChoice = policy_for(regime);

  if (n1 == 0 || n2 == 0) {
    // Single-type population: the closed forms assume both types present.
    sol.targetState = detail::enumerate_best_state(mu, n1, n2);
    sol.xMax = throughput_state2(mu, sol.targetState, n1, n2);
    return sol;
  }

  const double m11 = mu(0, 0), m12 = mu(0, 1), m21 = mu(1, 0), m22 = mu(1, 1);
  const double n = static_cast<double>(n1 + n2);
  switch (regime) {
    case Regime::P1Biased:
      sol.targetState = {1, n2};
      sol.xMax = static_cast<double>(n1 - 1) / (n - 1) * m12 +
                 static_cast<double>(n2) / (n - 1) * m22 + m11;
      break;
    case Regime::P2Biased:
      sol.targetState = {n1, 1};
      sol.xMax = static_cast<double>(n2 - 1) / (n - 1) * m21 +
                 static_cast<double>(n1) / (n - 1) * m11 + m22;
      break;
    case Regime::Symmetric:
    case Regime::GeneralSymmetric:
      sol.targetState = {n1, n2};
      sol.xMax = m11 + m22;
      break;
    case Regime::Homogeneous:
    case Regime::BigLittleLike:
      sol.targetState = {n1, n2};
      sol.xMax = m11 + m22;
      sol.band = true;
      break;
  }
  return sol;
}

inline CabSolution target_state(const AffinityMatrix& mu, long n1, long n2) {
  return target_for_regime(mu, classify(mu), n1, n2);
}

/// Throughput CAB gains over best fit in the P1-biased regime:
/// (N1 - 1) / (N - 1) * (mu12 - mu22).
inline double cab_bf_gap(const AffinityMatrix& mu, long n1, long n2) {
  if (classify(mu) != Regime::P1Biased) throw Error("CAB/BF gap is defined for P1-biased systems");
  if (n1 < 1 || n2 < 1) throw Error("need at least one task of each type");
  const double n = static_cast<double>(n1 + n2);
  return static_cast<double>(n1 - 1) / (n - 1) * (mu(0, 1) - mu(1, 1));
}

}  // namespace hetsched::cab
