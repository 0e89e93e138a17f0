#pragma once

#include <chrono>
#include <cstdio>
#include <limits>
#include <numeric>
#include <random>
#include <functional>
#include <string>
#include <vector>

#include "hetsched/cab.hpp"
#include "hetsched/experiment.hpp"
#include "hetsched/grin.hpp"
#include "hetsched/instances.hpp"
#include "hetsched/sim.hpp"

// Release acceptance criteria. Shared by `hetsched verify` and the
// acceptance test binary; each criterion reports what it measured against
// a fixed bound.

namespace hetsched::acceptance {

using Classifier = std::function<cab::Regime(const AffinityMatrix&)>;

struct VerifyOptions {
  // Regime classifier feeding the simulated CAB policy. Replaced only for
  // fault injection.
  Classifier classifier = [](const AffinityMatrix& mu) { return cab::classify(mu); };
  // Multiplies every simulation run length (floored at 1000 completions).
  double completionsScale = 1.0;
  std::uint64_t seed = 20240601;
};

struct CriterionResult {
  bool pass = false;
  std::string measured;
  std::string bound;
};

struct Criterion {
  int id = 0;
  std::string name;
  std::function<CriterionResult(const VerifyOptions&)> run;
};

namespace detail {

using sim::Distribution;
using sim::Policy;
using sim::ServiceOrder;

inline const AffinityMatrix kP1Biased{{20.0, 15.0}, {3.0, 8.0}};
inline const AffinityMatrix kKernelsP2Biased{{253.0, 0.911}, {587.0, 2398.0}};
inline const AffinityMatrix kKernelsGeneralSymmetric{{928.0, 3.61}, {587.0, 2398.0}};
inline const std::vector<double> kEtas{0.1, 0.2, 0.3, 0.4, 0.5, 0.6, 0.7, 0.8, 0.9};
inline const std::vector<Policy> kBaselines{Policy::BF, Policy::RD, Policy::JSQ, Policy::LB};
constexpr long kPrograms = 20;

inline std::string fmt(const char* f, double a) {
  char buf[128];
  std::snprintf(buf, sizeof buf, f, a);
  return buf;
}
inline std::string fmt(const char* f, double a, double b) {
  char buf[128];
  std::snprintf(buf, sizeof buf, f, a, b);
  return buf;
}

inline long scaled(long completions, const VerifyOptions& o) {
  return std::max(1000L, static_cast<long>(static_cast<double>(completions) * o.completionsScale));
}

inline sim::SimConfig config(const AffinityMatrix& mu, double eta, Policy policy, Distribution d,
                             ServiceOrder order, long completions, std::uint64_t seed,
                             const VerifyOptions& o) {
  sim::SimConfig c;
  c.mu = mu;
  c.numPrograms = kPrograms;
  c.typeFractions = {eta, 1.0 - eta};
  c.policy = policy;
  c.distribution = d;
  c.serviceOrder = order;
  c.completionsTarget = scaled(completions, o);
  c.seed = seed;
  if (policy == Policy::CAB) {
    const auto n = sim::program_type_counts(c.typeFractions, c.numPrograms);
    const auto sol = cab::target_for_regime(mu, o.classifier(mu), n[0], n[1]);
    c.target = to_assignment(sol.targetState, n[0], n[1]);
  }
  return c;
}

inline std::uint64_t seed_for(const VerifyOptions& o, std::size_t a, std::size_t b = 0,
                              std::size_t c = 0) {
  return experiment::cell_seed(o.seed, a, b, c);
}

inline double closed_form(const AffinityMatrix& mu, double eta) {
  const auto n = sim::program_type_counts(std::vector<double>{eta, 1.0 - eta}, kPrograms);
  return cab::target_state(mu, n[0], n[1]).xMax;
}

// Worst X(CAB) / X(baseline) over every eta, distribution and order.
inline double worst_dominance(const AffinityMatrix& mu, long completions,
                              const VerifyOptions& o) {
  double worst = std::numeric_limits<double>::infinity();
  for (std::size_t e = 0; e < kEtas.size(); ++e)
    for (std::size_t d = 0; d < std::size(sim::kAllDistributions); ++d)
      for (auto order : {ServiceOrder::PS, ServiceOrder::FCFS}) {
        const auto dist = sim::kAllDistributions[d];
        const auto seed = seed_for(o, e, d, order == ServiceOrder::PS ? 0 : 1);
        const double x_cab =
            sim::run_sim(config(mu, kEtas[e], Policy::CAB, dist, order, completions, seed, o))
                .throughput;
        for (auto p : kBaselines) {
          const double x =
              sim::run_sim(config(mu, kEtas[e], p, dist, order, completions, seed, o)).throughput;
          worst = std::min(worst, x_cab / x);
        }
      }
  return worst;
}

// Enumerates every (n11, n22) with the two-type throughput written out directly.
inline double enumerated_max(const AffinityMatrix& mu, long n1, long n2) {
  double best = 0.0;
  for (long a = 0; a <= n1; ++a)
    for (long b = 0; b <= n2; ++b) {
      const double p1 = static_cast<double>(a + n2 - b), p2 = static_cast<double>(b + n1 - a);
      double x = 0.0;
      if (p1 > 0) x += (mu(0, 0) * a + mu(1, 0) * (n2 - b)) / p1;
      if (p2 > 0) x += (mu(1, 1) * b + mu(0, 1) * (n1 - a)) / p2;
      best = std::max(best, x);
    }
  return best;
}

}  // namespace detail

inline std::vector<Criterion> criteria() {
  using namespace detail;
  std::vector<Criterion> out;

  out.push_back({1, "Little's Law conservation", [](const VerifyOptions& o) {
    double worst = 0.0, worst_bp = 0.0;
    for (std::size_t e = 0; e < kEtas.size(); ++e)
      for (std::size_t d = 0; d < std::size(sim::kAllDistributions); ++d)
        for (auto p : {Policy::CAB, Policy::BF, Policy::RD, Policy::JSQ, Policy::LB}) {
          const auto dist = sim::kAllDistributions[d];
          const auto m = sim::run_sim(config(kP1Biased, kEtas[e], p, dist, ServiceOrder::PS,
                                             100'000, seed_for(o, e, d), o));
          const double dev = std::abs(sim::little_check(m, kPrograms) - 1.0);
          (dist == Distribution::BoundedPareto ? worst_bp : worst) =
              std::max(dist == Distribution::BoundedPareto ? worst_bp : worst, dev);
        }
    return CriterionResult{worst <= 0.02 && worst_bp <= 0.05,
                           fmt("max |X*E[T]/N - 1| = %.4f (bounded Pareto %.4f)", worst, worst_bp),
                           "<= 0.02 (bounded Pareto <= 0.05)"};
  }});

  out.push_back({2, "CAB theory-simulation match", [](const VerifyOptions& o) {
    double worst = 0.0, worst_bp = 0.0;
    for (std::size_t e = 0; e < kEtas.size(); ++e)
      for (std::size_t d = 0; d < std::size(sim::kAllDistributions); ++d) {
        const auto dist = sim::kAllDistributions[d];
        const auto m = sim::run_sim(config(kP1Biased, kEtas[e], Policy::CAB, dist,
                                           ServiceOrder::PS, 100'000, seed_for(o, e, d), o));
        const double theory = closed_form(kP1Biased, kEtas[e]);
        const double rel = std::abs(m.throughput - theory) / theory;
        (dist == Distribution::BoundedPareto ? worst_bp : worst) =
            std::max(dist == Distribution::BoundedPareto ? worst_bp : worst, rel);
      }
    const double spot = closed_form(kP1Biased, 0.5);
    const bool spot_ok = std::abs(spot - 31.316) < 5e-4;
    return CriterionResult{worst <= 0.03 && worst_bp <= 0.10 && spot_ok,
                           fmt("max rel err %.4f (bounded Pareto %.4f), ", worst, worst_bp) +
                               fmt("X_theory(eta=0.5) = %.4f", spot),
                           "<= 0.03 (bounded Pareto <= 0.10), spot 31.316"};
  }});

  out.push_back({3, "CAB dominance", [](const VerifyOptions& o) {
    const double worst = worst_dominance(kP1Biased, 300'000, o);
    return CriterionResult{worst >= 0.99, fmt("min X(CAB)/X(baseline) = %.4f", worst),
                           ">= 0.99 over 9 eta x 4 distributions x {PS, FCFS} x 4 baselines"};
  }});

  out.push_back({4, "CAB-vs-BF gap at eta = 0.1", [](const VerifyOptions& o) {
    const auto seed = seed_for(o, 0);
    const double cab = sim::run_sim(config(kP1Biased, 0.1, Policy::CAB, Distribution::Exponential,
                                           ServiceOrder::PS, 1'000'000, seed, o))
                           .throughput;
    const double bf = sim::run_sim(config(kP1Biased, 0.1, Policy::BF, Distribution::Exponential,
                                          ServiceOrder::PS, 1'000'000, seed, o))
                          .throughput;
    const double gap = cab - bf;
    return CriterionResult{std::abs(gap - 0.37) <= 0.15, fmt("X(CAB) - X(BF) = %.4f", gap),
                           "0.37 +/- 0.15"};
  }});

  out.push_back({5, "Improvement-range sanity", [](const VerifyOptions& o) {
    experiment::ExperimentSpec spec;
    spec.base.mu = kP1Biased;
    spec.base.completionsTarget = scaled(100'000, o);
    spec.base.powerModel = {1.0, 1.0};
    spec.policies = {Policy::CAB, Policy::LB};
    spec.distributions = {Distribution::Exponential};
    spec.seeds = {o.seed};
    const auto rows = experiment::run_experiment(spec);
    const auto r = experiment::baseline_ratios(rows, Policy::CAB).at(Policy::LB);
    return CriterionResult{r.throughput.max >= 1.08 && r.edp.max >= 1.08,
                           fmt("max X(CAB)/X(LB) = %.3f, ", r.throughput.max) +
                               fmt("max EDP(LB)/EDP(CAB) = %.3f", r.edp.max),
                           "both >= 1.08"};
  }});

  out.push_back({6, "CAB target in the enumeration argmax", [](const VerifyOptions& o) {
    std::mt19937_64 rng(seed_for(o, 6));
    int agree = 0;
    constexpr int kInstances = 500;
    for (int t = 0; t < kInstances; ++t) {
      const auto mu = instances::random_two_type_affinity(rng);
      const auto n = instances::random_row_totals(rng, 2, 1, 15);
      const auto sol = cab::target_for_regime(mu, o.classifier(mu), n[0], n[1]);
      const double at_target = throughput_state2(mu, sol.targetState, n[0], n[1]);
      if (hetsched::detail::nearly_equal(at_target, enumerated_max(mu, n[0], n[1]))) ++agree;
    }
    return CriterionResult{agree == kInstances,
                           std::to_string(agree) + "/" + std::to_string(kInstances) +
                               " instances with the CAB target in the argmax set",
                           "500/500"};
  }});

  out.push_back({7, "GrIn = CAB at two types", [](const VerifyOptions& o) {
    std::mt19937_64 rng(seed_for(o, 7));
    int agree = 0, total = 0;
    auto check = [&](const AffinityMatrix& mu, const std::vector<long>& n) {
      ++total;
      const auto g = grin::grin_solve(mu, n);
      const auto opt = grin::exhaustive_opt(mu, n);
      if (hetsched::detail::nearly_equal(g.throughput, opt.throughput)) ++agree;
      return g;
    };
    const auto af = check(kKernelsP2Biased, {10, 10});
    const auto bf = check(kKernelsGeneralSymmetric, {10, 10});
    const bool fixtures = to_state2(af.assignment) == SystemState2{10, 1} &&
                          to_state2(bf.assignment) == SystemState2{10, 10};
    while (total < 200)
      check(instances::random_two_type_affinity(rng), instances::random_row_totals(rng, 2, 1, 15));
    return CriterionResult{agree == total && fixtures,
                           std::to_string(agree) + "/" + std::to_string(total) +
                               " equal to the exhaustive optimum; kernel matrices at " +
                               (fixtures ? "(10,1) and (10,10)" : "WRONG"),
                           "200/200 at 1e-9 relative, fixtures (N1,1) and (N1,N2)"};
  }});

  out.push_back({8, "GrIn near-optimality", [](const VerifyOptions& o) {
    experiment::OptimizeSettings os;  // 200 random 3x3, N_i in [1, 10]
    const auto rows = experiment::run_optimize(os, seed_for(o, 8));
    const auto s = experiment::summarize_optimize(rows);
    return CriterionResult{s.withGap >= 200 && s.meanGap <= 0.03 && s.maxGap <= 0.10,
                           fmt("mean gap %.4f, max gap %.4f", s.meanGap, s.maxGap) + " over " +
                               std::to_string(s.withGap) + " instances",
                           "mean <= 0.03, max <= 0.10"};
  }});

  out.push_back({9, "GrIn move monotonicity", [](const VerifyOptions& o) {
    std::mt19937_64 rng(seed_for(o, 9));
    std::uniform_int_distribution<std::size_t> dim(1, 6);
    long moves = 0, violations = 0;
    for (int t = 0; t < 1000; ++t) {
      const auto k = dim(rng), l = dim(rng);
      const auto mu = instances::random_affinity(rng, k, l);
      auto n = instances::random_row_totals(rng, k, 0, 10);
      if (std::accumulate(n.begin(), n.end(), 0L) == 0) n[0] = 1;
      double prev = throughput_state(mu, grin::init_matrix(mu, n));
      grin::grin_solve(mu, n, [&](const grin::AppliedMove& mv) {
        const double x = throughput_state(mu, *mv.after);
        ++moves;
        if (!(x > prev)) ++violations;
        prev = x;
      });
    }
    return CriterionResult{violations == 0,
                           std::to_string(violations) + " violations in " +
                               std::to_string(moves) + " applied moves",
                           "0 violations"};
  }});

  out.push_back({10, "Move-delta oracle", [](const VerifyOptions& o) {
    std::mt19937_64 rng(seed_for(o, 10));
    std::uniform_int_distribution<std::size_t> dim(1, 6);
    std::uniform_int_distribution<long> cnt(0, 5);
    double worst = 0.0;
    for (int t = 0; t < 10'000; ++t) {
      const auto k = dim(rng), l = dim(rng);
      const auto mu = instances::random_affinity(rng, k, l);
      Grid<long> g(k, l);
      for (std::size_t i = 0; i < k; ++i)
        for (std::size_t j = 0; j < l; ++j) g(i, j) = cnt(rng);
      const AssignmentMatrix n(std::move(g));
      const auto p = std::uniform_int_distribution<std::size_t>(0, k - 1)(rng);
      const auto j = std::uniform_int_distribution<std::size_t>(0, l - 1)(rng);
      const double before = throughput_state(mu, n);
      auto err = [&](double formula, double after) {
        return std::abs(formula - (after - before)) /
               std::max({1.0, std::abs(before), std::abs(after)});
      };
      worst = std::max(worst, err(grin::x_df_plus(mu, n, p, j),
                                  throughput_state(mu, n.with_added(p, j))));
      if (n(p, j) >= 1)
        worst = std::max(worst, err(grin::x_df_minus(mu, n, p, j),
                                    throughput_state(mu, n.with_removed(p, j))));
    }
    return CriterionResult{worst <= 1e-9, fmt("max relative error %.3g over 10^4 draws", worst),
                           "<= 1e-9"};
  }});

  out.push_back({11, "Energy reductions", [](const VerifyOptions& o) {
    auto cfg = config(kP1Biased, 0.5, Policy::CAB, Distribution::Exponential, ServiceOrder::PS,
                      100'000, seed_for(o, 11), o);
    cfg.powerModel = {1.0, 1.0};
    const auto prop = sim::run_sim(cfg);
    cfg.powerModel = {1.0, 0.0};
    const auto flat = sim::run_sim(cfg);
    const double predicted = 2.0 * kPrograms / (flat.throughput * flat.throughput);
    const double e_err = std::abs(prop.meanEnergyPerTask - 1.0);
    const double edp_err = std::abs(flat.edp - predicted) / predicted;
    return CriterionResult{e_err <= 0.02 && edp_err <= 0.04,
                           fmt("alpha=1: E[E] = %.4f; ", prop.meanEnergyPerTask) +
                               fmt("alpha=0: EDP rel err %.4f", edp_err),
                           "E[E] = 1 +/- 2%, EDP = 2kN/X^2 +/- 4%"};
  }});

  out.push_back({12, "Desk-scale substitutes for the hardware results", [](const VerifyOptions& o) {
    const auto r_af = o.classifier(kKernelsP2Biased);
    const auto r_bf = o.classifier(kKernelsGeneralSymmetric);
    const bool regimes = r_af == cab::Regime::P2Biased &&
                         cab::policy_for(r_af) == cab::PolicyChoice::AF &&
                         r_bf == cab::Regime::GeneralSymmetric &&
                         cab::policy_for(r_bf) == cab::PolicyChoice::BF;
    const double dom_af = worst_dominance(kKernelsP2Biased, 200'000, o);
    const double dom_bf = worst_dominance(kKernelsGeneralSymmetric, 200'000, o);
    const auto bench = experiment::run_bench({}, seed_for(o, 12));
    const bool pass = regimes && dom_af >= 0.99 && dom_bf >= 0.99 && bench.growthExponent <= 2.5;
    return CriterionResult{
        pass,
        std::string("regimes ") + std::string(cab::to_string(r_af)) + "/" +
            std::string(cab::to_string(r_bf)) + fmt(", min X ratio %.4f / %.4f", dom_af, dom_bf) +
            fmt(", GrIn growth exponent %.2f", bench.growthExponent),
        "P2Biased->AF, GeneralSymmetric->BF, ratios >= 0.99, exponent <= 2.5"};
  }});

  return out;
}

struct Report {
  int passed = 0;
  int failed = 0;
};

/// Runs the selected criteria (all when `only` is empty), printing one line
/// per criterion.
inline Report run(const VerifyOptions& opts, std::FILE* out = stdout,
                  const std::vector<int>& only = {}) {
  Report rep;
  for (const auto& c : criteria()) {
    if (!only.empty() && std::find(only.begin(), only.end(), c.id) == only.end()) continue;
    const auto t0 = std::chrono::steady_clock::now();
    CriterionResult r;
    try {
      r = c.run(opts);
    } catch (const std::exception& e) {
      r = {false, std::string("exception: ") + e.what(), "no exception"};
    }
    const double s = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    (r.pass ? rep.passed : rep.failed)++;
    std::fprintf(out, "[%s] %2d %-48s measured: %s | bound: %s (%.1fs)\n",
                 r.pass ? "PASS" : "FAIL", c.id, c.name.c_str(), r.measured.c_str(),
                 r.bound.c_str(), s);
    std::fflush(out);
  }
  return rep;
}

}  // namespace hetsched::acceptance
