#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <limits>
#include <numeric>
#include <optional>
#include <random>
#include <span>
#include <string_view>
#include <vector>

#include "hetsched/cab.hpp"
#include "hetsched/grin.hpp"
#include "hetsched/model.hpp"

// Discrete-event simulator of a closed batch network: a fixed set of
// programs, each with exactly one task in the system. When a task finishes,
// its program's next task is dispatched immediately.

namespace hetsched::sim {

enum class Distribution { Exponential, BoundedPareto, Uniform, Constant };
enum class ServiceOrder { PS, FCFS };
enum class Policy { CAB, GRIN, BF, RD, JSQ, LB, OPT };

inline constexpr Distribution kAllDistributions[] = {
    Distribution::Exponential, Distribution::BoundedPareto, Distribution::Uniform,
    Distribution::Constant};
inline constexpr Policy kAllPolicies[] = {Policy::CAB, Policy::GRIN, Policy::BF, Policy::RD,
                                          Policy::JSQ, Policy::LB,   Policy::OPT};

constexpr std::string_view to_string(Distribution d) {
  switch (d) {
    case Distribution::Exponential: return "exponential";
    case Distribution::BoundedPareto: return "bounded_pareto";
    case Distribution::Uniform: return "uniform";
    case Distribution::Constant: return "constant";
  }
  return "?";
}

constexpr std::string_view to_string(ServiceOrder o) {
  return o == ServiceOrder::PS ? "PS" : "FCFS";
}

constexpr std::string_view to_string(Policy p) {
  switch (p) {
    case Policy::CAB: return "CAB";
    case Policy::GRIN: return "GRIN";
    case Policy::BF: return "BF";
    case Policy::RD: return "RD";
    case Policy::JSQ: return "JSQ";
    case Policy::LB: return "LB";
    case Policy::OPT: return "OPT";
  }
  return "?";
}

inline Distribution parse_distribution(std::string_view s) {
  for (auto d : kAllDistributions)
    if (to_string(d) == s) return d;
  if (s == "pareto" || s == "bp") return Distribution::BoundedPareto;
  if (s == "exp") return Distribution::Exponential;
  throw Error(hetsched::detail::concat("unknown distribution '", s, "'"));
}

inline ServiceOrder parse_order(std::string_view s) {
  if (s == "PS" || s == "ps") return ServiceOrder::PS;
  if (s == "FCFS" || s == "fcfs") return ServiceOrder::FCFS;
  throw Error(hetsched::detail::concat("unknown service order '", s, "'"));
}

inline Policy parse_policy(std::string_view s) {
  for (auto p : kAllPolicies)
    if (to_string(p) == s) return p;
  throw Error(hetsched::detail::concat("unknown policy '", s, "'"));
}

inline bool is_target_policy(Policy p) {
  return p == Policy::CAB || p == Policy::GRIN || p == Policy::OPT;
}

// ---------------------------------------------------------------------------
// Seeding

inline std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

// Independent stream seed for (master, stream). Stream 0 is the dispatcher,
// stream p + 1 the task sizes of program p.
inline std::uint64_t stream_seed(std::uint64_t master, std::uint64_t stream) {
  return splitmix64(splitmix64(master) ^ splitmix64(stream + 0x5851f42d4c957f2dULL));
}

// ---------------------------------------------------------------------------
// Task sizes: all distributions have mean 1 work unit.

struct BoundedParetoParams {
  double shape = 1.5;
  double ratio = 1e3;  // upper / lower bound

  // Lower bound L making the mean exactly 1.
  double lower() const {
    const double a = shape, r = ratio;
    double mean_over_l;
    if (std::abs(a - 1.0) < 1e-12)
      mean_over_l = std::log(r) / (1.0 - 1.0 / r);
    else
      mean_over_l = a / (a - 1.0) * (1.0 - std::pow(r, 1.0 - a)) / (1.0 - std::pow(r, -a));
    return 1.0 / mean_over_l;
  }
  double upper() const { return lower() * ratio; }
};

class SizeSampler {
 public:
  explicit SizeSampler(Distribution d, BoundedParetoParams bp = {})
      : dist_(d), shape_(bp.shape), low_(bp.lower()), high_(bp.upper()) {
    if (!(bp.shape > 0.0) || !(bp.ratio > 1.0)) throw Error("invalid bounded Pareto parameters");
    tail_ = 1.0 - std::pow(low_ / high_, shape_);
  }

  template <typename URNG>
  double operator()(URNG& rng) const {
    switch (dist_) {
      case Distribution::Exponential: return std::exponential_distribution<double>(1.0)(rng);
      case Distribution::Uniform: return std::uniform_real_distribution<double>(0.0, 2.0)(rng);
      case Distribution::Constant: return 1.0;
      case Distribution::BoundedPareto: {
        // Inverse CDF of the Pareto density truncated to [L, H].
        const double u = std::uniform_real_distribution<double>(0.0, 1.0)(rng);
        return low_ / std::pow(1.0 - u * tail_, 1.0 / shape_);
      }
    }
    return 1.0;
  }

  Distribution distribution() const noexcept { return dist_; }
  double lower() const noexcept { return low_; }
  double upper() const noexcept { return high_; }

 private:
  Distribution dist_;
  double shape_, low_, high_, tail_ = 1.0;
};

template <typename URNG>
double sample_size(Distribution d, URNG& rng) {
  return SizeSampler(d)(rng);
}

// ---------------------------------------------------------------------------
// Configuration

struct SimConfig {
  AffinityMatrix mu{{20.0, 15.0}, {3.0, 8.0}};
  long numPrograms = 20;
  std::vector<double> typeFractions{0.5, 0.5};
  Distribution distribution = Distribution::Exponential;
  ServiceOrder serviceOrder = ServiceOrder::PS;
  Policy policy = Policy::CAB;
  PowerModel powerModel{};
  long completionsTarget = 100'000;
  double warmupFraction = 0.1;
  std::uint64_t seed = 1;
  BoundedParetoParams pareto{};
  double exhaustiveCap = grin::kDefaultStateCap;
  // Precomputed target for CAB/GRIN/OPT. When empty it is derived from mu.
  std::optional<AssignmentMatrix> target;

  void validate() const {
    if (numPrograms < 1) throw Error("need at least one program");
    if (typeFractions.size() != mu.task_types())
      throw Error(hetsched::detail::concat("expected ", mu.task_types(), " type fractions, got ",
                                           typeFractions.size()));
    double sum = 0.0;
    for (double f : typeFractions) {
      if (!(f >= 0.0)) throw Error("type fractions must be nonnegative");
      sum += f;
    }
    if (std::abs(sum - 1.0) > 1e-9) throw Error("type fractions must sum to 1");
    if (completionsTarget < 1000) throw Error("completionsTarget must be at least 1000");
    if (!(warmupFraction >= 0.0 && warmupFraction < 1.0))
      throw Error("warmupFraction must lie in [0, 1)");
    powerModel.validate();
  }
};

/// Programs per task type: fraction * N rounded by largest remainder so the
/// counts sum to N (ties go to the lower type index).
inline std::vector<long> program_type_counts(std::span<const double> fractions, long n) {
  std::vector<long> counts(fractions.size());
  std::vector<std::pair<double, std::size_t>> rem;
  long assigned = 0;
  for (std::size_t i = 0; i < fractions.size(); ++i) {
    // Round away representation error such as 0.7 * 20 = 13.999...
    const double exact = std::round(fractions[i] * static_cast<double>(n) * 1e9) / 1e9;
    counts[i] = static_cast<long>(std::floor(exact));
    assigned += counts[i];
    rem.emplace_back(exact - std::floor(exact), i);
  }
  std::stable_sort(rem.begin(), rem.end(),
                   [](const auto& a, const auto& b) { return a.first > b.first; });
  for (std::size_t r = 0; assigned < n && r < rem.size(); ++r, ++assigned) ++counts[rem[r].second];
  return counts;
}

// Target state for a target-state policy.
inline AssignmentMatrix resolve_target(const SimConfig& cfg, std::span<const long> counts) {
  if (cfg.target) {
    check_shapes(cfg.mu, *cfg.target);
    for (std::size_t i = 0; i < counts.size(); ++i)
      if (cfg.target->row_total(i) != counts[i])
        throw Error("target assignment row totals do not match the program mix");
    return *cfg.target;
  }
  switch (cfg.policy) {
    case Policy::CAB: {
      if (cfg.mu.task_types() != 2 || cfg.mu.processor_types() != 2)
        throw Error("CAB policy needs a 2x2 affinity matrix");
      const auto sol = cab::target_state(cfg.mu, counts[0], counts[1]);
      return to_assignment(sol.targetState, counts[0], counts[1]);
    }
    case Policy::GRIN: return grin::grin_solve(cfg.mu, counts).assignment;
    case Policy::OPT: return grin::exhaustive_opt(cfg.mu, counts, cfg.exhaustiveCap).assignment;
    default: throw Error("policy has no target state");
  }
}

// ---------------------------------------------------------------------------
// Runtime types

struct Program {
  long id = 0;
  std::size_t taskType = 0;
  std::optional<std::size_t> assignedProcessor;
};

struct ActiveTask {
  long programId = 0;
  std::size_t type = 0;
  std::size_t processor = 0;
  double size = 1.0;           // work units
  double remainingWork = 1.0;  // work units
  double entryTime = 0.0;
};

struct CompletionRecord {
  long programId = 0;
  std::size_t type = 0;
  std::size_t processor = 0;
  double completionTime = 0.0;
  double responseTime = 0.0;
  double executionTime = 0.0;  // size / mu(type, processor)
  double energy = 0.0;         // P(type, processor) * executionTime
};

/// Type-i programs take columns in order: the first target(i,0) go to
/// processor 0, the next target(i,1) to processor 1, and so on.
inline std::vector<std::size_t> static_partition(const AssignmentMatrix& target,
                                                 std::span<const Program> programs) {
  std::vector<std::vector<long>> left = target.counts().to_rows();
  std::vector<std::size_t> out(programs.size());
  for (std::size_t p = 0; p < programs.size(); ++p) {
    auto& row = left.at(programs[p].taskType);
    auto it = std::find_if(row.begin(), row.end(), [](long c) { return c > 0; });
    if (it == row.end()) throw Error("target assignment has fewer slots than programs");
    --*it;
    out[p] = static_cast<std::size_t>(it - row.begin());
  }
  return out;
}

struct DispatchView {
  const AffinityMatrix& mu;
  std::span<const std::vector<ActiveTask>> queues;
};

/// Processor for an arriving task. Target-state policies return the
/// program's pinned processor; RD draws uniformly; BF, JSQ and LB break ties
/// toward the lowest index. LB compares the time each processor needs to
/// drain its queue plus the new task, using true sizes.
template <typename URNG>
std::size_t dispatch(Policy policy, const ActiveTask& arriving, const DispatchView& view,
                     std::optional<std::size_t> assigned, URNG& rng) {
  const std::size_t l = view.mu.processor_types();
  const std::size_t type = arriving.type;
  switch (policy) {
    case Policy::RD:
      return std::uniform_int_distribution<std::size_t>(0, l - 1)(rng);
    case Policy::BF: return view.mu.row_argmax(type);
    case Policy::JSQ: {
      std::size_t best = 0;
      for (std::size_t j = 1; j < l; ++j)
        if (view.queues[j].size() < view.queues[best].size()) best = j;
      return best;
    }
    case Policy::LB: {
      std::size_t best = 0;
      double best_work = std::numeric_limits<double>::infinity();
      for (std::size_t j = 0; j < l; ++j) {
        double work = arriving.size / view.mu(type, j);
        for (const auto& t : view.queues[j]) work += t.remainingWork / view.mu(t.type, j);
        if (work < best_work) {
          best_work = work;
          best = j;
        }
      }
      return best;
    }
    case Policy::CAB:
    case Policy::GRIN:
    case Policy::OPT:
      if (!assigned) throw Error("target-state policy without a pinned processor");
      return *assigned;
  }
  return 0;
}

// ---------------------------------------------------------------------------
// Simulator

struct StepResult {
  CompletionRecord completed;
  double elapsed = 0.0;             // time advanced by this event
  std::size_t nextProcessor = 0;    // where the program's next task went
  double nextSize = 0.0;
};

class Simulator {
 public:
  explicit Simulator(const SimConfig& cfg)
      : cfg_(cfg),
        sampler_(cfg.distribution, cfg.pareto),
        power_(power_matrix(cfg.mu, cfg.powerModel)),
        queues_(cfg.mu.processor_types()),
        dispatch_rng_(stream_seed(cfg.seed, 0)) {
    cfg_.validate();
    counts_ = program_type_counts(cfg_.typeFractions, cfg_.numPrograms);

    long id = 0;
    for (std::size_t i = 0; i < counts_.size(); ++i)
      for (long c = 0; c < counts_[i]; ++c) programs_.push_back({id++, i, std::nullopt});

    if (is_target_policy(cfg_.policy)) {
      target_ = resolve_target(cfg_, counts_);
      const auto pins = static_partition(*target_, programs_);
      for (std::size_t p = 0; p < programs_.size(); ++p) programs_[p].assignedProcessor = pins[p];
    }

    size_rngs_.reserve(programs_.size());
    for (const auto& p : programs_)
      size_rngs_.emplace_back(stream_seed(cfg_.seed, static_cast<std::uint64_t>(p.id) + 1));

    for (const auto& p : programs_) issue(p);
  }

  /// Advances to the next completion, records it and issues the program's
  /// next task.
  StepResult step() {
    const auto [proc, idx, dt] = next_completion();
    advance(dt);
    now_ += dt;

    auto& q = queues_[proc];
    const ActiveTask done = q[idx];
    q.erase(q.begin() + static_cast<std::ptrdiff_t>(idx));

    StepResult out;
    out.elapsed = dt;
    auto& rec = out.completed;
    rec.programId = done.programId;
    rec.type = done.type;
    rec.processor = proc;
    rec.completionTime = now_;
    rec.responseTime = now_ - done.entryTime;
    rec.executionTime = done.size / cfg_.mu(done.type, proc);
    rec.energy = power_(done.type, proc) * rec.executionTime;

    const auto& next = issue(programs_[static_cast<std::size_t>(done.programId)]);
    out.nextProcessor = next.processor;
    out.nextSize = next.size;
    return out;
  }

  double now() const noexcept { return now_; }
  std::span<const std::vector<ActiveTask>> queues() const noexcept { return queues_; }
  std::span<const Program> programs() const noexcept { return programs_; }
  const std::vector<long>& type_counts() const noexcept { return counts_; }
  const std::optional<AssignmentMatrix>& target() const noexcept { return target_; }
  const SimConfig& config() const noexcept { return cfg_; }

  std::size_t tasks_in_system() const {
    std::size_t s = 0;
    for (const auto& q : queues_) s += q.size();
    return s;
  }

  // Time processor j needs to finish everything it holds, ignoring arrivals.
  double pending_time(std::size_t j) const {
    double w = 0.0;
    for (const auto& t : queues_[j]) w += t.remainingWork / cfg_.mu(t.type, j);
    return w;
  }

 private:
  struct Next {
    std::size_t processor;
    std::size_t index;
    double dt;
  };

  const ActiveTask& issue(const Program& p) {
    ActiveTask t;
    t.programId = p.id;
    t.type = p.taskType;
    t.size = sampler_(size_rngs_[static_cast<std::size_t>(p.id)]);
    t.remainingWork = t.size;
    t.entryTime = now_;
    const DispatchView view{cfg_.mu, queues_};
    t.processor = dispatch(cfg_.policy, t, view, p.assignedProcessor, dispatch_rng_);
    queues_[t.processor].push_back(t);
    return queues_[t.processor].back();
  }

  Next next_completion() const {
    Next best{0, 0, std::numeric_limits<double>::infinity()};
    for (std::size_t j = 0; j < queues_.size(); ++j) {
      const auto& q = queues_[j];
      if (q.empty()) continue;
      if (cfg_.serviceOrder == ServiceOrder::FCFS) {
        const double dt = q.front().remainingWork / cfg_.mu(q.front().type, j);
        if (dt < best.dt) best = {j, 0, dt};
        continue;
      }
      const double share = static_cast<double>(q.size());
      for (std::size_t i = 0; i < q.size(); ++i) {
        const double dt = q[i].remainingWork * share / cfg_.mu(q[i].type, j);
        if (dt < best.dt) best = {j, i, dt};
      }
    }
    if (!std::isfinite(best.dt)) throw Error("no task in the system");
    return best;
  }

  // Depletes work for dt seconds: PS shares each processor equally among its
  // residents, FCFS serves only the head.
  void advance(double dt) {
    for (std::size_t j = 0; j < queues_.size(); ++j) {
      auto& q = queues_[j];
      if (q.empty()) continue;
      if (cfg_.serviceOrder == ServiceOrder::FCFS) {
        auto& h = q.front();
        h.remainingWork = std::max(0.0, h.remainingWork - dt * cfg_.mu(h.type, j));
        continue;
      }
      const double share = static_cast<double>(q.size());
      for (auto& t : q)
        t.remainingWork = std::max(0.0, t.remainingWork - dt * cfg_.mu(t.type, j) / share);
    }
  }

  SimConfig cfg_;
  SizeSampler sampler_;
  Grid<double> power_;
  std::vector<std::vector<ActiveTask>> queues_;
  std::vector<Program> programs_;
  std::vector<long> counts_;
  std::optional<AssignmentMatrix> target_;
  std::vector<std::mt19937_64> size_rngs_;
  std::mt19937_64 dispatch_rng_;
  double now_ = 0.0;
};

using TraceSink = std::function<void(const CompletionRecord&)>;

/// Runs until completionsTarget completions, drops the first warmupFraction
/// of them and reports throughput, mean response time, mean energy per task
/// and EDP = E[energy] * E[response] over the rest.
inline Metrics run_sim(const SimConfig& cfg, const TraceSink& trace = {}) {
  Simulator sim(cfg);
  const long warmup = static_cast<long>(std::floor(cfg.warmupFraction *
                                                   static_cast<double>(cfg.completionsTarget)));
  double cutoff = 0.0, sum_t = 0.0, sum_e = 0.0;
  for (long c = 0; c < cfg.completionsTarget; ++c) {
    const auto r = sim.step();
    if (trace) trace(r.completed);
    if (c < warmup) {
      cutoff = r.completed.completionTime;
      continue;
    }
    sum_t += r.completed.responseTime;
    sum_e += r.completed.energy;
  }
  Metrics m;
  m.completedTasks = cfg.completionsTarget - warmup;
  m.elapsedTime = sim.now() - cutoff;
  const double n = static_cast<double>(m.completedTasks);
  m.throughput = n / m.elapsedTime;
  m.meanResponseTime = sum_t / n;
  m.meanEnergyPerTask = sum_e / n;
  m.edp = m.meanEnergyPerTask * m.meanResponseTime;
  return m;
}

// X * E[T] / N; 1 when Little's Law holds exactly.
inline double little_check(const Metrics& m, long population) {
  return m.throughput * m.meanResponseTime / static_cast<double>(population);
}

}  // namespace hetsched::sim
