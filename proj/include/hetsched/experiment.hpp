#pragma once

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cstdio>
#include <fstream>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include "json.hpp"

#include "hetsched/cab.hpp"
#include "hetsched/grin.hpp"
#include "hetsched/instances.hpp"
#include "hetsched/sim.hpp"

// Experiment harness: JSON spec in, CSV/JSON tables out.

namespace hetsched::experiment {

using json = nlohmann::json;

enum class Mode { Simulate, Optimize, Bench, Verify };

struct OptimizeSettings {
  long instances = 200;
  std::size_t taskTypes = 3;
  std::size_t processorTypes = 3;
  long minTasks = 1;
  long maxTasks = 10;
  instances::RateRange rates{};
  double exhaustiveCap = grin::kDefaultStateCap;
};

struct BenchSettings {
  std::vector<std::size_t> sizes{3, 4, 5, 6, 7, 8, 9, 10};
  long instances = 100;
  long minTasks = 1;
  long maxTasks = 10;
  int repeats = 20;  // solves averaged per timing sample
  instances::RateRange rates{};
};

struct ExperimentSpec {
  sim::SimConfig base;
  std::vector<double> sweepEta{0.1, 0.2, 0.3, 0.4, 0.5, 0.6, 0.7, 0.8, 0.9};
  std::vector<sim::Policy> policies{sim::Policy::CAB, sim::Policy::BF, sim::Policy::RD,
                                    sim::Policy::JSQ, sim::Policy::LB};
  std::vector<sim::Distribution> distributions{std::begin(sim::kAllDistributions),
                                               std::end(sim::kAllDistributions)};
  std::vector<sim::ServiceOrder> orders{sim::ServiceOrder::PS};
  std::uint64_t masterSeed = 1;
  std::vector<std::uint64_t> seeds;  // one replication per seed
  std::string outputPath;
  Mode mode = Mode::Simulate;
  OptimizeSettings optimize;
  BenchSettings bench;

  // Sweeping eta only makes sense with two task types; otherwise the base
  // type fractions form the single cell.
  bool sweeps_eta() const { return base.mu.task_types() == 2; }

  void validate() const {
    if (policies.empty() || distributions.empty() || orders.empty())
      throw Error("policy, distribution and order lists must be nonempty");
    if (seeds.empty()) throw Error("seed list must be nonempty");
    if (sweeps_eta()) {
      if (sweepEta.empty()) throw Error("eta sweep must be nonempty");
      for (double e : sweepEta)
        if (!(e > 0.0 && e < 1.0)) throw Error("eta values must lie in (0, 1)");
    }
    auto probe = base;
    if (sweeps_eta()) probe.typeFractions = {sweepEta.front(), 1.0 - sweepEta.front()};
    probe.validate();
  }
};

// Replication seeds r = 0..count-1 derived from the master seed.
inline std::vector<std::uint64_t> derive_seeds(std::uint64_t master, long count) {
  std::vector<std::uint64_t> out;
  for (long r = 0; r < count; ++r)
    out.push_back(sim::stream_seed(master, static_cast<std::uint64_t>(r) + 0x1000));
  return out;
}

// Seed of one simulation cell. The policy is deliberately not mixed in, so
// every policy in a cell sees the same task-size streams.
inline std::uint64_t cell_seed(std::uint64_t replication_seed, std::size_t eta_idx,
                               std::size_t dist_idx, std::size_t order_idx) {
  const std::uint64_t cell = (static_cast<std::uint64_t>(eta_idx) << 32) |
                             (static_cast<std::uint64_t>(dist_idx) << 16) | order_idx;
  return sim::stream_seed(replication_seed, cell);
}

// ---------------------------------------------------------------------------
// Spec parsing

namespace detail {

template <typename T>
T get_or(const json& j, const char* key, T fallback) {
  return j.contains(key) ? j.at(key).get<T>() : fallback;
}

inline std::vector<std::string> string_list(const json& j) {
  if (j.is_string()) return {j.get<std::string>()};
  return j.get<std::vector<std::string>>();
}

}  // namespace detail

/// Builds a spec from a JSON document. Every field is optional; the defaults
/// are the two-type P1-biased experiment (N = 20, nine eta values, all four
/// distributions, PS, proportional power).
inline ExperimentSpec parse_spec(const json& j) {
  ExperimentSpec s;
  try {
    if (j.contains("mu"))
      s.base.mu = AffinityMatrix::from_rows(j.at("mu").get<std::vector<std::vector<double>>>());
    s.base.numPrograms = detail::get_or<long>(j, "num_programs", s.base.numPrograms);
    if (j.contains("type_fractions"))
      s.base.typeFractions = j.at("type_fractions").get<std::vector<double>>();
    else if (s.base.mu.task_types() != 2)
      s.base.typeFractions.assign(s.base.mu.task_types(),
                                  1.0 / static_cast<double>(s.base.mu.task_types()));
    if (j.contains("eta")) s.sweepEta = j.at("eta").get<std::vector<double>>();
    if (j.contains("policies")) {
      s.policies.clear();
      for (const auto& p : detail::string_list(j.at("policies")))
        s.policies.push_back(sim::parse_policy(p));
    }
    if (j.contains("distributions")) {
      s.distributions.clear();
      for (const auto& d : detail::string_list(j.at("distributions")))
        s.distributions.push_back(sim::parse_distribution(d));
    }
    if (j.contains("orders")) {
      s.orders.clear();
      for (const auto& o : detail::string_list(j.at("orders")))
        s.orders.push_back(sim::parse_order(o));
    }
    if (j.contains("power")) {
      const auto& p = j.at("power");
      s.base.powerModel.coefficient = detail::get_or(p, "coefficient", 1.0);
      s.base.powerModel.exponent = detail::get_or(p, "exponent", 1.0);
    }
    s.base.completionsTarget = detail::get_or<long>(j, "completions", s.base.completionsTarget);
    s.base.warmupFraction = detail::get_or(j, "warmup_fraction", s.base.warmupFraction);
    if (j.contains("pareto")) {
      s.base.pareto.shape = detail::get_or(j.at("pareto"), "shape", s.base.pareto.shape);
      s.base.pareto.ratio = detail::get_or(j.at("pareto"), "ratio", s.base.pareto.ratio);
    }
    s.base.exhaustiveCap = detail::get_or(j, "exhaustive_cap", s.base.exhaustiveCap);

    s.masterSeed = detail::get_or<std::uint64_t>(j, "seed", 1);
    if (j.contains("seeds"))
      s.seeds = j.at("seeds").get<std::vector<std::uint64_t>>();
    else
      s.seeds = derive_seeds(s.masterSeed, detail::get_or<long>(j, "replications", 1));
    s.outputPath = detail::get_or<std::string>(j, "output", "");

    if (j.contains("optimize")) {
      const auto& o = j.at("optimize");
      auto& os = s.optimize;
      os.instances = detail::get_or(o, "instances", os.instances);
      os.taskTypes = detail::get_or(o, "task_types", os.taskTypes);
      os.processorTypes = detail::get_or(o, "processor_types", os.processorTypes);
      os.minTasks = detail::get_or(o, "min_tasks", os.minTasks);
      os.maxTasks = detail::get_or(o, "max_tasks", os.maxTasks);
      os.rates.lo = detail::get_or(o, "rate_min", os.rates.lo);
      os.rates.hi = detail::get_or(o, "rate_max", os.rates.hi);
      os.exhaustiveCap = detail::get_or(o, "exhaustive_cap", os.exhaustiveCap);
    }
    if (j.contains("bench")) {
      const auto& b = j.at("bench");
      auto& bs = s.bench;
      if (b.contains("sizes")) bs.sizes = b.at("sizes").get<std::vector<std::size_t>>();
      bs.instances = detail::get_or(b, "instances", bs.instances);
      bs.minTasks = detail::get_or(b, "min_tasks", bs.minTasks);
      bs.maxTasks = detail::get_or(b, "max_tasks", bs.maxTasks);
      bs.repeats = detail::get_or(b, "repeats", bs.repeats);
    }
  } catch (const json::exception& e) {
    throw Error(std::string("malformed experiment spec: ") + e.what());
  }
  return s;
}

inline ExperimentSpec load_spec(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open config '" + path + "'");
  json j;
  try {
    in >> j;
  } catch (const json::exception& e) {
    throw Error("config '" + path + "' is not valid JSON: " + e.what());
  }
  return parse_spec(j);
}

// ---------------------------------------------------------------------------
// Simulation table

struct ResultRow {
  double eta = 0.0;
  sim::Policy policy = sim::Policy::CAB;
  sim::Distribution distribution = sim::Distribution::Exponential;
  sim::ServiceOrder serviceOrder = sim::ServiceOrder::PS;
  std::uint64_t seed = 0;
  double xSim = 0.0;
  double meanT = 0.0;
  double meanEnergy = 0.0;
  double edp = 0.0;
  double littleRatio = 0.0;
  std::optional<double> xTheory;
  std::optional<std::string> error;  // set when the cell could not run
};

inline constexpr const char* kCsvHeader =
    "eta,policy,distribution,order,seed,x_sim,mean_t,mean_energy,edp,little_ratio,x_theory";

// Little's-Law ratio tolerance used for the warning count.
inline double little_tolerance(sim::Distribution d) {
  return d == sim::Distribution::BoundedPareto ? 0.05 : 0.02;
}

namespace detail {

inline std::string fmt6(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.6g", v);
  return buf;
}

// Runs fn(i) for i in [0, n) on all hardware threads.
template <typename Fn>
void parallel_for(std::size_t n, Fn&& fn) {
  const std::size_t workers =
      std::min<std::size_t>(n, std::max(1u, std::thread::hardware_concurrency()));
  if (workers <= 1) {
    for (std::size_t i = 0; i < n; ++i) fn(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::vector<std::thread> pool;
  for (std::size_t w = 0; w < workers; ++w)
    pool.emplace_back([&] {
      for (std::size_t i; (i = next.fetch_add(1)) < n;) fn(i);
    });
  for (auto& t : pool) t.join();
}

inline std::vector<std::string> split(const std::string& s, char sep) {
  std::vector<std::string> out;
  std::string cur;
  std::istringstream in(s);
  while (std::getline(in, cur, sep)) out.push_back(cur);
  if (!s.empty() && s.back() == sep) out.emplace_back();
  return out;
}

}  // namespace detail

// CAB closed-form optimum for two-type affinity configs, when defined.
inline std::optional<double> theory_throughput(const AffinityMatrix& mu,
                                               std::span<const long> counts) {
  if (mu.task_types() != 2 || mu.processor_types() != 2) return std::nullopt;
  try {
    return cab::target_state(mu, counts[0], counts[1]).xMax;
  } catch (const Error&) {
    return std::nullopt;
  }
}

/// One row per (eta, policy, distribution, order, seed), in that nesting
/// order. Cells run concurrently; the result order does not depend on it.
inline std::vector<ResultRow> run_experiment(const ExperimentSpec& spec) {
  spec.validate();
  const std::vector<double> etas =
      spec.sweeps_eta() ? spec.sweepEta : std::vector<double>{spec.base.typeFractions.front()};

  struct Cell {
    std::size_t e, p, d, o, s;
  };
  std::vector<Cell> cells;
  for (std::size_t e = 0; e < etas.size(); ++e)
    for (std::size_t p = 0; p < spec.policies.size(); ++p)
      for (std::size_t d = 0; d < spec.distributions.size(); ++d)
        for (std::size_t o = 0; o < spec.orders.size(); ++o)
          for (std::size_t s = 0; s < spec.seeds.size(); ++s) cells.push_back({e, p, d, o, s});

  std::vector<ResultRow> rows(cells.size());
  detail::parallel_for(cells.size(), [&](std::size_t idx) {
    const auto& c = cells[idx];
    sim::SimConfig cfg = spec.base;
    if (spec.sweeps_eta()) cfg.typeFractions = {etas[c.e], 1.0 - etas[c.e]};
    cfg.policy = spec.policies[c.p];
    cfg.distribution = spec.distributions[c.d];
    cfg.serviceOrder = spec.orders[c.o];
    cfg.seed = cell_seed(spec.seeds[c.s], c.e, c.d, c.o);

    ResultRow& r = rows[idx];
    r.eta = etas[c.e];
    r.policy = cfg.policy;
    r.distribution = cfg.distribution;
    r.serviceOrder = cfg.serviceOrder;
    r.seed = spec.seeds[c.s];
    const auto counts = sim::program_type_counts(cfg.typeFractions, cfg.numPrograms);
    r.xTheory = theory_throughput(cfg.mu, counts);
    try {
      const auto m = sim::run_sim(cfg);
      r.xSim = m.throughput;
      r.meanT = m.meanResponseTime;
      r.meanEnergy = m.meanEnergyPerTask;
      r.edp = m.edp;
      r.littleRatio = sim::little_check(m, cfg.numPrograms);
    } catch (const Error& e) {
      r.error = e.what();
    }
  });
  return rows;
}

inline std::string format_row(const ResultRow& r) {
  std::ostringstream os;
  os << detail::fmt6(r.eta) << ',' << sim::to_string(r.policy) << ','
     << sim::to_string(r.distribution) << ',' << sim::to_string(r.serviceOrder) << ',' << r.seed;
  if (r.error) {
    os << ",error,error,error,error,error,";
  } else {
    os << ',' << detail::fmt6(r.xSim) << ',' << detail::fmt6(r.meanT) << ','
       << detail::fmt6(r.meanEnergy) << ',' << detail::fmt6(r.edp) << ','
       << detail::fmt6(r.littleRatio) << ',';
  }
  if (r.xTheory) os << detail::fmt6(*r.xTheory);
  return os.str();
}

inline std::string to_csv(std::span<const ResultRow> rows) {
  std::string out = std::string(kCsvHeader) + "\n";
  for (const auto& r : rows) out += format_row(r) + "\n";
  return out;
}

inline ResultRow parse_row(const std::string& line) {
  const auto f = detail::split(line, ',');
  if (f.size() != 11) throw Error("CSV row needs 11 fields: '" + line + "'");
  ResultRow r;
  try {
    r.eta = std::stod(f[0]);
    r.policy = sim::parse_policy(f[1]);
    r.distribution = sim::parse_distribution(f[2]);
    r.serviceOrder = sim::parse_order(f[3]);
    r.seed = std::stoull(f[4]);
    if (f[5] == "error") {
      r.error = "error";
    } else {
      r.xSim = std::stod(f[5]);
      r.meanT = std::stod(f[6]);
      r.meanEnergy = std::stod(f[7]);
      r.edp = std::stod(f[8]);
      r.littleRatio = std::stod(f[9]);
    }
    if (!f[10].empty()) r.xTheory = std::stod(f[10]);
  } catch (const std::logic_error&) {
    throw Error("unparseable CSV row: '" + line + "'");
  }
  return r;
}

inline std::vector<ResultRow> parse_csv(const std::string& text) {
  std::istringstream in(text);
  std::string line;
  if (!std::getline(in, line) || line != kCsvHeader) throw Error("unexpected CSV header");
  std::vector<ResultRow> rows;
  while (std::getline(in, line))
    if (!line.empty()) rows.push_back(parse_row(line));
  return rows;
}

struct RatioRange {
  double min = 0.0;
  double max = 0.0;
};

struct BaselineRatios {
  RatioRange throughput;  // X(reference) / X(baseline)
  RatioRange edp;         // EDP(baseline) / EDP(reference)
};

/// Ratios of the reference policy against each other policy, per
/// (distribution, order, eta) cell after averaging over seeds.
inline std::map<sim::Policy, BaselineRatios> baseline_ratios(std::span<const ResultRow> rows,
                                                             sim::Policy reference) {
  struct Acc {
    double x = 0.0, edp = 0.0;
    int n = 0;
  };
  using Key = std::tuple<sim::Distribution, sim::ServiceOrder, double, sim::Policy>;
  std::map<Key, Acc> acc;
  for (const auto& r : rows) {
    if (r.error) continue;
    auto& a = acc[{r.distribution, r.serviceOrder, r.eta, r.policy}];
    a.x += r.xSim;
    a.edp += r.edp;
    ++a.n;
  }
  std::map<sim::Policy, BaselineRatios> out;
  std::map<sim::Policy, bool> seen;
  for (const auto& [key, base] : acc) {
    const auto& [d, o, eta, p] = key;
    if (p == reference) continue;
    const auto ref_it = acc.find({d, o, eta, reference});
    if (ref_it == acc.end()) continue;
    const auto& ref = ref_it->second;
    const double xr = (ref.x / ref.n) / (base.x / base.n);
    const double er = (base.edp / base.n) / (ref.edp / ref.n);
    auto& br = out[p];
    if (!seen[p]) {
      br = {{xr, xr}, {er, er}};
      seen[p] = true;
    } else {
      br.throughput = {std::min(br.throughput.min, xr), std::max(br.throughput.max, xr)};
      br.edp = {std::min(br.edp.min, er), std::max(br.edp.max, er)};
    }
  }
  return out;
}

inline long little_warnings(std::span<const ResultRow> rows) {
  return std::count_if(rows.begin(), rows.end(), [](const ResultRow& r) {
    return !r.error && std::abs(r.littleRatio - 1.0) > little_tolerance(r.distribution);
  });
}

/// Per-policy means of the numeric columns plus reference-vs-baseline ratios.
inline json summarize(std::span<const ResultRow> rows) {
  json out;
  out["rows"] = rows.size();
  json policies = json::object();
  std::map<sim::Policy, std::vector<const ResultRow*>> by_policy;
  long errors = 0;
  for (const auto& r : rows) {
    if (r.error) {
      ++errors;
      continue;
    }
    by_policy[r.policy].push_back(&r);
  }
  for (const auto& [p, rs] : by_policy) {
    double x = 0, t = 0, e = 0, d = 0, l = 0;
    for (const auto* r : rs) {
      x += r->xSim;
      t += r->meanT;
      e += r->meanEnergy;
      d += r->edp;
      l += r->littleRatio;
    }
    const double n = static_cast<double>(rs.size());
    policies[std::string(sim::to_string(p))] = {{"rows", rs.size()},
                                                {"x_sim", x / n},
                                                {"mean_t", t / n},
                                                {"mean_energy", e / n},
                                                {"edp", d / n},
                                                {"little_ratio", l / n}};
  }
  out["policies"] = policies;
  out["errors"] = errors;
  out["little_warnings"] = little_warnings(rows);

  std::optional<sim::Policy> reference;
  for (auto p : {sim::Policy::CAB, sim::Policy::GRIN, sim::Policy::OPT})
    if (by_policy.count(p)) {
      reference = p;
      break;
    }
  if (reference) {
    out["reference_policy"] = std::string(sim::to_string(*reference));
    json ratios = json::object();
    for (const auto& [p, br] : baseline_ratios(rows, *reference))
      ratios[std::string(sim::to_string(p))] = {{"throughput_min", br.throughput.min},
                                                {"throughput_max", br.throughput.max},
                                                {"edp_min", br.edp.min},
                                                {"edp_max", br.edp.max}};
    out["ratios"] = ratios;
  }
  return out;
}

inline json rows_to_json(std::span<const ResultRow> rows) {
  json arr = json::array();
  for (const auto& r : rows) {
    json j = {{"eta", r.eta},
              {"policy", sim::to_string(r.policy)},
              {"distribution", sim::to_string(r.distribution)},
              {"order", sim::to_string(r.serviceOrder)},
              {"seed", r.seed}};
    if (r.error) {
      j["error"] = *r.error;
    } else {
      j["x_sim"] = r.xSim;
      j["mean_t"] = r.meanT;
      j["mean_energy"] = r.meanEnergy;
      j["edp"] = r.edp;
      j["little_ratio"] = r.littleRatio;
    }
    j["x_theory"] = r.xTheory ? json(*r.xTheory) : json(nullptr);
    arr.push_back(std::move(j));
  }
  return arr;
}

// ---------------------------------------------------------------------------
// GrIn versus the exhaustive optimum

struct OptimizeRow {
  long instance = 0;
  std::uint64_t seed = 0;
  std::vector<long> rowTotals;
  double grinThroughput = 0.0;
  std::optional<double> optThroughput;
  std::optional<double> relGap;  // (opt - grin) / opt
  double grinMicros = 0.0;
  long moves = 0;
};

struct OptimizeSummary {
  long instances = 0;
  long withGap = 0;
  double meanGap = 0.0;
  double maxGap = 0.0;
};

inline std::vector<OptimizeRow> run_optimize(const OptimizeSettings& os, std::uint64_t master) {
  std::vector<OptimizeRow> rows(static_cast<std::size_t>(os.instances));
  for (long i = 0; i < os.instances; ++i) {
    auto& r = rows[static_cast<std::size_t>(i)];
    r.instance = i;
    r.seed = sim::stream_seed(master, static_cast<std::uint64_t>(i));
    std::mt19937_64 rng(r.seed);
    const auto mu = instances::random_affinity(rng, os.taskTypes, os.processorTypes, os.rates);
    r.rowTotals = instances::random_row_totals(rng, os.taskTypes, os.minTasks, os.maxTasks);
    if (std::accumulate(r.rowTotals.begin(), r.rowTotals.end(), 0L) == 0) r.rowTotals[0] = 1;

    const auto t0 = std::chrono::steady_clock::now();
    const auto g = grin::grin_solve(mu, r.rowTotals);
    r.grinMicros =
        std::chrono::duration<double, std::micro>(std::chrono::steady_clock::now() - t0).count();
    r.grinThroughput = g.throughput;
    r.moves = g.movesApplied;
    if (grin::state_count(r.rowTotals, os.processorTypes) <= os.exhaustiveCap) {
      const auto opt = grin::exhaustive_opt(mu, r.rowTotals, os.exhaustiveCap);
      r.optThroughput = opt.throughput;
      r.relGap = std::max(0.0, (opt.throughput - g.throughput) / opt.throughput);
    }
  }
  return rows;
}

inline OptimizeSummary summarize_optimize(std::span<const OptimizeRow> rows) {
  OptimizeSummary s;
  s.instances = static_cast<long>(rows.size());
  for (const auto& r : rows) {
    if (!r.relGap) continue;
    ++s.withGap;
    s.meanGap += *r.relGap;
    s.maxGap = std::max(s.maxGap, *r.relGap);
  }
  if (s.withGap > 0) s.meanGap /= static_cast<double>(s.withGap);
  return s;
}

inline std::string optimize_csv(std::span<const OptimizeRow> rows) {
  std::ostringstream os;
  os << "instance,seed,row_totals,grin_x,opt_x,rel_gap,grin_us,moves\n";
  for (const auto& r : rows) {
    os << r.instance << ',' << r.seed << ',';
    for (std::size_t i = 0; i < r.rowTotals.size(); ++i) os << (i ? ";" : "") << r.rowTotals[i];
    os << ',' << detail::fmt6(r.grinThroughput) << ','
       << (r.optThroughput ? detail::fmt6(*r.optThroughput) : "") << ','
       << (r.relGap ? detail::fmt6(*r.relGap) : "") << ',' << detail::fmt6(r.grinMicros) << ','
       << r.moves << '\n';
  }
  return os.str();
}

// ---------------------------------------------------------------------------
// GrIn runtime scaling

struct BenchRow {
  std::size_t size = 0;
  long instances = 0;
  double medianMicros = 0.0;
  double p95Micros = 0.0;
  double meanMoves = 0.0;
};

struct BenchReport {
  std::vector<BenchRow> rows;
  double growthExponent = 0.0;  // slope of log(median) against log(size)
};

namespace detail {

inline double percentile(std::vector<double> v, double q) {
  std::sort(v.begin(), v.end());
  const double pos = q * static_cast<double>(v.size() - 1);
  const auto lo = static_cast<std::size_t>(std::floor(pos));
  const auto hi = std::min(lo + 1, v.size() - 1);
  return v[lo] + (pos - static_cast<double>(lo)) * (v[hi] - v[lo]);
}

inline double loglog_slope(std::span<const BenchRow> rows) {
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  const double n = static_cast<double>(rows.size());
  for (const auto& r : rows) {
    const double x = std::log(static_cast<double>(r.size));
    const double y = std::log(std::max(r.medianMicros, 1e-9));
    sx += x;
    sy += y;
    sxx += x * x;
    sxy += x * y;
  }
  return (n * sxy - sx * sy) / (n * sxx - sx * sx);
}

}  // namespace detail

/// Times grin_solve on seeded square instances of each size.
inline BenchReport run_bench(const BenchSettings& bs, std::uint64_t master) {
  if (bs.sizes.size() < 2) throw Error("bench needs at least two sizes");
  if (bs.instances < 1 || bs.repeats < 1) throw Error("bench needs positive counts");
  BenchReport rep;
  for (std::size_t size : bs.sizes) {
    std::vector<double> times;
    double moves = 0;
    for (long i = 0; i < bs.instances; ++i) {
      std::mt19937_64 rng(sim::stream_seed(master, (size << 32) | static_cast<std::uint64_t>(i)));
      const auto mu = instances::random_affinity(rng, size, size, bs.rates);
      const auto totals = instances::random_row_totals(rng, size, bs.minTasks, bs.maxTasks);
      grin::GrinResult g;
      const auto t0 = std::chrono::steady_clock::now();
      for (int r = 0; r < bs.repeats; ++r) g = grin::grin_solve(mu, totals);
      const double us =
          std::chrono::duration<double, std::micro>(std::chrono::steady_clock::now() - t0).count();
      times.push_back(us / bs.repeats);
      moves += static_cast<double>(g.movesApplied);
    }
    rep.rows.push_back({size, bs.instances, detail::percentile(times, 0.5),
                        detail::percentile(times, 0.95), moves / static_cast<double>(bs.instances)});
  }
  rep.growthExponent = detail::loglog_slope(rep.rows);
  return rep;
}

inline std::string bench_csv(const BenchReport& rep) {
  std::ostringstream os;
  os << "size,instances,median_us,p95_us,mean_moves\n";
  for (const auto& r : rep.rows)
    os << r.size << ',' << r.instances << ',' << detail::fmt6(r.medianMicros) << ','
       << detail::fmt6(r.p95Micros) << ',' << detail::fmt6(r.meanMoves) << '\n';
  return os.str();
}

}  // namespace hetsched::experiment
