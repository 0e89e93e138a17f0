// hetsched: command-line front end for the simulator, the GrIn optimizer
// and the acceptance suite.
//
// Exit codes: 0 success, 1 usage or configuration error, 2 verification
// failure.

#include <cstdio>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "hetsched/hetsched.hpp"

namespace {

using hetsched::experiment::json;
namespace ex = hetsched::experiment;

constexpr int kUsageError = 1;
constexpr int kVerifyFailure = 2;

struct Options {
  std::string config;
  std::string out;
  std::optional<std::uint64_t> seed;
  std::vector<std::string> policies;
  std::vector<double> eta;
  std::string format = "csv";
  bool list = false;
};

ex::ExperimentSpec load(const Options& o) {
  auto spec = o.config.empty() ? ex::parse_spec(json::object()) : ex::load_spec(o.config);
  if (o.seed) {
    spec.masterSeed = *o.seed;
    spec.seeds = ex::derive_seeds(*o.seed, static_cast<long>(spec.seeds.size()));
  }
  if (!o.policies.empty()) {
    spec.policies.clear();
    for (const auto& p : o.policies) spec.policies.push_back(hetsched::sim::parse_policy(p));
  }
  if (!o.eta.empty()) spec.sweepEta = o.eta;
  spec.validate();
  return spec;
}

std::string out_path(const Options& o, const ex::ExperimentSpec& spec) {
  return o.out.empty() ? spec.outputPath : o.out;
}

void emit(const std::string& path, const std::string& text) {
  if (path.empty() || path == "-") {
    std::cout << text;
    return;
  }
  std::ofstream f(path);
  if (!f) throw hetsched::Error("cannot write '" + path + "'");
  f << text;
}

// CSV goes to the output path with the summary beside it; JSON bundles both.
void write_table(const Options& o, const std::string& path, const std::string& csv,
                 const json& rows, const json& summary) {
  if (o.format == "json") {
    emit(path, json{{"rows", rows}, {"summary", summary}}.dump(2) + "\n");
    return;
  }
  emit(path, csv);
  if (path.empty() || path == "-")
    std::cerr << summary.dump(2) << "\n";
  else
    emit(path + ".summary.json", summary.dump(2) + "\n");
}

int simulate(const Options& o) {
  const auto spec = load(o);
  const auto rows = ex::run_experiment(spec);
  for (const auto& r : rows) {
    if (r.error)
      std::cerr << "warning: " << hetsched::sim::to_string(r.policy) << " at eta " << r.eta
                << ": " << *r.error << "\n";
    else if (std::abs(r.littleRatio - 1.0) > ex::little_tolerance(r.distribution))
      std::cerr << "warning: Little's Law ratio " << r.littleRatio << " for "
                << hetsched::sim::to_string(r.policy) << " at eta " << r.eta << "\n";
  }
  write_table(o, out_path(o, spec), ex::to_csv(rows), ex::rows_to_json(rows), ex::summarize(rows));
  return 0;
}

int optimize(const Options& o) {
  const auto spec = load(o);
  const auto rows = ex::run_optimize(spec.optimize, spec.masterSeed);
  const auto s = ex::summarize_optimize(rows);
  const json summary = {{"instances", s.instances},
                        {"with_gap", s.withGap},
                        {"mean_gap", s.meanGap},
                        {"max_gap", s.maxGap}};
  json arr = json::array();
  for (const auto& r : rows) {
    json j = {{"instance", r.instance},
              {"row_totals", r.rowTotals},
              {"grin_throughput", r.grinThroughput},
              {"grin_us", r.grinMicros},
              {"moves", r.moves}};
    j["opt_throughput"] = r.optThroughput ? json(*r.optThroughput) : json(nullptr);
    j["rel_gap"] = r.relGap ? json(*r.relGap) : json(nullptr);
    arr.push_back(std::move(j));
  }
  write_table(o, out_path(o, spec), ex::optimize_csv(rows), arr, summary);
  return 0;
}

int bench(const Options& o) {
  const auto spec = load(o);
  const auto rep = ex::run_bench(spec.bench, spec.masterSeed);
  json arr = json::array();
  for (const auto& r : rep.rows)
    arr.push_back({{"size", r.size},
                   {"instances", r.instances},
                   {"median_us", r.medianMicros},
                   {"p95_us", r.p95Micros},
                   {"mean_moves", r.meanMoves}});
  write_table(o, out_path(o, spec), ex::bench_csv(rep), arr,
              json{{"growth_exponent", rep.growthExponent}});
  return 0;
}

int verify(const Options& o) {
  if (o.list) {
    for (const auto& c : hetsched::acceptance::criteria())
      std::printf("%2d %s\n", c.id, c.name.c_str());
    return 0;
  }
  hetsched::acceptance::VerifyOptions v;
  if (o.seed) v.seed = *o.seed;
  const auto rep = hetsched::acceptance::run(v);
  std::printf("%d passed, %d failed\n", rep.passed, rep.failed);
  return rep.failed == 0 ? 0 : kVerifyFailure;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Heterogeneous multicore scheduling toolkit"};
  app.require_subcommand(1);
  Options o;

  auto add_common = [&](CLI::App* sub) {
    sub->add_option("--config", o.config, "JSON experiment spec")->check(CLI::ExistingFile);
    sub->add_option("--out", o.out, "Output file (stdout when omitted)");
    sub->add_option("--seed", o.seed, "Master seed");
    sub->add_option("--format", o.format, "Output format")
        ->check(CLI::IsMember({"csv", "json"}));
  };
  auto* sim = app.add_subcommand("simulate", "Run the policy-comparison simulations");
  add_common(sim);
  sim->add_option("--policies", o.policies, "Policies, comma separated")->delimiter(',');
  sim->add_option("--eta", o.eta, "Type-1 program fractions, comma separated")->delimiter(',');
  auto* opt = app.add_subcommand("optimize", "Compare GrIn with the exhaustive optimum");
  add_common(opt);
  auto* ben = app.add_subcommand("bench", "Time GrIn on growing square instances");
  add_common(ben);
  auto* ver = app.add_subcommand("verify", "Run the acceptance criteria");
  ver->add_option("--seed", o.seed, "Master seed");
  ver->add_flag("--list", o.list, "List the criteria without running them");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kUsageError;
  }

  try {
    if (sim->parsed()) return simulate(o);
    if (opt->parsed()) return optimize(o);
    if (ben->parsed()) return bench(o);
    return verify(o);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kUsageError;
  }
}
