#include <gtest/gtest.h>

#include <set>

#include "hetsched/experiment.hpp"

using namespace hetsched;
using experiment::json;
using sim::Policy;

namespace {

experiment::ExperimentSpec small_spec() {
  auto s = experiment::parse_spec(json::parse(R"({
    "eta": [0.2, 0.5, 0.8],
    "policies": ["CAB", "BF", "LB"],
    "distributions": ["exponential", "uniform"],
    "completions": 2000,
    "replications": 2,
    "seed": 5
  })"));
  return s;
}

}  // namespace

TEST(ParseSpec, Defaults) {
  const auto s = experiment::parse_spec(json::object());
  EXPECT_EQ(s.base.mu.task_types(), 2u);
  EXPECT_DOUBLE_EQ(s.base.mu(0, 0), 20.0);
  EXPECT_EQ(s.base.numPrograms, 20);
  EXPECT_EQ(s.sweepEta.size(), 9u);
  EXPECT_EQ(s.distributions.size(), 4u);
  EXPECT_EQ(s.seeds.size(), 1u);
  EXPECT_NO_THROW(s.validate());
}

TEST(ParseSpec, FieldsAndErrors) {
  const auto s = experiment::parse_spec(json::parse(R"({
    "mu": [[1, 2, 3], [4, 5, 6]], "type_fractions": [0.25, 0.75], "num_programs": 8,
    "policies": "GRIN", "orders": ["PS", "FCFS"], "power": {"exponent": 0},
    "seeds": [3, 4, 5], "optimize": {"instances": 7, "task_types": 2},
    "bench": {"sizes": [2, 4], "instances": 3}
  })"));
  EXPECT_EQ(s.base.mu.processor_types(), 3u);
  EXPECT_EQ(s.policies, (std::vector<Policy>{Policy::GRIN}));
  EXPECT_EQ(s.orders.size(), 2u);
  EXPECT_DOUBLE_EQ(s.base.powerModel.exponent, 0.0);
  EXPECT_EQ(s.seeds, (std::vector<std::uint64_t>{3, 4, 5}));
  EXPECT_EQ(s.optimize.instances, 7);
  EXPECT_EQ(s.bench.sizes, (std::vector<std::size_t>{2, 4}));
  EXPECT_TRUE(s.sweeps_eta());  // two task types, so eta is swept
  EXPECT_NO_THROW(s.validate());

  EXPECT_THROW(experiment::parse_spec(json::parse(R"({"policies": ["FAST"]})")), Error);
  EXPECT_THROW(experiment::parse_spec(json::parse(R"({"mu": [[1, -2], [3, 4]]})")), Error);
  EXPECT_THROW(experiment::parse_spec(json::parse(R"({"completions": "many"})")), Error);
  EXPECT_THROW(experiment::parse_spec(json::parse(R"({"eta": [0.0, 0.5]})")).validate(), Error);
  EXPECT_THROW(experiment::parse_spec(json::parse(R"({"eta": []})")).validate(), Error);
  EXPECT_THROW(experiment::parse_spec(json::parse(R"({"seeds": []})")).validate(), Error);
  EXPECT_THROW(experiment::load_spec("/nonexistent/spec.json"), Error);
}

TEST(DeriveSeeds, DeterministicAndDistinct) {
  const auto a = experiment::derive_seeds(42, 50);
  EXPECT_EQ(a, experiment::derive_seeds(42, 50));
  EXPECT_EQ(std::set<std::uint64_t>(a.begin(), a.end()).size(), 50u);
  EXPECT_NE(a, experiment::derive_seeds(43, 50));
}

TEST(RunExperiment, CellCount) {
  auto s = experiment::parse_spec(json::parse(R"({
    "policies": ["CAB", "BF", "RD", "JSQ", "LB"], "distributions": ["constant"],
    "completions": 1000, "replications": 3
  })"));
  EXPECT_EQ(experiment::run_experiment(s).size(), 135u);
}

TEST(RunExperiment, RowsAndTheory) {
  const auto s = small_spec();
  const auto rows = experiment::run_experiment(s);
  ASSERT_EQ(rows.size(), 3u * 3 * 2 * 2);
  for (const auto& r : rows) {
    EXPECT_FALSE(r.error);
    ASSERT_TRUE(r.xTheory);
    EXPECT_GT(r.xSim, 0.0);
  }
  EXPECT_NEAR(*rows.front().xTheory, cab::target_state(s.base.mu, 4, 16).xMax, 1e-12);
}

TEST(RunExperiment, SamePolicyCellsShareRandomNumbers) {
  // CAB, GRIN and OPT hold the same static partition, so with common random
  // numbers their rows agree exactly.
  auto s = experiment::parse_spec(json::parse(R"({
    "eta": [0.3], "policies": ["CAB", "GRIN", "OPT"], "distributions": ["bounded_pareto"],
    "completions": 3000
  })"));
  const auto rows = experiment::run_experiment(s);
  ASSERT_EQ(rows.size(), 3u);
  EXPECT_EQ(rows[0].xSim, rows[1].xSim);
  EXPECT_EQ(rows[0].xSim, rows[2].xSim);
}

TEST(RunExperiment, NoTheoryOffTwoByTwo) {
  auto s = experiment::parse_spec(json::parse(R"({
    "mu": [[5, 1, 2], [1, 6, 2], [2, 2, 7]], "policies": ["GRIN", "JSQ"],
    "distributions": ["exponential"], "completions": 2000
  })"));
  for (const auto& r : experiment::run_experiment(s)) EXPECT_FALSE(r.xTheory);
}

TEST(RunExperiment, OptBeyondCapGivesErrorCellAndContinues) {
  auto s = experiment::parse_spec(json::parse(R"({
    "mu": [[5, 1, 2, 3], [1, 6, 2, 3], [2, 2, 7, 3]], "num_programs": 60,
    "policies": ["OPT", "JSQ"], "distributions": ["constant"], "completions": 2000,
    "exhaustive_cap": 1000
  })"));
  const auto rows = experiment::run_experiment(s);
  ASSERT_EQ(rows.size(), 2u);
  ASSERT_TRUE(rows[0].error);
  EXPECT_NE(rows[0].error->find("exceeds the cap"), std::string::npos);
  EXPECT_FALSE(rows[1].error);
  const auto csv = experiment::to_csv(rows);
  EXPECT_NE(csv.find("OPT,constant,PS,"), std::string::npos);
  EXPECT_NE(csv.find(",error,"), std::string::npos);
  const auto back = experiment::parse_csv(csv);
  EXPECT_TRUE(back[0].error);
  EXPECT_EQ(experiment::summarize(rows)["errors"], 1);
}

TEST(Csv, HeaderIsFixed) {
  const auto csv = experiment::to_csv({});
  EXPECT_EQ(csv,
            "eta,policy,distribution,order,seed,x_sim,mean_t,mean_energy,edp,little_ratio,"
            "x_theory\n");
}

TEST(Csv, RoundTrip) {
  const auto rows = experiment::run_experiment(small_spec());
  const auto csv = experiment::to_csv(rows);
  const auto back = experiment::parse_csv(csv);
  ASSERT_EQ(back.size(), rows.size());
  EXPECT_EQ(experiment::to_csv(back), csv);
  for (std::size_t i = 0; i < rows.size(); ++i) {
    EXPECT_EQ(back[i].policy, rows[i].policy);
    EXPECT_EQ(back[i].seed, rows[i].seed);
    EXPECT_NEAR(back[i].xSim, rows[i].xSim, 1e-5 * rows[i].xSim);
  }
  EXPECT_THROW(experiment::parse_csv("bad header\n"), Error);
  EXPECT_THROW(experiment::parse_row("0.5,CAB,exponential"), Error);
  EXPECT_THROW(experiment::parse_row("x,CAB,exponential,PS,1,1,1,1,1,1,"), Error);
}

TEST(Csv, ReproducibleAcrossInvocations) {
  EXPECT_EQ(experiment::to_csv(experiment::run_experiment(small_spec())),
            experiment::to_csv(experiment::run_experiment(small_spec())));
}

TEST(Summary, MeansMatchCsvRows) {
  const auto rows = experiment::run_experiment(small_spec());
  const auto summary = experiment::summarize(rows);
  const auto parsed = experiment::parse_csv(experiment::to_csv(rows));
  for (auto p : {Policy::CAB, Policy::BF, Policy::LB}) {
    double x = 0, t = 0, e = 0;
    int n = 0;
    for (const auto& r : parsed)
      if (r.policy == p) {
        x += r.xSim;
        t += r.meanT;
        e += r.edp;
        ++n;
      }
    const auto& js = summary["policies"][std::string(sim::to_string(p))];
    EXPECT_EQ(js["rows"], n);
    EXPECT_NEAR(js["x_sim"].get<double>(), x / n, 1e-5 * x / n);
    EXPECT_NEAR(js["mean_t"].get<double>(), t / n, 1e-5 * t / n);
    EXPECT_NEAR(js["edp"].get<double>(), e / n, 1e-5 * e / n);
  }
  EXPECT_EQ(summary["reference_policy"], "CAB");
  EXPECT_TRUE(summary["ratios"].contains("LB"));
  EXPECT_FALSE(summary["ratios"].contains("CAB"));
}

TEST(BaselineRatios, AveragesSeedsPerCell) {
  auto row = [](double eta, Policy p, std::uint64_t seed, double x, double edp) {
    experiment::ResultRow r;
    r.eta = eta;
    r.policy = p;
    r.seed = seed;
    r.xSim = x;
    r.edp = edp;
    return r;
  };
  const std::vector<experiment::ResultRow> rows{
      row(0.1, Policy::CAB, 1, 10, 1), row(0.1, Policy::CAB, 2, 14, 3),
      row(0.1, Policy::LB, 1, 6, 4),   row(0.1, Policy::LB, 2, 6, 4),
      row(0.5, Policy::CAB, 1, 9, 2),  row(0.5, Policy::LB, 1, 9, 3)};
  const auto r = experiment::baseline_ratios(rows, Policy::CAB).at(Policy::LB);
  EXPECT_DOUBLE_EQ(r.throughput.max, 2.0);
  EXPECT_DOUBLE_EQ(r.throughput.min, 1.0);
  EXPECT_DOUBLE_EQ(r.edp.max, 2.0);
  EXPECT_DOUBLE_EQ(r.edp.min, 1.5);
}

TEST(RunOptimize, GapsAndCap) {
  experiment::OptimizeSettings os;
  os.instances = 40;
  const auto rows = experiment::run_optimize(os, 9);
  ASSERT_EQ(rows.size(), 40u);
  for (const auto& r : rows) {
    ASSERT_TRUE(r.relGap);
    EXPECT_GE(*r.relGap, 0.0);
    EXPECT_GE(*r.optThroughput, r.grinThroughput * (1 - 1e-12));
  }
  const auto again = experiment::run_optimize(os, 9);
  for (std::size_t i = 0; i < rows.size(); ++i)
    EXPECT_EQ(rows[i].grinThroughput, again[i].grinThroughput);

  experiment::OptimizeSettings one;
  one.instances = 5;
  one.taskTypes = one.processorTypes = 1;
  for (const auto& r : experiment::run_optimize(one, 1)) EXPECT_EQ(*r.relGap, 0.0);

  experiment::OptimizeSettings big;
  big.instances = 3;
  big.exhaustiveCap = 10;
  const auto capped = experiment::run_optimize(big, 2);
  for (const auto& r : capped) EXPECT_FALSE(r.relGap);
  EXPECT_EQ(experiment::summarize_optimize(capped).withGap, 0);
  EXPECT_NE(experiment::optimize_csv(capped).find(",,"), std::string::npos);
}

TEST(RunBench, RowsPerSize) {
  experiment::BenchSettings bs;
  bs.sizes = {2, 4, 8};
  bs.instances = 10;
  bs.repeats = 2;
  const auto rep = experiment::run_bench(bs, 3);
  ASSERT_EQ(rep.rows.size(), 3u);
  for (const auto& r : rep.rows) {
    EXPECT_EQ(r.instances, 10);
    EXPECT_GT(r.medianMicros, 0.0);
    EXPECT_GE(r.p95Micros, r.medianMicros);
  }
  EXPECT_TRUE(std::isfinite(rep.growthExponent));
  bs.sizes = {3};
  EXPECT_THROW(experiment::run_bench(bs, 3), Error);
}

TEST(LoglogSlope, RecoversPowerLaw) {
  std::vector<experiment::BenchRow> rows;
  for (std::size_t k : {3, 5, 7, 10}) rows.push_back({k, 1, 2.0 * std::pow(double(k), 1.7), 0, 0});
  EXPECT_NEAR(experiment::detail::loglog_slope(rows), 1.7, 1e-9);
  EXPECT_NEAR(experiment::detail::percentile({4, 1, 3, 2}, 0.5), 2.5, 1e-12);
}
