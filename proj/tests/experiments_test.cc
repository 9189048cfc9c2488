#include "fluidlb/experiments.h"

#include <gtest/gtest.h>

#include <atomic>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <string>

#include "fluidlb/common.h"
#include "fluidlb/rng.h"

namespace fluidlb {
namespace {

TEST(RngTest, SplitMixReferenceValue) {
  // First output of the published SplitMix64 generator seeded with 0.
  EXPECT_EQ(Rng::splitmix64(0), 0xe220a8397b1dcdafULL);
}

TEST(RngTest, DeterministicAndStreamSeparated) {
  Rng a(7, 3), b(7, 3), c(7, 4), d(8, 3);
  for (int k = 0; k < 100; ++k) {
    const double va = a.uniform();
    EXPECT_EQ(va, b.uniform());
    EXPECT_NE(va, c.uniform());
    EXPECT_NE(va, d.uniform());
    EXPECT_GE(va, 0.0);
    EXPECT_LT(va, 1.0);
  }
}

TEST(RngTest, DistributionMoments) {
  Rng rng(11);
  const int n = 10000;
  double ln = 0.0, pois = 0.0, expo = 0.0, norm = 0.0, norm2 = 0.0;
  const double sigma = 0.5;
  for (int k = 0; k < n; ++k) {
    ln += rng.lognormal(-0.5 * sigma * sigma, sigma);
    pois += rng.poisson(5.0);
    expo += rng.exponential();
    const double z = rng.normal();
    norm += z;
    norm2 += z * z;
  }
  EXPECT_GE(ln / n, 0.95);
  EXPECT_LE(ln / n, 1.05);
  EXPECT_NEAR(pois / n, 5.0, 0.1);
  EXPECT_NEAR(expo / n, 1.0, 0.05);
  EXPECT_NEAR(norm / n, 0.0, 0.05);
  EXPECT_NEAR(norm2 / n, 1.0, 0.05);
  EXPECT_EQ(rng.poisson(0.0), 0);
}

TEST(RngTest, GeometricSamples) {
  Rng rng(12);
  for (int k = 0; k < 1000; ++k) {
    const auto p = rng.simplex_point(1 + k % 6);
    double sum = 0.0;
    for (double v : p) {
      EXPECT_GE(v, 0.0);
      sum += v;
    }
    EXPECT_NEAR(sum, 1.0, 1e-12);
    const auto s = rng.sphere_point();
    EXPECT_NEAR(s[0] * s[0] + s[1] * s[1] + s[2] * s[2], 1.0, 1e-12);
  }
}

TEST(GenerateInstanceTest, ShapeAndLoad) {
  ExperimentParams p;
  p.mu_f = 5.0;
  p.mu_b = 5.0;
  for (int r = 0; r < 200; ++r) {
    Rng rng = instance_rng(p.seed, r);
    const Network net = generate_instance(p, rng);
    EXPECT_GE(net.num_frontends(), 1);
    EXPECT_GE(net.num_backends(), 2);
    EXPECT_EQ(net.num_arcs(), net.num_frontends() * net.num_backends());
    double capacity = 0.0;
    for (int j = 0; j < net.num_backends(); ++j) {
      EXPECT_EQ(net.rate(j).family(), ProcessingRate::Family::kHyperbolic);
      EXPECT_GE(net.rate(j).servers(), 1.0);
      capacity += *net.rate(j).capacity();
    }
    EXPECT_NEAR(net.total_arrival(), 0.9 * capacity, 1e-12 * capacity);
    EXPECT_GE(net.min_latency(), p.min_latency_fraction * p.tau_max - 1e-15);
    EXPECT_LE(net.max_latency(), p.tau_max + 1e-15);
  }
}

TEST(GenerateInstanceTest, Deterministic) {
  const ExperimentParams p;
  const auto a = generate_instances(p);
  const auto b = generate_instances(p);
  ASSERT_EQ(a.size(), static_cast<std::size_t>(p.replications));
  for (std::size_t r = 0; r < a.size(); ++r) {
    ASSERT_EQ(a[r].num_arcs(), b[r].num_arcs());
    for (int id = 0; id < a[r].num_arcs(); ++id) {
      EXPECT_EQ(a[r].arc(id).latency, b[r].arc(id).latency);
    }
    EXPECT_EQ(a[r].arrival(), b[r].arrival());
  }
}

TEST(GenerateInstanceTest, EveryInstanceSolves) {
  ExperimentParams p;
  p.mu_f = 5.0;
  p.mu_b = 5.0;
  for (int r = 0; r < 100; ++r) {
    Rng rng = instance_rng(p.seed, r);
    const Network net = generate_instance(p, rng);
    const auto sol = solve_static(net);
    EXPECT_LT(kkt_residual(net, sol), 1e-6) << r;
  }
}

TEST(MixedInitTest, WeightZeroIsTheEquilibrium) {
  const ExperimentParams p;
  Rng rng = instance_rng(p.seed, 0);
  const Network net = generate_instance(p, rng);
  const auto sol = solve_static(net);
  Rng init = init_rng(p.seed, 0);
  const InitialState s = mixed_init(net, sol, init, 0.0);
  EXPECT_EQ(s.workloads, sol.workloads);
  EXPECT_EQ(s.routing, sol.routing);
}

TEST(MixedInitTest, RowsStayOnTheSimplex) {
  const ExperimentParams p;
  for (int r = 0; r < 10; ++r) {
    Rng rng = instance_rng(p.seed, r);
    const Network net = generate_instance(p, rng);
    const auto sol = solve_static(net);
    for (double w : {0.1, 0.5, 1.0}) {
      Rng init = init_rng(p.seed, r);
      const InitialState s = mixed_init(net, sol, init, w);
      for (int i = 0; i < net.num_frontends(); ++i) {
        double sum = 0.0;
        for (int j = 0; j < net.num_backends(); ++j) {
          EXPECT_GE(s.routing(i, j), 0.0);
          sum += s.routing(i, j);
        }
        EXPECT_NEAR(sum, 1.0, 1e-12);
      }
      for (int j = 0; j < net.num_backends(); ++j) {
        EXPECT_GE(s.workloads[j], 0.0);
        EXPECT_LE(s.workloads[j], std::max(sol.workloads[j], 2.0 * net.rate(j).servers()));
      }
    }
  }
}

TEST(ExperimentParamsTest, RejectsOutOfRangeValues) {
  EXPECT_NO_THROW(validate_params(ExperimentParams{}));
  auto bad = [](auto mutate) {
    ExperimentParams p;
    mutate(p);
    return p;
  };
  EXPECT_THROW(validate_params(bad([](auto& p) { p.rho = 1.0; })), Error);
  EXPECT_THROW(validate_params(bad([](auto& p) { p.tau_max = 0.0; })), Error);
  EXPECT_THROW(validate_params(bad([](auto& p) { p.replications = 0; })), Error);
  EXPECT_THROW(validate_params(bad([](auto& p) { p.alphas = {-1.0}; })), Error);
  EXPECT_THROW(validate_params(bad([](auto& p) { p.mu_f = -1.0; })), Error);
  EXPECT_THROW(validate_params(bad([](auto& p) { p.init_weight = 2.0; })), Error);
}

TEST(ParallelForTest, RunsEveryTaskOnce) {
  std::vector<std::atomic<int>> hits(100);
  parallel_for(100, 4, [&](int k) { hits[k]++; });
  for (const auto& h : hits) EXPECT_EQ(h.load(), 1);
  EXPECT_EQ(resolve_threads(3), 3);
  EXPECT_GE(resolve_threads(0), 1);
}

TEST(LocalStabilityTest, ResultsDoNotDependOnThreadCount) {
  ExperimentParams p;
  p.replications = 3;
  p.horizon = 5.0;
  p.alphas = {0.5, 2.0};
  p.threads = 1;
  const auto serial = run_local_stability(p);
  p.threads = 3;
  const auto parallel = run_local_stability(p);
  ASSERT_EQ(serial.size(), 6u);
  ASSERT_EQ(parallel.size(), serial.size());
  for (std::size_t k = 0; k < serial.size(); ++k) {
    EXPECT_EQ(serial[k].replication, static_cast<int>(k / 2));
    EXPECT_EQ(serial[k].alpha, k % 2 == 0 ? 0.5 : 2.0);
    EXPECT_EQ(serial[k].error, "");
    EXPECT_EQ(serial[k].gap, parallel[k].gap);
    EXPECT_EQ(serial[k].error_n, parallel[k].error_n);
    EXPECT_NEAR(serial[k].lhs, serial[k].alpha, 1e-6);
  }
  const auto summary = summarize(serial);
  ASSERT_EQ(summary.size(), 2u);
  EXPECT_EQ(summary[0].runs, 3);
  EXPECT_EQ(summary[0].failures, 0);
}

TEST(LocalStabilityTest, WritesCsv) {
  ExperimentParams p;
  p.replications = 2;
  p.horizon = 2.0;
  const auto rows = run_local_stability(p);
  const auto path = std::filesystem::temp_directory_path() / "fluidlb_local_test.csv";
  write_local_csv(rows, p, path.string());
  std::ifstream in(path);
  std::string header, line;
  std::getline(in, header);
  EXPECT_EQ(header.rfind("kind,", 0), 0u);
  int runs = 0, aggregates = 0;
  while (std::getline(in, line)) {
    runs += line.rfind("run,", 0) == 0;
    aggregates += line.rfind("aggregate,", 0) == 0;
  }
  EXPECT_EQ(runs, 2);
  EXPECT_EQ(aggregates, 1);
  std::filesystem::remove(path);
}

TEST(BenchmarkTest, RowsCoverEveryPolicy) {
  ExperimentParams p;
  p.replications = 2;
  p.horizon = 5.0;
  p.alphas = {0.1, 0.5};
  const auto rows = run_benchmarks(p);
  ASSERT_EQ(rows.size(), 8u);
  const Policy order[] = {Policy::kDgd, Policy::kLw, Policy::kLl, Policy::kGmsr};
  for (std::size_t k = 0; k < rows.size(); ++k) {
    EXPECT_EQ(rows[k].replication, static_cast<int>(k / 4));
    EXPECT_EQ(rows[k].policy, order[k % 4]);
    EXPECT_EQ(rows[k].error, "");
  }
  EXPECT_TRUE(rows[0].alpha == 0.1 || rows[0].alpha == 0.5);
  EXPECT_EQ(summarize(rows).size(), 4u);
}

}  // namespace
}  // namespace fluidlb
