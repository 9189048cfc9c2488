#include "fluidlb/instance_io.h"

#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>
#include <random>
#include <string>

#include "fluidlb/common.h"
#include "fluidlb/experiments.h"
#include "instances.h"

namespace fluidlb {
namespace {

using nlohmann::json;

void expect_same(const Network& a, const Network& b) {
  ASSERT_EQ(a.num_frontends(), b.num_frontends());
  ASSERT_EQ(a.num_backends(), b.num_backends());
  ASSERT_EQ(a.num_arcs(), b.num_arcs());
  for (int id = 0; id < a.num_arcs(); ++id) {
    EXPECT_EQ(a.arc(id).frontend, b.arc(id).frontend);
    EXPECT_EQ(a.arc(id).backend, b.arc(id).backend);
    EXPECT_EQ(a.arc(id).latency, b.arc(id).latency);
  }
  EXPECT_EQ(a.arrival(), b.arrival());
  for (int j = 0; j < a.num_backends(); ++j) {
    EXPECT_EQ(a.rate(j).family(), b.rate(j).family());
    EXPECT_EQ(a.rate(j).a(), b.rate(j).a());
    EXPECT_EQ(a.rate(j).b(), b.rate(j).b());
  }
}

TEST(InstanceIoTest, ParsesTheSchema) {
  const json doc = json::parse(R"({
    "frontends": 1, "backends": 3,
    "arcs": [[0, 0, 1.0], [0, 1, 0.5], [0, 2, 0.25]],
    "lambda": [1.5],
    "rates": [{"family": "sqrt", "a": 1, "b": 2},
              {"family": "hyperbolic", "k": 5, "s": 1},
              {"family": "affine", "r": 0.5}]})");
  const Network net = network_from_json(doc);
  EXPECT_EQ(net.num_arcs(), 3);
  EXPECT_EQ(net.latency(0, 1), 0.5);
  EXPECT_EQ(net.rate(1).family(), ProcessingRate::Family::kHyperbolic);
  EXPECT_EQ(net.rate(1).servers(), 5.0);
  EXPECT_EQ(net.rate(2).deriv(1.0), 0.5);
  expect_same(net, network_from_json(network_to_json(net)));
}

TEST(InstanceIoTest, MalformedDocumentsAreContractErrors) {
  const char* bad[] = {
      R"({"frontends": 1})",
      R"({"frontends": 1, "backends": 2, "arcs": [[0, 0]], "lambda": [1],
          "rates": [{"family": "sqrt", "a": 1, "b": 2}, {"family": "sqrt", "a": 1, "b": 2}]})",
      R"({"frontends": 1, "backends": 2, "arcs": [[0, 0, 1], [0, 1, 1]], "lambda": [1],
          "rates": [{"family": "cubic"}, {"family": "sqrt", "a": 1, "b": 2}]})",
      R"({"frontends": "one", "backends": 2, "arcs": [], "lambda": [], "rates": []})",
      R"({"frontends": 1, "backends": 2, "arcs": [[0, 0, -1], [0, 1, 1]], "lambda": [1],
          "rates": [{"family": "sqrt", "a": 1, "b": 2}, {"family": "sqrt", "a": 1, "b": 2}]})",
  };
  for (const char* text : bad) {
    try {
      network_from_json(json::parse(text));
      ADD_FAILURE() << "accepted: " << text;
    } catch (const Error& e) {
      EXPECT_EQ(e.kind(), ErrorKind::kContract) << text;
    }
  }
}

TEST(InstanceIoTest, FileRoundTripIsLossless) {
  const auto dir = std::filesystem::temp_directory_path();
  std::mt19937_64 gen(70);
  ExperimentParams p;
  for (int r = 0; r < 20; ++r) {
    Rng rng = instance_rng(p.seed, r);
    const Network generated = generate_instance(p, rng);
    const Network random = testing_instances::random_connected(gen, 1 + r % 4, 2 + r % 3, 0.5);
    for (const Network* net : {&generated, &random}) {
      const auto path = (dir / "fluidlb_io_test.json").string();
      save_network(*net, path);
      expect_same(*net, load_network(path));
    }
  }
  std::filesystem::remove(dir / "fluidlb_io_test.json");
}

TEST(InstanceIoTest, MissingFileIsAContractError) {
  try {
    load_network("/nonexistent/instance.json");
    FAIL() << "expected an error";
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::kContract);
  }
}

TEST(InstanceIoTest, MatrixRoundTrip) {
  Matrix m(2, 3);
  m(0, 1) = 0.1;
  m(1, 2) = 1.0 / 3.0;
  EXPECT_EQ(matrix_from_json(matrix_to_json(m)), m);
  EXPECT_THROW(matrix_from_json(json::parse("[[1, 2], [3]]")), Error);
}

TEST(InstanceIoTest, SolutionJsonCarriesTheOptimum) {
  const Network net = testing_instances::one_by_two(1.0, 1.0);
  const json doc = solution_to_json(net, solve_static(net));
  EXPECT_NEAR(doc.at("opt_value").get<double>(), 2.25, 1e-12);
  EXPECT_EQ(doc.at("routing").size(), 1u);
}

TEST(InstanceIoTest, TrajectoryCsvHasHeaderAndRows) {
  const Network net = testing_instances::one_by_two(1.0, 1.0);
  SimConfig c;
  c.dt = 1e-3;
  c.horizon = 1.0;
  c.eta = {0.4};
  c.max_trajectory_rows = 11;
  Matrix x(1, 2);
  x(0, 0) = 0.1;
  x(0, 1) = 0.9;
  const Metrics m = run(net, c, {{0.0, 0.0}, x});
  const auto path = (std::filesystem::temp_directory_path() / "fluidlb_traj.csv").string();
  write_trajectory_csv(m, 1, 2, path);
  std::ifstream in(path);
  std::string header, line;
  std::getline(in, header);
  EXPECT_EQ(header, "t,N_0,N_1,x_0_0,x_0_1,inflight_total");
  int rows = 0;
  while (std::getline(in, line)) ++rows;
  EXPECT_EQ(rows, static_cast<int>(m.trajectory.size()));
  std::filesystem::remove(path);
}

}  // namespace
}  // namespace fluidlb
