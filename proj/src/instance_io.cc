#include "fluidlb/instance_io.h"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <memory>

namespace fluidlb {
namespace {

using nlohmann::json;

[[noreturn]] void malformed(const std::string& msg) {
  throw Error(ErrorKind::kContract, "malformed instance: " + msg);
}

double number(const json& doc, const char* key) {
  if (!doc.contains(key) || !doc.at(key).is_number()) {
    malformed(std::string("missing numeric field '") + key + "'");
  }
  return doc.at(key).get<double>();
}

int count(const json& doc, const char* key) {
  if (!doc.contains(key) || !doc.at(key).is_number_integer()) {
    malformed(std::string("missing integer field '") + key + "'");
  }
  return doc.at(key).get<int>();
}

json vector_json(const std::vector<double>& v) { return json(v); }

}  // namespace

json rate_to_json(const ProcessingRate& rate) {
  switch (rate.family()) {
    case ProcessingRate::Family::kSqrt:
      return {{"family", "sqrt"}, {"a", rate.a()}, {"b", rate.b()}};
    case ProcessingRate::Family::kHyperbolic:
      return {{"family", "hyperbolic"}, {"k", rate.servers()}, {"s", rate.service_time()}};
    case ProcessingRate::Family::kAffine:
      return {{"family", "affine"}, {"r", rate.slope()}};
  }
  return {};
}

ProcessingRate rate_from_json(const json& doc) {
  if (!doc.is_object() || !doc.contains("family") || !doc.at("family").is_string()) {
    malformed("rate needs a 'family' string");
  }
  const std::string family = doc.at("family").get<std::string>();
  if (family == "sqrt") return ProcessingRate::Sqrt(number(doc, "a"), number(doc, "b"));
  if (family == "hyperbolic") {
    return ProcessingRate::Hyperbolic(number(doc, "k"), number(doc, "s"));
  }
  if (family == "affine") return ProcessingRate::Affine(number(doc, "r"));
  malformed("unknown rate family '" + family + "'");
}

Network network_from_json(const json& doc) {
  if (!doc.is_object()) malformed("top level must be an object");
  const int nf = count(doc, "frontends");
  const int nb = count(doc, "backends");
  if (!doc.contains("arcs") || !doc.at("arcs").is_array()) malformed("missing 'arcs' array");
  std::vector<Arc> arcs;
  for (const json& a : doc.at("arcs")) {
    if (!a.is_array() || a.size() != 3 || !a[0].is_number_integer() ||
        !a[1].is_number_integer() || !a[2].is_number()) {
      malformed("each arc must be [frontend, backend, latency]");
    }
    arcs.push_back({a[0].get<int>(), a[1].get<int>(), a[2].get<double>()});
  }
  if (!doc.contains("lambda") || !doc.at("lambda").is_array()) {
    malformed("missing 'lambda' array");
  }
  std::vector<double> lambda;
  for (const json& v : doc.at("lambda")) {
    if (!v.is_number()) malformed("lambda entries must be numbers");
    lambda.push_back(v.get<double>());
  }
  if (!doc.contains("rates") || !doc.at("rates").is_array()) malformed("missing 'rates' array");
  std::vector<ProcessingRate> rates;
  for (const json& r : doc.at("rates")) rates.push_back(rate_from_json(r));
  return Network(nf, nb, std::move(arcs), std::move(lambda), std::move(rates));
}

json network_to_json(const Network& net) {
  json arcs = json::array();
  for (const Arc& a : net.arcs()) arcs.push_back(json::array({a.frontend, a.backend, a.latency}));
  json rates = json::array();
  for (const auto& r : net.rates()) rates.push_back(rate_to_json(r));
  return {{"frontends", net.num_frontends()},
          {"backends", net.num_backends()},
          {"arcs", arcs},
          {"lambda", vector_json(net.arrival())},
          {"rates", rates}};
}

Network load_network(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorKind::kContract, "cannot open instance file '" + path + "'");
  json doc;
  try {
    in >> doc;
  } catch (const json::exception& e) {
    throw Error(ErrorKind::kContract, "cannot parse '" + path + "': " + e.what());
  }
  return network_from_json(doc);
}

void save_network(const Network& net, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw Error(ErrorKind::kContract, "cannot write '" + path + "'");
  out << network_to_json(net).dump(2) << '\n';
}

json matrix_to_json(const Matrix& m) {
  json rows = json::array();
  for (int r = 0; r < m.rows(); ++r) {
    rows.push_back(std::vector<double>(m.row(r), m.row(r) + m.cols()));
  }
  return rows;
}

Matrix matrix_from_json(const json& doc) {
  if (!doc.is_array() || doc.empty() || !doc[0].is_array()) {
    malformed("matrix must be a non-empty array of rows");
  }
  const int rows = static_cast<int>(doc.size());
  const int cols = static_cast<int>(doc[0].size());
  Matrix m(rows, cols);
  for (int r = 0; r < rows; ++r) {
    if (!doc[r].is_array() || static_cast<int>(doc[r].size()) != cols) {
      malformed("matrix rows must have equal length");
    }
    for (int c = 0; c < cols; ++c) {
      if (!doc[r][c].is_number()) malformed("matrix entries must be numbers");
      m(r, c) = doc[r][c].get<double>();
    }
  }
  return m;
}

json solution_to_json(const Network& net, const StaticSolution& sol) {
  json active = json::array();
  for (int id : sol.active_arcs) {
    active.push_back(json::array({net.arc(id).frontend, net.arc(id).backend}));
  }
  return {{"routing", matrix_to_json(sol.routing)},
          {"workloads", vector_json(sol.workloads)},
          {"multipliers", vector_json(sol.multipliers)},
          {"opt_value", sol.opt_value},
          {"active_arcs", active},
          {"kkt_residual", kkt_residual(net, sol)},
          {"stationarity", sol.stationarity},
          {"iterations", sol.iterations}};
}

json report_to_json(const StabilityReport& r) {
  json laplacians = json::array();
  for (const Matrix& e : r.laplacians) laplacians.push_back(matrix_to_json(e));
  json components = json::array();
  for (std::size_t k = 0; k < r.components.size(); ++k) {
    components.push_back({{"frontends", r.components[k].frontends},
                          {"backends", r.components[k].backends},
                          {"gap", r.component_gap[k]},
                          {"c_hat", r.component_c_hat[k]},
                          {"lhs", r.component_lhs[k]}});
  }
  json out = {{"laplacians", laplacians},
              {"components", components},
              {"gap", r.gap},
              {"gap_lower_bound", r.gap_lower_bound},
              {"lhs_multi", r.lhs_multi},
              {"c_hat", r.c_hat},
              {"tau_hat", vector_json(r.tau_hat)},
              {"eta", vector_json(r.eta)},
              {"eta_crit", vector_json(r.eta_crit)},
              {"stable", r.stable}};
  out["lhs_single"] = r.lhs_single ? json(*r.lhs_single) : json(nullptr);
  return out;
}

json metrics_to_json(const Metrics& m) {
  return {{"dt", m.dt},
          {"horizon", m.horizon},
          {"steps", m.steps},
          {"metric_window", m.metric_window},
          {"gap", m.gap},
          {"windowed_gap", m.windowed_gap},
          {"error_n", m.error_n},
          {"error_x", m.error_x},
          {"max_abs_n_deviation", m.max_abs_n_deviation},
          {"average_total", m.average_total},
          {"window_average_total", m.window_average_total},
          {"steady_average_total", m.steady_average_total},
          {"window_amplitude", vector_json(m.window_amplitude)},
          {"final_workloads", vector_json(m.final_workloads)},
          {"final_routing", matrix_to_json(m.final_routing)},
          {"final_inflight_total", m.final_inflight_total}};
}

void write_trajectory_csv(const Metrics& m, int frontends, int backends,
                          const std::string& path) {
  std::unique_ptr<std::FILE, int (*)(std::FILE*)> f(std::fopen(path.c_str(), "w"),
                                                    &std::fclose);
  if (!f) throw Error(ErrorKind::kContract, "cannot write '" + path + "'");
  std::fprintf(f.get(), "t");
  for (int j = 0; j < backends; ++j) std::fprintf(f.get(), ",N_%d", j);
  for (int i = 0; i < frontends; ++i) {
    for (int j = 0; j < backends; ++j) std::fprintf(f.get(), ",x_%d_%d", i, j);
  }
  std::fprintf(f.get(), ",inflight_total\n");
  for (const TrajectoryRow& row : m.trajectory) {
    std::fprintf(f.get(), "%.17g", row.t);
    for (double v : row.workloads) std::fprintf(f.get(), ",%.17g", v);
    for (double v : row.routing.data()) std::fprintf(f.get(), ",%.17g", v);
    std::fprintf(f.get(), ",%.17g\n", row.inflight_total);
  }
}

}  // namespace fluidlb
