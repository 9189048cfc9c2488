#ifndef FLUIDLB_INSTANCE_IO_H_
#define FLUIDLB_INSTANCE_IO_H_

#include <string>

#include <json.hpp>

#include "fluidlb/network.h"
#include "fluidlb/sim.h"
#include "fluidlb/stability.h"
#include "fluidlb/static_opt.h"

namespace fluidlb {

// Instance schema (indices 0-based):
//   {"frontends": F, "backends": B,
//    "arcs": [[i, j, tau], ...],
//    "lambda": [lambda_0, ...],
//    "rates": [{"family": "sqrt", "a": 1, "b": 2},
//              {"family": "hyperbolic", "k": 5, "s": 1},
//              {"family": "affine", "r": 0.5}, ...]}
//
// Malformed documents raise kContract errors. Doubles are written in
// shortest round-trip form, so save/load is lossless.
Network network_from_json(const nlohmann::json& doc);
nlohmann::json network_to_json(const Network& net);

nlohmann::json rate_to_json(const ProcessingRate& rate);
ProcessingRate rate_from_json(const nlohmann::json& doc);

// Throws kContract when the file cannot be opened or parsed.
Network load_network(const std::string& path);
void save_network(const Network& net, const std::string& path);

nlohmann::json matrix_to_json(const Matrix& m);
Matrix matrix_from_json(const nlohmann::json& doc);

nlohmann::json solution_to_json(const Network& net, const StaticSolution& sol);
nlohmann::json report_to_json(const StabilityReport& report);
// Trajectory is omitted; it goes to CSV.
nlohmann::json metrics_to_json(const Metrics& metrics);

// Writes `t,N_0..N_{B-1},x_0_0..x_{F-1}_{B-1},inflight_total` with 17
// significant digits.
void write_trajectory_csv(const Metrics& metrics, int frontends, int backends,
                          const std::string& path);

}  // namespace fluidlb

#endif  // FLUIDLB_INSTANCE_IO_H_
