#ifndef FLUIDLB_NETWORK_H_
#define FLUIDLB_NETWORK_H_

#include <span>
#include <vector>

#include "fluidlb/common.h"
#include "fluidlb/processing_rate.h"

namespace fluidlb {

struct Arc {
  int frontend;
  int backend;
  double latency;  // seconds, > 0

  bool operator==(const Arc&) const = default;
};

// Bipartite frontend/backend topology with arc latencies, per-frontend
// arrival rates and per-backend processing rates. Immutable after
// construction; the constructor validates every invariant.
class Network {
 public:
  Network(int num_frontends, int num_backends, std::vector<Arc> arcs,
          std::vector<double> arrival, std::vector<ProcessingRate> rates);

  int num_frontends() const { return num_frontends_; }
  int num_backends() const { return num_backends_; }
  int num_arcs() const { return static_cast<int>(arcs_.size()); }

  const std::vector<Arc>& arcs() const { return arcs_; }
  const Arc& arc(int id) const { return arcs_[id]; }
  const std::vector<double>& arrival() const { return arrival_; }
  double arrival(int frontend) const { return arrival_[frontend]; }
  const std::vector<ProcessingRate>& rates() const { return rates_; }
  const ProcessingRate& rate(int backend) const { return rates_[backend]; }

  // Arc id of (i, j), or -1 when (i, j) is not in the network.
  int arc_id(int frontend, int backend) const {
    return arc_index_[static_cast<std::size_t>(frontend) * num_backends_ + backend];
  }
  bool has_arc(int frontend, int backend) const {
    return arc_id(frontend, backend) >= 0;
  }
  double latency(int frontend, int backend) const;

  // Neighbor sets B_i and F_j, sorted ascending.
  const std::vector<int>& backends_of(int frontend) const {
    return backends_of_[frontend];
  }
  const std::vector<int>& frontends_of(int backend) const {
    return frontends_of_[backend];
  }
  // Arc ids leaving frontend i, in the order of backends_of(i).
  const std::vector<int>& arcs_of(int frontend) const { return arcs_of_[frontend]; }

  double max_latency() const;
  double min_latency() const;
  double total_arrival() const;

  // Presence mask (1 = arc exists) for frontend i over all backends.
  std::vector<unsigned char> mask(int frontend) const;

  bool operator==(const Network& other) const;

 private:
  int num_frontends_;
  int num_backends_;
  std::vector<Arc> arcs_;
  std::vector<double> arrival_;
  std::vector<ProcessingRate> rates_;
  std::vector<int> arc_index_;
  std::vector<std::vector<int>> backends_of_;
  std::vector<std::vector<int>> frontends_of_;
  std::vector<std::vector<int>> arcs_of_;
};

// Flow entering each backend, sum_i lambda_i x_ij, for a routing matrix.
std::vector<double> backend_inflow(const Network& net, const Matrix& routing);

// Throws a contract error unless every row of `routing` lies in its
// frontend's simplex (entries >= -tol, absent arcs zero, sum 1 +- tol).
void check_routing(const Network& net, const Matrix& routing, double tol = 1e-9);

}  // namespace fluidlb

#endif  // FLUIDLB_NETWORK_H_
