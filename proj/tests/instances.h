#ifndef FLUIDLB_TESTS_INSTANCES_H_
#define FLUIDLB_TESTS_INSTANCES_H_

#include <random>
#include <vector>

#include "fluidlb/network.h"
#include "fluidlb/processing_rate.h"

namespace fluidlb::testing_instances {

// One frontend, two sqrt(a, b) backends at latencies tau0 and tau1.
inline Network one_by_two(double tau0, double tau1, double lambda = 1.0, double a = 1.0,
                          double b = 2.0) {
  return Network(1, 2, {{0, 0, tau0}, {0, 1, tau1}}, {lambda},
                 {ProcessingRate::Sqrt(a, b), ProcessingRate::Sqrt(a, b)});
}

// Random connected bipartite network with sqrt backends: a spanning
// structure guarantees connectivity and each extra arc is kept with
// probability `density`.
inline Network random_connected(std::mt19937_64& gen, int nf, int nb, double density) {
  std::uniform_real_distribution<double> u(0.0, 1.0);
  std::vector<std::vector<unsigned char>> has(nf, std::vector<unsigned char>(nb, 0));
  // Backend j hangs off frontend j mod nf; frontend i > 0 also links to
  // backend (i - 1) mod nb, which ties consecutive frontends together.
  for (int j = 0; j < nb; ++j) has[j % nf][j] = 1;
  for (int i = 1; i < nf; ++i) has[i][(i - 1) % nb] = 1;
  for (int i = 0; i < nf; ++i) {
    for (int j = 0; j < nb; ++j) {
      if (u(gen) < density) has[i][j] = 1;
    }
  }
  std::vector<Arc> arcs;
  for (int i = 0; i < nf; ++i) {
    for (int j = 0; j < nb; ++j) {
      if (has[i][j]) arcs.push_back({i, j, 0.05 + u(gen)});
    }
  }
  std::vector<double> lambda(nf);
  for (double& l : lambda) l = 0.2 + 2.0 * u(gen);
  std::vector<ProcessingRate> rates;
  for (int j = 0; j < nb; ++j) rates.push_back(ProcessingRate::Sqrt(0.2 + 2.0 * u(gen), 0.2 + 3.0 * u(gen)));
  return Network(nf, nb, std::move(arcs), std::move(lambda), std::move(rates));
}

}  // namespace fluidlb::testing_instances

#endif  // FLUIDLB_TESTS_INSTANCES_H_
