#ifndef FLUIDLB_SIMPLEX_H_
#define FLUIDLB_SIMPLEX_H_

#include <span>
#include <vector>

namespace fluidlb {

// A per-backend vector where some indices are absent (the arc does not
// exist, i.e. the gradient is +infinity). Absent entries never take part in
// sums or norms, and every projection writes 0 to them.
struct MaskedVector {
  std::vector<double> values;
  std::vector<unsigned char> present;

  // All entries present.
  static MaskedVector dense(std::vector<double> values);

  int size() const { return static_cast<int>(values.size()); }
};

// Euclidean projection of z onto the tangent cone of the simplex at x:
//   { v : sum_j v_j = 0, v_j >= 0 where x_j = 0, v_j = 0 where absent }.
// x must lie in the simplex over the present indices (sum 1 +- 1e-9).
// O(n log n): only the zero coordinates of x are sorted. Ties among equal
// z values are resolved by lowest index.
void project_tangent_cone(std::span<const double> z, std::span<const double> x,
                          std::span<const unsigned char> present,
                          std::span<double> out);
std::vector<double> project_tangent_cone(const MaskedVector& z,
                                         std::span<const double> x);

// Euclidean projection of z onto the probability simplex over the present
// indices (sort-and-threshold). Throws when nothing is present.
void project_simplex(std::span<const double> z,
                     std::span<const unsigned char> present,
                     std::span<double> out);
std::vector<double> project_simplex(const MaskedVector& z);

// Reusable scratch space so the simulator's inner loop does not allocate.
class SimplexWorkspace {
 public:
  void project_simplex(std::span<const double> z,
                       std::span<const unsigned char> present,
                       std::span<double> out);
  void project_tangent_cone(std::span<const double> z, std::span<const double> x,
                            std::span<const unsigned char> present,
                            std::span<double> out);

 private:
  std::vector<double> sorted_;
  std::vector<int> order_;
};

}  // namespace fluidlb

#endif  // FLUIDLB_SIMPLEX_H_
