#ifndef FLUIDLB_JACOBI_H_
#define FLUIDLB_JACOBI_H_

#include <vector>

#include "fluidlb/common.h"

namespace fluidlb {

// Eigenvalues of a symmetric matrix by cyclic Jacobi rotations, ascending.
// Iterates until the off-diagonal Frobenius norm drops below `off_tol`.
std::vector<double> symmetric_eigenvalues(const Matrix& m, double off_tol = 1e-12);

}  // namespace fluidlb

#endif  // FLUIDLB_JACOBI_H_
