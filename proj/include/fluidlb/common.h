#ifndef FLUIDLB_COMMON_H_
#define FLUIDLB_COMMON_H_

#include <cstddef>
#include <stdexcept>
#include <string>
#include <vector>

namespace fluidlb {

// Category of a domain failure. The CLI maps kContract to a usage error and
// everything else to a domain error.
enum class ErrorKind {
  kContract,          // precondition violated by the caller
  kInfeasible,        // throughput or instance cannot be served
  kOverload,          // a backend receives more than its capacity
  kDisconnected,      // active graph is not connected
  kNonConvergence,    // iterative method ran out of budget
  kNumerical,         // NaN / overflow during integration
};

const char* error_kind_name(ErrorKind kind);

class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what)
      : std::runtime_error(what), kind_(kind) {}
  ErrorKind kind() const { return kind_; }

 private:
  ErrorKind kind_;
};

// Dense row-major matrix. Used for routing matrices (frontends x backends)
// and small symmetric matrices in the spectral code.
class Matrix {
 public:
  Matrix() = default;
  Matrix(int rows, int cols, double fill = 0.0)
      : rows_(rows), cols_(cols),
        data_(static_cast<std::size_t>(rows) * cols, fill) {}

  int rows() const { return rows_; }
  int cols() const { return cols_; }

  double& operator()(int r, int c) {
    return data_[static_cast<std::size_t>(r) * cols_ + c];
  }
  double operator()(int r, int c) const {
    return data_[static_cast<std::size_t>(r) * cols_ + c];
  }

  double* row(int r) { return data_.data() + static_cast<std::size_t>(r) * cols_; }
  const double* row(int r) const {
    return data_.data() + static_cast<std::size_t>(r) * cols_;
  }

  std::vector<double>& data() { return data_; }
  const std::vector<double>& data() const { return data_; }

  bool operator==(const Matrix&) const = default;

 private:
  int rows_ = 0;
  int cols_ = 0;
  std::vector<double> data_;
};

}  // namespace fluidlb

#endif  // FLUIDLB_COMMON_H_
