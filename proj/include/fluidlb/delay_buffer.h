#ifndef FLUIDLB_DELAY_BUFFER_H_
#define FLUIDLB_DELAY_BUFFER_H_

#include <cstdint>
#include <span>
#include <vector>

namespace fluidlb {

// Ring of equally spaced samples of a vector-valued signal. Sample k holds
// the value at time k * dt; the signal is the piecewise-linear interpolant
// of the samples and is constant (equal to sample 0) for t <= 0.
//
// Positions are measured in steps, so a delay tau corresponds to tau / dt.
class DelayBuffer {
 public:
  // `capacity` samples are retained; a lookup `lag` steps into the past
  // needs capacity >= ceil(lag) + 2.
  DelayBuffer(int width, int capacity);

  static int required_capacity(double max_lag_steps);

  // Clears the history and stores `initial` as sample 0.
  void reset(std::span<const double> initial);
  // Appends the next sample.
  void push(std::span<const double> row);

  std::int64_t latest() const { return latest_; }
  int width() const { return width_; }
  int capacity() const { return capacity_; }

  // Value of column `col` at absolute step position `pos` (fractional,
  // pos <= latest()).
  double value_at(int col, double pos) const;
  // Integral over [a, b] of column `col`, in step units (multiply by dt).
  double integral(int col, double a, double b) const;

  std::span<const double> sample(std::int64_t k) const;

 private:
  const double* row_ptr(std::int64_t k) const;

  int width_;
  int capacity_;
  std::int64_t latest_ = -1;
  std::vector<double> data_;
};

}  // namespace fluidlb

#endif  // FLUIDLB_DELAY_BUFFER_H_
