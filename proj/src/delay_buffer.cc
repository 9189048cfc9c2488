#include "fluidlb/delay_buffer.h"

#include <algorithm>
#include <cmath>
#include <string>

#include "fluidlb/common.h"

namespace fluidlb {

DelayBuffer::DelayBuffer(int width, int capacity)
    : width_(width), capacity_(capacity),
      data_(static_cast<std::size_t>(width) * capacity, 0.0) {
  if (width < 1 || capacity < 2) {
    throw Error(ErrorKind::kContract, "delay buffer needs width >= 1 and capacity >= 2");
  }
}

int DelayBuffer::required_capacity(double max_lag_steps) {
  return static_cast<int>(std::ceil(max_lag_steps)) + 2;
}

void DelayBuffer::reset(std::span<const double> initial) {
  if (static_cast<int>(initial.size()) != width_) {
    throw Error(ErrorKind::kContract, "delay buffer row has wrong width");
  }
  latest_ = 0;
  std::copy(initial.begin(), initial.end(), data_.begin());
}

void DelayBuffer::push(std::span<const double> row) {
  if (static_cast<int>(row.size()) != width_) {
    throw Error(ErrorKind::kContract, "delay buffer row has wrong width");
  }
  if (latest_ < 0) throw Error(ErrorKind::kContract, "delay buffer used before reset");
  ++latest_;
  const std::size_t slot = static_cast<std::size_t>(latest_ % capacity_) * width_;
  std::copy(row.begin(), row.end(), data_.begin() + slot);
}

const double* DelayBuffer::row_ptr(std::int64_t k) const {
  if (k < 0) k = 0;
  if (k > latest_ || k <= latest_ - capacity_) {
    throw Error(ErrorKind::kContract,
                "delay buffer lookup outside the retained window (sample " +
                    std::to_string(k) + ", latest " + std::to_string(latest_) + ")");
  }
  return data_.data() + static_cast<std::size_t>(k % capacity_) * width_;
}

std::span<const double> DelayBuffer::sample(std::int64_t k) const {
  return {row_ptr(k), static_cast<std::size_t>(width_)};
}

double DelayBuffer::value_at(int col, double pos) const {
  if (pos <= 0.0) return row_ptr(0)[col];
  const double base = std::floor(pos);
  const auto k = static_cast<std::int64_t>(base);
  const double frac = pos - base;
  const double lo = row_ptr(k)[col];
  if (frac == 0.0) return lo;
  return lo + frac * (row_ptr(k + 1)[col] - lo);
}

double DelayBuffer::integral(int col, double a, double b) const {
  if (b < a) return -integral(col, b, a);
  double sum = 0.0;
  double left = a;
  double left_value = value_at(col, a);
  while (left < b) {
    const double right = std::min(b, std::floor(left) + 1.0);
    const double right_value = value_at(col, right);
    sum += 0.5 * (left_value + right_value) * (right - left);
    left = right;
    left_value = right_value;
  }
  return sum;
}

}  // namespace fluidlb
