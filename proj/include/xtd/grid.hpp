#pragma once

// Tensor-product parameter grids and piecewise-linear axis location.

#include <string>
#include <vector>

#include "xtd/tensor.hpp"

namespace xtd {

struct GridAxis {
  std::string name;
  std::string unit;
  std::vector<double> values;  // strictly increasing, at least 2
};

// Bracketing interval on one axis: value = (1 - weight) * v[lower] + weight * v[lower + 1].
struct AxisLocation {
  std::size_t lower = 0;
  double weight = 0.0;
};

class ParameterGrid {
 public:
  ParameterGrid() = default;
  explicit ParameterGrid(std::vector<GridAxis> axes);

  static std::vector<double> linspace(double lo, double hi, std::size_t count);

  const std::vector<GridAxis>& axes() const { return axes_; }
  std::size_t order() const { return axes_.size(); }
  Shape shape() const;
  std::size_t size() const;  // number of grid points
  std::size_t axis_index(const std::string& name) const;  // throws config error
  bool has_axis(const std::string& name) const;

  MultiIndex unravel(std::size_t point) const;
  std::size_t offset(const MultiIndex& index) const;
  std::vector<double> values_at(std::size_t point) const;

  // Throws a numeric error naming the axis and its bounds when out of range.
  AxisLocation locate(std::size_t axis, double value) const;
  std::vector<AxisLocation> locate(const std::vector<double>& mu) const;

 private:
  std::vector<GridAxis> axes_;
};

double interpolate(const std::vector<double>& samples, const AxisLocation& loc);

}  // namespace xtd
