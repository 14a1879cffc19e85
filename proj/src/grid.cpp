#include "xtd/grid.hpp"

#include <algorithm>
#include <sstream>

#include "xtd/error.hpp"

namespace xtd {

ParameterGrid::ParameterGrid(std::vector<GridAxis> axes) : axes_(std::move(axes)) {
  for (const auto& a : axes_) {
    if (a.values.size() < 2) fail(ErrorKind::config, "grid axis '" + a.name + "' needs at least 2 values");
    for (std::size_t i = 1; i < a.values.size(); ++i) {
      if (!(a.values[i] > a.values[i - 1])) {
        fail(ErrorKind::config, "grid axis '" + a.name + "' values must be strictly increasing");
      }
    }
    if (std::count_if(axes_.begin(), axes_.end(), [&](const GridAxis& b) { return b.name == a.name; }) > 1) {
      fail(ErrorKind::config, "duplicate grid axis '" + a.name + "'");
    }
  }
}

std::vector<double> ParameterGrid::linspace(double lo, double hi, std::size_t count) {
  if (count < 2) fail(ErrorKind::config, "linspace needs at least 2 points");
  std::vector<double> v(count);
  for (std::size_t i = 0; i < count; ++i) {
    v[i] = lo + (hi - lo) * static_cast<double>(i) / static_cast<double>(count - 1);
  }
  v.back() = hi;
  return v;
}

Shape ParameterGrid::shape() const {
  Shape s;
  for (const auto& a : axes_) s.push_back(a.values.size());
  return s;
}

std::size_t ParameterGrid::size() const { return element_count(shape()); }

bool ParameterGrid::has_axis(const std::string& name) const {
  return std::any_of(axes_.begin(), axes_.end(), [&](const GridAxis& a) { return a.name == name; });
}

std::size_t ParameterGrid::axis_index(const std::string& name) const {
  for (std::size_t i = 0; i < axes_.size(); ++i) {
    if (axes_[i].name == name) return i;
  }
  fail(ErrorKind::config, "unknown grid axis '" + name + "'");
}

MultiIndex ParameterGrid::unravel(std::size_t point) const {
  MultiIndex idx(axes_.size());
  for (std::size_t k = axes_.size(); k-- > 0;) {
    const std::size_t n = axes_[k].values.size();
    idx[k] = point % n;
    point /= n;
  }
  return idx;
}

std::size_t ParameterGrid::offset(const MultiIndex& index) const {
  std::size_t off = 0;
  for (std::size_t k = 0; k < axes_.size(); ++k) off = off * axes_[k].values.size() + index[k];
  return off;
}

std::vector<double> ParameterGrid::values_at(std::size_t point) const {
  const MultiIndex idx = unravel(point);
  std::vector<double> v(axes_.size());
  for (std::size_t k = 0; k < axes_.size(); ++k) v[k] = axes_[k].values[idx[k]];
  return v;
}

AxisLocation ParameterGrid::locate(std::size_t axis, double value) const {
  const auto& v = axes_.at(axis).values;
  if (!(value >= v.front() && value <= v.back())) {
    std::ostringstream msg;
    msg << "parameter '" << axes_[axis].name << "' = " << value << " outside [" << v.front() << ", "
        << v.back() << "]";
    fail(ErrorKind::numeric, msg.str());
  }
  // Exact grid hits get weight 0 on their own node so the result is bitwise
  // the stored value.
  auto it = std::lower_bound(v.begin(), v.end(), value);
  std::size_t i = static_cast<std::size_t>(it - v.begin());
  if (i < v.size() && v[i] == value) {
    if (i + 1 < v.size()) return {i, 0.0};
    return {i - 1, 1.0};
  }
  const std::size_t lo = i - 1;
  return {lo, (value - v[lo]) / (v[lo + 1] - v[lo])};
}

std::vector<AxisLocation> ParameterGrid::locate(const std::vector<double>& mu) const {
  if (mu.size() != axes_.size()) {
    fail(ErrorKind::numeric, "expected " + std::to_string(axes_.size()) + " parameter values, got " +
                                 std::to_string(mu.size()));
  }
  std::vector<AxisLocation> out;
  for (std::size_t k = 0; k < mu.size(); ++k) out.push_back(locate(k, mu[k]));
  return out;
}

double interpolate(const std::vector<double>& samples, const AxisLocation& loc) {
  if (loc.weight == 0.0) return samples[loc.lower];
  if (loc.weight == 1.0) return samples[loc.lower + 1];
  return (1.0 - loc.weight) * samples[loc.lower] + loc.weight * samples[loc.lower + 1];
}

}  // namespace xtd
