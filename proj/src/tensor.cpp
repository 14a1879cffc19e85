#include "xtd/tensor.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>

#include "xtd/error.hpp"

namespace xtd {

const char* to_string(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::config: return "config";
    case ErrorKind::io: return "io";
    case ErrorKind::numeric: return "numeric";
    case ErrorKind::not_converged: return "not-converged";
  }
  return "unknown";
}

std::size_t element_count(const Shape& shape) {
  std::size_t n = 1;
  for (auto s : shape) n *= s;
  return n;
}

std::vector<std::size_t> row_major_strides(const Shape& shape) {
  std::vector<std::size_t> strides(shape.size(), 1);
  for (std::size_t k = shape.size(); k-- > 1;) strides[k - 1] = strides[k] * shape[k];
  return strides;
}

std::string shape_string(const Shape& shape) {
  std::ostringstream out;
  for (std::size_t k = 0; k < shape.size(); ++k) out << (k ? "x" : "") << shape[k];
  return out.str();
}

void require_same_shape(const Shape& expected, const Shape& actual,
                        const std::string& context) {
  if (expected.size() != actual.size()) {
    fail(ErrorKind::numeric, context + ": order mismatch (" + shape_string(expected) +
                                 " vs " + shape_string(actual) + ")");
  }
  for (std::size_t k = 0; k < expected.size(); ++k) {
    if (expected[k] != actual[k]) {
      fail(ErrorKind::numeric, context + ": shape mismatch on axis " + std::to_string(k) +
                                   " (" + std::to_string(expected[k]) + " vs " +
                                   std::to_string(actual[k]) + ")");
    }
  }
}

namespace {

void validate_shape(const Shape& shape) {
  if (shape.empty()) fail(ErrorKind::numeric, "tensor order must be at least 1");
  for (std::size_t k = 0; k < shape.size(); ++k) {
    if (shape[k] == 0) fail(ErrorKind::numeric, "axis " + std::to_string(k) + " has zero length");
  }
}

}  // namespace

// ---------------------------------------------------------------------------
// DenseTensor

DenseTensor::DenseTensor(Shape shape, double fill)
    : shape_(std::move(shape)), strides_(row_major_strides(shape_)) {
  validate_shape(shape_);
  data_.assign(element_count(shape_), fill);
}

DenseTensor::DenseTensor(Shape shape, std::vector<double> data)
    : shape_(std::move(shape)), strides_(row_major_strides(shape_)), data_(std::move(data)) {
  validate_shape(shape_);
  if (data_.size() != element_count(shape_)) {
    fail(ErrorKind::numeric, "data length " + std::to_string(data_.size()) +
                                 " does not match shape " + shape_string(shape_));
  }
}

std::size_t DenseTensor::offset(const MultiIndex& index) const {
  if (index.size() != shape_.size()) fail(ErrorKind::numeric, "index order mismatch");
  std::size_t off = 0;
  for (std::size_t k = 0; k < index.size(); ++k) {
    if (index[k] >= shape_[k]) {
      fail(ErrorKind::numeric, "index out of bounds on axis " + std::to_string(k));
    }
    off += index[k] * strides_[k];
  }
  return off;
}

MultiIndex DenseTensor::unravel(std::size_t linear) const {
  MultiIndex index(shape_.size());
  for (std::size_t k = 0; k < shape_.size(); ++k) {
    index[k] = linear / strides_[k];
    linear %= strides_[k];
  }
  return index;
}

double DenseTensor::at(const MultiIndex& index) const { return data_[offset(index)]; }
double& DenseTensor::at(const MultiIndex& index) { return data_[offset(index)]; }

// ---------------------------------------------------------------------------
// SparseTensor

SparseTensor::SparseTensor(Shape shape) : shape_(std::move(shape)) { validate_shape(shape_); }

SparseTensor::SparseTensor(Shape shape, std::vector<std::size_t> offsets,
                           std::vector<double> values)
    : shape_(std::move(shape)) {
  validate_shape(shape_);
  if (offsets.size() != values.size()) {
    fail(ErrorKind::numeric, "sparse offsets/values length mismatch");
  }
  const std::size_t total = element_count(shape_);
  std::vector<std::size_t> order(offsets.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return offsets[a] < offsets[b]; });
  for (std::size_t i = 0; i < order.size();) {
    const std::size_t off = offsets[order[i]];
    if (off >= total) fail(ErrorKind::numeric, "sparse entry out of bounds");
    double sum = 0.0;
    for (; i < order.size() && offsets[order[i]] == off; ++i) sum += values[order[i]];
    if (sum != 0.0) {
      offsets_.push_back(off);
      values_.push_back(sum);
    }
  }
}

SparseTensor SparseTensor::from_dense(const DenseTensor& dense) {
  SparseTensor out(dense.shape());
  for (std::size_t i = 0; i < dense.size(); ++i) {
    if (dense[i] != 0.0) {
      out.offsets_.push_back(i);
      out.values_.push_back(dense[i]);
    }
  }
  return out;
}

MultiIndex SparseTensor::index(std::size_t entry) const {
  const auto strides = row_major_strides(shape_);
  std::size_t linear = offsets_.at(entry);
  MultiIndex idx(shape_.size());
  for (std::size_t k = 0; k < shape_.size(); ++k) {
    idx[k] = linear / strides[k];
    linear %= strides[k];
  }
  return idx;
}

double SparseTensor::sparsity() const {
  return 1.0 - static_cast<double>(nnz()) / static_cast<double>(element_count(shape_));
}

DenseTensor SparseTensor::to_dense() const {
  DenseTensor out(shape_);
  add_to(out);
  return out;
}

void SparseTensor::add_to(DenseTensor& target, double scale) const {
  require_same_shape(target.shape(), shape_, "sparse accumulate");
  for (std::size_t i = 0; i < offsets_.size(); ++i) target[offsets_[i]] += scale * values_[i];
}

// ---------------------------------------------------------------------------
// Rank-one terms

double dot(std::span<const double> a, std::span<const double> b) {
  if (a.size() != b.size()) fail(ErrorKind::numeric, "dot: length mismatch");
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

double squared_norm(std::span<const double> a) { return dot(a, a); }

Shape RankOneTerm::shape() const {
  Shape s;
  s.reserve(factors.size());
  for (const auto& f : factors) s.push_back(f.size());
  return s;
}

DenseTensor RankOneTerm::to_dense() const {
  DenseTensor out(shape());
  SeparatedExpansion e(out.shape());
  e.terms.push_back(*this);
  return reconstruct(e, {});
}

double RankOneTerm::value_at(const MultiIndex& index) const {
  double v = 1.0;
  for (std::size_t k = 0; k < factors.size(); ++k) v *= factors[k][index[k]];
  return v;
}

double RankOneTerm::norm() const {
  double n = 1.0;
  for (const auto& f : factors) n *= std::sqrt(squared_norm(f));
  return n;
}

double RankOneTerm::sup_norm() const {
  double n = 1.0;
  for (const auto& f : factors) n *= xtd::sup_norm(std::span<const double>(f));
  return n;
}

double inner_product(const RankOneTerm& a, const RankOneTerm& b) {
  if (a.order() != b.order()) fail(ErrorKind::numeric, "inner_product: order mismatch");
  double p = 1.0;
  for (std::size_t k = 0; k < a.order(); ++k) p *= dot(a.factors[k], b.factors[k]);
  return p;
}

void SeparatedExpansion::push_back(RankOneTerm term) {
  require_same_shape(shape, term.shape(), "separated expansion term");
  terms.push_back(std::move(term));
}

// ---------------------------------------------------------------------------
// Reconstruction

namespace {

void check_parts(const SeparatedExpansion& expansion, std::span<const SparseTensor> enrichments) {
  for (std::size_t m = 0; m < expansion.terms.size(); ++m) {
    require_same_shape(expansion.shape, expansion.terms[m].shape(),
                       "term " + std::to_string(m));
  }
  for (std::size_t k = 0; k < enrichments.size(); ++k) {
    require_same_shape(expansion.shape, enrichments[k].shape(),
                       "enrichment " + std::to_string(k));
  }
}

// Adds the outer product of `factors` into `out` (row-major recursion on the
// leading axes, innermost axis vectorized).
void add_outer(std::span<double> out, const std::vector<Vector>& factors, std::size_t axis,
               double scale, const std::vector<std::size_t>& strides) {
  const Vector& f = factors[axis];
  if (axis + 1 == factors.size()) {
    for (std::size_t i = 0; i < f.size(); ++i) out[i] += scale * f[i];
    return;
  }
  for (std::size_t i = 0; i < f.size(); ++i) {
    if (f[i] == 0.0) continue;
    add_outer(out.subspan(i * strides[axis]), factors, axis + 1, scale * f[i], strides);
  }
}

}  // namespace

DenseTensor reconstruct(const SeparatedExpansion& expansion,
                        std::span<const SparseTensor> enrichments, std::size_t element_cap) {
  check_parts(expansion, enrichments);
  if (element_count(expansion.shape) > element_cap) {
    fail(ErrorKind::numeric, "reconstruct: " + shape_string(expansion.shape) +
                                 " exceeds the dense element cap; reconstruct fibers instead");
  }
  DenseTensor out(expansion.shape);
  const auto& strides = out.strides();
  for (const auto& term : expansion.terms) add_outer(out.data(), term.factors, 0, 1.0, strides);
  for (const auto& e : enrichments) e.add_to(out);
  return out;
}

Vector reconstruct_fiber(const SeparatedExpansion& expansion,
                         std::span<const SparseTensor> enrichments, const MultiIndex& index,
                         std::size_t axis) {
  check_parts(expansion, enrichments);
  const Shape& shape = expansion.shape;
  if (index.size() != shape.size() || axis >= shape.size()) {
    fail(ErrorKind::numeric, "reconstruct_fiber: bad index");
  }
  Vector fiber(shape[axis], 0.0);
  for (const auto& term : expansion.terms) {
    double scale = 1.0;
    for (std::size_t k = 0; k < shape.size(); ++k) {
      if (k != axis) scale *= term.factors[k][index[k]];
    }
    if (scale == 0.0) continue;
    const Vector& f = term.factors[axis];
    for (std::size_t i = 0; i < fiber.size(); ++i) fiber[i] += scale * f[i];
  }
  const auto strides = row_major_strides(shape);
  for (const auto& e : enrichments) {
    for (std::size_t n = 0; n < e.nnz(); ++n) {
      std::size_t linear = e.offsets()[n];
      bool match = true;
      std::size_t along = 0;
      for (std::size_t k = 0; k < shape.size(); ++k) {
        const std::size_t ik = linear / strides[k];
        linear %= strides[k];
        if (k == axis) {
          along = ik;
        } else if (ik != index[k]) {
          match = false;
          break;
        }
      }
      if (match) fiber[along] += e.values()[n];
    }
  }
  return fiber;
}

Vector contract_except(const DenseTensor& tensor, std::span<const Vector> factors,
                       std::size_t free_axis) {
  const Shape& shape = tensor.shape();
  const std::size_t d = shape.size();
  if (free_axis >= d) fail(ErrorKind::numeric, "contract_except: free axis out of range");
  if (factors.size() != d) {
    fail(ErrorKind::numeric, "contract_except: expected " + std::to_string(d) +
                                 " factor slots, got " + std::to_string(factors.size()));
  }
  for (std::size_t k = 0; k < d; ++k) {
    if (k != free_axis && factors[k].size() != shape[k]) {
      fail(ErrorKind::numeric, "contract_except: factor length mismatch on axis " +
                                   std::to_string(k) + " (" + std::to_string(factors[k].size()) +
                                   " vs " + std::to_string(shape[k]) + ")");
    }
  }

  Vector out(shape[free_axis], 0.0);
  const auto data = tensor.data();
  const std::size_t inner = shape[d - 1];

  // Walk the leading d-1 axes with an odometer; the last axis is a dot product
  // (or a scaled axpy when it is the free axis).
  MultiIndex idx(d, 0);
  std::size_t base = 0;
  const std::size_t rows = tensor.size() / inner;
  for (std::size_t r = 0; r < rows; ++r, base += inner) {
    double w = 1.0;
    for (std::size_t k = 0; k + 1 < d; ++k) {
      if (k != free_axis) w *= factors[k][idx[k]];
    }
    if (free_axis == d - 1) {
      for (std::size_t i = 0; i < inner; ++i) out[i] += w * data[base + i];
    } else {
      const Vector& last = factors[d - 1];
      double s = 0.0;
      for (std::size_t i = 0; i < inner; ++i) s += data[base + i] * last[i];
      out[idx[free_axis]] += w * s;
    }
    for (std::size_t k = d - 1; k-- > 0;) {
      if (++idx[k] < shape[k]) break;
      idx[k] = 0;
    }
  }
  return out;
}

double sup_norm(std::span<const double> values) {
  double m = 0.0;
  for (double v : values) m = std::max(m, std::abs(v));
  return m;
}

double sup_norm(const DenseTensor& tensor) {
  if (tensor.size() == 0) fail(ErrorKind::numeric, "sup_norm of an empty tensor");
  return sup_norm(tensor.data());
}

double frobenius_norm(const DenseTensor& tensor) { return std::sqrt(squared_norm(tensor.data())); }

DenseTensor residual(const DenseTensor& data, const SeparatedExpansion& expansion,
                     std::span<const SparseTensor> enrichments) {
  require_same_shape(data.shape(), expansion.shape, "residual");
  DenseTensor approx = reconstruct(expansion, enrichments);
  DenseTensor out = data;
  for (std::size_t i = 0; i < out.size(); ++i) out[i] -= approx[i];
  return out;
}

}  // namespace xtd
