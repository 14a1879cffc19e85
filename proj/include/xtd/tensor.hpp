#pragma once

// Dense/sparse multiway arrays and rank-one (canonical) expansions.
//
// Storage is row-major: the last axis is contiguous. Sparse tensors are
// coordinate lists keyed by the row-major linear offset, which orders entries
// lexicographically by multi-index.

#include <cstddef>
#include <span>
#include <string>
#include <vector>

namespace xtd {

using Shape = std::vector<std::size_t>;
using MultiIndex = std::vector<std::size_t>;
using Vector = std::vector<double>;

std::size_t element_count(const Shape& shape);
std::vector<std::size_t> row_major_strides(const Shape& shape);
std::string shape_string(const Shape& shape);

// Throws Error(numeric) naming the first offending axis.
void require_same_shape(const Shape& expected, const Shape& actual,
                        const std::string& context);

class DenseTensor {
 public:
  DenseTensor() = default;
  explicit DenseTensor(Shape shape, double fill = 0.0);
  DenseTensor(Shape shape, std::vector<double> data);

  const Shape& shape() const { return shape_; }
  const std::vector<std::size_t>& strides() const { return strides_; }
  std::size_t order() const { return shape_.size(); }
  std::size_t size() const { return data_.size(); }

  std::span<const double> data() const { return data_; }
  std::span<double> data() { return data_; }
  std::vector<double>& storage() { return data_; }
  const std::vector<double>& storage() const { return data_; }

  double operator[](std::size_t linear) const { return data_[linear]; }
  double& operator[](std::size_t linear) { return data_[linear]; }

  double at(const MultiIndex& index) const;
  double& at(const MultiIndex& index);

  std::size_t offset(const MultiIndex& index) const;
  MultiIndex unravel(std::size_t linear) const;

 private:
  Shape shape_;
  std::vector<std::size_t> strides_;
  std::vector<double> data_;
};

class SparseTensor {
 public:
  SparseTensor() = default;
  explicit SparseTensor(Shape shape);
  // Entries may arrive unsorted; duplicates are summed and zeros stripped.
  SparseTensor(Shape shape, std::vector<std::size_t> offsets,
               std::vector<double> values);

  static SparseTensor from_dense(const DenseTensor& dense);

  const Shape& shape() const { return shape_; }
  std::size_t nnz() const { return offsets_.size(); }
  const std::vector<std::size_t>& offsets() const { return offsets_; }
  const std::vector<double>& values() const { return values_; }

  MultiIndex index(std::size_t entry) const;
  double sparsity() const;  // fraction of zero-valued elements
  DenseTensor to_dense() const;
  void add_to(DenseTensor& target, double scale = 1.0) const;

 private:
  Shape shape_;
  std::vector<std::size_t> offsets_;
  std::vector<double> values_;
};

struct RankOneTerm {
  std::vector<Vector> factors;

  std::size_t order() const { return factors.size(); }
  Shape shape() const;
  DenseTensor to_dense() const;
  double value_at(const MultiIndex& index) const;
  // Frobenius norm, computed from factor norms.
  double norm() const;
  double sup_norm() const;
};

// <a, b> for two rank-one terms of equal shape, via factor inner products.
double inner_product(const RankOneTerm& a, const RankOneTerm& b);
double dot(std::span<const double> a, std::span<const double> b);
double squared_norm(std::span<const double> a);

struct SeparatedExpansion {
  Shape shape;
  std::vector<RankOneTerm> terms;

  SeparatedExpansion() = default;
  explicit SeparatedExpansion(Shape s) : shape(std::move(s)) {}
  void push_back(RankOneTerm term);
  std::size_t size() const { return terms.size(); }
};

inline constexpr std::size_t default_element_cap = 100'000'000;

// Sum of all terms plus all enrichments, densely materialized.
DenseTensor reconstruct(const SeparatedExpansion& expansion,
                        std::span<const SparseTensor> enrichments,
                        std::size_t element_cap = default_element_cap);

// Fiber of the reconstruction along `axis` at the fixed indices of `index`
// (the entry for `axis` is ignored). Never materializes the full tensor.
Vector reconstruct_fiber(const SeparatedExpansion& expansion,
                         std::span<const SparseTensor> enrichments,
                         const MultiIndex& index, std::size_t axis);

// v[i] = sum over all other indices of tensor * prod_{k != free} factors[k].
// factors[free_axis] is ignored. The reduction visits the tensor in storage
// order, so the result is bitwise reproducible.
Vector contract_except(const DenseTensor& tensor,
                       std::span<const Vector> factors, std::size_t free_axis);

double sup_norm(const DenseTensor& tensor);
double sup_norm(std::span<const double> values);
double frobenius_norm(const DenseTensor& tensor);

DenseTensor residual(const DenseTensor& data,
                     const SeparatedExpansion& expansion,
                     std::span<const SparseTensor> enrichments);

}  // namespace xtd
