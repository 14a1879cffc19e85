#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "oracles.hpp"
#include "xtd/error.hpp"
#include "xtd/tensor.hpp"

using namespace xtd;

TEST_CASE("dense offsets are row-major and unravel inverts them") {
  DenseTensor t({3, 4, 5});
  CHECK(t.strides() == std::vector<std::size_t>{20, 5, 1});
  CHECK(t.offset({2, 1, 3}) == 2 * 20 + 5 + 3);
  for (std::size_t i = 0; i < t.size(); ++i) CHECK(t.offset(t.unravel(i)) == i);
  CHECK_THROWS_AS(t.at({3, 0, 0}), Error);
  CHECK_THROWS_AS(DenseTensor({2, 0}), Error);
}

TEST_CASE("sparse construction sorts, sums duplicates and drops zeros") {
  SparseTensor s({2, 3}, {5, 1, 5, 2, 4}, {1.0, 2.0, 3.0, 0.0, -1.0});
  CHECK(s.offsets() == std::vector<std::size_t>{1, 4, 5});
  CHECK(s.values() == std::vector<double>{2.0, -1.0, 4.0});
  CHECK(s.index(2) == MultiIndex{1, 2});
  CHECK(s.sparsity() == doctest::Approx(0.5));
  SparseTensor cancel({4}, {1, 1}, {2.0, -2.0});
  CHECK(cancel.nnz() == 0);
  CHECK_THROWS_AS(SparseTensor({2, 2}, {4}, {1.0}), Error);
}

TEST_CASE("sparse dense round trip and scaled accumulation") {
  std::mt19937_64 rng(3);
  DenseTensor d = oracle::random_dense({3, 3, 2}, rng);
  d[4] = 0.0;
  d[7] = 0.0;
  const SparseTensor s = SparseTensor::from_dense(d);
  CHECK(s.nnz() == d.size() - 2);
  const DenseTensor back = s.to_dense();
  for (std::size_t i = 0; i < d.size(); ++i) CHECK(back[i] == d[i]);
  DenseTensor acc(d.shape(), 1.0);
  s.add_to(acc, 2.0);
  for (std::size_t i = 0; i < d.size(); ++i) CHECK(acc[i] == doctest::Approx(1.0 + 2.0 * d[i]));
}

TEST_CASE("rank-one terms agree with the explicit outer product") {
  std::mt19937_64 rng(5);
  const Shape shape{3, 4, 2};
  RankOneTerm a{oracle::random_factors(shape, rng)};
  RankOneTerm b{oracle::random_factors(shape, rng)};
  const DenseTensor da = oracle::outer(a.factors), db = oracle::outer(b.factors);
  const DenseTensor ta = a.to_dense();
  double dot_ab = 0.0, nrm = 0.0;
  for (std::size_t i = 0; i < da.size(); ++i) {
    CHECK(ta[i] == doctest::Approx(da[i]).epsilon(1e-14));
    dot_ab += da[i] * db[i];
    nrm += da[i] * da[i];
  }
  CHECK(inner_product(a, b) == doctest::Approx(dot_ab).epsilon(1e-12));
  CHECK(a.norm() == doctest::Approx(std::sqrt(nrm)).epsilon(1e-12));
  CHECK(a.sup_norm() == doctest::Approx(oracle::sup_abs(da)).epsilon(1e-12));
  CHECK(a.value_at({2, 1, 1}) == doctest::Approx(da.at({2, 1, 1})));
}

TEST_CASE("contract_except matches the nested-loop oracle on every axis") {
  std::mt19937_64 rng(11);
  for (const Shape& shape : {Shape{7}, Shape{3, 5}, Shape{2, 3, 4}, Shape{4, 4, 4, 4}, Shape{1, 3, 1, 2}}) {
    const DenseTensor t = oracle::random_dense(shape, rng);
    const auto f = oracle::random_factors(shape, rng);
    for (std::size_t axis = 0; axis < shape.size(); ++axis) {
      const Vector got = contract_except(t, f, axis);
      const auto want = oracle::contract_except(t, f, axis);
      REQUIRE(got.size() == want.size());
      for (std::size_t i = 0; i < got.size(); ++i) CHECK(std::abs(got[i] - want[i]) <= 1e-12 * (1.0 + std::abs(want[i])));
    }
  }
}

TEST_CASE("reconstruct sums terms and enrichments; fibers avoid densification") {
  std::mt19937_64 rng(2);
  const Shape shape{4, 3, 5};
  SeparatedExpansion e(shape);
  e.push_back({oracle::random_factors(shape, rng)});
  e.push_back({oracle::random_factors(shape, rng)});
  std::vector<SparseTensor> enr{SparseTensor(shape, {0, 17, 59}, {1.0, -2.0, 0.5})};
  DenseTensor want(shape);
  for (const auto& t : e.terms) {
    const DenseTensor d = oracle::outer(t.factors);
    for (std::size_t i = 0; i < d.size(); ++i) want[i] += d[i];
  }
  want[0] += 1.0;
  want[17] -= 2.0;
  want[59] += 0.5;
  const DenseTensor got = reconstruct(e, enr);
  for (std::size_t i = 0; i < got.size(); ++i) CHECK(got[i] == doctest::Approx(want[i]).epsilon(1e-13));

  const Vector fiber = reconstruct_fiber(e, enr, {0, 2, 3}, 0);
  for (std::size_t i = 0; i < 4; ++i) CHECK(fiber[i] == doctest::Approx(want.at({i, 2, 3})).epsilon(1e-13));

  const DenseTensor r = residual(want, e, enr);
  CHECK(sup_norm(r) < 1e-13);
  CHECK_THROWS_AS(reconstruct(e, enr, 10), Error);
}

TEST_CASE("norms") {
  DenseTensor t({2, 2}, std::vector<double>{3.0, -4.0, 0.0, 0.0});
  CHECK(sup_norm(t) == 4.0);
  CHECK(frobenius_norm(t) == doctest::Approx(5.0));
}
