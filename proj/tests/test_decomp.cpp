#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "oracles.hpp"
#include "xtd/decomp.hpp"
#include "xtd/error.hpp"

using namespace xtd;

namespace {

DenseTensor two_bumps() {
  DenseTensor t({30, 30});
  for (std::size_t i = 0; i < 30; ++i) {
    for (std::size_t j = 0; j < 30; ++j) {
      const double a = std::hypot(i - 10.0, j - 12.0), b = std::hypot(i - 20.0, j - 18.0);
      t[i * 30 + j] = std::exp(-a / 4.0) + 0.7 * std::exp(-b / 3.0);
    }
  }
  return t;
}

}  // namespace

TEST_CASE("config validation") {
  FitConfig c;
  CHECK_NOTHROW(c.validate());
  c.eps_xtd = 0.5;
  CHECK_THROWS_AS(c.validate(), Error);
  c = FitConfig{};
  c.stage_divisor = 1.0;
  CHECK_THROWS_AS(c.validate(), Error);
  c = FitConfig{};
  c.fixed_point_tol = 0.0;
  CHECK_THROWS_AS(c.validate(), Error);
}

TEST_CASE("default enrichment count is 0.3% of the entries, clamped to the axis sum") {
  FitConfig c;
  CHECK(c.effective_enrich_count({100, 100}) == 30);
  CHECK(c.effective_enrich_count({3, 3}) == 1);
  CHECK(c.effective_enrich_count({1000, 1000}) == 2000);
  c.enrich_count = 7;
  CHECK(c.effective_enrich_count({100, 100}) == 7);
}

TEST_CASE("initial factors are deterministic unit vectors") {
  const RankOneTerm a = initial_term({4, 5, 6}, 9, 2, 0);
  const RankOneTerm b = initial_term({4, 5, 6}, 9, 2, 0);
  const RankOneTerm c = initial_term({4, 5, 6}, 9, 2, 1);
  for (std::size_t k = 0; k < 3; ++k) {
    CHECK(a.factors[k] == b.factors[k]);
    CHECK(std::sqrt(squared_norm(a.factors[k])) == doctest::Approx(1.0));
  }
  CHECK(a.factors[0] != c.factors[0]);
}

TEST_CASE("one alternating sweep leaves the last factor least-squares optimal") {
  std::mt19937_64 rng(4);
  const DenseTensor r = oracle::random_dense({4, 3, 5}, rng);
  const SweepResult s = als_sweep(r, initial_term(r.shape(), 1, 0));
  REQUIRE_FALSE(s.degenerate);
  const DenseTensor t = oracle::outer(s.term.factors);
  DenseTensor diff(r.shape());
  for (std::size_t i = 0; i < r.size(); ++i) diff[i] = r[i] - t[i];
  const auto grad = oracle::contract_except(diff, s.term.factors, 2);
  for (double g : grad) CHECK(std::abs(g) < 1e-12);
}

TEST_CASE("rank-one data is recovered by a single mode") {
  std::mt19937_64 rng(8);
  for (const Shape& shape : {Shape{6, 7}, Shape{3, 4, 5}, Shape{2, 3, 2, 4}}) {
    auto f = oracle::random_factors(shape, rng);
    const DenseTensor data = oracle::outer(f);
    const XtdDataModel m = xtd_fit(data, FitConfig{});
    CHECK(m.separated_modes() == 1);
    CHECK(m.extended_modes() == 0);
    CHECK(model_error(data, m) < 1e-10);
  }
}

TEST_CASE("select_enrichment equals the brute-force top-l set, ties by offset") {
  std::mt19937_64 rng(21);
  std::uniform_int_distribution<int> small(-3, 3);
  for (int trial = 0; trial < 200; ++trial) {
    DenseTensor r({5, 6});
    for (std::size_t i = 0; i < r.size(); ++i) r[i] = small(rng);
    const std::size_t l = 1 + trial % 12;
    const EnrichmentSelection sel = select_enrichment(r, l);
    const auto want = oracle::top_l(r, l);
    REQUIRE(sel.enrichment.offsets() == want);
    for (std::size_t k = 0; k < want.size(); ++k) CHECK(sel.enrichment.values()[k] == r[want[k]]);
    CHECK(sel.short_selection == (want.size() < l));
  }
}

TEST_CASE("cp_fit never enriches and meets its tolerance on smooth data") {
  const DenseTensor data = two_bumps();
  FitConfig c;
  c.eps_xtd = 0.01;
  const XtdDataModel cp = cp_fit(data, c);
  CHECK(cp.extended_modes() == 0);
  CHECK(cp.report.converged);
  CHECK(model_error(data, cp) < 0.01);
  CHECK(model_error(data, cp) == doctest::Approx(cp.report.final_error));
}

TEST_CASE("xtd_fit trace is consistent and the error check includes enrichments") {
  const DenseTensor data = two_bumps();
  FitConfig c;
  c.eps_xtd = 0.005;
  c.enrich_count = 10;
  const XtdDataModel m = xtd_fit(data, c);
  CHECK(m.report.converged);
  const double err = oracle::sup_abs(residual(data, m.expansion, m.enrichments)) / oracle::sup_abs(data);
  CHECK(err == doctest::Approx(m.report.final_error).epsilon(1e-12));
  CHECK(err < 0.005);
  REQUIRE_FALSE(m.report.trace.empty());
  CHECK(m.report.trace.back().error == doctest::Approx(m.report.final_error));
  for (const auto& e : m.enrichments) CHECK(e.nnz() <= 10);
  CHECK(m.report.mode_iterations.size() == m.separated_modes());
}

TEST_CASE("fits are reproducible for a fixed seed") {
  const DenseTensor data = two_bumps();
  const XtdDataModel a = xtd_fit(data, FitConfig{});
  const XtdDataModel b = xtd_fit(data, FitConfig{});
  REQUIRE(a.separated_modes() == b.separated_modes());
  for (std::size_t m = 0; m < a.separated_modes(); ++m) {
    for (std::size_t k = 0; k < 2; ++k) CHECK(a.expansion.terms[m].factors[k] == b.expansion.terms[m].factors[k]);
  }
}
