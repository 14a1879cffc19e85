#include "xtd/decomp.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <random>
#include <sstream>

#include "xtd/error.hpp"

namespace xtd {

void FitConfig::validate() const {
  if (!(eps_xtd > 0.0 && eps_xtd <= eps_m_initial && eps_m_initial < 1.0)) {
    fail(ErrorKind::config, "fit: require 0 < eps_xtd <= eps_m_initial < 1");
  }
  if (!(stage_divisor > 1.0)) fail(ErrorKind::config, "fit: stage_divisor must exceed 1");
  if (enrich_count && *enrich_count < 1) fail(ErrorKind::config, "fit: enrich_count must be >= 1");
  if (!(fixed_point_tol > 0.0 && fixed_point_tol < 1.0)) {
    fail(ErrorKind::config, "fit: fixed_point_tol must lie in (0, 1)");
  }
  if (fixed_point_max_iters < 1) fail(ErrorKind::config, "fit: fixed_point_max_iters must be >= 1");
  if (max_separated_modes < 1) fail(ErrorKind::config, "fit: max_separated_modes must be >= 1");
}

std::size_t FitConfig::effective_enrich_count(const Shape& shape) const {
  if (enrich_count) return *enrich_count;
  const std::size_t total = element_count(shape);
  const std::size_t axis_sum = std::accumulate(shape.begin(), shape.end(), std::size_t{0});
  auto l = static_cast<std::size_t>(std::llround(0.003 * static_cast<double>(total)));
  return std::clamp<std::size_t>(l, 1, std::max<std::size_t>(axis_sum, 1));
}

RankOneTerm initial_term(const Shape& shape, std::uint64_t seed, std::size_t mode_index,
                         std::size_t attempt) {
  RankOneTerm term;
  for (std::size_t axis = 0; axis < shape.size(); ++axis) {
    std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                      static_cast<std::uint32_t>(mode_index), static_cast<std::uint32_t>(axis),
                      static_cast<std::uint32_t>(attempt)};
    std::mt19937_64 rng(seq);
    std::uniform_real_distribution<double> dist(0.0, 1.0);
    Vector f(shape[axis]);
    for (auto& v : f) v = dist(rng);
    const double n = std::sqrt(squared_norm(f));
    for (auto& v : f) v /= n;
    term.factors.push_back(std::move(f));
  }
  return term;
}

SweepResult als_sweep(const DenseTensor& residual, RankOneTerm term) {
  const std::size_t d = residual.order();
  require_same_shape(residual.shape(), term.shape(), "als_sweep");
  std::vector<double> sq(d);
  for (std::size_t k = 0; k < d; ++k) sq[k] = squared_norm(term.factors[k]);
  for (std::size_t axis = 0; axis < d; ++axis) {
    double denom = 1.0;
    for (std::size_t k = 0; k < d; ++k) {
      if (k != axis) denom *= sq[k];
    }
    if (!(denom >= 1e-30)) return {std::move(term), true};
    Vector g = contract_except(residual, term.factors, axis);
    for (auto& v : g) v /= denom;
    sq[axis] = squared_norm(g);
    term.factors[axis] = std::move(g);
  }
  return {std::move(term), false};
}

namespace {

double relative_change(const RankOneTerm& prev, const RankOneTerm& next) {
  const double nn = inner_product(next, next);
  const double pp = inner_product(prev, prev);
  const double np = inner_product(next, prev);
  const double diff = std::max(nn + pp - 2.0 * np, 0.0);
  if (nn == 0.0) return pp == 0.0 ? 0.0 : 1.0;
  return std::sqrt(diff / nn);
}

// Balance the scale across factors so no single factor carries it all.
void balance(RankOneTerm& term) {
  const std::size_t d = term.order();
  double scale = 1.0;
  for (auto& f : term.factors) {
    const double n = std::sqrt(squared_norm(f));
    if (n == 0.0) return;
    for (auto& v : f) v /= n;
    scale *= n;
  }
  const double per = std::pow(scale, 1.0 / static_cast<double>(d));
  for (auto& f : term.factors) {
    for (auto& v : f) v *= per;
  }
}

}  // namespace

RankOneFit fit_rank_one(const DenseTensor& residual, const FitConfig& config,
                        std::size_t mode_index) {
  RankOneFit out;
  if (sup_norm(residual) == 0.0) {
    fail(ErrorKind::numeric, "fit_rank_one: residual is identically zero");
  }
  std::size_t attempt = 0;
  RankOneTerm term = initial_term(residual.shape(), config.seed, mode_index, attempt);
  RankOneTerm best = term;
  double best_change = std::numeric_limits<double>::infinity();
  for (std::size_t it = 1; it <= config.fixed_point_max_iters; ++it) {
    SweepResult sweep = als_sweep(residual, term);
    if (sweep.degenerate) {
      ++out.restarts;
      ++attempt;
      term = initial_term(residual.shape(), config.seed, mode_index, attempt);
      if (out.restarts > 10) fail(ErrorKind::numeric, "fit_rank_one: repeated degenerate restarts");
      continue;
    }
    const double change = relative_change(term, sweep.term);
    term = std::move(sweep.term);
    out.iterations = it;
    if (change <= best_change) {
      best_change = change;
      best = term;
    }
    if (change < config.fixed_point_tol) {
      out.converged = true;
      best = term;
      break;
    }
  }
  balance(best);
  out.term = std::move(best);
  return out;
}

EnrichmentSelection select_enrichment(const DenseTensor& residual, std::size_t l) {
  if (l < 1) fail(ErrorKind::numeric, "select_enrichment: l must be >= 1");
  std::vector<std::size_t> candidates;
  for (std::size_t i = 0; i < residual.size(); ++i) {
    if (residual[i] != 0.0) candidates.push_back(i);
  }
  EnrichmentSelection out;
  out.short_selection = candidates.size() < l;
  const auto before = [&](std::size_t a, std::size_t b) {
    const double ma = std::abs(residual[a]);
    const double mb = std::abs(residual[b]);
    if (ma != mb) return ma > mb;
    return a < b;
  };
  const std::size_t keep = std::min(l, candidates.size());
  std::partial_sort(candidates.begin(), candidates.begin() + static_cast<std::ptrdiff_t>(keep),
                    candidates.end(), before);
  candidates.resize(keep);
  std::vector<double> values;
  values.reserve(keep);
  for (auto off : candidates) values.push_back(residual[off]);
  out.enrichment = SparseTensor(residual.shape(), std::move(candidates), std::move(values));
  return out;
}

double model_error(const DenseTensor& data, const SeparatedExpansion& expansion,
                   std::span<const SparseTensor> enrichments) {
  const double scale = sup_norm(data);
  if (scale == 0.0) fail(ErrorKind::numeric, "model_error: data is identically zero");
  return sup_norm(residual(data, expansion, enrichments)) / scale;
}

double model_error(const DenseTensor& data, const XtdDataModel& model) {
  return model_error(data, model.expansion, model.enrichments);
}

namespace {

DenseTensor subtract(const DenseTensor& a, const SparseTensor& b) {
  DenseTensor out = a;
  b.add_to(out, -1.0);
  return out;
}

}  // namespace

XtdDataModel xtd_fit(const DenseTensor& data, const FitConfig& config) {
  config.validate();
  for (double v : data.data()) {
    if (!std::isfinite(v)) fail(ErrorKind::numeric, "xtd_fit: data contains non-finite values");
  }
  const double scale = sup_norm(data);
  if (scale == 0.0) fail(ErrorKind::numeric, "xtd_fit: data is identically zero");

  XtdDataModel model;
  model.expansion = SeparatedExpansion(data.shape());
  FitReport& report = model.report;
  const std::size_t l = config.effective_enrich_count(data.shape());
  report.enrich_count = l;

  // `accepted` enrichments are frozen; `active` belongs to the open stage and
  // is re-selected from the separated residual after every new mode.
  std::vector<SparseTensor> accepted;
  std::optional<SparseTensor> active;
  double eps_m = config.eps_m_initial;

  const auto all_enrichments = [&]() {
    std::vector<SparseTensor> all = accepted;
    if (active) all.push_back(*active);
    return all;
  };
  const auto record = [&](FitEvent event, const DenseTensor& total_residual) {
    const double err = sup_norm(total_residual) / scale;
    report.trace.push_back({event, model.expansion.size(), accepted.size() + (active ? 1 : 0), err});
    report.final_error = err;
    return err;
  };

  while (model.expansion.size() < config.max_separated_modes) {
    // Fit against data minus accepted terms and accepted enrichments; the
    // active enrichment is held at zero while the new mode is computed.
    const DenseTensor base = residual(data, model.expansion, accepted);
    if (sup_norm(base) == 0.0) {
      report.converged = true;
      report.final_error = 0.0;
      break;
    }
    RankOneFit fit = fit_rank_one(base, config, model.expansion.size());
    report.mode_iterations.push_back(fit.iterations);
    report.mode_converged.push_back(fit.converged);
    report.restarts += fit.restarts;
    model.expansion.push_back(std::move(fit.term));

    DenseTensor separated = residual(data, model.expansion, accepted);
    if (active) active = select_enrichment(separated, l).enrichment;
    double err = record(FitEvent::mode, active ? subtract(separated, *active) : separated);
    if (err <= config.eps_xtd) {
      report.converged = true;
      break;
    }

    const double stage = sup_norm(separated) / scale;
    if (stage <= eps_m && accepted.size() < config.max_enrichments) {
      if (active) {
        accepted.push_back(std::move(*active));
        active.reset();
        separated = residual(data, model.expansion, accepted);
      }
      if (accepted.size() >= config.max_enrichments) continue;
      EnrichmentSelection sel = select_enrichment(separated, l);
      if (report.first_enrichment_after == 0) report.first_enrichment_after = model.expansion.size();
      report.enrichment_short.push_back(sel.short_selection);
      active = std::move(sel.enrichment);
      eps_m /= config.stage_divisor;
      err = record(FitEvent::enrichment, subtract(separated, *active));
      if (err <= config.eps_xtd) {
        report.converged = true;
        break;
      }
    }
  }

  model.enrichments = all_enrichments();
  for (const auto& e : model.enrichments) report.enrichment_sparsity.push_back(e.sparsity());
  if (report.trace.empty()) report.final_error = model_error(data, model);
  return model;
}

XtdDataModel cp_fit(const DenseTensor& data, FitConfig config) {
  config.max_enrichments = 0;
  return xtd_fit(data, config);
}

std::string format_fit_report(const XtdDataModel& model) {
  const FitReport& r = model.report;
  std::ostringstream out;
  out << "separated_modes: " << model.separated_modes() << "\n";
  out << "extended_modes: " << model.extended_modes() << "\n";
  out << "enrich_count: " << r.enrich_count << "\n";
  out << "final_error: " << r.final_error << "\n";
  out << "converged: " << (r.converged ? "yes" : "no") << "\n";
  out << "restarts: " << r.restarts << "\n";
  for (std::size_t k = 0; k < r.enrichment_sparsity.size(); ++k) {
    out << "enrichment_" << k << "_sparsity: " << r.enrichment_sparsity[k] << "\n";
  }
  out << "trace:\n";
  for (const auto& t : r.trace) {
    out << "  " << (t.event == FitEvent::mode ? "mode      " : "enrichment") << " M=" << t.separated_modes
        << " K=" << t.extended_modes << " error=" << t.error << "\n";
  }
  return out.str();
}

}  // namespace xtd
