#pragma once

// Data-driven extended tensor decomposition: greedy rank-one modes fitted by
// alternating least squares, interleaved with sparse top-l enrichments of the
// residual.

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "xtd/tensor.hpp"

namespace xtd {

struct FitConfig {
  double eps_m_initial = 0.1;    // stage threshold on the separated residual
  double eps_xtd = 0.01;         // final sup relative error target
  double stage_divisor = 4.0;    // eps_m <- eps_m / c after each stage
  // Entries kept per enrichment; unset means 0.3% of the tensor size, capped at
  // the sum of axis lengths.
  std::optional<std::size_t> enrich_count;
  double fixed_point_tol = 1e-4;
  std::size_t fixed_point_max_iters = 200;
  std::size_t max_separated_modes = 60;
  std::size_t max_enrichments = 20;  // 0 disables enrichment
  std::uint64_t seed = 1;

  void validate() const;
  std::size_t effective_enrich_count(const Shape& shape) const;
};

enum class FitEvent { mode, enrichment };

struct FitTraceEntry {
  FitEvent event;
  std::size_t separated_modes;
  std::size_t extended_modes;
  double error;  // sup relative error of data minus the full model
};

struct RankOneFit {
  RankOneTerm term;
  std::size_t iterations = 0;
  std::size_t restarts = 0;
  bool converged = false;
};

struct FitReport {
  std::vector<FitTraceEntry> trace;
  std::vector<std::size_t> mode_iterations;
  std::vector<bool> mode_converged;
  std::size_t restarts = 0;
  std::vector<double> enrichment_sparsity;
  std::vector<bool> enrichment_short;  // fewer nonzero residual entries than l
  std::size_t first_enrichment_after = 0;  // separated modes at first enrichment
  std::size_t enrich_count = 0;
  double final_error = 1.0;
  bool converged = false;
};

struct XtdDataModel {
  SeparatedExpansion expansion;
  std::vector<SparseTensor> enrichments;
  FitReport report;

  std::size_t separated_modes() const { return expansion.size(); }
  std::size_t extended_modes() const { return enrichments.size(); }
};

struct SweepResult {
  RankOneTerm term;
  bool degenerate = false;  // a factor denominator fell below 1e-30
};

// One alternating pass over all axes: factor i <- contract_except(residual,
// others, i) / prod_{k != i} |g_k|^2.
SweepResult als_sweep(const DenseTensor& residual, RankOneTerm term);

// Deterministic unit-norm initial factors for mode `mode_index`, attempt
// `attempt` (restarts draw a fresh stream).
RankOneTerm initial_term(const Shape& shape, std::uint64_t seed, std::size_t mode_index,
                         std::size_t attempt = 0);

RankOneFit fit_rank_one(const DenseTensor& residual, const FitConfig& config,
                        std::size_t mode_index = 0);

struct EnrichmentSelection {
  SparseTensor enrichment;
  bool short_selection = false;
};

// The l entries of largest magnitude; ties at the cutoff keep the
// lexicographically smallest multi-indices.
EnrichmentSelection select_enrichment(const DenseTensor& residual, std::size_t l);

XtdDataModel xtd_fit(const DenseTensor& data, const FitConfig& config);
// Greedy separated baseline: xtd_fit with enrichment disabled.
XtdDataModel cp_fit(const DenseTensor& data, FitConfig config);

// sup|data - model| / sup|data|
double model_error(const DenseTensor& data, const XtdDataModel& model);
double model_error(const DenseTensor& data, const SeparatedExpansion& expansion,
                   std::span<const SparseTensor> enrichments);

std::string format_fit_report(const XtdDataModel& model);

}  // namespace xtd
