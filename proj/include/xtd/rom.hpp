#pragma once

// Parametric reduced-order solver. Each load step's displacement increment
// over [DoF, mu_1, ..., mu_n] is a separated expansion plus sparse extended
// modes supported on the plastic region.

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "xtd/fem.hpp"
#include "xtd/grid.hpp"
#include "xtd/tensor.hpp"

namespace xtd {

struct RomConfig {
  double eps_xtd = 1e-3;            // outer stop: |U_K|_inf / |du|_inf
  double fixed_point_tol = 1e-4;
  std::size_t fixed_point_max_iters = 50;
  double mode_tol = 1e-3;           // mode growth stops below this relative contribution
  std::size_t max_modes_per_step = 30;
  std::size_t max_enrichments_per_step = 10;
  std::uint64_t seed = 1;

  void validate() const;
};

// (element, flat grid point) pairs, sorted.
struct PlasticRegion {
  std::vector<std::pair<std::size_t, std::size_t>> pairs;
  bool empty() const { return pairs.empty(); }
};

struct RomStepReport {
  std::size_t separated_modes = 0;  // excludes load terms
  std::size_t extended_modes = 0;
  std::size_t outer_iterations = 0;
  std::vector<std::size_t> mode_iterations;
  double last_ratio = 0.0;  // |U_K|_inf / |du|_inf of the last enrichment, 0 if none
  bool converged = true;
  bool mode_cap_hit = false;
  std::size_t plastic_pairs = 0;
  double seconds = 0.0;
};

struct RomStepModel {
  // Axes [n_dof, mu...]. The first `load_terms` terms carry prescribed
  // displacement increments on constrained DoFs.
  SeparatedExpansion expansion;
  std::size_t load_terms = 0;
  std::vector<SparseTensor> extended;
  PlasticRegion region;
  SparseTensor delta_f_pl;  // [n_dof, mu...]
  RomStepReport report;

  std::size_t separated_modes() const { return expansion.size() - load_terms; }
};

struct RomModel {
  FeProblem problem;
  ParameterGrid grid;
  RomConfig config;
  std::vector<RomStepModel> steps;
  // Per step, mu axes first: stress and eps_p [mu..., n_gauss, 6], p_eq [mu..., n_gauss].
  std::vector<DenseTensor> stress;
  std::vector<DenseTensor> eps_p;
  std::vector<DenseTensor> p_eq;
};

// Nodes of the flagged elements; extended modes live on their free DoFs.
std::vector<std::size_t> footprint_nodes(const StructuredHexMesh& mesh, const std::vector<std::size_t>& elements);

// Elements with a Gauss point whose elastic trial state from `start` under
// `du` violates the yield condition.
std::vector<std::size_t> detect_plastic_elements(const FeSystem& system, const Material& material,
                                                 const StepLoad& load, const std::vector<PointState>& start,
                                                 const Eigen::VectorXd& du);

struct LocalEnrichment {
  Eigen::VectorXd correction;  // du - du0, nonzero only on the footprint's free DoFs
  Eigen::VectorXd delta_f_pl;  // all DoFs
  std::vector<PointState> points;
  NewtonReport report;
};

// Equilibrium on the flagged elements plus one layer of neighbours, with
// every DoF outside the footprint held at du0.
LocalEnrichment local_enrichment_solve(const FeSystem& system, const Material& material, const StepLoad& load,
                                       const std::vector<PointState>& start,
                                       const std::vector<std::size_t>& flagged, const Eigen::VectorXd& du0,
                                       double tolerance);

struct RomStepOutcome {
  RomStepModel model;
  std::vector<FeState> states;  // per grid point, end of step
};

RomStepOutcome rom_time_step(const FeSystem& system, const ParameterGrid& grid, std::size_t step,
                             const std::vector<FeState>& states, const RomConfig& config);

RomModel rom_train(const FeProblem& problem, const ParameterGrid& grid, const RomConfig& config);

// Displacement increment of one step at a grid point (all DoFs).
Eigen::VectorXd step_increment_at(const RomStepModel& step, const ParameterGrid& grid, std::size_t point);

std::string format_training_report(const RomModel& model);

}  // namespace xtd
