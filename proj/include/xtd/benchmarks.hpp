#pragma once

// Desk-scale benchmark problems: the four-bump data set and a miniature
// cyclic plasticity block.

#include <cstdint>
#include <string>
#include <vector>

#include "xtd/decomp.hpp"
#include "xtd/fem.hpp"
#include "xtd/grid.hpp"
#include "xtd/predict.hpp"
#include "xtd/rom.hpp"

namespace xtd {

// u(m1, m2) = sum_i 100 exp(-sqrt((m1 - a_i)^2 + (m2 - b_i)^2) / 10) on the
// integer grid 1..100 in each direction.
DenseTensor four_bump_data();
ParameterGrid four_bump_grid();

struct AppendixAResult {
  XtdDataModel cp;
  XtdDataModel xtd;
  std::size_t cp_modes = 0;       // modes until the sup error drops below 1%
  double cp_error = 0.0;
  double enrichment_sparsity = 0.0;
  double seconds = 0.0;
};

AppendixAResult run_appendix_a(std::uint64_t seed = 1);
std::string format_appendix_a(const AppendixAResult& r);
std::string appendix_a_csv(const AppendixAResult& r);

// 7x7x4 nodes on 6 x 6 x 2.5 m, base fixed, a cyclic vertical displacement
// at the centre node of the top face. E = 210 GPa, nu = 0.3.
FeProblem example1_problem();
// sigma_y in [300, 900] MPa x 5, H in [21, 63] GPa x 3; yield_scale
// multiplies the sigma_y range.
ParameterGrid example1_grid(double yield_scale = 1.0);

struct Example1Options {
  std::size_t draws = 10;
  std::uint64_t seed = 7;
  double yield_scale = 1.0;
  PredictMethod method = PredictMethod::replay;
  RomConfig rom;
};

struct Example1Draw {
  std::vector<double> mu;
  double von_mises_error = 0.0;  // relative L2 over Gauss points, final step
  double p_eq_error = 0.0;
  double snapshot_von_mises_error = 0.0;
  double snapshot_p_eq_error = 0.0;
  double displacement_error = 0.0;  // relative sup, over all steps
};

struct Example1Result {
  RomModel model;
  std::vector<Example1Draw> draws;
  double mean_von_mises_error = 0.0;
  double mean_p_eq_error = 0.0;
  double mean_snapshot_von_mises_error = 0.0;
  double mean_snapshot_p_eq_error = 0.0;
  double grid_displacement_error = 0.0;  // ROM vs oracle sweep at the grid points, relative sup
  double grid_von_mises_error = 0.0;     // worst relative L2 over grid points and steps
  std::size_t max_extended_modes = 0;
  std::size_t total_extended_modes = 0;
  double sweep_seconds = 0.0;
  double train_seconds = 0.0;
  double eval_seconds = 0.0;
};

// Relative L2 error of a per-Gauss-point scalar.
double relative_l2(const std::vector<double>& approx, const std::vector<double>& reference);

Example1Result run_example1_mini(const Example1Options& options = {});
std::string format_example1(const Example1Result& r, PredictMethod method);
std::string example1_csv(const Example1Result& r);

}  // namespace xtd
