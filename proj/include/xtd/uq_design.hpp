#pragma once

// Monte Carlo propagation, stochastic calibration and penalised design search
// on top of a trained ROM.

#include <array>
#include <cstdint>
#include <functional>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "xtd/container.hpp"
#include "xtd/predict.hpp"

namespace xtd {

struct RandomParam {
  std::string axis;
  double mean = 0.0;  // SI units of the axis
  double std = 0.0;

  void validate(const ParameterGrid& grid) const;
};

// Equally spaced samples on segment A-B at one step. Field names: sxx, syy,
// szz, sxy, syz, sxz, von_mises, p_eq.
struct LineObservable {
  std::array<double, 3> a{};
  std::array<double, 3> b{};
  std::size_t samples = 25;
  std::vector<std::string> fields{"sxx", "syy"};
  std::optional<std::size_t> step;  // default: last step
  PredictMethod method = PredictMethod::replay;

  void validate(const RomModel& model) const;
};

// Element-local sampling: the element holding each point, and the Gauss
// values extrapolated with the trilinear shape functions.
struct LineSampling {
  std::vector<double> s;
  std::vector<std::size_t> element;
  std::vector<std::array<double, 8>> weights;  // per Gauss point of `element`
};
LineSampling line_sampling(const StructuredHexMesh& mesh, const LineObservable& obs);
double sample_point_field(const PointState& ps, const std::string& field);

Curve extract_line_observable(const RomPredictor& predictor, const std::vector<double>& mu, const LineObservable& obs);

struct McConfig {
  std::vector<RandomParam> params;
  std::map<std::string, double> fixed;  // axes that are not random
  std::size_t n_samples = 63;
  std::uint64_t seed = 1;
};

struct McResult {
  Curve mean;
  Curve std;
  std::vector<std::vector<double>> samples;  // drawn parameter vectors, axis order
  std::size_t clamped = 0;                   // out-of-range draws
  double clamp_fraction = 0.0;               // clamped / n_samples
  double seconds = 0.0;                      // evaluation time only
};

// Standard normal draws, n_samples x n_params, in draw order.
std::vector<std::vector<double>> standard_normal_draws(std::size_t n_samples, std::size_t n_params, std::uint64_t seed);

McResult mc_propagate(const RomPredictor& predictor, const McConfig& config, const LineObservable& obs);

struct NelderMeadOptions {
  std::size_t budget = 500;  // objective evaluations
  double initial_step = 0.1;
  double ftol = 1e-10;
  double xtol = 1e-8;
};

struct NelderMeadResult {
  std::vector<double> x;
  double value = 0.0;
  std::size_t evaluations = 0;
  std::vector<double> trace;  // best-so-far after each evaluation
  bool converged = false;
  bool budget_exhausted = false;
};

NelderMeadResult nelder_mead(const std::function<double(const std::vector<double>&)>& f, std::vector<double> x0,
                             const NelderMeadOptions& options = {});

struct CalibrationProblem {
  LineObservable observable;
  Curve target_mean;
  Curve target_std;
  double w1 = 1.0;
  double w2 = 1.0;
  std::vector<std::string> axes;      // random axes, hyper-parameters are (mean, std) per axis
  std::vector<double> initial;        // (mean_1, std_1, mean_2, std_2, ...)
  std::map<std::string, double> fixed;
  std::size_t n_samples = 63;
  std::uint64_t seed = 1;
  NelderMeadOptions optimizer;

  void validate(const RomModel& model) const;
};

struct CalibrationResult {
  std::vector<double> hyper;  // (mean, std) per axis
  double objective = 0.0;
  std::vector<double> trace;
  std::size_t evaluations = 0;
  bool budget_exhausted = false;
};

// J = w1 |mean - target_mean| + w2 |std - target_std| over all samples and fields.
double calibration_objective(const RomPredictor& predictor, const CalibrationProblem& problem,
                             const std::vector<double>& hyper);
CalibrationResult calibrate(const RomPredictor& predictor, const CalibrationProblem& problem);
std::string format_calibration_report(const CalibrationProblem& problem, const CalibrationResult& result);

struct DesignProblem {
  std::function<double(const std::vector<double>&)> objective;
  std::vector<std::function<double(const std::vector<double>&)>> equality;    // c(mu) = 0
  std::vector<std::function<double(const std::vector<double>&)>> inequality;  // c(mu) <= 0
  double penalty = 1e6;
  double feasibility_tol = 1e-6;
  std::size_t budget = 400;
  std::size_t restarts = 2;
};

struct DesignResult {
  std::vector<double> mu;
  double objective = 0.0;
  double violation = 0.0;
  bool feasible = false;
  std::size_t evaluations = 0;
};

// Searches the grid's parameter box; the objective is called with SI values.
DesignResult design_optimize(const ParameterGrid& grid, const DesignProblem& problem);

}  // namespace xtd
