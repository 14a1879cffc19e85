#include "xtd/uq_design.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <limits>
#include <numeric>
#include <random>
#include <set>
#include <sstream>

#include "xtd/error.hpp"
#include "xtd/parallel.hpp"

namespace xtd {

namespace {

// Corner signs of the local nodes; Gauss point g sits next to node g.
constexpr int node_sign[8][3] = {{-1, -1, -1}, {1, -1, -1}, {1, 1, -1}, {-1, 1, -1},
                                 {-1, -1, 1},  {1, -1, 1},  {1, 1, 1},  {-1, 1, 1}};

const std::vector<std::string>& known_fields() {
  static const std::vector<std::string> f{"sxx", "syy", "szz", "sxy", "syz", "sxz", "von_mises", "p_eq"};
  return f;
}

std::pair<double, double> axis_range(const ParameterGrid& grid, const std::string& axis) {
  const auto& v = grid.axes()[grid.axis_index(axis)].values;
  return {v.front(), v.back()};
}

double l2_distance(const Curve& a, const Curve& b) {
  double s = 0.0;
  for (std::size_t k = 0; k < a.values.size(); ++k) {
    for (std::size_t i = 0; i < a.values[k].size(); ++i) {
      const double d = a.values[k][i] - b.values[k][i];
      s += d * d;
    }
  }
  return std::sqrt(s);
}

void check_curve(const Curve& c, const LineObservable& obs, const std::size_t n, const std::string& what) {
  if (c.names != obs.fields) fail(ErrorKind::config, what + ": columns do not match the observable fields");
  if (c.s.size() != n) {
    fail(ErrorKind::config, what + ": " + std::to_string(c.s.size()) + " samples, observable has " + std::to_string(n));
  }
}

}  // namespace

void RandomParam::validate(const ParameterGrid& grid) const {
  const auto [lo, hi] = axis_range(grid, axis);
  if (!(std > 0.0) || !std::isfinite(std)) fail(ErrorKind::config, "random parameter '" + axis + "': std must be positive");
  if (!(mean >= lo && mean <= hi)) fail(ErrorKind::config, "random parameter '" + axis + "': mean outside the axis range");
}

void LineObservable::validate(const RomModel& model) const {
  if (samples == 0) fail(ErrorKind::config, "line observable: samples must be positive");
  if (fields.empty()) fail(ErrorKind::config, "line observable: no fields");
  for (const auto& f : fields) {
    if (std::find(known_fields().begin(), known_fields().end(), f) == known_fields().end()) {
      fail(ErrorKind::config, "line observable: unknown field '" + f + "'");
    }
  }
  if (step && *step >= model.steps.size()) fail(ErrorKind::config, "line observable: unknown step " + std::to_string(*step));
}

LineSampling line_sampling(const StructuredHexMesh& mesh, const LineObservable& obs) {
  double len2 = 0.0;
  for (int d = 0; d < 3; ++d) len2 += (obs.b[d] - obs.a[d]) * (obs.b[d] - obs.a[d]);
  const double len = std::sqrt(len2);
  const std::size_t n = len == 0.0 ? 1 : obs.samples;
  const auto h = mesh.spacing();
  const auto ne = mesh.element_counts();
  const double root3 = std::sqrt(3.0);
  LineSampling out;
  for (std::size_t i = 0; i < n; ++i) {
    const double t = n > 1 ? static_cast<double>(i) / static_cast<double>(n - 1) : 0.0;
    std::array<std::size_t, 3> ijk{};
    std::array<double, 3> xi{};
    for (int d = 0; d < 3; ++d) {
      const double x = obs.a[d] + t * (obs.b[d] - obs.a[d]);
      const double tol = 1e-9 * mesh.lengths[d];
      if (x < -tol || x > mesh.lengths[d] + tol) fail(ErrorKind::config, "line observable leaves the mesh");
      const double cell = std::floor(x / h[d]);
      ijk[d] = static_cast<std::size_t>(std::clamp(cell, 0.0, static_cast<double>(ne[d] - 1)));
      xi[d] = 2.0 * (x - static_cast<double>(ijk[d]) * h[d]) / h[d] - 1.0;
    }
    std::array<double, 8> w{};
    for (std::size_t g = 0; g < 8; ++g) {
      w[g] = 1.0;
      for (int d = 0; d < 3; ++d) w[g] *= 0.5 * (1.0 + node_sign[g][d] * root3 * xi[d]);
    }
    out.s.push_back(t * len);
    out.element.push_back(mesh.element(ijk[0], ijk[1], ijk[2]));
    out.weights.push_back(w);
  }
  return out;
}

double sample_point_field(const PointState& ps, const std::string& field) {
  const auto& f = known_fields();
  const auto it = std::find(f.begin(), f.end(), field);
  if (it == f.end()) fail(ErrorKind::config, "unknown field '" + field + "'");
  const auto k = static_cast<std::size_t>(it - f.begin());
  if (k < 6) return ps.stress[k];
  return k == 6 ? von_mises(ps.stress) : ps.p_eq;
}

Curve extract_line_observable(const RomPredictor& predictor, const std::vector<double>& mu, const LineObservable& obs) {
  obs.validate(predictor.model());
  const LineSampling ls = line_sampling(predictor.model().problem.mesh, obs);
  const std::set<std::size_t> unique(ls.element.begin(), ls.element.end());
  const std::vector<std::size_t> elements(unique.begin(), unique.end());
  const std::size_t step = obs.step.value_or(predictor.n_steps() - 1);
  const auto pts = predictor.states(mu, step, obs.method, &elements);
  Curve c;
  c.s = ls.s;
  c.names = obs.fields;
  c.values.assign(obs.fields.size(), std::vector<double>(ls.s.size(), 0.0));
  for (std::size_t i = 0; i < ls.s.size(); ++i) {
    for (std::size_t g = 0; g < 8; ++g) {
      const PointState& ps = pts[ls.element[i] * gauss_per_element + g];
      for (std::size_t k = 0; k < obs.fields.size(); ++k) {
        c.values[k][i] += ls.weights[i][g] * sample_point_field(ps, obs.fields[k]);
      }
    }
  }
  return c;
}

std::vector<std::vector<double>> standard_normal_draws(std::size_t n_samples, std::size_t n_params, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> z(0.0, 1.0);
  std::vector<std::vector<double>> out(n_samples, std::vector<double>(n_params));
  for (auto& row : out) {
    for (auto& v : row) v = z(rng);
  }
  return out;
}

McResult mc_propagate(const RomPredictor& predictor, const McConfig& config, const LineObservable& obs) {
  const ParameterGrid& grid = predictor.model().grid;
  if (config.n_samples == 0) fail(ErrorKind::config, "mc: zero samples");
  obs.validate(predictor.model());
  std::vector<long> param_of_axis(grid.order(), -1);
  for (std::size_t j = 0; j < config.params.size(); ++j) {
    config.params[j].validate(grid);
    const std::size_t a = grid.axis_index(config.params[j].axis);
    if (param_of_axis[a] >= 0) fail(ErrorKind::config, "mc: axis '" + config.params[j].axis + "' drawn twice");
    param_of_axis[a] = static_cast<long>(j);
  }
  std::vector<double> base(grid.order(), 0.0);
  for (std::size_t a = 0; a < grid.order(); ++a) {
    const std::string& name = grid.axes()[a].name;
    auto it = config.fixed.find(name);
    if (param_of_axis[a] >= 0) {
      if (it != config.fixed.end()) fail(ErrorKind::config, "mc: axis '" + name + "' is both random and fixed");
      continue;
    }
    if (it == config.fixed.end()) fail(ErrorKind::config, "mc: axis '" + name + "' needs a random model or a fixed value");
    base[a] = it->second;
  }
  for (const auto& [name, v] : config.fixed) grid.axis_index(name);

  McResult out;
  const auto z = standard_normal_draws(config.n_samples, config.params.size(), config.seed);
  out.samples.assign(config.n_samples, base);
  for (std::size_t i = 0; i < config.n_samples; ++i) {
    for (std::size_t j = 0; j < config.params.size(); ++j) {
      const RandomParam& p = config.params[j];
      const auto [lo, hi] = axis_range(grid, p.axis);
      double x = p.mean + p.std * z[i][j];
      if (x < lo || x > hi) {
        ++out.clamped;
        x = std::clamp(x, lo, hi);
      }
      out.samples[i][grid.axis_index(p.axis)] = x;
    }
  }
  out.clamp_fraction = static_cast<double>(out.clamped) / static_cast<double>(config.n_samples);

  std::vector<Curve> curves(config.n_samples);
  const auto t0 = std::chrono::steady_clock::now();
  parallel_for(config.n_samples, [&](std::size_t i) { curves[i] = extract_line_observable(predictor, out.samples[i], obs); });
  out.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();

  const double n = static_cast<double>(config.n_samples);
  out.mean = curves[0];
  out.std = curves[0];
  for (std::size_t k = 0; k < obs.fields.size(); ++k) {
    for (std::size_t s = 0; s < out.mean.s.size(); ++s) {
      double sum = 0.0;
      for (const auto& c : curves) sum += c.values[k][s];
      const double mean = sum / n;
      double ss = 0.0;
      for (const auto& c : curves) ss += (c.values[k][s] - mean) * (c.values[k][s] - mean);
      out.mean.values[k][s] = mean;
      out.std.values[k][s] = config.n_samples > 1 ? std::sqrt(ss / (n - 1.0)) : 0.0;
    }
  }
  return out;
}

NelderMeadResult nelder_mead(const std::function<double(const std::vector<double>&)>& f, std::vector<double> x0,
                             const NelderMeadOptions& opt) {
  const std::size_t n = x0.size();
  if (n == 0) fail(ErrorKind::config, "nelder_mead: empty start point");
  if (opt.budget < n + 1) fail(ErrorKind::config, "nelder_mead: budget below n + 1 evaluations");
  NelderMeadResult res;
  double best = std::numeric_limits<double>::infinity();
  auto eval = [&](const std::vector<double>& x) {
    const double v = f(x);
    ++res.evaluations;
    if (v < best) {
      best = v;
      res.x = x;
      res.value = v;
    }
    res.trace.push_back(best);
    return v;
  };

  std::vector<std::vector<double>> simplex(n + 1, x0);
  std::vector<double> fv(n + 1);
  for (std::size_t i = 0; i < n; ++i) simplex[i + 1][i] += opt.initial_step * std::max(std::abs(x0[i]), 1.0);
  for (std::size_t i = 0; i <= n; ++i) fv[i] = eval(simplex[i]);

  std::vector<std::size_t> order(n + 1);
  auto point = [&](const std::vector<double>& c, const std::vector<double>& worst, double t) {
    std::vector<double> x(n);
    for (std::size_t k = 0; k < n; ++k) x[k] = c[k] + t * (worst[k] - c[k]);
    return x;
  };
  for (;;) {
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return fv[a] < fv[b]; });
    const std::size_t lo = order.front(), hi = order.back(), next = order[n - 1];
    double diameter = 0.0;
    for (std::size_t i = 0; i <= n; ++i) {
      for (std::size_t k = 0; k < n; ++k) diameter = std::max(diameter, std::abs(simplex[i][k] - simplex[lo][k]));
    }
    if (fv[hi] - fv[lo] <= opt.ftol * std::abs(fv[lo]) || diameter <= opt.xtol) {
      res.converged = true;
      break;
    }
    if (res.evaluations + 2 > opt.budget) {
      res.budget_exhausted = true;
      break;
    }
    std::vector<double> c(n, 0.0);
    for (std::size_t i = 0; i <= n; ++i) {
      if (i == hi) continue;
      for (std::size_t k = 0; k < n; ++k) c[k] += simplex[i][k] / static_cast<double>(n);
    }
    const auto xr = point(c, simplex[hi], -1.0);
    const double fr = eval(xr);
    if (fr < fv[lo]) {
      const auto xe = point(c, simplex[hi], -2.0);
      const double fe = eval(xe);
      if (fe < fr) {
        simplex[hi] = xe;
        fv[hi] = fe;
      } else {
        simplex[hi] = xr;
        fv[hi] = fr;
      }
      continue;
    }
    if (fr < fv[next]) {
      simplex[hi] = xr;
      fv[hi] = fr;
      continue;
    }
    const bool outside = fr < fv[hi];
    const auto xc = point(c, simplex[hi], outside ? -0.5 : 0.5);
    const double fc = eval(xc);
    if (fc < (outside ? fr : fv[hi])) {
      simplex[hi] = xc;
      fv[hi] = fc;
      continue;
    }
    if (res.evaluations + n > opt.budget) {
      res.budget_exhausted = true;
      break;
    }
    for (std::size_t i = 0; i <= n; ++i) {
      if (i == lo) continue;
      for (std::size_t k = 0; k < n; ++k) simplex[i][k] = simplex[lo][k] + 0.5 * (simplex[i][k] - simplex[lo][k]);
      fv[i] = eval(simplex[i]);
    }
  }
  return res;
}

void CalibrationProblem::validate(const RomModel& model) const {
  observable.validate(model);
  if (!(w1 >= 0.0 && w2 >= 0.0) || (w1 == 0.0 && w2 == 0.0)) {
    fail(ErrorKind::config, "calibration: weights must be non-negative and not both zero");
  }
  if (axes.empty()) fail(ErrorKind::config, "calibration: no random axes");
  if (initial.size() != 2 * axes.size()) fail(ErrorKind::config, "calibration: initial needs (mean, std) per axis");
  if (n_samples == 0) fail(ErrorKind::config, "calibration: zero samples");
  for (const auto& a : axes) model.grid.axis_index(a);
  const std::size_t n = line_sampling(model.problem.mesh, observable).s.size();
  check_curve(target_mean, observable, n, "calibration target mean");
  check_curve(target_std, observable, n, "calibration target std");
}

namespace {

McConfig calibration_mc(const RomPredictor& predictor, const CalibrationProblem& pb, const std::vector<double>& hyper) {
  McConfig mc;
  mc.fixed = pb.fixed;
  mc.n_samples = pb.n_samples;
  mc.seed = pb.seed;
  for (std::size_t j = 0; j < pb.axes.size(); ++j) {
    const auto [lo, hi] = axis_range(predictor.model().grid, pb.axes[j]);
    RandomParam p;
    p.axis = pb.axes[j];
    p.mean = std::clamp(hyper[2 * j], lo, hi);
    p.std = std::max(std::abs(hyper[2 * j + 1]), 1e-12 * (hi - lo));
    mc.params.push_back(p);
  }
  return mc;
}

}  // namespace

double calibration_objective(const RomPredictor& predictor, const CalibrationProblem& pb, const std::vector<double>& hyper) {
  const McResult r = mc_propagate(predictor, calibration_mc(predictor, pb, hyper), pb.observable);
  double j = 0.0;
  if (pb.w1 != 0.0) j += pb.w1 * l2_distance(r.mean, pb.target_mean);
  if (pb.w2 != 0.0) j += pb.w2 * l2_distance(r.std, pb.target_std);
  return j;
}

CalibrationResult calibrate(const RomPredictor& predictor, const CalibrationProblem& pb) {
  pb.validate(predictor.model());
  // Search in units of the initial guess so every coordinate is O(1).
  std::vector<double> scale(pb.initial.size());
  for (std::size_t k = 0; k < scale.size(); ++k) scale[k] = pb.initial[k] != 0.0 ? std::abs(pb.initial[k]) : 1.0;
  auto unscale = [&](const std::vector<double>& x) {
    std::vector<double> h(x.size());
    for (std::size_t k = 0; k < x.size(); ++k) h[k] = x[k] * scale[k];
    return h;
  };
  std::vector<double> x0(pb.initial.size());
  for (std::size_t k = 0; k < x0.size(); ++k) x0[k] = pb.initial[k] / scale[k];
  const auto nm = nelder_mead([&](const std::vector<double>& x) { return calibration_objective(predictor, pb, unscale(x)); },
                              x0, pb.optimizer);
  CalibrationResult out;
  const McConfig mc = calibration_mc(predictor, pb, unscale(nm.x));
  for (const auto& p : mc.params) {
    out.hyper.push_back(p.mean);
    out.hyper.push_back(p.std);
  }
  out.objective = nm.value;
  out.trace = nm.trace;
  out.evaluations = nm.evaluations;
  out.budget_exhausted = nm.budget_exhausted;
  return out;
}

std::string format_calibration_report(const CalibrationProblem& pb, const CalibrationResult& r) {
  std::ostringstream out;
  out.precision(6);
  out << "calibration: " << r.evaluations << " objective evaluations"
      << (r.budget_exhausted ? " (budget exhausted, best so far)" : "") << "\n";
  out << "objective J = " << r.objective << " (w1 = " << pb.w1 << ", w2 = " << pb.w2 << ")\n";
  for (std::size_t j = 0; j < pb.axes.size(); ++j) {
    out << pb.axes[j] << ": mean " << r.hyper[2 * j] << ", std " << r.hyper[2 * j + 1] << "\n";
  }
  return out.str();
}

DesignResult design_optimize(const ParameterGrid& grid, const DesignProblem& pb) {
  if (!pb.objective) fail(ErrorKind::config, "design: no objective");
  const std::size_t n = grid.order();
  std::vector<double> lo(n), hi(n);
  for (std::size_t i = 0; i < n; ++i) {
    lo[i] = grid.axes()[i].values.front();
    hi[i] = grid.axes()[i].values.back();
  }
  auto to_mu = [&](const std::vector<double>& u) {
    std::vector<double> mu(n);
    for (std::size_t i = 0; i < n; ++i) mu[i] = lo[i] + std::clamp(u[i], 0.0, 1.0) * (hi[i] - lo[i]);
    return mu;
  };
  auto violation = [&](const std::vector<double>& mu) {
    double v = 0.0;
    for (const auto& c : pb.equality) v += c(mu) * c(mu);
    for (const auto& c : pb.inequality) v += std::pow(std::max(0.0, c(mu)), 2);
    return v;
  };

  DesignResult best;
  bool have = false;
  auto better = [&](double obj, double vio) {
    if (!have) return true;
    const bool feas = vio <= pb.feasibility_tol;
    if (feas != best.feasible) return feas;
    return feas ? obj < best.objective : vio < best.violation;
  };
  std::size_t evals = 0;
  auto penalised = [&](const std::vector<double>& u) {
    const auto mu = to_mu(u);
    const double obj = pb.objective(mu);
    const double vio = violation(mu);
    ++evals;
    if (better(obj, vio)) {
      best.mu = mu;
      best.objective = obj;
      best.violation = vio;
      best.feasible = vio <= pb.feasibility_tol;
      have = true;
    }
    double box = 0.0;
    for (double x : u) box += std::pow(std::max(0.0, -x), 2) + std::pow(std::max(0.0, x - 1.0), 2);
    return obj + pb.penalty * (vio + box);
  };

  std::vector<double> start(n, 0.5);
  const std::size_t rounds = pb.restarts + 1;
  for (std::size_t r = 0; r < rounds; ++r) {
    NelderMeadOptions opt;
    opt.budget = std::max(pb.budget / rounds, n + 1);
    opt.initial_step = r == 0 ? 0.25 : 0.1;
    const auto nm = nelder_mead(penalised, start, opt);
    start = nm.x;
    for (auto& x : start) x = std::clamp(x, 0.0, 1.0);
  }
  best.evaluations = evals;
  return best;
}

}  // namespace xtd
