#include "xtd/benchmarks.hpp"

#include <chrono>
#include <cmath>
#include <memory>
#include <random>
#include <sstream>

#include "xtd/error.hpp"

namespace xtd {

namespace {

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

std::vector<double> von_mises_of(const std::vector<PointState>& pts) {
  std::vector<double> v(pts.size());
  for (std::size_t i = 0; i < pts.size(); ++i) v[i] = von_mises(pts[i].stress);
  return v;
}

std::vector<double> p_eq_of(const std::vector<PointState>& pts) {
  std::vector<double> v(pts.size());
  for (std::size_t i = 0; i < pts.size(); ++i) v[i] = pts[i].p_eq;
  return v;
}

}  // namespace

DenseTensor four_bump_data() {
  constexpr double a[4] = {50, 35, 25, 55};
  constexpr double b[4] = {37, 50, 30, 66};
  DenseTensor u({100, 100});
  for (std::size_t i = 0; i < 100; ++i) {
    for (std::size_t j = 0; j < 100; ++j) {
      const double m1 = static_cast<double>(i + 1), m2 = static_cast<double>(j + 1);
      double s = 0.0;
      for (int k = 0; k < 4; ++k) s += 100.0 * std::exp(-std::hypot(m1 - a[k], m2 - b[k]) / 10.0);
      u[i * 100 + j] = s;
    }
  }
  return u;
}

ParameterGrid four_bump_grid() {
  return ParameterGrid({{"mu1", "", ParameterGrid::linspace(1, 100, 100)}, {"mu2", "", ParameterGrid::linspace(1, 100, 100)}});
}

AppendixAResult run_appendix_a(std::uint64_t seed) {
  const DenseTensor data = four_bump_data();
  FitConfig cfg;
  cfg.eps_m_initial = 0.1;
  cfg.eps_xtd = 0.01;
  cfg.enrich_count = 30;
  cfg.seed = seed;
  AppendixAResult r;
  const auto t0 = std::chrono::steady_clock::now();
  r.cp = cp_fit(data, cfg);
  r.xtd = xtd_fit(data, cfg);
  r.seconds = seconds_since(t0);
  r.cp_modes = r.cp.separated_modes();
  r.cp_error = r.cp.report.final_error;
  r.enrichment_sparsity = r.xtd.report.enrichment_sparsity.empty() ? 1.0 : r.xtd.report.enrichment_sparsity.front();
  return r;
}

std::string format_appendix_a(const AppendixAResult& r) {
  std::ostringstream out;
  out << "four-bump function, 100 x 100 grid, target sup relative error 1%\n";
  char line[200];
  std::snprintf(line, sizeof line, "%-6s %10s %10s %12s %12s\n", "method", "separated", "extended", "sup_error", "sparsity");
  out << line;
  std::snprintf(line, sizeof line, "%-6s %10zu %10d %11.4f%% %12s\n", "CP", r.cp_modes, 0, 100 * r.cp_error, "-");
  out << line;
  std::snprintf(line, sizeof line, "%-6s %10zu %10zu %11.4f%% %11.2f%%\n", "XTD", r.xtd.separated_modes(),
                r.xtd.extended_modes(), 100 * r.xtd.report.final_error, 100 * r.enrichment_sparsity);
  out << line;
  out << "l = " << r.xtd.report.enrich_count << ", first enrichment after " << r.xtd.report.first_enrichment_after
      << " separated modes";
  if (!r.xtd.report.mode_iterations.empty()) out << ", first mode fixed-point iterations " << r.xtd.report.mode_iterations[0];
  out << "\n";
  std::snprintf(line, sizeof line, "time %.3f s\n", r.seconds);
  out << line;
  return out.str();
}

std::string appendix_a_csv(const AppendixAResult& r) {
  std::ostringstream out;
  out.precision(10);
  out << "method,separated,extended,sup_error,sparsity\n";
  out << "CP," << r.cp_modes << ",0," << r.cp_error << ",\n";
  out << "XTD," << r.xtd.separated_modes() << "," << r.xtd.extended_modes() << "," << r.xtd.report.final_error << ","
      << r.enrichment_sparsity << "\n";
  return out.str();
}

FeProblem example1_problem() {
  FeProblem p;
  p.mesh.nodes = {7, 7, 4};
  p.mesh.lengths = {6.0, 6.0, 2.5};
  p.n_steps = 6;
  p.material.youngs_modulus = 210e9;
  p.material.poisson = 0.3;
  p.material.sigma_y = 600e6;
  p.material.hardening_modulus = 42e9;
  for (int c = 0; c < 3; ++c) {
    DirichletBC base;
    base.name = "base." + std::to_string(c);
    base.nodes = p.mesh.face_nodes("z-");
    base.component = c;
    base.increments.assign(6, 0.0);
    p.dirichlet.push_back(std::move(base));
  }
  DirichletBC load;
  load.name = "load";
  load.nodes = {p.mesh.node(3, 3, 3)};
  load.component = 2;
  load.increments = {0.03, 0.03, -0.03, -0.03, -0.03, 0.03};
  p.dirichlet.push_back(std::move(load));
  return p;
}

ParameterGrid example1_grid(double yield_scale) {
  return ParameterGrid({{"sigma_y", "Pa", ParameterGrid::linspace(300e6 * yield_scale, 900e6 * yield_scale, 5)},
                        {"H", "Pa", ParameterGrid::linspace(21e9, 63e9, 3)}});
}

double relative_l2(const std::vector<double>& approx, const std::vector<double>& reference) {
  if (approx.size() != reference.size()) fail(ErrorKind::numeric, "relative_l2: size mismatch");
  double num = 0.0, den = 0.0;
  for (std::size_t i = 0; i < approx.size(); ++i) {
    num += (approx[i] - reference[i]) * (approx[i] - reference[i]);
    den += reference[i] * reference[i];
  }
  if (den == 0.0) return num == 0.0 ? 0.0 : std::sqrt(num);
  return std::sqrt(num / den);
}

Example1Result run_example1_mini(const Example1Options& opt) {
  const FeProblem problem = example1_problem();
  const ParameterGrid grid = example1_grid(opt.yield_scale);
  const FeSystem system(problem);
  Example1Result r;

  auto t0 = std::chrono::steady_clock::now();
  const SweepOutput sweep = fe_parametric_sweep(system, grid);
  r.sweep_seconds = seconds_since(t0);

  t0 = std::chrono::steady_clock::now();
  auto model = std::make_shared<RomModel>(rom_train(problem, grid, opt.rom));
  r.train_seconds = seconds_since(t0);
  for (const auto& s : model->steps) {
    r.max_extended_modes = std::max(r.max_extended_modes, s.extended.size());
    r.total_extended_modes += s.extended.size();
  }
  const RomPredictor predictor(model);
  const std::size_t last = problem.n_steps - 1;

  double u_err = 0.0, u_ref = 0.0;
  for (std::size_t q = 0; q < grid.size(); ++q) {
    const auto mu = grid.values_at(q);
    for (std::size_t s = 0; s < problem.n_steps; ++s) {
      const Eigen::VectorXd u = predictor.displacement(mu, s);
      u_err = std::max(u_err, (u - sweep.points[q].u[s]).lpNorm<Eigen::Infinity>());
      u_ref = std::max(u_ref, sweep.points[q].u[s].lpNorm<Eigen::Infinity>());
      const auto pts = predictor.states(mu, s, PredictMethod::snapshot);
      const auto ref = von_mises_of(sweep.points[q].points[s]);
      double den = 0.0;
      for (double v : ref) den = std::max(den, std::abs(v));
      // Skip steps where the reference is numerically stress free.
      if (den > 1e-6 * problem.material.sigma_y) {
        r.grid_von_mises_error = std::max(r.grid_von_mises_error, relative_l2(von_mises_of(pts), ref));
      }
    }
  }
  r.grid_displacement_error = u_ref > 0.0 ? u_err / u_ref : u_err;

  std::mt19937_64 rng(opt.seed);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  const auto& ax = grid.axes();
  for (std::size_t d = 0; d < opt.draws; ++d) {
    Example1Draw draw;
    for (const auto& a : ax) draw.mu.push_back(a.values.front() + unit(rng) * (a.values.back() - a.values.front()));
    const FeTrajectory fe = fe_solve(system, grid, draw.mu);
    t0 = std::chrono::steady_clock::now();
    const auto rep = predictor.states(draw.mu, last, opt.method);
    const auto snap = predictor.states(draw.mu, last, PredictMethod::snapshot);
    r.eval_seconds += seconds_since(t0);
    const auto& ref = fe.points[last];
    draw.von_mises_error = relative_l2(von_mises_of(rep), von_mises_of(ref));
    draw.p_eq_error = relative_l2(p_eq_of(rep), p_eq_of(ref));
    draw.snapshot_von_mises_error = relative_l2(von_mises_of(snap), von_mises_of(ref));
    draw.snapshot_p_eq_error = relative_l2(p_eq_of(snap), p_eq_of(ref));
    double ue = 0.0, ur = 0.0;
    for (std::size_t s = 0; s < problem.n_steps; ++s) {
      ue = std::max(ue, (predictor.displacement(draw.mu, s) - fe.u[s]).lpNorm<Eigen::Infinity>());
      ur = std::max(ur, fe.u[s].lpNorm<Eigen::Infinity>());
    }
    draw.displacement_error = ur > 0.0 ? ue / ur : ue;
    r.draws.push_back(draw);
  }
  const double n = static_cast<double>(std::max<std::size_t>(r.draws.size(), 1));
  for (const auto& d : r.draws) {
    r.mean_von_mises_error += d.von_mises_error / n;
    r.mean_p_eq_error += d.p_eq_error / n;
    r.mean_snapshot_von_mises_error += d.snapshot_von_mises_error / n;
    r.mean_snapshot_p_eq_error += d.snapshot_p_eq_error / n;
  }
  r.model = *model;
  return r;
}

std::string format_example1(const Example1Result& r, PredictMethod method) {
  std::ostringstream out;
  char line[240];
  out << "miniature cyclic block: 7 x 7 x 4 nodes, 6 steps, grid sigma_y x H = "
      << r.model.grid.shape()[0] << " x " << r.model.grid.shape()[1] << "\n";
  out << format_training_report(r.model);
  std::snprintf(line, sizeof line, "grid points: displacement rel. error %.3e, worst von Mises rel. L2 %.3e\n",
                r.grid_displacement_error, r.grid_von_mises_error);
  out << line;
  const char* m = method == PredictMethod::replay ? "replay" : "snapshot";
  std::snprintf(line, sizeof line, "%4s %12s %12s %12s %12s %12s %12s\n", "draw", "sigma_y_MPa", "H_GPa", "vm_err",
                "peq_err", "vm_snapshot", "peq_snapshot");
  out << "held-out draws (final step, relative L2 over Gauss points, method " << m << ")\n" << line;
  for (std::size_t i = 0; i < r.draws.size(); ++i) {
    const auto& d = r.draws[i];
    std::snprintf(line, sizeof line, "%4zu %12.2f %12.3f %12.3e %12.3e %12.3e %12.3e\n", i, d.mu[0] / 1e6, d.mu[1] / 1e9,
                  d.von_mises_error, d.p_eq_error, d.snapshot_von_mises_error, d.snapshot_p_eq_error);
    out << line;
  }
  std::snprintf(line, sizeof line, "mean %25s %12.3e %12.3e %12.3e %12.3e\n", "", r.mean_von_mises_error,
                r.mean_p_eq_error, r.mean_snapshot_von_mises_error, r.mean_snapshot_p_eq_error);
  out << line;
  std::snprintf(line, sizeof line, "time: sweep %.2f s, train %.2f s, evaluation %.4f s\n", r.sweep_seconds,
                r.train_seconds, r.eval_seconds);
  out << line;
  return out.str();
}

std::string example1_csv(const Example1Result& r) {
  std::ostringstream out;
  out.precision(10);
  out << "draw,sigma_y,H,von_mises_error,p_eq_error,snapshot_von_mises_error,snapshot_p_eq_error,displacement_error\n";
  for (std::size_t i = 0; i < r.draws.size(); ++i) {
    const auto& d = r.draws[i];
    out << i << "," << d.mu[0] << "," << d.mu[1] << "," << d.von_mises_error << "," << d.p_eq_error << ","
        << d.snapshot_von_mises_error << "," << d.snapshot_p_eq_error << "," << d.displacement_error << "\n";
  }
  return out.str();
}

}  // namespace xtd
