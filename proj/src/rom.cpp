#include "xtd/rom.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <map>
#include <optional>
#include <set>
#include <sstream>

#include "xtd/decomp.hpp"
#include "xtd/error.hpp"
#include "xtd/parallel.hpp"

namespace xtd {

void RomConfig::validate() const {
  const auto unit = [](double v) { return v > 0.0 && v < 1.0; };
  if (!unit(eps_xtd)) fail(ErrorKind::config, "rom: eps_xtd must lie in (0, 1)");
  if (!unit(fixed_point_tol)) fail(ErrorKind::config, "rom: fixed_point_tol must lie in (0, 1)");
  if (!unit(mode_tol)) fail(ErrorKind::config, "rom: mode_tol must lie in (0, 1)");
  if (fixed_point_max_iters < 1) fail(ErrorKind::config, "rom: fixed_point_max_iters must be >= 1");
  if (max_modes_per_step < 1) fail(ErrorKind::config, "rom: max_modes_per_step must be >= 1");
}

std::vector<std::size_t> footprint_nodes(const StructuredHexMesh& mesh, const std::vector<std::size_t>& elements) {
  std::set<std::size_t> nodes;
  for (auto e : elements) {
    for (auto n : mesh.element_nodes(e)) nodes.insert(n);
  }
  return {nodes.begin(), nodes.end()};
}

std::vector<std::size_t> detect_plastic_elements(const FeSystem& system, const Material& material,
                                                 const StepLoad& load, const std::vector<PointState>& start,
                                                 const Eigen::VectorXd& du) {
  const Mat6& d = system.elastic();
  const double tol = 1e-10 * material.sigma_y;
  std::vector<std::size_t> out;
  for (std::size_t e = 0; e < system.mesh().n_elements(); ++e) {
    for (std::size_t g = 0; g < 8; ++g) {
      const PointState& ps = start[e * 8 + g];
      const Voigt de = mechanical_strain_increment(system, e, g, du, load);
      Eigen::Matrix<double, 6, 1> s = d * Eigen::Map<const Eigen::Matrix<double, 6, 1>>(de.data());
      Voigt trial;
      for (int c = 0; c < 6; ++c) trial[c] = ps.stress[c] + s(c);
      if (yield_function(material, trial, ps.p_eq) > tol) {
        out.push_back(e);
        break;
      }
    }
  }
  return out;
}

LocalEnrichment local_enrichment_solve(const FeSystem& system, const Material& material, const StepLoad& load,
                                       const std::vector<PointState>& start,
                                       const std::vector<std::size_t>& flagged, const Eigen::VectorXd& du0,
                                       double tolerance) {
  const auto& mesh = system.mesh();
  const auto nodes = footprint_nodes(mesh, flagged);
  std::vector<std::size_t> dofs;
  std::set<std::size_t> patch;
  for (auto n : nodes) {
    for (std::size_t c = 0; c < 3; ++c) {
      if (system.free_index(3 * n + c) >= 0) dofs.push_back(3 * n + c);
    }
    for (auto e : mesh.elements_of_node(n)) patch.insert(e);
  }
  const std::vector<std::size_t> elements(patch.begin(), patch.end());

  PatchResult pr = newton_solve_patch(system, material, load, start, elements, dofs, du0, tolerance);
  LocalEnrichment out;
  out.correction = pr.delta_u - du0;
  out.delta_f_pl = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(system.n_dofs()));
  for (auto e : elements) {
    Eigen::Matrix<double, 24, 1> fe = Eigen::Matrix<double, 24, 1>::Zero();
    bool any = false;
    for (std::size_t g = 0; g < 8; ++g) {
      Eigen::Matrix<double, 6, 1> dep;
      for (int c = 0; c < 6; ++c) dep(c) = pr.points[e * 8 + g].eps_p[c] - start[e * 8 + g].eps_p[c];
      if (dep.isZero(0.0)) continue;
      any = true;
      fe += system.b(g).transpose() * (system.elastic() * dep) * system.weight();
    }
    if (!any) continue;
    const auto edofs = mesh.element_dofs(e);
    for (std::size_t i = 0; i < 24; ++i) out.delta_f_pl(static_cast<Eigen::Index>(edofs[i])) += fe(static_cast<Eigen::Index>(i));
  }
  out.points = std::move(pr.points);
  out.report = std::move(pr.report);
  return out;
}

namespace {

struct LoadGroup {
  Eigen::VectorXd lift;   // all DoFs, unit amplitude
  Eigen::VectorXd force;  // free DoFs, unit amplitude
  std::vector<Vector> profile;
  bool has_lift = false;
};

struct Mode {
  Eigen::VectorXd a;   // free DoFs
  Eigen::VectorXd ka;  // K_ff a
  std::vector<Vector> g;
};

double prod_dot(const std::vector<Vector>& x, const std::vector<Vector>& y) {
  double p = 1.0;
  for (std::size_t i = 0; i < x.size(); ++i) p *= dot(x[i], y[i]);
  return p;
}

double sup(const Vector& v) {
  double m = 0.0;
  for (double x : v) m = std::max(m, std::abs(x));
  return m;
}

class StepSolver {
 public:
  StepSolver(const FeSystem& system, const ParameterGrid& grid, std::size_t step,
             const std::vector<FeState>& states, const RomConfig& config)
      : sys_(system), grid_(grid), step_(step), states_(states), cfg_(config) {
    np_ = grid.size();
    nf_ = static_cast<Eigen::Index>(system.n_free());
    mu_shape_ = grid.shape();
    for (std::size_t p = 0; p < np_; ++p) pidx_.push_back(grid.unravel(p));
    build_groups();
    build_points();
  }

  RomStepOutcome run();

 private:
  void build_groups();
  void build_points();
  Vector product_values(const std::vector<Vector>& g) const;
  Eigen::MatrixXd reconstruct() const;
  std::optional<Mode> fit_mode(std::size_t index, std::size_t& iterations);
  Eigen::VectorXd update_a(const std::vector<Vector>& g) const;
  DenseTensor coefficients(const Eigen::VectorXd& a, const Eigen::VectorXd& ka) const;
  void grow_modes(RomStepReport& report);

  const FeSystem& sys_;
  const ParameterGrid& grid_;
  std::size_t step_;
  const std::vector<FeState>& states_;
  const RomConfig& cfg_;
  std::size_t np_ = 0;
  Eigen::Index nf_ = 0;
  Shape mu_shape_;
  std::vector<MultiIndex> pidx_;

  std::vector<LoadGroup> groups_;
  std::vector<Material> materials_;
  std::vector<StepLoad> loads_;
  std::vector<double> tolerances_;
  Eigen::MatrixXd residual_;  // r_n, free DoFs x points
  Eigen::MatrixXd nonsep_;    // r_n + delta F_pl
  std::vector<Mode> modes_;
  std::vector<SparseTensor> extended_;
};

void StepSolver::build_groups() {
  const FeProblem& p = sys_.problem();
  const auto& mesh = p.mesh;
  const auto nd = static_cast<Eigen::Index>(sys_.n_dofs());
  std::map<std::string, std::pair<Eigen::VectorXd, Eigen::VectorXd>> by_axis;  // lift, force (all DoFs)
  const auto slot = [&](const std::string& axis) -> std::pair<Eigen::VectorXd, Eigen::VectorXd>& {
    auto it = by_axis.find(axis);
    if (it == by_axis.end()) {
      it = by_axis.emplace(axis, std::make_pair(Eigen::VectorXd::Zero(nd), Eigen::VectorXd::Zero(nd))).first;
    }
    return it->second;
  };
  for (const auto& bc : p.dirichlet) {
    auto& s = slot(bc.amplitude_axis);
    for (auto n : bc.nodes) s.first(static_cast<Eigen::Index>(3 * n + static_cast<std::size_t>(bc.component))) = bc.increments[step_];
  }
  for (const auto& t : p.tractions) {
    if (t.increments[step_] != 0.0) slot(t.amplitude_axis).second += traction_force(mesh, t.face, t.component, t.increments[step_]);
  }
  if (p.thermal) {
    Eigen::VectorXd dtheta(static_cast<Eigen::Index>(mesh.n_nodes()));
    for (std::size_t n = 0; n < mesh.n_nodes(); ++n) {
      const double prev = step_ ? p.thermal->temperature[step_ - 1][n] : 0.0;
      dtheta(static_cast<Eigen::Index>(n)) = p.thermal->temperature[step_][n] - prev;
    }
    slot(p.thermal->amplitude_axis).second += thermal_force(sys_, p.thermal->alpha, dtheta);
  }
  for (auto& [axis, lf] : by_axis) {
    LoadGroup g;
    g.lift = lf.first;
    g.has_lift = !g.lift.isZero(0.0);
    g.force = sys_.restrict_free(lf.second - sys_.stiffness() * g.lift);
    if (!g.has_lift && g.force.isZero(0.0)) continue;
    for (const auto& ax : grid_.axes()) {
      g.profile.push_back(ax.name == axis ? ax.values : Vector(ax.values.size(), 1.0));
    }
    groups_.push_back(std::move(g));
  }
}

void StepSolver::build_points() {
  materials_.resize(np_);
  loads_.resize(np_);
  tolerances_.resize(np_);
  residual_ = Eigen::MatrixXd::Zero(nf_, static_cast<Eigen::Index>(np_));
  const double floor = force_floor(sys_);
  parallel_for(np_, [&](std::size_t p) {
    const auto mu = grid_.values_at(p);
    materials_[p] = material_at(sys_.problem(), grid_, mu);
    loads_[p] = step_load(sys_, step_, grid_, mu);
    tolerances_[p] = 1e-8 * std::max(equivalent_load_norm(sys_, materials_[p], loads_[p], states_[p]), floor);
    Eigen::VectorXd r = -internal_force(sys_, states_[p].points);
    if (step_ > 0) r += step_load(sys_, step_ - 1, grid_, mu).f_ext;
    residual_.col(static_cast<Eigen::Index>(p)) = sys_.restrict_free(r);
  });
  nonsep_ = residual_;
}

Vector StepSolver::product_values(const std::vector<Vector>& g) const {
  Vector out(np_);
  for (std::size_t p = 0; p < np_; ++p) {
    double v = 1.0;
    for (std::size_t i = 0; i < g.size(); ++i) v *= g[i][pidx_[p][i]];
    out[p] = v;
  }
  return out;
}

Eigen::MatrixXd StepSolver::reconstruct() const {
  const auto nd = static_cast<Eigen::Index>(sys_.n_dofs());
  Eigen::MatrixXd du = Eigen::MatrixXd::Zero(nd, static_cast<Eigen::Index>(np_));
  for (const auto& grp : groups_) {
    if (!grp.has_lift) continue;
    const Vector f = product_values(grp.profile);
    for (std::size_t p = 0; p < np_; ++p) du.col(static_cast<Eigen::Index>(p)) += grp.lift * f[p];
  }
  for (const auto& m : modes_) {
    const Vector gp = product_values(m.g);
    const Eigen::VectorXd a = sys_.expand_free(m.a);
    for (std::size_t p = 0; p < np_; ++p) du.col(static_cast<Eigen::Index>(p)) += a * gp[p];
  }
  for (const auto& x : extended_) {
    for (std::size_t k = 0; k < x.nnz(); ++k) {
      const std::size_t off = x.offsets()[k];
      du(static_cast<Eigen::Index>(off / np_), static_cast<Eigen::Index>(off % np_)) += x.values()[k];
    }
  }
  return du;
}

// A = (K^-1 [sum_j F_j c_j + sum_mu N G] - sum_mu U G - sum_m A_m c_m) / |G|^2
Eigen::VectorXd StepSolver::update_a(const std::vector<Vector>& g) const {
  const Vector gp = product_values(g);
  double gg = 1.0;
  for (const auto& gi : g) gg *= squared_norm(gi);
  Eigen::VectorXd rhs = nonsep_ * Eigen::Map<const Eigen::VectorXd>(gp.data(), static_cast<Eigen::Index>(np_));
  for (const auto& grp : groups_) rhs += grp.force * prod_dot(g, grp.profile);
  Eigen::VectorXd x = sys_.solve(rhs);
  for (const auto& u : extended_) {
    for (std::size_t k = 0; k < u.nnz(); ++k) {
      const std::size_t off = u.offsets()[k];
      const long fi = sys_.free_index(off / np_);
      if (fi >= 0) x(fi) -= u.values()[k] * gp[off % np_];
    }
  }
  for (const auto& m : modes_) x -= m.a * prod_dot(g, m.g);
  return x / gg;
}

// c(mu) = a^T (sum_j F_j f_j(mu) + N(mu) - K U(mu) - K sum_m A_m G_m(mu))
DenseTensor StepSolver::coefficients(const Eigen::VectorXd& a, const Eigen::VectorXd& ka) const {
  DenseTensor c(mu_shape_);
  const Eigen::VectorXd an = nonsep_.transpose() * a;
  for (std::size_t p = 0; p < np_; ++p) c[p] = an(static_cast<Eigen::Index>(p));
  for (const auto& grp : groups_) {
    const double af = a.dot(grp.force);
    const Vector f = product_values(grp.profile);
    for (std::size_t p = 0; p < np_; ++p) c[p] += af * f[p];
  }
  for (const auto& u : extended_) {
    for (std::size_t k = 0; k < u.nnz(); ++k) {
      const std::size_t off = u.offsets()[k];
      const long fi = sys_.free_index(off / np_);
      if (fi >= 0) c[off % np_] -= ka(fi) * u.values()[k];
    }
  }
  for (const auto& m : modes_) {
    const double akm = ka.dot(m.a);
    const Vector gm = product_values(m.g);
    for (std::size_t p = 0; p < np_; ++p) c[p] -= akm * gm[p];
  }
  return c;
}

std::optional<Mode> StepSolver::fit_mode(std::size_t index, std::size_t& iterations) {
  const std::size_t nax = mu_shape_.size();
  for (std::size_t attempt = 0; attempt < 3; ++attempt) {
    const RankOneTerm init = initial_term(mu_shape_, cfg_.seed, step_ * 1000 + index, attempt);
    Mode m;
    m.g = init.factors;
    std::optional<Mode> prev;
    bool degenerate = false;
    for (std::size_t it = 1; it <= cfg_.fixed_point_max_iters; ++it) {
      iterations = it;
      m.a = update_a(m.g);
      m.ka = sys_.stiffness_ff() * m.a;
      const double aka = m.a.dot(m.ka);
      if (!(aka >= 1e-30)) {
        degenerate = true;
        break;
      }
      const DenseTensor c = coefficients(m.a, m.ka);
      std::vector<double> sq(nax);
      for (std::size_t i = 0; i < nax; ++i) sq[i] = squared_norm(m.g[i]);
      for (std::size_t i = 0; i < nax; ++i) {
        double denom = aka;
        for (std::size_t l = 0; l < nax; ++l) {
          if (l != i) denom *= sq[l];
        }
        Vector gi = contract_except(c, m.g, i);
        for (auto& v : gi) v /= denom;
        sq[i] = squared_norm(gi);
        m.g[i] = std::move(gi);
      }
      if (std::any_of(sq.begin(), sq.end(), [](double s) { return !(s > 0.0); })) {
        degenerate = true;
        break;
      }
      if (prev) {
        const double nn = m.a.squaredNorm() * prod_dot(m.g, m.g);
        const double pp = prev->a.squaredNorm() * prod_dot(prev->g, prev->g);
        const double np = m.a.dot(prev->a) * prod_dot(m.g, prev->g);
        const double change = std::sqrt(std::max(nn + pp - 2.0 * np, 0.0) / nn);
        if (change < cfg_.fixed_point_tol) break;
      }
      prev = m;
    }
    if (degenerate) continue;
    // Unit parameter factors; the spatial factor carries the magnitude.
    for (auto& gi : m.g) {
      const double n = std::sqrt(squared_norm(gi));
      for (auto& v : gi) v /= n;
      m.a *= n;
    }
    m.ka = sys_.stiffness_ff() * m.a;
    return m;
  }
  return std::nullopt;
}

void StepSolver::grow_modes(RomStepReport& report) {
  while (modes_.size() < cfg_.max_modes_per_step) {
    const Eigen::MatrixXd du = reconstruct();
    const double du_sup = du.size() ? du.lpNorm<Eigen::Infinity>() : 0.0;
    std::size_t iterations = 0;
    std::optional<Mode> m = fit_mode(modes_.size(), iterations);
    if (!m) break;
    double contribution = m->a.size() ? m->a.lpNorm<Eigen::Infinity>() : 0.0;
    for (const auto& gi : m->g) contribution *= sup(gi);
    if (contribution == 0.0 || (du_sup > 0.0 && contribution <= cfg_.mode_tol * du_sup)) break;
    report.mode_iterations.push_back(iterations);
    modes_.push_back(std::move(*m));
  }
  if (modes_.size() >= cfg_.max_modes_per_step) report.mode_cap_hit = true;
}

RomStepOutcome StepSolver::run() {
  const auto t0 = std::chrono::steady_clock::now();
  RomStepOutcome out;
  RomStepReport& report = out.model.report;
  const auto nd = static_cast<Eigen::Index>(sys_.n_dofs());
  Shape full_shape{sys_.n_dofs()};
  full_shape.insert(full_shape.end(), mu_shape_.begin(), mu_shape_.end());
  std::set<std::pair<std::size_t, std::size_t>> region;
  Eigen::MatrixXd dfpl = Eigen::MatrixXd::Zero(nd, static_cast<Eigen::Index>(np_));

  for (;;) {
    grow_modes(report);
    const Eigen::MatrixXd du0 = reconstruct();
    std::vector<std::vector<std::size_t>> flagged(np_);
    parallel_for(np_, [&](std::size_t p) {
      flagged[p] = detect_plastic_elements(sys_, materials_[p], loads_[p], states_[p].points,
                                           du0.col(static_cast<Eigen::Index>(p)));
    });
    const bool any = std::any_of(flagged.begin(), flagged.end(), [](const auto& f) { return !f.empty(); });
    if (!any) break;
    if (extended_.size() >= cfg_.max_enrichments_per_step) {
      report.converged = false;
      break;
    }
    std::vector<LocalEnrichment> local(np_);
    parallel_for(np_, [&](std::size_t p) {
      if (flagged[p].empty()) return;
      try {
        local[p] = local_enrichment_solve(sys_, materials_[p], loads_[p], states_[p].points, flagged[p],
                                          du0.col(static_cast<Eigen::Index>(p)), tolerances_[p]);
      } catch (const Error& e) {
        throw Error(e.kind(), "local enrichment at grid point " + std::to_string(p) + ": " + e.what());
      }
    });
    std::vector<std::size_t> offsets;
    std::vector<double> values;
    for (std::size_t p = 0; p < np_; ++p) {
      const auto col = static_cast<Eigen::Index>(p);
      if (flagged[p].empty()) {
        nonsep_.col(col) = residual_.col(col);
        dfpl.col(col).setZero();
        continue;
      }
      for (auto e : flagged[p]) region.emplace(e, p);
      nonsep_.col(col) = residual_.col(col) + sys_.restrict_free(local[p].delta_f_pl);
      dfpl.col(col) = local[p].delta_f_pl;
      for (Eigen::Index d = 0; d < nd; ++d) {
        const double v = local[p].correction(d);
        if (v != 0.0) {
          offsets.push_back(static_cast<std::size_t>(d) * np_ + p);
          values.push_back(v);
        }
      }
    }
    SparseTensor u(full_shape, std::move(offsets), std::move(values));
    double u_sup = 0.0;
    for (double v : u.values()) u_sup = std::max(u_sup, std::abs(v));
    extended_.push_back(std::move(u));
    const double du_sup = reconstruct().lpNorm<Eigen::Infinity>();
    report.last_ratio = du_sup > 0.0 ? u_sup / du_sup : 0.0;
    if (report.last_ratio <= cfg_.eps_xtd) break;
  }

  const Eigen::MatrixXd du = reconstruct();
  out.states.resize(np_);
  parallel_for(np_, [&](std::size_t p) {
    const auto col = static_cast<Eigen::Index>(p);
    out.states[p].u = states_[p].u + du.col(col);
    out.states[p].points = update_states(sys_, materials_[p], loads_[p], states_[p].points, du.col(col));
  });

  RomStepModel& model = out.model;
  model.expansion = SeparatedExpansion(full_shape);
  for (const auto& grp : groups_) {
    if (!grp.has_lift) continue;
    RankOneTerm t;
    t.factors.emplace_back(grp.lift.data(), grp.lift.data() + grp.lift.size());
    for (const auto& f : grp.profile) t.factors.push_back(f);
    model.expansion.push_back(std::move(t));
    ++model.load_terms;
  }
  for (const auto& m : modes_) {
    RankOneTerm t;
    const Eigen::VectorXd a = sys_.expand_free(m.a);
    t.factors.emplace_back(a.data(), a.data() + a.size());
    for (const auto& g : m.g) t.factors.push_back(g);
    model.expansion.push_back(std::move(t));
  }
  model.extended = extended_;
  model.region.pairs.assign(region.begin(), region.end());
  std::vector<std::size_t> offsets;
  std::vector<double> values;
  for (Eigen::Index d = 0; d < nd; ++d) {
    for (std::size_t p = 0; p < np_; ++p) {
      const double v = dfpl(d, static_cast<Eigen::Index>(p));
      if (v != 0.0) {
        offsets.push_back(static_cast<std::size_t>(d) * np_ + p);
        values.push_back(v);
      }
    }
  }
  model.delta_f_pl = SparseTensor(full_shape, std::move(offsets), std::move(values));
  report.separated_modes = modes_.size();
  report.extended_modes = extended_.size();
  report.outer_iterations = extended_.size() + 1;
  report.plastic_pairs = region.size();
  report.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  return out;
}

}  // namespace

RomStepOutcome rom_time_step(const FeSystem& system, const ParameterGrid& grid, std::size_t step,
                             const std::vector<FeState>& states, const RomConfig& config) {
  if (states.size() != grid.size()) fail(ErrorKind::numeric, "rom_time_step: one state per grid point required");
  StepSolver solver(system, grid, step, states, config);
  return solver.run();
}

namespace {

void store_snapshots(RomModel& model, const std::vector<FeState>& states, std::size_t n_gauss) {
  Shape s6 = model.grid.shape();
  s6.push_back(n_gauss);
  Shape s1 = s6;
  s6.push_back(6);
  DenseTensor stress(s6), eps(s6), peq(s1);
  for (std::size_t p = 0; p < states.size(); ++p) {
    for (std::size_t q = 0; q < n_gauss; ++q) {
      const PointState& ps = states[p].points[q];
      for (std::size_t c = 0; c < 6; ++c) {
        stress[(p * n_gauss + q) * 6 + c] = ps.stress[c];
        eps[(p * n_gauss + q) * 6 + c] = ps.eps_p[c];
      }
      peq[p * n_gauss + q] = ps.p_eq;
    }
  }
  model.stress.push_back(std::move(stress));
  model.eps_p.push_back(std::move(eps));
  model.p_eq.push_back(std::move(peq));
}

}  // namespace

RomModel rom_train(const FeProblem& problem, const ParameterGrid& grid, const RomConfig& config) {
  config.validate();
  const FeSystem system(problem);
  validate_binding(problem, grid);
  RomModel model;
  model.problem = problem;
  model.grid = grid;
  model.config = config;
  std::vector<FeState> states(grid.size(), FeState::initial(system));
  for (std::size_t s = 0; s < problem.n_steps; ++s) {
    RomStepOutcome outcome;
    try {
      outcome = rom_time_step(system, grid, s, states, config);
    } catch (const Error& e) {
      throw Error(e.kind(), "step " + std::to_string(s) + ": " + e.what());
    }
    states = std::move(outcome.states);
    model.steps.push_back(std::move(outcome.model));
    store_snapshots(model, states, problem.mesh.n_gauss());
  }
  return model;
}

Eigen::VectorXd step_increment_at(const RomStepModel& step, const ParameterGrid& grid, std::size_t point) {
  const std::size_t np = grid.size();
  const MultiIndex idx = grid.unravel(point);
  const std::size_t nd = step.expansion.shape.at(0);
  Eigen::VectorXd du = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(nd));
  for (const auto& t : step.expansion.terms) {
    double w = 1.0;
    for (std::size_t i = 0; i < idx.size(); ++i) w *= t.factors[i + 1][idx[i]];
    du += Eigen::Map<const Eigen::VectorXd>(t.factors[0].data(), static_cast<Eigen::Index>(nd)) * w;
  }
  for (const auto& u : step.extended) {
    for (std::size_t k = 0; k < u.nnz(); ++k) {
      const std::size_t off = u.offsets()[k];
      if (off % np == point) du(static_cast<Eigen::Index>(off / np)) += u.values()[k];
    }
  }
  return du;
}

std::string format_training_report(const RomModel& model) {
  std::ostringstream out;
  out << "grid:";
  for (const auto& a : model.grid.axes()) out << " " << a.name << "[" << a.values.size() << "]";
  out << "\nstep  modes  extended  outer  plastic_pairs  last_ratio  converged\n";
  for (std::size_t s = 0; s < model.steps.size(); ++s) {
    const auto& r = model.steps[s].report;
    out << s << "  " << r.separated_modes << "  " << r.extended_modes << "  " << r.outer_iterations << "  "
        << r.plastic_pairs << "  " << r.last_ratio << "  " << (r.converged ? "yes" : "no")
        << (r.mode_cap_hit ? " (mode cap)" : "") << "\n";
  }
  return out.str();
}

}  // namespace xtd
