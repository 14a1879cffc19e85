#include <algorithm>
#include <cmath>
#include <sstream>

#include "xtd/error.hpp"
#include "xtd/fem.hpp"
#include "xtd/parallel.hpp"

namespace xtd {

namespace {

using Vec6 = Eigen::Matrix<double, 6, 1>;
using Vec24 = Eigen::Matrix<double, 24, 1>;

Vec6 as_vec(const Voigt& v) { return Eigen::Map<const Vec6>(v.data()); }

std::string history(const std::vector<double>& r) {
  std::ostringstream out;
  out.precision(3);
  for (std::size_t i = 0; i < r.size(); ++i) out << (i ? ", " : "") << std::scientific << r[i];
  return out.str();
}

PatchResult newton_core(const FeSystem& system, const Material& material, const StepLoad& load,
                        const std::vector<PointState>& start, const std::vector<std::size_t>& elements,
                        const std::vector<std::size_t>& dofs, Eigen::VectorXd du, double tolerance,
                        bool global) {
  const auto& mesh = system.mesh();
  std::vector<long> local(system.n_dofs(), -1);
  for (std::size_t i = 0; i < dofs.size(); ++i) local[dofs[i]] = static_cast<long>(i);
  const auto n = static_cast<Eigen::Index>(dofs.size());

  PatchResult out;
  out.points = start;
  out.report.tolerance = tolerance;
  std::vector<Mat6> tangent(elements.size() * 8);
  std::vector<bool> plastic(elements.size() * 8, false);

  for (std::size_t it = 0;; ++it) {
    std::size_t n_plastic = 0;
    Eigen::VectorXd r = Eigen::VectorXd::Zero(n);
    for (std::size_t j = 0; j < dofs.size(); ++j) r(static_cast<Eigen::Index>(j)) = load.f_ext(static_cast<Eigen::Index>(dofs[j]));
    for (std::size_t le = 0; le < elements.size(); ++le) {
      const std::size_t e = elements[le];
      Vec24 fe = Vec24::Zero();
      for (std::size_t g = 0; g < 8; ++g) {
        const std::size_t idx = e * 8 + g;
        const auto rm = return_mapping(material, mechanical_strain_increment(system, e, g, du, load), start[idx]);
        PointState& ps = out.points[idx];
        ps.stress = rm.stress;
        for (int c = 0; c < 6; ++c) ps.eps_p[c] = start[idx].eps_p[c] + rm.delta_eps_p[c];
        ps.p_eq = rm.p_eq;
        tangent[le * 8 + g] = rm.tangent;
        plastic[le * 8 + g] = rm.plastic;
        n_plastic += rm.plastic ? 1 : 0;
        fe += system.b(g).transpose() * as_vec(rm.stress) * system.weight();
      }
      const auto edofs = mesh.element_dofs(e);
      for (std::size_t i = 0; i < 24; ++i) {
        const long l = local[edofs[i]];
        if (l >= 0) r(l) -= fe(static_cast<Eigen::Index>(i));
      }
    }
    const double rn = n > 0 ? r.lpNorm<Eigen::Infinity>() : 0.0;
    out.report.residuals.push_back(rn);
    out.report.plastic_points = n_plastic;
    if (rn <= tolerance) break;
    if (it >= newton_max_iterations) {
      fail(ErrorKind::not_converged, "Newton did not converge in " + std::to_string(newton_max_iterations) +
                                         " iterations (tolerance " + history({tolerance}) + "); residual history: " +
                                         history(out.report.residuals));
    }

    Eigen::VectorXd delta;
    if (global && n_plastic == 0) {
      delta = system.solve(r);
    } else {
      std::vector<Eigen::Triplet<double>> trip;
      trip.reserve(elements.size() * 576);
      for (std::size_t le = 0; le < elements.size(); ++le) {
        const std::size_t e = elements[le];
        Eigen::Matrix<double, 24, 24> ke;
        bool any = false;
        for (std::size_t g = 0; g < 8; ++g) any = any || plastic[le * 8 + g];
        if (!any) {
          ke = system.element_stiffness();
        } else {
          ke.setZero();
          for (std::size_t g = 0; g < 8; ++g) {
            ke += system.b(g).transpose() * tangent[le * 8 + g] * system.b(g) * system.weight();
          }
        }
        const auto edofs = mesh.element_dofs(e);
        for (std::size_t a = 0; a < 24; ++a) {
          const long la = local[edofs[a]];
          if (la < 0) continue;
          for (std::size_t b = 0; b < 24; ++b) {
            const long lb = local[edofs[b]];
            if (lb >= 0) trip.emplace_back(la, lb, ke(static_cast<Eigen::Index>(a), static_cast<Eigen::Index>(b)));
          }
        }
      }
      SpMat kt(n, n);
      kt.setFromTriplets(trip.begin(), trip.end());
      Eigen::SimplicialLDLT<SpMat> solver(kt);
      if (solver.info() != Eigen::Success) fail(ErrorKind::numeric, "tangent factorization failed");
      delta = solver.solve(r);
    }
    for (std::size_t j = 0; j < dofs.size(); ++j) du(static_cast<Eigen::Index>(dofs[j])) += delta(static_cast<Eigen::Index>(j));
    ++out.report.iterations;
  }
  out.delta_u = std::move(du);
  return out;
}

}  // namespace

double force_floor(const FeSystem& system) {
  const auto h = system.mesh().spacing();
  const double hmin = std::min({h[0], h[1], h[2]});
  return 1e-6 * system.problem().material.youngs_modulus * hmin * hmin;
}

double equivalent_load_norm(const FeSystem& system, const Material& material, const StepLoad& load,
                            const FeState& state) {
  (void)material;
  const auto& mesh = system.mesh();
  std::vector<PointState> trial = state.points;
  for (std::size_t e = 0; e < mesh.n_elements(); ++e) {
    for (std::size_t g = 0; g < 8; ++g) {
      const Voigt de = mechanical_strain_increment(system, e, g, load.prescribed, load);
      const Vec6 s = as_vec(trial[e * 8 + g].stress) + system.elastic() * as_vec(de);
      for (int c = 0; c < 6; ++c) trial[e * 8 + g].stress[c] = s(c);
    }
  }
  const Eigen::VectorXd r = load.f_ext - internal_force(system, trial);
  double m = 0.0;
  for (auto d : system.free_dofs()) m = std::max(m, std::abs(r(static_cast<Eigen::Index>(d))));
  return m;
}

IncrementResult newton_solve_increment(const FeSystem& system, const Material& material,
                                       const StepLoad& load, const FeState& state) {
  const double tol = 1e-8 * std::max(equivalent_load_norm(system, material, load, state), force_floor(system));
  std::vector<std::size_t> elements(system.mesh().n_elements());
  for (std::size_t e = 0; e < elements.size(); ++e) elements[e] = e;
  PatchResult pr = newton_core(system, material, load, state.points, elements, system.free_dofs(),
                               load.prescribed, tol, true);
  IncrementResult out;
  out.state.u = state.u + pr.delta_u;
  out.state.points = std::move(pr.points);
  out.delta_u = std::move(pr.delta_u);
  out.report = std::move(pr.report);
  return out;
}

PatchResult newton_solve_patch(const FeSystem& system, const Material& material, const StepLoad& load,
                               const std::vector<PointState>& start, const std::vector<std::size_t>& elements,
                               const std::vector<std::size_t>& dofs, Eigen::VectorXd du, double tolerance) {
  return newton_core(system, material, load, start, elements, dofs, std::move(du), tolerance, false);
}

std::vector<PointState> update_states(const FeSystem& system, const Material& material, const StepLoad& load,
                                      const std::vector<PointState>& start, const Eigen::VectorXd& du) {
  std::vector<PointState> out = start;
  for (std::size_t e = 0; e < system.mesh().n_elements(); ++e) {
    for (std::size_t g = 0; g < 8; ++g) {
      const std::size_t idx = e * 8 + g;
      const auto rm = return_mapping(material, mechanical_strain_increment(system, e, g, du, load), start[idx]);
      out[idx].stress = rm.stress;
      for (int c = 0; c < 6; ++c) out[idx].eps_p[c] = start[idx].eps_p[c] + rm.delta_eps_p[c];
      out[idx].p_eq = rm.p_eq;
    }
  }
  return out;
}

FeTrajectory fe_solve(const FeSystem& system, const ParameterGrid& grid, const std::vector<double>& mu) {
  const Material material = material_at(system.problem(), grid, mu);
  FeState state = FeState::initial(system);
  FeTrajectory traj;
  for (std::size_t s = 0; s < system.problem().n_steps; ++s) {
    const StepLoad load = step_load(system, s, grid, mu);
    IncrementResult inc;
    try {
      inc = newton_solve_increment(system, material, load, state);
    } catch (const Error& e) {
      throw Error(e.kind(), "step " + std::to_string(s) + ": " + e.what());
    }
    state = std::move(inc.state);
    traj.u.push_back(state.u);
    traj.points.push_back(state.points);
    traj.reports.push_back(std::move(inc.report));
  }
  return traj;
}

SweepOutput fe_parametric_sweep(const FeSystem& system, const ParameterGrid& grid) {
  validate_binding(system.problem(), grid);
  const std::size_t np = grid.size();
  const std::size_t ns = system.problem().n_steps;
  const std::size_t nd = system.n_dofs();
  SweepOutput out;
  out.points.resize(np);
  parallel_for(np, [&](std::size_t p) {
    try {
      out.points[p] = fe_solve(system, grid, grid.values_at(p));
    } catch (const Error& e) {
      const MultiIndex idx = grid.unravel(p);
      std::ostringstream where;
      where << "grid point (";
      for (std::size_t k = 0; k < idx.size(); ++k) where << (k ? "," : "") << idx[k];
      where << "): ";
      throw Error(e.kind(), where.str() + e.what());
    }
  });
  Shape shape{nd, ns};
  for (auto s : grid.shape()) shape.push_back(s);
  out.displacement = DenseTensor(shape);
  for (std::size_t p = 0; p < np; ++p) {
    for (std::size_t s = 0; s < ns; ++s) {
      for (std::size_t d = 0; d < nd; ++d) {
        out.displacement[(d * ns + s) * np + p] = out.points[p].u[s](static_cast<Eigen::Index>(d));
      }
    }
  }
  return out;
}

}  // namespace xtd
