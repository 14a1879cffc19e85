#include <algorithm>
#include <cmath>

#include "xtd/error.hpp"
#include "xtd/fem.hpp"

namespace xtd {

namespace {

constexpr std::array<double, 8> kXi{-1, 1, 1, -1, -1, 1, 1, -1};
constexpr std::array<double, 8> kEta{-1, -1, 1, 1, -1, -1, 1, 1};
constexpr std::array<double, 8> kZeta{-1, -1, -1, -1, 1, 1, 1, 1};

}  // namespace

FeSystem::FeSystem(const FeProblem& problem) : problem_(problem) {
  problem_.validate();
  const auto& mesh = problem_.mesh;
  d_ = problem_.material.elastic_tensor();
  const auto h = mesh.spacing();
  weight_ = h[0] * h[1] * h[2] / 8.0;

  // Gauss point g sits next to local node g.
  const double gp = 1.0 / std::sqrt(3.0);
  ke_.setZero();
  for (std::size_t g = 0; g < 8; ++g) {
    const double xi = kXi[g] * gp, eta = kEta[g] * gp, zeta = kZeta[g] * gp;
    Eigen::Matrix<double, 6, 24> b = Eigen::Matrix<double, 6, 24>::Zero();
    for (std::size_t a = 0; a < 8; ++a) {
      const double fx = 1.0 + kXi[a] * xi, fy = 1.0 + kEta[a] * eta, fz = 1.0 + kZeta[a] * zeta;
      n_[g][a] = fx * fy * fz / 8.0;
      const double dx = kXi[a] * fy * fz / 8.0 * 2.0 / h[0];
      const double dy = kEta[a] * fx * fz / 8.0 * 2.0 / h[1];
      const double dz = kZeta[a] * fx * fy / 8.0 * 2.0 / h[2];
      const auto c = static_cast<Eigen::Index>(3 * a);
      b(0, c) = dx;
      b(1, c + 1) = dy;
      b(2, c + 2) = dz;
      b(3, c) = dy;
      b(3, c + 1) = dx;
      b(4, c + 1) = dz;
      b(4, c + 2) = dy;
      b(5, c) = dz;
      b(5, c + 2) = dx;
    }
    b_[g] = b;
    ke_ += b.transpose() * d_ * b * weight_;
  }

  const std::size_t ndof = mesh.n_dofs();
  std::vector<bool> fixed(ndof, false);
  for (const auto& bc : problem_.dirichlet) {
    for (auto n : bc.nodes) fixed[3 * n + static_cast<std::size_t>(bc.component)] = true;
  }
  free_index_.assign(ndof, -1);
  for (std::size_t i = 0; i < ndof; ++i) {
    if (fixed[i]) {
      constrained_dofs_.push_back(i);
    } else {
      free_index_[i] = static_cast<long>(free_dofs_.size());
      free_dofs_.push_back(i);
    }
  }

  std::vector<Eigen::Triplet<double>> all, ff;
  for (std::size_t e = 0; e < mesh.n_elements(); ++e) {
    const auto dofs = mesh.element_dofs(e);
    for (std::size_t r = 0; r < 24; ++r) {
      for (std::size_t c = 0; c < 24; ++c) {
        const double v = ke_(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c));
        if (v == 0.0) continue;
        all.emplace_back(dofs[r], dofs[c], v);
        const long fr = free_index_[dofs[r]], fc = free_index_[dofs[c]];
        if (fr >= 0 && fc >= 0) ff.emplace_back(fr, fc, v);
      }
    }
  }
  k_.resize(static_cast<Eigen::Index>(ndof), static_cast<Eigen::Index>(ndof));
  k_.setFromTriplets(all.begin(), all.end());
  kff_.resize(static_cast<Eigen::Index>(free_dofs_.size()), static_cast<Eigen::Index>(free_dofs_.size()));
  kff_.setFromTriplets(ff.begin(), ff.end());

  factor_ = std::make_shared<Eigen::SimplicialLDLT<SpMat>>();
  if (!free_dofs_.empty()) {
    factor_->compute(kff_);
    const Eigen::VectorXd piv = factor_->vectorD();
    const double scale = piv.cwiseAbs().maxCoeff();
    Eigen::Index worst = 0;
    const double smallest = piv.minCoeff(&worst);
    if (factor_->info() != Eigen::Success || !(smallest > 1e-10 * scale)) {
      const std::size_t dof = free_dofs_[factor_->permutationPinv().indices()(worst)];
      fail(ErrorKind::numeric, "stiffness is singular: insufficient constraints leave a rigid-body mode (pivot " +
                                   std::to_string(smallest / scale) + " of max near node " +
                                   std::to_string(dof / 3) + ", component " + std::to_string(dof % 3) + ")");
    }
  }
}

FeSystem assemble_stiffness(const FeProblem& problem) { return FeSystem(problem); }

Eigen::VectorXd FeSystem::solve(const Eigen::VectorXd& rhs_free) const {
  if (free_dofs_.empty()) return Eigen::VectorXd();
  return factor_->solve(rhs_free);
}

Eigen::VectorXd FeSystem::restrict_free(const Eigen::VectorXd& full) const {
  Eigen::VectorXd out(static_cast<Eigen::Index>(free_dofs_.size()));
  for (std::size_t i = 0; i < free_dofs_.size(); ++i) out(static_cast<Eigen::Index>(i)) = full(static_cast<Eigen::Index>(free_dofs_[i]));
  return out;
}

Eigen::VectorXd FeSystem::expand_free(const Eigen::VectorXd& free) const {
  Eigen::VectorXd out = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(n_dofs()));
  for (std::size_t i = 0; i < free_dofs_.size(); ++i) out(static_cast<Eigen::Index>(free_dofs_[i])) = free(static_cast<Eigen::Index>(i));
  return out;
}

namespace {

Eigen::Matrix<double, 24, 1> gather(const StructuredHexMesh& mesh, std::size_t e, const Eigen::VectorXd& u) {
  const auto dofs = mesh.element_dofs(e);
  Eigen::Matrix<double, 24, 1> ue;
  for (std::size_t i = 0; i < 24; ++i) ue(static_cast<Eigen::Index>(i)) = u(static_cast<Eigen::Index>(dofs[i]));
  return ue;
}

void scatter(const StructuredHexMesh& mesh, std::size_t e, const Eigen::Matrix<double, 24, 1>& fe,
             Eigen::VectorXd& f) {
  const auto dofs = mesh.element_dofs(e);
  for (std::size_t i = 0; i < 24; ++i) f(static_cast<Eigen::Index>(dofs[i])) += fe(static_cast<Eigen::Index>(i));
}

using Vec6 = Eigen::Matrix<double, 6, 1>;

Vec6 as_vec(const Voigt& v) { return Eigen::Map<const Vec6>(v.data()); }

}  // namespace

Voigt FeSystem::strain(std::size_t e, std::size_t gp, const Eigen::VectorXd& u) const {
  const Vec6 eps = b_[gp] * gather(mesh(), e, u);
  Voigt out;
  for (int i = 0; i < 6; ++i) out[i] = eps(i);
  return out;
}

FeState FeState::initial(const FeSystem& system) {
  FeState s;
  s.u = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(system.n_dofs()));
  s.points.assign(system.mesh().n_gauss(), PointState{});
  return s;
}

Eigen::VectorXd traction_force(const StructuredHexMesh& mesh, const std::string& face, int component,
                               double traction) {
  const auto nodes = mesh.face_nodes(face);
  const std::size_t axis = static_cast<std::size_t>(face[0] - 'x');
  const std::size_t a1 = (axis + 1) % 3, a2 = (axis + 2) % 3;
  const auto h = mesh.spacing();
  const double quarter = traction * h[a1] * h[a2] / 4.0;
  Eigen::VectorXd f = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(mesh.n_dofs()));
  // Each face node collects a quarter of every face quad it touches.
  for (auto n : nodes) {
    const auto ijk = mesh.node_ijk(n);
    const double w1 = (ijk[a1] == 0 || ijk[a1] == mesh.nodes[a1] - 1) ? 1.0 : 2.0;
    const double w2 = (ijk[a2] == 0 || ijk[a2] == mesh.nodes[a2] - 1) ? 1.0 : 2.0;
    f(static_cast<Eigen::Index>(3 * n + static_cast<std::size_t>(component))) += quarter * w1 * w2;
  }
  return f;
}

Eigen::VectorXd internal_force(const FeSystem& system, const std::vector<PointState>& points) {
  const auto& mesh = system.mesh();
  Eigen::VectorXd f = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(system.n_dofs()));
  for (std::size_t e = 0; e < mesh.n_elements(); ++e) {
    Eigen::Matrix<double, 24, 1> fe = Eigen::Matrix<double, 24, 1>::Zero();
    for (std::size_t g = 0; g < 8; ++g) {
      fe += system.b(g).transpose() * as_vec(points[e * 8 + g].stress) * system.weight();
    }
    scatter(mesh, e, fe, f);
  }
  return f;
}

Eigen::VectorXd plastic_force(const FeSystem& system, const std::vector<PointState>& points) {
  const auto& mesh = system.mesh();
  Eigen::VectorXd f = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(system.n_dofs()));
  for (std::size_t e = 0; e < mesh.n_elements(); ++e) {
    Eigen::Matrix<double, 24, 1> fe = Eigen::Matrix<double, 24, 1>::Zero();
    bool any = false;
    for (std::size_t g = 0; g < 8; ++g) {
      const Vec6 ep = as_vec(points[e * 8 + g].eps_p);
      if (ep.isZero(0.0)) continue;
      any = true;
      fe += system.b(g).transpose() * (system.elastic() * ep) * system.weight();
    }
    if (any) scatter(mesh, e, fe, f);
  }
  return f;
}

Eigen::VectorXd thermal_force(const FeSystem& system, double alpha, const Eigen::VectorXd& theta) {
  const auto& mesh = system.mesh();
  Eigen::VectorXd f = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(system.n_dofs()));
  Vec6 m;
  m << 1, 1, 1, 0, 0, 0;
  const Vec6 dm = system.elastic() * m;
  for (std::size_t e = 0; e < mesh.n_elements(); ++e) {
    const auto nodes = mesh.element_nodes(e);
    Eigen::Matrix<double, 24, 1> fe = Eigen::Matrix<double, 24, 1>::Zero();
    for (std::size_t g = 0; g < 8; ++g) {
      double th = 0.0;
      for (std::size_t a = 0; a < 8; ++a) th += system.shape_values()[g][a] * theta(static_cast<Eigen::Index>(nodes[a]));
      fe += system.b(g).transpose() * dm * (alpha * th * system.weight());
    }
    scatter(mesh, e, fe, f);
  }
  return f;
}

StepLoad step_load(const FeSystem& system, std::size_t step, const ParameterGrid& grid,
                   const std::vector<double>& mu) {
  const FeProblem& p = system.problem();
  if (step >= p.n_steps) fail(ErrorKind::numeric, "step " + std::to_string(step) + " out of range");
  const auto& mesh = p.mesh;
  StepLoad load;
  load.prescribed = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(mesh.n_dofs()));
  for (const auto& bc : p.dirichlet) {
    const double v = bc.increments[step] * amplitude_at(bc.amplitude_axis, grid, mu);
    for (auto n : bc.nodes) load.prescribed(static_cast<Eigen::Index>(3 * n + static_cast<std::size_t>(bc.component))) = v;
  }
  load.f_ext = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(mesh.n_dofs()));
  for (const auto& t : p.tractions) {
    double total = 0.0;
    for (std::size_t s = 0; s <= step; ++s) total += t.increments[s];
    total *= amplitude_at(t.amplitude_axis, grid, mu);
    if (total != 0.0) load.f_ext += traction_force(mesh, t.face, t.component, total);
  }
  if (p.thermal) {
    const double amp = amplitude_at(p.thermal->amplitude_axis, grid, mu);
    load.alpha = p.thermal->alpha;
    load.dtheta.resize(static_cast<Eigen::Index>(mesh.n_nodes()));
    for (std::size_t n = 0; n < mesh.n_nodes(); ++n) {
      const double prev = step ? p.thermal->temperature[step - 1][n] : 0.0;
      load.dtheta(static_cast<Eigen::Index>(n)) = amp * (p.thermal->temperature[step][n] - prev);
    }
  }
  return load;
}

Forces assemble_forces(const FeSystem& system, std::size_t step, const FeState& state,
                       const ParameterGrid& grid, const std::vector<double>& mu) {
  const FeProblem& p = system.problem();
  const StepLoad load = step_load(system, step, grid, mu);
  Forces out;
  out.f_ext = load.f_ext;
  out.f_pl = plastic_force(system, state.points);
  out.f_thermal = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(system.n_dofs()));
  if (p.thermal) {
    Eigen::VectorXd theta(static_cast<Eigen::Index>(p.mesh.n_nodes()));
    const double amp = amplitude_at(p.thermal->amplitude_axis, grid, mu);
    for (std::size_t n = 0; n < p.mesh.n_nodes(); ++n) {
      theta(static_cast<Eigen::Index>(n)) = amp * p.thermal->temperature[step][n];
    }
    out.f_thermal = thermal_force(system, p.thermal->alpha, theta);
  }
  return out;
}

Voigt mechanical_strain_increment(const FeSystem& system, std::size_t e, std::size_t gp,
                                  const Eigen::VectorXd& du, const StepLoad& load) {
  Voigt de = system.strain(e, gp, du);
  if (load.dtheta.size() > 0 && load.alpha != 0.0) {
    const auto nodes = system.mesh().element_nodes(e);
    double th = 0.0;
    for (std::size_t a = 0; a < 8; ++a) th += system.shape_values()[gp][a] * load.dtheta(static_cast<Eigen::Index>(nodes[a]));
    for (int i = 0; i < 3; ++i) de[i] -= load.alpha * th;
  }
  return de;
}

}  // namespace xtd
