#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <random>

#include "xtd/error.hpp"
#include "xtd/fem.hpp"

using namespace xtd;

namespace {

using Vec6 = Eigen::Matrix<double, 6, 1>;

ParameterGrid yield_grid(double sy) { return ParameterGrid({{"sigma_y", "Pa", {sy, 2.0 * sy}}}); }

Material steel(Hardening h = Hardening::linear) {
  Material m;
  m.youngs_modulus = 200e9;
  m.poisson = 0.3;
  m.sigma_y = 250e6;
  m.hardening_modulus = 10e9;
  m.hardening = h;
  if (h == Hardening::power) {
    m.hardening_modulus = 800e6;
    m.exponent = 0.3;
  }
  return m;
}

// Isotropic elasticity written out entry by entry from E and nu.
Mat6 lame_matrix(double e, double nu) {
  const double lam = e * nu / ((1 + nu) * (1 - 2 * nu)), mu = e / (2 * (1 + nu));
  Mat6 d = Mat6::Zero();
  for (int i = 0; i < 3; ++i) {
    for (int j = 0; j < 3; ++j) d(i, j) = lam;
    d(i, i) = lam + 2 * mu;
    d(i + 3, i + 3) = mu;
  }
  return d;
}

// Element stiffness of an axis-aligned box by 2x2x2 Gauss quadrature, with
// shape functions built from the nodal coordinates of the element.
Eigen::Matrix<double, 24, 24> reference_ke(const StructuredHexMesh& mesh, std::size_t e, const Mat6& d) {
  const auto nodes = mesh.element_nodes(e);
  const auto o = mesh.element_origin(e);
  const auto h = mesh.spacing();
  std::array<std::array<double, 3>, 8> xi{};
  for (int a = 0; a < 8; ++a) {
    const auto x = mesh.coords(nodes[a]);
    for (int k = 0; k < 3; ++k) xi[a][k] = (x[k] - o[k]) / h[k] * 2.0 - 1.0;
  }
  Eigen::Matrix<double, 24, 24> ke = Eigen::Matrix<double, 24, 24>::Zero();
  const double g = 1.0 / std::sqrt(3.0);
  for (double r : {-g, g}) {
    for (double s : {-g, g}) {
      for (double t : {-g, g}) {
        Eigen::Matrix<double, 6, 24> b = Eigen::Matrix<double, 6, 24>::Zero();
        const double p[3] = {r, s, t};
        for (int a = 0; a < 8; ++a) {
          double dn[3];
          for (int k = 0; k < 3; ++k) {
            dn[k] = xi[a][k] / 8.0 * (2.0 / h[k]);
            for (int m = 0; m < 3; ++m) {
              if (m != k) dn[k] *= 1.0 + xi[a][m] * p[m];
            }
          }
          b(0, 3 * a) = dn[0];
          b(1, 3 * a + 1) = dn[1];
          b(2, 3 * a + 2) = dn[2];
          b(3, 3 * a) = dn[1];
          b(3, 3 * a + 1) = dn[0];
          b(4, 3 * a + 1) = dn[2];
          b(4, 3 * a + 2) = dn[1];
          b(5, 3 * a) = dn[2];
          b(5, 3 * a + 2) = dn[0];
        }
        ke += b.transpose() * d * b * (h[0] * h[1] * h[2] / 8.0);
      }
    }
  }
  return ke;
}

// Closed-form radial return for linear hardening.
Voigt reference_linear_return(const Material& m, const Voigt& de, const PointState& st, double& dp) {
  const Mat6 d = lame_matrix(m.youngs_modulus, m.poisson);
  const Vec6 trial = Eigen::Map<const Vec6>(st.stress.data()) + d * Eigen::Map<const Vec6>(de.data());
  Voigt s{};
  for (int i = 0; i < 6; ++i) s[i] = trial(i);
  const double q = von_mises(s);
  const double f = q - m.sigma_y - m.hardening_modulus * st.p_eq;
  dp = 0.0;
  if (f <= 0) return s;
  const double g = m.shear();
  dp = f / (3 * g + m.hardening_modulus);
  const double mean = (s[0] + s[1] + s[2]) / 3.0;
  const double scale = 1.0 - 3.0 * g * dp / q;
  for (int i = 0; i < 3; ++i) s[i] = mean + scale * (s[i] - mean);
  for (int i = 3; i < 6; ++i) s[i] *= scale;
  return s;
}

FeProblem block(std::array<std::size_t, 3> n, std::array<double, 3> len, std::size_t steps) {
  FeProblem p;
  p.mesh.nodes = n;
  p.mesh.lengths = len;
  p.n_steps = steps;
  p.material = steel();
  return p;
}

}  // namespace

TEST_CASE("mesh numbering, faces and adjacency") {
  StructuredHexMesh m;
  m.nodes = {3, 4, 2};
  m.lengths = {2.0, 3.0, 1.0};
  CHECK(m.n_nodes() == 24);
  CHECK(m.n_elements() == 6);
  CHECK(m.node(1, 2, 1) == 1 + 3 * (2 + 4 * 1));
  CHECK(m.node_ijk(m.node(2, 3, 1)) == std::array<std::size_t, 3>{2, 3, 1});
  CHECK(m.face_nodes("x-").size() == 8);
  CHECK(m.face_nodes("z+").size() == 12);
  CHECK_THROWS_AS(m.face_nodes("w+"), Error);
  CHECK(m.elements_of_node(m.node(1, 1, 0)).size() == 4);
  CHECK(m.elements_of_node(m.node(0, 0, 0)).size() == 1);
  const auto en = m.element_nodes(0);
  CHECK(en[0] == m.node(0, 0, 0));
  CHECK(en[6] == m.node(1, 1, 1));
}

TEST_CASE("elastic tensor equals the Lame form") {
  const Material m = steel();
  const Mat6 d = m.elastic_tensor(), ref = lame_matrix(m.youngs_modulus, m.poisson);
  CHECK((d - ref).norm() <= 1e-12 * ref.norm());
}

TEST_CASE("element stiffness matches independent quadrature and kills rigid modes") {
  FeProblem p = block({3, 3, 3}, {2.0, 3.0, 1.5}, 1);
  DirichletBC bc{"fix", p.mesh.face_nodes("z-"), 0, {0.0}, ""};
  for (int c = 0; c < 3; ++c) {
    bc.component = c;
    bc.name = "fix" + std::to_string(c);
    p.dirichlet.push_back(bc);
  }
  const FeSystem sys(p);
  const auto ref = reference_ke(p.mesh, 0, lame_matrix(p.material.youngs_modulus, p.material.poisson));
  CHECK((sys.element_stiffness() - ref).norm() <= 1e-12 * ref.norm());
  Eigen::Matrix<double, 24, 1> rigid;
  const auto nodes = p.mesh.element_nodes(0);
  for (int a = 0; a < 8; ++a) {
    const auto x = p.mesh.coords(nodes[a]);
    rigid(3 * a) = -x[1];  // rotation about z
    rigid(3 * a + 1) = x[0];
    rigid(3 * a + 2) = 1.0;  // plus a translation
  }
  CHECK((sys.element_stiffness() * rigid).norm() <= 1e-9 * ref.norm());
}

TEST_CASE("unconstrained rigid modes are reported") {
  FeProblem p = block({2, 2, 2}, {1, 1, 1}, 1);
  p.dirichlet.push_back({"only_z", p.mesh.face_nodes("z-"), 2, {0.0}, ""});
  CHECK_THROWS_AS(FeSystem{p}, Error);
}

TEST_CASE("return mapping: elastic branch, closed form, yield consistency") {
  std::mt19937_64 rng(1);
  std::normal_distribution<double> n(0.0, 1.0);
  const Material m = steel();
  for (int trial = 0; trial < 50; ++trial) {
    Voigt de{};
    for (auto& v : de) v = 2e-3 * n(rng);
    PointState st;
    st.p_eq = trial % 3 == 0 ? 0.0 : 1e-3 * std::abs(n(rng));
    double dp = 0.0;
    const Voigt ref = reference_linear_return(m, de, st, dp);
    const auto rm = return_mapping(m, de, st);
    for (int i = 0; i < 6; ++i) CHECK(std::abs(rm.stress[i] - ref[i]) <= 1e-8 * m.sigma_y);
    CHECK(rm.delta_p == doctest::Approx(dp).epsilon(1e-10));
    CHECK(rm.plastic == (dp > 0));
    if (rm.plastic) CHECK(std::abs(yield_function(m, rm.stress, rm.p_eq)) / m.sigma_y < 1e-10);
  }
  Voigt small{1e-5, 0, 0, 0, 0, 0};
  const auto rm = return_mapping(m, small, PointState{});
  CHECK_FALSE(rm.plastic);
  CHECK((rm.tangent - m.elastic_tensor()).norm() <= 1e-12 * m.elastic_tensor().norm());
}

TEST_CASE("return mapping: plastic strain is deviatoric and p_eq accumulates") {
  const Material m = steel(Hardening::power);
  Voigt de{4e-3, -1e-3, 0.5e-3, 2e-3, 0, 1e-3};
  const auto rm = return_mapping(m, de, PointState{});
  REQUIRE(rm.plastic);
  CHECK(std::abs(rm.delta_eps_p[0] + rm.delta_eps_p[1] + rm.delta_eps_p[2]) < 1e-14);
  CHECK(rm.p_eq == doctest::Approx(rm.delta_p));
  // Equivalent plastic strain increment from the engineering-shear Voigt form.
  const auto& e = rm.delta_eps_p;
  const double norm2 = e[0] * e[0] + e[1] * e[1] + e[2] * e[2] + 0.5 * (e[3] * e[3] + e[4] * e[4] + e[5] * e[5]);
  CHECK(std::sqrt(2.0 / 3.0 * norm2) == doctest::Approx(rm.delta_p).epsilon(1e-10));
  CHECK(std::abs(yield_function(m, rm.stress, rm.p_eq)) / m.sigma_y < 1e-10);
}

TEST_CASE("consistent tangent matches central differences") {
  std::mt19937_64 rng(2);
  std::normal_distribution<double> n(0.0, 1.0);
  for (Hardening h : {Hardening::linear, Hardening::power}) {
    const Material m = steel(h);
    for (int trial = 0; trial < 20; ++trial) {
      Voigt de{};
      for (auto& v : de) v = 3e-3 * n(rng);
      PointState st;
      st.p_eq = 2e-3;
      const auto rm = return_mapping(m, de, st);
      Mat6 fd;
      for (int j = 0; j < 6; ++j) {
        const double step = 1e-8;
        Voigt a = de, b = de;
        a[j] += step;
        b[j] -= step;
        const auto ra = return_mapping(m, a, st), rb = return_mapping(m, b, st);
        for (int i = 0; i < 6; ++i) fd(i, j) = (ra.stress[i] - rb.stress[i]) / (2 * step);
      }
      CHECK((fd - rm.tangent).norm() <= 1e-4 * rm.tangent.norm());
    }
  }
}

TEST_CASE("patch test: linear boundary displacement gives uniform strain") {
  FeProblem p = block({4, 3, 3}, {3.0, 2.0, 2.0}, 1);
  p.material.sigma_y = 1e15;
  const double g[3][3] = {{1e-4, 2e-5, 0}, {-3e-5, 5e-5, 1e-5}, {0, 4e-5, -6e-5}};
  for (std::size_t id = 0; id < p.mesh.n_nodes(); ++id) {
    const auto ijk = p.mesh.node_ijk(id);
    bool boundary = false;
    for (int d = 0; d < 3; ++d) boundary = boundary || ijk[d] == 0 || ijk[d] + 1 == p.mesh.nodes[d];
    if (!boundary) continue;
    const auto x = p.mesh.coords(id);
    for (int c = 0; c < 3; ++c) {
      const double u = g[c][0] * x[0] + g[c][1] * x[1] + g[c][2] * x[2];
      p.dirichlet.push_back({"n" + std::to_string(id) + "." + std::to_string(c), {id}, c, {u}, ""});
    }
  }
  const FeSystem sys(p);
  const ParameterGrid grid = yield_grid(1e15);
  const FeTrajectory t = fe_solve(sys, grid, {1e15});
  for (std::size_t id = 0; id < p.mesh.n_nodes(); ++id) {
    const auto x = p.mesh.coords(id);
    for (int c = 0; c < 3; ++c) {
      const double u = g[c][0] * x[0] + g[c][1] * x[1] + g[c][2] * x[2];
      CHECK(std::abs(t.u[0](static_cast<Eigen::Index>(3 * id + c)) - u) < 1e-14);
    }
  }
  const Vec6 eps(g[0][0], g[1][1], g[2][2], g[0][1] + g[1][0], g[1][2] + g[2][1], g[0][2] + g[2][0]);
  const Vec6 sig = lame_matrix(p.material.youngs_modulus, p.material.poisson) * eps;
  for (const auto& ps : t.points[0]) {
    for (int i = 0; i < 6; ++i) CHECK(std::abs(ps.stress[i] - sig(i)) <= 1e-8 * sig.norm());
  }
}

TEST_CASE("uniaxial bar follows the elastoplastic slope E H / (E + H)") {
  // Symmetry planes on x-, y-, z-; x+ face pulled. Homogeneous uniaxial stress.
  FeProblem p = block({2, 2, 2}, {1.0, 1.0, 1.0}, 4);
  const std::vector<double> inc{1e-3, 1e-3, 1e-3, 1e-3};
  p.dirichlet.push_back({"sx", p.mesh.face_nodes("x-"), 0, std::vector<double>(4, 0.0), ""});
  p.dirichlet.push_back({"sy", p.mesh.face_nodes("y-"), 1, std::vector<double>(4, 0.0), ""});
  p.dirichlet.push_back({"sz", p.mesh.face_nodes("z-"), 2, std::vector<double>(4, 0.0), ""});
  p.dirichlet.push_back({"pull", p.mesh.face_nodes("x+"), 0, inc, ""});
  const FeSystem sys(p);
  const auto& m = p.material;
  const FeTrajectory t = fe_solve(sys, yield_grid(m.sigma_y), {m.sigma_y});
  const double et = m.youngs_modulus * m.hardening_modulus / (m.youngs_modulus + m.hardening_modulus);
  for (std::size_t s = 0; s < 4; ++s) {
    const double eps = 1e-3 * static_cast<double>(s + 1);
    const double ey = m.sigma_y / m.youngs_modulus;
    const double want = eps <= ey ? m.youngs_modulus * eps : m.sigma_y + et * (eps - ey);
    for (const auto& ps : t.points[s]) {
      CHECK(ps.stress[0] == doctest::Approx(want).epsilon(1e-9));
      CHECK(std::abs(ps.stress[1]) < 1e-6 * m.sigma_y);
    }
    CHECK(t.reports[s].iterations <= 6);
  }
}

TEST_CASE("free thermal expansion is stress free") {
  FeProblem p = block({3, 3, 3}, {1.0, 1.0, 1.0}, 2);
  p.dirichlet.push_back({"x", {p.mesh.node(0, 0, 0)}, 0, {0.0, 0.0}, ""});
  p.dirichlet.push_back({"y", {p.mesh.node(0, 0, 0)}, 1, {0.0, 0.0}, ""});
  p.dirichlet.push_back({"z", {p.mesh.node(0, 0, 0)}, 2, {0.0, 0.0}, ""});
  p.dirichlet.push_back({"y1", {p.mesh.node(2, 0, 0)}, 1, {0.0, 0.0}, ""});
  p.dirichlet.push_back({"z1", {p.mesh.node(2, 0, 0)}, 2, {0.0, 0.0}, ""});
  p.dirichlet.push_back({"z2", {p.mesh.node(0, 2, 0)}, 2, {0.0, 0.0}, ""});
  ThermalLoad th;
  th.alpha = 1.2e-5;
  th.temperature = {std::vector<double>(p.mesh.n_nodes(), 50.0), std::vector<double>(p.mesh.n_nodes(), 120.0)};
  p.thermal = th;
  const FeSystem sys(p);
  const FeTrajectory t = fe_solve(sys, yield_grid(p.material.sigma_y), {p.material.sigma_y});
  for (std::size_t s = 0; s < 2; ++s) {
    const double strain = th.alpha * th.temperature[s][0];
    const double scale = p.material.youngs_modulus * strain;
    for (const auto& ps : t.points[s]) {
      for (double v : ps.stress) CHECK(std::abs(v) < 1e-12 * scale);
    }
    for (std::size_t id = 0; id < p.mesh.n_nodes(); ++id) {
      const auto x = p.mesh.coords(id);
      for (int c = 0; c < 3; ++c) CHECK(std::abs(t.u[s](static_cast<Eigen::Index>(3 * id + c)) - strain * x[c]) < 1e-14);
    }
  }
}

TEST_CASE("uniform traction: quarter weights on face nodes and the exact elastic answer") {
  StructuredHexMesh m;
  m.nodes = {2, 2, 2};
  m.lengths = {2.0, 1.0, 1.0};
  const Eigen::VectorXd f = traction_force(m, "x+", 0, 8.0);
  for (auto n : m.face_nodes("x+")) CHECK(f(static_cast<Eigen::Index>(3 * n)) == doctest::Approx(8.0 * 1.0 / 4.0));
  CHECK(f.sum() == doctest::Approx(8.0));

  FeProblem p = block({3, 2, 2}, {2.0, 1.0, 1.0}, 1);
  p.material.sigma_y = 1e15;
  p.dirichlet.push_back({"sx", p.mesh.face_nodes("x-"), 0, {0.0}, ""});
  p.dirichlet.push_back({"sy", p.mesh.face_nodes("y-"), 1, {0.0}, ""});
  p.dirichlet.push_back({"sz", p.mesh.face_nodes("z-"), 2, {0.0}, ""});
  p.tractions.push_back({"t", "x+", 0, {100e6}, ""});
  const FeSystem sys(p);
  const FeTrajectory t = fe_solve(sys, yield_grid(1e15), {1e15});
  for (const auto& ps : t.points[0]) CHECK(ps.stress[0] == doctest::Approx(100e6).epsilon(1e-9));
  const double tip = t.u[0](static_cast<Eigen::Index>(3 * p.mesh.node(2, 1, 1)));
  CHECK(tip == doctest::Approx(100e6 / p.material.youngs_modulus * 2.0).epsilon(1e-9));
}

TEST_CASE("converged increments are in equilibrium and converge quadratically") {
  FeProblem p = block({4, 4, 3}, {3.0, 3.0, 2.0}, 2);
  for (int c = 0; c < 3; ++c) p.dirichlet.push_back({"b" + std::to_string(c), p.mesh.face_nodes("z-"), c, {0.0, 0.0}, ""});
  p.dirichlet.push_back({"load", {p.mesh.node(1, 1, 2)}, 2, {-0.01, -0.01}, ""});
  const FeSystem sys(p);
  const FeTrajectory t = fe_solve(sys, yield_grid(p.material.sigma_y), {p.material.sigma_y});
  for (std::size_t s = 0; s < 2; ++s) {
    const Eigen::VectorXd r = internal_force(sys, t.points[s]);
    double worst = 0.0;
    for (auto d : sys.free_dofs()) worst = std::max(worst, std::abs(r(static_cast<Eigen::Index>(d))));
    CHECK(worst <= t.reports[s].tolerance);
    const auto& h = t.reports[s].residuals;
    CHECK(t.reports[s].plastic_points > 0);
    if (h.size() >= 3) CHECK(h.back() < 1e-3 * h[h.size() - 2]);
  }
}

TEST_CASE("parametric sweep stores cumulative displacement per grid point") {
  FeProblem p = block({3, 2, 2}, {2.0, 1.0, 1.0}, 2);
  for (int c = 0; c < 3; ++c) p.dirichlet.push_back({"b" + std::to_string(c), p.mesh.face_nodes("x-"), c, {0.0, 0.0}, ""});
  p.dirichlet.push_back({"pull", p.mesh.face_nodes("x+"), 0, {1e-3, 1e-3}, "amp"});
  const ParameterGrid grid({{"amp", "", {0.5, 1.0, 2.0}}, {"sigma_y", "Pa", {200e6, 300e6}}});
  const FeSystem sys(p);
  const SweepOutput out = fe_parametric_sweep(sys, grid);
  CHECK(out.displacement.shape() == Shape{sys.n_dofs(), 2, 3, 2});
  const std::size_t dof = 3 * p.mesh.node(2, 1, 1);
  CHECK(out.displacement.at({dof, 1, 2, 0}) == doctest::Approx(4e-3));
  CHECK(out.displacement.at({dof, 0, 0, 1}) == doctest::Approx(0.5e-3));
  const ParameterGrid unbound({{"other", "", {0.0, 1.0}}});
  CHECK_THROWS_AS(fe_parametric_sweep(sys, unbound), Error);
}
