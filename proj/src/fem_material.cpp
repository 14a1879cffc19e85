#include <cmath>
#include <limits>
#include <sstream>

#include "xtd/error.hpp"
#include "xtd/fem.hpp"

namespace xtd {

void Material::validate() const {
  if (!(youngs_modulus > 0.0)) fail(ErrorKind::config, "material: E must be positive");
  if (!(poisson > 0.0 && poisson < 0.5)) fail(ErrorKind::config, "material: poisson must lie in (0, 0.5)");
  if (!(sigma_y > 0.0)) fail(ErrorKind::config, "material: sigma_y must be positive");
  if (!(hardening_modulus >= 0.0)) fail(ErrorKind::config, "material: H must be nonnegative");
  if (hardening == Hardening::power && !(exponent > 0.0 && exponent <= 1.0)) {
    fail(ErrorKind::config, "material: power hardening exponent must lie in (0, 1]");
  }
}

double Material::hardening_stress(double p) const {
  if (hardening == Hardening::linear) return hardening_modulus * p;
  return p > 0.0 ? hardening_modulus * std::pow(p, exponent) : 0.0;
}

double Material::hardening_slope(double p) const {
  if (hardening == Hardening::linear || exponent == 1.0) return hardening_modulus;
  if (p <= 0.0) return std::numeric_limits<double>::infinity();
  return hardening_modulus * exponent * std::pow(p, exponent - 1.0);
}

namespace {

Mat6 deviatoric_projector() {
  Mat6 p = Mat6::Zero();
  for (int i = 0; i < 3; ++i) {
    for (int j = 0; j < 3; ++j) p(i, j) = (i == j ? 1.0 : 0.0) - 1.0 / 3.0;
  }
  for (int i = 3; i < 6; ++i) p(i, i) = 0.5;
  return p;
}

Mat6 volumetric() {
  Mat6 m = Mat6::Zero();
  m.topLeftCorner<3, 3>().setOnes();
  return m;
}

}  // namespace

Mat6 Material::elastic_tensor() const {
  return bulk() * volumetric() + 2.0 * shear() * deviatoric_projector();
}

namespace {

// Deviator in tensor components and its tensor norm.
Voigt deviator(const Voigt& s, double& norm) {
  const double mean = (s[0] + s[1] + s[2]) / 3.0;
  Voigt d = s;
  for (int i = 0; i < 3; ++i) d[i] -= mean;
  norm = std::sqrt(d[0] * d[0] + d[1] * d[1] + d[2] * d[2] + 2.0 * (d[3] * d[3] + d[4] * d[4] + d[5] * d[5]));
  return d;
}

}  // namespace

double von_mises(const Voigt& stress) {
  double norm = 0.0;
  deviator(stress, norm);
  return std::sqrt(1.5) * norm;
}

double yield_function(const Material& material, const Voigt& stress, double p_eq) {
  return von_mises(stress) - material.sigma_y - material.hardening_stress(p_eq);
}

namespace {

// Solves q_trial - 3 G dp - sigma_y - R(p_n + dp) = 0 for dp > 0. The root is
// bracketed by [0, f_trial / 3G]; Newton steps leaving the bracket fall back to
// bisection.
double solve_consistency(const Material& m, double q_trial, double p_n, double f_trial) {
  const double g3 = 3.0 * m.shear();
  if (m.hardening == Hardening::linear || m.exponent == 1.0) return f_trial / (g3 + m.hardening_modulus);
  const auto residual = [&](double x) { return q_trial - g3 * x - m.sigma_y - m.hardening_stress(p_n + x); };
  double lo = 0.0;
  double hi = f_trial / g3;
  double x = f_trial / (g3 + m.hardening_modulus * m.exponent);
  if (!(x > lo && x < hi)) x = 0.5 * hi;
  const double tol = 1e-14 * std::max(m.sigma_y, q_trial);
  for (int it = 0; it < 50; ++it) {
    const double r = residual(x);
    if (std::abs(r) <= tol) return x;
    if (r > 0.0) lo = x; else hi = x;
    const double slope = g3 + m.hardening_slope(p_n + x);
    double next = x + r / slope;
    if (!(next > lo && next < hi)) next = 0.5 * (lo + hi);
    if (next == x || hi - lo <= 1e-17 * hi) return next;
    x = next;
  }
  std::ostringstream msg;
  msg.precision(17);
  msg << "return mapping: consistency solve did not converge in 50 iterations (q_trial=" << q_trial
      << ", p_n=" << p_n << ", sigma_y=" << m.sigma_y << ", H=" << m.hardening_modulus << ", n=" << m.exponent
      << ", last dp=" << x << ")";
  fail(ErrorKind::numeric, msg.str());
}

}  // namespace

ReturnMappingResult return_mapping(const Material& material, const Voigt& strain_increment,
                                   const PointState& state) {
  const Mat6 d = material.elastic_tensor();
  Eigen::Map<const Eigen::Matrix<double, 6, 1>> de(strain_increment.data());
  Eigen::Map<const Eigen::Matrix<double, 6, 1>> s0(state.stress.data());
  const Eigen::Matrix<double, 6, 1> trial = s0 + d * de;

  ReturnMappingResult out;
  Voigt trial_v;
  for (int i = 0; i < 6; ++i) trial_v[i] = trial(i);
  double snorm = 0.0;
  const Voigt dev = deviator(trial_v, snorm);
  const double q = std::sqrt(1.5) * snorm;
  const double f = q - material.sigma_y - material.hardening_stress(state.p_eq);
  out.p_eq = state.p_eq;
  if (f <= 0.0 || snorm == 0.0) {
    out.stress = trial_v;
    out.tangent = d;
    return out;
  }

  const double g = material.shear();
  const double dp = solve_consistency(material, q, state.p_eq, f);
  Eigen::Matrix<double, 6, 1> n;
  for (int i = 0; i < 6; ++i) n(i) = dev[i] / snorm;
  const double flow = std::sqrt(1.5) * dp;  // |delta eps_p| in tensor norm
  out.plastic = true;
  out.delta_p = dp;
  out.p_eq = state.p_eq + dp;
  for (int i = 0; i < 6; ++i) {
    out.stress[i] = trial_v[i] - 2.0 * g * flow * n(i);
    out.delta_eps_p[i] = (i < 3 ? 1.0 : 2.0) * flow * n(i);
  }
  const double theta = 1.0 - 3.0 * g * dp / q;
  const double h = material.hardening_slope(out.p_eq);
  const double theta_bar = 1.0 / (1.0 + h / (3.0 * g)) - (1.0 - theta);
  out.tangent = material.bulk() * volumetric() + 2.0 * g * theta * deviatoric_projector() -
                2.0 * g * theta_bar * n * n.transpose();
  return out;
}

}  // namespace xtd
