#pragma once

// Small-strain elastoplastic finite elements on structured hexahedral meshes.
//
// Voigt order is [xx, yy, zz, xy, yz, xz]; strains carry engineering shear
// (gamma = 2 eps), stresses carry tensor components. DoF d of node a is 3a + d.

#include <array>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Dense>
#include <Eigen/Sparse>

#include "xtd/grid.hpp"
#include "xtd/tensor.hpp"

namespace xtd {

using Voigt = std::array<double, 6>;
using Mat6 = Eigen::Matrix<double, 6, 6>;
using SpMat = Eigen::SparseMatrix<double>;

inline constexpr std::size_t gauss_per_element = 8;

struct StructuredHexMesh {
  std::array<std::size_t, 3> nodes{2, 2, 2};  // nodes per direction
  std::array<double, 3> lengths{1.0, 1.0, 1.0};

  void validate() const;
  std::size_t n_nodes() const { return nodes[0] * nodes[1] * nodes[2]; }
  std::size_t n_dofs() const { return 3 * n_nodes(); }
  std::array<std::size_t, 3> element_counts() const;
  std::size_t n_elements() const;
  std::size_t n_gauss() const { return gauss_per_element * n_elements(); }
  std::array<double, 3> spacing() const;

  std::size_t node(std::size_t i, std::size_t j, std::size_t k) const;
  std::array<std::size_t, 3> node_ijk(std::size_t id) const;
  std::array<double, 3> coords(std::size_t id) const;
  std::size_t element(std::size_t i, std::size_t j, std::size_t k) const;
  std::array<std::size_t, 3> element_ijk(std::size_t e) const;
  // Counter-clockwise bottom face, then top face.
  std::array<std::size_t, 8> element_nodes(std::size_t e) const;
  std::array<std::size_t, 24> element_dofs(std::size_t e) const;
  std::array<double, 3> element_origin(std::size_t e) const;
  // Face names: x-, x+, y-, y+, z-, z+.
  std::vector<std::size_t> face_nodes(const std::string& face) const;
  std::vector<std::size_t> elements_of_node(std::size_t id) const;
};

enum class Hardening { linear, power };

struct Material {
  double youngs_modulus = 210e9;
  double poisson = 0.3;
  double sigma_y = 600e6;
  double hardening_modulus = 42e9;  // H
  Hardening hardening = Hardening::linear;
  double exponent = 1.0;  // n, power law only

  void validate() const;
  double shear() const { return youngs_modulus / (2.0 * (1.0 + poisson)); }
  double bulk() const { return youngs_modulus / (3.0 * (1.0 - 2.0 * poisson)); }
  double hardening_stress(double p) const;  // R(p)
  double hardening_slope(double p) const;   // dR/dp
  Mat6 elastic_tensor() const;
};

struct PointState {
  Voigt stress{};
  Voigt eps_p{};
  double p_eq = 0.0;
};

struct ReturnMappingResult {
  Voigt stress{};
  Voigt delta_eps_p{};
  double p_eq = 0.0;
  double delta_p = 0.0;
  bool plastic = false;
  Mat6 tangent;
};

double von_mises(const Voigt& stress);
double yield_function(const Material& material, const Voigt& stress, double p_eq);

// Backward-Euler radial return from `state` under a total strain increment.
ReturnMappingResult return_mapping(const Material& material, const Voigt& strain_increment,
                                   const PointState& state);

struct DirichletBC {
  std::string name;
  std::vector<std::size_t> nodes;
  int component = 0;
  std::vector<double> increments;  // per step, m
  std::string amplitude_axis;      // empty: no parameter scaling
};

struct TractionLoad {
  std::string name;
  std::string face;
  int component = 0;
  std::vector<double> increments;  // per step, Pa
  std::string amplitude_axis;
};

struct ThermalLoad {
  double alpha = 0.0;
  // Nodal temperature change relative to the reference state at the end of
  // each step.
  std::vector<std::vector<double>> temperature;
  std::string amplitude_axis;
};

struct FeProblem {
  StructuredHexMesh mesh;
  Material material;
  std::vector<DirichletBC> dirichlet;
  std::vector<TractionLoad> tractions;
  std::optional<ThermalLoad> thermal;
  std::size_t n_steps = 1;

  void validate() const;
};

// Grid axes named sigma_y, H or hardening_exponent override the material;
// other axes scale the loads that name them as amplitude_axis.
Material material_at(const FeProblem& problem, const ParameterGrid& grid, const std::vector<double>& mu);
double amplitude_at(const std::string& axis, const ParameterGrid& grid, const std::vector<double>& mu);
void validate_binding(const FeProblem& problem, const ParameterGrid& grid);

// Shared, parameter-independent discretization: B matrices, stiffness,
// Dirichlet elimination and the factorized free-free block.
class FeSystem {
 public:
  explicit FeSystem(const FeProblem& problem);

  const FeProblem& problem() const { return problem_; }
  const StructuredHexMesh& mesh() const { return problem_.mesh; }
  const Mat6& elastic() const { return d_; }
  const Eigen::Matrix<double, 6, 24>& b(std::size_t gp) const { return b_[gp]; }
  double weight() const { return weight_; }  // detJ times Gauss weight, same at every point
  const std::array<std::array<double, 8>, 8>& shape_values() const { return n_; }
  const Eigen::Matrix<double, 24, 24>& element_stiffness() const { return ke_; }

  std::size_t n_dofs() const { return problem_.mesh.n_dofs(); }
  std::size_t n_free() const { return free_dofs_.size(); }
  const std::vector<std::size_t>& free_dofs() const { return free_dofs_; }
  const std::vector<std::size_t>& constrained_dofs() const { return constrained_dofs_; }
  long free_index(std::size_t dof) const { return free_index_[dof]; }  // -1 if constrained

  const SpMat& stiffness() const { return k_; }  // full, before elimination
  const SpMat& stiffness_ff() const { return kff_; }
  Eigen::VectorXd solve(const Eigen::VectorXd& rhs_free) const;

  Eigen::VectorXd restrict_free(const Eigen::VectorXd& full) const;
  Eigen::VectorXd expand_free(const Eigen::VectorXd& free) const;

  Voigt strain(std::size_t e, std::size_t gp, const Eigen::VectorXd& u) const;

 private:
  FeProblem problem_;
  Mat6 d_;
  std::array<Eigen::Matrix<double, 6, 24>, 8> b_;
  std::array<std::array<double, 8>, 8> n_{};
  double weight_ = 0.0;
  Eigen::Matrix<double, 24, 24> ke_;
  std::vector<std::size_t> free_dofs_;
  std::vector<std::size_t> constrained_dofs_;
  std::vector<long> free_index_;
  SpMat k_;
  SpMat kff_;
  std::shared_ptr<Eigen::SimplicialLDLT<SpMat>> factor_;
};

FeSystem assemble_stiffness(const FeProblem& problem);

struct FeState {
  Eigen::VectorXd u;               // cumulative displacement, all DoFs
  std::vector<PointState> points;  // element-major, 8 per element
  static FeState initial(const FeSystem& system);
};

// Per-step loading resolved at one parameter point.
struct StepLoad {
  Eigen::VectorXd prescribed;  // Dirichlet increments (constrained entries only)
  Eigen::VectorXd f_ext;       // total external nodal force at the end of the step
  Eigen::VectorXd dtheta;      // nodal temperature increment, empty if none
  double alpha = 0.0;
};

StepLoad step_load(const FeSystem& system, std::size_t step, const ParameterGrid& grid,
                   const std::vector<double>& mu);

struct Forces {
  Eigen::VectorXd f_ext;
  Eigen::VectorXd f_pl;
  Eigen::VectorXd f_thermal;
};

Eigen::VectorXd traction_force(const StructuredHexMesh& mesh, const std::string& face, int component,
                               double traction);
Eigen::VectorXd internal_force(const FeSystem& system, const std::vector<PointState>& points);
Eigen::VectorXd plastic_force(const FeSystem& system, const std::vector<PointState>& points);
Eigen::VectorXd thermal_force(const FeSystem& system, double alpha, const Eigen::VectorXd& theta);
Forces assemble_forces(const FeSystem& system, std::size_t step, const FeState& state,
                       const ParameterGrid& grid, const std::vector<double>& mu);

// Strain increment at a Gauss point net of thermal expansion.
Voigt mechanical_strain_increment(const FeSystem& system, std::size_t e, std::size_t gp,
                                  const Eigen::VectorXd& du, const StepLoad& load);

struct NewtonReport {
  std::size_t iterations = 0;
  std::vector<double> residuals;  // infinity norms, one per evaluation
  double tolerance = 0.0;
  std::size_t plastic_points = 0;
};

struct IncrementResult {
  Eigen::VectorXd delta_u;
  FeState state;
  NewtonReport report;
};

inline constexpr std::size_t newton_max_iterations = 25;

// Norm of the elastic equivalent load of a step: external force minus the
// internal force of the elastic trial state driven by the prescribed and
// thermal increments.
double equivalent_load_norm(const FeSystem& system, const Material& material, const StepLoad& load,
                            const FeState& state);
double force_floor(const FeSystem& system);

IncrementResult newton_solve_increment(const FeSystem& system, const Material& material,
                                       const StepLoad& load, const FeState& state);

// Newton on a subset of elements. Unknowns are `dofs`; every other DoF keeps
// its value from `du`. Returns the converged increment and point states of
// the patch elements (other entries of `points` are copied from `start`).
struct PatchResult {
  Eigen::VectorXd delta_u;
  std::vector<PointState> points;
  NewtonReport report;
};
PatchResult newton_solve_patch(const FeSystem& system, const Material& material, const StepLoad& load,
                               const std::vector<PointState>& start, const std::vector<std::size_t>& elements,
                               const std::vector<std::size_t>& dofs, Eigen::VectorXd du, double tolerance);

// Per-point states after applying `du` from `start` (all elements).
std::vector<PointState> update_states(const FeSystem& system, const Material& material, const StepLoad& load,
                                      const std::vector<PointState>& start, const Eigen::VectorXd& du);

struct FeTrajectory {
  std::vector<Eigen::VectorXd> u;                  // cumulative, per step
  std::vector<std::vector<PointState>> points;     // per step
  std::vector<NewtonReport> reports;
};

FeTrajectory fe_solve(const FeSystem& system, const ParameterGrid& grid, const std::vector<double>& mu);

struct SweepOutput {
  DenseTensor displacement;  // [n_dof, n_steps, mu...], cumulative
  std::vector<FeTrajectory> points;  // indexed by flat grid point
};

SweepOutput fe_parametric_sweep(const FeSystem& system, const ParameterGrid& grid);

}  // namespace xtd
