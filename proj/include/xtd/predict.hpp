#pragma once

// Online evaluation of trained models at off-grid parameters, derived
// fields, and model persistence.

#include <atomic>
#include <memory>
#include <string>
#include <vector>

#include "xtd/container.hpp"
#include "xtd/decomp.hpp"
#include "xtd/fem.hpp"
#include "xtd/grid.hpp"
#include "xtd/rom.hpp"

namespace xtd {

// The 2^n grid corners around mu with their multilinear weights. Corners
// with zero weight are dropped, so a grid point yields a single corner.
struct CornerStencil {
  std::vector<std::size_t> points;  // flat grid indices
  std::vector<double> weights;
  std::vector<AxisLocation> locations;
};
CornerStencil corner_stencil(const ParameterGrid& grid, const std::vector<double>& mu);

// Every axis of a data model is a parameter axis; `grid` carries its values.
struct DataModelBundle {
  XtdDataModel model;
  ParameterGrid grid;
};

double evaluate_data(const DataModelBundle& bundle, const std::vector<double>& mu);

Container data_model_container(const DataModelBundle& bundle);
DataModelBundle data_model_from_container(const Container& c, const std::string& source = "model");
void save_data_model(const std::string& path, const DataModelBundle& bundle);
DataModelBundle load_data_model(const std::string& path);

// Index axes 1..n for tensors that come without axis metadata.
ParameterGrid index_grid(const Shape& shape);

enum class Field { displacement, stress, von_mises, p_eq, eps_p };
Field parse_field(const std::string& name);
const char* field_name(Field f);

// snapshot: stored Gauss states interpolated multilinearly between corners.
// replay: interpolated step increments pushed through the return mapping at
// mu, which keeps the yield condition satisfied off the grid.
enum class PredictMethod { snapshot, replay };
PredictMethod parse_method(const std::string& name);

class RomPredictor {
 public:
  explicit RomPredictor(std::shared_ptr<const RomModel> model);

  const RomModel& model() const { return *model_; }
  const FeSystem& system() const { return *system_; }
  std::size_t n_steps() const { return model_->steps.size(); }

  Eigen::VectorXd step_increment(const CornerStencil& st, std::size_t step) const;
  Eigen::VectorXd step_increment(const std::vector<double>& mu, std::size_t step) const;
  Eigen::VectorXd displacement(const std::vector<double>& mu, std::size_t step) const;  // cumulative

  // Gauss states after `step`. With `elements`, replay only updates those
  // elements and leaves the other entries default-constructed.
  std::vector<PointState> states(const std::vector<double>& mu, std::size_t step, PredictMethod method,
                                 const std::vector<std::size_t>* elements = nullptr) const;

  // displacement: [n_nodes, 3]; stress, eps_p: [n_gauss, 6]; von_mises, p_eq: [n_gauss].
  DenseTensor evaluate(const std::vector<double>& mu, std::size_t step, Field field,
                       PredictMethod method = PredictMethod::snapshot) const;

  // Grid corners visited since construction (or the last reset).
  std::size_t corners_touched() const { return corners_touched_.load(); }
  void reset_counter() { corners_touched_ = 0; }

 private:
  void check_step(std::size_t step) const;
  CornerStencil stencil(const std::vector<double>& mu) const;

  std::shared_ptr<const RomModel> model_;
  std::unique_ptr<FeSystem> system_;
  // Per step, per grid point: extended-mode entries (dof, value) in mode order.
  std::vector<std::vector<std::vector<std::pair<std::size_t, double>>>> extended_index_;
  mutable std::atomic<std::size_t> corners_touched_{0};
};

// sigma = D (eps(u) - eps_p - eps_th) at every Gauss point. `theta` is the
// total nodal temperature change (empty when there is no thermal load).
std::vector<Voigt> derive_stress(const FeSystem& system, const Eigen::VectorXd& u,
                                 const std::vector<Voigt>& eps_p, const Eigen::VectorXd& theta = {},
                                 double alpha = 0.0);

Container rom_model_container(const RomModel& model);
RomModel rom_model_from_container(const Container& c, const std::string& source = "model");
void save_rom_model(const std::string& path, const RomModel& model);
RomModel load_rom_model(const std::string& path);

// "data" or "rom".
std::string container_kind(const Container& c);

}  // namespace xtd
