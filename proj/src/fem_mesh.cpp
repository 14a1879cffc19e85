#include <algorithm>
#include <set>

#include "xtd/error.hpp"
#include "xtd/fem.hpp"

namespace xtd {

void StructuredHexMesh::validate() const {
  for (int a = 0; a < 3; ++a) {
    if (nodes[a] < 2) fail(ErrorKind::config, "mesh needs at least 2 nodes per direction");
    if (!(lengths[a] > 0.0)) fail(ErrorKind::config, "mesh lengths must be positive");
  }
}

std::array<std::size_t, 3> StructuredHexMesh::element_counts() const {
  return {nodes[0] - 1, nodes[1] - 1, nodes[2] - 1};
}

std::size_t StructuredHexMesh::n_elements() const {
  const auto c = element_counts();
  return c[0] * c[1] * c[2];
}

std::array<double, 3> StructuredHexMesh::spacing() const {
  const auto c = element_counts();
  return {lengths[0] / static_cast<double>(c[0]), lengths[1] / static_cast<double>(c[1]),
          lengths[2] / static_cast<double>(c[2])};
}

std::size_t StructuredHexMesh::node(std::size_t i, std::size_t j, std::size_t k) const {
  return i + nodes[0] * (j + nodes[1] * k);
}

std::array<std::size_t, 3> StructuredHexMesh::node_ijk(std::size_t id) const {
  return {id % nodes[0], (id / nodes[0]) % nodes[1], id / (nodes[0] * nodes[1])};
}

std::array<double, 3> StructuredHexMesh::coords(std::size_t id) const {
  const auto ijk = node_ijk(id);
  const auto h = spacing();
  return {static_cast<double>(ijk[0]) * h[0], static_cast<double>(ijk[1]) * h[1],
          static_cast<double>(ijk[2]) * h[2]};
}

std::size_t StructuredHexMesh::element(std::size_t i, std::size_t j, std::size_t k) const {
  const auto c = element_counts();
  return i + c[0] * (j + c[1] * k);
}

std::array<std::size_t, 3> StructuredHexMesh::element_ijk(std::size_t e) const {
  const auto c = element_counts();
  return {e % c[0], (e / c[0]) % c[1], e / (c[0] * c[1])};
}

std::array<std::size_t, 8> StructuredHexMesh::element_nodes(std::size_t e) const {
  const auto [i, j, k] = element_ijk(e);
  return {node(i, j, k),         node(i + 1, j, k),         node(i + 1, j + 1, k),
          node(i, j + 1, k),     node(i, j, k + 1),         node(i + 1, j, k + 1),
          node(i + 1, j + 1, k + 1), node(i, j + 1, k + 1)};
}

std::array<std::size_t, 24> StructuredHexMesh::element_dofs(std::size_t e) const {
  const auto n = element_nodes(e);
  std::array<std::size_t, 24> d{};
  for (std::size_t a = 0; a < 8; ++a) {
    for (std::size_t c = 0; c < 3; ++c) d[3 * a + c] = 3 * n[a] + c;
  }
  return d;
}

std::array<double, 3> StructuredHexMesh::element_origin(std::size_t e) const {
  return coords(element_nodes(e)[0]);
}

std::vector<std::size_t> StructuredHexMesh::face_nodes(const std::string& face) const {
  if (face.size() != 2 || (face[1] != '-' && face[1] != '+') || face[0] < 'x' || face[0] > 'z') {
    fail(ErrorKind::config, "unknown face '" + face + "' (expected x-, x+, y-, y+, z- or z+)");
  }
  const std::size_t axis = static_cast<std::size_t>(face[0] - 'x');
  const std::size_t fixed = face[1] == '-' ? 0 : nodes[axis] - 1;
  std::vector<std::size_t> out;
  for (std::size_t k = 0; k < nodes[2]; ++k) {
    for (std::size_t j = 0; j < nodes[1]; ++j) {
      for (std::size_t i = 0; i < nodes[0]; ++i) {
        const std::array<std::size_t, 3> ijk{i, j, k};
        if (ijk[axis] == fixed) out.push_back(node(i, j, k));
      }
    }
  }
  return out;
}

std::vector<std::size_t> StructuredHexMesh::elements_of_node(std::size_t id) const {
  const auto [i, j, k] = node_ijk(id);
  const auto c = element_counts();
  std::vector<std::size_t> out;
  for (std::size_t dk = 0; dk < 2; ++dk) {
    for (std::size_t dj = 0; dj < 2; ++dj) {
      for (std::size_t di = 0; di < 2; ++di) {
        if (i < di || j < dj || k < dk) continue;
        const std::size_t ei = i - di, ej = j - dj, ek = k - dk;
        if (ei < c[0] && ej < c[1] && ek < c[2]) out.push_back(element(ei, ej, ek));
      }
    }
  }
  std::sort(out.begin(), out.end());
  return out;
}

void FeProblem::validate() const {
  mesh.validate();
  material.validate();
  if (n_steps < 1) fail(ErrorKind::config, "problem needs at least one step");
  std::set<std::size_t> constrained;
  for (const auto& bc : dirichlet) {
    if (bc.component < 0 || bc.component > 2) {
      fail(ErrorKind::config, "dirichlet '" + bc.name + "': component must be 0, 1 or 2");
    }
    if (bc.increments.size() != n_steps) {
      fail(ErrorKind::config, "dirichlet '" + bc.name + "': expected " + std::to_string(n_steps) +
                                  " increments, got " + std::to_string(bc.increments.size()));
    }
    if (bc.nodes.empty()) fail(ErrorKind::config, "dirichlet '" + bc.name + "' has no nodes");
    for (auto n : bc.nodes) {
      if (n >= mesh.n_nodes()) fail(ErrorKind::config, "dirichlet '" + bc.name + "': node out of range");
      if (!constrained.insert(3 * n + static_cast<std::size_t>(bc.component)).second) {
        fail(ErrorKind::config, "dirichlet '" + bc.name + "': DoF already constrained by another condition");
      }
    }
  }
  if (constrained.empty()) fail(ErrorKind::config, "problem has no constrained DoF");
  for (const auto& t : tractions) {
    mesh.face_nodes(t.face);
    if (t.component < 0 || t.component > 2) {
      fail(ErrorKind::config, "traction '" + t.name + "': component must be 0, 1 or 2");
    }
    if (t.increments.size() != n_steps) {
      fail(ErrorKind::config, "traction '" + t.name + "': expected " + std::to_string(n_steps) + " increments");
    }
  }
  if (thermal) {
    if (!(thermal->alpha >= 0.0)) fail(ErrorKind::config, "thermal alpha must be nonnegative");
    if (thermal->temperature.size() != n_steps) {
      fail(ErrorKind::config, "thermal field: expected " + std::to_string(n_steps) + " steps, got " +
                                  std::to_string(thermal->temperature.size()));
    }
    for (std::size_t s = 0; s < n_steps; ++s) {
      if (thermal->temperature[s].size() != mesh.n_nodes()) {
        fail(ErrorKind::config, "thermal field for step " + std::to_string(s) + " has " +
                                    std::to_string(thermal->temperature[s].size()) + " values, expected " +
                                    std::to_string(mesh.n_nodes()));
      }
    }
  }
}

namespace {

bool is_material_axis(const std::string& name) {
  return name == "sigma_y" || name == "H" || name == "hardening_exponent";
}

}  // namespace

Material material_at(const FeProblem& problem, const ParameterGrid& grid, const std::vector<double>& mu) {
  Material m = problem.material;
  for (std::size_t k = 0; k < grid.order(); ++k) {
    const auto& name = grid.axes()[k].name;
    if (name == "sigma_y") m.sigma_y = mu.at(k);
    if (name == "H") m.hardening_modulus = mu.at(k);
    if (name == "hardening_exponent") m.exponent = mu.at(k);
  }
  m.validate();
  return m;
}

double amplitude_at(const std::string& axis, const ParameterGrid& grid, const std::vector<double>& mu) {
  if (axis.empty()) return 1.0;
  return mu.at(grid.axis_index(axis));
}

void validate_binding(const FeProblem& problem, const ParameterGrid& grid) {
  std::set<std::string> referenced;
  for (const auto& bc : problem.dirichlet) referenced.insert(bc.amplitude_axis);
  for (const auto& t : problem.tractions) referenced.insert(t.amplitude_axis);
  if (problem.thermal) referenced.insert(problem.thermal->amplitude_axis);
  referenced.erase("");
  for (const auto& name : referenced) {
    if (!grid.has_axis(name)) fail(ErrorKind::config, "load amplitude axis '" + name + "' is not a grid axis");
    if (is_material_axis(name)) {
      fail(ErrorKind::config, "axis '" + name + "' is a material parameter and cannot scale a load");
    }
  }
  for (const auto& axis : grid.axes()) {
    if (!is_material_axis(axis.name) && !referenced.count(axis.name)) {
      fail(ErrorKind::config, "grid axis '" + axis.name + "' is bound to nothing");
    }
    if (axis.name == "hardening_exponent" && problem.material.hardening != Hardening::power) {
      fail(ErrorKind::config, "axis 'hardening_exponent' needs power hardening");
    }
  }
}

}  // namespace xtd
