#include "xtd/predict.hpp"

#include <algorithm>
#include <sstream>

#include "xtd/config.hpp"
#include "xtd/error.hpp"

namespace xtd {

CornerStencil corner_stencil(const ParameterGrid& grid, const std::vector<double>& mu) {
  CornerStencil st;
  st.locations = grid.locate(mu);
  const std::size_t n = grid.order();
  for (std::size_t mask = 0; mask < (std::size_t{1} << n); ++mask) {
    double w = 1.0;
    MultiIndex idx(n);
    for (std::size_t i = 0; i < n; ++i) {
      const bool up = (mask >> i) & 1U;
      const AxisLocation& loc = st.locations[i];
      w *= up ? loc.weight : 1.0 - loc.weight;
      idx[i] = loc.lower + (up ? 1 : 0);
    }
    if (w == 0.0) continue;
    st.points.push_back(grid.offset(idx));
    st.weights.push_back(w);
  }
  return st;
}

namespace {

double sparse_value(const SparseTensor& t, std::size_t offset) {
  const auto& off = t.offsets();
  auto it = std::lower_bound(off.begin(), off.end(), offset);
  if (it == off.end() || *it != offset) return 0.0;
  return t.values()[static_cast<std::size_t>(it - off.begin())];
}

void put_axes(Container& c, const ParameterGrid& grid) {
  c.set("axes", std::to_string(grid.order()));
  for (std::size_t i = 0; i < grid.order(); ++i) {
    const GridAxis& a = grid.axes()[i];
    if (a.name.find(' ') != std::string::npos || a.unit.find(' ') != std::string::npos) {
      fail(ErrorKind::io, "axis names and units may not contain spaces");
    }
    c.set("axis." + std::to_string(i), a.unit.empty() ? a.name : a.name + " " + a.unit);
    c.add_f64("axis." + std::to_string(i) + ".values", a.values);
  }
}

std::size_t get_count(const Container& c, const std::string& key, const std::string& source) {
  const std::string& v = c.get(key);
  try {
    std::size_t pos = 0;
    const unsigned long long n = std::stoull(v, &pos);
    if (pos != v.size()) throw std::invalid_argument(v);
    return static_cast<std::size_t>(n);
  } catch (const std::exception&) {
    fail(ErrorKind::io, source + ": bad integer for '" + key + "'");
  }
}

ParameterGrid get_axes(const Container& c, const std::string& source) {
  const std::size_t n = get_count(c, "axes", source);
  std::vector<GridAxis> axes;
  for (std::size_t i = 0; i < n; ++i) {
    std::istringstream in(c.get("axis." + std::to_string(i)));
    GridAxis a;
    in >> a.name >> a.unit;
    a.values = c.f64("axis." + std::to_string(i) + ".values");
    axes.push_back(std::move(a));
  }
  try {
    return ParameterGrid(std::move(axes));
  } catch (const Error& e) {
    fail(ErrorKind::io, source + ": " + e.what());
  }
}

std::vector<std::uint64_t> to_u64(const std::vector<std::size_t>& v) { return {v.begin(), v.end()}; }
std::vector<std::size_t> to_size(const std::vector<std::uint64_t>& v) { return {v.begin(), v.end()}; }

void put_sparse(Container& c, const std::string& name, const SparseTensor& t) {
  c.add_u64(name + ".offsets", to_u64(t.offsets()));
  c.add_f64(name + ".values", t.values());
}

SparseTensor get_sparse(const Container& c, const std::string& name, const Shape& shape, const std::string& source) {
  const auto& off = c.u64(name + ".offsets");
  const auto& val = c.f64(name + ".values");
  std::size_t total = 1;
  for (auto s : shape) total *= s;
  if (off.size() != val.size()) fail(ErrorKind::io, source + ": block '" + name + "' offsets and values differ in length");
  for (std::size_t k = 0; k < off.size(); ++k) {
    if (off[k] >= total || (k > 0 && off[k] <= off[k - 1]) || val[k] == 0.0) {
      fail(ErrorKind::io, source + ": block '" + name + "' is not a sorted sparse tensor of its shape");
    }
  }
  return SparseTensor(shape, to_size(off), val);
}

void put_factors(Container& c, const std::string& name, const SeparatedExpansion& exp) {
  std::vector<double> flat;
  for (const auto& t : exp.terms) {
    for (const auto& f : t.factors) flat.insert(flat.end(), f.begin(), f.end());
  }
  c.add_f64(name, std::move(flat));
}

SeparatedExpansion get_factors(const Container& c, const std::string& name, const Shape& shape, std::size_t n_terms,
                               const std::string& source) {
  const auto& flat = c.f64(name);
  std::size_t per_term = 0;
  for (auto s : shape) per_term += s;
  if (flat.size() != per_term * n_terms) fail(ErrorKind::io, source + ": block '" + name + "' has the wrong length");
  SeparatedExpansion exp(shape);
  std::size_t pos = 0;
  for (std::size_t m = 0; m < n_terms; ++m) {
    RankOneTerm t;
    for (auto s : shape) {
      t.factors.emplace_back(flat.begin() + static_cast<std::ptrdiff_t>(pos),
                             flat.begin() + static_cast<std::ptrdiff_t>(pos + s));
      pos += s;
    }
    exp.push_back(std::move(t));
  }
  return exp;
}

std::string join(const Shape& s) {
  std::string out;
  for (auto v : s) out += (out.empty() ? "" : " ") + std::to_string(v);
  return out;
}

Shape parse_shape(const std::string& text, const std::string& source) {
  std::istringstream in(text);
  Shape s;
  std::string tok;
  while (in >> tok) {
    try {
      s.push_back(std::stoull(tok));
    } catch (const std::exception&) {
      fail(ErrorKind::io, source + ": bad shape '" + text + "'");
    }
  }
  return s;
}

void check_kind(const Container& c, const std::string& kind, const std::string& source) {
  const std::string k = container_kind(c);
  if (k != kind) fail(ErrorKind::io, source + ": expected a " + kind + " model, found '" + k + "'");
}

}  // namespace

std::string container_kind(const Container& c) { return c.has("kind") ? c.get("kind") : ""; }

ParameterGrid index_grid(const Shape& shape) {
  std::vector<GridAxis> axes;
  for (std::size_t i = 0; i < shape.size(); ++i) {
    GridAxis a;
    a.name = "axis" + std::to_string(i);
    for (std::size_t k = 0; k < shape[i]; ++k) a.values.push_back(static_cast<double>(k + 1));
    axes.push_back(std::move(a));
  }
  return ParameterGrid(std::move(axes));
}

double evaluate_data(const DataModelBundle& b, const std::vector<double>& mu) {
  const CornerStencil st = corner_stencil(b.grid, mu);
  double v = 0.0;
  for (const auto& t : b.model.expansion.terms) {
    double w = 1.0;
    for (std::size_t i = 0; i < st.locations.size(); ++i) w *= interpolate(t.factors[i], st.locations[i]);
    v += w;
  }
  for (const auto& e : b.model.enrichments) {
    for (std::size_t c = 0; c < st.points.size(); ++c) v += st.weights[c] * sparse_value(e, st.points[c]);
  }
  return v;
}

Container data_model_container(const DataModelBundle& b) {
  const auto& m = b.model;
  if (b.grid.shape() != m.expansion.shape) fail(ErrorKind::io, "data model grid does not match the model shape");
  Container c;
  c.set("kind", "data");
  c.set("shape", join(m.expansion.shape));
  c.set("separated_modes", std::to_string(m.separated_modes()));
  c.set("extended_modes", std::to_string(m.extended_modes()));
  c.set("enrich_count", std::to_string(m.report.enrich_count));
  c.set("first_enrichment_after", std::to_string(m.report.first_enrichment_after));
  c.set("final_error", format_double(m.report.final_error));
  c.set("converged", m.report.converged ? "1" : "0");
  put_axes(c, b.grid);
  put_factors(c, "factors", m.expansion);
  for (std::size_t k = 0; k < m.enrichments.size(); ++k) put_sparse(c, "enrich." + std::to_string(k), m.enrichments[k]);
  std::vector<double> trace;
  for (const auto& t : m.report.trace) {
    trace.push_back(t.event == FitEvent::mode ? 0.0 : 1.0);
    trace.push_back(static_cast<double>(t.separated_modes));
    trace.push_back(static_cast<double>(t.extended_modes));
    trace.push_back(t.error);
  }
  c.add_f64("report.trace", std::move(trace));
  c.add_u64("report.mode_iterations", to_u64(m.report.mode_iterations));
  c.add_f64("report.enrichment_sparsity", m.report.enrichment_sparsity);
  c.add_u64("report.mode_converged", {m.report.mode_converged.begin(), m.report.mode_converged.end()});
  c.add_u64("report.enrichment_short", {m.report.enrichment_short.begin(), m.report.enrichment_short.end()});
  c.set("restarts", std::to_string(m.report.restarts));
  return c;
}

DataModelBundle data_model_from_container(const Container& c, const std::string& source) {
  check_kind(c, "data", source);
  DataModelBundle b;
  const Shape shape = parse_shape(c.get("shape"), source);
  b.grid = get_axes(c, source);
  if (b.grid.shape() != shape) fail(ErrorKind::io, source + ": axes do not match the shape");
  auto& m = b.model;
  m.expansion = get_factors(c, "factors", shape, get_count(c, "separated_modes", source), source);
  const std::size_t k_count = get_count(c, "extended_modes", source);
  for (std::size_t k = 0; k < k_count; ++k) m.enrichments.push_back(get_sparse(c, "enrich." + std::to_string(k), shape, source));
  m.report.enrich_count = get_count(c, "enrich_count", source);
  m.report.first_enrichment_after = get_count(c, "first_enrichment_after", source);
  m.report.final_error = parse_double(c.get("final_error"), source);
  m.report.converged = c.get("converged") == "1";
  const auto& trace = c.f64("report.trace");
  if (trace.size() % 4) fail(ErrorKind::io, source + ": malformed fit trace");
  for (std::size_t i = 0; i < trace.size(); i += 4) {
    m.report.trace.push_back({trace[i] == 0.0 ? FitEvent::mode : FitEvent::enrichment,
                              static_cast<std::size_t>(trace[i + 1]), static_cast<std::size_t>(trace[i + 2]),
                              trace[i + 3]});
  }
  m.report.mode_iterations = to_size(c.u64("report.mode_iterations"));
  m.report.enrichment_sparsity = c.f64("report.enrichment_sparsity");
  for (auto v : c.u64("report.mode_converged")) m.report.mode_converged.push_back(v != 0);
  for (auto v : c.u64("report.enrichment_short")) m.report.enrichment_short.push_back(v != 0);
  m.report.restarts = get_count(c, "restarts", source);
  return b;
}

void save_data_model(const std::string& path, const DataModelBundle& b) { data_model_container(b).save(path); }

DataModelBundle load_data_model(const std::string& path) { return data_model_from_container(Container::load(path), path); }

Field parse_field(const std::string& name) {
  if (name == "displacement") return Field::displacement;
  if (name == "stress") return Field::stress;
  if (name == "von_mises") return Field::von_mises;
  if (name == "p_eq") return Field::p_eq;
  if (name == "eps_p") return Field::eps_p;
  fail(ErrorKind::config, "unknown field '" + name + "' (displacement, stress, von_mises, p_eq, eps_p)");
}

const char* field_name(Field f) {
  switch (f) {
    case Field::displacement: return "displacement";
    case Field::stress: return "stress";
    case Field::von_mises: return "von_mises";
    case Field::p_eq: return "p_eq";
    case Field::eps_p: return "eps_p";
  }
  return "?";
}

PredictMethod parse_method(const std::string& name) {
  if (name == "snapshot") return PredictMethod::snapshot;
  if (name == "replay") return PredictMethod::replay;
  fail(ErrorKind::config, "unknown prediction method '" + name + "' (snapshot, replay)");
}

RomPredictor::RomPredictor(std::shared_ptr<const RomModel> model) : model_(std::move(model)) {
  system_ = std::make_unique<FeSystem>(model_->problem);
  const std::size_t np = model_->grid.size();
  extended_index_.resize(model_->steps.size());
  for (std::size_t s = 0; s < model_->steps.size(); ++s) {
    auto& idx = extended_index_[s];
    idx.resize(np);
    for (const auto& u : model_->steps[s].extended) {
      for (std::size_t k = 0; k < u.nnz(); ++k) {
        const std::size_t off = u.offsets()[k];
        idx[off % np].emplace_back(off / np, u.values()[k]);
      }
    }
  }
}

void RomPredictor::check_step(std::size_t step) const {
  if (step >= model_->steps.size()) {
    fail(ErrorKind::config, "unknown step " + std::to_string(step) + " (model has " +
                                std::to_string(model_->steps.size()) + " steps, numbered from 0)");
  }
}

CornerStencil RomPredictor::stencil(const std::vector<double>& mu) const {
  CornerStencil st = corner_stencil(model_->grid, mu);
  corners_touched_ += st.points.size();
  return st;
}

Eigen::VectorXd RomPredictor::step_increment(const CornerStencil& st, std::size_t step) const {
  check_step(step);
  const RomStepModel& sm = model_->steps[step];
  const std::size_t nd = sm.expansion.shape.at(0);
  Eigen::VectorXd du = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(nd));
  for (const auto& t : sm.expansion.terms) {
    double w = 1.0;
    for (std::size_t i = 0; i < st.locations.size(); ++i) w *= interpolate(t.factors[i + 1], st.locations[i]);
    du += Eigen::Map<const Eigen::VectorXd>(t.factors[0].data(), static_cast<Eigen::Index>(nd)) * w;
  }
  for (std::size_t c = 0; c < st.points.size(); ++c) {
    const double w = st.weights[c];
    for (const auto& [d, v] : extended_index_[step][st.points[c]]) {
      du(static_cast<Eigen::Index>(d)) += w * v;
    }
  }
  return du;
}

Eigen::VectorXd RomPredictor::step_increment(const std::vector<double>& mu, std::size_t step) const {
  return step_increment(stencil(mu), step);
}

Eigen::VectorXd RomPredictor::displacement(const std::vector<double>& mu, std::size_t step) const {
  check_step(step);
  const CornerStencil st = stencil(mu);
  Eigen::VectorXd u = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(system_->n_dofs()));
  for (std::size_t s = 0; s <= step; ++s) u += step_increment(st, s);
  return u;
}

std::vector<PointState> RomPredictor::states(const std::vector<double>& mu, std::size_t step, PredictMethod method,
                                             const std::vector<std::size_t>* elements) const {
  check_step(step);
  const std::size_t ng = model_->problem.mesh.n_gauss();
  std::vector<PointState> out(ng);
  const CornerStencil st = stencil(mu);
  if (method == PredictMethod::snapshot) {
    const auto& sig = model_->stress[step].storage();
    const auto& eps = model_->eps_p[step].storage();
    const auto& peq = model_->p_eq[step].storage();
    auto fill = [&](std::size_t q) {
      PointState& ps = out[q];
      for (std::size_t c = 0; c < st.points.size(); ++c) {
        const std::size_t base = st.points[c] * ng + q;
        const double w = st.weights[c];
        for (std::size_t k = 0; k < 6; ++k) {
          ps.stress[k] += w * sig[base * 6 + k];
          ps.eps_p[k] += w * eps[base * 6 + k];
        }
        ps.p_eq += w * peq[base];
      }
    };
    if (elements) {
      for (auto e : *elements) {
        for (std::size_t g = 0; g < gauss_per_element; ++g) fill(e * gauss_per_element + g);
      }
    } else {
      for (std::size_t q = 0; q < ng; ++q) fill(q);
    }
    return out;
  }

  const Material material = material_at(model_->problem, model_->grid, mu);
  std::vector<std::size_t> all;
  if (!elements) {
    all.resize(model_->problem.mesh.n_elements());
    for (std::size_t e = 0; e < all.size(); ++e) all[e] = e;
    elements = &all;
  }
  for (std::size_t s = 0; s <= step; ++s) {
    const Eigen::VectorXd du = step_increment(st, s);
    const StepLoad load = step_load(*system_, s, model_->grid, mu);
    for (auto e : *elements) {
      for (std::size_t g = 0; g < gauss_per_element; ++g) {
        PointState& ps = out[e * gauss_per_element + g];
        const auto rm = return_mapping(material, mechanical_strain_increment(*system_, e, g, du, load), ps);
        ps.stress = rm.stress;
        for (int c = 0; c < 6; ++c) ps.eps_p[c] += rm.delta_eps_p[c];
        ps.p_eq = rm.p_eq;
      }
    }
  }
  return out;
}

DenseTensor RomPredictor::evaluate(const std::vector<double>& mu, std::size_t step, Field field,
                                   PredictMethod method) const {
  if (field == Field::displacement) {
    const Eigen::VectorXd u = displacement(mu, step);
    return DenseTensor({system_->mesh().n_nodes(), 3}, std::vector<double>(u.data(), u.data() + u.size()));
  }
  const auto pts = states(mu, step, method);
  const std::size_t ng = pts.size();
  if (field == Field::stress || field == Field::eps_p) {
    DenseTensor out({ng, 6});
    for (std::size_t q = 0; q < ng; ++q) {
      for (std::size_t c = 0; c < 6; ++c) out[q * 6 + c] = field == Field::stress ? pts[q].stress[c] : pts[q].eps_p[c];
    }
    return out;
  }
  DenseTensor out({ng});
  for (std::size_t q = 0; q < ng; ++q) out[q] = field == Field::p_eq ? pts[q].p_eq : von_mises(pts[q].stress);
  return out;
}

std::vector<Voigt> derive_stress(const FeSystem& system, const Eigen::VectorXd& u, const std::vector<Voigt>& eps_p,
                                 const Eigen::VectorXd& theta, double alpha) {
  const auto& mesh = system.mesh();
  if (eps_p.size() != mesh.n_gauss()) fail(ErrorKind::numeric, "derive_stress: one plastic strain per Gauss point required");
  if (static_cast<std::size_t>(u.size()) != mesh.n_dofs()) fail(ErrorKind::numeric, "derive_stress: displacement size mismatch");
  std::vector<Voigt> out(mesh.n_gauss());
  using Vec6 = Eigen::Matrix<double, 6, 1>;
  for (std::size_t e = 0; e < mesh.n_elements(); ++e) {
    const auto nodes = mesh.element_nodes(e);
    for (std::size_t g = 0; g < gauss_per_element; ++g) {
      const std::size_t q = e * gauss_per_element + g;
      Voigt eps = system.strain(e, g, u);
      for (int c = 0; c < 6; ++c) eps[c] -= eps_p[q][c];
      if (theta.size() > 0 && alpha != 0.0) {
        double th = 0.0;
        for (std::size_t a = 0; a < 8; ++a) th += system.shape_values()[g][a] * theta(static_cast<Eigen::Index>(nodes[a]));
        for (int c = 0; c < 3; ++c) eps[c] -= alpha * th;
      }
      const Vec6 s = system.elastic() * Eigen::Map<const Vec6>(eps.data());
      for (int c = 0; c < 6; ++c) out[q][c] = s(c);
    }
  }
  return out;
}

Container rom_model_container(const RomModel& m) {
  Container c;
  c.set("kind", "rom");
  const auto& mesh = m.problem.mesh;
  c.set("mesh_nodes", join({mesh.nodes[0], mesh.nodes[1], mesh.nodes[2]}));
  c.set("steps", std::to_string(m.steps.size()));
  put_axes(c, m.grid);
  c.add_bytes("problem", problem_to_json(m.problem));
  c.add_bytes("rom_config", rom_config_to_json(m.config));
  for (std::size_t s = 0; s < m.steps.size(); ++s) {
    const std::string p = "step." + std::to_string(s) + ".";
    const RomStepModel& sm = m.steps[s];
    const RomStepReport& r = sm.report;
    c.add_u64(p + "meta", {sm.expansion.size(), sm.load_terms, sm.extended.size(), r.separated_modes,
                           r.extended_modes, r.outer_iterations, r.converged ? 1U : 0U, r.mode_cap_hit ? 1U : 0U,
                           r.plastic_pairs});
    c.add_f64(p + "last_ratio", {r.last_ratio});
    c.add_u64(p + "mode_iterations", to_u64(r.mode_iterations));
    put_factors(c, p + "factors", sm.expansion);
    for (std::size_t k = 0; k < sm.extended.size(); ++k) put_sparse(c, p + "ext." + std::to_string(k), sm.extended[k]);
    std::vector<std::uint64_t> region;
    for (const auto& [e, q] : sm.region.pairs) {
      region.push_back(e);
      region.push_back(q);
    }
    c.add_u64(p + "region", std::move(region));
    put_sparse(c, p + "dfpl", sm.delta_f_pl);
    c.add_f64(p + "stress", m.stress.at(s).storage());
    c.add_f64(p + "eps_p", m.eps_p.at(s).storage());
    c.add_f64(p + "p_eq", m.p_eq.at(s).storage());
  }
  return c;
}

RomModel rom_model_from_container(const Container& c, const std::string& source) {
  check_kind(c, "rom", source);
  RomModel m;
  try {
    m.problem = problem_from_json(c.bytes("problem"));
    m.config = rom_config_from_json(c.bytes("rom_config"));
  } catch (const Error& e) {
    if (e.kind() == ErrorKind::io) throw;
    fail(ErrorKind::io, source + ": stored problem is invalid: " + e.what());
  }
  m.grid = get_axes(c, source);
  const auto& mesh = m.problem.mesh;
  if (parse_shape(c.get("mesh_nodes"), source) != Shape{mesh.nodes[0], mesh.nodes[1], mesh.nodes[2]}) {
    fail(ErrorKind::io, source + ": mesh header disagrees with the stored problem");
  }
  const std::size_t n_steps = get_count(c, "steps", source);
  Shape full{mesh.n_dofs()};
  for (auto s : m.grid.shape()) full.push_back(s);
  Shape s6 = m.grid.shape();
  s6.push_back(mesh.n_gauss());
  Shape s1 = s6;
  s6.push_back(6);
  auto dense = [&](const std::string& name, const Shape& shape) {
    std::vector<double> v = c.f64(name);
    std::size_t n = 1;
    for (auto x : shape) n *= x;
    if (v.size() != n) fail(ErrorKind::io, source + ": block '" + name + "' has the wrong length");
    return DenseTensor(shape, std::move(v));
  };
  for (std::size_t s = 0; s < n_steps; ++s) {
    const std::string p = "step." + std::to_string(s) + ".";
    const auto& meta = c.u64(p + "meta");
    if (meta.size() != 9) fail(ErrorKind::io, source + ": block '" + p + "meta' has the wrong length");
    RomStepModel sm;
    sm.expansion = get_factors(c, p + "factors", full, meta[0], source);
    sm.load_terms = meta[1];
    for (std::size_t k = 0; k < meta[2]; ++k) sm.extended.push_back(get_sparse(c, p + "ext." + std::to_string(k), full, source));
    sm.report.separated_modes = meta[3];
    sm.report.extended_modes = meta[4];
    sm.report.outer_iterations = meta[5];
    sm.report.converged = meta[6] != 0;
    sm.report.mode_cap_hit = meta[7] != 0;
    sm.report.plastic_pairs = meta[8];
    const auto& ratio = c.f64(p + "last_ratio");
    if (ratio.size() != 1) fail(ErrorKind::io, source + ": block '" + p + "last_ratio' has the wrong length");
    sm.report.last_ratio = ratio[0];
    sm.report.mode_iterations = to_size(c.u64(p + "mode_iterations"));
    const auto& region = c.u64(p + "region");
    if (region.size() % 2) fail(ErrorKind::io, source + ": block '" + p + "region' has odd length");
    for (std::size_t i = 0; i < region.size(); i += 2) sm.region.pairs.emplace_back(region[i], region[i + 1]);
    sm.delta_f_pl = get_sparse(c, p + "dfpl", full, source);
    m.steps.push_back(std::move(sm));
    m.stress.push_back(dense(p + "stress", s6));
    m.eps_p.push_back(dense(p + "eps_p", s6));
    m.p_eq.push_back(dense(p + "p_eq", s1));
  }
  return m;
}

void save_rom_model(const std::string& path, const RomModel& model) { rom_model_container(model).save(path); }

RomModel load_rom_model(const std::string& path) { return rom_model_from_container(Container::load(path), path); }

}  // namespace xtd
