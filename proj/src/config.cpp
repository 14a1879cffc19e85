#include "xtd/config.hpp"

#include <filesystem>
#include <fstream>
#include <set>
#include <sstream>

#include <json.hpp>

#include "xtd/container.hpp"
#include "xtd/error.hpp"

namespace xtd {

using nlohmann::json;

std::string read_text_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) fail(ErrorKind::io, "cannot open '" + path + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

double unit_scale(const std::string& unit) {
  if (unit.empty() || unit == "Pa" || unit == "m" || unit == "1") return 1.0;
  if (unit == "kPa") return 1e3;
  if (unit == "MPa") return 1e6;
  if (unit == "GPa") return 1e9;
  if (unit == "mm") return 1e-3;
  fail(ErrorKind::config, "unknown unit '" + unit + "'");
}

std::string si_unit(const std::string& unit) {
  unit_scale(unit);
  if (unit.find("Pa") != std::string::npos) return "Pa";
  if (unit == "m" || unit == "mm") return "m";
  return "";
}

namespace {

void check_keys(const json& obj, const std::string& where, std::initializer_list<const char*> allowed) {
  if (!obj.is_object()) fail(ErrorKind::config, where + ": expected an object");
  std::set<std::string> ok(allowed.begin(), allowed.end());
  for (auto it = obj.begin(); it != obj.end(); ++it) {
    if (!ok.count(it.key())) fail(ErrorKind::config, where + ": unknown key '" + it.key() + "'");
  }
}

template <typename T>
T get(const json& obj, const char* key, const std::string& where) {
  if (!obj.contains(key)) fail(ErrorKind::config, where + ": missing key '" + key + "'");
  try {
    return obj.at(key).get<T>();
  } catch (const json::exception& e) {
    fail(ErrorKind::config, where + "." + key + ": " + e.what());
  }
}

template <typename T>
T get_or(const json& obj, const char* key, T fallback, const std::string& where) {
  return obj.contains(key) ? get<T>(obj, key, where) : fallback;
}

std::vector<std::size_t> node_set(const json& j, const StructuredHexMesh& mesh, const std::string& where) {
  const bool has_face = j.contains("face");
  const bool has_nodes = j.contains("nodes");
  if (has_face == has_nodes) fail(ErrorKind::config, where + ": give exactly one of 'face' or 'nodes'");
  if (has_face) return mesh.face_nodes(get<std::string>(j, "face", where));
  std::vector<std::size_t> out;
  for (const auto& ijk : get<std::vector<std::vector<std::size_t>>>(j, "nodes", where)) {
    if (ijk.size() != 3) fail(ErrorKind::config, where + ": node entries are [i, j, k]");
    for (int a = 0; a < 3; ++a) {
      if (ijk[a] >= mesh.nodes[a]) fail(ErrorKind::config, where + ": node index out of range");
    }
    out.push_back(mesh.node(ijk[0], ijk[1], ijk[2]));
  }
  return out;
}

FeProblem parse_problem(const json& j, const std::string& base_dir) {
  const std::string w = "problem";
  check_keys(j, w, {"mesh", "material", "steps", "dirichlet", "tractions", "thermal"});
  FeProblem p;
  const json& m = j.at("mesh");
  check_keys(m, w + ".mesh", {"nodes", "lengths"});
  const auto nodes = get<std::vector<std::size_t>>(m, "nodes", w + ".mesh");
  const auto lengths = get<std::vector<double>>(m, "lengths", w + ".mesh");
  if (nodes.size() != 3 || lengths.size() != 3) fail(ErrorKind::config, "problem.mesh: need 3 node counts and 3 lengths");
  p.mesh.nodes = {nodes[0], nodes[1], nodes[2]};
  p.mesh.lengths = {lengths[0], lengths[1], lengths[2]};
  p.mesh.validate();

  const json& mat = j.at("material");
  check_keys(mat, w + ".material", {"E", "nu", "sigma_y", "hardening", "H", "n"});
  p.material.youngs_modulus = get<double>(mat, "E", w + ".material");
  p.material.poisson = get<double>(mat, "nu", w + ".material");
  p.material.sigma_y = get<double>(mat, "sigma_y", w + ".material");
  p.material.hardening_modulus = get<double>(mat, "H", w + ".material");
  const auto kind = get_or<std::string>(mat, "hardening", "linear", w + ".material");
  if (kind == "linear") {
    p.material.hardening = Hardening::linear;
    if (mat.contains("n")) fail(ErrorKind::config, "problem.material: 'n' only applies to power hardening");
  } else if (kind == "power") {
    p.material.hardening = Hardening::power;
    p.material.exponent = get<double>(mat, "n", w + ".material");
  } else {
    fail(ErrorKind::config, "problem.material.hardening must be 'linear' or 'power'");
  }
  p.n_steps = get<std::size_t>(j, "steps", w);

  if (j.contains("dirichlet")) {
    std::size_t idx = 0;
    for (const auto& d : j.at("dirichlet")) {
      const std::string wd = w + ".dirichlet[" + std::to_string(idx++) + "]";
      check_keys(d, wd, {"name", "face", "nodes", "components", "increments", "amplitude_axis"});
      const auto set = node_set(d, p.mesh, wd);
      const auto comps = get<std::vector<int>>(d, "components", wd);
      const auto inc = get_or<std::vector<double>>(d, "increments", std::vector<double>(p.n_steps, 0.0), wd);
      for (int c : comps) {
        DirichletBC bc;
        bc.name = get_or<std::string>(d, "name", "dirichlet" + std::to_string(idx - 1), wd) + "." + std::to_string(c);
        bc.nodes = set;
        bc.component = c;
        bc.increments = inc;
        bc.amplitude_axis = get_or<std::string>(d, "amplitude_axis", "", wd);
        p.dirichlet.push_back(std::move(bc));
      }
    }
  }
  if (j.contains("tractions")) {
    std::size_t idx = 0;
    for (const auto& t : j.at("tractions")) {
      const std::string wt = w + ".tractions[" + std::to_string(idx++) + "]";
      check_keys(t, wt, {"name", "face", "component", "increments", "amplitude_axis"});
      TractionLoad load;
      load.name = get_or<std::string>(t, "name", "traction" + std::to_string(idx - 1), wt);
      load.face = get<std::string>(t, "face", wt);
      load.component = get<int>(t, "component", wt);
      load.increments = get<std::vector<double>>(t, "increments", wt);
      load.amplitude_axis = get_or<std::string>(t, "amplitude_axis", "", wt);
      p.tractions.push_back(std::move(load));
    }
  }
  if (j.contains("thermal")) {
    const json& t = j.at("thermal");
    check_keys(t, w + ".thermal", {"alpha", "field_file", "temperature", "amplitude_axis"});
    ThermalLoad th;
    th.alpha = get<double>(t, "alpha", w + ".thermal");
    th.amplitude_axis = get_or<std::string>(t, "amplitude_axis", "", w + ".thermal");
    if (t.contains("field_file") == t.contains("temperature")) {
      fail(ErrorKind::config, "problem.thermal: give exactly one of 'field_file' or 'temperature'");
    }
    if (t.contains("temperature")) {
      th.temperature = get<std::vector<std::vector<double>>>(t, "temperature", w + ".thermal");
    } else {
      std::filesystem::path path = get<std::string>(t, "field_file", w + ".thermal");
      if (path.is_relative()) path = std::filesystem::path(base_dir) / path;
      const auto fields = load_fields(path.string());
      auto it = fields.find("temperature");
      if (it == fields.end()) fail(ErrorKind::config, "thermal field file has no 'temperature' field");
      const DenseTensor& temp = it->second;
      if (temp.order() != 2) fail(ErrorKind::config, "temperature field must have shape [steps, nodes]");
      for (std::size_t s = 0; s < temp.shape()[0]; ++s) {
        th.temperature.emplace_back(temp.data().begin() + static_cast<std::ptrdiff_t>(s * temp.shape()[1]),
                                    temp.data().begin() + static_cast<std::ptrdiff_t>((s + 1) * temp.shape()[1]));
      }
    }
    p.thermal = std::move(th);
  }
  p.validate();
  return p;
}

ParameterGrid parse_grid(const json& j) {
  check_keys(j, "grid", {"axes"});
  std::vector<GridAxis> axes;
  std::size_t idx = 0;
  for (const auto& a : j.at("axes")) {
    const std::string w = "grid.axes[" + std::to_string(idx++) + "]";
    check_keys(a, w, {"name", "unit", "min", "max", "count", "values"});
    GridAxis axis;
    axis.name = get<std::string>(a, "name", w);
    const auto unit = get_or<std::string>(a, "unit", "", w);
    const double scale = unit_scale(unit);
    axis.unit = si_unit(unit);
    if (a.contains("values")) {
      if (a.contains("min") || a.contains("max") || a.contains("count")) {
        fail(ErrorKind::config, w + ": give either 'values' or 'min'/'max'/'count'");
      }
      axis.values = get<std::vector<double>>(a, "values", w);
    } else {
      axis.values = ParameterGrid::linspace(get<double>(a, "min", w), get<double>(a, "max", w),
                                            get<std::size_t>(a, "count", w));
    }
    for (auto& v : axis.values) v *= scale;
    axes.push_back(std::move(axis));
  }
  if (axes.empty()) fail(ErrorKind::config, "grid: at least one axis required");
  return ParameterGrid(std::move(axes));
}

void parse_fit(const json& j, FitConfig& f, bool& cp_only) {
  const std::string w = "fit";
  check_keys(j, w, {"eps_m_initial", "eps_xtd", "stage_divisor", "enrich_count", "fixed_point_tol",
                    "fixed_point_max_iters", "max_separated_modes", "max_enrichments", "seed", "enrichment"});
  f.eps_m_initial = get_or(j, "eps_m_initial", f.eps_m_initial, w);
  f.eps_xtd = get_or(j, "eps_xtd", f.eps_xtd, w);
  f.stage_divisor = get_or(j, "stage_divisor", f.stage_divisor, w);
  if (j.contains("enrich_count")) f.enrich_count = get<std::size_t>(j, "enrich_count", w);
  f.fixed_point_tol = get_or(j, "fixed_point_tol", f.fixed_point_tol, w);
  f.fixed_point_max_iters = get_or(j, "fixed_point_max_iters", f.fixed_point_max_iters, w);
  f.max_separated_modes = get_or(j, "max_separated_modes", f.max_separated_modes, w);
  f.max_enrichments = get_or(j, "max_enrichments", f.max_enrichments, w);
  f.seed = get_or(j, "seed", f.seed, w);
  cp_only = !get_or(j, "enrichment", true, w);
  f.validate();
}

void parse_rom(const json& j, RomConfig& r) {
  const std::string w = "rom";
  check_keys(j, w, {"eps_xtd", "fixed_point_tol", "fixed_point_max_iters", "mode_tol", "max_modes_per_step",
                    "max_enrichments_per_step", "seed"});
  r.eps_xtd = get_or(j, "eps_xtd", r.eps_xtd, w);
  r.fixed_point_tol = get_or(j, "fixed_point_tol", r.fixed_point_tol, w);
  r.fixed_point_max_iters = get_or(j, "fixed_point_max_iters", r.fixed_point_max_iters, w);
  r.mode_tol = get_or(j, "mode_tol", r.mode_tol, w);
  r.max_modes_per_step = get_or(j, "max_modes_per_step", r.max_modes_per_step, w);
  r.max_enrichments_per_step = get_or(j, "max_enrichments_per_step", r.max_enrichments_per_step, w);
  r.seed = get_or(j, "seed", r.seed, w);
  r.validate();
}

json parse_json(const std::string& text, const std::string& where) {
  try {
    return json::parse(text);
  } catch (const json::parse_error& e) {
    fail(ErrorKind::config, where + ": " + e.what());
  }
}

LineObservable parse_line(const json& j) {
  const std::string w = "line";
  check_keys(j, w, {"a", "b", "samples", "fields", "step", "method"});
  LineObservable obs;
  const auto a = get<std::vector<double>>(j, "a", w);
  const auto b = get<std::vector<double>>(j, "b", w);
  if (a.size() != 3 || b.size() != 3) fail(ErrorKind::config, "line: endpoints need 3 coordinates");
  std::copy(a.begin(), a.end(), obs.a.begin());
  std::copy(b.begin(), b.end(), obs.b.begin());
  obs.samples = get_or<std::size_t>(j, "samples", obs.samples, w);
  obs.fields = get_or(j, "fields", obs.fields, w);
  if (j.contains("step")) obs.step = get<std::size_t>(j, "step", w);
  obs.method = parse_method(get_or<std::string>(j, "method", "replay", w));
  if (obs.samples == 0) fail(ErrorKind::config, "line: samples must be positive");
  return obs;
}

std::vector<RandomParam> parse_params(const json& j, const std::string& w) {
  std::vector<RandomParam> out;
  std::size_t idx = 0;
  for (const auto& p : j) {
    const std::string wp = w + "[" + std::to_string(idx++) + "]";
    check_keys(p, wp, {"axis", "mean", "std", "unit"});
    const double scale = unit_scale(get_or<std::string>(p, "unit", "", wp));
    RandomParam r;
    r.axis = get<std::string>(p, "axis", wp);
    r.mean = get<double>(p, "mean", wp) * scale;
    r.std = get<double>(p, "std", wp) * scale;
    if (!(r.std > 0.0)) fail(ErrorKind::config, wp + ": std must be positive");
    out.push_back(r);
  }
  if (out.empty()) fail(ErrorKind::config, w + ": at least one random parameter required");
  return out;
}

}  // namespace

UqRunConfig parse_uq_config(const std::string& text) {
  const json j = parse_json(text, "uq config");
  UqRunConfig rc;
  try {
    check_keys(j, "uq", {"params", "fixed", "samples", "seed", "line", "output"});
    rc.mc.params = parse_params(j.at("params"), "uq.params");
    rc.mc.fixed = get_or(j, "fixed", rc.mc.fixed, "uq");
    rc.mc.n_samples = get_or<std::size_t>(j, "samples", 63, "uq");
    rc.mc.seed = get_or<std::uint64_t>(j, "seed", 1, "uq");
    if (rc.mc.n_samples == 0) fail(ErrorKind::config, "uq: zero samples");
    rc.line = parse_line(j.at("line"));
    const json& o = j.at("output");
    check_keys(o, "uq.output", {"mean", "std"});
    rc.mean_csv = get<std::string>(o, "mean", "uq.output");
    rc.std_csv = get<std::string>(o, "std", "uq.output");
  } catch (const json::exception& e) {
    fail(ErrorKind::config, std::string("uq: ") + e.what());
  }
  return rc;
}

CalibrationRunConfig parse_calibration_config(const std::string& text) {
  const json j = parse_json(text, "calibration config");
  CalibrationRunConfig rc;
  auto& pb = rc.problem;
  try {
    check_keys(j, "calibration", {"initial", "fixed", "w1", "w2", "samples", "seed", "budget", "line", "output"});
    for (const auto& p : parse_params(j.at("initial"), "calibration.initial")) {
      pb.axes.push_back(p.axis);
      pb.initial.push_back(p.mean);
      pb.initial.push_back(p.std);
    }
    pb.fixed = get_or(j, "fixed", pb.fixed, "calibration");
    pb.w1 = get_or(j, "w1", pb.w1, "calibration");
    pb.w2 = get_or(j, "w2", pb.w2, "calibration");
    pb.n_samples = get_or<std::size_t>(j, "samples", pb.n_samples, "calibration");
    pb.seed = get_or<std::uint64_t>(j, "seed", pb.seed, "calibration");
    pb.optimizer.budget = get_or<std::size_t>(j, "budget", pb.optimizer.budget, "calibration");
    pb.observable = parse_line(j.at("line"));
    if (!(pb.w1 >= 0.0 && pb.w2 >= 0.0) || (pb.w1 == 0.0 && pb.w2 == 0.0)) {
      fail(ErrorKind::config, "calibration: weights must be non-negative and not both zero");
    }
    if (pb.n_samples == 0) fail(ErrorKind::config, "calibration: zero samples");
    const json& o = j.at("output");
    check_keys(o, "calibration.output", {"report", "csv", "trace"});
    rc.report = get<std::string>(o, "report", "calibration.output");
    rc.csv = get<std::string>(o, "csv", "calibration.output");
    rc.trace = get_or<std::string>(o, "trace", "", "calibration.output");
  } catch (const json::exception& e) {
    fail(ErrorKind::config, std::string("calibration: ") + e.what());
  }
  return rc;
}

RunConfig parse_run_config(const std::string& text, const std::string& base_dir) {
  const json j = parse_json(text, "config");
  check_keys(j, "config", {"problem", "grid", "fit", "rom", "output", "seed"});
  RunConfig rc;
  try {
    rc.seed = get_or<std::uint64_t>(j, "seed", 1, "config");
    rc.fit.seed = rc.seed;
    rc.rom.seed = rc.seed;
    if (j.contains("problem")) rc.problem = parse_problem(j.at("problem"), base_dir);
    if (j.contains("grid")) rc.grid = parse_grid(j.at("grid"));
    if (j.contains("fit")) parse_fit(j.at("fit"), rc.fit, rc.cp_only);
    if (j.contains("rom")) parse_rom(j.at("rom"), rc.rom);
    if (j.contains("output")) {
      const json& o = j.at("output");
      check_keys(o, "output", {"model", "report", "data"});
      rc.output.model = get_or<std::string>(o, "model", "", "output");
      rc.output.report = get_or<std::string>(o, "report", "", "output");
      rc.output.data = get_or<std::string>(o, "data", "", "output");
    }
    if (rc.problem && rc.grid) validate_binding(*rc.problem, *rc.grid);
  } catch (const json::exception& e) {
    fail(ErrorKind::config, std::string("config: ") + e.what());
  } catch (const Error& e) {
    if (e.kind() == ErrorKind::io) throw;
    throw Error(ErrorKind::config, e.what());
  }
  return rc;
}

RunConfig load_run_config(const std::string& path) {
  const std::string base = std::filesystem::path(path).parent_path().string();
  return parse_run_config(read_text_file(path), base.empty() ? "." : base);
}

std::string problem_to_json(const FeProblem& p) {
  json j;
  j["mesh"] = {{"nodes", {p.mesh.nodes[0], p.mesh.nodes[1], p.mesh.nodes[2]}},
               {"lengths", {p.mesh.lengths[0], p.mesh.lengths[1], p.mesh.lengths[2]}}};
  json mat = {{"E", p.material.youngs_modulus},
              {"nu", p.material.poisson},
              {"sigma_y", p.material.sigma_y},
              {"H", p.material.hardening_modulus},
              {"hardening", p.material.hardening == Hardening::linear ? "linear" : "power"}};
  if (p.material.hardening == Hardening::power) mat["n"] = p.material.exponent;
  j["material"] = mat;
  j["steps"] = p.n_steps;
  json dir = json::array();
  for (const auto& bc : p.dirichlet) {
    json nodes = json::array();
    for (auto n : bc.nodes) {
      const auto ijk = p.mesh.node_ijk(n);
      nodes.push_back({ijk[0], ijk[1], ijk[2]});
    }
    json d = {{"name", bc.name}, {"nodes", nodes}, {"components", {bc.component}}, {"increments", bc.increments}};
    if (!bc.amplitude_axis.empty()) d["amplitude_axis"] = bc.amplitude_axis;
    dir.push_back(d);
  }
  j["dirichlet"] = dir;
  json tr = json::array();
  for (const auto& t : p.tractions) {
    json d = {{"name", t.name}, {"face", t.face}, {"component", t.component}, {"increments", t.increments}};
    if (!t.amplitude_axis.empty()) d["amplitude_axis"] = t.amplitude_axis;
    tr.push_back(d);
  }
  j["tractions"] = tr;
  if (p.thermal) {
    json th = {{"alpha", p.thermal->alpha}, {"temperature", p.thermal->temperature}};
    if (!p.thermal->amplitude_axis.empty()) th["amplitude_axis"] = p.thermal->amplitude_axis;
    j["thermal"] = th;
  }
  return j.dump();
}

FeProblem problem_from_json(const std::string& text, const std::string& base_dir) {
  try {
    FeProblem p = parse_problem(parse_json(text, "problem"), base_dir);
    // Names were suffixed with the component on the way out; keep them as stored.
    const json j = json::parse(text);
    if (j.contains("dirichlet")) {
      std::size_t k = 0;
      for (const auto& d : j.at("dirichlet")) {
        if (d.contains("name") && d.at("components").size() == 1) p.dirichlet[k].name = d.at("name").get<std::string>();
        k += d.at("components").size();
      }
    }
    return p;
  } catch (const json::exception& e) {
    fail(ErrorKind::config, std::string("problem: ") + e.what());
  }
}

std::string rom_config_to_json(const RomConfig& c) {
  json j = {{"eps_xtd", c.eps_xtd},
            {"fixed_point_tol", c.fixed_point_tol},
            {"fixed_point_max_iters", c.fixed_point_max_iters},
            {"mode_tol", c.mode_tol},
            {"max_modes_per_step", c.max_modes_per_step},
            {"max_enrichments_per_step", c.max_enrichments_per_step},
            {"seed", c.seed}};
  return j.dump();
}

RomConfig rom_config_from_json(const std::string& text) {
  RomConfig c;
  try {
    parse_rom(parse_json(text, "rom"), c);
  } catch (const json::exception& e) {
    fail(ErrorKind::config, std::string("rom: ") + e.what());
  }
  return c;
}

}  // namespace xtd
