#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <filesystem>
#include <fstream>

#include <json.hpp>

#include "xtd/config.hpp"
#include "xtd/container.hpp"
#include "xtd/error.hpp"

using namespace xtd;
using nlohmann::json;
namespace fs = std::filesystem;

namespace {

json base() {
  return json::parse(R"({
    "seed": 4,
    "problem": {
      "mesh": {"nodes": [3, 3, 2], "lengths": [2.0, 2.0, 1.0]},
      "material": {"E": 210e9, "nu": 0.3, "sigma_y": 600e6, "H": 42e9},
      "steps": 2,
      "dirichlet": [
        {"name": "base", "face": "z-", "components": [0, 1, 2]},
        {"name": "load", "nodes": [[1, 1, 1]], "components": [2], "increments": [-0.01, 0.01], "amplitude_axis": "amp"}
      ]
    },
    "grid": {"axes": [
      {"name": "sigma_y", "unit": "MPa", "min": 500, "max": 700, "count": 3},
      {"name": "amp", "values": [0.5, 1.0]}
    ]},
    "rom": {"eps_xtd": 1e-3},
    "output": {"model": "m.xtd", "report": "r.txt"}
  })");
}

ErrorKind kind_of(const std::string& text, const std::string& dir = ".") {
  try {
    parse_run_config(text, dir);
  } catch (const Error& e) {
    return e.kind();
  }
  FAIL("expected an error");
  return ErrorKind::config;
}

fs::path scratch() {
  const fs::path d = fs::temp_directory_path() / "xtd_test_config";
  fs::create_directories(d);
  return d;
}

}  // namespace

TEST_CASE("a complete run config parses with units applied") {
  const RunConfig rc = parse_run_config(base().dump());
  REQUIRE(rc.problem);
  REQUIRE(rc.grid);
  CHECK(rc.seed == 4);
  CHECK(rc.rom.seed == 4);
  CHECK(rc.grid->axes()[0].values == std::vector<double>{500e6, 600e6, 700e6});
  CHECK(rc.grid->axes()[0].unit == "Pa");
  CHECK(rc.problem->dirichlet.size() == 4);
  CHECK(rc.problem->dirichlet[0].name == "base.0");
  CHECK(rc.problem->dirichlet[0].nodes.size() == 9);
  CHECK(rc.problem->dirichlet[3].nodes == std::vector<std::size_t>{rc.problem->mesh.node(1, 1, 1)});
  CHECK(rc.problem->dirichlet[3].amplitude_axis == "amp");
  CHECK(rc.output.model == "m.xtd");
}

TEST_CASE("unit scale") {
  CHECK(unit_scale("GPa") == 1e9);
  CHECK(unit_scale("mm") == 1e-3);
  CHECK(unit_scale("") == 1.0);
  CHECK(si_unit("kPa") == "Pa");
  CHECK_THROWS_AS(unit_scale("psi"), Error);
}

TEST_CASE("unknown keys are rejected at every level") {
  for (const char* ptr : {"/extra", "/problem/extra", "/problem/mesh/extra", "/problem/material/extra",
                          "/problem/dirichlet/0/extra", "/grid/axes/1/extra", "/rom/extra", "/output/extra"}) {
    json j = base();
    j[json::json_pointer(ptr)] = 1;
    CAPTURE(ptr);
    CHECK(kind_of(j.dump()) == ErrorKind::config);
  }
}

TEST_CASE("invalid values are config errors") {
  auto bad = [](const char* ptr, json v) {
    json j = base();
    j[json::json_pointer(ptr)] = v;
    CAPTURE(ptr);
    CHECK(kind_of(j.dump()) == ErrorKind::config);
  };
  bad("/problem/material/nu", 0.5);
  bad("/problem/material/hardening", "exponential");
  bad("/problem/material/n", 0.5);
  bad("/problem/mesh/nodes", json::array({1, 3, 2}));
  bad("/problem/dirichlet/1/nodes", json::array({json::array({5, 0, 0})}));
  bad("/problem/dirichlet/1/increments", json::array({0.1}));
  bad("/problem/dirichlet/1/amplitude_axis", "nope");
  bad("/grid/axes/0/unit", "ksi");
  bad("/grid/axes/1/values", json::array({1.0, 0.5}));
  bad("/rom/eps_xtd", -1.0);
  bad("/seed", "four");
  CHECK(kind_of("{not json") == ErrorKind::config);
  // An axis that binds to nothing.
  json j = base();
  j["grid"]["axes"].push_back({{"name", "phase"}, {"values", {0, 1}}});
  CHECK(kind_of(j.dump()) == ErrorKind::config);
}

TEST_CASE("power hardening and thermal loads") {
  json j = base();
  j["problem"]["material"]["hardening"] = "power";
  j["problem"]["material"]["n"] = 0.25;
  j["problem"]["thermal"] = {{"alpha", 1.2e-5}, {"temperature", json::array({std::vector<double>(18, 10.0), std::vector<double>(18, 20.0)})}};
  const RunConfig rc = parse_run_config(j.dump());
  CHECK(rc.problem->material.hardening == Hardening::power);
  CHECK(rc.problem->material.exponent == 0.25);
  REQUIRE(rc.problem->thermal);
  CHECK(rc.problem->thermal->temperature[1][5] == 20.0);

  j["problem"]["thermal"]["temperature"][1].erase(0);
  CHECK(kind_of(j.dump()) == ErrorKind::config);
}

TEST_CASE("thermal history from a field file, relative to the config") {
  const fs::path dir = scratch();
  DenseTensor t({2, 18});
  for (std::size_t i = 0; i < t.size(); ++i) t[i] = static_cast<double>(i);
  save_fields((dir / "temp.xtd").string(), {{"temperature", t}});
  json j = base();
  j["problem"]["thermal"] = {{"alpha", 1e-5}, {"field_file", "temp.xtd"}};
  std::ofstream(dir / "run.json") << j.dump();
  const RunConfig rc = load_run_config((dir / "run.json").string());
  REQUIRE(rc.problem->thermal);
  CHECK(rc.problem->thermal->temperature[1][3] == 21.0);

  j["problem"]["thermal"]["field_file"] = "absent.xtd";
  CHECK(kind_of(j.dump(), dir.string()) == ErrorKind::io);
  save_fields((dir / "wrong.xtd").string(), {{"pressure", t}});
  j["problem"]["thermal"]["field_file"] = "wrong.xtd";
  CHECK(kind_of(j.dump(), dir.string()) == ErrorKind::config);
}

TEST_CASE("problems survive a json round trip") {
  json j = base();
  j["problem"]["tractions"] = json::array({{{"name", "p"}, {"face", "x+"}, {"component", 0}, {"increments", {1e6, 2e6}}}});
  const FeProblem p = *parse_run_config(j.dump()).problem;
  const FeProblem q = problem_from_json(problem_to_json(p));
  CHECK(problem_to_json(q) == problem_to_json(p));
  REQUIRE(q.dirichlet.size() == p.dirichlet.size());
  for (std::size_t k = 0; k < p.dirichlet.size(); ++k) {
    CHECK(q.dirichlet[k].name == p.dirichlet[k].name);
    CHECK(q.dirichlet[k].nodes == p.dirichlet[k].nodes);
  }
  const RomConfig r = rom_config_from_json(rom_config_to_json(RomConfig{}));
  CHECK(r.eps_xtd == RomConfig{}.eps_xtd);
}

TEST_CASE("uq and calibration configs") {
  const json uq = {{"params", {{{"axis", "sigma_y"}, {"mean", 600}, {"std", 60}, {"unit", "MPa"}}}},
                   {"fixed", {{"H", 42e9}}},
                   {"line", {{"a", {0, 3, 2.25}}, {"b", {6, 3, 2.25}}}},
                   {"output", {{"mean", "m.csv"}, {"std", "s.csv"}}}};
  const UqRunConfig u = parse_uq_config(uq.dump());
  CHECK(u.mc.params[0].mean == 600e6);
  CHECK(u.mc.params[0].std == 60e6);
  CHECK(u.mc.n_samples == 63);
  CHECK(u.line.samples == 25);
  CHECK(u.line.method == PredictMethod::replay);
  json bad = uq;
  bad["params"][0]["std"] = 0;
  CHECK_THROWS_AS(parse_uq_config(bad.dump()), Error);
  bad = uq;
  bad["line"]["method"] = "cubic";
  CHECK_THROWS_AS(parse_uq_config(bad.dump()), Error);

  json cal = {{"initial", {{{"axis", "sigma_y"}, {"mean", 550}, {"std", 40}, {"unit", "MPa"}}}},
              {"w1", 1.0},
              {"w2", 0.5},
              {"budget", 200},
              {"line", uq["line"]},
              {"output", {{"report", "r.txt"}, {"csv", "c.csv"}}}};
  const CalibrationRunConfig c = parse_calibration_config(cal.dump());
  CHECK(c.problem.initial == std::vector<double>{550e6, 40e6});
  CHECK(c.problem.optimizer.budget == 200);
  CHECK(c.trace.empty());
  cal["w1"] = 0.0;
  cal["w2"] = 0.0;
  CHECK_THROWS_AS(parse_calibration_config(cal.dump()), Error);
}

TEST_CASE("failed writes leave nothing behind") {
  const fs::path dir = scratch() / "writes";
  fs::remove_all(dir);
  fs::create_directories(dir);
  Container c;
  c.set("kind", "fields");
  c.add_f64("x", {1.0, 2.0});
  CHECK_THROWS_AS(c.save((dir / "missing" / "out.xtd").string()), Error);
  c.save((dir / "ok.xtd").string());
  std::size_t n = 0;
  for ([[maybe_unused]] const auto& e : fs::directory_iterator(dir)) ++n;
  CHECK(n == 1);
  CHECK(Container::load((dir / "ok.xtd").string()).f64("x") == std::vector<double>{1.0, 2.0});
}
