#pragma once

// JSON run configuration. Every section is validated before any work starts
// and unknown keys are rejected.

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "xtd/decomp.hpp"
#include "xtd/fem.hpp"
#include "xtd/grid.hpp"
#include "xtd/rom.hpp"
#include "xtd/uq_design.hpp"

namespace xtd {

struct OutputConfig {
  std::string model;   // container path
  std::string report;  // text report path
  std::string data;    // field file (sweep-oracle)
};

struct RunConfig {
  std::optional<FeProblem> problem;
  std::optional<ParameterGrid> grid;
  FitConfig fit;
  RomConfig rom;
  OutputConfig output;
  std::uint64_t seed = 1;
  bool cp_only = false;  // fit-data: disable enrichment
};

// Relative paths inside the document (thermal field files) resolve against
// base_dir.
RunConfig parse_run_config(const std::string& text, const std::string& base_dir = ".");
RunConfig load_run_config(const std::string& path);

std::string problem_to_json(const FeProblem& problem);
FeProblem problem_from_json(const std::string& text, const std::string& base_dir = ".");
std::string rom_config_to_json(const RomConfig& config);
RomConfig rom_config_from_json(const std::string& text);

struct UqRunConfig {
  McConfig mc;
  LineObservable line;
  std::string mean_csv;
  std::string std_csv;
};
UqRunConfig parse_uq_config(const std::string& text);

// Targets are read separately; problem.target_mean/target_std stay empty.
struct CalibrationRunConfig {
  CalibrationProblem problem;
  std::string report;
  std::string csv;
  std::string trace;  // optional: best objective per evaluation
};
CalibrationRunConfig parse_calibration_config(const std::string& text);

// Multiplier to SI for the accepted unit labels (Pa, kPa, MPa, GPa, m, mm,
// empty). Throws a config error for anything else.
double unit_scale(const std::string& unit);
std::string si_unit(const std::string& unit);

std::string read_text_file(const std::string& path);

}  // namespace xtd
