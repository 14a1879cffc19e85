#include <chrono>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <memory>
#include <sstream>
#include <string>

#include <CLI11.hpp>

#include "xtd/benchmarks.hpp"
#include "xtd/config.hpp"
#include "xtd/container.hpp"
#include "xtd/decomp.hpp"
#include "xtd/error.hpp"
#include "xtd/fem.hpp"
#include "xtd/parallel.hpp"
#include "xtd/predict.hpp"
#include "xtd/rom.hpp"
#include "xtd/uq_design.hpp"

using namespace xtd;

namespace {

void write_text(const std::string& path, const std::string& text) {
  if (path.empty()) return;
  const std::string tmp = path + ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) fail(ErrorKind::io, "cannot write '" + path + "'");
    out << text;
    if (!out) fail(ErrorKind::io, "write failed for '" + path + "'");
  }
  std::error_code ec;
  std::filesystem::rename(tmp, path, ec);
  if (ec) fail(ErrorKind::io, "cannot write '" + path + "': " + ec.message());
}

void require_output(const std::string& path, const std::string& key) {
  if (path.empty()) fail(ErrorKind::config, "config: output." + key + " is required");
}

double elapsed(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

// "sigma_y=650MPa,H=40e9" -> values in grid axis order.
std::vector<double> parse_mu(const std::string& text, const ParameterGrid& grid) {
  std::vector<double> mu(grid.order());
  std::vector<bool> seen(grid.order(), false);
  std::istringstream in(text);
  std::string item;
  while (std::getline(in, item, ',')) {
    const auto eq = item.find('=');
    if (eq == std::string::npos) fail(ErrorKind::config, "--mu: expected key=value, got '" + item + "'");
    const std::string key = item.substr(0, eq);
    const std::string val = item.substr(eq + 1);
    char* end = nullptr;
    const double v = std::strtod(val.c_str(), &end);
    if (end == val.c_str()) fail(ErrorKind::config, "--mu: bad value for '" + key + "'");
    const std::size_t a = grid.axis_index(key);
    mu[a] = v * unit_scale(std::string(end));
    seen[a] = true;
  }
  for (std::size_t a = 0; a < grid.order(); ++a) {
    if (!seen[a]) fail(ErrorKind::config, "--mu: missing value for axis '" + grid.axes()[a].name + "'");
  }
  return mu;
}

std::array<double, 3> parse_point(const std::string& text) {
  std::array<double, 3> p{};
  std::istringstream in(text);
  std::string tok;
  for (int d = 0; d < 3; ++d) {
    if (!std::getline(in, tok, ',')) fail(ErrorKind::config, "--line: points need three coordinates");
    p[d] = parse_double(tok, "--line");
  }
  return p;
}

int fit_data(const std::string& data_path, const std::string& config_path) {
  const RunConfig cfg = load_run_config(config_path);
  require_output(cfg.output.model, "model");
  const auto fields = load_fields(data_path);
  const DenseTensor* data = nullptr;
  if (fields.count("data")) {
    data = &fields.at("data");
  } else if (fields.size() == 1) {
    data = &fields.begin()->second;
  } else {
    fail(ErrorKind::io, data_path + ": expected a field named 'data'");
  }
  DataModelBundle bundle;
  bundle.grid = cfg.grid ? *cfg.grid : index_grid(data->shape());
  if (bundle.grid.shape() != data->shape()) fail(ErrorKind::config, "grid shape does not match the data tensor");
  const auto t0 = std::chrono::steady_clock::now();
  bundle.model = cfg.cp_only ? cp_fit(*data, cfg.fit) : xtd_fit(*data, cfg.fit);
  const std::string report = std::string(cfg.cp_only ? "CP fit\n" : "XTD fit\n") + format_fit_report(bundle.model);
  save_data_model(cfg.output.model, bundle);
  write_text(cfg.output.report, report);
  std::cout << report << "time " << elapsed(t0) << " s\n";
  return bundle.model.report.converged ? 0 : static_cast<int>(ErrorKind::not_converged);
}

int rom_train_cmd(const std::string& config_path) {
  const RunConfig cfg = load_run_config(config_path);
  if (!cfg.problem || !cfg.grid) fail(ErrorKind::config, "rom-train needs 'problem' and 'grid'");
  require_output(cfg.output.model, "model");
  const auto t0 = std::chrono::steady_clock::now();
  const RomModel model = rom_train(*cfg.problem, *cfg.grid, cfg.rom);
  const std::string report = format_training_report(model);
  save_rom_model(cfg.output.model, model);
  write_text(cfg.output.report, report);
  std::cout << report << "time " << elapsed(t0) << " s\n";
  return 0;
}

int sweep_oracle(const std::string& config_path) {
  const RunConfig cfg = load_run_config(config_path);
  if (!cfg.problem || !cfg.grid) fail(ErrorKind::config, "sweep-oracle needs 'problem' and 'grid'");
  require_output(cfg.output.data, "data");
  const auto t0 = std::chrono::steady_clock::now();
  const FeSystem system(*cfg.problem);
  const SweepOutput out = fe_parametric_sweep(system, *cfg.grid);
  save_fields(cfg.output.data, {{"displacement", out.displacement}});
  std::ostringstream report;
  report << "oracle sweep: " << cfg.grid->size() << " grid points, " << cfg.problem->n_steps << " steps, "
         << system.n_dofs() << " dofs\n";
  std::size_t max_it = 0;
  for (const auto& t : out.points) {
    for (const auto& r : t.reports) max_it = std::max(max_it, r.iterations);
  }
  report << "max Newton iterations per step " << max_it << "\n";
  write_text(cfg.output.report, report.str());
  std::cout << report.str() << "time " << elapsed(t0) << " s\n";
  return 0;
}

int predict_cmd(const std::string& model_path, const std::string& mu_text, std::size_t step, const std::string& field,
                const std::string& method, const std::string& out_path, const std::string& line,
                std::size_t samples, const std::string& line_fields) {
  const Container c = Container::load(model_path);
  const std::string kind = container_kind(c);
  if (kind == "data") {
    const DataModelBundle b = data_model_from_container(c, model_path);
    std::printf("%.17g\n", evaluate_data(b, parse_mu(mu_text, b.grid)));
    return 0;
  }
  auto model = std::make_shared<RomModel>(rom_model_from_container(c, model_path));
  const RomPredictor predictor(model);
  const std::vector<double> mu = parse_mu(mu_text, model->grid);
  const PredictMethod pm = parse_method(method);
  if (!line.empty()) {
    const auto colon = line.find(':');
    if (colon == std::string::npos) fail(ErrorKind::config, "--line: expected ax,ay,az:bx,by,bz");
    LineObservable obs;
    obs.a = parse_point(line.substr(0, colon));
    obs.b = parse_point(line.substr(colon + 1));
    obs.samples = samples;
    obs.step = step;
    obs.method = pm;
    obs.fields.clear();
    std::istringstream in(line_fields);
    std::string f;
    while (std::getline(in, f, ',')) obs.fields.push_back(f);
    const Curve curve = extract_line_observable(predictor, mu, obs);
    if (out_path.empty()) {
      std::cout << format_curve(curve);
    } else {
      save_curve(out_path, curve);
    }
    return 0;
  }
  const Field f = parse_field(field);
  const DenseTensor t = predictor.evaluate(mu, step, f, pm);
  if (!out_path.empty()) {
    save_fields(out_path, {{field_name(f), t}});
  }
  double lo = 0.0, hi = 0.0;
  if (t.size()) {
    lo = *std::min_element(t.storage().begin(), t.storage().end());
    hi = *std::max_element(t.storage().begin(), t.storage().end());
  }
  std::cout << field_name(f) << " at step " << step << ": " << t.size() << " values, min " << format_double(lo)
            << ", max " << format_double(hi) << "\n";
  return 0;
}

int uq_cmd(const std::string& model_path, const std::string& config_path) {
  const UqRunConfig cfg = parse_uq_config(read_text_file(config_path));
  auto model = std::make_shared<RomModel>(load_rom_model(model_path));
  const RomPredictor predictor(model);
  const McResult r = mc_propagate(predictor, cfg.mc, cfg.line);
  save_curve(cfg.mean_csv, r.mean);
  save_curve(cfg.std_csv, r.std);
  std::cout << "samples " << cfg.mc.n_samples << ", clamped draws " << r.clamped << " (fraction "
            << r.clamp_fraction << "), evaluation " << r.seconds << " s\n";
  return 0;
}

int calibrate_cmd(const std::string& model_path, const std::string& target_path, const std::string& config_path) {
  CalibrationRunConfig cfg = parse_calibration_config(read_text_file(config_path));
  const Curve target = load_curve(target_path);
  auto& pb = cfg.problem;
  pb.target_mean.s = pb.target_std.s = target.s;
  for (const auto& f : pb.observable.fields) {
    auto col = [&](const std::string& name) -> const std::vector<double>& {
      const auto it = std::find(target.names.begin(), target.names.end(), name);
      if (it == target.names.end()) fail(ErrorKind::config, target_path + ": missing column '" + name + "'");
      return target.values[static_cast<std::size_t>(it - target.names.begin())];
    };
    pb.target_mean.names.push_back(f);
    pb.target_mean.values.push_back(col(f + "_mean"));
    pb.target_std.names.push_back(f);
    pb.target_std.values.push_back(col(f + "_std"));
  }
  auto model = std::make_shared<RomModel>(load_rom_model(model_path));
  const RomPredictor predictor(model);
  const CalibrationResult r = calibrate(predictor, pb);
  const std::string report = format_calibration_report(pb, r);
  Curve trace;
  trace.names = {"best_objective"};
  trace.values.resize(1);
  for (std::size_t i = 0; i < r.trace.size(); ++i) {
    trace.s.push_back(static_cast<double>(i + 1));
    trace.values[0].push_back(r.trace[i]);
  }
  std::string csv = "parameter,mean,std\n";
  for (std::size_t j = 0; j < pb.axes.size(); ++j) {
    csv += pb.axes[j] + "," + format_double(r.hyper[2 * j]) + "," + format_double(r.hyper[2 * j + 1]) + "\n";
  }
  write_text(cfg.csv, csv);
  if (!cfg.trace.empty()) save_curve(cfg.trace, trace);
  write_text(cfg.report, report);
  std::cout << report;
  return r.budget_exhausted ? static_cast<int>(ErrorKind::not_converged) : 0;
}

int bench_appendix_a(const std::string& csv) {
  const AppendixAResult r = run_appendix_a();
  std::cout << format_appendix_a(r);
  write_text(csv, appendix_a_csv(r));
  return 0;
}

int bench_example1(const std::string& csv, const std::string& method) {
  Example1Options opt;
  opt.method = parse_method(method);
  const Example1Result r = run_example1_mini(opt);
  std::cout << format_example1(r, opt.method);
  write_text(csv, example1_csv(r));
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"xtd: extended tensor decomposition and parametric plasticity ROM"};
  app.require_subcommand(1);
  int threads = 0;
  app.add_option("--threads", threads, "worker threads (overrides XTD_THREADS)")->check(CLI::PositiveNumber);

  std::string data_file, config, model, target;
  auto* fit = app.add_subcommand("fit-data", "fit an XTD or CP model to a dense tensor field file");
  fit->add_option("data-file", data_file)->required();
  fit->add_option("config", config)->required();

  auto* train = app.add_subcommand("rom-train", "train a parametric ROM");
  train->add_option("config", config)->required();

  auto* sweep = app.add_subcommand("sweep-oracle", "brute-force FE solves over the parameter grid");
  sweep->add_option("config", config)->required();

  std::string mu, field = "von_mises", method = "snapshot", out, line, line_fields = "sxx,syy";
  std::size_t step = 0, samples = 25;
  auto* pred = app.add_subcommand("predict", "evaluate a model at a parameter point");
  pred->add_option("model", model)->required();
  pred->add_option("--mu", mu, "k=v,... (units: Pa, kPa, MPa, GPa, m, mm)")->required();
  pred->add_option("--step", step, "step index, from 0");
  pred->add_option("--field", field, "displacement, stress, von_mises, p_eq, eps_p");
  pred->add_option("--method", method, "snapshot or replay");
  pred->add_option("--out", out, "field file (or CSV with --line)");
  pred->add_option("--line", line, "ax,ay,az:bx,by,bz curve export");
  pred->add_option("--samples", samples, "points on the line");
  pred->add_option("--fields", line_fields, "curve columns");

  auto* uq = app.add_subcommand("uq", "Monte Carlo propagation through a ROM");
  uq->add_option("model", model)->required();
  uq->add_option("uq-config", config)->required();

  auto* cal = app.add_subcommand("calibrate", "identify input distributions from target curves");
  cal->add_option("model", model)->required();
  cal->add_option("target", target)->required();
  cal->add_option("cal-config", config)->required();

  std::string csv, bench_method = "replay";
  auto* bench = app.add_subcommand("bench", "desk-scale benchmarks");
  bench->require_subcommand(1);
  auto* bench_a = bench->add_subcommand("appendix-a", "four-bump data: CP vs XTD");
  bench_a->add_option("--csv", csv, "also write the table as CSV");
  auto* bench_e = bench->add_subcommand("example1-mini", "miniature cyclic plasticity block: oracle, ROM, errors");
  bench_e->add_option("--csv", csv, "also write the table as CSV");
  bench_e->add_option("--method", bench_method, "snapshot or replay");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    std::cerr << "error[config]: " << e.what() << "\n";
    return static_cast<int>(ErrorKind::config);
  }

  try {
    if (threads > 0) set_thread_count(static_cast<std::size_t>(threads));
    if (*fit) return fit_data(data_file, config);
    if (*train) return rom_train_cmd(config);
    if (*sweep) return sweep_oracle(config);
    if (*pred) return predict_cmd(model, mu, step, field, method, out, line, samples, line_fields);
    if (*uq) return uq_cmd(model, config);
    if (*cal) return calibrate_cmd(model, target, config);
    if (*bench_a) return bench_appendix_a(csv);
    if (*bench_e) return bench_example1(csv, bench_method);
  } catch (const Error& e) {
    std::cerr << "error[" << to_string(e.kind()) << "]: " << e.what() << "\n";
    return static_cast<int>(e.kind());
  } catch (const std::exception& e) {
    std::cerr << "error[numeric]: " << e.what() << "\n";
    return static_cast<int>(ErrorKind::numeric);
  }
  return 0;
}
