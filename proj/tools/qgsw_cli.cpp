#include <CLI11.hpp>

#include <cstdlib>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>

#include "qgsw/runner.hpp"

namespace {

struct Flags {
  std::optional<std::string> config;
  std::optional<std::string> lambda;
  std::optional<std::string> b;
  std::optional<std::string> n;
  std::optional<std::string> m;
  std::optional<int> window;
  std::optional<int> grid_size;
  std::optional<int> trunc;
  std::optional<double> s_max;
  std::optional<int> steps;
  std::optional<std::string> sign;
  std::optional<std::string> out;
  std::optional<std::string> format;
  std::optional<int> jobs;
  std::optional<double> tol;
  std::optional<std::string> fault;
};

void add_options(CLI::App* app, Flags& f) {
  app->add_option("--config", f.config, "JSON configuration file");
  app->add_option("--lambda", f.lambda, "value or start:stop:count");
  app->add_option("--b", f.b, "value or start:stop:count, strictly inside (0,1)");
  app->add_option("--n", f.n, "orders, e.g. 1:20, N:N+10, N0-1");
  app->add_option("--m", f.m, "folds, e.g. 5 or N+2");
  app->add_option("--window", f.window, "monotonicity window for the threshold search");
  app->add_option("--grid-size", f.grid_size, "quadrature nodes per interface");
  app->add_option("--trunc", f.trunc, "retained Fourier modes per interface");
  app->add_option("--s-max", f.s_max, "largest branch amplitude");
  app->add_option("--steps", f.steps, "continuation steps");
  app->add_option("--sign", f.sign, "plus, minus or both");
  app->add_option("--out", f.out, "output directory");
  app->add_option("--format", f.format, "csv or json");
  app->add_option("--jobs", f.jobs, "worker threads, 0 for all cores");
  app->add_option("--tol", f.tol, "Newton tolerance");
  app->add_option("--inject-fault", f.fault)->group("");
}

std::string read_file(const std::string& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw qgsw::cli::ConfigError("config", "cannot read '" + path + "'");
  std::ostringstream os;
  os << is.rdbuf();
  return os.str();
}

qgsw::cli::RunConfig build_config(qgsw::cli::Command cmd, const Flags& f) {
  using namespace qgsw::cli;
  RunConfig c;
  if (f.config) c = apply_json_config(read_file(*f.config), c);
  c.command = cmd;
  if (const char* env = std::getenv("QGSW_OUTPUT_DIR"); env && *env) c.out_dir = env;
  if (f.lambda) c.lambda = parse_grid("lambda", *f.lambda);
  if (f.b) c.b = parse_grid("b", *f.b);
  if (f.n) c.n_range = *f.n;
  if (f.m) c.m_range = *f.m;
  if (f.window) c.window = *f.window;
  if (f.grid_size) c.grid_size = *f.grid_size;
  if (f.trunc) c.trunc = *f.trunc;
  if (f.s_max) c.s_max = *f.s_max;
  if (f.steps) c.steps = *f.steps;
  if (f.sign) c.signs = parse_signs("sign", *f.sign);
  if (f.out) c.out_dir = *f.out;
  if (f.format) c.format = parse_format("format", *f.format);
  if (f.jobs) c.jobs = *f.jobs;
  if (f.tol) c.tol = *f.tol;
  if (f.fault) {
    if (*f.fault != "reverse-inner-orientation") {
      throw ConfigError("inject-fault", "unknown fault '" + *f.fault + "'");
    }
    c.fault = Fault::ReverseInnerOrientation;
  }
  return c;
}

}  // namespace

int main(int argc, char** argv) {
  using namespace qgsw::cli;
  CLI::App app{"Doubly-connected V-states of the QGSW equations"};
  app.require_subcommand(1);
  Flags flags;
  for (const char* name : {"spectrum", "eigen", "branch", "verify", "limits"}) {
    add_options(app.add_subcommand(name), flags);
  }
  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kExitOk : kExitValidation;
  }

  try {
    const Command cmd = parse_command(app.get_subcommands().front()->get_name());
    const RunConfig config = build_config(cmd, flags);
    const RunResult result = run(config);
    if (result.exit_code == kExitValidation) {
      std::cerr << result.message << "\n";
      return result.exit_code;
    }
    write_outputs(result, config.out_dir);
    (result.exit_code == kExitOk ? std::cout : std::cerr) << result.message << "\n";
    for (const auto& f : result.files) std::cout << "wrote " << config.out_dir << "/" << f.name << "\n";
    return result.exit_code;
  } catch (const ConfigError& e) {
    std::cerr << "validation error: " << e.what() << "\n";
    return kExitValidation;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitValidation;
  }
}
