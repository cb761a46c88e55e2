#include "qgsw/runner.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <exception>
#include <filesystem>
#include <fstream>
#include <map>
#include <nlohmann/json.hpp>
#include <numbers>
#include <random>
#include <regex>
#include <sstream>
#include <thread>

#include "qgsw/continuation.hpp"
#include "qgsw/contour.hpp"
#include "qgsw/errors.hpp"
#include "qgsw/special_functions.hpp"

namespace qgsw::cli {

using json = nlohmann::ordered_json;
using spectrum::Branch;

namespace {

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string::npos) return "";
  const auto e = s.find_last_not_of(" \t\r\n");
  return s.substr(b, e - b + 1);
}

double parse_double(const std::string& field, const std::string& text) {
  const std::string t = trim(text);
  char* end = nullptr;
  const double v = std::strtod(t.c_str(), &end);
  if (t.empty() || end != t.c_str() + t.size()) {
    throw ConfigError(field, "'" + text + "' is not a number");
  }
  return v;
}

int parse_int(const std::string& field, const std::string& text) {
  const std::string t = trim(text);
  char* end = nullptr;
  const long v = std::strtol(t.c_str(), &end, 10);
  if (t.empty() || end != t.c_str() + t.size()) {
    throw ConfigError(field, "'" + text + "' is not an integer");
  }
  return static_cast<int>(v);
}

std::vector<std::string> split(const std::string& s, char sep) {
  std::vector<std::string> out;
  std::string cur;
  for (char c : s) {
    if (c == sep) {
      out.push_back(cur);
      cur.clear();
    } else {
      cur.push_back(c);
    }
  }
  out.push_back(cur);
  return out;
}

std::string opt_number(const std::optional<double>& v) { return v ? format_number(*v) : ""; }

std::optional<spectrum::ThresholdRecord> try_threshold(double lambda, double b, int window) {
  try {
    return spectrum::find_threshold(lambda, b, window);
  } catch (const SearchExhausted&) {
    return std::nullopt;
  }
}

json config_echo(const RunConfig& c) {
  json j;
  j["command"] = to_string(c.command);
  j["lambda"] = {{"start", c.lambda.start}, {"stop", c.lambda.stop}, {"count", c.lambda.count}};
  j["b"] = {{"start", c.b.start}, {"stop", c.b.stop}, {"count", c.b.count}};
  j["n"] = c.n_range;
  j["m"] = c.m_range;
  j["window"] = c.window;
  j["trunc"] = c.trunc;
  j["grid_size"] = c.grid_size;
  j["s_max"] = c.s_max;
  j["steps"] = c.steps;
  json signs = json::array();
  for (Branch s : c.signs) signs.push_back(spectrum::to_string(s));
  j["sign"] = signs;
  j["tol"] = c.tol;
  j["format"] = c.format == Format::Csv ? "csv" : "json";
  return j;
}

OutputFile table_file(const std::string& stem, const Table& t, Format f) {
  if (f == Format::Csv) return {stem + ".csv", render_csv(t)};
  return {stem + ".json", render_json(t)};
}

OutputFile summary_file(json summary) { return {"summary.json", summary.dump(2) + "\n"}; }

struct Cell {
  int li = 0;
  int bi = 0;
  double lambda = 0.0;
  double b = 0.0;
};

std::vector<Cell> cells_of(const RunConfig& c) {
  std::vector<Cell> cells;
  const auto ls = c.lambda.values();
  const auto bs = c.b.values();
  for (std::size_t i = 0; i < ls.size(); ++i) {
    for (std::size_t j = 0; j < bs.size(); ++j) {
      cells.push_back({static_cast<int>(i), static_cast<int>(j), ls[i], bs[j]});
    }
  }
  return cells;
}

}  // namespace

std::vector<double> GridSpec::values() const {
  if (count <= 1) return {start};
  std::vector<double> v(count);
  for (int i = 0; i < count; ++i) v[i] = start + (stop - start) * i / (count - 1);
  v.back() = stop;
  return v;
}

Command parse_command(const std::string& text) {
  if (text == "spectrum") return Command::Spectrum;
  if (text == "eigen") return Command::Eigen;
  if (text == "branch") return Command::Branch;
  if (text == "verify") return Command::Verify;
  if (text == "limits") return Command::Limits;
  throw ConfigError("command", "unknown command '" + text + "'");
}

const char* to_string(Command c) {
  switch (c) {
    case Command::Spectrum: return "spectrum";
    case Command::Eigen: return "eigen";
    case Command::Branch: return "branch";
    case Command::Verify: return "verify";
    case Command::Limits: return "limits";
  }
  return "?";
}

GridSpec parse_grid(const std::string& field, const std::string& text) {
  const auto parts = split(text, ':');
  if (parts.size() == 1) {
    const double v = parse_double(field, parts[0]);
    return {v, v, 1};
  }
  if (parts.size() == 3) {
    return {parse_double(field, parts[0]), parse_double(field, parts[1]),
            parse_int(field, parts[2])};
  }
  throw ConfigError(field, "expected a value or start:stop:count, got '" + text + "'");
}

std::vector<Branch> parse_signs(const std::string& field, const std::string& text) {
  const std::string t = trim(text);
  if (t == "plus" || t == "+") return {Branch::Plus};
  if (t == "minus" || t == "-") return {Branch::Minus};
  if (t == "both" || t == "+-" || t == "pm") return {Branch::Minus, Branch::Plus};
  throw ConfigError(field, "expected plus, minus or both, got '" + text + "'");
}

Format parse_format(const std::string& field, const std::string& text) {
  if (text == "csv") return Format::Csv;
  if (text == "json") return Format::Json;
  throw ConfigError(field, "expected csv or json, got '" + text + "'");
}

RunConfig apply_json_config(const std::string& text, RunConfig base) {
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::parse_error& e) {
    std::size_t line = 1, col = 1;
    for (std::size_t i = 0; i + 1 < e.byte && i < text.size(); ++i) {
      if (text[i] == '\n') {
        ++line;
        col = 1;
      } else {
        ++col;
      }
    }
    throw ConfigError("config", "parse error at line " + std::to_string(line) + ", column " +
                                    std::to_string(col));
  }
  if (!doc.is_object()) throw ConfigError("config", "top level must be an object");

  auto as_string = [](const std::string& key, const json& v) {
    if (!v.is_string()) throw ConfigError(key, "expected a string");
    return v.get<std::string>();
  };
  auto as_int = [](const std::string& key, const json& v) {
    if (!v.is_number_integer()) throw ConfigError(key, "expected an integer");
    return v.get<int>();
  };
  auto as_double = [](const std::string& key, const json& v) {
    if (!v.is_number()) throw ConfigError(key, "expected a number");
    return v.get<double>();
  };
  auto as_grid = [&](const std::string& key, const json& v) -> GridSpec {
    if (v.is_number()) return {v.get<double>(), v.get<double>(), 1};
    if (v.is_string()) return parse_grid(key, v.get<std::string>());
    if (v.is_object()) {
      GridSpec g;
      g.start = as_double(key + ".start", v.at("start"));
      g.stop = v.contains("stop") ? as_double(key + ".stop", v.at("stop")) : g.start;
      g.count = v.contains("count") ? as_int(key + ".count", v.at("count")) : 1;
      return g;
    }
    throw ConfigError(key, "expected a number, a start:stop:count string or an object");
  };
  auto as_orders = [&](const std::string& key, const json& v) {
    if (v.is_number_integer()) return std::to_string(v.get<int>());
    return as_string(key, v);
  };

  for (const auto& [key, v] : doc.items()) {
    if (key == "command") base.command = parse_command(as_string(key, v));
    else if (key == "lambda") base.lambda = as_grid(key, v);
    else if (key == "b") base.b = as_grid(key, v);
    else if (key == "n") base.n_range = as_orders(key, v);
    else if (key == "m") base.m_range = as_orders(key, v);
    else if (key == "window") base.window = as_int(key, v);
    else if (key == "trunc") base.trunc = as_int(key, v);
    else if (key == "grid_size") base.grid_size = as_int(key, v);
    else if (key == "s_max") base.s_max = as_double(key, v);
    else if (key == "steps") base.steps = as_int(key, v);
    else if (key == "sign") base.signs = parse_signs(key, as_string(key, v));
    else if (key == "tol") base.tol = as_double(key, v);
    else if (key == "out") base.out_dir = as_string(key, v);
    else if (key == "format") base.format = parse_format(key, as_string(key, v));
    else if (key == "jobs") base.jobs = as_int(key, v);
    else throw ConfigError(key, "unknown configuration key");
  }
  return base;
}

void validate(const RunConfig& c) {
  auto check_grid = [](const std::string& field, const GridSpec& g) {
    if (g.count < 1) throw ConfigError(field, "count must be >= 1");
    if (g.count > 10000) throw ConfigError(field, "count must be <= 10000");
  };
  check_grid("lambda", c.lambda);
  check_grid("b", c.b);
  for (double l : c.lambda.values()) {
    if (!(l > 0.0) || !std::isfinite(l)) {
      throw ConfigError("lambda", "value " + format_number(l) + " must be positive and finite");
    }
  }
  for (double b : c.b.values()) {
    if (!(b > 0.0 && b < 1.0)) {
      throw ConfigError("b", "value " + format_number(b) + " must lie strictly inside (0,1)");
    }
  }
  if (c.window < 10) throw ConfigError("window", "must be >= 10");
  if (c.trunc < 1 || c.trunc > 64) throw ConfigError("trunc", "must lie in [1,64]");
  if (c.grid_size < 32 || c.grid_size > 8192 || c.grid_size % 2 != 0) {
    throw ConfigError("grid_size", "must be even and lie in [32,8192]");
  }
  if (!(c.s_max > 0.0 && c.s_max < 0.25)) throw ConfigError("s_max", "must lie in (0,0.25)");
  if (c.steps < 1 || c.steps > 10000) throw ConfigError("steps", "must lie in [1,10000]");
  if (!(c.tol > 0.0)) throw ConfigError("tol", "must be positive");
  if (c.jobs < 0) throw ConfigError("jobs", "must be >= 0");
  if (c.signs.empty()) throw ConfigError("sign", "no branch selected");
}

bool order_expression_needs_threshold(const std::string& expr) {
  return expr.find('N') != std::string::npos;
}

std::vector<int> resolve_orders(const std::string& field, const std::string& expr,
                                const std::optional<spectrum::ThresholdRecord>& threshold) {
  static const std::regex token(R"(^\s*(N0|N|[0-9]+)\s*(?:([+-])\s*([0-9]+))?\s*$)");
  auto eval = [&](const std::string& s) {
    std::smatch m;
    if (!std::regex_match(s, m, token)) {
      throw ConfigError(field, "cannot parse order expression '" + s + "'");
    }
    int base = 0;
    if (m[1] == "N" || m[1] == "N0") {
      if (!threshold) {
        throw ConfigError(field, "'" + s + "' refers to the threshold, which was not found");
      }
      base = m[1] == "N" ? threshold->n : threshold->n0;
    } else {
      base = parse_int(field, m[1]);
    }
    if (m[2].matched) {
      const int off = parse_int(field, m[3]);
      base += (m[2] == "+") ? off : -off;
    }
    if (base < 1) throw ConfigError(field, "order '" + s + "' resolves below 1");
    return base;
  };
  std::vector<int> out;
  if (trim(expr).empty()) return out;
  for (const std::string& item : split(expr, ',')) {
    const auto bounds = split(item, ':');
    if (bounds.size() == 1) {
      out.push_back(eval(bounds[0]));
    } else if (bounds.size() == 2) {
      const int lo = eval(bounds[0]);
      const int hi = eval(bounds[1]);
      for (int n = lo; n <= hi; ++n) out.push_back(n);
    } else {
      throw ConfigError(field, "cannot parse range '" + item + "'");
    }
  }
  return out;
}

std::string format_number(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

std::string render_csv(const Table& t) {
  auto field = [](const std::string& s) {
    if (s.find_first_of(",\"\n\r") == std::string::npos) return s;
    std::string q = "\"";
    for (char c : s) {
      if (c == '"') q += '"';
      q += c;
    }
    return q + "\"";
  };
  std::ostringstream os;
  auto line = [&](const std::vector<std::string>& cells) {
    for (std::size_t i = 0; i < cells.size(); ++i) os << (i ? "," : "") << field(cells[i]);
    os << "\n";
  };
  line(t.header);
  for (const auto& r : t.rows) line(r);
  return os.str();
}

std::string render_json(const Table& t) {
  json rows = json::array();
  for (const auto& r : t.rows) {
    json row = json::array();
    for (const auto& cell : r) {
      if (cell.empty()) {
        row.push_back(nullptr);
        continue;
      }
      char* end = nullptr;
      const double v = std::strtod(cell.c_str(), &end);
      if (end == cell.c_str() + cell.size() && std::isfinite(v)) {
        row.push_back(v);
      } else {
        row.push_back(cell);
      }
    }
    rows.push_back(row);
  }
  json doc;
  doc["columns"] = t.header;
  doc["rows"] = rows;
  return doc.dump(2) + "\n";
}

Table parse_csv(const std::string& text) {
  std::vector<std::vector<std::string>> records;
  std::vector<std::string> rec;
  std::string cur;
  bool quoted = false;
  bool any = false;
  for (std::size_t i = 0; i < text.size(); ++i) {
    const char c = text[i];
    if (quoted) {
      if (c == '"' && i + 1 < text.size() && text[i + 1] == '"') {
        cur += '"';
        ++i;
      } else if (c == '"') {
        quoted = false;
      } else {
        cur += c;
      }
      continue;
    }
    if (c == '"') {
      quoted = true;
      any = true;
    } else if (c == ',') {
      rec.push_back(cur);
      cur.clear();
      any = true;
    } else if (c == '\n') {
      rec.push_back(cur);
      records.push_back(rec);
      rec.clear();
      cur.clear();
      any = false;
    } else if (c != '\r') {
      cur += c;
      any = true;
    }
  }
  if (any) {
    rec.push_back(cur);
    records.push_back(rec);
  }
  Table t;
  if (!records.empty()) {
    t.header = records.front();
    t.rows.assign(records.begin() + 1, records.end());
  }
  return t;
}

void parallel_for(int count, int jobs, const std::function<void(int)>& task) {
  if (count <= 0) return;
  int workers = jobs > 0 ? jobs : static_cast<int>(std::thread::hardware_concurrency());
  workers = std::clamp(workers, 1, count);
  std::vector<std::exception_ptr> errors(count);
  std::atomic<int> next{0};
  auto worker = [&] {
    for (int i = next++; i < count; i = next++) {
      try {
        task(i);
      } catch (...) {
        errors[i] = std::current_exception();
      }
    }
  };
  if (workers == 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    for (int w = 0; w < workers; ++w) pool.emplace_back(worker);
    for (auto& t : pool) t.join();
  }
  for (const auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }
}

RunResult run_spectrum(const RunConfig& c) {
  const auto cells = cells_of(c);
  std::vector<std::vector<std::vector<std::string>>> rows(cells.size());
  std::vector<json> cell_info(cells.size());
  parallel_for(static_cast<int>(cells.size()), c.jobs, [&](int i) {
    const Cell& cell = cells[i];
    const auto thr = try_threshold(cell.lambda, cell.b, c.window);
    const auto orders = resolve_orders("n", c.n_range, thr);
    const auto lim = spectrum::omega_limits(cell.lambda, cell.b);
    const std::string n0 = thr ? std::to_string(thr->n0) : "";
    const std::string nn = thr ? std::to_string(thr->n) : "";
    for (int n : orders) {
      const auto e = spectrum::eigenvalues(n, cell.lambda, cell.b);
      rows[i].push_back({format_number(cell.lambda), format_number(cell.b), std::to_string(n),
                         format_number(spectrum::discriminant(n, cell.lambda, cell.b)),
                         e ? format_number(e->omega_minus) : "",
                         e ? format_number(e->omega_plus) : "", format_number(lim.minus),
                         format_number(lim.plus), n0, nn});
    }
    json info;
    info["lambda"] = cell.lambda;
    info["b"] = cell.b;
    info["N0"] = thr ? json(thr->n0) : json(nullptr);
    info["N"] = thr ? json(thr->n) : json(nullptr);
    info["omega_inf_minus"] = lim.minus;
    info["omega_inf_plus"] = lim.plus;
    info["rows"] = orders.size();
    cell_info[i] = info;
  });
  Table t;
  t.header = {"lambda", "b", "n", "discriminant", "omega_minus", "omega_plus",
              "omega_inf_minus", "omega_inf_plus", "N0", "N"};
  for (auto& r : rows) t.rows.insert(t.rows.end(), r.begin(), r.end());

  RunResult res;
  res.files.push_back(table_file("spectrum", t, c.format));
  json summary;
  summary["command"] = "spectrum";
  summary["config"] = config_echo(c);
  summary["exit_code"] = kExitOk;
  summary["files"] = {res.files[0].name};
  summary["cells"] = cell_info;
  res.files.push_back(summary_file(summary));
  res.message = "spectrum: " + std::to_string(t.rows.size()) + " rows";
  return res;
}

RunResult run_eigen(const RunConfig& c) {
  const auto cells = cells_of(c);
  std::vector<std::vector<std::vector<std::string>>> rows(cells.size());
  parallel_for(static_cast<int>(cells.size()), c.jobs, [&](int i) {
    const Cell& cell = cells[i];
    const auto thr = order_expression_needs_threshold(c.n_range)
                         ? try_threshold(cell.lambda, cell.b, c.window)
                         : std::nullopt;
    for (int n : resolve_orders("n", c.n_range, thr)) {
      const auto q = spectrum::quadratic_coefficients(n, cell.lambda, cell.b);
      const double delta = spectrum::discriminant(n, cell.lambda, cell.b);
      std::vector<std::string> row = {format_number(cell.lambda), format_number(cell.b),
                                      std::to_string(n), format_number(q.B),
                                      format_number(q.C), format_number(delta)};
      const auto e = spectrum::eigenvalues(n, cell.lambda, cell.b);
      row.push_back(e ? format_number(e->omega_minus) : "");
      row.push_back(e ? format_number(e->omega_plus) : "");
      row.push_back(e ? (e->degenerate ? "1" : "0") : "");
      for (Branch s : {Branch::Minus, Branch::Plus}) {
        if (delta > 0.0) {
          const auto v = spectrum::kernel_vector(n, cell.lambda, cell.b, s);
          row.push_back(format_number(v[0]));
          row.push_back(format_number(v[1]));
          row.push_back(spectrum::transversality_check(n, cell.lambda, cell.b, s) ? "1" : "0");
          double guard = INFINITY;
          for (double d : spectrum::harmonic_determinants(n, cell.lambda, cell.b, s, 10)) {
            guard = std::min(guard, std::abs(d));
          }
          row.push_back(format_number(guard));
        } else {
          row.insert(row.end(), {"", "", "", ""});
        }
      }
      rows[i].push_back(std::move(row));
    }
  });
  Table t;
  t.header = {"lambda", "b", "n", "B", "C", "discriminant", "omega_minus", "omega_plus",
              "degenerate", "kernel_minus_f1", "kernel_minus_f2", "transversal_minus",
              "min_abs_harmonic_det_minus", "kernel_plus_f1", "kernel_plus_f2",
              "transversal_plus", "min_abs_harmonic_det_plus"};
  for (auto& r : rows) t.rows.insert(t.rows.end(), r.begin(), r.end());
  RunResult res;
  res.files.push_back(table_file("eigen", t, c.format));
  json summary;
  summary["command"] = "eigen";
  summary["config"] = config_echo(c);
  summary["exit_code"] = kExitOk;
  summary["files"] = {res.files[0].name};
  summary["rows"] = t.rows.size();
  res.files.push_back(summary_file(summary));
  res.message = "eigen: " + std::to_string(t.rows.size()) + " rows";
  return res;
}

RunResult run_limits(const RunConfig& c) {
  const auto cells = cells_of(c);
  std::vector<std::vector<std::string>> rows(cells.size());
  parallel_for(static_cast<int>(cells.size()), c.jobs, [&](int i) {
    const Cell& cell = cells[i];
    const auto thr = try_threshold(cell.lambda, cell.b, c.window);
    const auto lim = spectrum::omega_limits(cell.lambda, cell.b);
    rows[i] = {format_number(cell.lambda),
               format_number(cell.b),
               format_number(spectrum::delta_infinity(cell.lambda, cell.b)),
               format_number(spectrum::discriminant_limit(cell.lambda, cell.b)),
               format_number(lim.minus),
               format_number(lim.plus),
               thr ? std::to_string(thr->n0) : "",
               thr ? std::to_string(thr->n) : ""};
  });
  Table t;
  t.header = {"lambda", "b", "delta_infinity", "discriminant_limit", "omega_inf_minus",
              "omega_inf_plus", "N0", "N"};
  t.rows = std::move(rows);
  RunResult res;
  res.files.push_back(table_file("limits", t, c.format));
  json summary;
  summary["command"] = "limits";
  summary["config"] = config_echo(c);
  summary["exit_code"] = kExitOk;
  summary["files"] = {res.files[0].name};
  summary["rows"] = t.rows.size();
  res.files.push_back(summary_file(summary));
  res.message = "limits: " + std::to_string(t.rows.size()) + " rows";
  return res;
}

RunResult run_branch(const RunConfig& c) {
  struct Job {
    Cell cell;
    int m;
    Branch sign;
  };
  std::vector<Job> jobs;
  for (const Cell& cell : cells_of(c)) {
    const auto thr = order_expression_needs_threshold(c.m_range)
                         ? try_threshold(cell.lambda, cell.b, c.window)
                         : std::nullopt;
    for (int m : resolve_orders("m", c.m_range, thr)) {
      if (m < 2) throw ConfigError("m", "fold must be >= 2");
      const double delta = spectrum::discriminant(m, cell.lambda, cell.b);
      if (!(delta > 0.0)) {
        throw ConfigError("m", "discriminant Delta_" + std::to_string(m) + " = " +
                                   format_number(delta) + " is not positive at lambda=" +
                                   format_number(cell.lambda) + ", b=" + format_number(cell.b));
      }
      for (Branch s : c.signs) jobs.push_back({cell, m, s});
    }
  }

  continuation::SolverOptions opts;
  opts.trunc = c.trunc;
  opts.tol = c.tol;
  const contour::QuadratureGrid grid(c.grid_size);
  std::vector<continuation::BranchTrace> traces(jobs.size());
  parallel_for(static_cast<int>(jobs.size()), c.jobs, [&](int i) {
    const Job& j = jobs[i];
    traces[i] = continuation::trace_branch(j.cell.lambda, j.cell.b, j.m, j.sign, c.s_max,
                                           c.steps, grid, opts);
  });

  RunResult res;
  Table summary_table;
  summary_table.header = {"lambda", "b", "m", "sign", "omega_bifurcation", "omega_extrapolated",
                          "gap", "points", "complete", "max_residual", "tangent_angle",
                          "termination"};
  json branches = json::array();
  std::vector<std::string> names;
  int incomplete = 0;
  for (std::size_t i = 0; i < jobs.size(); ++i) {
    const Job& j = jobs[i];
    const auto& tr = traces[i];
    int kmax = 0;
    for (const auto& p : tr.points) {
      kmax = std::max<int>(kmax, static_cast<int>(p.f1.coefficients().size()) / j.m);
      kmax = std::max<int>(kmax, static_cast<int>(p.f2.coefficients().size()) / j.m);
    }
    Table t;
    t.header = {"s", "omega", "residual", "iterations", "node_count"};
    for (int k = 1; k <= kmax; ++k) t.header.push_back("a" + std::to_string(j.m * k - 1));
    for (int k = 1; k <= kmax; ++k) t.header.push_back("b" + std::to_string(j.m * k - 1));
    double max_res = 0.0;
    for (const auto& p : tr.points) {
      std::vector<std::string> row = {format_number(p.s), format_number(p.omega),
                                      format_number(p.residual), std::to_string(p.iterations),
                                      std::to_string(p.node_count)};
      for (int k = 1; k <= kmax; ++k) row.push_back(format_number(p.f1.coefficient(j.m * k - 1)));
      for (int k = 1; k <= kmax; ++k) row.push_back(format_number(p.f2.coefficient(j.m * k - 1)));
      t.rows.push_back(std::move(row));
      max_res = std::max(max_res, p.residual);
    }
    const std::string stem = "branch_l" + std::to_string(j.cell.li) + "_b" +
                             std::to_string(j.cell.bi) + "_m" + std::to_string(j.m) + "_" +
                             spectrum::to_string(j.sign);
    res.files.push_back(table_file(stem, t, c.format));
    names.push_back(res.files.back().name);

    std::optional<double> extrap, gap, angle;
    if (tr.points.size() >= 2) {
      extrap = continuation::extrapolate_omega(tr.points);
      gap = std::abs(*extrap - tr.omega_bifurcation);
    }
    if (!tr.points.empty()) {
      angle = continuation::tangent_angle(tr.points.front(), j.cell.lambda, j.cell.b, j.sign);
    }
    if (!tr.complete) ++incomplete;
    summary_table.rows.push_back(
        {format_number(j.cell.lambda), format_number(j.cell.b), std::to_string(j.m),
         spectrum::to_string(j.sign), format_number(tr.omega_bifurcation), opt_number(extrap),
         opt_number(gap), std::to_string(tr.points.size()), tr.complete ? "1" : "0",
         tr.points.empty() ? "" : format_number(max_res), opt_number(angle), tr.termination});
    json b;
    b["file"] = names.back();
    b["lambda"] = j.cell.lambda;
    b["b"] = j.cell.b;
    b["m"] = j.m;
    b["sign"] = spectrum::to_string(j.sign);
    b["omega_bifurcation"] = tr.omega_bifurcation;
    b["omega_extrapolated"] = extrap ? json(*extrap) : json(nullptr);
    b["gap"] = gap ? json(*gap) : json(nullptr);
    b["points"] = tr.points.size();
    b["complete"] = tr.complete;
    b["termination"] = tr.termination;
    branches.push_back(b);
  }
  res.files.push_back(table_file("branch_summary", summary_table, c.format));
  names.push_back(res.files.back().name);
  res.exit_code = incomplete ? kExitPartialBranch : kExitOk;

  json summary;
  summary["command"] = "branch";
  summary["config"] = config_echo(c);
  summary["exit_code"] = res.exit_code;
  summary["files"] = names;
  summary["branches"] = branches;
  res.files.push_back(summary_file(summary));
  res.message = "branch: " + std::to_string(jobs.size()) + " branches";
  if (incomplete) {
    res.message += ", " + std::to_string(incomplete) + " stopped early:";
    for (std::size_t i = 0; i < jobs.size(); ++i) {
      if (!traces[i].complete) {
        res.message += "\n  m=" + std::to_string(jobs[i].m) + " " +
                       spectrum::to_string(jobs[i].sign) + ": " + traces[i].termination;
      }
    }
  }
  return res;
}

double multiplier_tolerance(int node_count) {
  if (node_count >= 64) return 1e-6;
  return 1e-4;
}

RunResult run_verify(const RunConfig& c) {
  contour::ContourOptions fault;
  fault.reverse_inner_orientation = (c.fault == Fault::ReverseInnerOrientation);

  struct Check {
    std::string name;
    double measured = 0.0;
    double threshold = 0.0;
  };
  std::vector<Check> checks(5);
  parallel_for(5, c.jobs, [&](int i) {
    Check& ck = checks[i];
    switch (i) {
      case 0: {
        ck.name = "trivial_residual";
        ck.threshold = 1e-11;
        const contour::QuadratureGrid grid(c.grid_size);
        for (double l : {0.5, 1.0, 2.0}) {
          for (double b : {0.3, 0.5, 0.7}) {
            for (double om : {-0.5, 0.0, 0.5}) {
              const auto g = contour::g_functional(l, b, om, contour::FourierBoundary(1.0),
                                                   contour::FourierBoundary(b), grid, fault);
              ck.measured = std::max(ck.measured, g.max_abs());
            }
          }
        }
        break;
      }
      case 1: {
        ck.name = "multiplier_equivalence";
        ck.threshold = multiplier_tolerance(c.grid_size);
        const contour::QuadratureGrid grid(c.grid_size);
        for (int n = 1; n <= 12; ++n) {
          const auto r = contour::linearization_check(n, 1.0, 0.5, 0.2, 1e-6, grid, fault);
          ck.measured = std::max(ck.measured, r.max_deviation);
        }
        break;
      }
      case 2: {
        ck.name = "bessel_integral_oracle";
        ck.threshold = 1e-9;
        for (int n = 1; n <= 30; ++n) {
          for (int k = 0; k < 20; ++k) {
            const double x = 0.1 * std::pow(100.0, k / 19.0);
            const double rel = std::abs(special::product_ik_integral(n, x) /
                                            special::product_ik(n, x) - 1.0);
            ck.measured = std::max(ck.measured, rel);
          }
        }
        break;
      }
      case 3: {
        ck.name = "beltrami_summation";
        ck.threshold = 1e-10;
        std::mt19937_64 rng(20240611);
        std::uniform_real_distribution<double> theta(0.0, 2.0 * std::numbers::pi);
        for (int k = 0; k < 50; ++k) {
          const double t = theta(rng);
          const double direct = special::bessel_k(0, std::sqrt(1.25 - std::cos(t)));
          ck.measured =
              std::max(ck.measured, std::abs(special::beltrami_k0(1.0, 0.5, t, 60) - direct));
        }
        break;
      }
      default: {
        ck.name = "wronskian";
        ck.threshold = 1e-11;
        for (int n = 0; n < 20; ++n) {
          for (int k = 0; k < 20; ++k) {
            const double x = 0.1 + k * 1.0;
            const double w =
                special::bessel_i(n, x) *
                    special::bessel_derivative(special::BesselKind::K, n, x) -
                special::bessel_derivative(special::BesselKind::I, n, x) * special::bessel_k(n, x);
            ck.measured = std::max(ck.measured, std::abs(w * x + 1.0));
          }
        }
        break;
      }
    }
  });

  Table t;
  t.header = {"check", "measured", "threshold", "passed"};
  bool ok = true;
  json list = json::array();
  for (const Check& ck : checks) {
    const bool pass = ck.measured <= ck.threshold;
    ok = ok && pass;
    t.rows.push_back(
        {ck.name, format_number(ck.measured), format_number(ck.threshold), pass ? "1" : "0"});
    list.push_back({{"check", ck.name},
                    {"measured", ck.measured},
                    {"threshold", ck.threshold},
                    {"passed", pass}});
  }
  RunResult res;
  res.exit_code = ok ? kExitOk : kExitVerification;
  res.files.push_back(table_file("verify", t, c.format));
  json summary;
  summary["command"] = "verify";
  summary["config"] = config_echo(c);
  summary["exit_code"] = res.exit_code;
  summary["files"] = {res.files[0].name};
  summary["checks"] = list;
  res.files.push_back(summary_file(summary));
  std::ostringstream os;
  for (const Check& ck : checks) {
    os << (ck.measured <= ck.threshold ? "PASS " : "FAIL ") << ck.name << " measured "
       << format_number(ck.measured) << " threshold " << format_number(ck.threshold) << "\n";
  }
  os << (ok ? "verify: all checks passed" : "verify: FAILED");
  res.message = os.str();
  return res;
}

RunResult run(const RunConfig& config) {
  try {
    validate(config);
    switch (config.command) {
      case Command::Spectrum: return run_spectrum(config);
      case Command::Eigen: return run_eigen(config);
      case Command::Branch: return run_branch(config);
      case Command::Verify: return run_verify(config);
      case Command::Limits: return run_limits(config);
    }
  } catch (const ConfigError& e) {
    return {kExitValidation, {}, std::string("validation error: ") + e.what()};
  } catch (const PreconditionError& e) {
    return {kExitValidation, {}, std::string("validation error: ") + e.what()};
  } catch (const DomainError& e) {
    return {kExitValidation, {}, std::string("validation error: ") + e.what()};
  }
  return {kExitValidation, {}, "unknown command"};
}

void write_outputs(const RunResult& result, const std::string& dir) {
  if (result.files.empty()) return;
  std::filesystem::create_directories(dir);
  for (const auto& f : result.files) {
    std::ofstream os(std::filesystem::path(dir) / f.name, std::ios::binary | std::ios::trunc);
    if (!os) throw std::runtime_error("cannot write " + f.name + " in " + dir);
    os << f.content;
  }
}

}  // namespace qgsw::cli
