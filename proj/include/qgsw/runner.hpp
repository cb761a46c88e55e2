#pragma once

#include <functional>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "qgsw/spectrum.hpp"

namespace qgsw::cli {

enum class Command { Spectrum, Eigen, Branch, Verify, Limits };
enum class Format { Csv, Json };
enum class Fault { None, ReverseInnerOrientation };

inline constexpr int kExitOk = 0;
inline constexpr int kExitValidation = 1;
inline constexpr int kExitVerification = 2;
inline constexpr int kExitPartialBranch = 3;

// Inclusive linear grid; count == 1 means the single value `start`.
struct GridSpec {
  double start = 1.0;
  double stop = 1.0;
  int count = 1;
  std::vector<double> values() const;
};

struct RunConfig {
  Command command = Command::Spectrum;
  GridSpec lambda{1.0, 1.0, 1};
  GridSpec b{0.5, 0.5, 1};
  std::string n_range = "N:N+10";
  std::string m_range = "N+2";
  int window = 50;
  int trunc = 16;
  int grid_size = 256;
  double s_max = 5e-3;
  int steps = 8;
  std::vector<spectrum::Branch> signs{spectrum::Branch::Minus, spectrum::Branch::Plus};
  double tol = 1e-10;
  std::string out_dir = "qgsw_out";
  Format format = Format::Csv;
  int jobs = 0;  // 0: hardware concurrency
  Fault fault = Fault::None;
};

class ConfigError : public std::runtime_error {
 public:
  ConfigError(std::string field, const std::string& message)
      : std::runtime_error(field + ": " + message), field_(std::move(field)) {}
  const std::string& field() const { return field_; }

 private:
  std::string field_;
};

Command parse_command(const std::string& text);
const char* to_string(Command c);
GridSpec parse_grid(const std::string& field, const std::string& text);
std::vector<spectrum::Branch> parse_signs(const std::string& field, const std::string& text);
Format parse_format(const std::string& field, const std::string& text);

// Overlays the keys of a JSON config document on `base`. Parse errors carry line and column.
RunConfig apply_json_config(const std::string& text, RunConfig base = {});
void validate(const RunConfig& config);

// Items separated by ',', each `expr` or `expr:expr` (inclusive, empty when start > end).
// expr is an integer, N, N0, or N/N0 followed by +k or -k.
bool order_expression_needs_threshold(const std::string& expr);
std::vector<int> resolve_orders(const std::string& field, const std::string& expr,
                                const std::optional<spectrum::ThresholdRecord>& threshold);

struct Table {
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;
};

// 17 significant digits; round-trips through strtod.
std::string format_number(double v);
std::string render_csv(const Table& table);
std::string render_json(const Table& table);
Table parse_csv(const std::string& text);

struct OutputFile {
  std::string name;
  std::string content;
};

struct RunResult {
  int exit_code = kExitOk;
  std::vector<OutputFile> files;
  std::string message;
};

// Runs tasks 0..count-1 on up to `jobs` threads; results land at their task index.
void parallel_for(int count, int jobs, const std::function<void(int)>& task);

RunResult run_spectrum(const RunConfig& config);
RunResult run_eigen(const RunConfig& config);
RunResult run_limits(const RunConfig& config);
RunResult run_branch(const RunConfig& config);
RunResult run_verify(const RunConfig& config);
RunResult run(const RunConfig& config);

// Tolerance of the multiplier check as a function of the node count.
double multiplier_tolerance(int node_count);

void write_outputs(const RunResult& result, const std::string& dir);

}  // namespace qgsw::cli
