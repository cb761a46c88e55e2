#include <doctest.h>

#include <cmath>
#include <cstdlib>

#include "qgsw/runner.hpp"

using namespace qgsw::cli;

namespace {
const OutputFile* find(const RunResult& r, const std::string& name) {
  for (const auto& f : r.files) {
    if (f.name == name) return &f;
  }
  return nullptr;
}
}  // namespace

TEST_CASE("grid parsing") {
  const GridSpec g = parse_grid("lambda", "0.5:2:4");
  const auto v = g.values();
  REQUIRE(v.size() == 4);
  CHECK(v.front() == 0.5);
  CHECK(v.back() == 2.0);
  CHECK(v[1] == 1.0);
  CHECK(parse_grid("b", "0.3").values() == std::vector<double>{0.3});
  CHECK_THROWS_AS(parse_grid("b", "0.3:0.4"), ConfigError);
  CHECK_THROWS_AS(parse_grid("b", "abc"), ConfigError);
}

TEST_CASE("order expressions") {
  const qgsw::spectrum::ThresholdRecord t{3, 4};
  CHECK(resolve_orders("n", "N:N+2", t) == std::vector<int>{4, 5, 6});
  CHECK(resolve_orders("n", "N0-1, 10", t) == std::vector<int>{2, 10});
  CHECK(resolve_orders("n", "7:5", t).empty());
  CHECK(resolve_orders("n", "", std::nullopt).empty());
  CHECK(resolve_orders("m", "5", std::nullopt) == std::vector<int>{5});
  CHECK(order_expression_needs_threshold("N+2"));
  CHECK_FALSE(order_expression_needs_threshold("1:3"));
  CHECK_THROWS_AS(resolve_orders("n", "N", std::nullopt), ConfigError);
  CHECK_THROWS_AS(resolve_orders("n", "N0-5", t), ConfigError);
  CHECK_THROWS_AS(resolve_orders("n", "x+1", t), ConfigError);
}

TEST_CASE("number formatting round-trips") {
  for (double v : {0.1, 1.0 / 3.0, -2.5e-300, 1e300, 0.16452315601374728551, 5e-324}) {
    CHECK(std::strtod(format_number(v).c_str(), nullptr) == v);
  }
  CHECK(format_number(NAN) == "nan");
  CHECK(format_number(-INFINITY) == "-inf");
}

TEST_CASE("csv rendering round-trips") {
  Table t;
  t.header = {"a", "b,c", "d"};
  t.rows = {{"1", "x \"q\"", ""}, {"2.5", "line\nbreak", "z"}};
  const Table back = parse_csv(render_csv(t));
  CHECK(back.header == t.header);
  CHECK(back.rows == t.rows);
  CHECK(render_csv(t).find("\"b,c\"") != std::string::npos);
}

TEST_CASE("config file overlay") {
  const RunConfig c = apply_json_config(
      R"({"command": "branch", "lambda": "0.5:1:2", "b": 0.4, "m": 6, "sign": "plus",
          "grid_size": 128, "format": "json", "jobs": 2})");
  CHECK(c.command == Command::Branch);
  CHECK(c.lambda.count == 2);
  CHECK(c.b.start == 0.4);
  CHECK(c.m_range == "6");
  CHECK(c.signs == std::vector<qgsw::spectrum::Branch>{qgsw::spectrum::Branch::Plus});
  CHECK(c.grid_size == 128);
  CHECK(c.format == Format::Json);

  try {
    apply_json_config("{\n  \"b\": 0.4,\n  \"window\": ,\n}");
    FAIL("expected a parse error");
  } catch (const ConfigError& e) {
    CHECK(std::string(e.what()).find("line 3") != std::string::npos);
  }
  try {
    apply_json_config(R"({"windw": 10})");
    FAIL("expected an unknown key");
  } catch (const ConfigError& e) {
    CHECK(e.field() == "windw");
  }
  try {
    apply_json_config(R"({"window": "ten"})");
    FAIL("expected a type error");
  } catch (const ConfigError& e) {
    CHECK(e.field() == "window");
  }
}

TEST_CASE("validation") {
  RunConfig c;
  c.b = {0.5, 1.0, 2};
  CHECK_THROWS_AS(validate(c), ConfigError);
  const RunResult r = run(c);
  CHECK(r.exit_code == kExitValidation);
  CHECK(r.files.empty());
  CHECK(r.message.find("b") != std::string::npos);

  RunConfig d;
  d.lambda = {0.0, 0.0, 1};
  CHECK(run(d).exit_code == kExitValidation);
  RunConfig e;
  e.window = 3;
  CHECK(run(e).exit_code == kExitValidation);
}

TEST_CASE("spectrum table at (1, 0.5)") {
  RunConfig c;
  c.jobs = 1;
  const RunResult r = run(c);
  CHECK(r.exit_code == kExitOk);
  const auto* f = find(r, "spectrum.csv");
  REQUIRE(f);
  const Table t = parse_csv(f->content);
  REQUIRE(t.rows.size() == 11);
  CHECK(t.rows.front()[2] == "3");
  CHECK(t.rows.back()[2] == "13");
  for (std::size_t i = 1; i < t.rows.size(); ++i) {
    CHECK(std::stod(t.rows[i][4]) < std::stod(t.rows[i - 1][4]));
    CHECK(std::stod(t.rows[i][5]) > std::stod(t.rows[i - 1][5]));
  }
  CHECK(find(r, "summary.json"));
}

TEST_CASE("empty order range writes a header-only table") {
  RunConfig c;
  c.n_range = "5:4";
  const RunResult r = run(c);
  CHECK(r.exit_code == kExitOk);
  const Table t = parse_csv(find(r, "spectrum.csv")->content);
  CHECK(t.header.size() == 10);
  CHECK(t.rows.empty());
}

TEST_CASE("absent eigenvalues are empty cells") {
  RunConfig c;
  c.command = Command::Eigen;
  c.n_range = "1:4";
  const Table t = parse_csv(find(run(c), "eigen.csv")->content);
  REQUIRE(t.rows.size() == 4);
  CHECK(t.rows[1][6].empty());
  CHECK_FALSE(t.rows[2][6].empty());
}

TEST_CASE("output is independent of the worker count") {
  RunConfig c;
  c.command = Command::Limits;
  c.lambda = {0.5, 2.0, 4};
  c.b = {0.3, 0.7, 3};
  c.jobs = 1;
  const RunResult a = run(c);
  c.jobs = 4;
  const RunResult b = run(c);
  REQUIRE(a.files.size() == b.files.size());
  for (std::size_t i = 0; i < a.files.size(); ++i) CHECK(a.files[i].content == b.files[i].content);
  CHECK(parse_csv(find(a, "limits.csv")->content).rows.size() == 12);
}

TEST_CASE("json tables keep exact values") {
  RunConfig c;
  c.command = Command::Limits;
  c.format = Format::Json;
  const RunResult r = run(c);
  REQUIRE(find(r, "limits.json"));
  CHECK(find(r, "limits.json")->content.find("\"columns\"") != std::string::npos);
}

TEST_CASE("branch with a negative discriminant names the value") {
  RunConfig c;
  c.command = Command::Branch;
  c.m_range = "2";
  const RunResult r = run(c);
  CHECK(r.exit_code == kExitValidation);
  CHECK(r.message.find("-0.000999") != std::string::npos);
}

TEST_CASE("branch files and summary") {
  RunConfig c;
  c.command = Command::Branch;
  c.m_range = "5";
  c.s_max = 3.2e-4;
  c.steps = 8;
  const RunResult r = run(c);
  CHECK(r.exit_code == kExitOk);
  const auto* minus = find(r, "branch_l0_b0_m5_minus.csv");
  const auto* plus = find(r, "branch_l0_b0_m5_plus.csv");
  REQUIRE(minus);
  REQUIRE(plus);
  const Table a = parse_csv(minus->content);
  const Table b = parse_csv(plus->content);
  REQUIRE(a.rows.size() == 8);
  REQUIRE(b.rows.size() == 8);
  for (int j = 0; j < 8; ++j) CHECK(std::stod(a.rows[j][1]) < std::stod(b.rows[j][1]));
  const Table s = parse_csv(find(r, "branch_summary.csv")->content);
  REQUIRE(s.rows.size() == 2);
  for (const auto& row : s.rows) CHECK(std::stod(row[6]) < 1e-3);
}

TEST_CASE("partial branch exits with the warning code") {
  RunConfig c;
  c.command = Command::Branch;
  c.m_range = "5";
  c.signs = {qgsw::spectrum::Branch::Minus};
  c.s_max = 5e-3;
  const RunResult r = run(c);
  CHECK(r.exit_code == kExitPartialBranch);
  CHECK(find(r, "summary.json")->content.find("\"complete\": false") != std::string::npos);
}

TEST_CASE("verification suite") {
  RunConfig c;
  c.command = Command::Verify;
  const RunResult ok = run(c);
  CHECK(ok.exit_code == kExitOk);
  const Table t = parse_csv(find(ok, "verify.csv")->content);
  REQUIRE(t.rows.size() == 5);
  CHECK(t.rows[0][0] == "trivial_residual");
  CHECK(std::stod(t.rows[0][1]) <= 1e-11);

  c.grid_size = 64;
  CHECK(multiplier_tolerance(64) >= multiplier_tolerance(256));
  CHECK(run(c).exit_code == kExitOk);

  c.grid_size = 256;
  c.fault = Fault::ReverseInnerOrientation;
  const RunResult bad = run(c);
  CHECK(bad.exit_code == kExitVerification);
  CHECK(bad.message.find("FAIL trivial_residual") != std::string::npos);
}

TEST_CASE("parallel_for propagates exceptions") {
  std::vector<int> seen(10, 0);
  parallel_for(10, 3, [&](int i) { seen[i] = i; });
  for (int i = 0; i < 10; ++i) CHECK(seen[i] == i);
  CHECK_THROWS_AS(parallel_for(5, 2, [](int i) {
                    if (i == 3) throw std::runtime_error("boom");
                  }),
                  std::runtime_error);
}
