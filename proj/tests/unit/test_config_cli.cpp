#include "sparse_anova/cli.hpp"
#include "sparse_anova/config.hpp"
#include "support.hpp"

#include <doctest.h>

#include <json.hpp>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

using namespace sparse_anova;
namespace fs = std::filesystem;

namespace {

struct Run {
  int code = -1;
  std::string out;
  std::string err;
};

Run cli_run(std::vector<std::string> args)
{
  std::ostringstream out, err;
  Run r;
  r.code = cli::run(args, out, err);
  r.out = out.str();
  r.err = err.str();
  return r;
}

//! Fresh directory under the system temp dir, removed on scope exit.
struct TempDir {
  fs::path path;
  explicit TempDir(const std::string& tag)
  {
    path = fs::temp_directory_path() / ("sparse_anova_" + tag + "_" + std::to_string(std::rand()));
    fs::remove_all(path);
    fs::create_directories(path);
  }
  ~TempDir() { fs::remove_all(path); }
  std::string str() const { return path.string(); }
};

std::string slurp(const fs::path& p)
{
  std::ifstream in(p);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

std::vector<std::string> split_lines(const std::string& s)
{
  std::vector<std::string> lines;
  std::istringstream in(s);
  for (std::string line; std::getline(in, line);)
    lines.push_back(line);
  return lines;
}

} // namespace

TEST_CASE("default config round-trips")
{
  ExperimentConfig c;
  CHECK(parse_config(emit_config(c)) == c);
}

TEST_CASE("customised config round-trips")
{
  ExperimentConfig c;
  c.command = "simulate";
  c.sigma = 1.5;
  c.eps = 3.25e-3;
  c.d = {12, 40};
  c.k = {2, 3};
  c.s = 0;
  c.alpha = {0.01, 0.1 + 0.2, 1.0 / 3.0};
  c.noise_scale = 0.0;
  c.window = {WindowSetting::Mode::value, 57};
  c.components = {{{1, 4}, {"g1", "g5"}, 0.7}, {{2, 3, 9}, {"g2", "g3", "g8"}, 1.0}};
  c.selector.b = 0.01;
  c.selector.B = 0.9;
  c.selector.M = 33;
  c.selector.epsilon_rule = EpsilonRuleKind::value;
  c.selector.epsilon_value = 0.123456789012345;
  c.selector.tau_rule = TauRuleKind::value;
  c.selector.tau_value = 4.5;
  c.selector.regime = Regime::growing_s;
  c.selector.scan = LepskiScan::maximal;
  c.J = 9;
  c.seed = 18446744073709551557ULL;
  c.sampler = Sampler::gaussian;
  c.draw_budget = 2.5e7;
  c.threads = 3;
  c.r = 0.0425;
  c.include_support = true;
  c.beta = 0.61;
  c.margin = {0.25, -0.5};
  c.actives = 4;
  c.beta_steps = 7;
  c.gamma_steps = 9;
  c.gamma_max = 5.5;
  c.output_dir = "out/here";
  c.include_timing = true;
  const auto text = emit_config(c);
  CHECK(parse_config(text) == c);
  CHECK(emit_config(parse_config(text)) == text);

  c.window = {WindowSetting::Mode::none, 0};
  c.selector.epsilon_rule = EpsilonRuleKind::log_d_over_s;
  c.selector.tau_rule = TauRuleKind::automatic;
  c.selector.tau_value = 0.0;
  c.selector.epsilon_value = 0.0;
  CHECK(parse_config(emit_config(c)) == c);
}

TEST_CASE("config parsing rejects malformed input")
{
  auto code = [](const std::string& text) { return test::error_code([&] { parse_config(text); }); };
  const auto inv = ErrorCode::invalid_argument;
  CHECK(code("{") == inv);
  CHECK(code(R"({"schema_version": 2})") == inv);
  CHECK(code(R"({"schema_version": 1, "colour": 3})") == inv);
  CHECK(code(R"({"schema_version": 1, "model": {"sigmaa": 1}})") == inv);
  CHECK(code(R"({"schema_version": 1, "model": {"sigma": "one"}})") == inv);
  CHECK(code(R"({"schema_version": 1, "model": {"sigma": -1}})") == inv);
  CHECK(code(R"({"schema_version": 1, "model": {"d": [10], "k": [10]}})") == inv);
  CHECK(code(R"({"schema_version": 1, "model": {"window": "wide"}})") == inv);
  CHECK(code(R"({"schema_version": 1, "model": {"components": [{"subset": [1, 2], "factors": ["g1"]}]}})") == inv);
  CHECK(code(R"({"schema_version": 1, "model": {"components": [{"subset": [2, 1], "factors": ["g1", "g2"]}]}})") ==
        inv);
  CHECK(code(R"({"schema_version": 1, "model": {"components": [{"subset": [1, 2], "factors": ["g1", "g9"]}]}})") ==
        inv);
  CHECK(code(R"({"schema_version": 1, "selector": {"b": 0.5, "B": 0.4}})") == inv);
  CHECK(code(R"({"schema_version": 1, "selector": {"M": 65}})") == inv);
  CHECK(code(R"({"schema_version": 1, "selector": {"tau": "big"}})") == inv);
  CHECK(code(R"({"schema_version": 1, "simulation": {"J": 0}})") == inv);
  CHECK(code(R"({"schema_version": 1, "simulation": {"sampler": "fast"}})") == inv);
  CHECK(code(R"({"schema_version": 1, "dichotomy": {"margin": [0.0]}})") == inv);
  CHECK(code(R"({"schema_version": 1, "command": "plot"})") == inv);
  CHECK(code(R"({"schema_version": 1})") == std::nullopt);
}

TEST_CASE("config errors name the offending key")
{
  try {
    parse_config(R"({"schema_version": 1, "simulation": {"J": -4}})");
    FAIL("expected an error");
  } catch (const Error& e) {
    CHECK(e.detail().rfind("simulation.J:", 0) == 0);
  }
}

TEST_CASE("table1 reproduces the printed table")
{
  TempDir dir("table1");
  const auto r = cli_run({"table1", "--sigma", "1", "--eps", "1e-4", "--d", "10,50,100,200", "--k", "2,3",
                          "--out-dir", dir.str()});
  REQUIRE(r.code == cli::kExitOk);
  const auto lines = split_lines(slurp(dir.path / "table1.csv"));
  REQUIRE(lines.size() == 9);
  CHECK(lines[0] == "k,d,beta,binom,log_binom,eps_power");
  CHECK(lines[1] == "2,10,0.5293,45,3.8067,10000");
  CHECK(lines[2] == "2,50,0.7480,1225,7.1107,10000");
  CHECK(lines[5] == "3,10,0.6257,120,4.7875,63096");
  CHECK(lines[8] == "3,200,0.8728,1313400,14.0881,63096");
  CHECK(r.out == slurp(dir.path / "table1.csv"));
}

TEST_CASE("flags override config file values")
{
  TempDir dir("override");
  ExperimentConfig c;
  c.J = 5;
  c.seed = 99;
  c.alpha = {0.5};
  std::ofstream(dir.path / "c.json") << emit_config(c);
  const auto r = cli_run({"table2", "--config", (dir.path / "c.json").string(), "--J", "3", "--print-config"});
  REQUIRE(r.code == cli::kExitOk);
  const auto eff = parse_config(r.out);
  CHECK(eff.J == 3);
  CHECK(eff.seed == 99);
  CHECK(eff.alpha == std::vector<double>{0.5});
  CHECK(eff.command == "table2");
}

TEST_CASE("invalid input exits with code 2 and one error line")
{
  for (const auto& args : std::vector<std::vector<std::string>>{
         {"table1", "--sigma", "-1"},
         {"table2", "--J", "0"},
         {"table2", "--alpha", "0.1,x"},
         {"simulate", "--no-such-flag"},
         {"bogus"},
         {},
         {"table1", "--config", "/nonexistent/config.json"}}) {
    const auto r = cli_run(args);
    CAPTURE(r.err);
    CHECK(r.code == cli::kExitConfig);
    const auto lines = split_lines(r.err);
    REQUIRE(lines.size() == 1);
    CHECK(lines[0].rfind("error: code=", 0) == 0);
    CHECK(lines[0].find(" command=") != std::string::npos);
    CHECK(lines[0].find(" message=") != std::string::npos);
  }
  const auto r = cli_run({"table1", "--sigma", "-1"});
  CHECK(r.err.rfind("error: code=invalid-argument command=table1 message=model.sigma:", 0) == 0);
}

TEST_CASE("numerical infeasibility exits with code 3")
{
  TempDir dir("infeasible");
  const auto r = cli_run({"solve-extremal", "--k", "2", "--r", "0.5", "--out-dir", dir.str()});
  CHECK(r.code == cli::kExitNumerical);
  CHECK(r.err.rfind("error: code=infeasible-radius command=solve-extremal", 0) == 0);
  const auto t = cli_run({"boundary", "--d", "10", "--k", "2", "--eps", "1", "--out-dir", dir.str()});
  CHECK(t.code == cli::kExitNumerical);
}

TEST_CASE("dry run prints derived quantities without writing reports")
{
  TempDir dir("dry");
  const auto r = cli_run({"table2", "--d", "10", "--k", "2", "--dry-run", "--out-dir", dir.str()});
  REQUIRE(r.code == cli::kExitOk);
  const auto j = nlohmann::json::parse(r.out);
  CHECK(j.at("dry_run") == true);
  CHECK(j.at("command") == "table2");
  const auto& e = j.at("derived").at(0);
  CHECK(e.at("beta").get<double>() == doctest::Approx(1.0 - std::log(6.0) / std::log(45.0)));
  CHECK(e.at("actives") == 6);
  CHECK(e.at("epsilon").get<double>() == doctest::Approx(1.0 / std::sqrt(std::log(45.0))));
  CHECK(e.at("nodes").size() == 20);
  CHECK(fs::is_empty(dir.path));
}

TEST_CASE("output directory falls back to the environment variable")
{
  TempDir dir("env");
  ::setenv(cli::kOutDirEnv, dir.str().c_str(), 1);
  const auto r = cli_run({"table1"});
  ::unsetenv(cli::kOutDirEnv);
  REQUIRE(r.code == cli::kExitOk);
  CHECK(fs::exists(dir.path / "table1.csv"));
}

TEST_CASE("phase diagram writes a region grid and two curves")
{
  TempDir dir("phase");
  const auto r = cli_run({"phase-diagram", "--beta-steps", "20", "--gamma-steps", "30", "--out-dir", dir.str()});
  REQUIRE(r.code == cli::kExitOk);
  CHECK(split_lines(slurp(dir.path / "phase_regions.csv")).size() == 1 + 20 * 30);
  CHECK(split_lines(slurp(dir.path / "boundary_exact.csv")).size() == 21);
  CHECK(split_lines(slurp(dir.path / "boundary_almost_full.csv")).size() == 21);
}

TEST_CASE("solve-extremal writes the profile")
{
  TempDir dir("extremal");
  const auto r = cli_run({"solve-extremal", "--k", "2", "--r", "0.05", "--eps", "1e-3", "--window", "none",
                          "--out-dir", dir.str()});
  REQUIRE(r.code == cli::kExitOk);
  const auto j = nlohmann::json::parse(slurp(dir.path / "extremal_k2.json"));
  CHECK(j.at("k") == 2);
  CHECK(j.at("a_value").get<double>() > 0.0);
}

TEST_CASE("identical runs give byte-identical reports for any thread count")
{
  TempDir a("det_a"), b("det_b");
  const std::vector<std::string> base{"table2", "--d", "10", "--k", "3", "--alpha", "0.03,0.1", "--J", "4",
                                      "--seed", "5"};
  auto with = [&](const TempDir& dir, const std::string& threads) {
    auto args = base;
    args.insert(args.end(), {"--threads", threads, "--out-dir", dir.str()});
    return cli_run(args).code;
  };
  REQUIRE(with(a, "1") == cli::kExitOk);
  REQUIRE(with(b, "3") == cli::kExitOk);
  CHECK(slurp(a.path / "table2.csv") == slurp(b.path / "table2.csv"));
  CHECK(slurp(a.path / "table2.json") == slurp(b.path / "table2.json"));
  const auto lines = split_lines(slurp(a.path / "table2.csv"));
  REQUIRE(lines.size() == 2);
  CHECK(lines[0] == "k,d,beta,0.03,0.1");
}
