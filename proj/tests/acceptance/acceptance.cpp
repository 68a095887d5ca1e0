// Acceptance checks: one PASS/FAIL line per criterion.

#include "sparse_anova/cli.hpp"
#include "sparse_anova/extremal.hpp"
#include "sparse_anova/model.hpp"
#include "sparse_anova/risk.hpp"
#include "sparse_anova/selector.hpp"

#include <CLI11.hpp>

#include <boost/random/mersenne_twister.hpp>
#include <boost/random/normal_distribution.hpp>
#include <boost/random/uniform_real_distribution.hpp>

#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <set>
#include <sstream>
#include <string>
#include <vector>

using namespace sparse_anova;
namespace fs = std::filesystem;

namespace {

struct Outcome {
  bool pass = false;
  std::string detail;
};

std::string fmt(const char* f, double v)
{
  char buf[64];
  std::snprintf(buf, sizeof buf, f, v);
  return buf;
}

std::string slurp(const fs::path& p)
{
  std::ifstream in(p, std::ios::binary);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

std::vector<std::vector<std::string>> read_csv(const fs::path& p)
{
  std::vector<std::vector<std::string>> rows;
  std::istringstream in(slurp(p));
  for (std::string line; std::getline(in, line);) {
    std::vector<std::string> cells;
    std::istringstream ls(line);
    for (std::string cell; std::getline(ls, cell, ',');)
      cells.push_back(cell);
    rows.push_back(cells);
  }
  return rows;
}

int run_cli(const std::vector<std::string>& args)
{
  std::ostringstream out, err;
  const int code = cli::run(args, out, err);
  if (code != cli::kExitOk)
    std::fprintf(stderr, "%s", err.str().c_str());
  return code;
}

struct ScratchDir {
  fs::path path;
  explicit ScratchDir(const std::string& tag)
    : path(fs::temp_directory_path() / ("sparse_anova_acceptance_" + tag))
  {
    fs::remove_all(path);
    fs::create_directories(path);
  }
  ~ScratchDir() { fs::remove_all(path); }
};

// Printed values of the sparsity table: per (k, d): beta, binom, log binom, eps power.
struct Table1Row {
  int k, d;
  double beta;
  long long binom;
  double log_binom;
  long long power;
};
const std::vector<Table1Row> kTable1{
  {2, 10, 0.5293, 45, 3.8067, 10000},        {2, 50, 0.7480, 1225, 7.1107, 10000},
  {2, 100, 0.7894, 4950, 8.5071, 10000},     {2, 200, 0.8190, 19900, 9.8984, 10000},
  {3, 10, 0.6257, 120, 4.7875, 63096},       {3, 50, 0.8187, 19600, 9.8833, 63096},
  {3, 100, 0.8506, 161700, 11.9935, 63096},  {3, 200, 0.8728, 1313400, 14.0881, 63096},
};

Outcome check_table1()
{
  ScratchDir dir("table1");
  const auto start = std::chrono::steady_clock::now();
  if (run_cli({"table1", "--sigma", "1", "--eps", "1e-4", "--d", "10,50,100,200", "--k", "2,3", "--out-dir",
               dir.path.string()}) != cli::kExitOk)
    return {false, "table1 command failed"};
  const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  const auto rows = read_csv(dir.path / "table1.csv");
  int matched = 0;
  std::string misses;
  // Printed to 4 decimals; one unit of the last digit covers truncation.
  const double tol = 1e-4 + 1e-9;
  for (const auto& want : kTable1)
    for (std::size_t i = 1; i < rows.size(); ++i) {
      const auto& r = rows[i];
      if (r.size() != 6 || std::stoi(r[0]) != want.k || std::stoi(r[1]) != want.d)
        continue;
      const bool ok[4] = {std::abs(std::stod(r[2]) - want.beta) <= tol, std::stoll(r[3]) == want.binom,
                          std::abs(std::stod(r[4]) - want.log_binom) <= tol, std::stoll(r[5]) == want.power};
      for (bool b : ok)
        matched += b;
      if (!(ok[0] && ok[1] && ok[2] && ok[3]))
        misses += " (k=" + std::to_string(want.k) + ",d=" + std::to_string(want.d) + ")";
    }
  const bool pass = matched == 32 && secs < 1.0;
  return {pass, std::to_string(matched) + "/32 cells within 1e-4, " + fmt("%.3f s", secs) + misses};
}

struct Table2Row {
  int k, d;
  std::vector<double> alphas;
  std::vector<double> err;
};

Outcome check_table2()
{
  const std::vector<double> all{0.01, 0.015, 0.03, 0.05, 0.07, 0.1, 0.25, 0.5, 1.0};
  const std::vector<Table2Row> rows{
    {2, 10, all, {0.15, 0.05, 0, 0, 0, 0, 0, 0, 0}},
    {3, 10, all, {0.167, 0.167, 0.167, 0.142, 0.067, 0, 0, 0, 0}},
    {2, 50, {0.01, 0.1, 1.0}, {0.167, 0, 0}},
    {2, 100, {0.01, 0.1, 1.0}, {0.167, 0, 0}},
    {3, 50, {0.01, 0.1, 1.0}, {0.167, 0, 0}},
    {3, 100, {0.01, 0.1, 1.0}, {0.167, 0, 0}},
  };
  const auto start = std::chrono::steady_clock::now();
  int cells = 0, ok = 0;
  double worst = 0.0;
  std::string misses;
  for (const auto& row : rows) {
    const ModelInstance m = design_instance(row.k, row.d);
    const auto report = estimate_risk_sweep(m, design_scaled_subset(row.k), row.alphas, SelectorConfig{}, 20, 7);
    for (std::size_t i = 0; i < row.alphas.size(); ++i) {
      const double gap = std::abs(report.rows[i].err - row.err[i]);
      worst = std::max(worst, gap);
      ++cells;
      if (gap <= 0.10)
        ++ok;
      else
        misses += " (k=" + std::to_string(row.k) + ",d=" + std::to_string(row.d) + ",alpha=" +
                  fmt("%g", row.alphas[i]) + ": " + fmt("%.4f", report.rows[i].err) + ")";
    }
  }
  const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return {ok == cells, std::to_string(ok) + "/" + std::to_string(cells) + " cells within 0.10, worst gap " +
                         fmt("%.4f", worst) + ", " + fmt("%.1f s", secs) + misses};
}

Outcome check_weight_normalization()
{
  int n = 0;
  double worst = 0.0;
  for (int k : {1, 2, 3})
    for (double sigma : {0.75, 1.0, 1.5, 2.0})
      for (double frac : {0.1, 0.2, 0.35, 0.5, 0.75}) {
        const auto p = solve_extremal(k, sigma, 1e-3, frac * max_radius(k, sigma));
        double w2 = 0.0;
        for (std::size_t i = 0; i < p.shells.size(); ++i)
          w2 += static_cast<double>(p.shells[i].multiplicity) * p.weights[i] * p.weights[i];
        worst = std::max(worst, std::abs(w2 - 0.5));
        ++n;
      }
  return {n == 60 && worst <= 1e-9, std::to_string(n) + " configurations, max |sum w^2 - 1/2| = " + fmt("%.2e", worst)};
}

Outcome check_null_calibration()
{
  SelectorConfig config;
  config.M = 10;
  const double eps = 1e-2;
  const NodeGrid g = thresholds_and_radii(10, 2, 1.0, eps, config);
  const StatisticKernel kernel(g);
  const Lattice support = g.nodes.front().profile.support();
  const int draws = 10000;
  boost::random::mt19937_64 rng(20240601);
  boost::random::normal_distribution<double> z;
  std::vector<std::vector<double>> s(static_cast<std::size_t>(g.size()));
  std::vector<double> x(support.size()), stats(static_cast<std::size_t>(g.size()));
  for (int rep = 0; rep < draws; ++rep) {
    for (double& v : x)
      v = eps * z(rng);
    kernel.evaluate(shell_sums(kernel, support, x, eps), stats);
    for (std::size_t m = 0; m < stats.size(); ++m)
      s[m].push_back(stats[m]);
  }
  int ok = 0;
  double worst = 0.0;
  for (const auto& v : s) {
    double mean = 0.0;
    for (double y : v)
      mean += y;
    mean /= draws;
    double m2 = 0.0, m4 = 0.0;
    for (double y : v) {
      const double c = (y - mean) * (y - mean);
      m2 += c;
      m4 += c * c;
    }
    const double var = m2 / (draws - 1);
    const double se_mean = std::sqrt(var / draws);
    const double se_var = std::sqrt((m4 / draws - var * var) / draws);
    const double zm = std::abs(mean) / se_mean, zv = std::abs(var - 1.0) / se_var;
    worst = std::max({worst, zm, zv});
    ok += zm <= 3.0 && zv <= 3.0;
  }
  return {ok == 10, std::to_string(ok) + "/10 nodes within 3 SE, worst " + fmt("%.2f SE", worst)};
}

Outcome check_asymptotic_constant()
{
  const std::vector<double> radii{0.08, 0.04, 0.02, 0.01, 0.005, 0.002};
  bool pass = true;
  std::string detail;
  for (int k : {1, 2}) {
    double prev_gap = 1e300;
    bool monotone = true;
    double ratio = 0.0;
    for (double r : radii) {
      ratio = a_value(k, 1.0, 1e-4, r) / a_asymptotic(k, 1.0, 1e-4, r);
      const double gap = std::abs(ratio - 1.0);
      monotone = monotone && gap < prev_gap;
      prev_gap = gap;
    }
    const bool ok = monotone && ratio >= 0.95 && ratio <= 1.05;
    pass = pass && ok;
    detail += std::string(detail.empty() ? "" : "; ") + "k=" + std::to_string(k) + ": ratio " + fmt("%.4f", ratio) + " at r=0.002" +
              (monotone ? ", monotone" : ", NOT monotone");
  }
  return {pass, detail};
}

Outcome check_monotone_continuity()
{
  int grids = 0, bad_mono = 0, bad_cont = 0;
  double worst = 0.0;
  for (int k : {1, 2, 3})
    for (double sigma : {0.75, 1.0, 2.0}) {
      ExtremalSolver solver(k, sigma);
      const double rmax = max_radius(k, sigma);
      const double lo = 0.05 * rmax, hi = 0.95 * rmax / 1.01;
      double prev = -1.0;
      for (int i = 0; i < 50; ++i) {
        const double r = lo * std::pow(hi / lo, i / 49.0);
        const double a = solver.a_value(1e-3, r);
        const double a1 = solver.a_value(1e-3, 1.01 * r);
        bad_mono += a < prev;
        bad_cont += !(a <= a1 && a1 <= 1.25 * a);
        worst = std::max(worst, a1 / a);
        prev = a;
      }
      ++grids;
    }
  return {bad_mono == 0 && bad_cont == 0, std::to_string(grids) + " grids of 50 radii, " + std::to_string(bad_mono) +
                                            " decreases, max a(1.01r)/a(r) = " + fmt("%.4f", worst)};
}

Outcome check_dichotomy()
{
  const auto start = std::chrono::steady_clock::now();
  const auto above = boundary_dichotomy_experiment(1, 1.0, 1e-3, 30, 0.5, 0.3, 50, 7).rows.front();
  const auto below = boundary_dichotomy_experiment(1, 1.0, 1e-3, 30, 0.5, -0.3, 50, 7).rows.front();
  const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  const bool pass = above.err <= 0.1 && below.err >= 0.2 && secs < 120.0;
  return {pass, "beta=0.5: Err above " + fmt("%.4f", above.err) + " (need <= 0.1), below " + fmt("%.4f", below.err) +
                  " (need >= 0.2), " + fmt("%.2f s", secs)};
}

Outcome check_phase_partition()
{
  boost::random::mt19937_64 rng(8);
  boost::random::uniform_real_distribution<double> ub(0.0, 1.0), ug(0.0, 4.0);
  int points = 0, consistent = 0;
  while (points < 10000) {
    const double b = ub(rng), g = ug(rng);
    if (b <= 0.0 || g <= 0.0)
      continue;
    ++points;
    const Phase p = phase_classify(b, g);
    const double exact = (1.0 + std::sqrt(1.0 - b)) * (1.0 + std::sqrt(1.0 - b));
    const Phase want = g > exact ? Phase::exact : g > b ? Phase::almost_full : g < b ? Phase::none : Phase::boundary;
    consistent += p == want;
  }
  std::vector<double> betas;
  for (int i = 1; i < 1000; ++i)
    betas.push_back(i / 1000.0);
  const auto curves = boundary_curves(betas);
  bool monotone = true;
  for (std::size_t i = 0; i < curves.size(); ++i) {
    monotone = monotone && curves[i].gamma_exact > curves[i].gamma_almost_full &&
               std::abs(curves[i].gamma_almost_full - curves[i].beta) <= 1e-12;
    if (i > 0)
      monotone = monotone && curves[i].gamma_exact < curves[i - 1].gamma_exact &&
                 curves[i].gamma_almost_full > curves[i - 1].gamma_almost_full;
  }
  return {consistent == points && monotone, std::to_string(consistent) + "/" + std::to_string(points) +
                                              " points consistent, curves " + (monotone ? "monotone" : "NOT monotone")};
}

Outcome check_determinism()
{
  struct Case {
    std::string name;
    std::vector<std::string> args;
    std::vector<std::string> files;
  };
  const std::vector<Case> cases{
    {"table2/shell",
     {"table2", "--d", "10", "--k", "2,3", "--alpha", "0.01,0.07,1", "--J", "6", "--seed", "3", "--sampler", "shell"},
     {"table2.csv", "table2.json"}},
    {"table2/gaussian",
     {"table2", "--d", "50", "--k", "2", "--alpha", "0.01,1", "--J", "6", "--seed", "3", "--sampler", "gaussian"},
     {"table2.csv", "table2.json"}},
    {"simulate/frequency",
     {"simulate", "--d", "10", "--k", "2", "--eps", "1e-2", "--J", "5", "--seed", "4", "--sampler", "frequency"},
     {"simulate.csv", "simulate.json"}},
    {"simulate/aggregate", {"simulate", "--d", "10", "--s", "3", "--J", "4", "--seed", "5"}, {"simulate.json"}},
    {"dichotomy", {"dichotomy", "--d", "30", "--k", "1", "--eps", "1e-3", "--J", "10"}, {"dichotomy.json"}},
  };
  int identical = 0;
  std::string misses;
  for (const auto& c : cases) {
    std::vector<std::string> outputs;
    for (const char* threads : {"1", "2", "4", "1"}) {
      ScratchDir dir("det");
      auto args = c.args;
      args.insert(args.end(), {"--threads", threads, "--out-dir", dir.path.string()});
      if (run_cli(args) != cli::kExitOk)
        return {false, c.name + " failed to run"};
      std::string all;
      for (const auto& f : c.files)
        all += slurp(dir.path / f);
      outputs.push_back(all);
    }
    const bool same = outputs[0] == outputs[1] && outputs[0] == outputs[2] && outputs[0] == outputs[3];
    identical += same;
    if (!same)
      misses += " " + c.name;
  }
  return {identical == static_cast<int>(cases.size()),
          std::to_string(identical) + "/" + std::to_string(cases.size()) +
            " experiments byte-identical across 1/2/4 threads and reruns" + misses};
}

} // namespace

int main(int argc, char** argv)
{
  CLI::App app{"Acceptance checks"};
  std::vector<int> known, only;
  app.add_option("--known-failures", known, "criteria expected to fail; reported but not counted")->delimiter(',');
  app.add_option("--only", only, "run only these criteria")->delimiter(',');
  CLI11_PARSE(app, argc, argv);

  const std::vector<std::pair<std::string, std::function<Outcome()>>> criteria{
    {"table1 sparsity values", check_table1},
    {"table2 risk values", check_table2},
    {"weight normalization", check_weight_normalization},
    {"null calibration", check_null_calibration},
    {"asymptotic-constant agreement", check_asymptotic_constant},
    {"monotonicity and continuity of a", check_monotone_continuity},
    {"boundary dichotomy", check_dichotomy},
    {"phase-diagram partition", check_phase_partition},
    {"determinism across thread counts", check_determinism},
  };
  const std::set<int> known_set(known.begin(), known.end()), only_set(only.begin(), only.end());
  int unexpected = 0;
  for (std::size_t i = 0; i < criteria.size(); ++i) {
    const int id = static_cast<int>(i) + 1;
    if (!only_set.empty() && !only_set.count(id))
      continue;
    Outcome o;
    try {
      o = criteria[i].second();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    const bool expected_failure = known_set.count(id) != 0;
    std::printf("%s criterion %d: %s: %s%s\n", o.pass ? "PASS" : "FAIL", id, criteria[i].first.c_str(),
                o.detail.c_str(), !o.pass && expected_failure ? " [known failure]" : "");
    std::fflush(stdout);
    if (!o.pass && !expected_failure)
      ++unexpected;
  }
  return unexpected == 0 ? 0 : 1;
}
