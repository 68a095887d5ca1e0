#include "sparse_anova/cli.hpp"

#include "sparse_anova/config.hpp"
#include "sparse_anova/errors.hpp"
#include "sparse_anova/extremal.hpp"
#include "sparse_anova/model.hpp"
#include "sparse_anova/risk.hpp"
#include "sparse_anova/selector.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <memory>
#include <sstream>

namespace sparse_anova::cli {

namespace {

using json = nlohmann::ordered_json;
namespace fs = std::filesystem;

std::string fmt(const char* spec, double v)
{
  char buf[64];
  std::snprintf(buf, sizeof buf, spec, v);
  return buf;
}

std::string g10(double v) { return fmt("%.10g", v); }

json window_json(const std::optional<int>& w) { return w ? json(*w) : json(nullptr); }

//! Flag values are applied on top of the file config, but only when given.
class Overrides {
public:
  template <class T>
  void add(CLI::App* app, const std::string& name, const std::string& help,
           std::function<void(ExperimentConfig&, const T&)> apply)
  {
    auto value = std::make_shared<T>();
    CLI::Option* opt = app->add_option(name, *value, help);
    if constexpr (requires { typename T::value_type; } && !std::is_same_v<T, std::string>)
      opt->delimiter(',');
    entries_.push_back([opt, value, apply](ExperimentConfig& c) {
      if (opt->count() > 0)
        apply(c, *value);
    });
  }

  void add_flag(CLI::App* app, const std::string& name, const std::string& help,
                std::function<void(ExperimentConfig&)> apply)
  {
    CLI::Option* opt = app->add_flag(name, help);
    entries_.push_back([opt, apply](ExperimentConfig& c) {
      if (opt->count() > 0)
        apply(c);
    });
  }

  void apply(ExperimentConfig& c) const
  {
    for (const auto& e : entries_)
      e(c);
  }

private:
  std::vector<std::function<void(ExperimentConfig&)>> entries_;
};

WindowSetting parse_window(const std::string& s)
{
  WindowSetting w;
  if (s == "design")
    return w;
  if (s == "none") {
    w.mode = WindowSetting::Mode::none;
    return w;
  }
  std::size_t used = 0;
  int n = 0;
  try {
    n = std::stoi(s, &used);
  } catch (const std::exception&) {
    used = 0;
  }
  require(used == s.size() && !s.empty(), ErrorCode::invalid_argument,
          "--window expects design, none or an integer, got '" + s + "'");
  w.mode = WindowSetting::Mode::value;
  w.value = n;
  return w;
}

bool is_number(const std::string& s, double& v)
{
  char* end = nullptr;
  v = std::strtod(s.c_str(), &end);
  return !s.empty() && end == s.c_str() + s.size();
}

void add_model_options(Overrides& o, CLI::App* app)
{
  o.add<double>(app, "--sigma", "smoothness sigma", [](auto& c, double v) { c.sigma = v; });
  o.add<double>(app, "--eps", "noise level", [](auto& c, double v) { c.eps = v; });
  o.add<std::vector<int>>(app, "--d", "dimensions, comma separated", [](auto& c, const auto& v) { c.d = v; });
  o.add<std::vector<int>>(app, "--k", "orders, comma separated", [](auto& c, const auto& v) { c.k = v; });
  o.add<std::string>(app, "--window", "lattice window: design, none or n",
                     [](auto& c, const std::string& v) { c.window = parse_window(v); });
}

void add_selector_options(Overrides& o, CLI::App* app)
{
  o.add<double>(app, "--b", "lowest grid beta", [](auto& c, double v) { c.selector.b = v; });
  o.add<double>(app, "--B", "highest grid beta", [](auto& c, double v) { c.selector.B = v; });
  o.add<int>(app, "--M", "grid size", [](auto& c, int v) { c.selector.M = v; });
  o.add<std::string>(app, "--epsilon", "threshold epsilon: auto, log-binom, log-d, log-d-over-s or a number",
                     [](auto& c, const std::string& v) {
                       double x = 0.0;
                       if (is_number(v, x)) {
                         c.selector.epsilon_rule = EpsilonRuleKind::value;
                         c.selector.epsilon_value = x;
                       } else {
                         require(v != "value", ErrorCode::invalid_argument, "--epsilon expects a rule or a number");
                         c.selector.epsilon_rule = parse_epsilon_rule(v);
                       }
                     });
  o.add<std::string>(app, "--tau", "Lepski tau: auto or a number", [](auto& c, const std::string& v) {
    double x = 0.0;
    if (is_number(v, x)) {
      c.selector.tau_rule = TauRuleKind::value;
      c.selector.tau_value = x;
    } else {
      require(v == "auto", ErrorCode::invalid_argument, "--tau expects auto or a number");
      c.selector.tau_rule = TauRuleKind::automatic;
    }
  });
  o.add<std::string>(app, "--regime", "fixed-s or growing-s",
                     [](auto& c, const std::string& v) { c.selector.regime = parse_regime(v); });
  o.add<std::string>(app, "--lepski", "sequential or maximal",
                     [](auto& c, const std::string& v) { c.selector.scan = parse_lepski_scan(v); });
}

void add_simulation_options(Overrides& o, CLI::App* app)
{
  o.add<int>(app, "--J", "replicates", [](auto& c, int v) { c.J = v; });
  o.add<std::uint64_t>(app, "--seed", "base seed", [](auto& c, std::uint64_t v) { c.seed = v; });
  o.add<std::string>(app, "--sampler", "auto, frequency, shell or gaussian",
                     [](auto& c, const std::string& v) { c.sampler = parse_sampler(v); });
  o.add<double>(app, "--draw-budget", "shell draws allowed before auto switches to gaussian",
                [](auto& c, double v) { c.draw_budget = v; });
  o.add_flag(app, "--include-timing", "add wall times to JSON reports", [](auto& c) { c.include_timing = true; });
}

struct Context {
  ExperimentConfig config;
  std::ostream& out;
  fs::path out_dir;

  SimulationOptions options() const { return {config.sampler, config.threads, config.draw_budget}; }

  void write(const std::string& name, const std::string& text) const
  {
    fs::create_directories(out_dir);
    std::ofstream f(out_dir / name, std::ios::binary);
    require(static_cast<bool>(f), ErrorCode::invalid_argument, "cannot write " + (out_dir / name).string());
    f << text;
  }
};

json grid_json(const NodeGrid& g)
{
  json nodes = json::array();
  for (const auto& n : g.nodes)
    nodes.push_back({{"m", n.m},
                     {"beta", n.beta},
                     {"target", n.target},
                     {"r_star", n.r_star},
                     {"threshold", n.threshold},
                     {"v", n.v},
                     {"support_size", n.profile.support_size()},
                     {"support_radius", n.profile.support_radius()}});
  return {{"d", g.d}, {"k", g.k}, {"epsilon", g.epsilon}, {"tau", g.tau}, {"window", window_json(g.window)},
          {"nodes", nodes}};
}

//! Model instance from the config for dimension d and order k (or the
//! aggregate when s > 0).
ModelInstance build_instance(const ExperimentConfig& c, int d, int k)
{
  ModelInstance m;
  if (c.components.empty()) {
    m = c.s > 0 ? design_aggregate_instance(c.s, d, c.sigma, c.eps) : design_instance(k, d, c.sigma, c.eps);
  } else {
    m.d = d;
    m.sigma = c.sigma;
    m.epsilon = c.eps;
    int lo = 64, hi = 0;
    for (const auto& e : c.components) {
      SubsetId u(e.subset);
      std::vector<UnivariateGenerator> factors;
      for (const auto& f : e.factors)
        factors.push_back(test_function(f));
      m.active.emplace(u, ComponentSpec::product(u, std::move(factors)));
      if (e.alpha != 1.0)
        m.alpha[u] = e.alpha;
      lo = std::min(lo, u.size());
      hi = std::max(hi, u.size());
    }
    m.k_min = c.s > 0 ? 1 : lo;
    m.k_max = c.s > 0 ? std::max(c.s, hi) : hi;
  }
  m.windows.clear();
  for (int order = m.k_min; order <= m.k_max; ++order)
    if (auto w = c.window.resolve(order))
      m.windows[order] = *w;
  m.noise_scale = c.noise_scale;
  m.validate();
  return m;
}

//! Subset scaled by the alpha sweep.
SubsetId scaled_subset(const ExperimentConfig& c, const ModelInstance& m)
{
  if (c.components.empty())
    return design_scaled_subset(c.s > 0 ? std::min(c.s, 3) : m.k_max);
  return SubsetId(c.components.front().subset);
}

std::vector<std::pair<int, int>> pairs(const ExperimentConfig& c)
{
  std::vector<std::pair<int, int>> out;
  for (int k : c.k)
    for (int d : c.d)
      out.emplace_back(k, d);
  return out;
}

void solve_extremal_cmd(const Context& ctx)
{
  const auto& c = ctx.config;
  const int k = c.k.front();
  const auto window = c.window.resolve(k);
  const ExtremalProfile p = solve_extremal(k, c.sigma, c.eps, c.r, window);
  const ProfileResiduals res = check_profile(p);
  json shells = json::array();
  for (std::size_t i = 0; i < p.shells.size(); ++i)
    shells.push_back({{"norm2", p.shells[i].norm2},
                      {"multiplicity", p.shells[i].multiplicity},
                      {"theta_sq", p.theta_sq[i]},
                      {"weight", p.weights[i]}});
  json j = {{"schema_version", 1},
            {"k", k},
            {"sigma", c.sigma},
            {"epsilon", c.eps},
            {"r", c.r},
            {"window", window_json(window)},
            {"a_value", p.a_value},
            {"a_asymptotic", a_asymptotic(k, c.sigma, c.eps, c.r)},
            {"amplitude", p.amplitude},
            {"mu", p.mu},
            {"support_size", p.support_size()},
            {"support_radius", p.support_radius()},
            {"residuals",
             {{"l2_relative", res.l2_relative},
              {"ellipsoid_excess", res.ellipsoid_excess},
              {"a_relative", res.a_relative},
              {"weight_norm", res.weight_norm}}},
            {"shells", shells}};
  if (c.include_support) {
    json support = json::array();
    for (const auto& l : p.support())
      support.push_back({{"l", std::vector<int>(l.entries().begin(), l.entries().end())},
                         {"theta", std::sqrt(p.theta_sq_for_norm2(l.norm2()))}});
    j["support"] = support;
  }
  const std::string text = j.dump(2) + "\n";
  ctx.write("extremal_k" + std::to_string(k) + ".json", text);
  ctx.out << text;
}

void boundary_cmd(const Context& ctx)
{
  const auto& c = ctx.config;
  std::ostringstream os;
  os << "k,d,m,beta,target,r_star,threshold,v,support_size,support_radius,epsilon,tau\n";
  for (const auto& [k, d] : pairs(c)) {
    const NodeGrid g = thresholds_and_radii(d, k, c.sigma, c.eps, c.selector, c.window.resolve(k));
    for (const auto& n : g.nodes)
      os << k << ',' << d << ',' << n.m << ',' << fmt("%.4f", n.beta) << ',' << g10(n.target) << ','
         << g10(n.r_star) << ',' << g10(n.threshold) << ',' << g10(n.v) << ',' << n.profile.support_size() << ','
         << g10(n.profile.support_radius()) << ',' << g10(g.epsilon) << ',' << g10(g.tau) << '\n';
  }
  ctx.write("boundary.csv", os.str());
  ctx.out << os.str();
}

void phase_cmd(const Context& ctx)
{
  const auto& c = ctx.config;
  std::vector<double> betas;
  for (int i = 1; i <= c.beta_steps; ++i)
    betas.push_back(static_cast<double>(i) / (c.beta_steps + 1));
  std::ostringstream grid;
  grid << "beta,gamma,region\n";
  std::map<std::string, int> counts;
  for (double b : betas)
    for (int j = 1; j <= c.gamma_steps; ++j) {
      const double g = c.gamma_max * j / c.gamma_steps;
      const std::string region = to_string(phase_classify(b, g));
      ++counts[region];
      grid << g10(b) << ',' << g10(g) << ',' << region << '\n';
    }
  std::ostringstream af, ex;
  af << "beta,gamma\n";
  ex << "beta,gamma\n";
  for (const auto& p : boundary_curves(betas)) {
    af << g10(p.beta) << ',' << g10(p.gamma_almost_full) << '\n';
    ex << g10(p.beta) << ',' << g10(p.gamma_exact) << '\n';
  }
  ctx.write("phase_regions.csv", grid.str());
  ctx.write("boundary_almost_full.csv", af.str());
  ctx.write("boundary_exact.csv", ex.str());
  ctx.out << "region,count\n";
  for (const auto& [region, n] : counts)
    ctx.out << region << ',' << n << '\n';
}

void table1_cmd(const Context& ctx)
{
  const auto& c = ctx.config;
  std::ostringstream os;
  os << "k,d,beta,binom,log_binom,eps_power\n";
  for (const auto& [k, d] : pairs(c)) {
    const double L = log_binomial(d, k);
    const double beta = 1.0 - std::log(static_cast<double>(c.actives)) / L;
    const double power = std::pow(c.eps, -2.0 * k / (2.0 * c.sigma + k));
    os << k << ',' << d << ',' << fmt("%.4f", beta) << ',' << binomial(d, k) << ',' << fmt("%.4f", L) << ','
       << fmt("%.0f", power) << '\n';
  }
  ctx.write("table1.csv", os.str());
  ctx.out << os.str();
}

void table2_cmd(const Context& ctx)
{
  const auto& c = ctx.config;
  RiskReport all;
  for (const auto& [k, d] : pairs(c)) {
    const ModelInstance m = build_instance(c, d, k);
    RiskReport r = estimate_risk_sweep(m, scaled_subset(c, m), c.alpha, c.selector, c.J, c.seed, ctx.options());
    all.rows.insert(all.rows.end(), r.rows.begin(), r.rows.end());
    all.wall_time += r.wall_time;
  }
  ctx.write("table2.csv", all.table2_csv());
  ctx.write("table2.json", all.to_json(c.include_timing));
  ctx.out << all.table2_csv();
}

void simulate_cmd(const Context& ctx)
{
  const auto& c = ctx.config;
  RiskReport all;
  auto run_one = [&](const ModelInstance& m) {
    const bool unit = c.alpha.size() == 1 && c.alpha.front() == 1.0;
    RiskReport r = unit ? estimate_risk(m, c.selector, c.J, c.seed, ctx.options())
                        : estimate_risk_sweep(m, scaled_subset(c, m), c.alpha, c.selector, c.J, c.seed, ctx.options());
    all.rows.insert(all.rows.end(), r.rows.begin(), r.rows.end());
    all.wall_time += r.wall_time;
  };
  for (int d : c.d) {
    if (c.s > 0 || !c.components.empty())
      run_one(build_instance(c, d, 0));
    else
      for (int k : c.k)
        run_one(build_instance(c, d, k));
  }
  ctx.write("simulate.csv", all.rows_csv());
  ctx.write("simulate.json", all.to_json(c.include_timing));
  ctx.out << all.to_json(c.include_timing);
}

void dichotomy_cmd(const Context& ctx)
{
  const auto& c = ctx.config;
  RiskReport all;
  for (const auto& [k, d] : pairs(c))
    for (double margin : c.margin) {
      const ModelInstance m = dichotomy_instance(k, c.sigma, c.eps, d, c.beta, margin, c.window.resolve(k));
      RiskReport r = estimate_risk(m, c.selector, c.J, c.seed, ctx.options());
      for (auto& row : r.rows)
        row.label = fmt("margin=%+.2f", margin);
      all.rows.insert(all.rows.end(), r.rows.begin(), r.rows.end());
      all.wall_time += r.wall_time;
    }
  ctx.write("dichotomy.csv", all.rows_csv());
  ctx.write("dichotomy.json", all.to_json(c.include_timing));
  ctx.out << all.rows_csv();
}

void dry_run(const Context& ctx)
{
  const auto& c = ctx.config;
  json derived = json::array();
  const std::string& cmd = c.command;
  if (cmd == "table2" || cmd == "simulate" || cmd == "boundary") {
    const bool aggregate = cmd == "simulate" && c.s > 0;
    for (int d : c.d) {
      std::vector<int> orders = c.k;
      if (aggregate) {
        orders.clear();
        for (int k = 1; k <= c.s; ++k)
          orders.push_back(k);
      }
      for (int k : orders) {
        json e = grid_json(thresholds_and_radii(d, k, c.sigma, c.eps, c.selector, c.window.resolve(k),
                                                aggregate ? c.s : 0));
        if (cmd != "boundary") {
          const ModelInstance m = build_instance(c, d, aggregate ? 0 : k);
          e["beta"] = m.beta(k);
          e["actives"] = m.active_count(k);
        }
        derived.push_back(std::move(e));
      }
    }
  } else if (cmd == "dichotomy") {
    for (const auto& [k, d] : pairs(c)) {
      json e = grid_json(thresholds_and_radii(d, k, c.sigma, c.eps, c.selector, c.window.resolve(k)));
      e["beta"] = c.beta;
      e["actives"] = dichotomy_active_count(d, k, c.beta);
      json margins = json::array();
      for (double margin : c.margin) {
        const double target = (1.0 + margin) * std::sqrt(2.0 * c.beta * log_binomial(d, k));
        margins.push_back({{"margin", margin},
                           {"target", target},
                           {"r_star", solve_r_star(k, c.sigma, c.eps, target, c.window.resolve(k))}});
      }
      e["margins"] = margins;
      derived.push_back(std::move(e));
    }
  } else if (cmd == "solve-extremal") {
    const int k = c.k.front();
    derived.push_back({{"k", k},
                       {"r", c.r},
                       {"max_radius", max_radius(k, c.sigma)},
                       {"asymptotic_support_radius", asymptotic_support_radius(k, c.sigma, c.r)},
                       {"window", window_json(c.window.resolve(k))}});
  }
  json j = {{"dry_run", true}, {"command", cmd}, {"config", json::parse(emit_config(c))}, {"derived", derived}};
  ctx.out << j.dump(2) << "\n";
}

std::string one_line(std::string s)
{
  std::replace(s.begin(), s.end(), '\n', ' ');
  std::replace(s.begin(), s.end(), '\r', ' ');
  return s;
}

void report_error(std::ostream& err, const std::string& code, const std::string& command, const std::string& what)
{
  err << "error: code=" << code << " command=" << (command.empty() ? "-" : command)
      << " message=" << one_line(what) << std::endl;
}

} // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err)
{
  CLI::App app{"Sparse ANOVA component selection: extremal sequences, selectors and risk experiments"};
  app.require_subcommand(1);
  app.set_version_flag("--version", "0.1.0");

  struct Sub {
    CLI::App* app;
    Overrides overrides;
    std::string config_path;
    bool dry = false;
    bool print_config = false;
  };
  std::vector<std::unique_ptr<Sub>> subs;
  auto make = [&](const std::string& name, const std::string& help) -> Sub& {
    auto s = std::make_unique<Sub>();
    s->app = app.add_subcommand(name, help);
    s->app->add_option("--config", s->config_path, "JSON experiment config; flags override its values");
    s->app->add_flag("--dry-run", s->dry, "validate and print derived quantities without sampling");
    s->app->add_flag("--print-config", s->print_config, "print the effective config as JSON and exit");
    s->overrides.add<int>(s->app, "--threads", "worker threads (0: all cores)",
                          [](auto& c, int v) { c.threads = v; });
    s->overrides.add<std::string>(s->app, "--out-dir", std::string("output directory (default: $") + kOutDirEnv +
                                                           " or the working directory)",
                                  [](auto& c, const std::string& v) { c.output_dir = v; });
    subs.push_back(std::move(s));
    return *subs.back();
  };

  {
    Sub& s = make("solve-extremal", "solve the extremal problem at one radius and print the profile as JSON");
    add_model_options(s.overrides, s.app);
    s.overrides.add<double>(s.app, "--r", "radius", [](auto& c, double v) { c.r = v; });
    s.overrides.add_flag(s.app, "--support", "list every support frequency", [](auto& c) { c.include_support = true; });
  }
  {
    Sub& s = make("boundary", "grid of beta nodes with radii r*, thresholds and Lepski slacks");
    add_model_options(s.overrides, s.app);
    add_selector_options(s.overrides, s.app);
  }
  {
    Sub& s = make("phase-diagram", "region grid and the two boundary curves");
    s.overrides.add<int>(s.app, "--beta-steps", "beta grid points", [](auto& c, int v) { c.beta_steps = v; });
    s.overrides.add<int>(s.app, "--gamma-steps", "gamma grid points", [](auto& c, int v) { c.gamma_steps = v; });
    s.overrides.add<double>(s.app, "--gamma-max", "largest gamma", [](auto& c, double v) { c.gamma_max = v; });
  }
  {
    Sub& s = make("table1", "sparsity index, binom(d,k), log binom and eps^(-2k/(2 sigma + k))");
    add_model_options(s.overrides, s.app);
    s.overrides.add<int>(s.app, "--actives", "number of active components", [](auto& c, int v) { c.actives = v; });
  }
  for (const auto& [name, help] : std::vector<std::pair<std::string, std::string>>{
         {"table2", "risk of the adaptive selector against the signal scale alpha"},
         {"simulate", "risk of the adaptive (or aggregate) selector for one design"}}) {
    Sub& s = make(name, help);
    add_model_options(s.overrides, s.app);
    add_selector_options(s.overrides, s.app);
    add_simulation_options(s.overrides, s.app);
    s.overrides.add<std::vector<double>>(s.app, "--alpha", "signal scales, comma separated",
                                         [](auto& c, const auto& v) { c.alpha = v; });
    s.overrides.add<double>(s.app, "--noise-scale", "noise multiplier in the data (0: noiseless)",
                            [](auto& c, double v) { c.noise_scale = v; });
    if (name == "simulate")
      s.overrides.add<int>(s.app, "--s", "aggregate over orders 1..s", [](auto& c, int v) { c.s = v; });
  }
  {
    Sub& s = make("dichotomy", "risk just above and just below the selection boundary");
    add_model_options(s.overrides, s.app);
    add_selector_options(s.overrides, s.app);
    add_simulation_options(s.overrides, s.app);
    s.overrides.add<double>(s.app, "--beta", "sparsity index", [](auto& c, double v) { c.beta = v; });
    s.overrides.add<std::vector<double>>(s.app, "--margin", "relative margins, comma separated",
                                         [](auto& c, const auto& v) { c.margin = v; });
  }

  std::string command;
  try {
    std::vector<std::string> reversed(args.rbegin(), args.rend());
    app.parse(reversed);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    for (const auto& s : subs)
      if (s->app->parsed())
        out << s->app->help();
    return kExitOk;
  } catch (const CLI::CallForAllHelp&) {
    out << app.help("", CLI::AppFormatMode::All);
    return kExitOk;
  } catch (const CLI::CallForVersion& e) {
    out << e.what() << "\n";
    return kExitOk;
  } catch (const CLI::ParseError& e) {
    report_error(err, "invalid-argument", command, e.what());
    return kExitConfig;
  }

  Sub* sub = nullptr;
  for (const auto& s : subs)
    if (s->app->parsed())
      sub = s.get();
  command = sub->app->get_name();

  try {
    ExperimentConfig config = sub->config_path.empty() ? ExperimentConfig{} : load_config(sub->config_path);
    config.command = command;
    sub->overrides.apply(config);
    config.validate();

    if (sub->print_config) {
      out << emit_config(config);
      return kExitOk;
    }
    fs::path out_dir = config.output_dir;
    if (out_dir.empty()) {
      const char* env = std::getenv(kOutDirEnv);
      out_dir = env && *env ? fs::path(env) : fs::current_path();
    }
    const Context ctx{config, out, out_dir};
    if (sub->dry) {
      dry_run(ctx);
      return kExitOk;
    }
    if (command == "solve-extremal")
      solve_extremal_cmd(ctx);
    else if (command == "boundary")
      boundary_cmd(ctx);
    else if (command == "phase-diagram")
      phase_cmd(ctx);
    else if (command == "table1")
      table1_cmd(ctx);
    else if (command == "table2")
      table2_cmd(ctx);
    else if (command == "simulate")
      simulate_cmd(ctx);
    else if (command == "dichotomy")
      dichotomy_cmd(ctx);
    return kExitOk;
  } catch (const Error& e) {
    report_error(err, std::string(to_string(e.code())), command, e.detail());
    return e.numerical() ? kExitNumerical : kExitConfig;
  } catch (const fs::filesystem_error& e) {
    report_error(err, "io-error", command, e.what());
    return kExitInternal;
  } catch (const std::exception& e) {
    report_error(err, "internal", command, e.what());
    return kExitInternal;
  }
}

int run(int argc, const char* const* argv)
{
  std::vector<std::string> args;
  for (int i = 1; i < argc; ++i)
    args.emplace_back(argv[i]);
  return run(args, std::cout, std::cerr);
}

} // namespace sparse_anova::cli
