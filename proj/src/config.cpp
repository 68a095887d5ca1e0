#include "sparse_anova/config.hpp"

#include "sparse_anova/errors.hpp"
#include "sparse_anova/model.hpp"

#include <json.hpp>

#include <algorithm>
#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

namespace sparse_anova {

using json = nlohmann::ordered_json;

std::optional<int> WindowSetting::resolve(int k) const
{
  switch (mode) {
  case Mode::design: return design_lattice_window(k);
  case Mode::none: return std::nullopt;
  case Mode::value: return value;
  }
  return std::nullopt;
}

bool operator==(const SelectorConfig& a, const SelectorConfig& b)
{
  return a.b == b.b && a.B == b.B && a.M == b.M && a.epsilon_rule == b.epsilon_rule &&
         a.epsilon_value == b.epsilon_value && a.tau_rule == b.tau_rule && a.tau_value == b.tau_value &&
         a.regime == b.regime && a.scan == b.scan;
}

bool ExperimentConfig::operator==(const ExperimentConfig& o) const
{
  return command == o.command && sigma == o.sigma && eps == o.eps && d == o.d && k == o.k && s == o.s &&
         alpha == o.alpha && noise_scale == o.noise_scale && window == o.window && components == o.components &&
         selector == o.selector && J == o.J && seed == o.seed && sampler == o.sampler &&
         draw_budget == o.draw_budget && threads == o.threads && r == o.r && include_support == o.include_support &&
         beta == o.beta && margin == o.margin && actives == o.actives && beta_steps == o.beta_steps &&
         gamma_steps == o.gamma_steps && gamma_max == o.gamma_max && output_dir == o.output_dir &&
         include_timing == o.include_timing;
}

namespace {

const std::set<std::string> kCommands{"solve-extremal", "boundary", "phase-diagram", "table1",
                                      "table2",         "simulate", "dichotomy"};

void check(bool ok, const std::string& key, const std::string& what)
{
  if (!ok)
    fail(ErrorCode::invalid_argument, key + ": " + what);
}

bool finite_positive(double x) { return std::isfinite(x) && x > 0.0; }

} // namespace

void ExperimentConfig::validate() const
{
  check(command.empty() || kCommands.count(command), "command", "unknown command '" + command + "'");
  check(finite_positive(sigma), "model.sigma", "must be positive");
  check(finite_positive(eps), "model.eps", "must be positive");
  check(!d.empty() && !k.empty(), "model.d/k", "lists must be nonempty");
  for (int di : d)
    check(di >= 2, "model.d", "dimensions must be >= 2");
  for (int ki : k)
    check(ki >= 1, "model.k", "orders must be >= 1");
  const int d_min = *std::min_element(d.begin(), d.end());
  check(*std::max_element(k.begin(), k.end()) < d_min, "model.k", "every order must be below every dimension");
  check(s >= 0 && s < d_min, "model.s", "must satisfy 0 <= s < d");
  check(!alpha.empty(), "model.alpha", "list must be nonempty");
  for (double a : alpha)
    check(finite_positive(a), "model.alpha", "values must be positive");
  check(std::isfinite(noise_scale) && noise_scale >= 0.0, "model.noise_scale", "must be >= 0");
  check(window.mode != WindowSetting::Mode::value || window.value >= 1, "model.window", "must be >= 1");
  for (const auto& c : components) {
    check(!c.subset.empty() && c.subset.size() == c.factors.size(), "model.components",
          "each entry needs one factor per coordinate");
    check(c.subset.front() >= 1 && std::is_sorted(c.subset.begin(), c.subset.end()) &&
              std::adjacent_find(c.subset.begin(), c.subset.end()) == c.subset.end() && c.subset.back() <= d_min,
          "model.components", "subset coordinates must be increasing within 1..d");
    for (const auto& f : c.factors)
      try {
        test_function(f);
      } catch (const Error& e) {
        check(false, "model.components", e.detail());
      }
    check(finite_positive(c.alpha), "model.components", "alpha must be positive");
  }
  try {
    selector.validate();
  } catch (const Error& e) {
    check(false, "selector", e.detail());
  }
  check(J >= 1, "simulation.J", "must be >= 1");
  check(finite_positive(draw_budget), "simulation.draw_budget", "must be positive");
  check(threads >= 0, "simulation.threads", "must be >= 0");
  check(finite_positive(r), "extremal.r", "must be positive");
  check(beta > 0.0 && beta < 1.0, "dichotomy.beta", "must lie in (0, 1)");
  check(!margin.empty(), "dichotomy.margin", "list must be nonempty");
  for (double mg : margin)
    check(mg != 0.0 && std::abs(mg) <= 0.5, "dichotomy.margin", "values must satisfy 0 < |margin| <= 0.5");
  check(actives >= 1, "table1.actives", "must be >= 1");
  check(beta_steps >= 2 && gamma_steps >= 2, "phase.steps", "must be >= 2");
  check(finite_positive(gamma_max), "phase.gamma_max", "must be positive");
}

namespace {

json window_to_json(const WindowSetting& w)
{
  switch (w.mode) {
  case WindowSetting::Mode::design: return "design";
  case WindowSetting::Mode::none: return "none";
  case WindowSetting::Mode::value: return w.value;
  }
  return nullptr;
}

WindowSetting window_from_json(const json& j)
{
  WindowSetting w;
  if (j.is_string()) {
    const auto s = j.get<std::string>();
    if (s == "design")
      w.mode = WindowSetting::Mode::design;
    else if (s == "none")
      w.mode = WindowSetting::Mode::none;
    else
      check(false, "model.window", "expected \"design\", \"none\" or an integer");
  } else {
    check(j.is_number_integer(), "model.window", "expected \"design\", \"none\" or an integer");
    w.mode = WindowSetting::Mode::value;
    w.value = j.get<int>();
  }
  return w;
}

//! Reads the keys of one object, rejecting any key not consumed.
class Section {
public:
  Section(const json& j, std::string name)
    : j_(j)
    , name_(std::move(name))
  {
    check(j_.is_object(), name_.empty() ? "config" : name_, "expected an object");
  }

  const json* find(const std::string& key)
  {
    seen_.insert(key);
    auto it = j_.find(key);
    return it == j_.end() ? nullptr : &*it;
  }

  std::string path(const std::string& key) const { return name_.empty() ? key : name_ + "." + key; }

  template <class T>
  void get(const std::string& key, T& out)
  {
    if (const json* v = find(key)) {
      try {
        out = v->get<T>();
      } catch (const json::exception&) {
        check(false, path(key), "wrong type");
      }
    }
  }

  Section sub(const std::string& key)
  {
    static const json empty = json::object();
    const json* v = find(key);
    return Section(v ? *v : empty, path(key));
  }

  void finish() const
  {
    for (const auto& [key, value] : j_.items())
      check(seen_.count(key) != 0, path(key), "unknown key");
  }

private:
  const json& j_;
  std::string name_;
  std::set<std::string> seen_;
};

} // namespace

std::string emit_config(const ExperimentConfig& c)
{
  json j;
  j["schema_version"] = ExperimentConfig::kSchemaVersion;
  j["command"] = c.command;

  json comps = json::array();
  for (const auto& e : c.components)
    comps.push_back({{"subset", e.subset}, {"factors", e.factors}, {"alpha", e.alpha}});
  j["model"] = {{"sigma", c.sigma},         {"eps", c.eps},       {"d", c.d},
                {"k", c.k},                 {"s", c.s},           {"alpha", c.alpha},
                {"noise_scale", c.noise_scale}, {"window", window_to_json(c.window)}, {"components", comps}};

  const auto& sc = c.selector;
  json eps_rule = sc.epsilon_rule == EpsilonRuleKind::value ? json(sc.epsilon_value) : json(to_string(sc.epsilon_rule));
  json tau_rule = sc.tau_rule == TauRuleKind::value ? json(sc.tau_value) : json("auto");
  j["selector"] = {{"b", sc.b},           {"B", sc.B},
                   {"M", sc.M},           {"epsilon", eps_rule},
                   {"tau", tau_rule},     {"regime", to_string(sc.regime)},
                   {"lepski", to_string(sc.scan)}};

  j["simulation"] = {{"J", c.J},
                     {"seed", c.seed},
                     {"sampler", to_string(c.sampler)},
                     {"draw_budget", c.draw_budget},
                     {"threads", c.threads}};
  j["extremal"] = {{"r", c.r}, {"include_support", c.include_support}};
  j["dichotomy"] = {{"beta", c.beta}, {"margin", c.margin}};
  j["table1"] = {{"actives", c.actives}};
  j["phase"] = {{"beta_steps", c.beta_steps}, {"gamma_steps", c.gamma_steps}, {"gamma_max", c.gamma_max}};
  j["output"] = {{"dir", c.output_dir}, {"include_timing", c.include_timing}};
  return j.dump(2) + "\n";
}

ExperimentConfig parse_config(const std::string& text)
{
  json j;
  try {
    j = json::parse(text);
  } catch (const json::parse_error& e) {
    fail(ErrorCode::invalid_argument, std::string("config is not valid JSON: ") + e.what());
  }

  ExperimentConfig c;
  Section top(j, "");
  int version = 0;
  top.get("schema_version", version);
  check(version == ExperimentConfig::kSchemaVersion, "schema_version",
        "expected " + std::to_string(ExperimentConfig::kSchemaVersion));
  top.get("command", c.command);

  {
    Section m = top.sub("model");
    m.get("sigma", c.sigma);
    m.get("eps", c.eps);
    m.get("d", c.d);
    m.get("k", c.k);
    m.get("s", c.s);
    m.get("alpha", c.alpha);
    m.get("noise_scale", c.noise_scale);
    if (const json* w = m.find("window"))
      c.window = window_from_json(*w);
    if (const json* comps = m.find("components")) {
      check(comps->is_array(), "model.components", "expected an array");
      for (const auto& e : *comps) {
        Section s(e, "model.components[]");
        ComponentEntry entry;
        s.get("subset", entry.subset);
        s.get("factors", entry.factors);
        s.get("alpha", entry.alpha);
        s.finish();
        c.components.push_back(std::move(entry));
      }
    }
    m.finish();
  }
  {
    Section s = top.sub("selector");
    auto& sc = c.selector;
    s.get("b", sc.b);
    s.get("B", sc.B);
    s.get("M", sc.M);
    if (const json* e = s.find("epsilon")) {
      if (e->is_number()) {
        sc.epsilon_rule = EpsilonRuleKind::value;
        sc.epsilon_value = e->get<double>();
      } else {
        check(e->is_string() && e->get<std::string>() != "value", "selector.epsilon",
              "expected a number or a rule name");
        sc.epsilon_rule = parse_epsilon_rule(e->get<std::string>());
      }
    }
    if (const json* t = s.find("tau")) {
      if (t->is_number()) {
        sc.tau_rule = TauRuleKind::value;
        sc.tau_value = t->get<double>();
      } else {
        check(t->is_string() && t->get<std::string>() == "auto", "selector.tau", "expected a number or \"auto\"");
        sc.tau_rule = TauRuleKind::automatic;
      }
    }
    std::string regime = to_string(sc.regime), scan = to_string(sc.scan);
    s.get("regime", regime);
    s.get("lepski", scan);
    sc.regime = parse_regime(regime);
    sc.scan = parse_lepski_scan(scan);
    s.finish();
  }
  {
    Section s = top.sub("simulation");
    s.get("J", c.J);
    s.get("seed", c.seed);
    std::string sampler = to_string(c.sampler);
    s.get("sampler", sampler);
    c.sampler = parse_sampler(sampler);
    s.get("draw_budget", c.draw_budget);
    s.get("threads", c.threads);
    s.finish();
  }
  {
    Section s = top.sub("extremal");
    s.get("r", c.r);
    s.get("include_support", c.include_support);
    s.finish();
  }
  {
    Section s = top.sub("dichotomy");
    s.get("beta", c.beta);
    s.get("margin", c.margin);
    s.finish();
  }
  {
    Section s = top.sub("table1");
    s.get("actives", c.actives);
    s.finish();
  }
  {
    Section s = top.sub("phase");
    s.get("beta_steps", c.beta_steps);
    s.get("gamma_steps", c.gamma_steps);
    s.get("gamma_max", c.gamma_max);
    s.finish();
  }
  {
    Section s = top.sub("output");
    s.get("dir", c.output_dir);
    s.get("include_timing", c.include_timing);
    s.finish();
  }
  top.finish();
  c.validate();
  return c;
}

ExperimentConfig load_config(const std::string& path)
{
  std::ifstream in(path);
  check(static_cast<bool>(in), path, "cannot open config file");
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_config(buf.str());
}

} // namespace sparse_anova
