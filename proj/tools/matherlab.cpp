// matherlab command-line driver: scenarios and single operations, with CSV,
// JSON and gnuplot output.

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <limits>
#include <memory>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "matherlab/scenarios.hpp"

namespace fs = std::filesystem;
using json = nlohmann::json;
using ojson = nlohmann::ordered_json;
using namespace matherlab;

namespace {

constexpr const char* kDefaultOut = "matherlab_out";
constexpr const char* kUserSupplied = "user-supplied expectation";

struct Common {
  std::string config;
  std::string out;
  std::size_t threads = 0;
  bool threads_set = false;
  bool dry_run = false;
  bool no_csv = false;
  bool no_json = false;
  bool no_gnuplot = false;
};

struct Command {
  std::string name;
  bool needs_seed = false;
  bool takes_seed = false;
  bool takes_threads = true;
  CLI::App* app = nullptr;
  json flags = json::object();
  Common common;
};

template <typename T>
void flag(Command& cmd, const std::string& names, const std::string& key, const std::string& help) {
  json* target = &cmd.flags;
  cmd.app->add_option_function<T>(names, [target, key](const T& v) { (*target)[key] = v; }, help);
}

template <typename T>
void list_flag(Command& cmd, const std::string& names, const std::string& key, const std::string& help) {
  json* target = &cmd.flags;
  cmd.app->add_option_function<std::vector<T>>(names, [target, key](const std::vector<T>& v) { (*target)[key] = v; }, help)
      ->delimiter(',');
}

void add_common(Command& cmd) {
  auto* app = cmd.app;
  auto& c = cmd.common;
  app->add_option("--config", c.config, "JSON config file (flags override its values)");
  app->add_option("--out", c.out, "output directory (else $MATHERLAB_OUT, config \"out\", " + std::string(kDefaultOut) + ")");
  app->add_option_function<std::size_t>("--threads", [&c](std::size_t n) { c.threads = n, c.threads_set = true; },
                                        "worker threads, 0 = hardware count");
  app->add_flag("--dry-run", c.dry_run, "validate and echo the resolved config, then stop");
  app->add_flag("--no-csv", c.no_csv, "skip CSV output");
  app->add_flag("--no-json", c.no_json, "skip JSON output");
  app->add_flag("--no-gnuplot", c.no_gnuplot, "skip gnuplot output");
  if (cmd.needs_seed || cmd.takes_seed)
    flag<std::uint64_t>(cmd, "--seed", "seed", cmd.needs_seed ? "random seed (required)" : "random seed");
}

json load_config(const std::string& path) {
  if (path.empty()) return json::object();
  std::ifstream is(path);
  if (!is) throw ConfigError("cannot read config file " + path);
  json j;
  try {
    is >> j;
  } catch (const json::exception& e) {
    throw ConfigError("config file " + path + ": " + e.what());
  }
  if (!j.is_object()) throw ConfigError("config file " + path + ": top level must be an object");
  return j;
}

struct Resolved {
  json cfg;
  fs::path out;
};

Resolved resolve(const Command& cmd) {
  Resolved r;
  r.cfg = load_config(cmd.common.config);
  std::string out_from_config;
  if (r.cfg.contains("out")) {
    if (!r.cfg["out"].is_string()) throw ConfigError("config key 'out' must be a string");
    out_from_config = r.cfg["out"].get<std::string>();
    r.cfg.erase("out");
  }
  for (const auto& [k, v] : cmd.flags.items()) r.cfg[k] = v;
  if (cmd.common.threads_set && cmd.takes_threads) r.cfg["threads"] = cmd.common.threads;
  if (cmd.needs_seed && !r.cfg.contains("seed"))
    throw ConfigError(cmd.name + ": --seed is required (or \"seed\" in the config file)");

  const char* env = std::getenv("MATHERLAB_OUT");
  if (!cmd.common.out.empty())
    r.out = cmd.common.out;
  else if (env && *env)
    r.out = env;
  else if (!out_from_config.empty())
    r.out = out_from_config;
  else
    r.out = kDefaultOut;
  return r;
}

// System from a name ("annulus") or a JSON object ({"system": "channel", "eps": 0.1}).
HamiltonianSystem system_from(const json& v) {
  if (v.is_string()) {
    const auto s = v.get<std::string>();
    if (!s.empty() && s.front() == '{') {
      try {
        return systems::make_system(json::parse(s));
      } catch (const json::parse_error& e) {
        throw ConfigError(std::string("--system: ") + e.what());
      }
    }
    return systems::make_system(json{{"system", s}});
  }
  return systems::make_system(v);
}

double period_number(const json& v) {
  if (v.is_number()) return v.get<double>();
  if (v.is_string()) return parse_period_value(v.get<std::string>()).value();
  throw ConfigError("expected a number or a period value such as \"4pi\"");
}

ojson sys_echo(const json& v) {
  if (v.is_string()) {
    const auto s = v.get<std::string>();
    if (!s.empty() && s.front() == '{') return ojson::parse(s);
  }
  return ojson::parse(v.dump());
}

std::vector<State> read_state_csv(const std::string& path, std::size_t width) {
  std::ifstream is(path);
  if (!is) throw ConfigError("cannot read " + path);
  std::vector<State> out;
  std::string line;
  bool header = true;
  while (std::getline(is, line)) {
    if (line.empty() || line[0] == '#') continue;
    std::stringstream ss(line);
    std::string cell;
    State x;
    try {
      while (std::getline(ss, cell, ',')) x.push_back(std::stod(cell));
    } catch (const std::exception&) {
      if (header && out.empty()) {
        header = false;
        continue;
      }
      throw ConfigError(path + ": non-numeric value in '" + line + "'");
    }
    header = false;
    if (x.size() != width)
      throw ConfigError(path + ": expected " + std::to_string(width) + " columns, got " + std::to_string(x.size()));
    out.push_back(std::move(x));
  }
  if (out.empty()) throw ConfigError(path + ": no sample points");
  return out;
}

// ---- operations -------------------------------------------------------------

ScenarioReport run_flux(const json& cfg) {
  std::string family = "circle";
  double r0 = 4.0, r1 = 2.0;
  std::vector<double> c0{0.0}, c1{1.0}, expect;
  double expect_tol = 1e-6;
  FluxOptions fo;
  std::size_t threads = 0;
  detail::ConfigReader r(cfg, "flux");
  r.read("family", family);
  r.read("r0", r0);
  r.read("r1", r1);
  r.read("c0", c0);
  r.read("c1", c1);
  r.read("t_panels", fo.t_panels);
  r.read("s_points", fo.s_points);
  r.read("tol", fo.tol);
  r.read("expect", expect);
  r.read("expect_tol", expect_tol);
  r.read("threads", threads);
  r.finish();

  LagrangeIsotopy iso;
  if (family == "circle") {
    if (!(r0 > 0.0) || !(r1 > 0.0)) throw ConfigError("flux: radii must be > 0");
    iso = isotopies::circle_radius_path(r0, r1);
  } else if (family == "graph") {
    if (c0.size() != c1.size() || c0.empty()) throw ConfigError("flux: c0 and c1 need equal nonzero length");
    iso = isotopies::graph_path(c0, c1);
  } else {
    throw ConfigError("flux: family must be 'circle' or 'graph'");
  }

  const auto res = lagrange_flux(iso, fo);
  ScenarioReport rep;
  rep.scenario = "flux";
  rep.parameters = {{"family", family}};
  if (family == "circle") {
    rep.parameters["r0"] = r0;
    rep.parameters["r1"] = r1;
  } else {
    rep.parameters["c0"] = c0;
    rep.parameters["c1"] = c1;
  }
  rep.parameters["t_panels"] = fo.t_panels;
  rep.parameters["s_points"] = fo.s_points;
  rep.parameters["tol"] = fo.tol;
  rep.results = {{"pairing", res.pairing}, {"error_estimate", res.error_estimate}, {"isotopy", iso.parameters}};
  for (std::size_t i = 0; i < res.pairing.size(); ++i)
    std::cout << "flux[" << i << "] = " << format_number(res.pairing[i]) << '\n';

  for (std::size_t i = 0; i < res.pairing.size(); ++i)
    rep.at_most("refinement error " + std::to_string(i), res.error_estimate[i],
                fo.tol * std::max(1.0, std::abs(res.pairing[i])), sources::kDefinition);
  if (!expect.empty()) {
    if (expect.size() != res.pairing.size()) throw ConfigError("flux: expect has the wrong length");
    for (std::size_t i = 0; i < expect.size(); ++i)
      rep.near("flux pairing " + std::to_string(i), res.pairing[i], expect[i], expect_tol, kUserSupplied);
  }
  return rep;
}

ScenarioReport run_gamma(const json& cfg) {
  std::vector<std::string> generators;
  std::string expect;
  detail::ConfigReader r(cfg, "gamma");
  r.read("generators", generators);
  r.read("expect", expect);
  r.finish();

  const GammaValue g = gamma_generator(generators);
  std::cout << g.to_string() << '\n';
  ScenarioReport rep;
  rep.scenario = "gamma";
  rep.parameters = {{"generators", generators}};
  rep.results = {{"gamma", g.to_string()}, {"numeric", detail::number_or_null(g.numeric())}};
  if (!expect.empty()) {
    const std::string want = expect == "0" || expect == "inf" ? expect : parse_period_value(expect).to_string();
    rep.symbolic("generator", g.numeric(), g.to_string(), want, kUserSupplied);
  }
  return rep;
}

DataTable witness_image(const LagrangeIsotopy& iso, std::size_t samples) {
  DataTable t;
  t.name = "witness_image";
  t.title = "witness Lagrangian";
  const std::size_t p = iso.param_dim;
  for (std::size_t i = 0; i < p; ++i) t.columns.push_back("s" + std::to_string(i + 1));
  const std::size_t n = iso.dof;
  const bool torus = iso.chart == Chart::CotangentTorus;
  for (std::size_t i = 0; i < n; ++i) t.columns.push_back((torus ? "theta" : "x") + std::to_string(i + 1));
  for (std::size_t i = 0; i < n; ++i) t.columns.push_back((torus ? "I" : "y") + std::to_string(i + 1));
  for (const auto& s : detail::torus_grid(p, samples)) {
    std::vector<double> row = s;
    const State x = iso.at(1.0, s);
    row.insert(row.end(), x.begin(), x.end());
    t.rows.push_back(std::move(row));
  }
  t.x_column = p;
  if (p == 1) t.y_columns = {p + n};
  return t;
}

ScenarioReport run_kappa(const json& cfg) {
  json system = "annulus";
  double r0 = 4.0;
  json flux = 0.0;
  std::vector<double> c;
  double at_most = std::numeric_limits<double>::quiet_NaN();
  FamilySearchOptions fo;
  fo.threads = 0;
  detail::ConfigReader r(cfg, "kappa");
  r.read("system", system);
  r.read("r0", r0);
  r.read("flux", flux);
  r.read("c", c);
  r.read("order", fo.order);
  r.read("multistarts", fo.multistarts);
  r.read("samples", fo.samples);
  r.read("max_evaluations", fo.max_evaluations);
  r.read("seed", fo.seed);
  r.read("threads", fo.threads);
  r.read("at_most", at_most);
  r.finish();
  if (fo.order < 0) throw ConfigError("kappa: order must be >= 0");

  const auto sys = system_from(system);
  ScenarioReport rep;
  rep.scenario = "kappa";
  rep.parameters = {{"system", sys_echo(system)}};
  KappaResult k;
  if (sys.chart() == Chart::Plane) {
    const double f = period_number(flux);
    rep.parameters["r0"] = r0;
    rep.parameters["flux"] = ojson::parse(flux.dump());
    k = kappa_estimate_circle(sys, r0, f, fo);
  } else {
    if (c.empty()) c.assign(sys.dof(), 0.0);
    rep.parameters["c"] = c;
    k = kappa_estimate_graph(sys, c, fo);
  }
  rep.parameters["order"] = fo.order;
  rep.parameters["multistarts"] = fo.multistarts;
  rep.parameters["samples"] = fo.samples;
  rep.parameters["max_evaluations"] = fo.max_evaluations;
  rep.parameters["seed"] = fo.seed;

  std::cout << "kappa " << k.side << " = " << format_number(k.upper_bound) << '\n';
  rep.results = {{"value", k.upper_bound},
                 {"side", k.side},
                 {"family", k.family},
                 {"parameters", k.parameters},
                 {"flux", k.flux},
                 {"flux_target", k.flux_target},
                 {"witness", k.witness.parameters}};
  for (std::size_t i = 0; i < k.flux.size(); ++i)
    rep.near("witness flux " + std::to_string(i), k.flux[i], k.flux_target[i], 1e-6, sources::kDefinition);
  if (!std::isnan(at_most)) rep.at_most("kappa upper bound", k.upper_bound, at_most, kUserSupplied);
  rep.tables.push_back(witness_image(k.witness, fo.samples));
  return rep;
}

ScenarioReport run_pbplus(const json& cfg) {
  json system = "free";
  std::vector<double> c, torus_I;
  std::vector<int> orders{0, 1, 2, 4};
  std::size_t grid = 64;
  std::string x_file;
  double expect = std::numeric_limits<double>::quiet_NaN(), expect_tol = 5e-2;
  SoftmaxOptions so;
  so.threads = 0;
  detail::ConfigReader r(cfg, "pbplus");
  r.read("system", system);
  r.read("c", c);
  r.read("orders", orders);
  r.read("torus_I", torus_I);
  r.read("grid", grid);
  r.read("x_file", x_file);
  r.read("seed", so.seed);
  r.read("multistarts", so.multistarts);
  r.read("beta_end", so.beta_end);
  r.read("threads", so.threads);
  r.read("expect", expect);
  r.read("expect_tol", expect_tol);
  r.finish();

  const auto sys = system_from(system);
  if (sys.chart() != Chart::CotangentTorus) throw ConfigError("pbplus: system must live on T*T^n");
  const std::size_t n = sys.dof();
  if (c.empty()) {
    c.assign(n, 0.0);
    c[0] = 1.0;
  }
  if (orders.empty()) throw ConfigError("pbplus: orders must not be empty");
  for (int M : orders)
    if (M < 0) throw ConfigError("pbplus: orders must be >= 0");

  std::vector<State> X;
  ScenarioReport rep;
  rep.scenario = "pbplus";
  rep.parameters = {{"system", sys_echo(system)}, {"c", c}, {"orders", orders}};
  if (!x_file.empty()) {
    if (!torus_I.empty()) throw ConfigError("pbplus: give either torus_I or x_file");
    X = read_state_csv(x_file, 2 * n);
    rep.parameters["x_file"] = x_file;
    rep.parameters["x_points"] = X.size();
  } else {
    if (torus_I.size() != n) throw ConfigError("pbplus: torus_I needs " + std::to_string(n) + " entries");
    if (grid < 1) throw ConfigError("pbplus: grid must be >= 1");
    std::size_t total = 1;
    for (std::size_t i = 0; i < n; ++i) total *= grid;
    for (std::size_t k = 0; k < total; ++k) {
      State x(2 * n);
      std::size_t rest = k;
      for (std::size_t i = 0; i < n; ++i) {
        x[i] = static_cast<double>(rest % grid) / static_cast<double>(grid);
        rest /= grid;
        x[n + i] = torus_I[i];
      }
      X.push_back(std::move(x));
    }
    rep.parameters["torus_I"] = torus_I;
    rep.parameters["grid"] = grid;
  }
  rep.parameters["seed"] = so.seed;
  rep.parameters["multistarts"] = so.multistarts;
  rep.parameters["beta_end"] = so.beta_end;

  const auto sweep = pb_plus_sweep(sys, X, c, orders, so);
  DataTable t;
  t.name = "orders";
  t.title = "pb+ upper bound by Fourier order";
  t.columns = {"order", "upper_bound"};
  t.y_columns = {1};
  ojson res = ojson::array();
  bool monotone = true;
  for (std::size_t i = 0; i < sweep.size(); ++i) {
    const auto& s = sweep[i];
    t.rows.push_back({static_cast<double>(s.order), s.upper_bound});
    res.push_back({{"order", s.order}, {"upper_bound", s.upper_bound}, {"coefficients", s.coefficients}});
    std::cout << "order " << s.order << ": pb+ " << s.side << " = " << format_number(s.upper_bound) << '\n';
    if (i > 0 && orders[i] >= orders[i - 1] && s.upper_bound > sweep[i - 1].upper_bound + 1e-12) monotone = false;
  }
  rep.results = {{"side", "upper bound"}, {"orders", res}};
  rep.tables.push_back(std::move(t));
  rep.holds("bound nonincreasing in order", monotone, sources::kDefinition);
  if (!std::isnan(expect)) rep.near("pb+ at highest order", sweep.back().upper_bound, expect, expect_tol, kUserSupplied);
  return rep;
}

SampledFunction builtin_function(const std::string& name, std::size_t m) {
  if (name == "abs" || name == "neg-abs") {
    if (m != 1) throw ConfigError("subdiff: " + name + " takes a 1-D point");
    const double s = name == "abs" ? 1.0 : -1.0;
    return SampledFunction(1, [s](std::span<const double> x) { return s * std::abs(x[0]); }, 10.0, 1.0);
  }
  if (name == "max") {
    if (m != 2) throw ConfigError("subdiff: max takes a 2-D point");
    return SampledFunction(2, [](std::span<const double> x) { return std::max(x[0], x[1]); }, 10.0, 1.0);
  }
  if (name == "norm")
    return SampledFunction(m, [](std::span<const double> x) { return detail::norm2(x); }, 10.0, 1.0);
  if (name == "quadratic")
    return SampledFunction(m, [](std::span<const double> x) { return 0.5 * detail::dot(x, x); })
        .with_gradient([](std::span<const double> x, std::span<double> g) { std::copy(x.begin(), x.end(), g.begin()); });
  throw ConfigError("subdiff: unknown function '" + name + "' (abs, neg-abs, max, norm, quadratic)");
}

ScenarioReport run_subdiff(const json& cfg) {
  std::string function = "abs";
  std::vector<double> x{0.0}, y, expect_interval;
  double radius = 1e-3, expect_tol = 1e-3;
  std::size_t samples = 256, threads = 0;
  std::uint64_t seed = 1;
  detail::ConfigReader r(cfg, "subdiff");
  r.read("function", function);
  r.read("x", x);
  r.read("y", y);
  r.read("radius", radius);
  r.read("samples", samples);
  r.read("seed", seed);
  r.read("threads", threads);
  r.read("expect_interval", expect_interval);
  r.read("expect_tol", expect_tol);
  r.finish();
  if (x.empty()) throw ConfigError("subdiff: x must not be empty");

  const auto f = builtin_function(function, x.size());
  const auto est = clarke_subdifferential(f, x, radius, samples, seed, threads);
  ScenarioReport rep;
  rep.scenario = "subdiff";
  rep.parameters = {{"function", function}, {"x", x}, {"radius", radius}, {"samples", samples}, {"seed", seed}};
  rep.results = {{"hull", polytope_to_json(est.hull)},
                 {"refined", polytope_to_json(est.refined)},
                 {"box_lo", est.box_lo},
                 {"box_hi", est.box_hi},
                 {"skipped", est.skipped}};
  std::cout << "clarke hull: " << polytope_to_json(est.hull).dump() << '\n';

  if (!expect_interval.empty()) {
    if (est.hull.dim != 1 || expect_interval.size() != 2) throw ConfigError("subdiff: expect_interval needs a 1-D function and two values");
    const auto [lo, hi] = est.hull.interval();
    rep.near("hull lower end", lo, expect_interval[0], expect_tol, kUserSupplied);
    rep.near("hull upper end", hi, expect_interval[1], expect_tol, kUserSupplied);
  }
  if (!y.empty()) {
    rep.parameters["y"] = y;
    const auto w = lebourg_witness(f, x, y, 1000, seed);
    rep.results["lebourg"] = {{"t", w.t}, {"point", w.point}, {"subgradient", w.subgradient}, {"residual", w.residual}};
    std::cout << "lebourg witness t = " << format_number(w.t) << ", residual " << format_number(w.residual) << '\n';
    rep.at_most("lebourg residual", w.residual, 1e-6, sources::kDefinition);
  }

  DataTable t;
  t.name = "gradients";
  t.title = "sampled gradients";
  for (std::size_t i = 0; i < f.dim; ++i) t.columns.push_back("g" + std::to_string(i + 1));
  for (const auto& g : est.gradients) t.rows.push_back(g);
  if (f.dim == 2) t.y_columns = {1};
  rep.tables.push_back(std::move(t));
  return rep;
}

// ---- scenarios ----------------------------------------------------------------

template <typename Config>
Config parsed(const json& cfg) {
  Config c = Config::from_json(cfg);
  c.validate();
  return c;
}

int dispatch(const Command& cmd) {
  const Resolved res = resolve(cmd);
  const json& cfg = res.cfg;
  const auto& name = cmd.name;

  ScenarioReport rep;
  auto finish_dry = [&](const ojson& echo) {
    std::cout << "config ok: " << name << ' ' << echo.dump() << '\n';
    return 0;
  };
  try {
    if (name == "channel") {
      const auto c = parsed<ChannelConfig>(cfg);
      if (cmd.common.dry_run) return finish_dry(c.to_json());
      rep = run_channel(c);
    } else if (name == "annulus") {
      const auto c = parsed<AnnulusConfig>(cfg);
      if (cmd.common.dry_run) return finish_dry(c.to_json());
      rep = run_annulus(c);
    } else if (name == "pendulum-alpha") {
      const auto c = parsed<PendulumConfig>(cfg);
      if (cmd.common.dry_run) return finish_dry(c.to_json());
      rep = run_pendulum_alpha(c);
    } else if (name == "pathological") {
      const auto c = parsed<PathologicalConfig>(cfg);
      if (cmd.common.dry_run) return finish_dry(c.to_json());
      rep = run_pathological(c);
    } else if (cmd.common.dry_run) {
      // operations validate lazily; a dry run only checks the config shape
      return finish_dry(ojson::parse(cfg.dump()));
    } else if (name == "flux") {
      rep = run_flux(cfg);
    } else if (name == "gamma") {
      rep = run_gamma(cfg);
    } else if (name == "kappa") {
      rep = run_kappa(cfg);
    } else if (name == "pbplus") {
      rep = run_pbplus(cfg);
    } else if (name == "subdiff") {
      rep = run_subdiff(cfg);
    }
  } catch (const ConfigError&) {
    throw;
  } catch (const DimensionError& e) {
    throw ConfigError(e.what());
  } catch (const Error& e) {
    fs::create_directories(res.out);
    const fs::path path = res.out / (name + "_error.json");
    ojson j;
    j["scenario"] = name;
    j["error"] = e.what();
    j["config"] = ojson::parse(cfg.dump());
    std::ofstream(path, std::ios::binary) << j.dump(2) << '\n';
    std::cerr << "numerical failure: " << e.what() << "\nerror report: " << path.string() << '\n';
    return 3;
  }

  EmitOptions emit{!cmd.common.no_csv, !cmd.common.no_json, !cmd.common.no_gnuplot};
  emit_report(rep, res.out, emit);
  print_summary(std::cout, rep);
  std::cout << "output: " << res.out.string() << '\n';
  return rep.all_pass() ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"matherlab: invariant measures, Mather alpha and Lagrangian shape estimates"};
  app.require_subcommand(1);
  app.set_help_all_flag("--help-all", "show help for every subcommand");

  std::vector<std::unique_ptr<Command>> cmds;
  auto make = [&](std::string name, std::string help, bool needs_seed) -> Command& {
    auto cmd = std::make_unique<Command>();
    cmd->name = std::move(name);
    cmd->needs_seed = needs_seed;
    cmd->takes_seed = cmd->name == "annulus";
    cmd->takes_threads = cmd->name != "gamma" && cmd->name != "pathological";
    cmd->app = app.add_subcommand(cmd->name, std::move(help));
    add_common(*cmd);
    cmds.push_back(std::move(cmd));
    return *cmds.back();
  };

  {
    auto& c = make("channel", "superconductivity channel: escape, invariants, recurrence", true);
    flag<double>(c, "--eps", "eps", "perturbation size");
    flag<double>(c, "--K", "K", "channel half-length");
    flag<double>(c, "--T", "T", "channel orbit horizon");
    flag<double>(c, "--dt", "dt", "time step");
    flag<std::size_t>(c, "--n-orbits", "n_orbits", "random orbits for the estimate check");
    flag<double>(c, "--orbit-T", "orbit_T", "random orbit horizon");
  }
  {
    auto& c = make("annulus", "annulus example: flux, period group, rotation, shape witnesses", false);
    flag<double>(c, "--T", "T", "orbit horizon");
    flag<double>(c, "--dt", "dt", "time step");
    flag<double>(c, "--r-mu", "r_mu", "radius of the inner invariant circle");
    flag<double>(c, "--r-nu", "r_nu", "radius of the outer invariant circle");
    flag<double>(c, "--r-base", "r_base", "radius of the base circle");
    flag<double>(c, "--r-target", "r_target", "radius after the shrink isotopy");
    flag<int>(c, "--fourier-order", "fourier_order", "order of the shape families");
  }
  {
    auto& c = make("pendulum-alpha", "Mather alpha of the pendulum by LP and Lax-Oleinik", true);
    flag<double>(c, "--c-min", "c_min", "first cohomology class");
    flag<double>(c, "--c-max", "c_max", "last cohomology class");
    flag<double>(c, "--c-step", "c_step", "class step");
    flag<std::size_t>(c, "--N", "N", "grid size");
    flag<double>(c, "--R", "R", "displacement cap");
    flag<std::size_t>(c, "--substeps", "substeps", "action quadrature substeps");
  }
  {
    auto& c = make("pathological", "two measures with opposite rotation and zero action", true);
    list_flag<double>(c, "--p0", "p0", "momentum of the bump centre, e.g. 1,0");
    flag<double>(c, "--r", "r", "bump radius");
    flag<double>(c, "--T", "T", "orbit horizon");
    flag<double>(c, "--dt", "dt", "time step");
  }
  {
    auto& c = make("flux", "Lagrange flux of a circle or graph isotopy", false);
    flag<std::string>(c, "--family", "family", "circle or graph");
    flag<double>(c, "--r0", "r0", "initial radius");
    flag<double>(c, "--r1", "r1", "final radius");
    list_flag<double>(c, "--c0", "c0", "initial graph class");
    list_flag<double>(c, "--c1", "c1", "final graph class");
    flag<std::size_t>(c, "--t-panels", "t_panels", "Gauss panels in t");
    flag<std::size_t>(c, "--s-points", "s_points", "trapezoid points in s");
    flag<double>(c, "--tol", "tol", "refinement tolerance");
    list_flag<double>(c, "--expect", "expect", "expected pairings");
    flag<double>(c, "--expect-tol", "expect_tol", "tolerance for --expect");
  }
  {
    auto& c = make("gamma", "positive generator of a period group", false);
    list_flag<std::string>(c, "--generators", "generators", "values such as 4pi,6pi");
    flag<std::string>(c, "--expect", "expect", "expected generator (exact)");
  }
  {
    auto& c = make("kappa", "upper bound on the kappa function by shape-family search", true);
    flag<std::string>(c, "--system", "system", "system name or JSON object");
    flag<double>(c, "--r0", "r0", "base circle radius (planar systems)");
    flag<std::string>(c, "--flux", "flux", "flux pairing, e.g. 12pi (planar systems)");
    list_flag<double>(c, "--c", "c", "flux class (torus systems)");
    flag<int>(c, "--order", "order", "Fourier order of the family");
    flag<std::size_t>(c, "--multistarts", "multistarts", "random restarts");
    flag<std::size_t>(c, "--samples", "samples", "sample points on the Lagrangian");
    flag<std::size_t>(c, "--max-evaluations", "max_evaluations", "objective evaluations per start");
    flag<double>(c, "--at-most", "at_most", "expected upper bound");
  }
  {
    auto& c = make("pbplus", "upper bound on pb+ over a sample set", true);
    flag<std::string>(c, "--system", "system", "system name or JSON object");
    list_flag<double>(c, "--c", "c", "cohomology class");
    list_flag<int>(c, "--orders", "orders", "Fourier orders, e.g. 0,1,2,4");
    list_flag<double>(c, "--torus-I", "torus_I", "sample the torus at this momentum");
    flag<std::size_t>(c, "--grid", "grid", "grid points per angle for --torus-I");
    flag<std::string>(c, "--x-file", "x_file", "CSV of sample states");
    flag<std::size_t>(c, "--multistarts", "multistarts", "random restarts");
    flag<double>(c, "--beta-end", "beta_end", "final softmax sharpness");
    flag<double>(c, "--expect", "expect", "expected bound at the highest order");
    flag<double>(c, "--expect-tol", "expect_tol", "tolerance for --expect");
  }
  {
    auto& c = make("subdiff", "Clarke subdifferential and mean-value witness of a built-in function", true);
    flag<std::string>(c, "--function", "function", "abs, neg-abs, max, norm or quadratic");
    list_flag<double>(c, "--x", "x", "base point");
    list_flag<double>(c, "--y", "y", "second point for the mean-value witness");
    flag<double>(c, "--radius", "radius", "sampling radius");
    flag<std::size_t>(c, "--samples", "samples", "gradient samples");
    list_flag<double>(c, "--expect-interval", "expect_interval", "expected 1-D hull lo,hi");
    flag<double>(c, "--expect-tol", "expect_tol", "tolerance for --expect-interval");
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 2;
  }

  for (const auto& cmd : cmds) {
    if (!cmd->app->parsed()) continue;
    try {
      return dispatch(*cmd);
    } catch (const ConfigError& e) {
      std::cerr << "config error: " << e.what() << '\n';
      return 2;
    } catch (const Error& e) {
      std::cerr << "error: " << e.what() << '\n';
      return 3;
    } catch (const std::exception& e) {
      std::cerr << "error: " << e.what() << '\n';
      return 3;
    }
  }
  return 2;
}
