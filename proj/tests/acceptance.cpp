// Acceptance suite: one PASS/FAIL line per criterion, nonzero exit if any fails.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <numeric>
#include <sstream>
#include <string>
#include <vector>

#include "generators.hpp"
#include "matherlab/integrate.hpp"
#include "matherlab/period.hpp"
#include "matherlab/region.hpp"
#include "matherlab/scenarios.hpp"
#include "matherlab/shape.hpp"
#include "matherlab/subdiff.hpp"
#include "matherlab/systems.hpp"

using namespace matherlab;
namespace fs = std::filesystem;

namespace {

struct Outcome {
  bool ok = true;
  std::vector<std::string> failures;

  void check(bool cond, const std::string& what) {
    if (!cond) {
      ok = false;
      failures.push_back(what);
    }
  }
};

std::string row_text(const ReportRow& r) {
  std::ostringstream os;
  os << r.quantity << " = " << (r.value_text.empty() ? format_number(r.value) : r.value_text);
  if (!r.target.empty()) os << " (target " << r.target << ")";
  if (r.relation.find("tol") != std::string::npos) os << " [" << r.relation << ", tol " << format_number(r.tolerance) << "]";
  return os.str();
}

// every row whose quantity starts with one of the prefixes must exist and pass
void require_rows(Outcome& out, const ScenarioReport& rep, const std::vector<std::string>& prefixes) {
  for (const auto& p : prefixes) {
    bool found = false;
    for (const auto& r : rep.rows) {
      if (r.quantity.rfind(p, 0) != 0) continue;
      found = true;
      out.check(r.pass, row_text(r));
    }
    out.check(found, "missing row: " + p);
  }
}

double state_distance(const State& a, const State& b) {
  double m = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) m = std::max(m, std::abs(a[i] - b[i]));
  return m;
}

std::string slurp(const fs::path& p) {
  std::ifstream is(p, std::ios::binary);
  std::stringstream ss;
  ss << is.rdbuf();
  return ss.str();
}

// 1
Outcome channel_escape() {
  Outcome out;
  const double eps = 0.05, K = 2.0;
  const auto sys = systems::channel(eps, K);
  IntegrateOptions opt;
  opt.dt = 1e-3;
  const double oracle = channel_escape_time_oracle(eps, K, K);
  const auto traj = integrate(sys, State{0.0, 0.0, 0.0, 0.0}, 2.0 * oracle, opt);
  const auto esc = detect_escape(traj, regions::complement(regions::momentum_slab(2, 0, K)), &sys, opt);
  out.check(esc.has_value(), "no exit from |I1| < K");
  if (esc) {
    const double rel = std::abs(esc->time - oracle) / oracle;
    out.check(rel <= 1e-2, "exit time " + format_number(esc->time) + " vs oracle " + format_number(oracle));
  }
  return out;
}

// 2
Outcome channel_invariants() {
  Outcome out;
  const auto rep = run_channel(ChannelConfig{});
  require_rows(out, rep,
               {"orbits violating the sin(2 pi theta1) estimate, constant 2K/eps",
                "drift functional of late-window channel measures", "action of channel-orbit measures"});
  return out;
}

// 3
Outcome annulus_values() {
  Outcome out;
  const auto rep = run_annulus(AnnulusConfig{});
  require_rows(out, rep,
               {"flux of the shrink isotopy on the circle", "gamma(L) for the base circle", "<dphi, rho> at r = 3",
                "<dphi, rho> at r = 1.5", "6[dphi] lies in the shape", "<6 dphi, rho(mu)>", "-2[dphi] lies in the shape",
                "<-2 dphi, rho(nu)>"});
  return out;
}

// 4
Outcome pendulum_alpha() {
  Outcome out;
  PendulumConfig cfg;
  cfg.N = 64;
  const auto rep = run_pendulum_alpha(cfg);
  require_rows(out, rep,
               {"alpha(0)", "max |alpha_lp - alpha_lax_oleinik| - duality gap", "convexity:", "evenness:",
                "alpha(c)/|c| increasing on both rays", "subgradient inequality:", "minimising measures:"});
  return out;
}

// 5
Outcome subdifferentials() {
  Outcome out;
  const auto abs1 = SampledFunction(1, [](std::span<const double> x) { return std::abs(x[0]); }, 10.0, 1.0);
  const auto negabs = SampledFunction(1, [](std::span<const double> x) { return -std::abs(x[0]); }, 10.0, 1.0);
  const auto max2 = SampledFunction(2, [](std::span<const double> x) { return std::max(x[0], x[1]); }, 10.0, 1.0);
  const auto quad = SampledFunction(2, [](std::span<const double> x) { return 0.5 * (x[0] * x[0] + 3.0 * x[1] * x[1]); });

  {
    const std::vector<double> x{0.0};
    const auto est = clarke_subdifferential(abs1, x, 1e-3, 256, 1, 1);
    const double d = hausdorff_distance(est.hull, convex_hull({{-1.0}, {1.0}}));
    out.check(d <= 1e-3, "d_H(|x| hull, [-1, 1]) = " + format_number(d));
  }
  {
    gen::Rng rng(5);
    double worst = 0.0;
    for (int k = 0; k < 10; ++k) {
      const auto x = rng.vec(2, -2.0, 2.0);
      for (double radius : {1e-2, 1e-3}) {
        const auto est = clarke_subdifferential(quad, x, radius, 128, 3, 1);
        // gradient is 3-Lipschitz
        worst = std::max(worst, hausdorff_distance(est.hull, convex_hull({{x[0], 3.0 * x[1]}})) / (3.0 * radius));
      }
    }
    out.check(worst <= 1.0 + 1e-6, "smooth collapse ratio d_H / (3 radius) = " + format_number(worst));
  }
  {
    const std::vector<double> a{-1.0}, b{2.0};
    const std::vector<double> c{-2.0}, d{1.0};
    const std::vector<double> e{-1.0, 0.0}, f{1.0, 0.5};
    const double r1 = lebourg_witness(abs1, a, b).residual;
    const double r2 = lebourg_witness(negabs, c, d).residual;
    const double r3 = lebourg_witness(max2, e, f).residual;
    out.check(std::max({r1, r2, r3}) <= 1e-6,
              "Lebourg residuals " + format_number(r1) + ", " + format_number(r2) + ", " + format_number(r3));
  }
  {
    const std::vector<double> x{0.0, 0.0};
    const auto est = clarke_subdifferential(max2, x, 1e-3, 256, 4, 1);
    const ConvexPolytope seg = convex_hull({{1.0, 0.0}, {0.0, 1.0}});
    double vertex_err = 0.0;
    for (const auto& v : est.hull.vertices) vertex_err = std::max(vertex_err, distance_to(seg, v));
    for (const auto& v : seg.vertices) vertex_err = std::max(vertex_err, distance_to(est.hull, v));
    out.check(est.hull.vertices.size() == 2 && vertex_err <= 1e-3,
              "max(x, y) hull: " + std::to_string(est.hull.vertices.size()) + " vertices, error " + format_number(vertex_err));
  }
  return out;
}

// 6
Outcome gamma_arithmetic() {
  Outcome out;
  auto expect = [&](std::vector<std::string> in, const std::string& want) {
    const std::string got = gamma_generator(in).to_string();
    out.check(got == want, "gamma of " + std::to_string(in.size()) + " values = " + got + ", want " + want);
  };
  expect({"9/4pi"}, "9/4pi");
  expect({"16pi"}, "16pi");
  expect({"4pi", "6pi"}, "2pi");
  expect({}, "inf");
  expect({"pi", "sqrt2pi"}, "0");

  gen::Rng rng(6);
  int bad = 0;
  for (int inst = 0; inst < 100; ++inst) {
    const Rational g0(rng.integer(1, 30), rng.integer(1, 12));
    const int k = rng.integer(1, 4);
    std::vector<int> n(k), m(k);
    int g = 0;
    do {
      g = 0;
      for (int i = 0; i < k; ++i) g = std::gcd(g, n[i] = rng.integer(-9, 9));
    } while (g != 1);
    for (int i = 0; i < k; ++i) m[i] = rng.integer(-9, 9);
    std::vector<PeriodValue> base, shifted;
    for (int i = 0; i < k; ++i) {
      base.push_back({Rational(n[i]) * g0, {1, 1}});
      shifted.push_back({Rational(n[i] + m[i]) * g0, {1, 1}});
    }
    const auto gb = gamma_generator(base), gs = gamma_generator(shifted);
    bool ok = gb.kind == GammaValue::Kind::Finite && gb.value.coefficient == g0;
    if (gs.kind == GammaValue::Kind::Finite) {
      const Rational q = gs.value.coefficient / g0;
      ok = ok && q.is_integer() && q.num() >= 1;
    } else {
      ok = ok && gs.kind == GammaValue::Kind::Infinite;
    }
    bad += ok ? 0 : 1;
  }
  out.check(bad == 0, std::to_string(bad) + " of 100 lattice-shift instances fail");
  return out;
}

// 7
Outcome pathological() {
  Outcome out;
  const auto rep = run_pathological(PathologicalConfig{});
  require_rows(out, rep, {"|rho(mu1) + rho(mu2)|", "A(mu)", "support clearance of mu"});
  return out;
}

// 8
Outcome integrator() {
  Outcome out;
  struct Case {
    HamiltonianSystem sys;
    State x0;
  };
  const std::vector<Case> cases{{systems::channel(0.05, 2.0), {0.13, 0.4, 0.6, -0.01}},
                                {systems::pendulum(), {0.2, 0.9}},
                                {systems::free_particle(2), {0.1, 0.2, 0.7, -0.3}},
                                {systems::quadratic_normal_form(), {0.1, 0.2, 0.5, 0.25}},
                                {systems::pathological({1.0, 0.0}, 0.25), {0.0, 0.0, 1.05, 0.1}},
                                {systems::annulus(), {3.0, 0.5}}};
  for (const auto& c : cases) {
    IntegrateOptions fwd{.dt = 1e-3, .record_every = 100};
    const auto traj = integrate(c.sys, c.x0, 1000.0, fwd);
    out.check(traj.max_energy_drift() <= 1e-6,
              c.sys.name() + ": energy drift " + format_number(traj.max_energy_drift()) + " over T = 1000");
    const auto there = integrate(c.sys, c.x0, 10.0, {.dt = 1e-3});
    IntegrateOptions back{.dt = 1e-3};
    back.backward = true;
    const auto again = integrate(c.sys, there.lifted.back(), 10.0, back);
    const double err = state_distance(again.lifted.back(), c.x0);
    out.check(err <= 1e-8, c.sys.name() + ": reversibility error " + format_number(err));
  }
  gen::Rng rng(8);
  double worst = 0.0;
  for (int k = 0; k < 20; ++k) {
    const State x0 = rng.torus_state(2, 3.0);
    const double T = rng.uniform(1.0, 20.0);
    const auto traj = integrate(systems::free_particle(2), x0, T, {.dt = 1e-2});
    for (std::size_t i = 0; i < 2; ++i) {
      worst = std::max(worst, std::abs(traj.lifted.back()[i] - (x0[i] + x0[2 + i] * T)) / (1.0 + T));
      worst = std::max(worst, std::abs(traj.lifted.back()[2 + i] - x0[2 + i]));
    }
  }
  out.check(worst <= 1e-11, "linear flow error " + format_number(worst));
  return out;
}

// 9
Outcome pb_plus() {
  Outcome out;
  gen::Rng rng(9);
  const std::vector<int> orders{0, 1, 2, 4};
  const std::vector<double> c{1.0, 0.0};
  SoftmaxOptions o;
  o.multistarts = 2;
  for (int inst = 0; inst < 3; ++inst) {
    const auto I0 = rng.vec(2, -1.0, 1.0);
    std::vector<State> X;
    for (const auto& th : detail::torus_grid(2, 256)) X.push_back({th[0], th[1], I0[0], I0[1]});
    // dh/dI1 is I1 for |I|^2/2 and I2 for I1 I2
    const std::vector<std::pair<HamiltonianSystem, double>> cases{{systems::free_particle(2), I0[0]},
                                                                 {systems::quadratic_normal_form(), I0[1]}};
    for (const auto& [sys, want] : cases) {
      const auto sweep = pb_plus_sweep(sys, X, c, orders, o);
      for (std::size_t k = 0; k < sweep.size(); ++k) {
        out.check(std::abs(sweep[k].upper_bound - want) <= 5e-2,
                  sys.name() + ": bound " + format_number(sweep[k].upper_bound) + " vs " + format_number(want));
        if (k > 0)
          out.check(sweep[k].upper_bound <= sweep[k - 1].upper_bound,
                    sys.name() + ": bound increases at order " + std::to_string(orders[k]));
      }
    }
  }
  return out;
}

// 10
Outcome determinism() {
  Outcome out;
  const fs::path base = fs::temp_directory_path() / "matherlab_acceptance_determinism";
  fs::remove_all(base);
  auto compare = [&](const std::string& label, const std::function<ScenarioReport()>& run) {
    auto a = run(), b = run();
    emit_report(a, base / (label + "_a"));
    emit_report(b, base / (label + "_b"));
    out.check(a.artifacts == b.artifacts, label + ": artifact lists differ");
    for (const auto& name : a.artifacts)
      out.check(slurp(base / (label + "_a") / name) == slurp(base / (label + "_b") / name), label + ": " + name + " differs");
  };
  compare("pathological", [] { return run_pathological(PathologicalConfig{}); });
  compare("annulus", [] { return run_annulus(AnnulusConfig{}); });
  compare("pendulum", [] {
    PendulumConfig cfg;
    cfg.N = 32;
    cfg.c_step = 0.5;
    cfg.threads = 2;
    return run_pendulum_alpha(cfg);
  });
  fs::remove_all(base);
  return out;
}

}  // namespace

int main() {
  struct Criterion {
    const char* name;
    double budget;  // seconds
    std::function<Outcome()> run;
  };
  const std::vector<Criterion> criteria{
      {"channel escape time within 1% of the quadrature oracle", 5.0, channel_escape},
      {"channel invariants along random orbits and channel measures", 120.0, channel_invariants},
      {"annulus flux, gamma, rotation pairings and shape witnesses", 30.0, annulus_values},
      {"pendulum alpha: LP vs Lax-Oleinik, alpha(0), convexity, subgradients", 300.0, pendulum_alpha},
      {"Clarke subdifferential and Lebourg witness suite", 10.0, subdifferentials},
      {"gamma arithmetic and lattice shift on 100 instances", 1.0, gamma_arithmetic},
      {"pathological measures cancel with positive clearance", 10.0, pathological},
      {"integrator reversibility, energy drift and linear flow", 60.0, integrator},
      {"pb+ on integrable tori, nonincreasing in Fourier order", 60.0, pb_plus},
      {"byte-identical reports on rerun", 600.0, determinism},
  };

  int failed = 0;
  for (std::size_t i = 0; i < criteria.size(); ++i) {
    const auto& c = criteria[i];
    const auto t0 = std::chrono::steady_clock::now();
    Outcome out;
    try {
      out = c.run();
    } catch (const std::exception& e) {
      out.check(false, std::string("exception: ") + e.what());
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    out.check(secs < c.budget, "runtime over budget");
    char head[64];
    std::snprintf(head, sizeof head, "%s  [%2zu] ", out.ok ? "PASS" : "FAIL", i + 1);
    char tail[64];
    std::snprintf(tail, sizeof tail, "  (%.2f s, budget %.0f s)", secs, c.budget);
    std::cout << head << c.name << tail << '\n';
    for (const auto& f : out.failures) std::cout << "          " << f << '\n';
    std::cout.flush();
    failed += out.ok ? 0 : 1;
  }
  std::cout << (failed == 0 ? "all criteria pass" : std::to_string(failed) + " criteria FAIL") << '\n';
  return failed == 0 ? 0 : 1;
}
