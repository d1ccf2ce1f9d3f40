// One PASS/FAIL line per acceptance criterion; exit status 1 if any fails.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <numbers>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "oracles.hpp"
#include "plap/config_io.hpp"
#include "plap/errors.hpp"

using namespace plap;
namespace fs = std::filesystem;

namespace {

constexpr double pi2 = std::numbers::pi * std::numbers::pi;
const Weight one = Weight::constant(1.0);

struct Verdict {
  bool pass = true;
  std::string detail;
  void require(bool ok, const std::string& what) {
    if (!ok) {
      pass = false;
      detail += (detail.empty() ? "" : "; ") + std::string("FAILED ") + what;
    }
  }
  void note(const std::string& s) { detail += (detail.empty() ? "" : "; ") + s; }
};

std::string fmt(const char* f, double x) {
  char buf[96];
  std::snprintf(buf, sizeof buf, f, x);
  return buf;
}

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

ProblemSpec unit_spec(const MeshPtr& mesh, double p, double q) {
  ProblemSpec s;
  s.mesh = mesh;
  s.p = p;
  s.q = q;
  return s;
}

// 1. Eigenvalue accuracy and runtime.
Verdict criterion1() {
  Verdict v;
  auto mesh = build_interval(0, 1, 512);
  auto t0 = std::chrono::steady_clock::now();
  auto e2 = principal_eigenpair(mesh, one, 2.0);
  const double t2 = seconds_since(t0);
  const auto lin = oracles::linear_eig_oracle_1d(512, std::vector<double>(511, 1.0));
  v.require(std::abs(e2.lam - pi2) <= 1e-2, "p=2 |lam - pi^2| <= 1e-2");
  v.require(std::abs(e2.lam - lin.value) <= 1e-2, "p=2 agreement with the tridiagonal oracle");
  v.require(t2 < 5.0, "p=2 runtime < 5 s");
  v.note("p=2 lam " + fmt("%.10g", e2.lam) + " (oracle " + fmt("%.10g", lin.value) + ", " + fmt("%.2fs", t2) + ")");

  t0 = std::chrono::steady_clock::now();
  auto e3 = principal_eigenpair(mesh, one, 3.0);
  const double t3 = seconds_since(t0);
  const double guess = oracles::plap_lambda1_closed_form(3.0);
  const double shoot = oracles::plap_shooting_oracle_1d(3.0, 0.5 * guess, 2.0 * guess);
  v.require(std::abs(e3.lam - shoot) <= 1e-2 * shoot, "p=3 within 1% of the shooting oracle");
  v.require(t3 < 60.0, "p=3 runtime < 60 s");
  v.note("p=3 lam " + fmt("%.10g", e3.lam) + " (shooting " + fmt("%.10g", shoot) + ", " + fmt("%.2fs", t3) + ")");
  return v;
}

// 2. Domain monotonicity.
Verdict criterion2() {
  Verdict v;
  auto mesh = build_interval(0, 1, 512);
  const auto whole = principal_eigenpair(mesh, one, 2.0);
  const auto half = subdomain_eigenvalue(box_mask(mesh, {0.0, 0.5, 0.0, 0.0}), one, 2.0);
  v.require(half.lam > whole.lam, "lam1(0, 1/2) > lam1(0, 1)");
  v.require(std::abs(half.lam - 4 * pi2) <= 4e-2, "|lam1(0, 1/2) - 4 pi^2| <= 4e-2");
  v.note("half " + fmt("%.10g", half.lam) + ", whole " + fmt("%.10g", whole.lam));
  return v;
}

// 3. MP region for p in {2, 3}.
Verdict criterion3() {
  Verdict v;
  auto mesh = build_interval(0, 1, 256);
  for (double p : {2.0, 3.0}) {
    const auto spec = unit_spec(mesh, p, 1.5);
    const double lam1 = principal_eigenpair(mesh, one, p).lam;
    std::vector<double> lams;
    for (int k = 0; k <= 12; ++k) lams.push_back(0.95 * lam1 * k / 12.0);
    // eta* decreases in lam, so its value at the top of the range bounds the
    // admissible positive eta for the whole column.
    const double es = eta_star(mesh, one, one, one, p, 1.5, 0.95 * lam1).value;
    const double small = std::min(1e-2, 0.5 * es);
    RegionOptions o;
    o.compute_eta_star = false;
    const auto map = sweep(spec, lams, {-small, 0.0, small}, o);
    int total = 0, positive = 0;
    for (const auto& c : map.cells)
      for (const auto& r : c.starts) ++total, positive += r.converged && r.sign_class == SignClass::Positive;
    v.require(small < es, "small eta below eta*");
    v.require(total > 0 && positive == total, "all outcomes positive");
    v.require(map.counterexamples.empty(), "zero counterexamples");
    v.note("p=" + fmt("%g", p) + ": " + std::to_string(positive) + "/" + std::to_string(total) + " positive, eta=+-" +
           fmt("%.3g", small) + " (eta* " + fmt("%.4g", es) + "), counterexamples " +
           std::to_string(map.counterexamples.size()));
  }
  return v;
}

// 4. AMP region: p = 2 against the linear oracle, p = 3 measured delta-hat.
Verdict criterion4() {
  Verdict v;
  {
    const int n = 256;
    auto mesh = build_interval(0, 1, n);
    const double lam1 = principal_eigenpair(mesh, one, 2.0).lam;
    const double lo = 1.05 * lam1, hi = 3.8 * pi2;
    int cells = 0, negative = 0, total = 0;
    double worst = 0.0;
    for (int k = 1; k <= 20; ++k) {
      const double lam = lo + (hi - lo) * k / 21.0;
      auto spec = unit_spec(mesh, 2.0, 1.5);
      spec.lam = lam;
      const auto res = multi_start_solve(spec, {});
      const auto ref = oracles::linear_bvp_oracle_1d(lam, std::vector<double>(n + 1, 1.0), n);
      double sup = 0.0;
      for (double x : ref.samples) sup = std::max(sup, std::abs(x));
      ++cells;
      for (const auto& o : res.starts) {
        ++total;
        if (!o.converged) continue;
        bool all_neg = true;
        double diff = 0.0;
        for (int vtx : mesh->interior_vertices()) {
          const auto i = static_cast<std::size_t>(vtx);
          all_neg = all_neg && o.u[i] < 0.0;
          diff = std::max(diff, std::abs(o.u[i] - ref.samples[i]));
        }
        negative += all_neg;
        worst = std::max(worst, diff / std::max(1.0, sup));
      }
    }
    v.require(negative == total, "p=2 every outcome negative at every interior vertex");
    v.require(worst <= 1e-3, "p=2 sup-norm agreement with the linear oracle <= 1e-3");
    v.note("p=2: " + std::to_string(negative) + "/" + std::to_string(total) + " negative over " +
           std::to_string(cells) + " lam values in (1.05 lam1, 3.8 pi^2), max oracle deviation " + fmt("%.2e", worst));
  }
  {
    auto mesh = build_interval(0, 1, 256);
    const auto spec = unit_spec(mesh, 3.0, 1.5);
    const double lam1 = principal_eigenpair(mesh, one, 3.0).lam;
    std::vector<double> lams;
    for (int k = 1; k <= 10; ++k) lams.push_back(lam1 * (1.0 + 0.02 * k));
    RegionOptions o;
    o.compute_eta_star = false;
    o.eta_bar = 1.0;
    const auto map = sweep(spec, lams, {0.0}, o);
    v.require(map.delta_hat_amp > 0.0, "p=3 measured delta-hat > 0");
    v.require(map.counterexamples.empty(), "p=3 zero counterexamples");
    v.note("p=3: delta_hat_amp " + fmt("%.6g", map.delta_hat_amp) + " (" + fmt("%.3g", map.delta_hat_amp / lam1) +
           " lam1)");
  }
  return v;
}

// 5. Nonnegativity below eta*.
Verdict criterion5() {
  Verdict v;
  auto mesh = build_interval(0, 1, 256);
  const auto spec = unit_spec(mesh, 2.0, 1.5);
  const double lam1 = principal_eigenpair(mesh, one, 2.0).lam;
  int total = 0, bad = 0, ces = 0;
  for (double frac : {0.0, 0.25, 0.5, 0.75, 0.95}) {
    const double lam = frac * lam1;
    RegionOptions o;
    o.eta_bar = 1.0;
    o.eta_star.starts = 16;
    auto ctx = make_context(spec, {lam}, o);
    const double es = ctx.eta_star_plus.at(0).second;
    std::vector<double> etas{0.0, 0.25 * es, 0.5 * es, 0.9 * es};
    const auto map = sweep(spec, {lam}, etas, o);
    ces += static_cast<int>(map.counterexamples.size());
    for (const auto& c : map.cells)
      for (const auto& r : c.starts) {
        ++total;
        bad += !(r.converged && (r.sign_class == SignClass::Positive || r.sign_class == SignClass::NonnegWithZeros));
      }
  }
  v.require(total > 0 && bad == 0, "no outcome with a negative interior vertex");
  v.require(ces == 0, "zero counterexamples");
  v.note(std::to_string(total - bad) + "/" + std::to_string(total) + " nonnegative, counterexamples " +
         std::to_string(ces));
  return v;
}

// 6. eta* bracketing and decay toward lam1.
Verdict criterion6() {
  Verdict v;
  auto mesh = build_interval(0, 1, 256);
  const double lam1 = principal_eigenpair(mesh, one, 2.0).lam;
  double prev = std::numeric_limits<double>::infinity();
  std::string vals;
  for (double frac : {0.0, 0.25, 0.5, 0.75, 0.95, 1.0}) {
    const auto r = eta_star(mesh, one, one, one, 2.0, 1.5, frac * lam1);
    vals += fmt(" %.5g", r.value);
    if (frac < 1.0) {
      v.require(r.lower_bound && *r.lower_bound <= r.value, "lower bound <= value at " + fmt("%g", frac) + " lam1");
      v.require(std::isfinite(r.value), "finite at " + fmt("%g", frac) + " lam1");
      if (r.lower_bound && frac == 0.5) vals += fmt(" (lb %.5g)", *r.lower_bound);
    } else {
      v.require(r.value <= 1e-3, "value at lam1 <= 1e-3");
    }
    v.require(r.value < prev, "strictly decreasing along the grid");
    prev = r.value;
  }
  v.note("eta* at {0, .25, .5, .75, .95, 1} lam1:" + vals);
  return v;
}

// 7. Picone suite.
Verdict criterion7() {
  Verdict v;
  int holds = 0;
  for (int k = 1; k <= 50; ++k) holds += picone_polynomial_check(2.0, 1.0 + k / 51.0).holds;
  v.require(holds == 50, "p=2 holds for 50 sampled q");
  const auto r3 = picone_polynomial_check(3.0, 1.5);
  v.require(!r3.holds, "(3, 1.5) fails");
  v.require(r3.value_at_zero == -0.5, "(3, 1.5) value at s=0 equals -0.5 exactly");
  v.note("p=2: " + std::to_string(holds) + "/50 hold; (3,1.5): value at 0 " + fmt("%.17g", r3.value_at_zero) +
         ", global min " + fmt("%.6g", r3.min_value) + " at s=" + fmt("%.6g", r3.argmin));
  auto mesh = build_interval(0, 1, 64);
  int violations = 0, trials = 0;
  std::uint64_t seed = 1;
  for (double p : {1.5, 2.0, 3.0})
    for (double eps : {1e-1, 1e-3}) {
      const auto c = discrete_picone_campaign(mesh, p, eps, 200, seed++);
      violations += c.violations;
      trials += c.trials;
    }
  v.require(violations == 0, "zero discrete Picone violations");
  v.note("discrete: " + std::to_string(violations) + " violations in " + std::to_string(trials) + " trials");
  return v;
}

// 8. Residual/Jacobian consistency with finite differences.
Verdict criterion8() {
  Verdict v;
  std::mt19937_64 rng(8);
  std::uniform_real_distribution<double> d(-1.0, 1.0);
  auto mesh = build_interval(0, 1, 12);
  double worst_g = 0.0, worst_j = 0.0;
  for (double p : {1.5, 2.0, 3.0}) {
    for (int trial = 0; trial < 20; ++trial) {
      auto spec = unit_spec(mesh, p, 1.5);
      spec.lam = 3.0;
      spec.eta = -1.7;
      spec.m = Weight::expression("1 + x");
      spec.a = Weight::expression("x - 0.4");
      spec.f = Weight::expression("cos(3*x)");
      const Regularization reg{1e-2, 1e-3};
      std::vector<double> vals(mesh->num_vertices(), 0.0);
      for (int vtx : mesh->interior_vertices()) vals[static_cast<std::size_t>(vtx)] = d(rng);
      const DiscreteFunction u(mesh, vals);
      const auto r = residual(spec, u, reg);
      const Eigen::MatrixXd j = Eigen::MatrixXd(jacobian(spec, u, reg));
      Eigen::VectorXd fg(r.size());
      Eigen::MatrixXd fj(j.rows(), j.cols());
      const auto& interior = mesh->interior_vertices();
      for (std::size_t k = 0; k < interior.size(); ++k) {
        const auto vtx = static_cast<std::size_t>(interior[k]);
        for (double h : {1e-5 * (1.0 + std::abs(u[vtx])), 1e-6 * (1.0 + std::abs(u[vtx]))}) {
          auto up = u, um = u;
          up.values()[vtx] += h;
          um.values()[vtx] -= h;
          if (h > 5e-6 * (1.0 + std::abs(u[vtx])))
            fg[static_cast<Eigen::Index>(k)] = (energy(spec, up, reg) - energy(spec, um, reg)) / (2 * h);
          else
            fj.col(static_cast<Eigen::Index>(k)) = (residual(spec, up, reg) - residual(spec, um, reg)) / (2 * h);
        }
      }
      worst_g = std::max(worst_g, (r - fg).norm() / std::max(1.0, r.norm()));
      worst_j = std::max(worst_j, (j - fj).norm() / j.norm());
    }
  }
  v.require(worst_g <= 1e-6, "gradient relative error <= 1e-6");
  v.require(worst_j <= 1e-5, "Jacobian relative error <= 1e-5");
  v.note("60 states: gradient " + fmt("%.2e", worst_g) + ", Jacobian " + fmt("%.2e", worst_j));
  return v;
}

// 9. Nonuniformity trend.
Verdict criterion9() {
  Verdict v;
  const int n = 400;
  auto mesh = build_interval(0, 1, n);
  NonuniformityOptions o;
  const auto family = default_bump_family(*mesh);
  const auto rep = nonuniformity_experiment(mesh, 2.0, 1.5, one, one, family, o);
  int outcomes = 0, changing = 0;
  std::string deltas;
  for (std::size_t k = 0; k < rep.members.size(); ++k) {
    const auto& m = rep.members[k];
    for (const auto* set : {&m.classes_eta0, &m.classes_eta_small})
      for (auto c : *set) ++outcomes, changing += c == SignClass::SignChanging;
    v.require(m.failures == 0, "no solver failures for " + m.label);
    deltas += fmt(" %.4g", m.delta_hat_amp);
    // Linear cross-check at eta = 0.
    const auto fv = family[k].f.evaluate(*mesh);
    const auto ref = oracles::linear_bvp_oracle_1d(rep.lam, fv, n);
    bool pos = false, neg = false;
    for (std::size_t i = 1; i < static_cast<std::size_t>(n); ++i) pos |= ref.samples[i] > 0.0, neg |= ref.samples[i] < 0.0;
    v.require(pos && neg, "linear oracle sign-changing for " + m.label);
  }
  v.require(rep.members.size() >= 3, "at least 3 family members");
  v.require(outcomes > 0 && changing == outcomes, "every outcome sign-changing at lam1 + 1");
  v.require(rep.delta_hat_decreasing, "delta-hat strictly decreasing across the family");
  v.note(std::to_string(changing) + "/" + std::to_string(outcomes) + " sign-changing; delta_hat_amp:" + deltas);
  return v;
}

// 10. Determinism and CLI exit codes.
Verdict criterion10(const std::string& cli) {
  Verdict v;
  const fs::path dir = fs::temp_directory_path() / "plap_acceptance_cli";
  fs::remove_all(dir);
  fs::create_directories(dir);
  auto write = [&](const std::string& name, const std::string& text) {
    std::ofstream(dir / name) << text;
    return (dir / name).string();
  };
  auto run = [&](const std::string& args) {
    const std::string cmd = "\"" + cli + "\" " + args + " > /dev/null 2>&1";
    const int st = std::system(cmd.c_str());
    return WIFEXITED(st) ? WEXITSTATUS(st) : -1;
  };
  auto slurp = [](const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
  };
  const auto small = std::string(R"("domain": {"n": 48}, "solver": {"random_starts": 1})");
  const auto eig = write("eigen.json", "{" + small + "}");
  const auto sw = write("sweep.json", "{" + small + R"(, "sweep": {"lam_grid": {"from": 0, "to": 1.8, "points": 7,
      "relative": true}, "eta_grid": [-0.05, 0, 0.05], "compute_eta_star": false, "eta_bar": 0.5}})");
  const auto crit = write("critval.json", "{" + small + R"(, "critval": {"lam": [0, 0.5], "starts": 4}})");
  const auto pic = write("picone.json", R"({"domain": {"n": 16}, "picone": {"pairs": [[2, 1.5], [3, 1.5]]}})");
  const auto nonu = write("nonu.json", R"J({"domain": {"n": 200}, "solver": {"random_starts": 0, "t_grid": [1]},
      "nonuniformity": {"lam_points": 10, "family": ["bump(0.04, 0.02)", "bump(0.02, 0.01)"]}})J");
  const auto solve = write("solve.json", "{" + small + R"(, "lam": 5, "eta": 0.1})");
  const auto bad = write("bad.json", R"({"p": 2, "q": 3})");
  const auto badexpr = write("badexpr.json", R"J({"weights": {"f": "sinh(x)"}})J");
  const auto stuck = write("stuck.json", R"({"domain": {"n": 64}, "p": 3, "lam": 40, "eta": 0,
      "solver": {"max_newton": 1, "max_continuation": 1, "random_starts": 0, "t_grid": [1]}})");
  const auto counter = write("counter.json", R"J({"domain": {"n": 64}, "weights": {"f": "bump(0.8, 0.15)"}, "solver": {"random_starts": 0, "t_grid": [1]},
      "sweep": {"lam_grid": {"values": [0.95], "relative": true}, "eta_grid": [-500], "eta_bar": 1000,
      "eta_window": 1, "compute_eta_star": false}})J");
  const std::string out = " --out \"" + (dir / "out").string() + "\"";

  struct Case {
    std::string name, args;
    int expect;
  };
  const std::vector<Case> cases{
      {"eigen", "eigen --config " + eig + out, 0},
      {"solve", "solve --config " + solve + out, 0},
      {"sweep", "sweep --config " + sw + " --out \"" + (dir / "a").string() + "\" --seed 11", 0},
      {"critval", "critval --config " + crit + out, 0},
      {"picone-check", "picone-check --config " + pic + out, 0},
      {"nonuniformity", "nonuniformity --config " + nonu + out, 0},
      {"invalid config", "solve --config " + bad + out, 2},
      {"bad expression", "eigen --config " + badexpr + out, 2},
      {"missing option", "eigen", 2},
      {"nonconvergence", "solve --config " + stuck + out, 3},
      {"unwritable output", "eigen --config " + eig + " --out /proc/plap-no-such-dir", 4},
      {"missing config", "eigen --config " + (dir / "nope.json").string() + out, 4},
      {"counterexample", "sweep --config " + counter + out, 5},
  };
  std::string codes;
  for (const auto& c : cases) {
    const int rc = run(c.args);
    v.require(rc == c.expect, c.name + " exit " + std::to_string(rc) + " != " + std::to_string(c.expect));
    codes += " " + c.name + "=" + std::to_string(rc);
  }
  run("sweep --config " + sw + " --out \"" + (dir / "b").string() + "\" --seed 11");
  const auto a = slurp(dir / "a" / "sweep.csv"), b = slurp(dir / "b" / "sweep.csv");
  v.require(!a.empty() && a == b, "identical config + seed give byte-identical CSV");
  v.note("exit codes:" + codes + "; CSV " + std::to_string(a.size()) + " bytes, identical " + (a == b ? "yes" : "no"));
  return v;
}

}  // namespace

int main(int argc, char** argv) {
  std::string cli = PLAP_CLI_PATH;
  int only = 0;
  for (int i = 1; i < argc; ++i) {
    const std::string arg = argv[i];
    if (arg == "--cli" && i + 1 < argc) cli = argv[++i];
    else only = std::atoi(argv[i]);
  }
  const std::vector<std::pair<std::string, std::function<Verdict()>>> criteria{
      {"eigenvalue accuracy", criterion1},
      {"domain monotonicity", criterion2},
      {"MP region", criterion3},
      {"AMP region", criterion4},
      {"nonnegativity region", criterion5},
      {"eta* bracketing", criterion6},
      {"Picone suite", criterion7},
      {"gradient/Jacobian consistency", criterion8},
      {"nonuniformity trend", criterion9},
      {"determinism and interfaces", [&] { return criterion10(cli); }},
  };
  int failed = 0;
  for (std::size_t k = 0; k < criteria.size(); ++k) {
    if (only && static_cast<int>(k + 1) != only) continue;
    const auto t0 = std::chrono::steady_clock::now();
    Verdict v;
    try {
      v = criteria[k].second();
    } catch (const std::exception& e) {
      v.pass = false;
      v.detail = std::string("exception: ") + e.what();
    }
    failed += !v.pass;
    std::printf("criterion %zu [%s] %s (%.1fs): %s\n", k + 1, criteria[k].first.c_str(), v.pass ? "PASS" : "FAIL",
                seconds_since(t0), v.detail.c_str());
    std::fflush(stdout);
  }
  return failed ? 1 : 0;
}
