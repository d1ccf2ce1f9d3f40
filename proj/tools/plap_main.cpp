#include <CLI11.hpp>

#include <algorithm>
#include <cstdio>
#include <iostream>
#include <optional>
#include <set>

#include "plap/config_io.hpp"
#include "plap/errors.hpp"

using namespace plap;

namespace {

constexpr int exit_ok = 0, exit_config = 2, exit_nonconv = 3, exit_io = 4, exit_counterexample = 5;

std::filesystem::path output_path(const RunConfig& cfg, const std::string& name) {
  std::error_code ec;
  std::filesystem::create_directories(cfg.out_dir, ec);
  if (ec) throw IoError("cannot create output directory '" + cfg.out_dir.string() + "': " + ec.message());
  return cfg.out_dir / name;
}

bool f_nonnegative(const ProblemSpec& s) {
  const auto fv = s.f.evaluate(*s.mesh);
  for (int v : s.mesh->interior_vertices())
    if (fv[static_cast<std::size_t>(v)] < 0.0) return false;
  return true;
}

int run_eigen(const RunConfig& cfg) {
  auto mesh = cfg.domain.build();
  EigenPair e;
  if (cfg.subdomain) {
    const auto& b = *cfg.subdomain;
    BoundingBox box{b[0], b[1], b.size() > 2 ? b[2] : 0.0, b.size() > 2 ? b[3] : 0.0};
    e = principal_eigenpair(box_mask(mesh, box), cfg.m, cfg.p, cfg.eigen);
  } else {
    e = principal_eigenpair(mesh, cfg.m, cfg.p, cfg.eigen);
  }
  write_report(e, output_path(cfg, cfg.report_name), cfg.echo);
  std::printf("lam1 = %s (iterations %d, residual %.3g)\n", format_real(e.lam).c_str(), e.iterations, e.residual);
  return exit_ok;
}

int run_solve(const RunConfig& cfg) {
  const auto spec = make_problem(cfg);
  const auto res = multi_start_solve(spec, cfg.solve);
  write_report(res.starts, spec, output_path(cfg, cfg.report_name), cfg.echo);
  int converged = 0;
  for (const auto& o : res.starts) {
    converged += o.converged;
    std::printf("%-12s %-18s residual %.3g sup %.6g\n", o.start_strategy.c_str(),
                o.converged ? to_string(o.sign_class).c_str() : "failed", o.residual_norm, o.sup_norm);
  }
  std::printf("%zu distinct solution(s), lam1 = %s\n", res.distinct.size(), format_real(res.lam1).c_str());
  if (converged == 0) {
    std::fprintf(stderr, "no start converged\n");
    return exit_nonconv;
  }
  return exit_ok;
}

int run_sweep(RunConfig cfg) {
  const auto spec = make_problem(cfg);
  const double lam1 = principal_eigenpair(spec.mesh, spec.m, spec.p).lam;
  if (!cfg.region.eta_bar && cfg.eta_grid.is_default() && f_nonnegative(spec) && std::isfinite(lam1)) {
    EtaStarOptions eo = cfg.eta_star;
    eo.lam1 = lam1;
    eo.with_lower_bound = false;
    for (double sgn : {1.0, -1.0}) {
      const double v = eta_star(spec.mesh, spec.m, spec.a.scaled(sgn), spec.f, spec.p, spec.q, 0.5 * lam1, eo).value;
      if (std::isfinite(v) && v > 0.0) {
        cfg.region.eta_bar = v;
        break;
      }
    }
  }
  const double eta_bar = cfg.region.eta_bar.value_or(1.0);
  const auto lams = cfg.lam_grid.is_default() ? default_lam_grid(lam1) : cfg.lam_grid.resolve(lam1);
  const auto etas = cfg.eta_grid.is_default() ? default_eta_grid(eta_bar) : cfg.eta_grid.resolve(eta_bar);
  const auto map = sweep(spec, lams, etas, cfg.region);
  write_csv(map, output_path(cfg, cfg.csv_name));
  write_report(map, output_path(cfg, cfg.report_name), cfg.echo);
  std::printf("lam1 = %s, %zu x %zu cells, delta_hat_mp = %s, delta_hat_amp = %s, counterexamples = %zu\n",
              format_real(map.lam1).c_str(), lams.size(), etas.size(), format_real(map.delta_hat_mp).c_str(),
              format_real(map.delta_hat_amp).c_str(), map.counterexamples.size());
  for (const auto& c : map.counterexamples)
    std::printf("counterexample: lam %s eta %s start %s: %s claims %s, observed %s\n", format_real(c.lam).c_str(),
                format_real(c.eta).c_str(), c.start_strategy.c_str(), c.theorem.c_str(), c.claimed.c_str(),
                c.observed.c_str());
  return map.counterexamples.empty() ? exit_ok : exit_counterexample;
}

int run_critval(const RunConfig& cfg) {
  const auto spec = make_problem(cfg);
  const double lam1 = principal_eigenpair(spec.mesh, spec.m, spec.p).lam;
  EtaStarOptions eo = cfg.eta_star;
  eo.lam1 = lam1;
  std::vector<CritvalRow> rows;
  for (double lam : cfg.critval_lams.resolve(lam1)) {
    CritvalRow r;
    r.lam = lam;
    r.plus = eta_star(spec.mesh, spec.m, spec.a, spec.f, spec.p, spec.q, lam, eo);
    r.minus = eta_star(spec.mesh, spec.m, spec.a.scaled(-1.0), spec.f, spec.p, spec.q, lam, eo);
    std::printf("lam %s: eta*(a) = %s, eta*(-a) = %s, lower bound %s\n", format_real(lam).c_str(),
                format_real(r.plus.value).c_str(), format_real(r.minus.value).c_str(),
                r.plus.lower_bound ? format_real(*r.plus.lower_bound).c_str() : "n/a");
    rows.push_back(std::move(r));
  }
  write_report(lam1, rows, output_path(cfg, cfg.report_name), cfg.echo);
  return exit_ok;
}

int run_picone(const RunConfig& cfg) {
  PiconeReport rep;
  std::set<double> ps;
  for (auto [p, q] : cfg.picone_pairs) {
    const auto r = picone_polynomial_check(p, q);
    rep.polynomial.push_back({p, q, r});
    ps.insert(p);
    std::printf("polynomial (p %g, q %g): %s, min %.12g at s = %.6g, value at 0 = %.12g\n", p, q,
                r.holds ? "holds" : "fails", r.min_value, r.argmin, r.value_at_zero);
  }
  auto mesh = cfg.domain.build();
  std::uint64_t k = 0;
  for (double p : ps)
    for (double eps : cfg.picone_eps) {
      const auto c = discrete_picone_campaign(mesh, p, eps, 200, cfg.seed + k++);
      rep.discrete.push_back({p, eps, c.trials, c.violations, c.worst_slack_ratio});
      std::printf("discrete (p %g, eps %g): %d/%d violations\n", p, eps, c.violations, c.trials);
    }
  write_report(rep, output_path(cfg, cfg.report_name), cfg.echo);
  return exit_ok;
}

int run_nonuniformity(const RunConfig& cfg) {
  auto mesh = cfg.domain.build();
  std::vector<FamilyMember> family;
  if (cfg.family.empty()) family = default_bump_family(*mesh);
  else
    for (const auto& e : cfg.family) family.push_back({e, Weight::expression(e)});
  const auto rep = nonuniformity_experiment(mesh, cfg.p, cfg.q, cfg.m, cfg.a, family, cfg.nonuniformity);
  write_report(rep, output_path(cfg, cfg.report_name), cfg.echo);
  for (const auto& m : rep.members)
    std::printf("%s: delta_hat_amp %s, %s\n", m.label.c_str(), format_real(m.delta_hat_amp).c_str(),
                m.no_nonneg_no_negative ? "no nonnegative / negative outcome" : "sign-definite outcome found");
  std::printf("delta_hat decreasing: %s\n", rep.delta_hat_decreasing ? "yes" : "no");
  return exit_ok;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Sign properties of solutions to p-Laplacian problems with sublinear perturbations"};
  app.require_subcommand(1);
  std::string config;
  std::optional<std::string> out;
  std::optional<std::uint64_t> seed;
  const std::vector<std::pair<std::string, Mode>> modes{
      {"eigen", Mode::Eigen},       {"solve", Mode::Solve},
      {"sweep", Mode::Sweep},       {"critval", Mode::Critval},
      {"picone-check", Mode::PiconeCheck}, {"nonuniformity", Mode::Nonuniformity}};
  for (const auto& [name, mode] : modes) {
    auto* sub = app.add_subcommand(name);
    sub->add_option("--config", config, "JSON configuration")->required();
    sub->add_option("--out", out, "output directory");
    sub->add_option("--seed", seed, "random seed");
  }
  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? exit_ok : exit_config;
  }

  Mode mode = Mode::Eigen;
  for (const auto& [name, m] : modes)
    if (app.got_subcommand(name)) mode = m;

  try {
    RunConfig cfg = load_config(config);
    cfg.mode = mode;
    if (seed) override_seed(cfg, *seed);
    if (out) cfg.out_dir = *out;
    switch (mode) {
      case Mode::Eigen: return run_eigen(cfg);
      case Mode::Solve: return run_solve(cfg);
      case Mode::Sweep: return run_sweep(cfg);
      case Mode::Critval: return run_critval(cfg);
      case Mode::PiconeCheck: return run_picone(cfg);
      case Mode::Nonuniformity: return run_nonuniformity(cfg);
    }
  } catch (const InvalidConfig& e) {
    std::fprintf(stderr, "invalid config: %s\n", e.what());
    return exit_config;
  } catch (const ParseError& e) {
    std::fprintf(stderr, "parse error: %s\n", e.what());
    return exit_config;
  } catch (const EvalError& e) {
    std::fprintf(stderr, "evaluation error: %s\n", e.what());
    return exit_config;
  } catch (const EmptyAdmissibleSet& e) {
    std::fprintf(stderr, "invalid config: %s\n", e.what());
    return exit_config;
  } catch (const NonConvergence& e) {
    std::fprintf(stderr, "no convergence: %s\n", e.what());
    return exit_nonconv;
  } catch (const SingularJacobian& e) {
    std::fprintf(stderr, "no convergence: %s\n", e.what());
    return exit_nonconv;
  } catch (const IoError& e) {
    std::fprintf(stderr, "i/o error: %s\n", e.what());
    return exit_io;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 1;
  }
  return exit_ok;
}
