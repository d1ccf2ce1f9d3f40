#include "plap/bvp.hpp"

#include <Eigen/SparseLU>
#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <random>

#include "plap/assembly.hpp"
#include "plap/eigensolver.hpp"
#include "plap/errors.hpp"

namespace plap {

void ProblemSpec::validate() const {
  if (!mesh) throw InvalidConfig("mesh is not set", "domain");
  if (!(p > 1.0) || !std::isfinite(p)) throw InvalidConfig("p must be a finite number > 1", "p");
  if (!(q > 1.0 && q < p)) throw InvalidConfig("q must satisfy 1 < q < p", "q");
  if (!std::isfinite(lam)) throw InvalidConfig("lambda must be finite", "lam");
  if (!std::isfinite(eta)) throw InvalidConfig("eta must be finite", "eta");
}

std::string to_string(SignClass c) {
  switch (c) {
    case SignClass::Positive: return "positive";
    case SignClass::Negative: return "negative";
    case SignClass::NonnegWithZeros: return "nonneg_with_zeros";
    case SignClass::NonposWithZeros: return "nonpos_with_zeros";
    case SignClass::SignChanging: return "sign_changing";
    case SignClass::Zero: return "zero";
  }
  return "unknown";
}

SignClass classify_sign(const DiscreteFunction& u, const std::vector<char>* region) {
  const double top = sup_norm(u);
  if (top <= 1e-12) return SignClass::Zero;
  const double tau = 1e-8 * top;
  double lo = std::numeric_limits<double>::infinity();
  double hi = -lo;
  for (int v : u.mesh()->interior_vertices()) {
    if (region && !(*region)[static_cast<std::size_t>(v)]) continue;
    lo = std::min(lo, u[static_cast<std::size_t>(v)]);
    hi = std::max(hi, u[static_cast<std::size_t>(v)]);
  }
  if (!std::isfinite(lo)) return SignClass::Zero;
  if (lo > tau) return SignClass::Positive;
  if (hi < -tau) return SignClass::Negative;
  if (lo >= -tau) return SignClass::NonnegWithZeros;
  if (hi <= tau) return SignClass::NonposWithZeros;
  return SignClass::SignChanging;
}

namespace {

// Nodal data of a spec at the current continuation parameters.
struct Discrete {
  const Mesh& mesh;
  DofMap dofs;
  std::vector<double> m, a, f;
  double p, q, lam, eta;

  explicit Discrete(const ProblemSpec& spec)
      : mesh(*spec.mesh),
        dofs(DofMap::interior(*spec.mesh)),
        m(spec.m.evaluate(*spec.mesh)),
        a(spec.a.evaluate(*spec.mesh)),
        f(spec.f.evaluate(*spec.mesh)),
        p(spec.p),
        q(spec.q),
        lam(spec.lam),
        eta(spec.eta) {}

  double energy(std::span<const double> u, Regularization reg) const {
    double e = flux_energy(mesh, u, p, reg.grad);
    if (lam != 0.0) e -= lam * power_energy(mesh, m, u, p, reg.sub);
    if (eta != 0.0) e -= eta * power_energy(mesh, a, u, q, reg.sub);
    const auto& lumped = mesh.lumped_volumes();
    for (int v : dofs.free_vertices()) {
      const auto k = static_cast<std::size_t>(v);
      e -= lumped[k] * f[k] * u[k];
    }
    return e;
  }

  // Residual and the sum of the norms of its four parts (the scale of the
  // relative residual).
  Eigen::VectorXd residual(std::span<const double> u, Regularization reg, double* scale) const {
    const auto n = static_cast<Eigen::Index>(dofs.size());
    Eigen::VectorXd flux = Eigen::VectorXd::Zero(n), rm = Eigen::VectorXd::Zero(n),
                    ra = Eigen::VectorXd::Zero(n), rf(n);
    add_flux_residual(mesh, u, p, reg.grad, dofs, flux);
    add_power_residual(mesh, m, u, p, reg.sub, lam, dofs, rm);
    add_power_residual(mesh, a, u, q, reg.sub, eta, dofs, ra);
    const auto& lumped = mesh.lumped_volumes();
    for (std::size_t k = 0; k < dofs.size(); ++k) {
      const auto v = static_cast<std::size_t>(dofs.free_vertices()[k]);
      rf[static_cast<Eigen::Index>(k)] = lumped[v] * f[v];
    }
    if (scale) *scale = flux.norm() + rm.norm() + ra.norm() + rf.norm();
    return flux - rm - ra - rf;
  }

  Eigen::SparseMatrix<double> jacobian(std::span<const double> u, Regularization reg) const {
    const auto n = static_cast<Eigen::Index>(dofs.size());
    Triplets trips;
    add_flux_jacobian(mesh, u, p, reg.grad, dofs, trips);
    add_power_jacobian(mesh, m, u, p, reg.sub, -lam, dofs, trips);
    add_power_jacobian(mesh, a, u, q, reg.sub, -eta, dofs, trips);
    Eigen::SparseMatrix<double> j(n, n);
    j.setFromTriplets(trips.begin(), trips.end());
    return j;
  }
};

struct NewtonResult {
  bool ok = false;
  bool singular = false;
  int iters = 0;
  double rel = std::numeric_limits<double>::infinity();
};

double relative(double rn, double scale) { return scale > 0.0 ? rn / scale : rn; }

NewtonResult newton(const Discrete& d, std::vector<double>& u, Regularization reg, double tol,
                    const SolveOptions& opts) {
  NewtonResult out;
  double scale = 0.0;
  Eigen::VectorXd r = d.residual(u, reg, &scale);
  double rn = r.norm();
  Eigen::SparseLU<Eigen::SparseMatrix<double>> lu;
  for (;;) {
    out.rel = relative(rn, scale);
    if (rn <= tol * scale || rn <= opts.abs_tol) {
      out.ok = true;
      return out;
    }
    if (out.iters >= opts.max_newton) return out;
    ++out.iters;

    Eigen::SparseMatrix<double> jac;
    try {
      jac = d.jacobian(u, reg);
    } catch (const SingularJacobian&) {
      out.singular = true;
      return out;
    }
    lu.compute(jac);
    if (lu.info() != Eigen::Success) {
      out.singular = true;
      return out;
    }
    const Eigen::VectorXd dir = lu.solve(-r);
    if (lu.info() != Eigen::Success || !dir.allFinite()) {
      out.singular = true;
      return out;
    }

    // Merit 0.5 ||R||^2; along the Newton direction its slope is -||R||^2.
    const Eigen::VectorXd x = d.dofs.gather(u);
    double alpha = 1.0;
    bool accepted = false;
    for (int ls = 0; ls < 40; ++ls) {
      auto trial = d.dofs.scatter(x + alpha * dir);
      double st = 0.0;
      Eigen::VectorXd rt = d.residual(trial, reg, &st);
      const double rtn = rt.norm();
      if (std::isfinite(rtn) && rtn * rtn <= (1.0 - 2e-4 * alpha) * rn * rn) {
        u = std::move(trial);
        r = std::move(rt);
        rn = rtn;
        scale = st;
        accepted = true;
        break;
      }
      alpha *= 0.5;
    }
    if (!accepted) return out;
  }
}

struct Ladder {
  std::vector<Regularization> stages;
};

Ladder regularization_ladder(const SolveOptions& opts) {
  Ladder l;
  double g = opts.eps_grad_start, s = opts.eps_sub_start;
  for (;;) {
    l.stages.push_back({std::max(g, opts.eps_grad_floor), std::max(s, opts.eps_sub_floor)});
    if (g <= opts.eps_grad_floor && s <= opts.eps_sub_floor) break;
    g *= 0.1;
    s *= 0.1;
    // Snap values within rounding of the floor.
    if (g < opts.eps_grad_floor * 1.0000001) g = opts.eps_grad_floor;
    if (s < opts.eps_sub_floor * 1.0000001) s = opts.eps_sub_floor;
  }
  return l;
}

struct Progress {
  int newton = 0;
  int steps = 0;
  bool singular = false;
  double rel = 0.0;
};

// Marches the regularizations down at fixed (lam, eta).
bool descend_regularization(const Discrete& d, std::vector<double>& u, const SolveOptions& opts,
                            Progress& prog) {
  const auto ladder = regularization_ladder(opts);
  for (std::size_t k = 0; k < ladder.stages.size(); ++k) {
    const bool last = k + 1 == ladder.stages.size();
    const auto res = newton(d, u, ladder.stages[k], last ? opts.tol : opts.stage_tol, opts);
    prog.newton += res.iters;
    ++prog.steps;
    prog.singular = prog.singular || res.singular;
    prog.rel = res.rel;
    if (!res.ok) return false;
  }
  return true;
}

// Moves `param` from its current value to `target` with adaptive steps.
bool march(Discrete& d, double& param, double target, std::vector<double>& u, Regularization reg,
           const SolveOptions& opts, Progress& prog) {
  const double span = std::abs(target - param);
  if (span == 0.0) return true;
  double step = (target - param) / 8.0;
  const double min_step = 1e-8 * std::max(1.0, span);
  while (param != target) {
    if (prog.steps >= opts.max_continuation) return false;
    const double from = param;
    double next = from + step;
    if ((step > 0.0 && next >= target) || (step < 0.0 && next <= target)) next = target;
    auto saved = u;
    param = next;
    const auto res = newton(d, u, reg, opts.stage_tol, opts);
    prog.newton += res.iters;
    ++prog.steps;
    prog.singular = prog.singular || res.singular;
    prog.rel = res.rel;
    if (res.ok) {
      step *= 1.5;
    } else {
      param = from;
      u = std::move(saved);
      step *= 0.5;
      if (std::abs(step) < min_step) return false;
    }
  }
  return true;
}

std::vector<int> boundary_flux_signs(const DiscreteFunction& u) {
  const Mesh& mesh = *u.mesh();
  const double tau = 1e-8 * sup_norm(u);
  std::vector<int> out;
  out.reserve(mesh.boundary_vertices().size());
  for (int v : mesh.boundary_vertices()) {
    const int w = mesh.inward_neighbor(v);
    if (w < 0) {
      out.push_back(0);
      continue;
    }
    // d u / d nu ~ (0 - u(w)) / h along the outward normal.
    const double uw = u[static_cast<std::size_t>(w)];
    out.push_back(uw > tau ? -1 : (uw < -tau ? 1 : 0));
  }
  return out;
}

SolveOutcome finish(const ProblemSpec& spec, std::vector<double> u, const Progress& prog) {
  SolveOutcome out;
  out.u = DiscreteFunction(spec.mesh, std::move(u));
  out.residual_norm = prog.rel;
  out.energy = energy(spec, out.u);
  out.newton_iters = prog.newton;
  out.continuation_steps = prog.steps;
  out.sign_class = classify_sign(out.u);
  out.boundary_flux_sign = boundary_flux_signs(out.u);
  out.sup_norm = sup_norm(out.u);
  out.sobolev_seminorm = std::pow(grad_energy(out.u, spec.p), 1.0 / spec.p);
  out.sup_bound_constant = out.sup_norm / (1.0 + lumped_norm(out.u, 2.0 * spec.p));
  return out;
}

double principal_lam1(const ProblemSpec& spec) {
  try {
    return principal_eigenpair(spec.mesh, spec.m, spec.p).lam;
  } catch (const EmptyAdmissibleSet&) {
    return std::numeric_limits<double>::infinity();
  }
}

}  // namespace

double energy(const ProblemSpec& spec, const DiscreteFunction& u, Regularization reg) {
  return Discrete(spec).energy(u.values(), reg);
}

Eigen::VectorXd residual(const ProblemSpec& spec, const DiscreteFunction& u, Regularization reg) {
  return Discrete(spec).residual(u.values(), reg, nullptr);
}

Eigen::SparseMatrix<double> jacobian(const ProblemSpec& spec, const DiscreteFunction& u,
                                     Regularization reg) {
  return Discrete(spec).jacobian(u.values(), reg);
}

SolveOutcome solve(const ProblemSpec& spec, const DiscreteFunction& init, const SolveOptions& opts) {
  spec.validate();
  if (init.mesh() != spec.mesh || init.size() != spec.mesh->num_vertices())
    throw InvalidConfig("initial guess lives on a different mesh", "init");
  if (!init.has_zero_trace()) throw InvalidConfig("initial guess must vanish on the boundary", "init");

  Discrete d(spec);
  Progress prog;
  std::vector<double> u = init.values();
  if (descend_regularization(d, u, opts, prog)) return finish(spec, std::move(u), prog);
  const double direct_rel = prog.rel;

  // Full ladder: safe lam, then eta, then the regularizations.
  const double lam1 = opts.lam1 ? *opts.lam1 : principal_lam1(spec);
  const double lam0 = std::isfinite(lam1) ? std::min(spec.lam, 0.9 * lam1) : spec.lam;
  const auto ladder = regularization_ladder(opts);
  const Regularization coarse = ladder.stages.front();
  u.assign(u.size(), 0.0);
  d.lam = lam0;
  d.eta = 0.0;
  bool ok = newton(d, u, coarse, opts.stage_tol, opts).ok;
  ok = ok && march(d, d.lam, spec.lam, u, coarse, opts, prog);
  ok = ok && march(d, d.eta, spec.eta, u, coarse, opts, prog);
  ok = ok && descend_regularization(d, u, opts, prog);
  if (ok) return finish(spec, std::move(u), prog);

  char buf[256];
  std::snprintf(buf, sizeof buf,
                "solve failed at lam=%.17g eta=%.17g (direct residual %.3g, continuation stopped "
                "at lam=%.17g eta=%.17g)",
                spec.lam, spec.eta, direct_rel, d.lam, d.eta);
  const bool near_eigen = std::isfinite(lam1) && std::abs(spec.lam - lam1) <= 1e-3 * lam1;
  if (prog.singular || near_eigen) throw ResonantParameter(buf);
  throw NonConvergence(buf);
}

SolveOutcome solve(const ProblemSpec& spec, const SolveOptions& opts) {
  spec.validate();
  return solve(spec, DiscreteFunction(spec.mesh), opts);
}

MultiStartResult multi_start_solve(const ProblemSpec& spec, const SolveOptions& opts) {
  spec.validate();
  const Mesh& mesh = *spec.mesh;
  MultiStartResult out;

  // Principal eigenpair; the sign-definite starts fall back to a distance
  // bump when m has no positive part.
  std::vector<double> phi(mesh.num_vertices(), 0.0);
  double lam1 = std::numeric_limits<double>::infinity();
  try {
    auto pair = principal_eigenpair(spec.mesh, spec.m, spec.p);
    lam1 = pair.lam;
    phi = pair.phi.values();
  } catch (const EmptyAdmissibleSet&) {
    double top = 0.0;
    for (int v : mesh.interior_vertices()) top = std::max(top, mesh.distance_to_boundary(v));
    for (int v : mesh.interior_vertices())
      phi[static_cast<std::size_t>(v)] = mesh.distance_to_boundary(v) / top;
  }
  out.lam1 = lam1;
  SolveOptions sub = opts;
  sub.lam1 = lam1;

  // Amplitude predicted by projecting the equation on phi1 near resonance:
  // s^{p-1} |lam1 - lam| int m phi^p ~ |int f phi| (+ the eta term with s^{q-1}).
  const DiscreteFunction phif(spec.mesh, phi);
  const double mphi = weighted_power_integral(spec.m, phif, spec.p);
  const double fphi = std::abs(weighted_power_integral(spec.f, phif, 1.0, true));
  const double aphi = std::abs(spec.eta * weighted_power_integral(spec.a, phif, spec.q));
  const double gap = std::isfinite(lam1) ? std::abs(lam1 - spec.lam) * std::max(mphi, 0.0) : 0.0;
  double s_ref = 1.0;
  if (gap > 0.0) {
    const double s_f = fphi > 0.0 ? std::pow(fphi / gap, 1.0 / (spec.p - 1.0)) : 0.0;
    const double s_a = aphi > 0.0 ? std::pow(aphi / gap, 1.0 / (spec.p - spec.q)) : 0.0;
    if (std::max(s_f, s_a) > 0.0) s_ref = std::clamp(std::max(s_f, s_a), 1e-6, 1e6);
  }

  struct Start {
    std::string name;
    std::vector<double> u;
  };
  std::vector<Start> starts;
  starts.push_back({"zero", std::vector<double>(mesh.num_vertices(), 0.0)});
  char buf[64];
  for (double t : opts.t_grid) {
    for (int sgn : {1, -1}) {
      std::snprintf(buf, sizeof buf, "%cphi1*%g", sgn > 0 ? '+' : '-', t);
      std::vector<double> u(phi);
      for (auto& x : u) x *= sgn * t * s_ref;
      starts.push_back({buf, std::move(u)});
    }
  }
  const auto& box = mesh.bounds();
  for (int k = 0; k < opts.random_starts; ++k) {
    std::mt19937_64 rng(opts.seed + 0x9E3779B97F4A7C15ULL * static_cast<std::uint64_t>(k + 1));
    std::uniform_real_distribution<double> coef(-1.0, 1.0);
    const int modes = mesh.dimension() == 1 ? 4 : 3;
    std::vector<double> c(static_cast<std::size_t>(modes * modes));
    for (auto& x : c) x = coef(rng);
    std::vector<double> u(mesh.num_vertices(), 0.0);
    double top = 0.0;
    for (int v : mesh.interior_vertices()) {
      const auto& pt = mesh.vertices()[static_cast<std::size_t>(v)];
      const double xs = (pt.x - box.x0) / (box.x1 - box.x0);
      const double ys = mesh.dimension() == 1 ? 0.5 : (pt.y - box.y0) / (box.y1 - box.y0);
      double val = 0.0;
      for (int i = 1; i <= modes; ++i) {
        const int jmax = mesh.dimension() == 1 ? 1 : modes;
        for (int j = 1; j <= jmax; ++j) {
          const double yfac = mesh.dimension() == 1 ? 1.0 : std::sin(j * M_PI * ys);
          val += c[static_cast<std::size_t>((i - 1) * modes + (j - 1))] * std::sin(i * M_PI * xs) *
                 yfac / (i * j);
        }
      }
      u[static_cast<std::size_t>(v)] = val;
      top = std::max(top, std::abs(val));
    }
    if (top > 0.0)
      for (auto& x : u) x *= s_ref / top;
    starts.push_back({"random-" + std::to_string(k), std::move(u)});
  }

  for (auto& st : starts) {
    SolveOutcome o;
    try {
      o = solve(spec, DiscreteFunction(spec.mesh, std::move(st.u)), sub);
    } catch (const NonConvergence& e) {
      o.u = DiscreteFunction(spec.mesh);
      o.converged = false;
      o.resonant = dynamic_cast<const ResonantParameter*>(&e) != nullptr;
      o.message = e.what();
      o.residual_norm = std::numeric_limits<double>::quiet_NaN();
      o.energy = std::numeric_limits<double>::quiet_NaN();
      o.sup_norm = std::numeric_limits<double>::quiet_NaN();
    }
    // At the eigenvalue itself the discrete answer is set by the error of
    // the lam1 estimate, so the outcome is flagged.
    if (o.converged && std::isfinite(lam1) && std::abs(spec.lam - lam1) <= 1e-6 * lam1) {
      o.resonant = true;
      o.message = "lam within 1e-6 relative of lam1";
    }
    o.start_strategy = st.name;
    out.starts.push_back(o);
  }

  for (const auto& o : out.starts) {
    if (!o.converged) continue;
    bool fresh = true;
    for (const auto& seen : out.distinct) {
      double dist = 0.0;
      for (std::size_t v = 0; v < o.u.size(); ++v)
        dist = std::max(dist, std::abs(o.u[v] - seen.u[v]));
      if (dist <= opts.dedup_tol * std::max({1.0, o.sup_norm, seen.sup_norm})) {
        fresh = false;
        break;
      }
    }
    if (fresh) out.distinct.push_back(o);
  }
  return out;
}

}  // namespace plap
