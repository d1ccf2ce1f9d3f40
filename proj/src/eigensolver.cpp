#include "plap/eigensolver.hpp"

#include <Eigen/SparseCholesky>
#include <algorithm>
#include <cmath>
#include <limits>
#include <random>

#include "plap/assembly.hpp"
#include "plap/errors.hpp"

namespace plap {

bool EigenPair::is_infinite() const noexcept { return std::isinf(lam); }

namespace {

double signed_pow(double v, double e) { return v == 0.0 ? 0.0 : std::copysign(std::pow(std::abs(v), e), v); }

double normalize_weighted(std::vector<double>& u, std::span<const double> m, const Mesh& mesh,
                          double p) {
  const auto& lumped = mesh.lumped_volumes();
  double den = 0.0;
  for (std::size_t v = 0; v < u.size(); ++v)
    if (u[v] != 0.0) den += lumped[v] * m[v] * std::pow(std::abs(u[v]), p);
  if (!(den > 0.0)) return den;
  const double s = std::pow(den, -1.0 / p);
  for (auto& x : u) x *= s;
  return den;
}

// Convex step problem of the inverse iteration:
//   min (1/p) sum vol (|grad v|^2 + eps^2)^(p/2) + (shift/p) sum lumped m_- |v|^p - g.v
// over the free vertices, by damped Newton. `v` holds the warm start.
struct StepProblem {
  const Mesh& mesh;
  const DofMap& dofs;
  const Eigen::VectorXd& g;
  std::span<const double> m_minus;
  double shift;
  double p;
};

void newton_step_problem(const StepProblem& sp, double eps, double tol, const EigenOptions& opts,
                         std::vector<double>& v) {
  const auto& [mesh, dofs, g, m_minus, shift, p] = sp;
  const double gnorm = std::max(g.norm(), std::numeric_limits<double>::min());
  auto objective = [&](const std::vector<double>& w) {
    double val = flux_energy(mesh, w, p, eps) - g.dot(dofs.gather(w));
    if (shift != 0.0) val += shift * power_energy(mesh, m_minus, w, p, eps);
    return val;
  };
  auto gradient = [&](const std::vector<double>& w) {
    Eigen::VectorXd grad = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(dofs.size()));
    add_flux_residual(mesh, w, p, eps, dofs, grad);
    add_power_residual(mesh, m_minus, w, p, eps, shift, dofs, grad);
    return Eigen::VectorXd(grad - g);
  };

  const auto n = static_cast<Eigen::Index>(dofs.size());
  Eigen::SimplicialLDLT<Eigen::SparseMatrix<double>> ldlt;
  Eigen::SparseMatrix<double> hess(n, n);
  double f = objective(v);
  Eigen::VectorXd grad = gradient(v);
  for (int it = 0; it < opts.inner_max_iter; ++it) {
    const double gn = grad.norm();
    const double rel = gn / gnorm;
    if (rel <= tol) return;

    Triplets trips;
    add_flux_jacobian(mesh, v, p, eps, dofs, trips);
    add_power_jacobian(mesh, m_minus, v, p, eps, shift, dofs, trips);
    hess.setFromTriplets(trips.begin(), trips.end());
    ldlt.compute(hess);
    if (ldlt.info() != Eigen::Success) throw SingularJacobian("step problem Hessian factorization failed");
    const Eigen::VectorXd dir = ldlt.solve(-grad);
    const double slope = grad.dot(dir);
    if (!(slope < 0.0)) {
      if (rel <= 1e-8) return;
      throw NonConvergence("step problem: Newton direction is not a descent direction");
    }

    const Eigen::VectorXd x = dofs.gather(v);
    double alpha = 1.0;
    bool accepted = false;
    for (int ls = 0; ls < 40; ++ls) {
      auto trial = dofs.scatter(x + alpha * dir);
      const double ft = objective(trial);
      Eigen::VectorXd gt = gradient(trial);
      // Near the minimizer the objective is flat to round-off; a full step
      // that shrinks the gradient is taken on that evidence alone.
      if (ft <= f + 1e-4 * alpha * slope || (alpha == 1.0 && gt.norm() < 0.5 * gn)) {
        v = std::move(trial);
        f = ft;
        grad = std::move(gt);
        accepted = true;
        break;
      }
      alpha *= 0.5;
    }
    if (!accepted) {
      if (rel <= 1e-8) return;
      throw NonConvergence("step problem: line search failed");
    }
  }
  if (grad.norm() / gnorm <= 1e-8) return;
  throw NonConvergence("step problem: Newton iteration limit reached");
}

// For p < 2 the flux curvature blows up at flat cells, so the gradient
// regularization is marched down from a coarse value.
void solve_step_problem(const StepProblem& sp, const EigenOptions& opts, std::vector<double>& v) {
  if (sp.p < 2.0) {
    for (double eps = 1e-2; eps > opts.grad_reg; eps *= 0.1) newton_step_problem(sp, eps, 1e-6, opts, v);
  }
  newton_step_problem(sp, opts.grad_reg, opts.inner_tol, opts, v);
}

}  // namespace

double eigen_residual(const SubdomainMask& domain, std::span<const double> m_nodal,
                      const DiscreteFunction& phi, double lam, double p, double grad_reg) {
  const Mesh& mesh = *domain.mesh();
  const DofMap dofs(mesh, domain.free_vertices());
  const auto n = static_cast<Eigen::Index>(dofs.size());
  Eigen::VectorXd flux = Eigen::VectorXd::Zero(n);
  Eigen::VectorXd react = Eigen::VectorXd::Zero(n);
  add_flux_residual(mesh, phi.values(), p, grad_reg, dofs, flux);
  add_power_residual(mesh, m_nodal, phi.values(), p, 0.0, lam, dofs, react);
  const double scale = flux.norm() + react.norm();
  if (scale == 0.0) return 0.0;
  return (flux - react).norm() / scale;
}

EigenPair principal_eigenpair(const SubdomainMask& domain, const Weight& m, double p,
                              const EigenOptions& opts) {
  if (!(p > 1.0)) throw InvalidConfig("exponent p must exceed 1", "p");
  const MeshPtr& mesh_ptr = domain.mesh();
  const Mesh& mesh = *mesh_ptr;
  const auto m_nodal = m.evaluate(mesh);
  const DofMap dofs(mesh, domain.free_vertices());
  if (dofs.size() == 0) throw EmptyAdmissibleSet("domain has no free vertices");
  const bool any_positive = std::any_of(dofs.free_vertices().begin(), dofs.free_vertices().end(),
                                        [&](int v) { return m_nodal[static_cast<std::size_t>(v)] > 0.0; });
  if (!any_positive) throw EmptyAdmissibleSet("weight is nonpositive on every free vertex");

  std::vector<double> u(mesh.num_vertices(), 0.0);
  if (opts.initial) {
    if (opts.initial->size() != u.size()) throw InvalidConfig("initial guess has the wrong size");
    for (int v : dofs.free_vertices()) u[static_cast<std::size_t>(v)] = std::abs((*opts.initial)[static_cast<std::size_t>(v)]);
  } else if (opts.random_seed) {
    std::mt19937_64 rng(*opts.random_seed);
    std::uniform_real_distribution<double> dist(0.1, 1.0);
    for (int v : dofs.free_vertices())
      if (m_nodal[static_cast<std::size_t>(v)] > 0.0) u[static_cast<std::size_t>(v)] = dist(rng);
  } else {
    for (int v : dofs.free_vertices())
      if (m_nodal[static_cast<std::size_t>(v)] > 0.0) u[static_cast<std::size_t>(v)] = mesh.distance_to_boundary(v);
  }
  if (!(normalize_weighted(u, m_nodal, mesh, p) > 0.0))
    throw EmptyAdmissibleSet("initial guess has a nonpositive weighted norm");

  const double tol = opts.tolerance_for(p);
  EigenPair out;
  if (domain.active_vertices().size() != mesh.num_vertices()) out.domain_mask = domain;
  double rq = grad_energy(DiscreteFunction(mesh_ptr, u), p);
  out.rq_history.push_back(rq);

  const auto& lumped = mesh.lumped_volumes();
  const auto n = static_cast<Eigen::Index>(dofs.size());
  std::vector<double> m_minus(m_nodal.size(), 0.0);
  bool indefinite = false;
  for (std::size_t v = 0; v < m_nodal.size(); ++v) {
    m_minus[v] = std::max(-m_nodal[v], 0.0);
    indefinite = indefinite || (m_minus[v] > 0.0 && dofs.index(static_cast<int>(v)) >= 0);
  }

  double residual = std::numeric_limits<double>::infinity();
  int it = 0;
  for (; it < opts.max_iter; ++it) {
    // With m_- moved to the left as the potential rq * m_-, the step operator
    // stays positive definite and the fixed point is the eigen equation.
    const double shift = indefinite ? rq : 0.0;
    Eigen::VectorXd g(n);
    for (std::size_t k = 0; k < dofs.size(); ++k) {
      const auto v = static_cast<std::size_t>(dofs.free_vertices()[k]);
      const double w = indefinite ? rq * std::max(m_nodal[v], 0.0) : m_nodal[v];
      g[static_cast<Eigen::Index>(k)] = lumped[v] * w * signed_pow(u[v], p - 1.0);
    }
    std::vector<double> v = u;
    if (!indefinite) {
      // Warm start: at a fixed point v = rq^{-1/(p-1)} u.
      const double warm = std::pow(rq, -1.0 / (p - 1.0));
      for (auto& x : v) x *= warm;
    }
    solve_step_problem({mesh, dofs, g, m_minus, shift, p}, opts, v);

    // Projection onto the nonnegative cone.
    for (auto& x : v) x = std::max(x, 0.0);
    if (!(normalize_weighted(v, m_nodal, mesh, p) > 0.0))
      throw NonConvergence("inverse iteration lost the positive weighted norm");
    u = std::move(v);
    rq = grad_energy(DiscreteFunction(mesh_ptr, u), p);
    out.rq_history.push_back(rq);
    residual = eigen_residual(domain, m_nodal, DiscreteFunction(mesh_ptr, u), rq, p);
    if (residual <= tol) {
      ++it;
      break;
    }
  }
  out.iterations = it;
  out.residual = residual;
  if (!(residual <= tol))
    throw NonConvergence("principal eigenpair: residual " + std::to_string(residual) +
                         " above tolerance after " + std::to_string(it) + " iterations");

  out.lam = rq;
  const double top = *std::max_element(u.begin(), u.end());
  for (auto& x : u) x /= top;
  out.phi = DiscreteFunction(mesh_ptr, std::move(u));
  return out;
}

EigenPair principal_eigenpair(const MeshPtr& mesh, const Weight& m, double p,
                              const EigenOptions& opts) {
  return principal_eigenpair(SubdomainMask::whole(mesh), m, p, opts);
}

EigenPair principal_eigenpair_negative(const MeshPtr& mesh, const Weight& m, double p,
                                       const EigenOptions& opts) {
  const auto nodal = m.evaluate(*mesh);
  if (std::none_of(nodal.begin(), nodal.end(), [](double v) { return v < 0.0; }))
    throw EmptyAdmissibleSet("weight has no negative part");
  auto pair = principal_eigenpair(mesh, m.scaled(-1.0), p, opts);
  pair.lam = -pair.lam;
  return pair;
}

EigenPair subdomain_eigenvalue(const SubdomainMask& mask, const Weight& m, double p,
                               const EigenOptions& opts) {
  try {
    return principal_eigenpair(mask, m, p, opts);
  } catch (const EmptyAdmissibleSet&) {
    EigenPair out;
    out.lam = std::numeric_limits<double>::infinity();
    out.phi = DiscreteFunction(mask.mesh());
    out.domain_mask = mask;
    return out;
  }
}

double dirichlet_eigenvalue_1d_shooting(double x0, double x1, double p, int k, int steps) {
  if (!(x1 > x0) || !(p > 1.0) || k < 1 || steps < 10)
    throw InvalidConfig("invalid shooting problem");
  const double h = (x1 - x0) / steps;
  const double conj = 1.0 / (p - 1.0);

  auto sign_changes = [&](double lam) {
    auto rhs = [&](double u, double w, double& du, double& dw) {
      du = signed_pow(w, conj);
      dw = -lam * signed_pow(u, p - 1.0);
    };
    double u = 0.0, w = 1.0;
    int changes = 0;
    int last_sign = 1;
    for (int s = 0; s < steps; ++s) {
      double k1u, k1w, k2u, k2w, k3u, k3w, k4u, k4w;
      rhs(u, w, k1u, k1w);
      rhs(u + 0.5 * h * k1u, w + 0.5 * h * k1w, k2u, k2w);
      rhs(u + 0.5 * h * k2u, w + 0.5 * h * k2w, k3u, k3w);
      rhs(u + h * k3u, w + h * k3w, k4u, k4w);
      u += h / 6.0 * (k1u + 2 * k2u + 2 * k3u + k4u);
      w += h / 6.0 * (k1w + 2 * k2w + 2 * k3w + k4w);
      const int sgn = u > 0.0 ? 1 : (u < 0.0 ? -1 : 0);
      if (sgn != 0 && sgn != last_sign) {
        ++changes;
        last_sign = sgn;
      } else if (sgn == 0 && s + 1 == steps) {
        ++changes;
      }
    }
    return changes;
  };

  double lo = 0.0, hi = 1.0;
  while (sign_changes(hi) < k) {
    lo = hi;
    hi *= 2.0;
    if (hi > 1e12) throw NonConvergence("shooting: could not bracket the eigenvalue");
  }
  for (int it = 0; it < 200 && hi - lo > 1e-13 * hi; ++it) {
    const double mid = 0.5 * (lo + hi);
    (sign_changes(mid) >= k ? hi : lo) = mid;
  }
  return 0.5 * (lo + hi);
}

}  // namespace plap
