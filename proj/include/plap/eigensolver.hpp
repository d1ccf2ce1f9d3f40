#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include "plap/discrete_function.hpp"
#include "plap/mesh.hpp"

namespace plap {

struct EigenOptions {
  // Relative stationarity tolerance; defaults to 1e-8 for p = 2, 1e-6 otherwise.
  std::optional<double> tol;
  int max_iter = 500;
  // Inner Newton solve of the convex step problem.
  double inner_tol = 1e-12;
  int inner_max_iter = 200;
  // Gradient regularization inside the inner problem.
  double grad_reg = 1e-10;
  // Start from these nodal values instead of the distance bump.
  std::optional<std::vector<double>> initial;
  // Random positive start on {m > 0} (ignored when `initial` is set).
  std::optional<std::uint64_t> random_seed;

  double tolerance_for(double p) const { return tol.value_or(p == 2.0 ? 1e-8 : 1e-6); }
};

struct EigenPair {
  double lam = 0.0;  // +infinity when the admissible set is empty
  DiscreteFunction phi;  // phi >= 0, sup norm 1
  std::optional<SubdomainMask> domain_mask;
  int iterations = 0;
  std::vector<double> rq_history;
  double residual = 0.0;  // relative stationarity residual at exit

  bool is_infinite() const noexcept;
};

/// Principal eigenpair of -Delta_p u = lam m |u|^{p-2} u with zero trace,
/// by inverse power iteration: solve the convex problem
/// min (1/p) int |grad v|^p - int m |u_k|^{p-2} u_k v, renormalize to
/// int m |v|^p = 1, update the Rayleigh quotient.
EigenPair principal_eigenpair(const SubdomainMask& domain, const Weight& m, double p,
                              const EigenOptions& opts = {});
EigenPair principal_eigenpair(const MeshPtr& mesh, const Weight& m, double p,
                              const EigenOptions& opts = {});

/// (-lam1(-m), psi1): the negative principal eigenvalue for weights with a
/// nontrivial negative part.
EigenPair principal_eigenpair_negative(const MeshPtr& mesh, const Weight& m, double p,
                                       const EigenOptions& opts = {});

/// lam1(m; O) on the subdomain described by `mask`; +infinity when m <= 0
/// on every free vertex of the mask.
EigenPair subdomain_eigenvalue(const SubdomainMask& mask, const Weight& m, double p,
                               const EigenOptions& opts = {});

/// Relative residual of -Delta_p phi = lam m |phi|^{p-2} phi on the free
/// vertices of `domain`.
double eigen_residual(const SubdomainMask& domain, std::span<const double> m_nodal,
                      const DiscreteFunction& phi, double lam, double p, double grad_reg = 0.0);

/// k-th Dirichlet eigenvalue of -(|u'|^{p-2}u')' = lam |u|^{p-2} u on
/// (x0, x1) by shooting from u(x0) = 0, u'(x0) = 1 and bisecting on the
/// number of sign changes.
double dirichlet_eigenvalue_1d_shooting(double x0, double x1, double p, int k,
                                        int steps = 20000);

inline double second_eigenvalue_1d_oracle(double x0, double x1, double p) {
  return dirichlet_eigenvalue_1d_shooting(x0, x1, p, 2);
}

}  // namespace plap
