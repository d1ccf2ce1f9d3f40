#pragma once

#include <Eigen/Sparse>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "plap/discrete_function.hpp"
#include "plap/mesh.hpp"

namespace plap {

/// -Delta_p u = lam m |u|^{p-2} u + eta a |u|^{q-2} u + f, u = 0 on the boundary.
struct ProblemSpec {
  MeshPtr mesh;
  double p = 2.0;
  double q = 1.5;
  double lam = 0.0;
  double eta = 0.0;
  Weight m = Weight::constant(1.0);
  Weight a = Weight::constant(1.0);
  Weight f = Weight::constant(1.0);

  // Throws InvalidConfig unless 1 < q < p and the mesh is set.
  void validate() const;
};

/// Smoothing of the degenerate terms: eps_grad enters the flux as
/// (|grad u|^2 + eps_grad^2)^((p-2)/2), eps_sub the zeroth-order odd powers
/// as (u^2 + eps_sub^2)^((s-2)/2) u. Zero means the exact operator.
struct Regularization {
  double grad = 0.0;
  double sub = 0.0;
};

enum class SignClass { Positive, Negative, NonnegWithZeros, NonposWithZeros, SignChanging, Zero };
std::string to_string(SignClass c);

/// Classifies by the interior vertices (restricted to `region` when given,
/// as a per-vertex flag vector).
SignClass classify_sign(const DiscreteFunction& u, const std::vector<char>* region = nullptr);

// E(u) = (1/p)(int |grad u|^p - lam int m |u|^p) - (eta/q) int a |u|^q - int f u
double energy(const ProblemSpec& spec, const DiscreteFunction& u, Regularization reg = {});

/// <E'(u), hat_i> for every interior vertex i.
Eigen::VectorXd residual(const ProblemSpec& spec, const DiscreteFunction& u,
                         Regularization reg = {});

/// Second variation over the interior vertices. Symmetric.
Eigen::SparseMatrix<double> jacobian(const ProblemSpec& spec, const DiscreteFunction& u,
                                     Regularization reg = {});

struct SolveOptions {
  // Relative residual tolerance of the final stage.
  double tol = 1e-10;
  // Residual norm accepted regardless of scale (zero data, zero solution).
  double abs_tol = 1e-14;
  // Tolerance of intermediate continuation stages.
  double stage_tol = 1e-6;
  int max_newton = 60;
  double eps_grad_start = 1e-2;
  double eps_grad_floor = 1e-8;
  double eps_sub_start = 1e-3;
  double eps_sub_floor = 1e-9;
  int max_continuation = 400;
  // Principal eigenvalue of m; computed on demand when absent.
  std::optional<double> lam1;

  // multi-start
  std::vector<double> t_grid{0.5, 1.0, 2.0};
  int random_starts = 2;
  std::uint64_t seed = 20240611;
  double dedup_tol = 1e-6;
};

struct SolveOutcome {
  DiscreteFunction u;
  double residual_norm = 0.0;  // relative, at the final regularization
  double energy = 0.0;
  int newton_iters = 0;
  int continuation_steps = 0;
  SignClass sign_class = SignClass::Zero;
  // Sign of the one-sided outward normal derivative at each boundary vertex
  // (0 at corners and where the neighbour value is below the sign threshold).
  std::vector<int> boundary_flux_sign;
  double sup_norm = 0.0;
  double sobolev_seminorm = 0.0;
  // ||u||_inf / (1 + ||u||_{2p})
  double sup_bound_constant = 0.0;

  std::string start_strategy;
  bool converged = true;
  // Failed next to lam1, or converged within 1e-6 relative of lam1.
  bool resonant = false;
  std::string message;
};

/// Damped Newton on the residual with a backtracking line search on
/// ||R||^2. The regularizations are marched down directly from `init`; if
/// that fails, the full ladder lam0 = min(lam, 0.9 lam1) -> lam, eta 0 ->
/// eta, regularizations -> floor is tried.
/// Throws NonConvergence, or ResonantParameter when the failure is
/// attributable to (near) singularity at the target.
SolveOutcome solve(const ProblemSpec& spec, const DiscreteFunction& init,
                   const SolveOptions& opts = {});
SolveOutcome solve(const ProblemSpec& spec, const SolveOptions& opts = {});

struct MultiStartResult {
  std::vector<SolveOutcome> starts;    // one per start, failures flagged
  std::vector<SolveOutcome> distinct;  // converged, deduplicated
  double lam1 = 0.0;
};

/// Runs solve() from zero, +-t s phi1 (t in t_grid) and smooth random
/// starts; s is the amplitude the linearization around phi1 predicts.
MultiStartResult multi_start_solve(const ProblemSpec& spec, const SolveOptions& opts = {});

}  // namespace plap
