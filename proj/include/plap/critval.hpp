#pragma once

#include <cstdint>
#include <limits>
#include <optional>
#include <vector>

#include "plap/discrete_function.hpp"
#include "plap/mesh.hpp"

namespace plap {

struct EtaStarOptions {
  int starts = 32;  // including phi1 when it exists
  int max_iter = 500;
  // Stop once log J decreases by less than this over an iteration.
  double tol = 1e-12;
  std::uint64_t seed = 20240611;
  std::optional<double> lam1;
  std::vector<DiscreteFunction> extra_starts;
  bool with_lower_bound = true;
};

struct EtaStarResult {
  double value = 0.0;  // +infinity when no admissible function was found
  std::optional<DiscreteFunction> minimizer;
  std::optional<double> lower_bound;
  int starts_used = 0;
  std::vector<double> all_start_values;

  bool is_infinite() const noexcept;
};

// (p-1) / ((p-q)^((p-q)/(p-1)) (q-1)^((q-1)/(p-1)))
double eta_star_constant(double p, double q);

/// c_pq H_lam(u)^((q-1)/(p-1)) (int f u)^((p-q)/(p-1)) / int a u^q for a
/// nonnegative u; +infinity when int a u^q <= 0. Invariant under u -> t u.
double eta_star_objective(const DiscreteFunction& u, std::span<const double> m,
                          std::span<const double> a, std::span<const double> f, double p,
                          double q, double lam);

/// Upper estimate of the critical value eta*_lam(a): projected,
/// Sobolev-preconditioned descent on log J over the nonnegative cone,
/// started from phi1 and smooth random positive functions.
EtaStarResult eta_star(const MeshPtr& mesh, const Weight& m, const Weight& a, const Weight& f,
                       double p, double q, double lam, const EtaStarOptions& opts = {});

/// c_pq c_f^((p-q)/(p-1)) lam1(a_+^((p-1)/(q-1)))^((q-1)/(p-1)) (1 - lam/lam1(m))^((q-1)/(p-1))
double eta_star_lower_bound(double c_f, double p, double q, double lam, double lam1_m,
                            double lam1_aplus);

// (q-1) s^p + q s^(p-1) - (p-q) s + (q-p+1)
double picone_polynomial(double s, double p, double q);

struct PiconePolynomialResult {
  bool holds = false;
  double min_value = 0.0;
  double argmin = 0.0;
  double value_at_zero = 0.0;
  double s_max = 0.0;
};

/// Checks picone_polynomial >= 0 on [0, s_max] by a log-uniform scan
/// refined with golden-section search around every discrete local minimum.
PiconePolynomialResult picone_polynomial_check(double p, double q, int grid_points = 20000);

struct DiscretePiconeResult {
  double lhs = 0.0;
  double rhs = 0.0;
  double slack = 0.0;
  bool holds = false;
};

/// lhs = int |grad u|^(p-2) grad u . grad w with w = |phi|^p / (u + eps)^(p-1)
/// interpolated nodally, rhs = int |grad phi|^p. The O(h) slack
/// (scaled by slack_c) absorbs the interpolation of w.
DiscretePiconeResult discrete_picone_check(const DiscreteFunction& u, const DiscreteFunction& phi,
                                           double p, double eps, double slack_c = 0.5);

struct PiconeCampaignResult {
  int trials = 0, violations = 0;
  double worst_slack_ratio = -std::numeric_limits<double>::infinity();  // max (lhs - rhs) / slack
};

/// Random pairs: u uniform in [0, 1) with 20% nodal zeros, phi uniform in
/// [-1, 1), both zero on the boundary.
PiconeCampaignResult discrete_picone_campaign(const MeshPtr& mesh, double p, double eps, int trials,
                                              std::uint64_t seed);

}  // namespace plap
