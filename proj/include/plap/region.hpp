#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "plap/bvp.hpp"
#include "plap/critval.hpp"

namespace plap {

enum class TheoremId { Thm0, Thm1, ThmMinus1, Thm1W, ThmMinus1WW, PropNoneg, PropNonex, CorAmpLoc };
std::string to_string(TheoremId id);

struct HypothesisCheck {
  std::string name;
  bool passed = false;
  bool machine_checkable = true;
  std::string detail;
};

/// A sign claim for every solution in a (lam, eta) window. The underlying
/// neighbourhoods have unquantified size; the windows come from
/// RegionOptions and are reported with the prediction.
struct TheoremPrediction {
  TheoremId id = TheoremId::Thm0;
  std::vector<HypothesisCheck> hypotheses;
  std::vector<SignClass> claim;
  // Claim checked only on the interior compact set (vertices at distance
  // >= interior_margin * diameter from the boundary).
  bool interior_only = false;
  // Depends on a hypothesis that could not be certified; reported, never
  // used for consistency flags.
  bool conditional = false;
  double lam_lo = 0.0, lam_hi = 0.0;
  bool lam_lo_closed = false, lam_hi_closed = false;
  double eta_lo = 0.0, eta_hi = 0.0;
  bool eta_lo_closed = false, eta_hi_closed = false;
  // lam-dependent open eta interval overriding eta_lo/eta_hi when set.
  std::function<std::pair<double, double>(double)> eta_range;
  std::string note;

  bool applies(double lam, double eta) const;
  bool allows(SignClass c) const;
};

struct RegionOptions {
  // Window widths standing in for the theorems' delta, as fractions of lam1.
  double mp_lam_window = 0.1;
  double amp_lam_window = 0.05;
  // eta window as a fraction of eta_bar (eta* estimate at lam1 / 2).
  double eta_window = 0.1;
  // Strip width for the "a = 0 / f >= 0 / f = 0 near the boundary" tests,
  // as a fraction of the diameter.
  double rho = 0.05;
  // Interior compact set for downgraded claims, as a fraction of the diameter.
  double interior_margin = 0.1;
  SolveOptions solve;
  EtaStarOptions eta_star;
  std::optional<double> eta_bar;
  std::uint64_t seed = 20240611;
  int threads = 0;  // 0: hardware concurrency
  // Compute eta*_lam(+-a) on the lam grid for the nonnegativity claims.
  bool compute_eta_star = true;
};

/// Quantities computed once per configuration and shared by the checks.
struct RegionContext {
  double lam1 = 0.0;
  DiscreteFunction phi1;
  double eta_bar = 0.0;
  // eta*_lam(a) and eta*_lam(-a) keyed by lam (ascending).
  std::vector<std::pair<double, double>> eta_star_plus, eta_star_minus;
};

RegionContext make_context(const ProblemSpec& spec, const std::vector<double>& lam_grid,
                           const RegionOptions& opts);

/// Evaluates the machine-checkable hypotheses on the nodal weights and
/// emits the predictions whose checks pass.
std::vector<TheoremPrediction> check_hypotheses(const ProblemSpec& spec, const RegionContext& ctx,
                                                const RegionOptions& opts);

struct StartRecord {
  std::string start_strategy;
  bool converged = false;
  bool resonant = false;
  SignClass sign_class = SignClass::Zero;
  SignClass interior_class = SignClass::Zero;
  double residual_norm = 0.0;
  double sup_norm = 0.0;
  double energy = 0.0;
  std::vector<std::string> predicted_by;
  // 1 consistent, 0 violated, -1 not applicable
  int consistent = -1;
  std::string message;
};

struct CellRecord {
  double lam = 0.0, eta = 0.0;
  std::vector<StartRecord> starts;
  int distinct = 0;
};

struct Counterexample {
  double lam = 0.0, eta = 0.0;
  std::string start_strategy;
  std::string theorem;
  std::string observed;
  std::string claimed;
};

struct EtaBound {
  double lam = 0.0;
  double eta_lo = 0.0, eta_hi = 0.0;  // contiguous sign-definite interval around eta = 0
};

struct RegionMap {
  std::vector<double> lam_grid, eta_grid;
  std::vector<CellRecord> cells;  // lam-major: index i * eta_grid.size() + j
  double lam1 = 0.0;
  double lam2_bound = 0.0;  // 1D shooting value for m = 1, else +infinity
  double delta_hat_mp = 0.0, delta_hat_amp = 0.0;
  std::vector<EtaBound> eta_bounds;
  std::vector<TheoremPrediction> predictions;
  std::vector<Counterexample> counterexamples;
  double p = 0.0, q = 0.0;

  const CellRecord& cell(std::size_t i, std::size_t j) const { return cells[i * eta_grid.size() + j]; }
};

/// Runs multi_start_solve on every grid point (in parallel, merged in grid
/// order) and joins the outcomes with the predictions.
RegionMap sweep(const ProblemSpec& spec, const std::vector<double>& lam_grid,
                const std::vector<double>& eta_grid, const RegionOptions& opts = {});

// 61 lam points on [0, 2 lam1] and 21 eta points on [-eta_bar, eta_bar].
std::vector<double> default_lam_grid(double lam1, int points = 61);
std::vector<double> default_eta_grid(double eta_bar, int points = 21);

struct FamilyMember {
  std::string label;
  Weight f;
};

struct NonuniformityOptions {
  double eps_lambda = 1.0;
  double small_eta = 1e-2;
  // AMP interval scan: lam1 + k * delta_max / lam_points, k = 1..lam_points.
  double delta_max = 1.0;
  int lam_points = 41;
  SolveOptions solve;
};

struct MemberReport {
  std::string label;
  std::vector<SignClass> classes_eta0, classes_eta_small, classes_control;
  double delta_hat_amp = 0.0;
  // No outcome at lam1 + eps is positive/nonnegative or negative.
  bool no_nonneg_no_negative = false;
  int failures = 0;
};

struct NonuniformityReport {
  double lam1 = 0.0;
  double lam = 0.0;
  std::vector<MemberReport> members;
  bool delta_hat_decreasing = false;
};

NonuniformityReport nonuniformity_experiment(const MeshPtr& mesh, double p, double q, const Weight& m,
                                             const Weight& a, const std::vector<FamilyMember>& family,
                                             const NonuniformityOptions& opts = {});

/// Bumps shrinking toward the boundary point (x0 of the box): centres
/// x0 + c * width for c in {0.04, 0.03, 0.02, 0.01}, radius c/2 * width.
std::vector<FamilyMember> default_bump_family(const Mesh& mesh);

}  // namespace plap
