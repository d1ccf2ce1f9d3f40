#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "plap/bvp.hpp"
#include "plap/critval.hpp"
#include "plap/eigensolver.hpp"
#include "plap/region.hpp"

namespace plap {

enum class Mode { Eigen, Solve, Sweep, Critval, PiconeCheck, Nonuniformity };
std::string to_string(Mode m);
Mode mode_from_string(const std::string& s);  // InvalidConfig on unknown names

struct DomainSpec {
  bool rectangle = false;
  double x0 = 0.0, x1 = 1.0, y0 = 0.0, y1 = 1.0;
  int nx = 256, ny = 0;
  MeshPtr build() const;
};

/// A closed [from, to] grid with `points` entries, or explicit values.
struct GridSpec {
  std::vector<double> values;
  std::optional<double> from, to;
  int points = 0;
  // from/to are multiples of lam1 (lam grids) or eta_bar (eta grids)
  bool relative = false;
  bool is_default() const { return values.empty() && points == 0; }
  std::vector<double> resolve(double scale) const;
};

struct RunConfig {
  Mode mode = Mode::Eigen;
  DomainSpec domain;
  double p = 2.0, q = 1.5;
  Weight m = Weight::constant(1.0), a = Weight::constant(1.0), f = Weight::constant(1.0);
  double lam = 0.0, eta = 0.0;
  std::uint64_t seed = 20240611;

  EigenOptions eigen;
  std::optional<std::vector<double>> subdomain;  // box [x0, x1] or [x0, x1, y0, y1]
  SolveOptions solve;
  RegionOptions region;
  GridSpec lam_grid, eta_grid;
  EtaStarOptions eta_star;
  GridSpec critval_lams;  // relative to lam1 by default
  std::vector<std::pair<double, double>> picone_pairs;  // empty: (p, q)
  std::vector<double> picone_eps{1e-1, 1e-3};
  NonuniformityOptions nonuniformity;
  std::vector<std::string> family;  // expressions; empty: default bumps

  std::filesystem::path out_dir = ".";
  std::string csv_name = "sweep.csv";
  std::string report_name = "report.json";

  // Normalized configuration with every default filled in.
  std::string echo;
};

/// Parses a JSON configuration. Nodal weight files are resolved relative
/// to base_dir. PLAP_OUT_DIR, when set, overrides output.dir.
RunConfig parse_config(const std::string& text, const std::filesystem::path& base_dir = ".");
RunConfig load_config(const std::filesystem::path& path);

/// Replaces the seed everywhere it is used (and in the echo).
void override_seed(RunConfig& cfg, std::uint64_t seed);

/// ProblemSpec from the configuration (builds the mesh).
ProblemSpec make_problem(const RunConfig& cfg);

/// One row per (lam, eta, start_strategy) in grid order.
void write_csv(const RegionMap& map, const std::filesystem::path& path);

// JSON reports; `config_echo` is embedded verbatim when non-empty.
void write_report(const EigenPair& e, const std::filesystem::path& path, const std::string& config_echo = {});
void write_report(const std::vector<SolveOutcome>& outcomes, const ProblemSpec& spec,
                  const std::filesystem::path& path, const std::string& config_echo = {});
void write_report(const RegionMap& map, const std::filesystem::path& path, const std::string& config_echo = {});

struct CritvalRow {
  double lam = 0.0;
  EtaStarResult plus, minus;  // eta*_lam(a), eta*_lam(-a)
};
void write_report(double lam1, const std::vector<CritvalRow>& rows, const std::filesystem::path& path,
                  const std::string& config_echo = {});

struct PiconeReport {
  struct Poly {
    double p = 0.0, q = 0.0;
    PiconePolynomialResult result;
  };
  struct Discrete {
    double p = 0.0, eps = 0.0;
    int trials = 0, violations = 0;
    double worst_slack_ratio = 0.0;  // max (lhs - rhs) / slack
  };
  std::vector<Poly> polynomial;
  std::vector<Discrete> discrete;
};
void write_report(const PiconeReport& r, const std::filesystem::path& path, const std::string& config_echo = {});
void write_report(const NonuniformityReport& r, const std::filesystem::path& path,
                  const std::string& config_echo = {});

void write_text(const std::string& text, const std::filesystem::path& path);

// Formats with 17 significant digits ("inf", "-inf", "nan" for non-finite).
std::string format_real(double x);

}  // namespace plap
