#include "plap/critval.hpp"

#include <Eigen/SparseCholesky>
#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <random>

#include "plap/assembly.hpp"
#include "plap/eigensolver.hpp"
#include "plap/errors.hpp"

namespace plap {

bool EtaStarResult::is_infinite() const noexcept { return std::isinf(value); }

double eta_star_constant(double p, double q) {
  const double alpha = (q - 1.0) / (p - 1.0), beta = (p - q) / (p - 1.0);
  return (p - 1.0) / (std::pow(p - q, beta) * std::pow(q - 1.0, alpha));
}

namespace {

constexpr double inf = std::numeric_limits<double>::infinity();

struct Parts {
  double h = 0.0;  // H_lam(u), clamped at zero
  double f = 0.0;  // int f u
  double a = 0.0;  // int a |u|^q
};

Parts parts(const DiscreteFunction& u, std::span<const double> m, std::span<const double> a,
            std::span<const double> f, double p, double q, double lam) {
  Parts out;
  const auto& lumped = u.mesh()->lumped_volumes();
  double mp = 0.0;
  for (std::size_t v = 0; v < u.size(); ++v) {
    const double x = std::abs(u[v]);
    if (x == 0.0) continue;
    mp += lumped[v] * m[v] * std::pow(x, p);
    out.a += lumped[v] * a[v] * std::pow(x, q);
    out.f += lumped[v] * f[v] * u[v];
  }
  out.h = std::max(grad_energy(u, p) - lam * mp, 0.0);
  return out;
}

double objective_from(const Parts& s, double p, double q) {
  if (!(s.a > 0.0)) return inf;
  const double alpha = (q - 1.0) / (p - 1.0), beta = (p - q) / (p - 1.0);
  return eta_star_constant(p, q) * std::pow(s.h, alpha) * std::pow(std::max(s.f, 0.0), beta) / s.a;
}

struct Descent {
  const Mesh& mesh;
  const MeshPtr& mesh_ptr;
  const DofMap& dofs;
  const Eigen::SparseMatrix<double>& stiffness;
  std::span<const double> m, a, f;
  double p, q, lam;
  const EtaStarOptions& opts;

  // Gradient of log J over the free vertices; H, F > 0 and A > 0 assumed.
  Eigen::VectorXd log_gradient(const DiscreteFunction& u, const Parts& s) const {
    const auto n = static_cast<Eigen::Index>(dofs.size());
    const double alpha = (q - 1.0) / (p - 1.0), beta = (p - q) / (p - 1.0);
    Eigen::VectorXd dh = Eigen::VectorXd::Zero(n), dm = Eigen::VectorXd::Zero(n);
    // A tiny regularization keeps the flux finite at flat cells for p < 2.
    add_flux_residual(mesh, u.values(), p, p < 2.0 ? 1e-10 : 0.0, dofs, dh);
    add_power_residual(mesh, m, u.values(), p, 0.0, lam, dofs, dm);
    dh = p * (dh - dm);
    Eigen::VectorXd g(n);
    const auto& lumped = mesh.lumped_volumes();
    for (std::size_t k = 0; k < dofs.size(); ++k) {
      const auto v = static_cast<std::size_t>(dofs.free_vertices()[k]);
      const double x = std::max(u[v], 0.0);
      const double da = x > 0.0 ? q * lumped[v] * a[v] * std::pow(x, q - 1.0) : 0.0;
      const auto i = static_cast<Eigen::Index>(k);
      g[i] = alpha * dh[i] / s.h + beta * lumped[v] * f[v] / s.f - da / s.a;
    }
    return g;
  }

  void normalize(std::vector<double>& u) const {
    const double ge = grad_energy(DiscreteFunction(mesh_ptr, u), p);
    if (ge > 0.0) {
      const double t = std::pow(ge, -1.0 / p);
      for (auto& x : u) x *= t;
    }
  }

  // One projected backtracking search along -d; updates u and the cached
  // state on success.
  bool line_search(const Eigen::VectorXd& g, const Eigen::VectorXd& d, double& step,
                   std::vector<double>& u, DiscreteFunction& cur, Parts& s, double& logj,
                   double& drop) const {
    const Eigen::VectorXd x = dofs.gather(u);
    for (int ls = 0; ls < 60; ++ls) {
      Eigen::VectorXd xt = (x - step * d).cwiseMax(0.0);
      const double decrease = g.dot(x - xt);
      if (decrease > 0.0) {
        DiscreteFunction trial(mesh_ptr, dofs.scatter(xt));
        const Parts st = parts(trial, m, a, f, p, q, lam);
        const double jt = objective_from(st, p, q);
        if (jt == 0.0 || (std::isfinite(jt) && std::log(jt) <= logj - 1e-4 * decrease)) {
          u = trial.values();
          normalize(u);
          cur = DiscreteFunction(mesh_ptr, u);
          s = parts(cur, m, a, f, p, q, lam);
          const double jn = objective_from(s, p, q);
          const double next = jn > 0.0 ? std::log(jn) : -inf;
          drop = logj - next;
          logj = next;
          return true;
        }
      }
      step *= 0.5;
    }
    return false;
  }

  // Two-metric projected descent: vertices sitting at (or within 1e-3 sup of)
  // zero whose gradient pushes outward get a lumped-diagonal metric, the
  // rest the stiffness matrix restricted to them. That direction stays a
  // descent direction after projection. Returns the final objective; `u`
  // holds the local minimizer estimate.
  double run(std::vector<double>& u) const {
    for (auto& x : u) x = std::max(x, 0.0);
    normalize(u);
    DiscreteFunction cur(mesh_ptr, u);
    Parts s = parts(cur, m, a, f, p, q, lam);
    const double j = objective_from(s, p, q);
    if (!std::isfinite(j) || j == 0.0) return j;
    double logj = std::log(j);
    double step = -1.0;
    int stalls = 0;
    const auto& lumped = mesh.lumped_volumes();
    const auto n = static_cast<Eigen::Index>(dofs.size());
    std::vector<char> active(dofs.size(), 2), prev_active;
    Eigen::SimplicialLDLT<Eigen::SparseMatrix<double>> ldlt;
    std::vector<Eigen::Index> free_pos;
    for (int it = 0; it < opts.max_iter; ++it) {
      if (s.h <= 0.0 || s.f <= 0.0) return objective_from(s, p, q);
      const Eigen::VectorXd g = log_gradient(cur, s);
      const Eigen::VectorXd x = dofs.gather(u);
      const double xmax = x.cwiseAbs().maxCoeff();

      prev_active.swap(active);
      active.assign(dofs.size(), 0);
      for (Eigen::Index i = 0; i < n; ++i)
        active[static_cast<std::size_t>(i)] = x[i] <= 1e-3 * xmax && g[i] > 0.0;
      if (active != prev_active) {
        free_pos.assign(dofs.size(), -1);
        Eigen::Index nf = 0;
        for (Eigen::Index i = 0; i < n; ++i)
          if (!active[static_cast<std::size_t>(i)]) free_pos[static_cast<std::size_t>(i)] = nf++;
        Triplets trips;
        for (int k = 0; k < stiffness.outerSize(); ++k)
          for (Eigen::SparseMatrix<double>::InnerIterator e(stiffness, k); e; ++e) {
            const auto r = free_pos[static_cast<std::size_t>(e.row())], c = free_pos[static_cast<std::size_t>(e.col())];
            if (r >= 0 && c >= 0) trips.emplace_back(static_cast<int>(r), static_cast<int>(c), e.value());
          }
        Eigen::SparseMatrix<double> kff(nf, nf);
        kff.setFromTriplets(trips.begin(), trips.end());
        ldlt.compute(kff);
        if (ldlt.info() != Eigen::Success) break;
      }
      Eigen::VectorXd gf(ldlt.rows());
      for (Eigen::Index i = 0; i < n; ++i)
        if (free_pos[static_cast<std::size_t>(i)] >= 0) gf[free_pos[static_cast<std::size_t>(i)]] = g[i];
      const Eigen::VectorXd df = ldlt.rows() > 0 ? Eigen::VectorXd(ldlt.solve(gf)) : gf;
      Eigen::VectorXd d(n);
      for (Eigen::Index i = 0; i < n; ++i) {
        const auto fp = free_pos[static_cast<std::size_t>(i)];
        d[i] = fp >= 0 ? df[fp] : g[i] / lumped[static_cast<std::size_t>(dofs.free_vertices()[static_cast<std::size_t>(i)])];
      }
      const Eigen::VectorXd dfree = ldlt.rows() > 0 ? df : d;
      step = step < 0.0 ? 0.1 * xmax / std::max(dfree.cwiseAbs().maxCoeff(), 1e-300) : 2.0 * step;

      double drop = 0.0;
      if (!line_search(g, d, step, u, cur, s, logj, drop) || !std::isfinite(logj)) break;
      stalls = drop < opts.tol * std::max(1.0, std::abs(logj)) ? stalls + 1 : 0;
      if (stalls >= 3) break;
    }
    return std::isfinite(logj) ? std::exp(logj) : 0.0;
  }
};

std::vector<double> random_positive_start(const Mesh& mesh, std::mt19937_64& rng, bool localized) {
  const auto& box = mesh.bounds();
  const bool two_d = mesh.dimension() == 2;
  std::uniform_real_distribution<double> coef(-1.5, 1.5), unit(0.0, 1.0);
  std::array<double, 6> c{};
  for (auto& x : c) x = coef(rng);
  const double cx = unit(rng), cy = unit(rng), r = 0.05 + 0.3 * unit(rng);
  std::vector<double> u(mesh.num_vertices(), 0.0);
  for (int v : mesh.interior_vertices()) {
    const auto& pt = mesh.vertices()[static_cast<std::size_t>(v)];
    const double xs = (pt.x - box.x0) / (box.x1 - box.x0);
    const double ys = two_d ? (pt.y - box.y0) / (box.y1 - box.y0) : 0.5;
    double base = std::sin(std::numbers::pi * xs);
    if (two_d) base *= std::sin(std::numbers::pi * ys);
    double e = 0.0;
    if (localized) {
      const double d2 = (xs - cx) * (xs - cx) + (two_d ? (ys - cy) * (ys - cy) : 0.0);
      e = -d2 / (r * r);
    } else {
      for (int i = 0; i < 3; ++i) {
        e += c[static_cast<std::size_t>(i)] * std::cos((i + 1) * std::numbers::pi * xs);
        if (two_d) e += c[static_cast<std::size_t>(i + 3)] * std::cos((i + 1) * std::numbers::pi * ys);
      }
    }
    u[static_cast<std::size_t>(v)] = base * std::exp(e);
  }
  return u;
}

}  // namespace

double eta_star_objective(const DiscreteFunction& u, std::span<const double> m,
                          std::span<const double> a, std::span<const double> f, double p,
                          double q, double lam) {
  return objective_from(parts(u, m, a, f, p, q, lam), p, q);
}

EtaStarResult eta_star(const MeshPtr& mesh, const Weight& m, const Weight& a, const Weight& f,
                       double p, double q, double lam, const EtaStarOptions& opts) {
  if (!(p > 1.0)) throw InvalidConfig("p must be > 1", "p");
  if (!(q > 1.0 && q < p)) throw InvalidConfig("q must satisfy 1 < q < p", "q");
  const auto mv = m.evaluate(*mesh), av = a.evaluate(*mesh), fv = f.evaluate(*mesh);
  const auto& interior = mesh->interior_vertices();
  for (int v : interior)
    if (fv[static_cast<std::size_t>(v)] < 0.0) throw InvalidConfig("f must be nonnegative", "f");

  std::optional<EigenPair> pair;
  double lam1 = inf;
  if (opts.lam1) {
    lam1 = *opts.lam1;
  }
  try {
    pair = principal_eigenpair(mesh, m, p);
    if (!opts.lam1) lam1 = pair->lam;
  } catch (const EmptyAdmissibleSet&) {
  }
  if (!(lam >= 0.0) || lam > lam1 * (1.0 + 1e-6))
    throw InvalidConfig("lambda must lie in [0, lambda_1(m)]", "lam");

  EtaStarResult out;
  out.value = inf;
  const bool theta_empty =
      std::none_of(interior.begin(), interior.end(), [&](int v) { return av[static_cast<std::size_t>(v)] > 0.0; });
  if (theta_empty) return out;

  if (opts.with_lower_bound && lam < lam1) {
    double c_f = inf;
    for (int v : interior) c_f = std::min(c_f, fv[static_cast<std::size_t>(v)]);
    if (c_f > 0.0) {
      std::vector<double> w(av.size());
      for (std::size_t v = 0; v < av.size(); ++v)
        w[v] = std::pow(std::max(av[v], 0.0), (p - 1.0) / (q - 1.0));
      const double lam1_aplus = principal_eigenpair(mesh, Weight::nodal(std::move(w)), p).lam;
      out.lower_bound = eta_star_lower_bound(c_f, p, q, lam, lam1, lam1_aplus);
    }
  }

  const DofMap dofs = DofMap::interior(*mesh);
  const Eigen::SparseMatrix<double> stiffness = laplace_stiffness(*mesh, dofs);
  const Descent descent{*mesh, mesh, dofs, stiffness, mv, av, fv, p, q, lam, opts};

  std::vector<std::vector<double>> starts;
  if (pair) starts.push_back(pair->phi.values());
  for (const auto& s : opts.extra_starts) starts.push_back(s.values());
  {
    std::vector<double> ap(mesh->num_vertices(), 0.0);
    for (int v : interior) ap[static_cast<std::size_t>(v)] = std::max(av[static_cast<std::size_t>(v)], 0.0);
    starts.push_back(std::move(ap));
  }
  for (int k = 0; static_cast<int>(starts.size()) < std::max(opts.starts, 1); ++k) {
    std::mt19937_64 rng(opts.seed + 0x9E3779B97F4A7C15ULL * static_cast<std::uint64_t>(k + 1));
    starts.push_back(random_positive_start(*mesh, rng, k % 2 == 1));
  }

  for (auto& u : starts) {
    const double val = descent.run(u);
    out.all_start_values.push_back(val);
    ++out.starts_used;
    if (val < out.value) {
      out.value = val;
      out.minimizer = DiscreteFunction(mesh, u);
    }
  }
  return out;
}

double eta_star_lower_bound(double c_f, double p, double q, double lam, double lam1_m,
                            double lam1_aplus) {
  if (!(c_f > 0.0)) throw InvalidConfig("the lower bound needs f >= c > 0", "c_f");
  if (!(lam < lam1_m)) throw InvalidConfig("the lower bound needs lambda < lambda_1(m)", "lam");
  if (!(lam >= 0.0)) throw InvalidConfig("the lower bound needs lambda >= 0", "lam");
  const double alpha = (q - 1.0) / (p - 1.0), beta = (p - q) / (p - 1.0);
  return eta_star_constant(p, q) * std::pow(c_f, beta) * std::pow(lam1_aplus, alpha) *
         std::pow(1.0 - lam / lam1_m, alpha);
}

double picone_polynomial(double s, double p, double q) {
  return (q - 1.0) * std::pow(s, p) + q * std::pow(s, p - 1.0) - (p - q) * s + (q - p + 1.0);
}

PiconePolynomialResult picone_polynomial_check(double p, double q, int grid_points) {
  if (!(q > 1.0 && q < p)) throw InvalidConfig("q must satisfy 1 < q < p", "q");
  PiconePolynomialResult out;
  out.s_max = std::max(10.0, std::pow(p / (q - 1.0), 2.0 / (p - q)));
  out.value_at_zero = picone_polynomial(0.0, p, q);

  const int n = std::max(grid_points, 100);
  std::vector<double> s(static_cast<std::size_t>(n) + 1), val(s.size());
  s[0] = 0.0;
  const double lo = std::log10(out.s_max) - 14.0, hi = std::log10(out.s_max);
  for (int k = 1; k <= n; ++k)
    s[static_cast<std::size_t>(k)] = std::pow(10.0, lo + (hi - lo) * (k - 1) / (n - 1));
  for (std::size_t k = 0; k < s.size(); ++k) val[k] = picone_polynomial(s[k], p, q);

  std::size_t best = 0;
  for (std::size_t k = 1; k < s.size(); ++k)
    if (val[k] < val[best]) best = k;
  out.min_value = val[best];
  out.argmin = s[best];

  // Golden-section refinement around each interior discrete local minimum.
  const double gr = (std::sqrt(5.0) - 1.0) / 2.0;
  for (std::size_t k = 1; k + 1 < s.size(); ++k) {
    if (!(val[k] <= val[k - 1] && val[k] <= val[k + 1])) continue;
    double a = s[k - 1], b = s[k + 1];
    double c = b - gr * (b - a), d = a + gr * (b - a);
    double fc = picone_polynomial(c, p, q), fd = picone_polynomial(d, p, q);
    for (int it = 0; it < 200 && b - a > 1e-15 * (1.0 + b); ++it) {
      if (fc < fd) {
        b = d, d = c, fd = fc;
        c = b - gr * (b - a);
        fc = picone_polynomial(c, p, q);
      } else {
        a = c, c = d, fc = fd;
        d = a + gr * (b - a);
        fd = picone_polynomial(d, p, q);
      }
    }
    const double x = 0.5 * (a + b), fx = picone_polynomial(x, p, q);
    if (fx < out.min_value) {
      out.min_value = fx;
      out.argmin = x;
    }
  }
  out.holds = out.min_value >= -1e-12;
  return out;
}

DiscretePiconeResult discrete_picone_check(const DiscreteFunction& u, const DiscreteFunction& phi,
                                           double p, double eps, double slack_c) {
  if (!(eps > 0.0)) throw InvalidConfig("eps must be > 0", "eps");
  if (!(p > 1.0)) throw InvalidConfig("p must be > 1", "p");
  if (u.mesh() != phi.mesh()) throw InvalidConfig("u and phi live on different meshes", "phi");
  for (double x : u.values())
    if (x < 0.0) throw InvalidConfig("u must be nonnegative at every vertex", "u");

  const Mesh& mesh = *u.mesh();
  std::vector<double> w(u.size());
  for (std::size_t v = 0; v < u.size(); ++v)
    w[v] = std::pow(std::abs(phi[v]), p) / std::pow(u[v] + eps, p - 1.0);

  DiscretePiconeResult out;
  const int nv = mesh.vertices_per_cell();
  for (std::size_t c = 0; c < mesh.num_cells(); ++c) {
    std::array<double, 2> gu{}, gw{};
    for (int k = 0; k < nv; ++k) {
      const auto v = static_cast<std::size_t>(mesh.cells()[c][static_cast<std::size_t>(k)]);
      const auto& g = mesh.basis_gradient(c, k);
      gu[0] += u[v] * g[0], gu[1] += u[v] * g[1];
      gw[0] += w[v] * g[0], gw[1] += w[v] * g[1];
    }
    const double n = std::hypot(gu[0], gu[1]);
    if (n > 0.0) out.lhs += mesh.cell_volumes()[c] * std::pow(n, p - 2.0) * (gu[0] * gw[0] + gu[1] * gw[1]);
  }
  out.rhs = grad_energy(phi, p);
  out.slack = (1e-8 + slack_c * mesh.mesh_size()) * (1.0 + std::abs(out.rhs));
  out.holds = out.lhs <= out.rhs + out.slack;
  return out;
}

PiconeCampaignResult discrete_picone_campaign(const MeshPtr& mesh, double p, double eps, int trials,
                                              std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> d(0.0, 1.0);
  PiconeCampaignResult out;
  for (int t = 0; t < trials; ++t) {
    std::vector<double> u(mesh->num_vertices(), 0.0), phi(u);
    for (int v : mesh->interior_vertices()) {
      u[static_cast<std::size_t>(v)] = d(rng) < 0.2 ? 0.0 : d(rng);
      phi[static_cast<std::size_t>(v)] = 2.0 * d(rng) - 1.0;
    }
    const auto r = discrete_picone_check(DiscreteFunction(mesh, u), DiscreteFunction(mesh, phi), p, eps);
    ++out.trials;
    out.violations += !r.holds;
    out.worst_slack_ratio = std::max(out.worst_slack_ratio, (r.lhs - r.rhs) / r.slack);
  }
  return out;
}

}  // namespace plap
