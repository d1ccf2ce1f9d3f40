#include "oracles.hpp"

#include <cmath>
#include <limits>
#include <numbers>
#include <stdexcept>

#include "plap/errors.hpp"

namespace oracles {

namespace {

// Number of eigenvalues below x of the symmetric tridiagonal (d, e).
int sturm_count(const std::vector<double>& d, const std::vector<double>& e, double x) {
  int count = 0;
  double q = 1.0;
  for (std::size_t i = 0; i < d.size(); ++i) {
    const double off = i == 0 ? 0.0 : e[i - 1] * e[i - 1];
    q = d[i] - x - (i == 0 ? 0.0 : off / q);
    if (q == 0.0) q = -1e-300;
    if (q < 0.0) ++count;
  }
  return count;
}

double kth_eigenvalue(const std::vector<double>& d, const std::vector<double>& e, int k) {
  double lo = 0.0, hi = 0.0;
  for (std::size_t i = 0; i < d.size(); ++i) {
    const double r = (i > 0 ? std::abs(e[i - 1]) : 0.0) + (i + 1 < d.size() ? std::abs(e[i]) : 0.0);
    lo = std::min(lo, d[i] - r);
    hi = std::max(hi, d[i] + r);
  }
  for (int it = 0; it < 300; ++it) {
    const double mid = 0.5 * (lo + hi);
    (sturm_count(d, e, mid) >= k ? hi : lo) = mid;
  }
  return 0.5 * (lo + hi);
}

// Gaussian elimination with partial pivoting on a tridiagonal system.
std::vector<double> banded_solve(std::vector<double> sub, std::vector<double> diag,
                                 std::vector<double> sup, std::vector<double> rhs) {
  const std::size_t n = diag.size();
  std::vector<double> sup2(n, 0.0);
  for (std::size_t i = 0; i + 1 < n; ++i) {
    if (std::abs(sub[i]) > std::abs(diag[i])) {
      std::swap(diag[i], sub[i]);
      std::swap(sup[i], diag[i + 1]);
      if (i + 2 < n) std::swap(sup2[i], sup[i + 1]);
      std::swap(rhs[i], rhs[i + 1]);
    }
    if (diag[i] == 0.0) throw std::runtime_error("singular tridiagonal system");
    const double f = sub[i] / diag[i];
    diag[i + 1] -= f * sup[i];
    if (i + 2 < n) sup[i + 1] -= f * sup2[i];
    rhs[i + 1] -= f * rhs[i];
  }
  if (diag[n - 1] == 0.0) throw std::runtime_error("singular tridiagonal system");
  std::vector<double> x(n);
  for (std::size_t ii = n; ii-- > 0;) {
    double s = rhs[ii];
    if (ii + 1 < n) s -= sup[ii] * x[ii + 1];
    if (ii + 2 < n) s -= sup2[ii] * x[ii + 2];
    x[ii] = s / diag[ii];
  }
  return x;
}

}  // namespace

OracleResult linear_eig_oracle_1d(int n, const std::vector<double>& m_values, double x0,
                                  double x1) {
  if (static_cast<int>(m_values.size()) != n - 1) throw std::invalid_argument("m_values size");
  const double h = (x1 - x0) / n;
  const std::size_t dim = static_cast<std::size_t>(n - 1);
  // Symmetric form M^{-1/2} K M^{-1/2}.
  std::vector<double> d(dim), e(dim > 0 ? dim - 1 : 0);
  for (std::size_t i = 0; i < dim; ++i) {
    if (!(m_values[i] > 0.0)) throw std::invalid_argument("linear_eig_oracle_1d needs m > 0");
    d[i] = 2.0 / h / (h * m_values[i]);
  }
  for (std::size_t i = 0; i + 1 < dim; ++i)
    e[i] = -1.0 / h / std::sqrt(h * m_values[i] * h * m_values[i + 1]);

  OracleResult out{"linear_eig_oracle_1d", "tridiagonal-eigensolve", n, 0.0, 0.0, {}};
  out.value = kth_eigenvalue(d, e, 1);
  out.value2 = dim >= 2 ? kth_eigenvalue(d, e, 2) : INFINITY;

  // Eigenvector by inverse iteration with a slightly shifted matrix.
  const double shift = out.value * (1.0 - 1e-10);
  std::vector<double> y(dim, 1.0);
  for (int it = 0; it < 5; ++it) {
    std::vector<double> sub(e), sup(e), diag(dim);
    for (std::size_t i = 0; i < dim; ++i) diag[i] = d[i] - shift;
    y = banded_solve(sub, diag, sup, y);
    double mx = 0.0;
    for (double v : y) mx = std::max(mx, std::abs(v));
    for (double& v : y) v /= mx;
  }
  out.samples.assign(static_cast<std::size_t>(n) + 1, 0.0);
  double mx = 0.0;
  for (std::size_t i = 0; i < dim; ++i) {
    out.samples[i + 1] = std::abs(y[i]) / std::sqrt(h * m_values[i]);
    mx = std::max(mx, out.samples[i + 1]);
  }
  for (double& v : out.samples) v /= mx;
  return out;
}

double plap_shooting_oracle_1d(double p, double lam_lo, double lam_hi, double length, int steps) {
  const double h = length / steps;
  auto phi = [](double v, double e) { return v == 0.0 ? 0.0 : std::copysign(std::pow(std::abs(v), e), v); };
  auto end_value = [&](double lam) {
    auto f = [&](const double* y, double* dy) {
      dy[0] = phi(y[1], 1.0 / (p - 1.0));
      dy[1] = -lam * phi(y[0], p - 1.0);
    };
    // Cash-Karp tableau, fifth-order weights.
    static constexpr double a2 = 0.2, a3[] = {3.0 / 40, 9.0 / 40},
                            a4[] = {0.3, -0.9, 1.2},
                            a5[] = {-11.0 / 54, 2.5, -70.0 / 27, 35.0 / 27},
                            a6[] = {1631.0 / 55296, 175.0 / 512, 575.0 / 13824, 44275.0 / 110592,
                                    253.0 / 4096},
                            b[] = {37.0 / 378, 0.0, 250.0 / 621, 125.0 / 594, 0.0, 512.0 / 1771};
    double y[2] = {0.0, 1.0};
    double k[6][2], t[2];
    for (int s = 0; s < steps; ++s) {
      f(y, k[0]);
      for (int j = 0; j < 2; ++j) t[j] = y[j] + h * a2 * k[0][j];
      f(t, k[1]);
      for (int j = 0; j < 2; ++j) t[j] = y[j] + h * (a3[0] * k[0][j] + a3[1] * k[1][j]);
      f(t, k[2]);
      for (int j = 0; j < 2; ++j) t[j] = y[j] + h * (a4[0] * k[0][j] + a4[1] * k[1][j] + a4[2] * k[2][j]);
      f(t, k[3]);
      for (int j = 0; j < 2; ++j)
        t[j] = y[j] + h * (a5[0] * k[0][j] + a5[1] * k[1][j] + a5[2] * k[2][j] + a5[3] * k[3][j]);
      f(t, k[4]);
      for (int j = 0; j < 2; ++j)
        t[j] = y[j] + h * (a6[0] * k[0][j] + a6[1] * k[1][j] + a6[2] * k[2][j] + a6[3] * k[3][j] +
                           a6[4] * k[4][j]);
      f(t, k[5]);
      for (int j = 0; j < 2; ++j) {
        double acc = 0.0;
        for (int st = 0; st < 6; ++st) acc += b[st] * k[st][j];
        y[j] += h * acc;
      }
    }
    return y[0];
  };
  double flo = end_value(lam_lo), fhi = end_value(lam_hi);
  if (!(flo > 0.0 && fhi < 0.0))
    throw plap::NonConvergence("shooting oracle: bracket does not straddle the first eigenvalue");
  for (int it = 0; it < 100 && lam_hi - lam_lo > 1e-13 * lam_hi; ++it) {
    const double mid = 0.5 * (lam_lo + lam_hi);
    (end_value(mid) > 0.0 ? lam_lo : lam_hi) = mid;
  }
  return 0.5 * (lam_lo + lam_hi);
}

OracleResult linear_bvp_oracle_1d(double lam, const std::vector<double>& f_values, int n,
                                  double x0, double x1) {
  if (static_cast<int>(f_values.size()) != n + 1) throw std::invalid_argument("f_values size");
  const double h = (x1 - x0) / n;
  const std::vector<double> ones(static_cast<std::size_t>(n - 1), 1.0);
  const auto eig = linear_eig_oracle_1d(n, ones, x0, x1);
  for (double ev : {eig.value, eig.value2})
    if (std::abs(lam - ev) <= 1e-6 * std::max(1.0, std::abs(ev)))
      throw plap::ResonantParameter("linear_bvp_oracle_1d: lam is an eigenvalue");

  const std::size_t dim = static_cast<std::size_t>(n - 1);
  std::vector<double> sub(dim > 0 ? dim - 1 : 0, -1.0 / h), sup(sub), diag(dim, 2.0 / h - lam * h),
      rhs(dim);
  for (std::size_t i = 0; i < dim; ++i) rhs[i] = h * f_values[i + 1];
  const auto x = banded_solve(sub, diag, sup, rhs);
  OracleResult out{"linear_bvp_oracle_1d", "tridiagonal-solve", n, 0.0, 0.0, {}};
  out.samples.assign(static_cast<std::size_t>(n) + 1, 0.0);
  for (std::size_t i = 0; i < dim; ++i) out.samples[i + 1] = x[i];
  return out;
}

double mp_closed_form(double x) { return 0.5 * x * (1.0 - x); }

double amp_closed_form(double lam, double x) {
  const double s = std::sqrt(lam);
  return (std::cos(s * (x - 0.5)) / std::cos(0.5 * s) - 1.0) / lam;
}

double pi_p(double p) { return 2.0 * std::numbers::pi / (p * std::sin(std::numbers::pi / p)); }

double plap_lambda1_closed_form(double p, double length) {
  return (p - 1.0) * std::pow(pi_p(p) / length, p);
}

OracleResult eta_star_dense_scan_1d(double p, double q, double lam, int n) {
  const double h = 1.0 / n;
  const double alpha = (q - 1.0) / (p - 1.0), beta = (p - q) / (p - 1.0);
  const double cpq = (p - 1.0) / (std::pow(p - q, beta) * std::pow(q - 1.0, alpha));
  OracleResult out{"eta_star_dense_scan_1d", "dense-scan", n, std::numeric_limits<double>::infinity(), 0.0, {}};
  std::vector<double> u(static_cast<std::size_t>(n) + 1);
  for (int ic = 1; ic < 40; ++ic) {
    const double c = ic / 40.0;
    for (int ir = 1; ir <= 40; ++ir) {
      const double r = std::min(c, 1.0 - c) * ir / 40.0;
      for (double k : {1.0, 1.5, 2.0, 3.0, 4.0}) {
        for (int i = 0; i <= n; ++i) {
          const double t = (i * h - c) / r;
          u[static_cast<std::size_t>(i)] = std::abs(t) < 1.0 ? std::pow(1.0 - t * t, k) : 0.0;
        }
        u.front() = u.back() = 0.0;
        double grad = 0.0, up = 0.0, uq = 0.0, u1 = 0.0;
        for (int i = 0; i < n; ++i)
          grad += h * std::pow(std::abs(u[static_cast<std::size_t>(i) + 1] - u[static_cast<std::size_t>(i)]) / h, p);
        for (int i = 1; i < n; ++i) {
          const double x = u[static_cast<std::size_t>(i)];
          up += h * std::pow(x, p);
          uq += h * std::pow(x, q);
          u1 += h * x;
        }
        if (!(uq > 0.0)) continue;
        const double hl = std::max(grad - lam * up, 0.0);
        const double val = cpq * std::pow(hl, alpha) * std::pow(u1, beta) / uq;
        if (val < out.value) {
          out.value = val;
          out.value2 = c;
          out.samples = {c, r, k};
        }
      }
    }
  }
  return out;
}

OracleResult picone_dense_scan(double p, double q, double s_max, int points) {
  OracleResult out{"picone_dense_scan", "dense-scan", points, std::numeric_limits<double>::infinity(), 0.0, {}};
  for (int i = 0; i <= points; ++i) {
    const double s = s_max * i / points;
    const double v = (q - 1.0) * std::pow(s, p) + q * std::pow(s, p - 1.0) - (p - q) * s + (q - p + 1.0);
    if (v < out.value) {
      out.value = v;
      out.value2 = s;
    }
  }
  return out;
}

}  // namespace oracles
