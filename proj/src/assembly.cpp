#include "plap/assembly.hpp"

#include <cmath>

#include "plap/errors.hpp"

namespace plap {

DofMap::DofMap(const Mesh& mesh, std::vector<int> free_vertices)
    : free_(std::move(free_vertices)), index_(mesh.num_vertices(), -1) {
  for (std::size_t k = 0; k < free_.size(); ++k) index_[static_cast<std::size_t>(free_[k])] = static_cast<int>(k);
}

DofMap DofMap::interior(const Mesh& mesh) { return DofMap(mesh, mesh.interior_vertices()); }

Eigen::VectorXd DofMap::gather(std::span<const double> nodal) const {
  Eigen::VectorXd x(static_cast<Eigen::Index>(free_.size()));
  for (std::size_t k = 0; k < free_.size(); ++k) x[static_cast<Eigen::Index>(k)] = nodal[static_cast<std::size_t>(free_[k])];
  return x;
}

std::vector<double> DofMap::scatter(const Eigen::VectorXd& x) const {
  std::vector<double> nodal(index_.size(), 0.0);
  for (std::size_t k = 0; k < free_.size(); ++k) nodal[static_cast<std::size_t>(free_[k])] = x[static_cast<Eigen::Index>(k)];
  return nodal;
}

namespace {

std::array<double, 2> cell_gradient(const Mesh& mesh, std::size_t c, std::span<const double> u) {
  const auto& cell = mesh.cells()[c];
  std::array<double, 2> z{0.0, 0.0};
  for (int k = 0; k < mesh.vertices_per_cell(); ++k) {
    const double val = u[static_cast<std::size_t>(cell[static_cast<std::size_t>(k)])];
    const auto& g = mesh.basis_gradient(c, k);
    z[0] += val * g[0];
    z[1] += val * g[1];
  }
  return z;
}

// (r2 + eps^2)^(e/2), with the unregularized limit at r2 = 0 handled.
double reg_power(double r2, double eps, double e) {
  const double base = r2 + eps * eps;
  if (base == 0.0) {
    if (e > 0.0) return 0.0;
    if (e == 0.0) return 1.0;
    throw SingularJacobian("degenerate gradient without regularization");
  }
  return std::pow(base, 0.5 * e);
}

}  // namespace

double flux_energy(const Mesh& mesh, std::span<const double> u, double p, double eps) {
  double total = 0.0;
  const double offset = eps > 0.0 ? std::pow(eps, p) : 0.0;
  for (std::size_t c = 0; c < mesh.num_cells(); ++c) {
    const auto z = cell_gradient(mesh, c, u);
    const double r2 = z[0] * z[0] + z[1] * z[1];
    total += mesh.cell_volumes()[c] * (reg_power(r2, eps, p) - offset);
  }
  return total / p;
}

void add_flux_residual(const Mesh& mesh, std::span<const double> u, double p, double eps,
                       const DofMap& dofs, Eigen::VectorXd& r) {
  for (std::size_t c = 0; c < mesh.num_cells(); ++c) {
    const auto z = cell_gradient(mesh, c, u);
    const double r2 = z[0] * z[0] + z[1] * z[1];
    if (r2 == 0.0) continue;
    const double coef = mesh.cell_volumes()[c] * reg_power(r2, eps, p - 2.0);
    const auto& cell = mesh.cells()[c];
    for (int k = 0; k < mesh.vertices_per_cell(); ++k) {
      const int dof = dofs.index(cell[static_cast<std::size_t>(k)]);
      if (dof < 0) continue;
      const auto& g = mesh.basis_gradient(c, k);
      r[dof] += coef * (z[0] * g[0] + z[1] * g[1]);
    }
  }
}

std::array<double, 4> flux_linearization(const std::array<double, 2>& z, double p, double eps) {
  const double r2 = z[0] * z[0] + z[1] * z[1];
  const double base = r2 + eps * eps;
  const double scale = reg_power(r2, eps, p - 2.0);
  const double c = base > 0.0 ? (p - 2.0) / base : 0.0;
  return {scale * (1.0 + c * z[0] * z[0]), scale * c * z[0] * z[1], scale * c * z[1] * z[0],
          scale * (1.0 + c * z[1] * z[1])};
}

void add_flux_jacobian(const Mesh& mesh, std::span<const double> u, double p, double eps,
                       const DofMap& dofs, Triplets& out) {
  const int nloc = mesh.vertices_per_cell();
  for (std::size_t c = 0; c < mesh.num_cells(); ++c) {
    const auto z = cell_gradient(mesh, c, u);
    const auto a = flux_linearization(z, p, eps);
    const double vol = mesh.cell_volumes()[c];
    const auto& cell = mesh.cells()[c];
    for (int k = 0; k < nloc; ++k) {
      const int row = dofs.index(cell[static_cast<std::size_t>(k)]);
      if (row < 0) continue;
      const auto& gk = mesh.basis_gradient(c, k);
      const double ax = a[0] * gk[0] + a[1] * gk[1];
      const double ay = a[2] * gk[0] + a[3] * gk[1];
      for (int l = 0; l < nloc; ++l) {
        const int col = dofs.index(cell[static_cast<std::size_t>(l)]);
        if (col < 0) continue;
        const auto& gl = mesh.basis_gradient(c, l);
        out.emplace_back(row, col, vol * (ax * gl[0] + ay * gl[1]));
      }
    }
  }
}

double reg_odd_power(double u, double s, double eps) {
  if (u == 0.0) return 0.0;
  if (s == 2.0) return u;
  return reg_power(u * u, eps, s - 2.0) * u;
}

double reg_odd_power_derivative(double u, double s, double eps) {
  if (s == 2.0) return 1.0;
  const double u2 = u * u;
  const double base = u2 + eps * eps;
  if (base == 0.0) {
    if (s > 2.0) return 0.0;
    throw SingularJacobian("sublinear term is not differentiable at zero without regularization");
  }
  return std::pow(base, 0.5 * (s - 4.0)) * ((s - 1.0) * u2 + eps * eps);
}

double power_energy(const Mesh& mesh, std::span<const double> w, std::span<const double> u,
                    double s, double eps) {
  const auto& lumped = mesh.lumped_volumes();
  const double offset = eps > 0.0 ? std::pow(eps, s) : 0.0;
  double total = 0.0;
  for (std::size_t v = 0; v < lumped.size(); ++v) {
    if (w[v] == 0.0) continue;
    total += lumped[v] * w[v] * (reg_power(u[v] * u[v], eps, s) - offset);
  }
  return total / s;
}

void add_power_residual(const Mesh& mesh, std::span<const double> w, std::span<const double> u,
                        double s, double eps, double coef, const DofMap& dofs,
                        Eigen::VectorXd& r) {
  if (coef == 0.0) return;
  const auto& lumped = mesh.lumped_volumes();
  for (std::size_t k = 0; k < dofs.size(); ++k) {
    const auto v = static_cast<std::size_t>(dofs.free_vertices()[k]);
    r[static_cast<Eigen::Index>(k)] += coef * lumped[v] * w[v] * reg_odd_power(u[v], s, eps);
  }
}

void add_power_jacobian(const Mesh& mesh, std::span<const double> w, std::span<const double> u,
                        double s, double eps, double coef, const DofMap& dofs, Triplets& out) {
  if (coef == 0.0) return;
  const auto& lumped = mesh.lumped_volumes();
  for (std::size_t k = 0; k < dofs.size(); ++k) {
    const auto v = static_cast<std::size_t>(dofs.free_vertices()[k]);
    if (w[v] == 0.0) continue;
    const int i = static_cast<int>(k);
    out.emplace_back(i, i, coef * lumped[v] * w[v] * reg_odd_power_derivative(u[v], s, eps));
  }
}

Eigen::SparseMatrix<double> laplace_stiffness(const Mesh& mesh, const DofMap& dofs) {
  Triplets trips;
  const std::vector<double> zero(mesh.num_vertices(), 0.0);
  add_flux_jacobian(mesh, zero, 2.0, 0.0, dofs, trips);
  const auto n = static_cast<Eigen::Index>(dofs.size());
  Eigen::SparseMatrix<double> k(n, n);
  k.setFromTriplets(trips.begin(), trips.end());
  return k;
}

}  // namespace plap
