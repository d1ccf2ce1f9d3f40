#pragma once

#include <Eigen/Sparse>
#include <array>
#include <span>
#include <vector>

#include "plap/mesh.hpp"

namespace plap {

/// Maps the free (unknown) vertices of a zero-trace problem onto a
/// contiguous index range. Every other vertex is held at zero.
class DofMap {
 public:
  DofMap(const Mesh& mesh, std::vector<int> free_vertices);
  static DofMap interior(const Mesh& mesh);

  std::size_t size() const noexcept { return free_.size(); }
  const std::vector<int>& free_vertices() const noexcept { return free_; }
  // -1 for fixed vertices.
  int index(int vertex) const noexcept { return index_[static_cast<std::size_t>(vertex)]; }

  Eigen::VectorXd gather(std::span<const double> nodal) const;
  // Nodal vector with the free entries taken from `x` and zero elsewhere.
  std::vector<double> scatter(const Eigen::VectorXd& x) const;

 private:
  std::vector<int> free_;
  std::vector<int> index_;
};

using Triplets = std::vector<Eigen::Triplet<double>>;

// Gradient term (1/p) sum_cells vol * [(|grad u|^2 + eps^2)^(p/2) - eps^p].
// The subtracted constant keeps the zero function at zero energy.
double flux_energy(const Mesh& mesh, std::span<const double> u, double p, double eps);

// r_i += sum_cells vol * (|z|^2 + eps^2)^((p-2)/2) z . grad(hat_i)
void add_flux_residual(const Mesh& mesh, std::span<const double> u, double p, double eps,
                       const DofMap& dofs, Eigen::VectorXd& r);

// Linearization a(z) = (|z|^2+eps^2)^((p-2)/2) (I + (p-2) z z^T / (|z|^2+eps^2)),
// assembled as vol * grad(hat_k)^T a(z) grad(hat_l).
void add_flux_jacobian(const Mesh& mesh, std::span<const double> u, double p, double eps,
                       const DofMap& dofs, Triplets& out);

// Per-cell coefficient matrix a(z) of the linearized flux (row-major 2x2).
std::array<double, 4> flux_linearization(const std::array<double, 2>& z, double p, double eps);

// Zeroth-order term (1/s) sum_v lumped_v w_v [(u_v^2 + eps^2)^(s/2) - eps^s].
double power_energy(const Mesh& mesh, std::span<const double> w, std::span<const double> u,
                    double s, double eps);

// r_i += coef * lumped_i w_i (u_i^2 + eps^2)^((s-2)/2) u_i
void add_power_residual(const Mesh& mesh, std::span<const double> w, std::span<const double> u,
                        double s, double eps, double coef, const DofMap& dofs,
                        Eigen::VectorXd& r);

void add_power_jacobian(const Mesh& mesh, std::span<const double> w, std::span<const double> u,
                        double s, double eps, double coef, const DofMap& dofs, Triplets& out);

// Regularized odd power (u^2 + eps^2)^((s-2)/2) u and its derivative.
double reg_odd_power(double u, double s, double eps);
double reg_odd_power_derivative(double u, double s, double eps);

// P1 stiffness matrix (p = 2 Laplacian) restricted to the free vertices.
Eigen::SparseMatrix<double> laplace_stiffness(const Mesh& mesh, const DofMap& dofs);

}  // namespace plap
