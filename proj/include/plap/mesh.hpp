#pragma once

#include <array>
#include <cstddef>
#include <memory>
#include <optional>
#include <vector>

namespace plap {

struct Point {
  double x = 0.0;
  double y = 0.0;
};

struct BoundingBox {
  double x0 = 0.0, x1 = 1.0;
  double y0 = 0.0, y1 = 0.0;
};

/// Simplicial P1 mesh of an interval (segments) or an axis-aligned
/// rectangle (triangles). Immutable after construction.
///
/// Cells always store three vertex indices; in 1D the third entry is unused.
/// Vertices of a structured grid are numbered row-major, `j * (nx + 1) + i`.
class Mesh {
 public:
  int dimension() const noexcept { return dim_; }
  std::size_t num_vertices() const noexcept { return vertices_.size(); }
  std::size_t num_cells() const noexcept { return cell_volumes_.size(); }
  int vertices_per_cell() const noexcept { return dim_ + 1; }

  const std::vector<Point>& vertices() const noexcept { return vertices_; }
  const std::vector<std::array<int, 3>>& cells() const noexcept { return cells_; }
  const std::vector<double>& cell_volumes() const noexcept { return cell_volumes_; }
  // Row-lumped P1 mass: each cell gives volume/(dim+1) to each of its vertices.
  const std::vector<double>& lumped_volumes() const noexcept { return lumped_; }
  const std::vector<int>& boundary_vertices() const noexcept { return boundary_; }
  const std::vector<int>& interior_vertices() const noexcept { return interior_; }
  bool is_boundary(int v) const noexcept { return on_boundary_[static_cast<std::size_t>(v)] != 0; }

  // Gradient of the local hat function `k` on cell `c`.
  const std::array<double, 2>& basis_gradient(std::size_t c, int k) const noexcept {
    return basis_grads_[c][static_cast<std::size_t>(k)];
  }

  const BoundingBox& bounds() const noexcept { return box_; }
  std::array<int, 2> grid_shape() const noexcept { return {nx_, ny_}; }
  // Largest cell edge length along an axis.
  double mesh_size() const noexcept;
  double diameter() const noexcept;

  // Exact distance to the boundary of the interval or rectangle.
  double distance_to_boundary(const Point& pt) const noexcept;
  double distance_to_boundary(int v) const noexcept {
    return distance_to_boundary(vertices_[static_cast<std::size_t>(v)]);
  }

  // Neighbor one grid step along the inward normal of a boundary vertex,
  // or -1 at rectangle corners, where the normal is undefined.
  int inward_neighbor(int v) const noexcept;

 private:
  friend std::shared_ptr<const Mesh> build_interval(double, double, int);
  friend std::shared_ptr<const Mesh> build_rectangle(double, double, double, double, int,
                                                     int);
  void finalize();

  int dim_ = 1;
  int nx_ = 0, ny_ = 0;
  BoundingBox box_;
  std::vector<Point> vertices_;
  std::vector<std::array<int, 3>> cells_;
  std::vector<double> cell_volumes_;
  std::vector<double> lumped_;
  std::vector<std::array<std::array<double, 2>, 3>> basis_grads_;
  std::vector<int> boundary_;
  std::vector<int> interior_;
  std::vector<char> on_boundary_;
};

using MeshPtr = std::shared_ptr<const Mesh>;

MeshPtr build_interval(double x0, double x1, int n_cells);
MeshPtr build_rectangle(double x0, double x1, double y0, double y1, int nx, int ny);

/// Vertex subset of a mesh, e.g. a boundary strip or a subdomain.
class SubdomainMask {
 public:
  SubdomainMask(MeshPtr mesh, std::vector<char> active, std::optional<double> rho = {});

  static SubdomainMask whole(MeshPtr mesh);

  const MeshPtr& mesh() const noexcept { return mesh_; }
  bool contains(int v) const noexcept { return active_[static_cast<std::size_t>(v)] != 0; }
  const std::vector<int>& active_vertices() const noexcept { return active_list_; }
  const std::vector<char>& flags() const noexcept { return active_; }
  std::optional<double> rho() const noexcept { return rho_; }
  bool empty() const noexcept { return active_list_.empty(); }

  SubdomainMask complement() const;

  // Unknowns of a zero-trace problem posed on the mask: active and not on
  // the mesh boundary.
  std::vector<int> free_vertices() const;

 private:
  MeshPtr mesh_;
  std::vector<char> active_;
  std::vector<int> active_list_;
  std::optional<double> rho_;
};

/// Vertices at distance < rho from the boundary (the strip Omega_rho).
SubdomainMask boundary_strip(const MeshPtr& mesh, double rho);

/// Vertices strictly inside the open box (x0, x1) x (y0, y1). In 1D the y
/// bounds are ignored.
SubdomainMask box_mask(const MeshPtr& mesh, const BoundingBox& box);

}  // namespace plap
