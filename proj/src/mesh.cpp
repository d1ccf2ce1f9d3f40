#include "plap/mesh.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "plap/errors.hpp"

namespace plap {

namespace {

double grid_coordinate(double lo, double hi, int i, int n) {
  if (i == n) return hi;
  return lo + (hi - lo) * static_cast<double>(i) / static_cast<double>(n);
}

}  // namespace

MeshPtr build_interval(double x0, double x1, int n_cells) {
  if (!(x1 > x0)) throw InvalidConfig("interval requires x1 > x0", "domain.bounds");
  if (n_cells < 2) throw InvalidConfig("interval requires at least 2 cells", "domain.n");

  auto mesh = std::make_shared<Mesh>();
  mesh->dim_ = 1;
  mesh->nx_ = n_cells;
  mesh->ny_ = 0;
  mesh->box_ = {x0, x1, 0.0, 0.0};
  mesh->vertices_.reserve(static_cast<std::size_t>(n_cells) + 1);
  for (int i = 0; i <= n_cells; ++i) mesh->vertices_.push_back({grid_coordinate(x0, x1, i, n_cells), 0.0});
  mesh->on_boundary_.assign(mesh->vertices_.size(), 0);
  mesh->on_boundary_.front() = 1;
  mesh->on_boundary_.back() = 1;
  for (int i = 0; i < n_cells; ++i) mesh->cells_.push_back({i, i + 1, -1});
  mesh->finalize();
  return mesh;
}

MeshPtr build_rectangle(double x0, double x1, double y0, double y1, int nx, int ny) {
  if (!(x1 > x0) || !(y1 > y0))
    throw InvalidConfig("rectangle requires x1 > x0 and y1 > y0", "domain.bounds");
  if (nx < 2 || ny < 2) throw InvalidConfig("rectangle requires nx, ny >= 2", "domain.n");

  auto mesh = std::make_shared<Mesh>();
  mesh->dim_ = 2;
  mesh->nx_ = nx;
  mesh->ny_ = ny;
  mesh->box_ = {x0, x1, y0, y1};
  const auto stride = nx + 1;
  for (int j = 0; j <= ny; ++j) {
    for (int i = 0; i <= nx; ++i) {
      mesh->vertices_.push_back({grid_coordinate(x0, x1, i, nx), grid_coordinate(y0, y1, j, ny)});
      mesh->on_boundary_.push_back(i == 0 || i == nx || j == 0 || j == ny ? 1 : 0);
    }
  }
  for (int j = 0; j < ny; ++j) {
    for (int i = 0; i < nx; ++i) {
      const int v00 = j * stride + i;
      const int v10 = v00 + 1;
      const int v01 = v00 + stride;
      const int v11 = v01 + 1;
      mesh->cells_.push_back({v00, v10, v11});
      mesh->cells_.push_back({v00, v11, v01});
    }
  }
  mesh->finalize();
  return mesh;
}

void Mesh::finalize() {
  const auto nv = vertices_.size();
  lumped_.assign(nv, 0.0);
  cell_volumes_.clear();
  basis_grads_.clear();
  cell_volumes_.reserve(cells_.size());
  basis_grads_.reserve(cells_.size());

  for (const auto& cell : cells_) {
    std::array<std::array<double, 2>, 3> grads{};
    double volume = 0.0;
    if (dim_ == 1) {
      const double h = vertices_[static_cast<std::size_t>(cell[1])].x -
                       vertices_[static_cast<std::size_t>(cell[0])].x;
      volume = h;
      grads[0] = {-1.0 / h, 0.0};
      grads[1] = {1.0 / h, 0.0};
    } else {
      const auto& p0 = vertices_[static_cast<std::size_t>(cell[0])];
      const auto& p1 = vertices_[static_cast<std::size_t>(cell[1])];
      const auto& p2 = vertices_[static_cast<std::size_t>(cell[2])];
      const double det = (p1.x - p0.x) * (p2.y - p0.y) - (p2.x - p0.x) * (p1.y - p0.y);
      volume = 0.5 * det;
      grads[0] = {(p1.y - p2.y) / det, (p2.x - p1.x) / det};
      grads[1] = {(p2.y - p0.y) / det, (p0.x - p2.x) / det};
      grads[2] = {(p0.y - p1.y) / det, (p1.x - p0.x) / det};
    }
    if (!(volume > 0.0)) throw InvalidConfig("degenerate cell in mesh construction");
    cell_volumes_.push_back(volume);
    basis_grads_.push_back(grads);
    const double share = volume / static_cast<double>(dim_ + 1);
    for (int k = 0; k <= dim_; ++k) lumped_[static_cast<std::size_t>(cell[static_cast<std::size_t>(k)])] += share;
  }

  boundary_.clear();
  interior_.clear();
  for (std::size_t v = 0; v < nv; ++v) {
    (on_boundary_[v] ? boundary_ : interior_).push_back(static_cast<int>(v));
  }
}

double Mesh::mesh_size() const noexcept {
  const double hx = (box_.x1 - box_.x0) / nx_;
  if (dim_ == 1) return hx;
  return std::max(hx, (box_.y1 - box_.y0) / ny_);
}

double Mesh::diameter() const noexcept {
  const double wx = box_.x1 - box_.x0;
  if (dim_ == 1) return wx;
  return std::hypot(wx, box_.y1 - box_.y0);
}

double Mesh::distance_to_boundary(const Point& pt) const noexcept {
  double d = std::min(pt.x - box_.x0, box_.x1 - pt.x);
  if (dim_ == 2) d = std::min({d, pt.y - box_.y0, box_.y1 - pt.y});
  return std::max(d, 0.0);
}

int Mesh::inward_neighbor(int v) const noexcept {
  if (!is_boundary(v)) return -1;
  if (dim_ == 1) return v == 0 ? 1 : v - 1;
  const int stride = nx_ + 1;
  const int i = v % stride;
  const int j = v / stride;
  const bool left = i == 0, right = i == nx_, bottom = j == 0, top = j == ny_;
  if ((left || right) && (bottom || top)) return -1;
  if (left) return v + 1;
  if (right) return v - 1;
  if (bottom) return v + stride;
  return v - stride;
}

SubdomainMask::SubdomainMask(MeshPtr mesh, std::vector<char> active, std::optional<double> rho)
    : mesh_(std::move(mesh)), active_(std::move(active)), rho_(rho) {
  if (!mesh_) throw InvalidConfig("subdomain mask without a mesh");
  if (active_.size() != mesh_->num_vertices())
    throw InvalidConfig("subdomain mask size does not match the vertex count");
  for (std::size_t v = 0; v < active_.size(); ++v)
    if (active_[v]) active_list_.push_back(static_cast<int>(v));
}

SubdomainMask SubdomainMask::whole(MeshPtr mesh) {
  std::vector<char> all(mesh->num_vertices(), 1);
  return SubdomainMask(std::move(mesh), std::move(all));
}

SubdomainMask SubdomainMask::complement() const {
  std::vector<char> flipped(active_.size());
  for (std::size_t v = 0; v < active_.size(); ++v) flipped[v] = active_[v] ? 0 : 1;
  return SubdomainMask(mesh_, std::move(flipped), rho_);
}

std::vector<int> SubdomainMask::free_vertices() const {
  std::vector<int> out;
  for (int v : active_list_)
    if (!mesh_->is_boundary(v)) out.push_back(v);
  return out;
}

SubdomainMask boundary_strip(const MeshPtr& mesh, double rho) {
  if (!(rho > 0.0) || !(rho < 0.5 * mesh->diameter()))
    throw InvalidConfig("strip width must satisfy 0 < rho < diameter/2, got " + std::to_string(rho),
                        "rho");
  std::vector<char> active(mesh->num_vertices(), 0);
  for (std::size_t v = 0; v < active.size(); ++v)
    active[v] = mesh->distance_to_boundary(static_cast<int>(v)) < rho ? 1 : 0;
  return SubdomainMask(mesh, std::move(active), rho);
}

SubdomainMask box_mask(const MeshPtr& mesh, const BoundingBox& box) {
  std::vector<char> active(mesh->num_vertices(), 0);
  const auto& pts = mesh->vertices();
  for (std::size_t v = 0; v < active.size(); ++v) {
    bool inside = pts[v].x > box.x0 && pts[v].x < box.x1;
    if (mesh->dimension() == 2) inside = inside && pts[v].y > box.y0 && pts[v].y < box.y1;
    active[v] = inside ? 1 : 0;
  }
  return SubdomainMask(mesh, std::move(active));
}

}  // namespace plap
