#include "plap/discrete_function.hpp"

#include <algorithm>
#include <cmath>

#include "plap/errors.hpp"

namespace plap {

DiscreteFunction::DiscreteFunction(MeshPtr mesh)
    : mesh_(std::move(mesh)), values_(mesh_ ? mesh_->num_vertices() : 0, 0.0) {}

DiscreteFunction::DiscreteFunction(MeshPtr mesh, std::vector<double> values)
    : mesh_(std::move(mesh)), values_(std::move(values)) {
  if (!mesh_ || values_.size() != mesh_->num_vertices())
    throw InvalidConfig("nodal value count does not match the vertex count");
}

DiscreteFunction DiscreteFunction::interpolate(const MeshPtr& mesh,
                                               const std::function<double(const Point&)>& fn) {
  std::vector<double> vals;
  vals.reserve(mesh->num_vertices());
  for (const auto& pt : mesh->vertices()) vals.push_back(fn(pt));
  return DiscreteFunction(mesh, std::move(vals));
}

bool DiscreteFunction::has_zero_trace() const noexcept {
  return std::all_of(mesh_->boundary_vertices().begin(), mesh_->boundary_vertices().end(),
                     [&](int v) { return values_[static_cast<std::size_t>(v)] == 0.0; });
}

DiscreteFunction DiscreteFunction::scaled(double t) const {
  auto out = *this;
  for (auto& v : out.values_) v *= t;
  return out;
}

DiscreteFunction operator+(const DiscreteFunction& a, const DiscreteFunction& b) {
  auto out = a;
  for (std::size_t i = 0; i < out.size(); ++i) out.values()[i] += b[i];
  return out;
}

DiscreteFunction operator-(const DiscreteFunction& a, const DiscreteFunction& b) {
  auto out = a;
  for (std::size_t i = 0; i < out.size(); ++i) out.values()[i] -= b[i];
  return out;
}

std::string to_string(SignSummary s) {
  switch (s) {
    case SignSummary::Nonnegative: return "nonnegative";
    case SignSummary::Nonpositive: return "nonpositive";
    case SignSummary::Indefinite: return "indefinite";
    case SignSummary::Zero: return "zero";
  }
  return "indefinite";
}

Weight Weight::constant(double c, std::optional<double> gamma) {
  Weight w;
  w.kind_ = Kind::Constant;
  w.constant_ = c;
  w.gamma_ = gamma;
  return w;
}

Weight Weight::expression(const std::string& src, std::optional<double> gamma) {
  Weight w;
  w.kind_ = Kind::Expression;
  w.source_ = src;
  w.expr_ = std::make_shared<const ExprAst>(parse_expr(src));
  w.gamma_ = gamma;
  return w;
}

Weight Weight::nodal(std::vector<double> values, std::optional<double> gamma) {
  Weight w;
  w.kind_ = Kind::Nodal;
  w.nodal_ = std::move(values);
  w.gamma_ = gamma;
  return w;
}

std::vector<double> Weight::evaluate(const Mesh& mesh) const {
  std::vector<double> out;
  switch (kind_) {
    case Kind::Constant:
      out.assign(mesh.num_vertices(), constant_);
      break;
    case Kind::Expression:
      out.reserve(mesh.num_vertices());
      for (const auto& pt : mesh.vertices())
        out.push_back(mesh.dimension() == 2 ? expr_->eval(pt.x, pt.y) : expr_->eval(pt.x));
      break;
    case Kind::Nodal:
      if (nodal_.size() != mesh.num_vertices())
        throw InvalidConfig("nodal weight has " + std::to_string(nodal_.size()) +
                            " values but the mesh has " + std::to_string(mesh.num_vertices()) +
                            " vertices");
      out = nodal_;
      break;
  }
  if (scale_ != 1.0)
    for (auto& v : out) v *= scale_;
  return out;
}

SignSummary sign_summary(std::span<const double> nodal) {
  bool pos = false, neg = false;
  for (double v : nodal) {
    pos = pos || v > 0.0;
    neg = neg || v < 0.0;
  }
  if (pos && neg) return SignSummary::Indefinite;
  if (pos) return SignSummary::Nonnegative;
  if (neg) return SignSummary::Nonpositive;
  return SignSummary::Zero;
}

SignSummary Weight::sign_summary(const Mesh& mesh) const {
  const auto vals = evaluate(mesh);
  return plap::sign_summary(vals);
}

Weight Weight::scaled(double c) const {
  Weight w = *this;
  w.scale_ *= c;
  return w;
}

std::string Weight::describe() const {
  std::string base;
  switch (kind_) {
    case Kind::Constant: {
      char buf[32];
      std::snprintf(buf, sizeof buf, "%.17g", constant_);
      base = buf;
      break;
    }
    case Kind::Expression: base = source_; break;
    case Kind::Nodal: base = "nodal[" + std::to_string(nodal_.size()) + "]"; break;
  }
  if (scale_ == 1.0) return base;
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", scale_);
  return std::string(buf) + "*(" + base + ")";
}

double grad_energy(const DiscreteFunction& u, double p) {
  if (!(p > 1.0)) throw InvalidConfig("exponent p must exceed 1", "p");
  const Mesh& mesh = *u.mesh();
  const auto& cells = mesh.cells();
  const auto& vols = mesh.cell_volumes();
  const int nloc = mesh.vertices_per_cell();
  double total = 0.0;
  for (std::size_t c = 0; c < cells.size(); ++c) {
    double gx = 0.0, gy = 0.0;
    for (int k = 0; k < nloc; ++k) {
      const double val = u[static_cast<std::size_t>(cells[c][static_cast<std::size_t>(k)])];
      const auto& g = mesh.basis_gradient(c, k);
      gx += val * g[0];
      gy += val * g[1];
    }
    const double norm2 = gx * gx + gy * gy;
    if (norm2 > 0.0) total += vols[c] * std::pow(norm2, 0.5 * p);
  }
  return total;
}

double weighted_power_integral(std::span<const double> w, const DiscreteFunction& u, double r,
                               bool signed_form) {
  if (!(r >= 1.0)) throw InvalidConfig("power r must be at least 1");
  const auto& lumped = u.mesh()->lumped_volumes();
  if (w.size() != lumped.size()) throw InvalidConfig("weight size does not match the mesh");
  double total = 0.0;
  for (std::size_t v = 0; v < lumped.size(); ++v) {
    const double a = std::abs(u[v]);
    if (a == 0.0 || w[v] == 0.0) continue;
    const double term = signed_form ? std::pow(a, r - 1.0) * u[v] : std::pow(a, r);
    total += lumped[v] * w[v] * term;
  }
  return total;
}

double weighted_power_integral(const Weight& w, const DiscreteFunction& u, double r,
                               bool signed_form) {
  const auto nodal = w.evaluate(*u.mesh());
  return weighted_power_integral(nodal, u, r, signed_form);
}

double sup_norm(const DiscreteFunction& u) {
  double m = 0.0;
  for (double v : u.values()) m = std::max(m, std::abs(v));
  return m;
}

DiscreteFunction positive_part(const DiscreteFunction& u) {
  auto out = u;
  for (auto& v : out.values()) v = std::max(v, 0.0);
  return out;
}

DiscreteFunction negative_part(const DiscreteFunction& u) {
  auto out = u;
  for (auto& v : out.values()) v = std::max(-v, 0.0);
  return out;
}

double lumped_norm(const DiscreteFunction& u, double r) {
  const std::vector<double> ones(u.size(), 1.0);
  return std::pow(weighted_power_integral(ones, u, r), 1.0 / r);
}

}  // namespace plap
