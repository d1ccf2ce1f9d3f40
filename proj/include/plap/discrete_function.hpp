#pragma once

#include <functional>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "plap/expr.hpp"
#include "plap/mesh.hpp"

namespace plap {

/// Piecewise-linear function on a mesh, stored by its nodal values.
class DiscreteFunction {
 public:
  DiscreteFunction() = default;
  explicit DiscreteFunction(MeshPtr mesh);  // zero function
  DiscreteFunction(MeshPtr mesh, std::vector<double> values);

  static DiscreteFunction interpolate(const MeshPtr& mesh,
                                      const std::function<double(const Point&)>& fn);

  const MeshPtr& mesh() const noexcept { return mesh_; }
  const std::vector<double>& values() const noexcept { return values_; }
  std::vector<double>& values() noexcept { return values_; }
  double operator[](std::size_t v) const noexcept { return values_[v]; }
  std::size_t size() const noexcept { return values_.size(); }

  bool has_zero_trace() const noexcept;
  DiscreteFunction scaled(double t) const;

 private:
  MeshPtr mesh_;
  std::vector<double> values_;
};

DiscreteFunction operator+(const DiscreteFunction& a, const DiscreteFunction& b);
DiscreteFunction operator-(const DiscreteFunction& a, const DiscreteFunction& b);

enum class SignSummary { Nonnegative, Nonpositive, Indefinite, Zero };
std::string to_string(SignSummary s);

/// Coefficient field m, a or f. Sampled at the mesh vertices; jumps must be
/// given as nodal data aligned with the mesh.
class Weight {
 public:
  enum class Kind { Constant, Expression, Nodal };

  static Weight constant(double c, std::optional<double> gamma = std::nullopt);
  static Weight expression(const std::string& src, std::optional<double> gamma = std::nullopt);
  static Weight nodal(std::vector<double> values, std::optional<double> gamma = std::nullopt);

  Kind kind() const noexcept { return kind_; }
  // Integrability exponent; carried as metadata only.
  std::optional<double> declared_gamma() const noexcept { return gamma_; }
  const std::string& source() const noexcept { return source_; }
  double constant_value() const noexcept { return constant_; }

  std::vector<double> evaluate(const Mesh& mesh) const;
  SignSummary sign_summary(const Mesh& mesh) const;

  Weight scaled(double c) const;
  std::string describe() const;

 private:
  Kind kind_ = Kind::Constant;
  double constant_ = 0.0;
  double scale_ = 1.0;
  std::string source_;
  std::shared_ptr<const ExprAst> expr_;
  std::vector<double> nodal_;
  std::optional<double> gamma_;
};

SignSummary sign_summary(std::span<const double> nodal);

/// Sum over cells of volume * |grad u|^p (exact for P1 functions).
double grad_energy(const DiscreteFunction& u, double p);

/// Mass-lumped sum over vertices of lumped_volume * w * |u|^r, or with
/// `signed_form` the odd extension lumped_volume * w * |u|^(r-1) * u; for
/// r = 1 the signed form is the linear functional sum lumped * w * u.
double weighted_power_integral(std::span<const double> w, const DiscreteFunction& u, double r,
                               bool signed_form = false);
double weighted_power_integral(const Weight& w, const DiscreteFunction& u, double r,
                               bool signed_form = false);

double sup_norm(const DiscreteFunction& u);
DiscreteFunction positive_part(const DiscreteFunction& u);
DiscreteFunction negative_part(const DiscreteFunction& u);
// Lumped L^r norm.
double lumped_norm(const DiscreteFunction& u, double r);

}  // namespace plap
