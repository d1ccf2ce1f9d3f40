#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <numbers>
#include <random>

#include "oracles.hpp"
#include "plap/assembly.hpp"
#include "plap/bvp.hpp"
#include "plap/eigensolver.hpp"
#include "plap/errors.hpp"

using namespace plap;
constexpr double pi = std::numbers::pi;
constexpr double pi2 = pi * pi;

namespace {

ProblemSpec make_spec(MeshPtr mesh, double p, double q, double lam, double eta) {
  ProblemSpec s;
  s.mesh = std::move(mesh);
  s.p = p;
  s.q = q;
  s.lam = lam;
  s.eta = eta;
  return s;
}

DiscreteFunction random_state(const MeshPtr& mesh, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> d(-1.0, 1.0);
  std::vector<double> u(mesh->num_vertices(), 0.0);
  for (int v : mesh->interior_vertices()) u[static_cast<std::size_t>(v)] = d(rng);
  return DiscreteFunction(mesh, u);
}

double amp_closed_form(double lam, double x) {
  const double r = std::sqrt(lam);
  return (std::cos(r * (x - 0.5)) / std::cos(r / 2) - 1.0) / lam;
}

}  // namespace

TEST_CASE("spec validation") {
  auto mesh = build_interval(0, 1, 8);
  CHECK_THROWS_AS(make_spec(mesh, 2.0, 2.0, 0, 0).validate(), InvalidConfig);
  CHECK_THROWS_AS(make_spec(mesh, 2.0, 1.0, 0, 0).validate(), InvalidConfig);
  CHECK_THROWS_AS(make_spec(mesh, 1.0, 0.5, 0, 0).validate(), InvalidConfig);
  CHECK_NOTHROW(make_spec(mesh, 3.0, 1.5, 0, 0).validate());
}

TEST_CASE("energy examples") {
  auto mesh = build_interval(0, 1, 512);
  auto spec = make_spec(mesh, 2.0, 1.5, 0.0, 0.0);
  CHECK(energy(spec, DiscreteFunction(mesh)) == 0.0);
  auto spec2 = make_spec(mesh, 3.0, 1.5, 7.0, -2.0);
  spec2.m = Weight::expression("1 + x");
  CHECK(energy(spec2, DiscreteFunction(mesh)) == 0.0);

  // Exact integrals of |u'|^2 / 2 - u for u = x(1-x)/2: 1/24 - 1/12.
  auto u = DiscreteFunction::interpolate(mesh, [](const Point& pt) { return pt.x * (1 - pt.x) / 2; });
  CHECK(std::abs(energy(spec, u) - (-1.0 / 24.0)) <= 1e-5);

  // H_{lam1}(phi1) = 0.
  for (double p : {2.0, 3.0}) {
    auto e = principal_eigenpair(mesh, Weight::constant(1.0), p);
    auto s = make_spec(mesh, p, 1.5, e.lam, 0.0);
    s.f = Weight::constant(0.0);
    const double scale = grad_energy(e.phi, p) / p;
    CHECK(std::abs(energy(s, e.phi)) <= 1e-6 * scale);
  }
}

TEST_CASE("residual examples") {
  auto mesh = build_interval(0, 1, 64);
  auto spec = make_spec(mesh, 3.0, 1.5, 5.0, 2.0);
  spec.f = Weight::constant(0.0);
  CHECK(residual(spec, DiscreteFunction(mesh), {1e-3, 1e-4}).norm() == 0.0);
  CHECK(residual(spec, DiscreteFunction(mesh)).norm() == 0.0);

  for (double p : {2.0, 3.0}) {
    auto e = principal_eigenpair(mesh, Weight::constant(1.0), p);
    auto s = make_spec(mesh, p, 1.5, e.lam, 0.0);
    s.f = Weight::constant(0.0);
    const auto r = residual(s, e.phi);
    const auto flux = residual(make_spec(mesh, p, 1.5, 0.0, 0.0), e.phi);
    // flux part alone minus f = 1 data gives the scale
    CHECK(r.norm() <= 1e-6 * flux.norm());
  }
}

TEST_CASE("residual is the gradient of the regularized energy") {
  std::mt19937_64 rng(7);
  for (int dim : {1, 2}) {
    auto mesh = dim == 1 ? build_interval(0, 1, 12) : build_rectangle(0, 1, 0, 1, 5, 4);
    for (double p : {1.5, 2.0, 3.0}) {
      for (int trial = 0; trial < 20; ++trial) {
        auto spec = make_spec(mesh, p, 1.5, 3.0, -1.7);
        spec.m = Weight::expression("1 + x");
        spec.a = Weight::expression("x - 0.4");
        spec.f = Weight::expression("cos(3*x)");
        const Regularization reg{1e-2, 1e-3};
        auto u = random_state(mesh, rng);
        const auto r = residual(spec, u, reg);
        Eigen::VectorXd fd(r.size());
        const auto& interior = mesh->interior_vertices();
        for (std::size_t k = 0; k < interior.size(); ++k) {
          const auto v = static_cast<std::size_t>(interior[k]);
          const double h = 1e-5 * (1.0 + std::abs(u[v]));
          auto up = u, um = u;
          up.values()[v] += h;
          um.values()[v] -= h;
          fd[static_cast<Eigen::Index>(k)] = (energy(spec, up, reg) - energy(spec, um, reg)) / (2 * h);
        }
        CHECK((r - fd).norm() <= 1e-6 * std::max(1.0, r.norm()));
      }
    }
  }
}

TEST_CASE("jacobian matches differences of the residual and is symmetric") {
  std::mt19937_64 rng(11);
  for (int dim : {1, 2}) {
    auto mesh = dim == 1 ? build_interval(0, 1, 12) : build_rectangle(0, 1, 0, 1, 5, 4);
    for (double p : {1.5, 2.0, 3.0}) {
      for (int trial = 0; trial < 20; ++trial) {
        auto spec = make_spec(mesh, p, 1.5, 2.5, 1.3);
        spec.a = Weight::expression("x - 0.4");
        const Regularization reg{1e-2, 1e-3};
        auto u = random_state(mesh, rng);
        Eigen::MatrixXd j = Eigen::MatrixXd(jacobian(spec, u, reg));
        CHECK((j - j.transpose()).cwiseAbs().maxCoeff() <= 1e-12);
        Eigen::MatrixXd fd(j.rows(), j.cols());
        const auto& interior = mesh->interior_vertices();
        for (std::size_t k = 0; k < interior.size(); ++k) {
          const auto v = static_cast<std::size_t>(interior[k]);
          const double h = 1e-6 * (1.0 + std::abs(u[v]));
          auto up = u, um = u;
          up.values()[v] += h;
          um.values()[v] -= h;
          fd.col(static_cast<Eigen::Index>(k)) = (residual(spec, up, reg) - residual(spec, um, reg)) / (2 * h);
        }
        CHECK((j - fd).norm() <= 1e-5 * j.norm());
      }
    }
  }
}

TEST_CASE("linear jacobian is stiffness minus lumped weighted mass") {
  auto mesh = build_interval(0, 1, 10);
  auto spec = make_spec(mesh, 2.0, 1.5, 4.0, 0.0);
  spec.m = Weight::expression("2 + x");
  std::mt19937_64 rng(3);
  auto j1 = Eigen::MatrixXd(jacobian(spec, random_state(mesh, rng)));
  auto j2 = Eigen::MatrixXd(jacobian(spec, random_state(mesh, rng)));
  CHECK((j1 - j2).cwiseAbs().maxCoeff() <= 1e-12);
  const auto& x = mesh->vertices();
  const double h = 0.1;
  for (int k = 0; k < 9; ++k) {
    CHECK(j1(k, k) == doctest::Approx(2.0 / h - 4.0 * h * (2.0 + x[static_cast<std::size_t>(k + 1)].x)));
    if (k + 1 < 9) CHECK(j1(k, k + 1) == doctest::Approx(-1.0 / h));
  }
}

TEST_CASE("flux linearization eigenvalues") {
  for (double p : {1.5, 2.0, 3.0, 4.0}) {
    for (auto z : {std::array<double, 2>{0.3, -0.7}, std::array<double, 2>{2.0, 0.5}}) {
      const auto a = flux_linearization(z, p, 0.0);
      const double tr = a[0] + a[3], det = a[0] * a[3] - a[1] * a[2];
      const double disc = std::sqrt(std::max(tr * tr / 4 - det, 0.0));
      const double lo = tr / 2 - disc, hi = tr / 2 + disc;
      const double n = std::hypot(z[0], z[1]);
      const double base = std::pow(n, p - 2);
      CHECK(lo == doctest::Approx(std::min(1.0, p - 1) * base).epsilon(1e-10));
      CHECK(hi == doctest::Approx(std::max(1.0, p - 1) * base).epsilon(1e-10));
    }
  }
}

TEST_CASE("solve: Poisson, antimaximum and trivial cases") {
  auto mesh = build_interval(0, 1, 256);
  {
    auto out = solve(make_spec(mesh, 2.0, 1.5, 0.0, 0.0));
    double err = 0.0;
    for (std::size_t v = 0; v < out.u.size(); ++v) {
      const double x = mesh->vertices()[v].x;
      err = std::max(err, std::abs(out.u[v] - x * (1 - x) / 2));
    }
    CHECK(err <= 1e-4);
    CHECK(out.sign_class == SignClass::Positive);
    CHECK(out.residual_norm <= 1e-10);
    for (int s : out.boundary_flux_sign) CHECK(s == -1);
  }
  {
    const double lam = 1.5 * pi2;
    auto out = solve(make_spec(mesh, 2.0, 1.5, lam, 0.0));
    double err = 0.0;
    for (std::size_t v = 0; v < out.u.size(); ++v)
      err = std::max(err, std::abs(out.u[v] - amp_closed_form(lam, mesh->vertices()[v].x)));
    CHECK(err <= 1e-3);
    CHECK(out.sign_class == SignClass::Negative);
  }
  {
    auto spec = make_spec(mesh, 3.0, 1.5, 20.0, 0.0);
    spec.f = Weight::constant(0.0);
    auto out = solve(spec);
    CHECK(out.sign_class == SignClass::Zero);
    CHECK(sup_norm(out.u) == 0.0);
  }
}

TEST_CASE("solve agrees with the tridiagonal oracle") {
  auto mesh = build_interval(0, 1, 256);
  for (double lam : {0.5 * pi2, 1.2 * pi2, 3.0 * pi2}) {
    auto spec = make_spec(mesh, 2.0, 1.5, lam, 0.0);
    spec.f = Weight::expression("1 + sin(5*x)");
    std::vector<double> fv(257);
    for (int i = 0; i <= 256; ++i) fv[static_cast<std::size_t>(i)] = 1 + std::sin(5.0 * i / 256);
    auto ref = oracles::linear_bvp_oracle_1d(lam, fv, 256);
    auto out = solve(spec);
    double err = 0.0;
    for (std::size_t v = 0; v < out.u.size(); ++v) err = std::max(err, std::abs(out.u[v] - ref.samples[v]));
    CHECK(err <= 1e-8 * std::max(1.0, sup_norm(out.u)));
  }
}

TEST_CASE("homogeneity: c u solves (lam, 0, c^{p-1} f)") {
  auto mesh = build_interval(0, 1, 128);
  for (double p : {1.5, 3.0}) {
    const double c = 2.5;
    auto s1 = make_spec(mesh, p, 1.2, 3.0, 0.0);
    auto s2 = s1;
    s2.f = Weight::constant(std::pow(c, p - 1));
    auto o1 = solve(s1);
    auto o2 = solve(s2);
    double err = 0.0;
    for (std::size_t v = 0; v < o1.u.size(); ++v) err = std::max(err, std::abs(c * o1.u[v] - o2.u[v]));
    CHECK(err <= 1e-6 * sup_norm(o2.u));
  }
}

TEST_CASE("below lam1 the solution beats the zero function") {
  auto mesh = build_interval(0, 1, 128);
  for (double p : {2.0, 3.0}) {
    const double lam1 = principal_eigenpair(mesh, Weight::constant(1.0), p).lam;
    auto out = solve(make_spec(mesh, p, 1.5, 0.9 * lam1, 0.0));
    CHECK(out.energy <= 0.0);
    CHECK(out.sup_bound_constant > 0.0);
  }
}

TEST_CASE("p = 3 sublinear problem in 2D") {
  auto mesh = build_rectangle(0, 1, 0, 1, 16, 16);
  auto out = solve(make_spec(mesh, 3.0, 1.5, 5.0, 0.5));
  CHECK(out.sign_class == SignClass::Positive);
  CHECK(out.residual_norm <= 1e-10);
}

TEST_CASE("sign classifier thresholds") {
  auto mesh = build_interval(0, 1, 4);
  auto mk = [&](std::vector<double> inner) {
    std::vector<double> u{0.0};
    u.insert(u.end(), inner.begin(), inner.end());
    u.push_back(0.0);
    return DiscreteFunction(mesh, u);
  };
  CHECK(classify_sign(mk({1, 2, 1})) == SignClass::Positive);
  CHECK(classify_sign(mk({-1, -2, -1})) == SignClass::Negative);
  CHECK(classify_sign(mk({1, 0, 1})) == SignClass::NonnegWithZeros);
  CHECK(classify_sign(mk({1, -1e-9, 1})) == SignClass::NonnegWithZeros);
  CHECK(classify_sign(mk({-1, 0, -1})) == SignClass::NonposWithZeros);
  CHECK(classify_sign(mk({1, -1e-3, 1})) == SignClass::SignChanging);
  CHECK(classify_sign(mk({1e-13, 0, 0})) == SignClass::Zero);
}

TEST_CASE("multi-start: linear problems have one solution") {
  auto mesh = build_interval(0, 1, 128);
  const double lam1 = principal_eigenpair(mesh, Weight::constant(1.0), 2.0).lam;
  for (double lam : {0.5 * lam1, 1.2 * lam1}) {
    auto res = multi_start_solve(make_spec(mesh, 2.0, 1.5, lam, 0.0));
    CHECK(res.starts.size() == 9);
    CHECK(res.distinct.size() == 1);
    for (const auto& o : res.starts) CHECK(o.converged);
  }
}

TEST_CASE("multi-start: maximum principle just below lam1 for p = 3") {
  auto mesh = build_interval(0, 1, 128);
  const double lam1 = principal_eigenpair(mesh, Weight::constant(1.0), 3.0).lam;
  auto res = multi_start_solve(make_spec(mesh, 3.0, 1.5, 0.98 * lam1, 0.0));
  REQUIRE(!res.distinct.empty());
  for (const auto& o : res.starts)
    if (o.converged) CHECK(o.sign_class == SignClass::Positive);
}

TEST_CASE("multi-start is deterministic") {
  auto mesh = build_interval(0, 1, 64);
  auto spec = make_spec(mesh, 3.0, 1.5, 30.0, 0.3);
  auto r1 = multi_start_solve(spec);
  auto r2 = multi_start_solve(spec);
  REQUIRE(r1.starts.size() == r2.starts.size());
  for (std::size_t k = 0; k < r1.starts.size(); ++k) {
    CHECK(r1.starts[k].start_strategy == r2.starts[k].start_strategy);
    CHECK(r1.starts[k].u.values() == r2.starts[k].u.values());
  }
}
