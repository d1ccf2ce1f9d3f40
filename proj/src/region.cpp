#include "plap/region.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <limits>
#include <thread>

#include "plap/eigensolver.hpp"
#include "plap/errors.hpp"

namespace plap {

namespace {

constexpr double inf = std::numeric_limits<double>::infinity();

bool in_interval(double x, double lo, double hi, bool lo_closed, bool hi_closed) {
  const bool above = lo_closed ? x >= lo : x > lo;
  const bool below = hi_closed ? x <= hi : x < hi;
  return above && below;
}

std::string fmt(const char* f, double x) {
  char buf[64];
  std::snprintf(buf, sizeof buf, f, x);
  return buf;
}

}  // namespace

std::string to_string(TheoremId id) {
  switch (id) {
    case TheoremId::Thm0: return "thm0";
    case TheoremId::Thm1: return "thm1";
    case TheoremId::ThmMinus1: return "thm-1";
    case TheoremId::Thm1W: return "thm1-w";
    case TheoremId::ThmMinus1WW: return "thm-1ww";
    case TheoremId::PropNoneg: return "prop-noneg";
    case TheoremId::PropNonex: return "prop-nonex";
    case TheoremId::CorAmpLoc: return "cor-amp-loc";
  }
  return "unknown";
}

bool TheoremPrediction::applies(double lam, double eta) const {
  if (!in_interval(lam, lam_lo, lam_hi, lam_lo_closed, lam_hi_closed)) return false;
  if (eta_range) {
    const auto [lo, hi] = eta_range(lam);
    return eta == 0.0 || (eta > lo && eta < hi);
  }
  return in_interval(eta, eta_lo, eta_hi, eta_lo_closed, eta_hi_closed);
}

bool TheoremPrediction::allows(SignClass c) const {
  return std::find(claim.begin(), claim.end(), c) != claim.end();
}

RegionContext make_context(const ProblemSpec& spec, const std::vector<double>& lam_grid,
                           const RegionOptions& opts) {
  spec.validate();
  RegionContext ctx;
  ctx.lam1 = inf;
  ctx.phi1 = DiscreteFunction(spec.mesh);
  try {
    auto pair = principal_eigenpair(spec.mesh, spec.m, spec.p);
    ctx.lam1 = pair.lam;
    ctx.phi1 = pair.phi;
  } catch (const EmptyAdmissibleSet&) {
  }

  const auto fv = spec.f.evaluate(*spec.mesh);
  const auto& interior = spec.mesh->interior_vertices();
  const bool f_nonneg =
      std::all_of(interior.begin(), interior.end(), [&](int v) { return fv[static_cast<std::size_t>(v)] >= 0.0; });
  const bool can_eta_star = f_nonneg && std::isfinite(ctx.lam1);
  const Weight minus_a = spec.a.scaled(-1.0);

  if (opts.eta_bar) {
    ctx.eta_bar = *opts.eta_bar;
  } else {
    ctx.eta_bar = 1.0;
    if (can_eta_star) {
      EtaStarOptions eo = opts.eta_star;
      eo.lam1 = ctx.lam1;
      eo.with_lower_bound = false;
      for (const Weight* w : {&spec.a, &minus_a}) {
        const double v = eta_star(spec.mesh, spec.m, *w, spec.f, spec.p, spec.q, 0.5 * ctx.lam1, eo).value;
        if (std::isfinite(v) && v > 0.0) {
          ctx.eta_bar = v;
          break;
        }
      }
    }
  }

  if (opts.compute_eta_star && can_eta_star) {
    EtaStarOptions eo = opts.eta_star;
    eo.lam1 = ctx.lam1;
    eo.with_lower_bound = false;
    for (double lam : lam_grid) {
      if (lam < 0.0 || lam > ctx.lam1) continue;
      ctx.eta_star_plus.emplace_back(lam, eta_star(spec.mesh, spec.m, spec.a, spec.f, spec.p, spec.q, lam, eo).value);
      ctx.eta_star_minus.emplace_back(lam, eta_star(spec.mesh, spec.m, minus_a, spec.f, spec.p, spec.q, lam, eo).value);
    }
  }
  return ctx;
}

std::vector<TheoremPrediction> check_hypotheses(const ProblemSpec& spec, const RegionContext& ctx,
                                                const RegionOptions& opts) {
  spec.validate();
  const Mesh& mesh = *spec.mesh;
  const auto mv = spec.m.evaluate(mesh), av = spec.a.evaluate(mesh), fv = spec.f.evaluate(mesh);
  const auto& interior = mesh.interior_vertices();
  const auto& lumped = mesh.lumped_volumes();
  const bool one_d = mesh.dimension() == 1;

  auto any_interior = [&](const std::vector<double>& w, auto pred) {
    return std::any_of(interior.begin(), interior.end(), [&](int v) { return pred(w[static_cast<std::size_t>(v)]); });
  };
  auto all_interior = [&](const std::vector<double>& w, auto pred) {
    return std::all_of(interior.begin(), interior.end(), [&](int v) { return pred(w[static_cast<std::size_t>(v)]); });
  };
  auto bounded = [](const std::vector<double>& w) {
    return std::all_of(w.begin(), w.end(), [](double x) { return std::isfinite(x); });
  };

  const bool m_ok = bounded(mv) && any_interior(mv, [](double x) { return x > 0.0; });
  const bool a_ok = bounded(av) && any_interior(av, [](double x) { return x != 0.0; });
  const bool f_ok = bounded(fv) && any_interior(fv, [](double x) { return x != 0.0; });
  const bool f_nonneg = all_interior(fv, [](double x) { return x >= 0.0; });
  const bool a_nonneg = all_interior(av, [](double x) { return x >= 0.0; });

  double fphi = 0.0, aphi = 0.0, aphi_abs = 0.0;
  for (std::size_t v = 0; v < mesh.num_vertices(); ++v) {
    const double ph = ctx.phi1[v];
    if (ph <= 0.0) continue;
    fphi += lumped[v] * fv[v] * ph;
    aphi += lumped[v] * av[v] * std::pow(ph, spec.q);
    aphi_abs += lumped[v] * std::abs(av[v]) * std::pow(ph, spec.q);
  }
  const double aphi_tol = 1e-12 * aphi_abs;
  const int aphi_sign = aphi > aphi_tol ? 1 : (aphi < -aphi_tol ? -1 : 0);

  // Strip Omega_rho (vertices within rho of the boundary, boundary included).
  const double rho = opts.rho * mesh.diameter();
  bool a_zero_strip = true, f_nonneg_strip = true, f_zero_strip = true;
  for (std::size_t v = 0; v < mesh.num_vertices(); ++v) {
    if (mesh.distance_to_boundary(static_cast<int>(v)) >= rho) continue;
    a_zero_strip = a_zero_strip && av[v] == 0.0;
    f_nonneg_strip = f_nonneg_strip && fv[v] >= 0.0;
    f_zero_strip = f_zero_strip && fv[v] == 0.0;
  }

  std::vector<HypothesisCheck> base;
  base.push_back({"O: domain regularity", one_d, true,
                  one_d ? "interval" : "rectangle has corners; boundary claims downgraded to the interior"});
  base.push_back({"M: m bounded, m_+ nontrivial", m_ok, true, ""});
  base.push_back({"F: f bounded, nontrivial", f_ok, true, ""});

  HypothesisCheck f2{"F_lam1: f >= 0, or p = 2 with int f phi1 > 0", false, true, ""};
  if (f_ok && f_nonneg) {
    f2.passed = true;
    f2.detail = "f >= 0";
  } else if (fphi > 0.0 && spec.p == 2.0) {
    f2.passed = true;
    f2.detail = "Fredholm alternative, int f phi1 = " + fmt("%.6g", fphi);
  } else if (fphi > 0.0) {
    f2.machine_checkable = false;
    f2.detail = "int f phi1 > 0 but f changes sign and p != 2";
  } else {
    f2.detail = "int f phi1 = " + fmt("%.6g", fphi);
  }
  HypothesisCheck phi{"Phi: boundary point property of phi1", one_d, one_d,
                      one_d ? "bounded m_- near the boundary" : "not certified on a nonsmooth domain"};
  const HypothesisCheck a_check{"A: a bounded, nontrivial", a_ok, true, ""};
  const HypothesisCheck aphi_check{"int a phi1^q " + std::string(aphi_sign > 0 ? "> 0" : aphi_sign < 0 ? "< 0" : "= 0"),
                                   true, true, fmt("%.6g", aphi)};
  const auto picone = picone_polynomial_check(spec.p, spec.q);
  const HypothesisCheck picone_check{"Picone polynomial condition", picone.holds, true,
                                     "min " + fmt("%.6g", picone.min_value)};

  std::vector<TheoremPrediction> out;
  if (!m_ok || !f_ok || !std::isfinite(ctx.lam1)) return out;

  const double l1 = ctx.lam1;
  const double d_eta = opts.eta_window * ctx.eta_bar;
  const double alpha = (spec.q - 1.0) / (spec.p - 1.0);
  const bool f2_certified = f2.passed;
  const bool f2_conditional = !f2.passed && !f2.machine_checkable;
  if (!f2_certified && !f2_conditional) return out;

  auto make = [&](TheoremId id, std::vector<HypothesisCheck> extra, std::vector<SignClass> claim) {
    TheoremPrediction t;
    t.id = id;
    t.hypotheses = base;
    t.hypotheses.push_back(f2);
    for (auto& h : extra) t.hypotheses.push_back(std::move(h));
    t.claim = std::move(claim);
    t.conditional = f2_conditional;
    return t;
  };
  auto mp_window = [&](TheoremPrediction& t) {
    t.lam_lo = l1 * (1.0 - opts.mp_lam_window);
    t.lam_hi = l1;
  };
  auto amp_window = [&](TheoremPrediction& t) {
    t.lam_lo = l1;
    t.lam_hi = l1 * (1.0 + opts.amp_lam_window);
  };
  // eta-bar_lam shrinks like |lam - lam1|^alpha near lam1.
  auto shrinking = [&](double w) {
    return [=](double lam) {
      const double e = d_eta * std::pow(std::min(std::abs(lam - l1) / (w * l1), 1.0), alpha);
      return std::pair<double, double>{-e, e};
    };
  };
  const std::vector<SignClass> positive{SignClass::Positive}, negative{SignClass::Negative};

  // Smooth-domain results: full claims in 1D, interior claims otherwise.
  if (a_ok) {
    phi.passed = phi.passed || !one_d;
    if (aphi_sign > 0) {
      auto t = make(TheoremId::Thm0, {a_check, phi, aphi_check}, positive);
      mp_window(t);
      t.eta_lo = -d_eta, t.eta_hi = 0.0, t.eta_hi_closed = true;
      t.interior_only = !one_d;
      out.push_back(std::move(t));
    }
    if (aphi_sign > 0 || aphi_sign < 0 || picone.holds) {
      std::vector<HypothesisCheck> extra{a_check, phi, aphi_check};
      if (aphi_sign == 0) extra.push_back(picone_check);
      auto t = make(TheoremId::Thm1, extra, negative);
      amp_window(t);
      if (aphi_sign < 0) {
        t.eta_lo = -d_eta, t.eta_hi = 0.0, t.eta_hi_closed = true;
        t.note = "reduced to int (-a) phi1^q > 0 with eta -> -eta";
      } else {
        t.eta_lo = 0.0, t.eta_lo_closed = true, t.eta_hi = d_eta;
      }
      t.interior_only = !one_d;
      out.push_back(std::move(t));
    }
    {
      auto t = make(TheoremId::ThmMinus1, {a_check, phi}, positive);
      mp_window(t);
      t.eta_range = shrinking(opts.mp_lam_window);
      t.interior_only = !one_d;
      out.push_back(std::move(t));
      auto u = make(TheoremId::ThmMinus1, {a_check, phi}, negative);
      amp_window(u);
      u.eta_range = shrinking(opts.amp_lam_window);
      u.interior_only = !one_d;
      out.push_back(std::move(u));
    }
  }

  // Boundary-strip results.
  const HypothesisCheck a_strip{"a = 0 in Omega_rho", a_zero_strip, true, "rho = " + fmt("%.6g", rho)};
  if (a_ok && a_zero_strip) {
    const HypothesisCheck fs{"f >= 0 in Omega_rho", f_nonneg_strip, true, ""};
    const HypothesisCheck fz{"f = 0 in Omega_rho", f_zero_strip, true, ""};
    if (aphi_sign > 0 && f_nonneg_strip) {
      auto t = make(TheoremId::Thm1W, {a_check, a_strip, aphi_check, fs}, positive);
      mp_window(t);
      t.eta_lo = -d_eta, t.eta_hi = 0.0, t.eta_hi_closed = true;
      out.push_back(std::move(t));
    }
    if (aphi_sign > 0 && f_zero_strip) {
      auto t = make(TheoremId::Thm1W, {a_check, a_strip, aphi_check, fz}, negative);
      amp_window(t);
      t.eta_lo = 0.0, t.eta_lo_closed = true, t.eta_hi = d_eta;
      out.push_back(std::move(t));
    }
    if (f_nonneg_strip) {
      auto t = make(TheoremId::ThmMinus1WW, {a_check, a_strip, fs}, positive);
      mp_window(t);
      t.eta_range = shrinking(opts.mp_lam_window);
      out.push_back(std::move(t));
    }
    if (f_zero_strip) {
      auto t = make(TheoremId::ThmMinus1WW, {a_check, a_strip, fz}, negative);
      amp_window(t);
      t.eta_range = shrinking(opts.amp_lam_window);
      out.push_back(std::move(t));
    }
  }

  // Nonnegativity below lam1 and its failure above.
  const HypothesisCheck f_pos{"f >= 0", f_nonneg, true, ""};
  if (f_nonneg && !ctx.eta_star_plus.empty()) {
    auto t = make(TheoremId::PropNoneg, {f_pos}, {SignClass::Positive, SignClass::NonnegWithZeros, SignClass::Zero});
    t.conditional = false;
    t.lam_lo = 0.0, t.lam_lo_closed = true, t.lam_hi = l1, t.lam_hi_closed = true;
    const auto plus = ctx.eta_star_plus, minus = ctx.eta_star_minus;
    t.eta_range = [plus, minus](double lam) {
      auto find = [lam](const std::vector<std::pair<double, double>>& tab) {
        for (const auto& [l, v] : tab)
          if (l == lam) return v;
        return 0.0;
      };
      return std::pair<double, double>{-find(minus), find(plus)};
    };
    t.note = "eta* is the computed (upper) estimate";
    out.push_back(std::move(t));
  }
  if (f_nonneg && a_nonneg) {
    auto t = make(TheoremId::PropNonex, {f_pos, {"a >= 0", true, true, ""}},
                  {SignClass::Negative, SignClass::NonposWithZeros, SignClass::SignChanging});
    t.conditional = false;
    t.lam_lo = l1, t.lam_lo_closed = true, t.lam_hi = inf;
    t.eta_lo = 0.0, t.eta_lo_closed = true, t.eta_hi = inf;
    t.note = "eta-hat <= 0 is not computed; checked for eta >= 0";
    out.push_back(std::move(t));
  }

  // Interior claims of the unperturbed problem.
  {
    auto t = make(TheoremId::CorAmpLoc, {}, positive);
    mp_window(t);
    t.eta_lo = t.eta_hi = 0.0, t.eta_lo_closed = t.eta_hi_closed = true;
    t.interior_only = true;
    out.push_back(std::move(t));
    if (f_nonneg_strip) {
      auto u = make(TheoremId::CorAmpLoc, {{"f >= 0 in Omega_rho", true, true, ""}}, negative);
      amp_window(u);
      u.eta_lo = u.eta_hi = 0.0, u.eta_lo_closed = u.eta_hi_closed = true;
      u.interior_only = true;
      out.push_back(std::move(u));
    }
  }
  return out;
}

std::vector<double> default_lam_grid(double lam1, int points) {
  std::vector<double> g(static_cast<std::size_t>(points));
  for (int i = 0; i < points; ++i) g[static_cast<std::size_t>(i)] = 2.0 * lam1 * i / (points - 1);
  return g;
}

std::vector<double> default_eta_grid(double eta_bar, int points) {
  std::vector<double> g(static_cast<std::size_t>(points));
  for (int i = 0; i < points; ++i) g[static_cast<std::size_t>(i)] = eta_bar * (2.0 * i / (points - 1) - 1.0);
  if (points % 2 == 1) g[static_cast<std::size_t>(points / 2)] = 0.0;
  return g;
}

namespace {

std::vector<char> interior_mask(const Mesh& mesh, double margin) {
  std::vector<char> k(mesh.num_vertices(), 0);
  const double d = margin * mesh.diameter();
  for (std::size_t v = 0; v < k.size(); ++v) k[v] = mesh.distance_to_boundary(static_cast<int>(v)) >= d;
  return k;
}

bool all_outcomes(const CellRecord& c, SignClass want) {
  bool any = false;
  for (const auto& s : c.starts) {
    if (!s.converged || s.resonant) continue;
    any = true;
    if (s.sign_class != want) return false;
  }
  return any;
}

}  // namespace

RegionMap sweep(const ProblemSpec& spec, const std::vector<double>& lam_grid,
                const std::vector<double>& eta_grid, const RegionOptions& opts) {
  spec.validate();
  if (!std::is_sorted(lam_grid.begin(), lam_grid.end()) || !std::is_sorted(eta_grid.begin(), eta_grid.end()))
    throw InvalidConfig("grids must be sorted", "grid");
  for (double x : lam_grid)
    if (!std::isfinite(x)) throw InvalidConfig("lambda grid must be finite", "lam_grid");
  for (double x : eta_grid)
    if (!std::isfinite(x)) throw InvalidConfig("eta grid must be finite", "eta_grid");

  const Mesh& mesh = *spec.mesh;
  RegionMap map;
  map.lam_grid = lam_grid;
  map.eta_grid = eta_grid;
  map.p = spec.p;
  map.q = spec.q;
  if (lam_grid.empty() || eta_grid.empty()) {
    map.lam1 = inf;
    map.lam2_bound = inf;
    return map;
  }

  const RegionContext ctx = make_context(spec, lam_grid, opts);
  map.lam1 = ctx.lam1;
  map.predictions = check_hypotheses(spec, ctx, opts);
  map.lam2_bound = inf;
  {
    const auto mv = spec.m.evaluate(mesh);
    const bool constant = std::all_of(mv.begin(), mv.end(), [&](double x) { return x == mv.front(); });
    if (mesh.dimension() == 1 && constant && mv.front() > 0.0)
      map.lam2_bound = dirichlet_eigenvalue_1d_shooting(mesh.bounds().x0, mesh.bounds().x1, spec.p, 2) / mv.front();
  }

  const auto kmask = interior_mask(mesh, opts.interior_margin);
  const std::size_t ncells = lam_grid.size() * eta_grid.size();
  map.cells.resize(ncells);

  auto run_cell = [&](std::size_t idx) {
    CellRecord cell;
    cell.lam = lam_grid[idx / eta_grid.size()];
    cell.eta = eta_grid[idx % eta_grid.size()];
    ProblemSpec s = spec;
    s.lam = cell.lam;
    s.eta = cell.eta;
    SolveOptions so = opts.solve;
    so.lam1 = ctx.lam1;
    so.seed = opts.seed + 0x9E3779B97F4A7C15ULL * static_cast<std::uint64_t>(idx + 1);
    std::vector<const TheoremPrediction*> active;
    for (const auto& t : map.predictions)
      if (!t.conditional && t.applies(cell.lam, cell.eta)) active.push_back(&t);
    try {
      const auto res = multi_start_solve(s, so);
      cell.distinct = static_cast<int>(res.distinct.size());
      for (const auto& o : res.starts) {
        StartRecord r;
        r.start_strategy = o.start_strategy;
        r.converged = o.converged;
        r.resonant = o.resonant;
        r.message = o.message;
        r.residual_norm = o.residual_norm;
        r.sup_norm = o.sup_norm;
        r.energy = o.energy;
        if (o.converged) {
          r.sign_class = o.sign_class;
          r.interior_class = classify_sign(o.u, &kmask);
        }
        for (const auto* t : active) r.predicted_by.push_back(to_string(t->id));
        if (o.converged && !o.resonant && !active.empty()) {
          r.consistent = 1;
          for (const auto* t : active)
            if (!t->allows(t->interior_only ? r.interior_class : r.sign_class)) r.consistent = 0;
        }
        cell.starts.push_back(std::move(r));
      }
    } catch (const Error& e) {
      StartRecord r;
      r.start_strategy = "all";
      r.message = e.what();
      cell.starts.push_back(std::move(r));
    }
    map.cells[idx] = std::move(cell);
  };

  const unsigned hw = std::max(1u, std::thread::hardware_concurrency());
  const unsigned nthreads = static_cast<unsigned>(
      std::min<std::size_t>(opts.threads > 0 ? static_cast<std::size_t>(opts.threads) : hw, ncells));
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t idx; (idx = next.fetch_add(1)) < ncells;) run_cell(idx);
  };
  if (nthreads <= 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    for (unsigned t = 0; t < nthreads; ++t) pool.emplace_back(worker);
    for (auto& t : pool) t.join();
  }

  // Counterexamples in grid order.
  for (const auto& cell : map.cells) {
    for (const auto& r : cell.starts) {
      if (r.consistent != 0) continue;
      for (const auto& t : map.predictions) {
        if (t.conditional || !t.applies(cell.lam, cell.eta)) continue;
        const SignClass seen = t.interior_only ? r.interior_class : r.sign_class;
        if (t.allows(seen)) continue;
        std::string claimed;
        for (auto c : t.claim) claimed += (claimed.empty() ? "" : "|") + to_string(c);
        map.counterexamples.push_back({cell.lam, cell.eta, r.start_strategy, to_string(t.id), to_string(seen), claimed});
      }
    }
  }

  // Measured neighbourhoods along the eta column closest to zero.
  std::size_t j0 = 0;
  for (std::size_t j = 1; j < eta_grid.size(); ++j)
    if (std::abs(eta_grid[j]) < std::abs(eta_grid[j0])) j0 = j;
  const double l1 = ctx.lam1;
  for (std::size_t i = 0; i < lam_grid.size(); ++i) {
    if (!(lam_grid[i] > l1)) continue;
    if (!all_outcomes(map.cell(i, j0), SignClass::Negative)) break;
    map.delta_hat_amp = lam_grid[i] - l1;
  }
  for (std::size_t i = lam_grid.size(); i-- > 0;) {
    if (!(lam_grid[i] < l1)) continue;
    if (!all_outcomes(map.cell(i, j0), SignClass::Positive)) break;
    map.delta_hat_mp = l1 - lam_grid[i];
  }
  for (std::size_t i = 0; i < lam_grid.size(); ++i) {
    if (lam_grid[i] == l1) continue;
    const SignClass want = lam_grid[i] < l1 ? SignClass::Positive : SignClass::Negative;
    if (!all_outcomes(map.cell(i, j0), want)) continue;
    EtaBound b{lam_grid[i], eta_grid[j0], eta_grid[j0]};
    for (std::size_t j = j0 + 1; j < eta_grid.size() && all_outcomes(map.cell(i, j), want); ++j) b.eta_hi = eta_grid[j];
    for (std::size_t j = j0; j-- > 0 && all_outcomes(map.cell(i, j), want);) b.eta_lo = eta_grid[j];
    map.eta_bounds.push_back(b);
  }
  return map;
}

std::vector<FamilyMember> default_bump_family(const Mesh& mesh) {
  const auto& box = mesh.bounds();
  const double w = box.x1 - box.x0;
  std::vector<FamilyMember> out;
  for (double c : {0.04, 0.03, 0.02, 0.01}) {
    char buf[128];
    if (mesh.dimension() == 1)
      std::snprintf(buf, sizeof buf, "bump(%.10g, %.10g)", box.x0 + c * w, 0.5 * c * w);
    else
      std::snprintf(buf, sizeof buf, "bump(%.10g, %.10g, %.10g)", box.x0 + c * w, 0.5 * (box.y0 + box.y1),
                    0.5 * c * w);
    out.push_back({buf, Weight::expression(buf)});
  }
  return out;
}

NonuniformityReport nonuniformity_experiment(const MeshPtr& mesh, double p, double q, const Weight& m,
                                             const Weight& a, const std::vector<FamilyMember>& family,
                                             const NonuniformityOptions& opts) {
  const auto av = a.evaluate(*mesh);
  for (int v : mesh->interior_vertices())
    if (av[static_cast<std::size_t>(v)] < 0.0) throw InvalidConfig("a must be nonnegative", "a");
  if (!(opts.eps_lambda > 0.0)) throw InvalidConfig("eps_lambda must be positive", "eps_lambda");
  if (opts.lam_points < 1) throw InvalidConfig("lam_points must be positive", "lam_points");

  NonuniformityReport rep;
  rep.lam1 = principal_eigenpair(mesh, m, p).lam;
  rep.lam = rep.lam1 + opts.eps_lambda;
  SolveOptions so = opts.solve;
  so.lam1 = rep.lam1;

  auto classes = [&](const ProblemSpec& s, int& failures) {
    std::vector<SignClass> out;
    const auto res = multi_start_solve(s, so);
    for (const auto& o : res.starts) {
      if (o.converged) out.push_back(o.sign_class);
      else ++failures;
    }
    return out;
  };

  for (const auto& member : family) {
    for (double x : member.f.evaluate(*mesh))
      if (x < 0.0) throw InvalidConfig("family sources must be nonnegative", "family");
    MemberReport mr;
    mr.label = member.label;
    ProblemSpec s;
    s.mesh = mesh;
    s.p = p;
    s.q = q;
    s.m = m;
    s.a = a;
    s.f = member.f;
    s.lam = rep.lam;
    s.eta = 0.0;
    mr.classes_eta0 = classes(s, mr.failures);
    s.eta = opts.small_eta;
    mr.classes_eta_small = classes(s, mr.failures);
    s.lam = 0.5 * rep.lam1;
    s.eta = 0.0;
    mr.classes_control = classes(s, mr.failures);

    mr.no_nonneg_no_negative = !mr.classes_eta0.empty() || !mr.classes_eta_small.empty();
    for (const auto* set : {&mr.classes_eta0, &mr.classes_eta_small})
      for (auto c : *set)
        if (c == SignClass::Positive || c == SignClass::NonnegWithZeros || c == SignClass::Zero ||
            c == SignClass::Negative)
          mr.no_nonneg_no_negative = false;

    s.eta = 0.0;
    for (int k = 1; k <= opts.lam_points; ++k) {
      const double d = opts.delta_max * k / opts.lam_points;
      s.lam = rep.lam1 + d;
      int fails = 0;
      const auto cl = classes(s, fails);
      if (cl.empty() || std::any_of(cl.begin(), cl.end(), [](SignClass c) { return c != SignClass::Negative; })) break;
      mr.delta_hat_amp = d;
    }
    rep.members.push_back(std::move(mr));
  }
  rep.delta_hat_decreasing = rep.members.size() >= 2;
  for (std::size_t k = 1; k < rep.members.size(); ++k)
    if (!(rep.members[k].delta_hat_amp < rep.members[k - 1].delta_hat_amp)) rep.delta_hat_decreasing = false;
  return rep;
}

}  // namespace plap
