#include "plap/config_io.hpp"

#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <set>
#include <sstream>

#include <json.hpp>

#include "plap/errors.hpp"

namespace plap {

using json = nlohmann::ordered_json;

std::string to_string(Mode m) {
  switch (m) {
    case Mode::Eigen: return "eigen";
    case Mode::Solve: return "solve";
    case Mode::Sweep: return "sweep";
    case Mode::Critval: return "critval";
    case Mode::PiconeCheck: return "picone-check";
    case Mode::Nonuniformity: return "nonuniformity";
  }
  return "unknown";
}

Mode mode_from_string(const std::string& s) {
  for (Mode m : {Mode::Eigen, Mode::Solve, Mode::Sweep, Mode::Critval, Mode::PiconeCheck, Mode::Nonuniformity})
    if (to_string(m) == s) return m;
  throw InvalidConfig("unknown mode '" + s + "'", "mode");
}

MeshPtr DomainSpec::build() const {
  return rectangle ? build_rectangle(x0, x1, y0, y1, nx, ny) : build_interval(x0, x1, nx);
}

std::vector<double> GridSpec::resolve(double scale) const {
  const double s = relative ? scale : 1.0;
  std::vector<double> out;
  if (!values.empty()) {
    for (double v : values) out.push_back(v * s);
    return out;
  }
  for (int k = 0; k < points; ++k) {
    const double t = points == 1 ? 0.0 : static_cast<double>(k) / (points - 1);
    out.push_back((*from + (*to - *from) * t) * s);
  }
  return out;
}

std::string format_real(double x) {
  if (std::isnan(x)) return "nan";
  if (std::isinf(x)) return x > 0 ? "inf" : "-inf";
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

namespace {

// JSON object reader that records the values it hands out (defaults
// included) into a normalized copy and rejects unknown fields.
class Reader {
 public:
  Reader(const json& j, json& norm, std::string path) : j_(j), norm_(norm), path_(std::move(path)) {
    if (!j_.is_object()) throw InvalidConfig("expected an object", path_.empty() ? "<root>" : path_);
    if (!norm_.is_object()) norm_ = json::object();
  }

  std::string field(const std::string& key) const { return path_.empty() ? key : path_ + "." + key; }
  bool has(const std::string& key) const { return j_.contains(key); }
  const json& raw(const std::string& key) {
    seen_.insert(key);
    return j_.at(key);
  }

  double number(const std::string& key, double def) {
    double v = def;
    if (has(key)) v = as_number(raw(key), field(key));
    norm_[key] = v;
    return v;
  }
  std::optional<double> optional_number(const std::string& key) {
    if (!has(key)) return std::nullopt;
    const double v = as_number(raw(key), field(key));
    norm_[key] = v;
    return v;
  }
  int integer(const std::string& key, int def, int min) {
    int v = def;
    if (has(key)) {
      const auto& x = raw(key);
      if (!x.is_number_integer()) throw InvalidConfig("expected an integer", field(key));
      const auto w = x.get<long long>();
      if (w < min || w > 100000000) throw InvalidConfig("must be between " + std::to_string(min) + " and 1e8", field(key));
      v = static_cast<int>(w);
    }
    norm_[key] = v;
    return v;
  }
  std::uint64_t u64(const std::string& key, std::uint64_t def) {
    std::uint64_t v = def;
    if (has(key)) {
      const auto& x = raw(key);
      if (!x.is_number_unsigned()) throw InvalidConfig("expected a nonnegative integer", field(key));
      v = x.get<std::uint64_t>();
    }
    norm_[key] = v;
    return v;
  }
  bool boolean(const std::string& key, bool def) {
    bool v = def;
    if (has(key)) {
      const auto& x = raw(key);
      if (!x.is_boolean()) throw InvalidConfig("expected true or false", field(key));
      v = x.get<bool>();
    }
    norm_[key] = v;
    return v;
  }
  std::string string(const std::string& key, const std::string& def) {
    std::string v = def;
    if (has(key)) {
      const auto& x = raw(key);
      if (!x.is_string()) throw InvalidConfig("expected a string", field(key));
      v = x.get<std::string>();
    }
    norm_[key] = v;
    return v;
  }
  std::vector<double> numbers(const std::string& key, std::vector<double> def) {
    if (has(key)) {
      const auto& x = raw(key);
      if (!x.is_array()) throw InvalidConfig("expected an array of numbers", field(key));
      def.clear();
      for (std::size_t i = 0; i < x.size(); ++i)
        def.push_back(as_number(x[i], field(key) + "[" + std::to_string(i) + "]"));
    }
    norm_[key] = def;
    return def;
  }
  Reader sub(const std::string& key) {
    static const json empty = json::object();
    const json& x = has(key) ? raw(key) : empty;
    seen_.insert(key);
    return Reader(x, norm_[key], field(key));
  }
  void set(const std::string& key, json v) { norm_[key] = std::move(v); }
  void finish() const {
    for (auto it = j_.begin(); it != j_.end(); ++it)
      if (!seen_.count(it.key())) throw InvalidConfig("unknown field", field(it.key()));
  }

  static double as_number(const json& x, const std::string& path) {
    if (!x.is_number()) throw InvalidConfig("expected a number", path);
    const double v = x.get<double>();
    if (!std::isfinite(v)) throw InvalidConfig("must be finite", path);
    return v;
  }

 private:
  const json& j_;
  json& norm_;
  std::string path_;
  std::set<std::string> seen_;
};

std::vector<double> read_nodal_file(const std::filesystem::path& path, const std::string& field) {
  std::ifstream in(path);
  if (!in) throw InvalidConfig("cannot read nodal file '" + path.string() + "'", field);
  std::vector<double> v;
  std::string tok;
  while (in >> tok) {
    char* end = nullptr;
    const double x = std::strtod(tok.c_str(), &end);
    if (end == tok.c_str() || *end != '\0' || !std::isfinite(x))
      throw InvalidConfig("bad number '" + tok + "' in '" + path.string() + "'", field);
    v.push_back(x);
  }
  return v;
}

Weight parse_weight(const json& x, const std::string& field, const std::filesystem::path& base_dir,
                    std::size_t num_vertices, json& norm) {
  auto from_expr = [&](const std::string& src, std::optional<double> gamma) {
    try {
      return Weight::expression(src, gamma);
    } catch (const ParseError& e) {
      throw InvalidConfig(std::string("expression: ") + e.what(), field);
    }
  };
  auto check_nodal = [&](const std::vector<double>& v) {
    if (v.size() != num_vertices)
      throw InvalidConfig("expected " + std::to_string(num_vertices) + " nodal values, got " + std::to_string(v.size()),
                          field);
  };
  norm = x;
  if (x.is_number()) return Weight::constant(Reader::as_number(x, field));
  if (x.is_string()) return from_expr(x.get<std::string>(), std::nullopt);
  if (!x.is_object()) throw InvalidConfig("expected a number, an expression or an object", field);

  json dummy;
  Reader r(x, dummy, field);
  const auto gamma = r.optional_number("gamma");
  if (gamma && !(*gamma >= 1.0)) throw InvalidConfig("gamma must be >= 1", field + ".gamma");
  const int forms = r.has("value") + r.has("expr") + r.has("nodal") + r.has("file");
  if (forms != 1) throw InvalidConfig("exactly one of value, expr, nodal, file is required", field);
  Weight w;
  if (r.has("value")) {
    w = Weight::constant(r.number("value", 0.0), gamma);
  } else if (r.has("expr")) {
    w = from_expr(r.string("expr", ""), gamma);
  } else if (r.has("nodal")) {
    auto v = r.numbers("nodal", {});
    check_nodal(v);
    w = Weight::nodal(std::move(v), gamma);
  } else {
    const auto name = r.string("file", "");
    auto v = read_nodal_file(base_dir / name, field + ".file");
    check_nodal(v);
    w = Weight::nodal(std::move(v), gamma);
  }
  r.finish();
  return w;
}

GridSpec parse_grid(Reader& parent, const std::string& key, GridSpec def) {
  if (!parent.has(key)) {
    json n;
    if (def.is_default()) n = "default";
    else if (!def.values.empty()) n = {{"relative", def.relative}, {"values", def.values}};
    else n = {{"relative", def.relative}, {"from", *def.from}, {"to", *def.to}, {"points", def.points}};
    parent.set(key, n);
    return def;
  }
  const auto field = parent.field(key);
  const json& x = parent.raw(key);
  GridSpec g;
  if (x.is_string() && x.get<std::string>() == "default") {
    parent.set(key, "default");
    return g;
  }
  if (x.is_array()) {
    for (std::size_t i = 0; i < x.size(); ++i)
      g.values.push_back(Reader::as_number(x[i], field + "[" + std::to_string(i) + "]"));
    if (g.values.empty()) throw InvalidConfig("grid must not be empty", field);
    parent.set(key, g.values);
    return g;
  }
  json n;
  Reader r(x, n, field);
  g.relative = r.boolean("relative", false);
  if (r.has("values")) {
    g.values = r.numbers("values", {});
    if (g.values.empty()) throw InvalidConfig("grid must not be empty", field + ".values");
  } else {
    if (!r.has("from") || !r.has("to") || !r.has("points"))
      throw InvalidConfig("grid needs values or from/to/points", field);
    g.from = r.number("from", 0.0);
    g.to = r.number("to", 0.0);
    g.points = r.integer("points", 0, 1);
    if (*g.to < *g.from) throw InvalidConfig("to must not be below from", field);
  }
  r.finish();
  parent.set(key, n);
  return g;
}

}  // namespace

RunConfig parse_config(const std::string& text, const std::filesystem::path& base_dir) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::parse_error& e) {
    throw InvalidConfig(std::string("malformed JSON: ") + e.what(), "<root>");
  }
  RunConfig cfg;
  json norm = json::object();
  Reader root(j, norm, "");

  cfg.mode = mode_from_string(root.string("mode", "eigen"));

  {
    auto d = root.sub("domain");
    const auto type = d.string("type", "interval");
    if (type != "interval" && type != "rectangle") throw InvalidConfig("unknown domain type '" + type + "'", "domain.type");
    cfg.domain.rectangle = type == "rectangle";
    const auto b = d.numbers("bounds", cfg.domain.rectangle ? std::vector<double>{0, 1, 0, 1} : std::vector<double>{0, 1});
    if (b.size() != (cfg.domain.rectangle ? 4u : 2u))
      throw InvalidConfig(cfg.domain.rectangle ? "expected [x0, x1, y0, y1]" : "expected [x0, x1]", "domain.bounds");
    cfg.domain.x0 = b[0], cfg.domain.x1 = b[1];
    if (!(b[1] > b[0])) throw InvalidConfig("requires x1 > x0", "domain.bounds");
    if (cfg.domain.rectangle) {
      cfg.domain.y0 = b[2], cfg.domain.y1 = b[3];
      if (!(b[3] > b[2])) throw InvalidConfig("requires y1 > y0", "domain.bounds");
      if (d.has("n") && d.raw("n").is_array()) {
        const auto& n = d.raw("n");
        if (n.size() != 2 || !n[0].is_number_integer() || !n[1].is_number_integer())
          throw InvalidConfig("expected [nx, ny]", "domain.n");
        cfg.domain.nx = n[0].get<int>(), cfg.domain.ny = n[1].get<int>();
        d.set("n", n);
      } else {
        cfg.domain.nx = cfg.domain.ny = d.integer("n", 32, 2);
      }
      if (cfg.domain.nx < 2 || cfg.domain.ny < 2 || cfg.domain.nx > 4096 || cfg.domain.ny > 4096)
        throw InvalidConfig("resolution must be between 2 and 4096", "domain.n");
    } else {
      cfg.domain.nx = d.integer("n", 256, 2);
      if (cfg.domain.nx > 10000000) throw InvalidConfig("resolution too large", "domain.n");
    }
    d.finish();
  }
  const std::size_t nv = cfg.domain.rectangle
                             ? static_cast<std::size_t>(cfg.domain.nx + 1) * static_cast<std::size_t>(cfg.domain.ny + 1)
                             : static_cast<std::size_t>(cfg.domain.nx + 1);

  cfg.p = root.number("p", 2.0);
  cfg.q = root.number("q", 1.5);
  if (!(cfg.p > 1.0)) throw InvalidConfig("p must exceed 1", "p");
  if (!(cfg.q > 1.0)) throw InvalidConfig("q must exceed 1", "q");
  if (!(cfg.q < cfg.p)) throw InvalidConfig("q must be below p", "q");
  cfg.lam = root.number("lam", 0.0);
  cfg.eta = root.number("eta", 0.0);
  cfg.seed = root.u64("seed", 20240611);

  {
    auto w = root.sub("weights");
    for (auto [key, target] : {std::pair{"m", &cfg.m}, std::pair{"a", &cfg.a}, std::pair{"f", &cfg.f}}) {
      json n = 1.0;
      if (w.has(key)) *target = parse_weight(w.raw(key), w.field(key), base_dir, nv, n);
      w.set(key, n);
    }
    w.finish();
  }

  {
    auto e = root.sub("eigen");
    if (e.has("tol")) {
      cfg.eigen.tol = e.number("tol", 0.0);
      if (!(*cfg.eigen.tol > 0.0)) throw InvalidConfig("must be positive", "eigen.tol");
    } else {
      e.set("tol", cfg.eigen.tolerance_for(cfg.p));
    }
    cfg.eigen.max_iter = e.integer("max_iter", cfg.eigen.max_iter, 1);
    if (e.has("subdomain")) {
      cfg.subdomain = e.numbers("subdomain", {});
      if (cfg.subdomain->size() != (cfg.domain.rectangle ? 4u : 2u))
        throw InvalidConfig("expected a box matching the domain dimension", "eigen.subdomain");
    }
    e.finish();
  }

  {
    auto s = root.sub("solver");
    auto& o = cfg.solve;
    o.tol = s.number("tol", o.tol);
    o.abs_tol = s.number("abs_tol", o.abs_tol);
    o.stage_tol = s.number("stage_tol", o.stage_tol);
    o.max_newton = s.integer("max_newton", o.max_newton, 1);
    o.eps_grad_start = s.number("eps_grad_start", o.eps_grad_start);
    o.eps_grad_floor = s.number("eps_grad_floor", o.eps_grad_floor);
    o.eps_sub_start = s.number("eps_sub_start", o.eps_sub_start);
    o.eps_sub_floor = s.number("eps_sub_floor", o.eps_sub_floor);
    o.max_continuation = s.integer("max_continuation", o.max_continuation, 1);
    o.t_grid = s.numbers("t_grid", o.t_grid);
    o.random_starts = s.integer("random_starts", o.random_starts, 0);
    o.dedup_tol = s.number("dedup_tol", o.dedup_tol);
    for (auto [name, v] : {std::pair{"tol", o.tol}, std::pair{"stage_tol", o.stage_tol},
                           std::pair{"eps_grad_floor", o.eps_grad_floor}, std::pair{"eps_sub_floor", o.eps_sub_floor},
                           std::pair{"dedup_tol", o.dedup_tol}})
      if (!(v > 0.0)) throw InvalidConfig("must be positive", std::string("solver.") + name);
    if (o.abs_tol < 0.0) throw InvalidConfig("must be nonnegative", "solver.abs_tol");
    if (o.eps_grad_start < o.eps_grad_floor) throw InvalidConfig("must be >= eps_grad_floor", "solver.eps_grad_start");
    if (o.eps_sub_start < o.eps_sub_floor) throw InvalidConfig("must be >= eps_sub_floor", "solver.eps_sub_start");
    for (double t : o.t_grid)
      if (!(t > 0.0)) throw InvalidConfig("entries must be positive", "solver.t_grid");
    o.seed = cfg.seed;
    s.finish();
  }

  {
    auto s = root.sub("sweep");
    auto& o = cfg.region;
    cfg.lam_grid = parse_grid(s, "lam_grid", {});
    cfg.eta_grid = parse_grid(s, "eta_grid", {});
    o.eta_bar = s.optional_number("eta_bar");
    if (o.eta_bar && !(*o.eta_bar > 0.0)) throw InvalidConfig("must be positive", "sweep.eta_bar");
    o.mp_lam_window = s.number("mp_lam_window", o.mp_lam_window);
    o.amp_lam_window = s.number("amp_lam_window", o.amp_lam_window);
    o.eta_window = s.number("eta_window", o.eta_window);
    o.rho = s.number("rho", o.rho);
    o.interior_margin = s.number("interior_margin", o.interior_margin);
    o.threads = s.integer("threads", o.threads, 0);
    o.compute_eta_star = s.boolean("compute_eta_star", o.compute_eta_star);
    for (auto [name, v] : {std::pair{"mp_lam_window", o.mp_lam_window}, std::pair{"amp_lam_window", o.amp_lam_window},
                           std::pair{"eta_window", o.eta_window}})
      if (!(v > 0.0 && v <= 1.0)) throw InvalidConfig("must lie in (0, 1]", std::string("sweep.") + name);
    if (!(o.rho > 0.0 && o.rho < 0.5)) throw InvalidConfig("must lie in (0, 0.5)", "sweep.rho");
    if (!(o.interior_margin > 0.0 && o.interior_margin < 0.5))
      throw InvalidConfig("must lie in (0, 0.5)", "sweep.interior_margin");
    s.finish();
  }

  {
    auto c = root.sub("critval");
    GridSpec def;
    def.values = {0.0, 0.25, 0.5, 0.75};
    def.relative = true;
    cfg.critval_lams = parse_grid(c, "lam", def);
    cfg.eta_star.starts = c.integer("starts", cfg.eta_star.starts, 1);
    cfg.eta_star.max_iter = c.integer("max_iter", cfg.eta_star.max_iter, 1);
    cfg.eta_star.tol = c.number("tol", cfg.eta_star.tol);
    if (!(cfg.eta_star.tol > 0.0)) throw InvalidConfig("must be positive", "critval.tol");
    cfg.eta_star.seed = cfg.seed;
    c.finish();
  }
  cfg.region.eta_star = cfg.eta_star;
  cfg.region.solve = cfg.solve;
  cfg.region.seed = cfg.seed;

  {
    auto pc = root.sub("picone");
    if (pc.has("pairs")) {
      const auto& x = pc.raw("pairs");
      if (!x.is_array()) throw InvalidConfig("expected [[p, q], ...]", "picone.pairs");
      for (std::size_t i = 0; i < x.size(); ++i) {
        const auto f = "picone.pairs[" + std::to_string(i) + "]";
        if (!x[i].is_array() || x[i].size() != 2) throw InvalidConfig("expected [p, q]", f);
        const double p = Reader::as_number(x[i][0], f), q = Reader::as_number(x[i][1], f);
        if (!(1.0 < q && q < p)) throw InvalidConfig("requires 1 < q < p", f);
        cfg.picone_pairs.emplace_back(p, q);
      }
    } else {
      cfg.picone_pairs.emplace_back(cfg.p, cfg.q);
    }
    json pairs = json::array();
    for (auto [p, q] : cfg.picone_pairs) pairs.push_back({p, q});
    pc.set("pairs", pairs);
    cfg.picone_eps = pc.numbers("eps", cfg.picone_eps);
    for (double e : cfg.picone_eps)
      if (!(e > 0.0)) throw InvalidConfig("entries must be positive", "picone.eps");
    pc.finish();
  }

  {
    auto nu = root.sub("nonuniformity");
    auto& o = cfg.nonuniformity;
    o.eps_lambda = nu.number("eps_lambda", o.eps_lambda);
    o.small_eta = nu.number("small_eta", o.small_eta);
    o.delta_max = nu.number("delta_max", o.delta_max);
    o.lam_points = nu.integer("lam_points", o.lam_points, 1);
    if (!(o.eps_lambda > 0.0)) throw InvalidConfig("must be positive", "nonuniformity.eps_lambda");
    if (!(o.small_eta > 0.0)) throw InvalidConfig("must be positive", "nonuniformity.small_eta");
    if (!(o.delta_max > 0.0)) throw InvalidConfig("must be positive", "nonuniformity.delta_max");
    if (nu.has("family") && !(nu.raw("family").is_string() && nu.raw("family").get<std::string>() == "default")) {
      const auto& x = nu.raw("family");
      if (!x.is_array() || x.empty()) throw InvalidConfig("expected a nonempty array of expressions", "nonuniformity.family");
      for (std::size_t i = 0; i < x.size(); ++i) {
        const auto f = "nonuniformity.family[" + std::to_string(i) + "]";
        if (!x[i].is_string()) throw InvalidConfig("expected an expression string", f);
        json dummy;
        parse_weight(x[i], f, base_dir, nv, dummy);
        cfg.family.push_back(x[i].get<std::string>());
      }
      nu.set("family", cfg.family);
    } else {
      nu.set("family", "default");
    }
    o.solve = cfg.solve;
    nu.finish();
  }

  {
    auto out = root.sub("output");
    cfg.out_dir = out.string("dir", ".");
    cfg.csv_name = out.string("csv", cfg.csv_name);
    cfg.report_name = out.string("report", cfg.report_name);
    if (cfg.csv_name.empty() || cfg.report_name.empty()) throw InvalidConfig("file names must not be empty", "output");
    out.finish();
  }
  if (const char* env = std::getenv("PLAP_OUT_DIR"); env && *env) cfg.out_dir = env;

  root.finish();
  cfg.echo = norm.dump(2);
  return cfg;
}

RunConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot read config '" + path.string() + "'");
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_config(ss.str(), path.parent_path().empty() ? "." : path.parent_path());
}

void override_seed(RunConfig& cfg, std::uint64_t seed) {
  cfg.seed = seed;
  cfg.solve.seed = cfg.region.seed = cfg.region.solve.seed = seed;
  cfg.eta_star.seed = cfg.region.eta_star.seed = seed;
  cfg.nonuniformity.solve.seed = seed;
  if (!cfg.echo.empty()) {
    auto j = json::parse(cfg.echo);
    j["seed"] = seed;
    cfg.echo = j.dump(2);
  }
}

ProblemSpec make_problem(const RunConfig& cfg) {
  ProblemSpec s;
  s.mesh = cfg.domain.build();
  s.p = cfg.p;
  s.q = cfg.q;
  s.lam = cfg.lam;
  s.eta = cfg.eta;
  s.m = cfg.m;
  s.a = cfg.a;
  s.f = cfg.f;
  return s;
}

namespace {

void write_file(const std::filesystem::path& path, const std::string& content) {
  std::error_code ec;
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path(), ec);
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot write '" + path.string() + "'");
  out << content;
  out.flush();
  if (!out) throw IoError("write failed for '" + path.string() + "'");
}

json real(double x) {
  if (std::isfinite(x)) return x;
  return format_real(x);
}

json reals(const std::vector<double>& v) {
  json a = json::array();
  for (double x : v) a.push_back(real(x));
  return a;
}

void write_json(json doc, const std::filesystem::path& path, const std::string& echo) {
  if (!echo.empty()) doc["config"] = json::parse(echo);
  write_file(path, doc.dump(2) + "\n");
}

json outcome_json(const SolveOutcome& o) {
  return {{"start_strategy", o.start_strategy},
          {"converged", o.converged},
          {"resonant", o.resonant},
          {"sign_class", o.converged ? to_string(o.sign_class) : "failed"},
          {"residual_norm", real(o.residual_norm)},
          {"energy", real(o.energy)},
          {"sup_norm", real(o.sup_norm)},
          {"sobolev_seminorm", real(o.sobolev_seminorm)},
          {"sup_bound_constant", real(o.sup_bound_constant)},
          {"newton_iters", o.newton_iters},
          {"continuation_steps", o.continuation_steps},
          {"boundary_flux_sign", o.boundary_flux_sign},
          {"message", o.message},
          {"u", reals(o.u.values())}};
}

json prediction_json(const TheoremPrediction& t) {
  json hyps = json::array();
  for (const auto& h : t.hypotheses)
    hyps.push_back({{"name", h.name}, {"passed", h.passed}, {"machine_checkable", h.machine_checkable}, {"detail", h.detail}});
  json claim = json::array();
  for (auto c : t.claim) claim.push_back(to_string(c));
  json j = {{"id", to_string(t.id)},
            {"claim", claim},
            {"interior_only", t.interior_only},
            {"conditional", t.conditional},
            {"lam", {real(t.lam_lo), real(t.lam_hi)}},
            {"lam_closed", {t.lam_lo_closed, t.lam_hi_closed}}};
  if (t.eta_range) j["eta"] = "lam-dependent";
  else j["eta"] = {real(t.eta_lo), real(t.eta_hi)}, j["eta_closed"] = {t.eta_lo_closed, t.eta_hi_closed};
  j["hypotheses"] = hyps;
  j["note"] = t.note;
  return j;
}

json eta_star_json(const EtaStarResult& r) {
  json j = {{"value", real(r.value)}, {"starts_used", r.starts_used}, {"all_start_values", reals(r.all_start_values)}};
  j["lower_bound"] = r.lower_bound ? real(*r.lower_bound) : json(nullptr);
  return j;
}

}  // namespace

void write_csv(const RegionMap& map, const std::filesystem::path& path) {
  std::string s = "lam,eta,p,q,start_strategy,sign_class,residual_norm,sup_norm,energy,predicted_by,consistent\n";
  for (const auto& c : map.cells) {
    for (const auto& r : c.starts) {
      std::string pred;
      for (const auto& t : r.predicted_by) pred += (pred.empty() ? "" : ";") + t;
      s += format_real(c.lam) + "," + format_real(c.eta) + "," + format_real(map.p) + "," + format_real(map.q) + "," +
           r.start_strategy + "," + (r.converged ? to_string(r.sign_class) : std::string("failed")) + "," +
           format_real(r.residual_norm) + "," + format_real(r.sup_norm) + "," + format_real(r.energy) + "," + pred +
           "," + (r.consistent < 0 ? "na" : r.consistent ? "yes" : "no") + "\n";
    }
  }
  write_file(path, s);
}

void write_report(const EigenPair& e, const std::filesystem::path& path, const std::string& echo) {
  json doc = {{"kind", "eigen"},
              {"lam", real(e.lam)},
              {"iterations", e.iterations},
              {"residual", real(e.residual)},
              {"rq_history", reals(e.rq_history)},
              {"phi", reals(e.phi.values())}};
  write_json(std::move(doc), path, echo);
}

void write_report(const std::vector<SolveOutcome>& outcomes, const ProblemSpec& spec,
                  const std::filesystem::path& path, const std::string& echo) {
  json arr = json::array();
  for (const auto& o : outcomes) arr.push_back(outcome_json(o));
  json doc = {{"kind", "solve"},
              {"lam", real(spec.lam)},
              {"eta", real(spec.eta)},
              {"p", real(spec.p)},
              {"q", real(spec.q)},
              {"coverage", "all found solutions"},
              {"outcomes", arr}};
  write_json(std::move(doc), path, echo);
}

void write_report(const RegionMap& map, const std::filesystem::path& path, const std::string& echo) {
  json bounds = json::array();
  for (const auto& b : map.eta_bounds) bounds.push_back({{"lam", real(b.lam)}, {"eta_lo", real(b.eta_lo)}, {"eta_hi", real(b.eta_hi)}});
  json preds = json::array();
  for (const auto& t : map.predictions) preds.push_back(prediction_json(t));
  json ces = json::array();
  for (const auto& c : map.counterexamples)
    ces.push_back({{"lam", real(c.lam)}, {"eta", real(c.eta)}, {"start_strategy", c.start_strategy},
                   {"theorem", c.theorem}, {"observed", c.observed}, {"claimed", c.claimed}});
  int failed = 0, total = 0;
  for (const auto& c : map.cells)
    for (const auto& r : c.starts) ++total, failed += !r.converged;
  json doc = {{"kind", "sweep"},
              {"p", real(map.p)},
              {"q", real(map.q)},
              {"lam1", real(map.lam1)},
              {"lam2_bound", real(map.lam2_bound)},
              {"delta_hat_mp", real(map.delta_hat_mp)},
              {"delta_hat_amp", real(map.delta_hat_amp)},
              {"lam_points", map.lam_grid.size()},
              {"eta_points", map.eta_grid.size()},
              {"starts_total", total},
              {"starts_failed", failed},
              {"coverage", "all found solutions"},
              {"eta_bounds", bounds},
              {"counterexample_count", map.counterexamples.size()},
              {"counterexamples", ces},
              {"predictions", preds}};
  write_json(std::move(doc), path, echo);
}

void write_report(double lam1, const std::vector<CritvalRow>& rows, const std::filesystem::path& path,
                  const std::string& echo) {
  json arr = json::array();
  for (const auto& r : rows)
    arr.push_back({{"lam", real(r.lam)}, {"eta_star_a", eta_star_json(r.plus)}, {"eta_star_minus_a", eta_star_json(r.minus)}});
  write_json({{"kind", "critval"}, {"lam1", real(lam1)}, {"rows", arr}}, path, echo);
}

void write_report(const PiconeReport& r, const std::filesystem::path& path, const std::string& echo) {
  json poly = json::array(), disc = json::array();
  for (const auto& x : r.polynomial)
    poly.push_back({{"p", x.p}, {"q", x.q}, {"holds", x.result.holds}, {"min_value", real(x.result.min_value)},
                    {"argmin", real(x.result.argmin)}, {"value_at_zero", real(x.result.value_at_zero)},
                    {"s_max", real(x.result.s_max)}});
  for (const auto& x : r.discrete)
    disc.push_back({{"p", x.p}, {"eps", x.eps}, {"trials", x.trials}, {"violations", x.violations},
                    {"worst_slack_ratio", real(x.worst_slack_ratio)}});
  write_json({{"kind", "picone-check"}, {"polynomial", poly}, {"discrete", disc}}, path, echo);
}

void write_report(const NonuniformityReport& r, const std::filesystem::path& path, const std::string& echo) {
  auto names = [](const std::vector<SignClass>& v) {
    json a = json::array();
    for (auto c : v) a.push_back(to_string(c));
    return a;
  };
  json members = json::array();
  for (const auto& m : r.members)
    members.push_back({{"label", m.label},
                       {"classes_eta0", names(m.classes_eta0)},
                       {"classes_eta_small", names(m.classes_eta_small)},
                       {"classes_control", names(m.classes_control)},
                       {"delta_hat_amp", real(m.delta_hat_amp)},
                       {"no_nonneg_no_negative", m.no_nonneg_no_negative},
                       {"failures", m.failures}});
  write_json({{"kind", "nonuniformity"},
              {"lam1", real(r.lam1)},
              {"lam", real(r.lam)},
              {"delta_hat_decreasing", r.delta_hat_decreasing},
              {"members", members}},
             path, echo);
}

void write_text(const std::string& text, const std::filesystem::path& path) { write_file(path, text); }

}  // namespace plap
