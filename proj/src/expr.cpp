#include "plap/expr.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <numbers>

#include "plap/errors.hpp"

namespace plap {

class ExprParser {
 public:
  explicit ExprParser(std::string_view src) : src_(src) {}

  ExprAst run() {
    if (src_.find_first_not_of(" \t\r\n") == std::string_view::npos)
      throw ParseError("empty expression", 0);
    ast_.root_ = sum();
    skip_ws();
    if (pos_ != src_.size())
      throw ParseError(std::string("unexpected '") + src_[pos_] + "'", pos_);
    return std::move(ast_);
  }

 private:
  using Kind = ExprAst::Kind;
  using Func = ExprAst::Func;

  int add(ExprAst::Node node) {
    ast_.nodes_.push_back(std::move(node));
    return static_cast<int>(ast_.nodes_.size()) - 1;
  }
  int binary(Kind kind, int lhs, int rhs) { return add({kind, 0.0, Func::Sin, {lhs, rhs}}); }

  void skip_ws() {
    while (pos_ < src_.size() && (src_[pos_] == ' ' || src_[pos_] == '\t' || src_[pos_] == '\n' ||
                                  src_[pos_] == '\r'))
      ++pos_;
  }
  bool accept(char c) {
    skip_ws();
    if (pos_ < src_.size() && src_[pos_] == c) {
      ++pos_;
      return true;
    }
    return false;
  }
  void expect(char c) {
    if (!accept(c)) {
      if (pos_ >= src_.size())
        throw ParseError(std::string("expected '") + c + "' before end of input", pos_);
      throw ParseError(std::string("expected '") + c + "'", pos_);
    }
  }

  int sum() {
    int lhs = product();
    for (;;) {
      if (accept('+')) lhs = binary(Kind::Add, lhs, product());
      else if (accept('-')) lhs = binary(Kind::Sub, lhs, product());
      else return lhs;
    }
  }

  int product() {
    int lhs = unary();
    for (;;) {
      if (accept('*')) lhs = binary(Kind::Mul, lhs, unary());
      else if (accept('/')) lhs = binary(Kind::Div, lhs, unary());
      else return lhs;
    }
  }

  int unary() {
    if (accept('-')) return add({Kind::Neg, 0.0, Func::Sin, {unary()}});
    return power();
  }

  int power() {
    int base = primary();
    if (accept('^')) return binary(Kind::Pow, base, unary());
    return base;
  }

  int primary() {
    skip_ws();
    if (pos_ >= src_.size()) throw ParseError("unexpected end of input", pos_);
    const char c = src_[pos_];
    if (accept('(')) {
      int inner = sum();
      expect(')');
      return inner;
    }
    if ((c >= '0' && c <= '9') || c == '.') return number();
    if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') return identifier();
    throw ParseError(std::string("unexpected '") + c + "'", pos_);
  }

  int number() {
    const char* first = src_.data() + pos_;
    const char* last = src_.data() + src_.size();
    double value = 0.0;
    auto [ptr, ec] = std::from_chars(first, last, value);
    if (ec != std::errc() || !std::isfinite(value)) throw ParseError("malformed number", pos_);
    pos_ += static_cast<std::size_t>(ptr - first);
    return add({Kind::Number, value, Func::Sin, {}});
  }

  int identifier() {
    const std::size_t start = pos_;
    while (pos_ < src_.size() &&
           (std::isalnum(static_cast<unsigned char>(src_[pos_])) || src_[pos_] == '_'))
      ++pos_;
    const std::string name(src_.substr(start, pos_ - start));
    skip_ws();
    const bool call = pos_ < src_.size() && src_[pos_] == '(';
    if (!call) {
      if (name == "x") return add({Kind::VarX, 0.0, Func::Sin, {}});
      if (name == "y") return add({Kind::VarY, 0.0, Func::Sin, {}});
      if (name == "pi") return add({Kind::Number, std::numbers::pi, Func::Sin, {}});
      throw ParseError("unknown variable '" + name + "'", start);
    }

    struct Entry {
      const char* name;
      Func func;
      int min_args, max_args;
    };
    static constexpr Entry table[] = {
        {"sin", Func::Sin, 1, 1},   {"cos", Func::Cos, 1, 1},   {"exp", Func::Exp, 1, 1},
        {"abs", Func::Abs, 1, 1},   {"min", Func::Min, 2, 2},   {"max", Func::Max, 2, 2},
        {"step", Func::Step, 1, 1}, {"bump", Func::Bump, 2, 3},
    };
    const Entry* entry = nullptr;
    for (const auto& e : table)
      if (name == e.name) entry = &e;
    if (!entry) throw ParseError("unknown function '" + name + "'", start);

    expect('(');
    std::vector<int> args{sum()};
    while (accept(',')) args.push_back(sum());
    expect(')');
    const int nargs = static_cast<int>(args.size());
    if (nargs < entry->min_args || nargs > entry->max_args)
      throw ParseError("wrong number of arguments to '" + name + "'", start);
    return add({Kind::Call, 0.0, entry->func, std::move(args)});
  }

  std::string_view src_;
  std::size_t pos_ = 0;
  ExprAst ast_;
};

ExprAst parse_expr(std::string_view src) { return ExprParser(src).run(); }

namespace {

double bump_profile(double t) {
  if (t >= 1.0) return 0.0;
  return std::exp(-1.0 / (1.0 - t * t));
}

}  // namespace

double ExprAst::eval(double x, std::optional<double> y) const {
  if (root_ < 0) throw EvalError("empty expression");
  if (!y && uses_y()) throw EvalError("expression uses y but no y value was supplied");
  return eval_node(root_, x, y.value_or(0.0));
}

double ExprAst::eval_node(int id, double x, double y) const {
  const Node& n = nodes_[static_cast<std::size_t>(id)];
  auto arg = [&](std::size_t k) { return eval_node(n.args[k], x, y); };
  switch (n.kind) {
    case Kind::Number: return n.value;
    case Kind::VarX: return x;
    case Kind::VarY: return y;
    case Kind::Neg: return -arg(0);
    case Kind::Add: return arg(0) + arg(1);
    case Kind::Sub: return arg(0) - arg(1);
    case Kind::Mul: return arg(0) * arg(1);
    case Kind::Div: {
      const double den = arg(1);
      if (den == 0.0) throw EvalError("division by zero");
      return arg(0) / den;
    }
    case Kind::Pow: {
      const double base = arg(0);
      const double expo = arg(1);
      if (base == 0.0 && expo < 0.0) throw EvalError("zero raised to a negative power");
      const double r = std::pow(base, expo);
      if (std::isnan(r)) throw EvalError("negative base with non-integer exponent");
      return r;
    }
    case Kind::Call: break;
  }
  switch (n.func) {
    case Func::Sin: return std::sin(arg(0));
    case Func::Cos: return std::cos(arg(0));
    case Func::Exp: return std::exp(arg(0));
    case Func::Abs: return std::abs(arg(0));
    case Func::Min: return std::min(arg(0), arg(1));
    case Func::Max: return std::max(arg(0), arg(1));
    case Func::Step: return arg(0) >= 0.0 ? 1.0 : 0.0;
    case Func::Bump: {
      if (n.args.size() == 2) {
        const double r = arg(1);
        if (!(r > 0.0)) throw EvalError("bump radius must be positive");
        return bump_profile(std::abs(x - arg(0)) / r);
      }
      const double r = arg(2);
      if (!(r > 0.0)) throw EvalError("bump radius must be positive");
      return bump_profile(std::hypot(x - arg(0), y - arg(1)) / r);
    }
  }
  return 0.0;
}

bool ExprAst::uses_y() const {
  for (const auto& n : nodes_)
    if (n.kind == Kind::VarY || (n.kind == Kind::Call && n.func == Func::Bump && n.args.size() == 3))
      return true;
  return false;
}

std::string ExprAst::to_string() const { return root_ < 0 ? std::string{} : render(root_); }

std::string ExprAst::render(int id) const {
  const Node& n = nodes_[static_cast<std::size_t>(id)];
  auto sub = [&](std::size_t k) { return render(n.args[k]); };
  switch (n.kind) {
    case Kind::Number: {
      char buf[32];
      std::snprintf(buf, sizeof buf, "%.17g", n.value);
      return buf;
    }
    case Kind::VarX: return "x";
    case Kind::VarY: return "y";
    case Kind::Neg: return "(-" + sub(0) + ")";
    case Kind::Add: return "(" + sub(0) + " + " + sub(1) + ")";
    case Kind::Sub: return "(" + sub(0) + " - " + sub(1) + ")";
    case Kind::Mul: return "(" + sub(0) + " * " + sub(1) + ")";
    case Kind::Div: return "(" + sub(0) + " / " + sub(1) + ")";
    case Kind::Pow: return "(" + sub(0) + " ^ " + sub(1) + ")";
    case Kind::Call: break;
  }
  static constexpr const char* names[] = {"sin", "cos", "exp", "abs", "min", "max", "step", "bump"};
  std::string out = names[static_cast<int>(n.func)];
  out += '(';
  for (std::size_t k = 0; k < n.args.size(); ++k) {
    if (k) out += ", ";
    out += sub(k);
  }
  return out + ')';
}

}  // namespace plap
