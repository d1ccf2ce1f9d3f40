#pragma once

#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace plap {

/// Parsed arithmetic expression in the variables x and y.
///
/// Grammar (lowest to highest precedence):
///   sum     := product (('+' | '-') product)*
///   product := unary (('*' | '/') unary)*
///   unary   := '-' unary | power
///   power   := primary ('^' unary)?          right associative
///   primary := number | 'x' | 'y' | 'pi' | name '(' args ')' | '(' sum ')'
///
/// Functions: sin cos exp abs (1 arg), min max (2), step (Heaviside, step(0) = 1),
/// bump(c, r) = exp(-1/(1-t^2)) for t = |x-c|/r < 1 and 0 otherwise, and the
/// radial form bump(cx, cy, r) in 2D.
class ExprAst {
 public:
  enum class Kind { Number, VarX, VarY, Neg, Add, Sub, Mul, Div, Pow, Call };
  enum class Func { Sin, Cos, Exp, Abs, Min, Max, Step, Bump };

  struct Node {
    Kind kind = Kind::Number;
    double value = 0.0;
    Func func = Func::Sin;
    std::vector<int> args;
  };

  double eval(double x, std::optional<double> y = std::nullopt) const;
  // Fully parenthesized rendering that parses back to an equivalent tree.
  std::string to_string() const;
  bool uses_y() const;

  const std::vector<Node>& nodes() const noexcept { return nodes_; }
  int root() const noexcept { return root_; }

 private:
  friend class ExprParser;
  double eval_node(int id, double x, double y) const;
  std::string render(int id) const;

  std::vector<Node> nodes_;
  int root_ = -1;
};

ExprAst parse_expr(std::string_view src);

inline double eval_expr(const ExprAst& ast, double x, std::optional<double> y = std::nullopt) {
  return ast.eval(x, y);
}

}  // namespace plap
