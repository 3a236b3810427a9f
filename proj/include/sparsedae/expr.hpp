#pragma once

// Immutable symbolic scalar expressions over a vector of unknowns and named
// parameters. Nodes are shared and never mutated after construction, so an
// Expr may be copied freely and read from several threads at once.

#include <cstddef>
#include <functional>
#include <map>
#include <memory>
#include <span>
#include <string>
#include <vector>

namespace sparsedae {

using ValueVector = std::vector<double>;
using ParameterMap = std::map<std::string, double, std::less<>>;

enum class ExprKind {
  Constant,
  Unknown,
  Parameter,
  Add,
  Sub,
  Mul,
  Div,
  Pow,
  Neg,
  Exp,
  Ln,
  Piecewise,
};

enum class Compare { Less, LessEqual, Greater, GreaterEqual };

bool compare_holds(Compare op, double lhs, double bound) noexcept;
const char* compare_symbol(Compare op) noexcept;

struct PiecewiseBranch;

class Expr {
 public:
  /// The zero constant.
  Expr();
  Expr(double value);  // NOLINT(google-explicit-constructor): constants read naturally in formulas

  static Expr constant(double value);
  /// Unknown with a 0-based index into the unknown vector.
  static Expr unknown(std::size_t index);
  static Expr parameter(std::string name);

  static Expr exp(const Expr& arg);
  static Expr ln(const Expr& arg);
  /// base^exponent with a constant exponent. Use general_pow for symbolic exponents.
  static Expr pow(const Expr& base, double exponent);
  /// a^b with symbolic b, lowered to exp(b*ln(a)).
  static Expr general_pow(const Expr& base, const Expr& exponent);
  static Expr piecewise(std::vector<PiecewiseBranch> branches, const Expr& otherwise);

  ExprKind kind() const noexcept;
  bool is_constant() const noexcept { return kind() == ExprKind::Constant; }
  bool is_constant(double v) const noexcept;
  bool is_zero() const noexcept { return is_constant(0.0); }

  double value() const;                 // Constant
  std::size_t index() const;            // Unknown
  const std::string& name() const;      // Parameter
  double exponent() const;              // Pow
  std::size_t operand_count() const noexcept;
  const Expr& operand(std::size_t i) const;  // Add/Sub/Mul/Div: 0,1; Pow/Neg/Exp/Ln: 0
  std::span<const PiecewiseBranch> branches() const;
  const Expr& otherwise() const;

  /// Identity of the underlying node; equal ids imply structural equality.
  const void* id() const noexcept { return node_.get(); }

 private:
  struct Node;
  explicit Expr(std::shared_ptr<const Node> node) : node_(std::move(node)) {}
  const Node& node() const noexcept { return *node_; }

  std::shared_ptr<const Node> node_;

  friend Expr operator+(const Expr&, const Expr&);
  friend Expr operator-(const Expr&, const Expr&);
  friend Expr operator*(const Expr&, const Expr&);
  friend Expr operator/(const Expr&, const Expr&);
  friend Expr operator-(const Expr&);
};

/// `lhs op bound`, e.g. z >= 0.7.
struct Condition {
  Expr lhs;
  Compare op = Compare::Less;
  double bound = 0.0;

  bool holds(double lhs_value) const noexcept { return compare_holds(op, lhs_value, bound); }
};

struct PiecewiseBranch {
  Condition when;
  Expr value;
};

// Arithmetic builders. They fold constants and drop additive zeros and
// multiplicative ones/zeros; no other simplification is attempted.
Expr operator+(const Expr& a, const Expr& b);
Expr operator-(const Expr& a, const Expr& b);
Expr operator*(const Expr& a, const Expr& b);
Expr operator/(const Expr& a, const Expr& b);
Expr operator-(const Expr& a);

/// Reference evaluator. Throws UnboundSymbol or NonFinite.
double eval(const Expr& e, std::span<const double> uu, const ParameterMap& params);

/// Exact partial derivative with respect to unknown `k` (0-based).
/// Piecewise expressions differentiate branch-wise with the same conditions.
Expr diff(const Expr& e, std::size_t k);

/// Sorted, duplicate-free list of unknown indices appearing anywhere in `e`.
std::vector<std::size_t> free_unknowns(const Expr& e);
/// Appends the unknowns of `e` into `out` without sorting.
void collect_unknowns(const Expr& e, std::vector<std::size_t>& out);

std::vector<std::string> free_parameters(const Expr& e);

/// Replaces every Unknown(j) by replacement(j). Shared subtrees are rewritten once.
Expr substitute(const Expr& e, const std::function<Expr(std::size_t)>& replacement);

bool structurally_equal(const Expr& a, const Expr& b);

/// Node count, counting shared subtrees once per occurrence.
std::size_t tree_size(const Expr& e);

using UnknownNamer = std::function<std::string(std::size_t)>;

/// Infix form accepted by parse_expression. Unknowns print as u1, u2, ...
/// unless a namer is supplied. Constants print with 17 significant digits.
std::string to_string(const Expr& e, const UnknownNamer& namer = {});

}  // namespace sparsedae
