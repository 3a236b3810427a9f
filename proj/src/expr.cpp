#include "sparsedae/expr.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <unordered_map>
#include <utility>

#include "sparsedae/errors.hpp"

namespace sparsedae {

struct Expr::Node {
  ExprKind kind = ExprKind::Constant;
  double value = 0.0;  // constant value or Pow exponent
  std::size_t index = 0;
  std::string name;
  std::vector<Expr> operands;          // Piecewise: operands[0] is the default branch
  std::vector<PiecewiseBranch> branches;
};

namespace {

bool finite(double v) { return std::isfinite(v); }

}  // namespace

bool compare_holds(Compare op, double lhs, double bound) noexcept {
  switch (op) {
    case Compare::Less: return lhs < bound;
    case Compare::LessEqual: return lhs <= bound;
    case Compare::Greater: return lhs > bound;
    case Compare::GreaterEqual: return lhs >= bound;
  }
  return false;
}

const char* compare_symbol(Compare op) noexcept {
  switch (op) {
    case Compare::Less: return "<";
    case Compare::LessEqual: return "<=";
    case Compare::Greater: return ">";
    case Compare::GreaterEqual: return ">=";
  }
  return "?";
}

Expr::Expr() : Expr(0.0) {}

Expr::Expr(double value) {
  auto n = std::make_shared<Node>();
  n->kind = ExprKind::Constant;
  n->value = value;
  node_ = std::move(n);
}

Expr Expr::constant(double value) { return Expr(value); }

Expr Expr::unknown(std::size_t index) {
  auto n = std::make_shared<Node>();
  n->kind = ExprKind::Unknown;
  n->index = index;
  return Expr(std::shared_ptr<const Node>(std::move(n)));
}

Expr Expr::parameter(std::string name) {
  auto n = std::make_shared<Node>();
  n->kind = ExprKind::Parameter;
  n->name = std::move(name);
  return Expr(std::shared_ptr<const Node>(std::move(n)));
}

Expr Expr::exp(const Expr& arg) {
  if (arg.is_constant()) {
    const double v = std::exp(arg.value());
    if (finite(v)) return Expr(v);
  }
  auto n = std::make_shared<Node>();
  n->kind = ExprKind::Exp;
  n->operands = {arg};
  return Expr(std::shared_ptr<const Node>(std::move(n)));
}

Expr Expr::ln(const Expr& arg) {
  if (arg.is_constant() && arg.value() > 0.0) return Expr(std::log(arg.value()));
  auto n = std::make_shared<Node>();
  n->kind = ExprKind::Ln;
  n->operands = {arg};
  return Expr(std::shared_ptr<const Node>(std::move(n)));
}

Expr Expr::pow(const Expr& base, double exponent) {
  if (exponent == 0.0) return Expr(1.0);
  if (exponent == 1.0) return base;
  if (base.is_constant()) {
    const double v = std::pow(base.value(), exponent);
    if (finite(v)) return Expr(v);
  }
  auto n = std::make_shared<Node>();
  n->kind = ExprKind::Pow;
  n->value = exponent;
  n->operands = {base};
  return Expr(std::shared_ptr<const Node>(std::move(n)));
}

Expr Expr::general_pow(const Expr& base, const Expr& exponent) {
  if (exponent.is_constant()) return pow(base, exponent.value());
  return exp(exponent * ln(base));
}

Expr Expr::piecewise(std::vector<PiecewiseBranch> branches, const Expr& otherwise) {
  // Branches whose condition is decidable now collapse.
  std::vector<PiecewiseBranch> kept;
  for (auto& b : branches) {
    if (b.when.lhs.is_constant()) {
      if (b.when.holds(b.when.lhs.value())) {
        if (kept.empty()) return b.value;
        return piecewise(std::move(kept), b.value);
      }
      continue;
    }
    kept.push_back(std::move(b));
  }
  if (kept.empty()) return otherwise;
  if (otherwise.is_constant()) {
    const bool all_same = std::all_of(kept.begin(), kept.end(), [&](const PiecewiseBranch& b) {
      return b.value.is_constant(otherwise.value());
    });
    if (all_same) return otherwise;
  }
  auto n = std::make_shared<Node>();
  n->kind = ExprKind::Piecewise;
  n->operands = {otherwise};
  n->branches = std::move(kept);
  return Expr(std::shared_ptr<const Node>(std::move(n)));
}

ExprKind Expr::kind() const noexcept { return node_->kind; }

bool Expr::is_constant(double v) const noexcept {
  return node_->kind == ExprKind::Constant && node_->value == v;
}

double Expr::value() const { return node_->value; }
std::size_t Expr::index() const { return node_->index; }
const std::string& Expr::name() const { return node_->name; }
double Expr::exponent() const { return node_->value; }
std::size_t Expr::operand_count() const noexcept {
  return node_->kind == ExprKind::Piecewise ? 0 : node_->operands.size();
}
const Expr& Expr::operand(std::size_t i) const { return node_->operands.at(i); }
std::span<const PiecewiseBranch> Expr::branches() const { return node_->branches; }
const Expr& Expr::otherwise() const { return node_->operands.at(0); }

Expr operator+(const Expr& a, const Expr& b) {
  if (a.is_constant() && b.is_constant()) return Expr(a.value() + b.value());
  if (a.is_zero()) return b;
  if (b.is_zero()) return a;
  auto n = std::make_shared<Expr::Node>();
  n->kind = ExprKind::Add;
  n->operands = {a, b};
  return Expr(std::shared_ptr<const Expr::Node>(std::move(n)));
}

Expr operator-(const Expr& a, const Expr& b) {
  if (a.is_constant() && b.is_constant()) return Expr(a.value() - b.value());
  if (b.is_zero()) return a;
  if (a.is_zero()) return -b;
  auto n = std::make_shared<Expr::Node>();
  n->kind = ExprKind::Sub;
  n->operands = {a, b};
  return Expr(std::shared_ptr<const Expr::Node>(std::move(n)));
}

Expr operator*(const Expr& a, const Expr& b) {
  if (a.is_constant() && b.is_constant()) return Expr(a.value() * b.value());
  if (a.is_zero() || b.is_zero()) return Expr(0.0);
  if (a.is_constant(1.0)) return b;
  if (b.is_constant(1.0)) return a;
  if (a.is_constant(-1.0)) return -b;
  if (b.is_constant(-1.0)) return -a;
  if (b.kind() == ExprKind::Neg) return -(a * b.operand(0));
  // c * (d / x) -> (c*d) / x keeps derivative forms like -100/u tidy.
  if (a.is_constant() && b.kind() == ExprKind::Div && b.operand(0).is_constant()) {
    return Expr(a.value() * b.operand(0).value()) / b.operand(1);
  }
  auto n = std::make_shared<Expr::Node>();
  n->kind = ExprKind::Mul;
  n->operands = {a, b};
  return Expr(std::shared_ptr<const Expr::Node>(std::move(n)));
}

Expr operator/(const Expr& a, const Expr& b) {
  if (a.is_zero()) return Expr(0.0);
  if (b.is_constant(1.0)) return a;
  if (a.is_constant() && b.is_constant() && b.value() != 0.0) {
    const double v = a.value() / b.value();
    if (std::isfinite(v)) return Expr(v);
  }
  auto n = std::make_shared<Expr::Node>();
  n->kind = ExprKind::Div;
  n->operands = {a, b};
  return Expr(std::shared_ptr<const Expr::Node>(std::move(n)));
}

Expr operator-(const Expr& a) {
  if (a.is_constant()) return Expr(-a.value());
  if (a.kind() == ExprKind::Neg) return a.operand(0);
  auto n = std::make_shared<Expr::Node>();
  n->kind = ExprKind::Neg;
  n->operands = {a};
  return Expr(std::shared_ptr<const Expr::Node>(std::move(n)));
}

// ---------------------------------------------------------------------------
// Evaluation

namespace {

double checked(double v, const char* what) {
  if (!std::isfinite(v)) throw NonFinite(std::string("non-finite result in ") + what);
  return v;
}

double eval_node(const Expr& e, std::span<const double> uu, const ParameterMap& params) {
  switch (e.kind()) {
    case ExprKind::Constant:
      return e.value();
    case ExprKind::Unknown: {
      if (e.index() >= uu.size()) {
        throw UnboundSymbol("unknown u" + std::to_string(e.index() + 1) + " is outside a vector of length " +
                            std::to_string(uu.size()));
      }
      return checked(uu[e.index()], "unknown value");
    }
    case ExprKind::Parameter: {
      auto it = params.find(e.name());
      if (it == params.end()) throw UnboundSymbol("parameter '" + e.name() + "' is not bound");
      return checked(it->second, "parameter value");
    }
    case ExprKind::Add:
      return checked(eval_node(e.operand(0), uu, params) + eval_node(e.operand(1), uu, params), "sum");
    case ExprKind::Sub:
      return checked(eval_node(e.operand(0), uu, params) - eval_node(e.operand(1), uu, params), "difference");
    case ExprKind::Mul:
      return checked(eval_node(e.operand(0), uu, params) * eval_node(e.operand(1), uu, params), "product");
    case ExprKind::Div: {
      const double num = eval_node(e.operand(0), uu, params);
      const double den = eval_node(e.operand(1), uu, params);
      if (den == 0.0) throw NonFinite("division by zero");
      return checked(num / den, "quotient");
    }
    case ExprKind::Pow:
      return checked(std::pow(eval_node(e.operand(0), uu, params), e.exponent()), "power");
    case ExprKind::Neg:
      return -eval_node(e.operand(0), uu, params);
    case ExprKind::Exp:
      return checked(std::exp(eval_node(e.operand(0), uu, params)), "exp");
    case ExprKind::Ln: {
      const double x = eval_node(e.operand(0), uu, params);
      if (!(x > 0.0)) throw NonFinite("ln of non-positive argument");
      return std::log(x);
    }
    case ExprKind::Piecewise: {
      for (const auto& b : e.branches()) {
        if (b.when.holds(eval_node(b.when.lhs, uu, params))) return eval_node(b.value, uu, params);
      }
      return eval_node(e.otherwise(), uu, params);
    }
  }
  return 0.0;
}

}  // namespace

double eval(const Expr& e, std::span<const double> uu, const ParameterMap& params) {
  return eval_node(e, uu, params);
}

// ---------------------------------------------------------------------------
// Structure queries

void collect_unknowns(const Expr& e, std::vector<std::size_t>& out) {
  switch (e.kind()) {
    case ExprKind::Constant:
    case ExprKind::Parameter:
      return;
    case ExprKind::Unknown:
      out.push_back(e.index());
      return;
    case ExprKind::Piecewise:
      for (const auto& b : e.branches()) {
        collect_unknowns(b.when.lhs, out);
        collect_unknowns(b.value, out);
      }
      collect_unknowns(e.otherwise(), out);
      return;
    default:
      for (std::size_t i = 0; i < e.operand_count(); ++i) collect_unknowns(e.operand(i), out);
  }
}

std::vector<std::size_t> free_unknowns(const Expr& e) {
  std::vector<std::size_t> out;
  collect_unknowns(e, out);
  std::sort(out.begin(), out.end());
  out.erase(std::unique(out.begin(), out.end()), out.end());
  return out;
}

namespace {

void collect_parameters(const Expr& e, std::vector<std::string>& out) {
  switch (e.kind()) {
    case ExprKind::Constant:
    case ExprKind::Unknown:
      return;
    case ExprKind::Parameter:
      out.push_back(e.name());
      return;
    case ExprKind::Piecewise:
      for (const auto& b : e.branches()) {
        collect_parameters(b.when.lhs, out);
        collect_parameters(b.value, out);
      }
      collect_parameters(e.otherwise(), out);
      return;
    default:
      for (std::size_t i = 0; i < e.operand_count(); ++i) collect_parameters(e.operand(i), out);
  }
}

bool contains_unknown(const Expr& e, std::size_t k) {
  switch (e.kind()) {
    case ExprKind::Constant:
    case ExprKind::Parameter:
      return false;
    case ExprKind::Unknown:
      return e.index() == k;
    case ExprKind::Piecewise:
      for (const auto& b : e.branches()) {
        if (contains_unknown(b.value, k)) return true;
      }
      return contains_unknown(e.otherwise(), k);
    default:
      for (std::size_t i = 0; i < e.operand_count(); ++i) {
        if (contains_unknown(e.operand(i), k)) return true;
      }
      return false;
  }
}

}  // namespace

std::vector<std::string> free_parameters(const Expr& e) {
  std::vector<std::string> out;
  collect_parameters(e, out);
  std::sort(out.begin(), out.end());
  out.erase(std::unique(out.begin(), out.end()), out.end());
  return out;
}

std::size_t tree_size(const Expr& e) {
  std::size_t n = 1;
  if (e.kind() == ExprKind::Piecewise) {
    for (const auto& b : e.branches()) n += tree_size(b.when.lhs) + tree_size(b.value);
    return n + tree_size(e.otherwise());
  }
  for (std::size_t i = 0; i < e.operand_count(); ++i) n += tree_size(e.operand(i));
  return n;
}

// ---------------------------------------------------------------------------
// Differentiation

Expr diff(const Expr& e, std::size_t k) {
  // Conditions of a piecewise do not contribute to the derivative, so only
  // branch values are searched here.
  if (!contains_unknown(e, k)) return Expr(0.0);
  switch (e.kind()) {
    case ExprKind::Constant:
    case ExprKind::Parameter:
      return Expr(0.0);
    case ExprKind::Unknown:
      return Expr(e.index() == k ? 1.0 : 0.0);
    case ExprKind::Add:
      return diff(e.operand(0), k) + diff(e.operand(1), k);
    case ExprKind::Sub:
      return diff(e.operand(0), k) - diff(e.operand(1), k);
    case ExprKind::Mul: {
      const Expr& a = e.operand(0);
      const Expr& b = e.operand(1);
      return diff(a, k) * b + a * diff(b, k);
    }
    case ExprKind::Div: {
      const Expr& a = e.operand(0);
      const Expr& b = e.operand(1);
      const Expr da = diff(a, k);
      const Expr db = diff(b, k);
      if (db.is_zero()) return da / b;
      return da / b - (a * db) / Expr::pow(b, 2.0);
    }
    case ExprKind::Pow: {
      const double n = e.exponent();
      return Expr(n) * Expr::pow(e.operand(0), n - 1.0) * diff(e.operand(0), k);
    }
    case ExprKind::Neg:
      return -diff(e.operand(0), k);
    case ExprKind::Exp:
      return e * diff(e.operand(0), k);
    case ExprKind::Ln:
      return diff(e.operand(0), k) / e.operand(0);
    case ExprKind::Piecewise: {
      std::vector<PiecewiseBranch> branches;
      branches.reserve(e.branches().size());
      for (const auto& b : e.branches()) branches.push_back({b.when, diff(b.value, k)});
      return Expr::piecewise(std::move(branches), diff(e.otherwise(), k));
    }
  }
  return Expr(0.0);
}

// ---------------------------------------------------------------------------
// Substitution

namespace {

class Substituter {
 public:
  explicit Substituter(const std::function<Expr(std::size_t)>& replacement) : replacement_(replacement) {}

  Expr operator()(const Expr& e) {
    auto it = memo_.find(e.id());
    if (it != memo_.end()) return it->second;
    Expr out = rewrite(e);
    memo_.emplace(e.id(), out);
    return out;
  }

 private:
  Expr rewrite(const Expr& e) {
    switch (e.kind()) {
      case ExprKind::Constant:
      case ExprKind::Parameter:
        return e;
      case ExprKind::Unknown:
        return replacement_(e.index());
      case ExprKind::Add: return (*this)(e.operand(0)) + (*this)(e.operand(1));
      case ExprKind::Sub: return (*this)(e.operand(0)) - (*this)(e.operand(1));
      case ExprKind::Mul: return (*this)(e.operand(0)) * (*this)(e.operand(1));
      case ExprKind::Div: return (*this)(e.operand(0)) / (*this)(e.operand(1));
      case ExprKind::Pow: return Expr::pow((*this)(e.operand(0)), e.exponent());
      case ExprKind::Neg: return -(*this)(e.operand(0));
      case ExprKind::Exp: return Expr::exp((*this)(e.operand(0)));
      case ExprKind::Ln: return Expr::ln((*this)(e.operand(0)));
      case ExprKind::Piecewise: {
        std::vector<PiecewiseBranch> branches;
        for (const auto& b : e.branches()) {
          branches.push_back({Condition{(*this)(b.when.lhs), b.when.op, b.when.bound}, (*this)(b.value)});
        }
        return Expr::piecewise(std::move(branches), (*this)(e.otherwise()));
      }
    }
    return e;
  }

  const std::function<Expr(std::size_t)>& replacement_;
  std::unordered_map<const void*, Expr> memo_;
};

}  // namespace

Expr substitute(const Expr& e, const std::function<Expr(std::size_t)>& replacement) {
  Substituter s(replacement);
  return s(e);
}

bool structurally_equal(const Expr& a, const Expr& b) {
  if (a.id() == b.id()) return true;
  if (a.kind() != b.kind()) return false;
  switch (a.kind()) {
    case ExprKind::Constant:
      return a.value() == b.value();
    case ExprKind::Unknown:
      return a.index() == b.index();
    case ExprKind::Parameter:
      return a.name() == b.name();
    case ExprKind::Pow:
      return a.exponent() == b.exponent() && structurally_equal(a.operand(0), b.operand(0));
    case ExprKind::Piecewise: {
      if (a.branches().size() != b.branches().size()) return false;
      for (std::size_t i = 0; i < a.branches().size(); ++i) {
        const auto& x = a.branches()[i];
        const auto& y = b.branches()[i];
        if (x.when.op != y.when.op || x.when.bound != y.when.bound) return false;
        if (!structurally_equal(x.when.lhs, y.when.lhs) || !structurally_equal(x.value, y.value)) return false;
      }
      return structurally_equal(a.otherwise(), b.otherwise());
    }
    default:
      for (std::size_t i = 0; i < a.operand_count(); ++i) {
        if (!structurally_equal(a.operand(i), b.operand(i))) return false;
      }
      return true;
  }
}

// ---------------------------------------------------------------------------
// Printing

namespace {

constexpr int kPrecSum = 1;
constexpr int kPrecProduct = 2;
constexpr int kPrecUnary = 3;
constexpr int kPrecPower = 4;
constexpr int kPrecAtom = 5;

std::string format_number(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

int precedence(const Expr& e) {
  switch (e.kind()) {
    case ExprKind::Constant: return e.value() < 0.0 || std::signbit(e.value()) ? kPrecUnary : kPrecAtom;
    case ExprKind::Add:
    case ExprKind::Sub: return kPrecSum;
    case ExprKind::Mul:
    case ExprKind::Div: return kPrecProduct;
    case ExprKind::Neg: return kPrecUnary;
    case ExprKind::Pow: return kPrecPower;
    default: return kPrecAtom;
  }
}

class Printer {
 public:
  explicit Printer(const UnknownNamer& namer) : namer_(namer) {}

  void print(const Expr& e, int min_prec, std::string& out) const {
    const bool parens = precedence(e) < min_prec;
    if (parens) out += '(';
    print_bare(e, out);
    if (parens) out += ')';
  }

 private:
  void print_bare(const Expr& e, std::string& out) const {
    switch (e.kind()) {
      case ExprKind::Constant:
        out += format_number(e.value());
        return;
      case ExprKind::Unknown:
        out += namer_ ? namer_(e.index()) : "u" + std::to_string(e.index() + 1);
        return;
      case ExprKind::Parameter:
        out += e.name();
        return;
      case ExprKind::Add:
      case ExprKind::Sub:
        print(e.operand(0), kPrecSum, out);
        out += e.kind() == ExprKind::Add ? " + " : " - ";
        print(e.operand(1), kPrecProduct, out);
        return;
      case ExprKind::Mul:
      case ExprKind::Div:
        print(e.operand(0), kPrecProduct, out);
        out += e.kind() == ExprKind::Mul ? "*" : "/";
        print(e.operand(1), kPrecUnary, out);
        return;
      case ExprKind::Neg:
        out += '-';
        print(e.operand(0), kPrecUnary, out);
        return;
      case ExprKind::Pow:
        print(e.operand(0), kPrecAtom, out);
        out += '^';
        out += format_number(e.exponent());
        return;
      case ExprKind::Exp:
      case ExprKind::Ln:
        out += e.kind() == ExprKind::Exp ? "exp(" : "ln(";
        print(e.operand(0), 0, out);
        out += ')';
        return;
      case ExprKind::Piecewise:
        out += "piecewise(";
        for (const auto& b : e.branches()) {
          print(b.when.lhs, 0, out);
          out += ' ';
          out += compare_symbol(b.when.op);
          out += ' ';
          out += format_number(b.when.bound);
          out += ", ";
          print(b.value, 0, out);
          out += ", ";
        }
        print(e.otherwise(), 0, out);
        out += ')';
        return;
    }
  }

  const UnknownNamer& namer_;
};

}  // namespace

std::string to_string(const Expr& e, const UnknownNamer& namer) {
  std::string out;
  Printer(namer).print(e, 0, out);
  return out;
}

}  // namespace sparsedae
