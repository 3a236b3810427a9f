#include "sparsedae/tape.hpp"

#include <array>
#include <cmath>
#include <limits>

#include "sparsedae/errors.hpp"

namespace sparsedae {

std::size_t ParameterLayout::add(const std::string& name) {
  auto [it, inserted] = slots_.emplace(name, names_.size());
  if (inserted) names_.push_back(name);
  return it->second;
}

std::optional<std::size_t> ParameterLayout::find(std::string_view name) const {
  auto it = slots_.find(std::string(name));
  if (it == slots_.end()) return std::nullopt;
  return it->second;
}

std::vector<double> ParameterLayout::values_from(const ParameterMap& params) const {
  std::vector<double> out(names_.size(), std::numeric_limits<double>::quiet_NaN());
  for (std::size_t i = 0; i < names_.size(); ++i) {
    auto it = params.find(names_[i]);
    if (it != params.end()) out[i] = it->second;
  }
  return out;
}

CompiledExpr CompiledExpr::compile(const Expr& e, const ParameterLayout& layout) {
  CompiledExpr c;
  c.emit(e, layout, 1);
  return c;
}

void CompiledExpr::emit(const Expr& e, const ParameterLayout& layout, std::size_t depth) {
  max_depth_ = std::max(max_depth_, depth);
  auto unary = [&](Op op) {
    emit(e.operand(0), layout, depth);
    code_.push_back({op});
  };
  auto binary = [&](Op op) {
    emit(e.operand(0), layout, depth);
    emit(e.operand(1), layout, depth + 1);
    code_.push_back({op});
  };
  switch (e.kind()) {
    case ExprKind::Constant:
      code_.push_back({Op::Const, Compare::Less, 0, e.value()});
      return;
    case ExprKind::Unknown:
      code_.push_back({Op::Unknown, Compare::Less, static_cast<std::uint32_t>(e.index()), 0.0});
      return;
    case ExprKind::Parameter: {
      auto slot = layout.find(e.name());
      if (!slot) throw UnboundSymbol("parameter '" + e.name() + "' is not bound");
      code_.push_back({Op::Param, Compare::Less, static_cast<std::uint32_t>(*slot), 0.0});
      return;
    }
    case ExprKind::Add: binary(Op::Add); return;
    case ExprKind::Sub: binary(Op::Sub); return;
    case ExprKind::Mul: binary(Op::Mul); return;
    case ExprKind::Div: binary(Op::Div); return;
    case ExprKind::Neg: unary(Op::Neg); return;
    case ExprKind::Exp: unary(Op::Exp); return;
    case ExprKind::Ln: unary(Op::Ln); return;
    case ExprKind::Pow:
      emit(e.operand(0), layout, depth);
      if (e.exponent() == 2.0) {
        code_.push_back({Op::Square});
      } else {
        code_.push_back({Op::Pow, Compare::Less, 0, e.exponent()});
      }
      return;
    case ExprKind::Piecewise: {
      std::vector<std::size_t> exits;
      for (const auto& b : e.branches()) {
        emit(b.when.lhs, layout, depth);
        const std::size_t test = code_.size();
        code_.push_back({Op::JumpUnless, b.when.op, 0, b.when.bound});
        emit(b.value, layout, depth);
        exits.push_back(code_.size());
        code_.push_back({Op::Jump});
        code_[test].arg = static_cast<std::uint32_t>(code_.size());
      }
      emit(e.otherwise(), layout, depth);
      for (std::size_t j : exits) code_[j].arg = static_cast<std::uint32_t>(code_.size());
      return;
    }
  }
}

namespace {

[[noreturn]] void non_finite(const char* what) { throw NonFinite(std::string("non-finite result in ") + what); }

inline double check(double v, const char* what) {
  if (!std::isfinite(v)) non_finite(what);
  return v;
}

}  // namespace

double CompiledExpr::eval(std::span<const double> uu, std::span<const double> params) const {
  constexpr std::size_t kInline = 64;
  std::array<double, kInline> inline_stack{};
  std::vector<double> heap_stack;
  double* stack = inline_stack.data();
  if (max_depth_ > kInline) {
    heap_stack.resize(max_depth_);
    stack = heap_stack.data();
  }
  std::size_t sp = 0;
  const std::size_t n = code_.size();
  for (std::size_t pc = 0; pc < n; ++pc) {
    const Instr& in = code_[pc];
    switch (in.op) {
      case Op::Const:
        stack[sp++] = in.value;
        break;
      case Op::Unknown:
        if (in.arg >= uu.size()) {
          throw UnboundSymbol("unknown u" + std::to_string(in.arg + 1) + " is outside a vector of length " +
                              std::to_string(uu.size()));
        }
        stack[sp++] = check(uu[in.arg], "unknown value");
        break;
      case Op::Param:
        stack[sp++] = check(params[in.arg], "parameter value");
        break;
      case Op::Add:
        --sp;
        stack[sp - 1] = check(stack[sp - 1] + stack[sp], "sum");
        break;
      case Op::Sub:
        --sp;
        stack[sp - 1] = check(stack[sp - 1] - stack[sp], "difference");
        break;
      case Op::Mul:
        --sp;
        stack[sp - 1] = check(stack[sp - 1] * stack[sp], "product");
        break;
      case Op::Div:
        --sp;
        if (stack[sp] == 0.0) throw NonFinite("division by zero");
        stack[sp - 1] = check(stack[sp - 1] / stack[sp], "quotient");
        break;
      case Op::Pow:
        stack[sp - 1] = check(std::pow(stack[sp - 1], in.value), "power");
        break;
      case Op::Square:
        stack[sp - 1] = check(stack[sp - 1] * stack[sp - 1], "power");
        break;
      case Op::Neg:
        stack[sp - 1] = -stack[sp - 1];
        break;
      case Op::Exp:
        stack[sp - 1] = check(std::exp(stack[sp - 1]), "exp");
        break;
      case Op::Ln:
        if (!(stack[sp - 1] > 0.0)) throw NonFinite("ln of non-positive argument");
        stack[sp - 1] = std::log(stack[sp - 1]);
        break;
      case Op::JumpUnless:
        --sp;
        if (!compare_holds(in.cmp, stack[sp], in.value)) pc = in.arg - 1;
        break;
      case Op::Jump:
        pc = in.arg - 1;
        break;
    }
  }
  return stack[0];
}

}  // namespace sparsedae
