#pragma once

// Flattened postfix form of an Expr with parameters resolved to slots. This is
// what the solver evaluates in its inner loops; `eval` in expr.hpp remains the
// reference semantics and the two are checked against each other in tests.

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "sparsedae/expr.hpp"

namespace sparsedae {

/// Assigns each parameter name a dense slot index.
class ParameterLayout {
 public:
  std::size_t add(const std::string& name);
  std::optional<std::size_t> find(std::string_view name) const;
  std::size_t size() const noexcept { return names_.size(); }
  const std::string& name(std::size_t slot) const { return names_.at(slot); }

  /// Slot values taken from a name map; names absent from the map stay NaN
  /// so that evaluation reports them.
  std::vector<double> values_from(const ParameterMap& params) const;

 private:
  std::vector<std::string> names_;
  std::unordered_map<std::string, std::size_t> slots_;
};

class CompiledExpr {
 public:
  CompiledExpr() = default;

  /// Throws UnboundSymbol if a parameter has no slot in `layout`.
  static CompiledExpr compile(const Expr& e, const ParameterLayout& layout);

  /// Throws NonFinite on domain errors or non-finite intermediate values, and
  /// UnboundSymbol when an unknown index is outside `uu`.
  double eval(std::span<const double> uu, std::span<const double> params) const;

  std::size_t size() const noexcept { return code_.size(); }

 private:
  enum class Op : std::uint8_t {
    Const,
    Unknown,
    Param,
    Add,
    Sub,
    Mul,
    Div,
    Pow,
    Square,
    Neg,
    Exp,
    Ln,
    JumpUnless,  // pop x; if !(x cmp bound) jump to target
    Jump,
  };

  struct Instr {
    Op op;
    Compare cmp = Compare::Less;
    std::uint32_t arg = 0;  // unknown index, parameter slot or jump target
    double value = 0.0;     // constant, exponent or bound
  };

  void emit(const Expr& e, const ParameterLayout& layout, std::size_t depth);

  std::vector<Instr> code_;
  std::size_t max_depth_ = 0;
};

}  // namespace sparsedae
