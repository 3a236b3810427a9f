#pragma once

#include <cstddef>
#include <functional>
#include <optional>
#include <string>
#include <string_view>

#include "sparsedae/expr.hpp"

namespace sparsedae {

/// Maps an identifier to a 0-based unknown index; identifiers it rejects
/// become parameters.
using UnknownResolver = std::function<std::optional<std::size_t>(std::string_view)>;

/// Resolves u1, u2, ... to unknowns 0, 1, ...; the inverse of the default printer.
std::optional<std::size_t> default_unknown_resolver(std::string_view name);

/// Parses infix text: + - * / ^, unary minus, parentheses, exp(), ln() (alias
/// log()), and piecewise(cond1, e1, ..., default) where each condition compares
/// an expression against a constant with <, <=, > or >=.
/// `line` is only used to annotate ParseError messages.
Expr parse_expression(std::string_view text, const UnknownResolver& resolver = default_unknown_resolver,
                      std::size_t line = 0);

}  // namespace sparsedae
