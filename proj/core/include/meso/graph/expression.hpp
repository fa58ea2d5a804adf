#pragma once

#include <memory>
#include <string>
#include <string_view>
#include <vector>

#include "meso/table.hpp"

namespace meso::graph {

/// Pointwise arithmetic over named columns: numbers, identifiers, + − * / ^, unary minus,
/// parentheses and the functions sin cos tan exp log sqrt abs tanh. `^` is right-associative
/// and binds tighter than unary minus.
class Expression {
 public:
  /// ConfigError with the character offset on malformed input.
  static Expression parse(std::string_view text);

  /// Identifiers referenced, in first-use order.
  const std::vector<std::string>& variables() const noexcept { return variables_; }
  /// `values` are aligned with variables().
  double evaluate(const std::vector<double>& values) const;
  const std::string& text() const noexcept { return text_; }

  struct Node;

 private:
  std::shared_ptr<const Node> root_;
  std::vector<std::string> variables_;
  std::string text_;
};

/// Appends `label` = expression evaluated row by row. Missing columns raise DataError naming them.
Table algebraic_op(const Table& table, std::string_view expression, const std::string& label);

}  // namespace meso::graph
