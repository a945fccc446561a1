#pragma once

#include <memory>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace rearr {

/// Small arithmetic expression language used in config files:
/// `+ - * / ^`, parentheses, `min max abs sqrt exp log sin cos tan`,
/// constants `pi` and `e`, and a caller-chosen list of variable names.
class Expression {
 public:
  Expression(std::string_view text, std::vector<std::string> variables);

  double operator()(std::span<const double> values) const;
  double operator()(double value) const;

  const std::string& text() const { return text_; }
  const std::vector<std::string>& variables() const { return variables_; }

  struct Node;

 private:
  std::string text_;
  std::vector<std::string> variables_;
  std::shared_ptr<const Node> root_;
};

/// Variable names for a cylinder of dimension n: x1, ..., x{n-1}, y.
std::vector<std::string> cylinder_variables(int dimension);

}  // namespace rearr
