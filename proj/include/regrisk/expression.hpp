#pragma once

#include <memory>
#include <string>

namespace regrisk {

// Small arithmetic language in one variable y:
//   expr    := term (('+' | '-') term)*
//   term    := unary (('*' | '/') unary)*
//   unary   := ('+' | '-') unary | power
//   power   := primary ('^' unary)?          (right associative)
//   primary := number | 'y' | 'pi' | func '(' expr ')' | '(' expr ')'
//   func    := exp | log | sqrt | erf | phi | Phi
// phi and Phi are the standard normal density and distribution function.
class Expression {
public:
    struct Node;

    // line/column_offset only shift the positions reported in ParseError.
    static Expression parse(const std::string& text, int line = 1, int column_offset = 0);

    double operator()(double y) const;

private:
    explicit Expression(std::shared_ptr<const Node> root) : root_(std::move(root)) {}
    std::shared_ptr<const Node> root_;
};

}  // namespace regrisk
