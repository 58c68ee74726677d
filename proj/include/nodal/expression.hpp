#pragma once

#include <memory>
#include <string>
#include <string_view>

namespace nodal {

// Closed-form expression in the single variable t. Supports numeric literals,
// "t", "pi", + - * / ^ (integer exponents), unary minus, parentheses and the
// functions cot(...) and tan(...). This is what custom mean-curvature profiles
// are written in: a closed form keeps the endpoint asymptotics evaluable,
// which tabulated data cannot do.
class Expression {
public:
    Expression() = default;

    // Throws InvalidSpecError with a position marker on bad input.
    static Expression parse(std::string_view text);

    double eval(double t) const;
    const std::string& text() const { return text_; }
    bool empty() const { return node_ == nullptr; }

    struct Node;

private:
    std::shared_ptr<const Node> node_;
    std::string text_;
};

}  // namespace nodal
