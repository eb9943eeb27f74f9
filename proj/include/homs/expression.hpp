#pragma once

#include <memory>
#include <string>
#include <vector>

namespace homs {

/// Scalar function of (x, y, t) parsed from text such as "1e5", "10", or
/// "sin(pi*x)*sin(pi*y)*exp(-t)". Supports + - * / ^, parentheses, the constant
/// pi and sin cos tan exp log sqrt abs tanh.
class ScalarField {
public:
    ScalarField() : ScalarField(0.0) {}
    ScalarField(double constant);  // NOLINT(google-explicit-constructor)

    /// Throws InvalidArgument with the position of the first syntax error.
    static ScalarField parse(const std::string& text);

    double operator()(double x, double y, double t) const;

    bool is_constant() const { return constant_; }
    double constant_value() const { return value_; }
    const std::string& text() const { return text_; }

    struct Node;

private:
    std::string text_;
    bool constant_ = true;
    double value_ = 0.0;
    std::shared_ptr<const Node> root_;
};

}  // namespace homs
