#pragma once

#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace mkc {

// Small arithmetic expression compiler used for the user-supplied fields of a
// scenario (drifts, diffusion coefficients, jump maps, rate functions).
//
// Grammar: numbers, the named variables, `pi`, + - * / ^ (right associative),
// unary minus, parentheses and the functions
//   sin cos tan asin acos atan sinh cosh tanh exp log log1p expm1 sqrt abs sign step
//   min(a,b) max(a,b) pow(a,b) atan2(a,b)
// Compiled to a flat stack program with constant folding.
class Expression {
public:
    Expression() = default;

    static Expression compile(std::string_view source, const std::vector<std::string>& variables);

    double operator()(std::span<const double> values) const noexcept;
    double operator()(double x) const noexcept { return (*this)(std::span<const double>(&x, 1)); }
    double operator()(double x, double y) const noexcept
    {
        const double v[2] = {x, y};
        return (*this)(std::span<const double>(v, 2));
    }

    const std::string& source() const noexcept { return source_; }
    std::size_t arity() const noexcept { return arity_; }
    bool is_constant() const noexcept { return code_.size() == 1 && code_[0].op == Op::Constant; }
    double constant_value() const noexcept { return code_.empty() ? 0.0 : code_[0].value; }

    enum class Op : unsigned char {
        Constant, Variable, Add, Sub, Mul, Div, Pow, Neg,
        Sin, Cos, Tan, Asin, Acos, Atan, Sinh, Cosh, Tanh, Exp, Log, Log1p, Expm1, Sqrt, Abs, Sign, Step,
        Min, Max, Atan2,
    };

    struct Instruction {
        Op op;
        int index = 0;
        double value = 0.0;
    };

private:
    std::string source_;
    std::size_t arity_ = 0;
    std::vector<Instruction> code_;
};

} // namespace mkc
