#include "mkc/expression.hpp"

#include <array>
#include <cctype>
#include <cmath>
#include <memory>
#include <numbers>
#include <optional>

#include "mkc/error.hpp"

namespace mkc {

namespace {

using Op = Expression::Op;

constexpr std::size_t kMaxStack = 64;

struct Node {
    Op op;
    int index = 0;
    double value = 0.0;
    std::vector<std::unique_ptr<Node>> args;
};

using NodePtr = std::unique_ptr<Node>;

NodePtr make_constant(double v)
{
    auto n = std::make_unique<Node>();
    n->op = Op::Constant;
    n->value = v;
    return n;
}

int arg_count(Op op)
{
    switch (op) {
    case Op::Constant:
    case Op::Variable: return 0;
    case Op::Add:
    case Op::Sub:
    case Op::Mul:
    case Op::Div:
    case Op::Pow:
    case Op::Min:
    case Op::Max:
    case Op::Atan2: return 2;
    default: return 1;
    }
}

double apply(Op op, double a, double b) noexcept
{
    switch (op) {
    case Op::Add: return a + b;
    case Op::Sub: return a - b;
    case Op::Mul: return a * b;
    case Op::Div: return a / b;
    case Op::Pow: return std::pow(a, b);
    case Op::Neg: return -a;
    case Op::Sin: return std::sin(a);
    case Op::Cos: return std::cos(a);
    case Op::Tan: return std::tan(a);
    case Op::Asin: return std::asin(a);
    case Op::Acos: return std::acos(a);
    case Op::Atan: return std::atan(a);
    case Op::Sinh: return std::sinh(a);
    case Op::Cosh: return std::cosh(a);
    case Op::Tanh: return std::tanh(a);
    case Op::Exp: return std::exp(a);
    case Op::Log: return std::log(a);
    case Op::Log1p: return std::log1p(a);
    case Op::Expm1: return std::expm1(a);
    case Op::Sqrt: return std::sqrt(a);
    case Op::Abs: return std::fabs(a);
    case Op::Sign: return (a > 0.0) - (a < 0.0);
    case Op::Step: return a >= 0.0 ? 1.0 : 0.0;
    case Op::Min: return std::fmin(a, b);
    case Op::Max: return std::fmax(a, b);
    case Op::Atan2: return std::atan2(a, b);
    case Op::Constant:
    case Op::Variable: break;
    }
    return 0.0;
}

std::optional<Op> function_op(std::string_view name)
{
    static constexpr std::array<std::pair<std::string_view, Op>, 23> table{{
        {"sin", Op::Sin}, {"cos", Op::Cos}, {"tan", Op::Tan}, {"asin", Op::Asin}, {"acos", Op::Acos},
        {"atan", Op::Atan}, {"sinh", Op::Sinh}, {"cosh", Op::Cosh}, {"tanh", Op::Tanh}, {"exp", Op::Exp},
        {"log", Op::Log}, {"log1p", Op::Log1p}, {"expm1", Op::Expm1}, {"sqrt", Op::Sqrt}, {"abs", Op::Abs},
        {"sign", Op::Sign}, {"step", Op::Step}, {"min", Op::Min}, {"max", Op::Max}, {"pow", Op::Pow},
        {"atan2", Op::Atan2}, {"ln", Op::Log}, {"fabs", Op::Abs},
    }};
    for (const auto& [key, op] : table) {
        if (key == name) {
            return op;
        }
    }
    return std::nullopt;
}

class Parser {
public:
    Parser(std::string_view text, const std::vector<std::string>& variables) : text_(text), variables_(variables) {}

    NodePtr parse()
    {
        auto node = parse_sum();
        skip_space();
        if (pos_ != text_.size()) {
            error("unexpected '" + std::string(1, text_[pos_]) + "'");
        }
        return node;
    }

private:
    [[noreturn]] void error(const std::string& what) const
    {
        fail(ErrorKind::InvalidParameter,
             "expression \"" + std::string(text_) + "\" at offset " + std::to_string(pos_) + ": " + what);
    }

    void skip_space()
    {
        while (pos_ < text_.size() && std::isspace(static_cast<unsigned char>(text_[pos_]))) {
            ++pos_;
        }
    }

    bool accept(char c)
    {
        skip_space();
        if (pos_ < text_.size() && text_[pos_] == c) {
            ++pos_;
            return true;
        }
        return false;
    }

    NodePtr binary(Op op, NodePtr lhs, NodePtr rhs)
    {
        auto n = std::make_unique<Node>();
        n->op = op;
        n->args.push_back(std::move(lhs));
        n->args.push_back(std::move(rhs));
        return n;
    }

    NodePtr parse_sum()
    {
        auto lhs = parse_product();
        for (;;) {
            if (accept('+')) {
                lhs = binary(Op::Add, std::move(lhs), parse_product());
            } else if (accept('-')) {
                lhs = binary(Op::Sub, std::move(lhs), parse_product());
            } else {
                return lhs;
            }
        }
    }

    NodePtr parse_product()
    {
        auto lhs = parse_unary();
        for (;;) {
            if (accept('*')) {
                lhs = binary(Op::Mul, std::move(lhs), parse_unary());
            } else if (accept('/')) {
                lhs = binary(Op::Div, std::move(lhs), parse_unary());
            } else {
                return lhs;
            }
        }
    }

    NodePtr parse_unary()
    {
        if (accept('-')) {
            auto n = std::make_unique<Node>();
            n->op = Op::Neg;
            n->args.push_back(parse_unary());
            return n;
        }
        if (accept('+')) {
            return parse_unary();
        }
        return parse_power();
    }

    NodePtr parse_power()
    {
        auto base = parse_primary();
        if (accept('^')) {
            return binary(Op::Pow, std::move(base), parse_unary());
        }
        return base;
    }

    NodePtr parse_primary()
    {
        skip_space();
        if (pos_ >= text_.size()) {
            error("unexpected end of input");
        }
        const char c = text_[pos_];
        if (c == '(') {
            ++pos_;
            auto inner = parse_sum();
            if (!accept(')')) {
                error("expected ')'");
            }
            return inner;
        }
        if (std::isdigit(static_cast<unsigned char>(c)) || c == '.') {
            return parse_number();
        }
        if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') {
            const std::size_t start = pos_;
            while (pos_ < text_.size()
                   && (std::isalnum(static_cast<unsigned char>(text_[pos_])) || text_[pos_] == '_')) {
                ++pos_;
            }
            const std::string name(text_.substr(start, pos_ - start));
            skip_space();
            if (pos_ < text_.size() && text_[pos_] == '(') {
                ++pos_;
                const auto op = function_op(name);
                if (!op) {
                    error("unknown function '" + name + "'");
                }
                auto n = std::make_unique<Node>();
                n->op = *op;
                const int want = arg_count(*op);
                for (int k = 0; k < want; ++k) {
                    if (k > 0 && !accept(',')) {
                        error("expected ',' in call to " + name);
                    }
                    n->args.push_back(parse_sum());
                }
                if (!accept(')')) {
                    error("expected ')' after arguments of " + name);
                }
                return n;
            }
            for (std::size_t k = 0; k < variables_.size(); ++k) {
                if (variables_[k] == name) {
                    auto n = std::make_unique<Node>();
                    n->op = Op::Variable;
                    n->index = static_cast<int>(k);
                    return n;
                }
            }
            if (name == "pi") {
                return make_constant(std::numbers::pi);
            }
            error("unknown identifier '" + name + "'");
        }
        error("unexpected '" + std::string(1, c) + "'");
    }

    NodePtr parse_number()
    {
        const std::string rest(text_.substr(pos_));
        std::size_t used = 0;
        double value = 0.0;
        try {
            value = std::stod(rest, &used);
        } catch (const std::exception&) {
            error("malformed number");
        }
        pos_ += used;
        return make_constant(value);
    }

    std::string_view text_;
    const std::vector<std::string>& variables_;
    std::size_t pos_ = 0;
};

void fold(Node& node)
{
    bool all_constant = true;
    for (auto& arg : node.args) {
        fold(*arg);
        all_constant = all_constant && arg->op == Op::Constant;
    }
    if (!node.args.empty() && all_constant) {
        const double a = node.args[0]->value;
        const double b = node.args.size() > 1 ? node.args[1]->value : 0.0;
        node.value = apply(node.op, a, b);
        node.op = Op::Constant;
        node.args.clear();
    }
}

std::size_t emit(const Node& node, std::vector<Expression::Instruction>& code)
{
    std::size_t depth = 0;
    std::size_t slot = 0;
    for (const auto& arg : node.args) {
        depth = std::max(depth, slot + emit(*arg, code));
        ++slot;
    }
    code.push_back({node.op, node.index, node.value});
    return std::max<std::size_t>(depth, 1);
}

} // namespace

Expression Expression::compile(std::string_view source, const std::vector<std::string>& variables)
{
    Parser parser(source, variables);
    NodePtr root = parser.parse();
    fold(*root);
    Expression expr;
    expr.source_ = std::string(source);
    expr.arity_ = variables.size();
    const std::size_t depth = emit(*root, expr.code_);
    require(depth <= kMaxStack, ErrorKind::InvalidParameter, "expression nests too deeply: " + expr.source_);
    return expr;
}

double Expression::operator()(std::span<const double> values) const noexcept
{
    std::array<double, kMaxStack> stack;
    std::size_t top = 0;
    for (const Instruction& ins : code_) {
        switch (ins.op) {
        case Op::Constant:
            stack[top++] = ins.value;
            break;
        case Op::Variable:
            stack[top++] = values[static_cast<std::size_t>(ins.index)];
            break;
        case Op::Add: --top; stack[top - 1] += stack[top]; break;
        case Op::Sub: --top; stack[top - 1] -= stack[top]; break;
        case Op::Mul: --top; stack[top - 1] *= stack[top]; break;
        case Op::Div: --top; stack[top - 1] /= stack[top]; break;
        case Op::Pow:
        case Op::Min:
        case Op::Max:
        case Op::Atan2:
            --top;
            stack[top - 1] = apply(ins.op, stack[top - 1], stack[top]);
            break;
        default:
            stack[top - 1] = apply(ins.op, stack[top - 1], 0.0);
            break;
        }
    }
    return top == 0 ? 0.0 : stack[0];
}

} // namespace mkc
