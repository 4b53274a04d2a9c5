/*
 * Copyright 2026 The attrikit Authors.
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *     https://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

#include <cctype>
#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include <fmt/format.h>

#include "attrikit/error.hpp"
#include "attrikit/expr.hpp"

namespace attrikit {
namespace {

double fold_constant(const Expr& e) {
  auto arg = [&](std::size_t i) { return fold_constant(e.args[i]); };
  switch (e.op) {
    case Op::kConstant:
      return e.value;
    case Op::kNeg:
      return -arg(0);
    case Op::kAdd:
      return arg(0) + arg(1);
    case Op::kSub:
      return arg(0) - arg(1);
    case Op::kMul:
      return arg(0) * arg(1);
    case Op::kDiv:
      return arg(0) / arg(1);
    case Op::kPow:
      return std::pow(arg(0), e.value);
    case Op::kExp:
      return std::exp(arg(0));
    case Op::kSqrt:
      return std::sqrt(arg(0));
    case Op::kAbs:
      return std::fabs(arg(0));
    case Op::kRelu:
      return std::max(arg(0), 0.0);
    case Op::kMax:
    case Op::kMin: {
      double best = arg(0);
      for (std::size_t i = 1; i < e.args.size(); ++i) {
        best = e.op == Op::kMax ? std::max(best, arg(i)) : std::min(best, arg(i));
      }
      return best;
    }
    case Op::kVariable:
      break;
  }
  return std::nan("");
}

class Parser {
 public:
  Parser(std::string_view src, int arity) : src_(src), arity_(arity) {}

  Expr parse() {
    skip_space();
    if (at_end()) throw ParseError("empty expression", pos_);
    Expr e = parse_sum();
    skip_space();
    if (!at_end()) {
      throw ParseError(
          fmt::format("expected operator or end of input, found '{}'", peek()),
          pos_);
    }
    return e;
  }

 private:
  bool at_end() const { return pos_ >= src_.size(); }
  char peek() const { return at_end() ? '\0' : src_[pos_]; }

  void skip_space() {
    while (!at_end() && std::isspace(static_cast<unsigned char>(src_[pos_]))) {
      ++pos_;
    }
  }

  bool accept(char c) {
    skip_space();
    if (peek() == c) {
      ++pos_;
      return true;
    }
    return false;
  }

  void expect(char c) {
    if (!accept(c)) {
      throw ParseError(fmt::format("expected '{}'", c), pos_);
    }
  }

  Expr parse_sum() {
    Expr lhs = parse_product();
    for (;;) {
      skip_space();
      if (accept('+')) {
        lhs = Expr::binary(Op::kAdd, std::move(lhs), parse_product());
      } else if (accept('-')) {
        lhs = Expr::binary(Op::kSub, std::move(lhs), parse_product());
      } else {
        return lhs;
      }
    }
  }

  Expr parse_product() {
    Expr lhs = parse_power();
    for (;;) {
      if (accept('*')) {
        lhs = Expr::binary(Op::kMul, std::move(lhs), parse_power());
      } else if (accept('/')) {
        lhs = Expr::binary(Op::kDiv, std::move(lhs), parse_power());
      } else {
        return lhs;
      }
    }
  }

  Expr parse_power() {
    Expr base = parse_unary();
    skip_space();
    if (peek() != '^') return base;
    ++pos_;
    skip_space();
    const std::size_t exponent_pos = pos_;
    Expr exponent = parse_power();
    if (max_variable(exponent) > 0) {
      throw ParseError("non-constant exponent", exponent_pos);
    }
    const double c = fold_constant(exponent);
    if (!std::isfinite(c) || 2.0 * c != std::floor(2.0 * c)) {
      throw ParseError(
          fmt::format("exponent {} is not an integer or half-integer", c),
          exponent_pos);
    }
    return Expr::power(std::move(base), c);
  }

  Expr parse_unary() {
    skip_space();
    if (peek() != '-') return parse_primary();
    ++pos_;
    skip_space();
    if (std::isdigit(static_cast<unsigned char>(peek())) || peek() == '.') {
      return Expr::constant(-parse_number());
    }
    return Expr::unary(Op::kNeg, parse_unary());
  }

  double parse_number() {
    const std::size_t start = pos_;
    while (!at_end()) {
      const char c = src_[pos_];
      if (std::isdigit(static_cast<unsigned char>(c)) || c == '.') {
        ++pos_;
      } else if ((c == 'e' || c == 'E') && pos_ > start) {
        ++pos_;
        if (peek() == '+' || peek() == '-') ++pos_;
      } else {
        break;
      }
    }
    double v = 0.0;
    const auto* first = src_.data() + start;
    const auto* last = src_.data() + pos_;
    auto [ptr, ec] = std::from_chars(first, last, v);
    if (ec != std::errc() || ptr != last) {
      throw ParseError("malformed number", start);
    }
    return v;
  }

  Expr parse_primary() {
    skip_space();
    if (at_end()) throw ParseError("expected expression, found end of input", pos_);
    const char c = peek();
    if (c == '(') {
      ++pos_;
      Expr e = parse_sum();
      expect(')');
      return e;
    }
    if (std::isdigit(static_cast<unsigned char>(c)) || c == '.') {
      return Expr::constant(parse_number());
    }
    if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') {
      const std::size_t start = pos_;
      while (!at_end() && (std::isalnum(static_cast<unsigned char>(peek())) ||
                           peek() == '_')) {
        ++pos_;
      }
      return parse_identifier(src_.substr(start, pos_ - start), start);
    }
    throw ParseError(fmt::format("expected expression, found '{}'", c), pos_);
  }

  Expr parse_identifier(std::string_view name, std::size_t start) {
    if (name.size() > 1 && name[0] == 'x' &&
        name.find_first_not_of("0123456789", 1) == std::string_view::npos) {
      int index = 0;
      auto [ptr, ec] =
          std::from_chars(name.data() + 1, name.data() + name.size(), index);
      if (ec != std::errc() || index < 1 || index > arity_) {
        throw ParseError(fmt::format("variable index out of range: {} (arity {})",
                                     name, arity_),
                         start);
      }
      return Expr::variable(index);
    }
    Op op;
    if (name == "exp") {
      op = Op::kExp;
    } else if (name == "sqrt") {
      op = Op::kSqrt;
    } else if (name == "abs") {
      op = Op::kAbs;
    } else if (name == "relu") {
      op = Op::kRelu;
    } else if (name == "max") {
      op = Op::kMax;
    } else if (name == "min") {
      op = Op::kMin;
    } else {
      throw ParseError(fmt::format("unknown identifier '{}'", name), start);
    }
    expect('(');
    std::vector<Expr> args;
    args.push_back(parse_sum());
    while (accept(',')) args.push_back(parse_sum());
    expect(')');
    const int want = op_arity(op);
    if ((want >= 0 && static_cast<int>(args.size()) != want) ||
        (want < 0 && args.size() < 2)) {
      throw ParseError(fmt::format("wrong number of arguments to {}", name),
                       start);
    }
    return Expr::call(op, std::move(args));
  }

  std::string_view src_;
  int arity_;
  std::size_t pos_ = 0;
};

std::string_view trim(std::string_view s) {
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front()))) {
    s.remove_prefix(1);
  }
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) {
    s.remove_suffix(1);
  }
  return s;
}

}  // namespace

Expr parse_expression(std::string_view source, int arity) {
  if (arity < 1) throw ArgumentError("arity must be at least 1");
  return Parser(source, arity).parse();
}

ModelDefinition parse_model_file(std::string_view text) {
  std::string body;
  std::istringstream lines{std::string(text)};
  for (std::string line; std::getline(lines, line);) {
    const auto t = trim(line);
    if (t.empty() || t.front() == '#') continue;
    body += line;
    body += '\n';
  }
  const auto assign = body.find(":=");
  if (assign == std::string::npos) {
    throw ParseError("expected `model <name> arity <P> := <expression>`", 0);
  }
  std::istringstream header(body.substr(0, assign));
  std::string keyword, name, arity_kw, extra;
  int arity = 0;
  header >> keyword >> name >> arity_kw >> arity;
  if (keyword != "model" || name.empty() || arity_kw != "arity" || !header ||
      (header >> extra)) {
    throw ParseError("expected `model <name> arity <P> := <expression>`", 0);
  }
  if (arity < 1) throw ParseError("arity must be positive", 0);
  const std::string expr(trim(std::string_view(body).substr(assign + 2)));
  try {
    return {name, arity, parse_expression(expr, arity)};
  } catch (const ParseError& e) {
    throw ParseError(std::string(e.what()) + " (in expression of model " +
                         name + ")",
                     e.position());
  }
}

ModelDefinition load_model_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open model file " + path);
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_model_file(ss.str());
}

std::string to_model_file(const ModelDefinition& def) {
  return fmt::format("model {} arity {} := {}\n", def.name, def.arity,
                     to_string(def.body));
}

}  // namespace attrikit
