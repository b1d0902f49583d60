#include "btcsync/harness/expression.hpp"

#include <cctype>
#include <cstdlib>

namespace btcsync::harness {

namespace {

struct Token {
  enum Kind { kNumber, kName, kOp, kCompare } kind;
  std::string text;
  double number = 0.0;
};

std::vector<Token> tokenize(const std::string& s) {
  std::vector<Token> out;
  std::size_t i = 0;
  while (i < s.size()) {
    const char c = s[i];
    if (std::isspace(static_cast<unsigned char>(c))) {
      ++i;
    } else if (std::isdigit(static_cast<unsigned char>(c)) || c == '.') {
      char* end = nullptr;
      const double v = std::strtod(s.c_str() + i, &end);
      const auto len = static_cast<std::size_t>(end - (s.c_str() + i));
      if (len == 0) throw ExpressionError("bad number at column " + std::to_string(i + 1));
      out.push_back({Token::kNumber, s.substr(i, len), v});
      i += len;
    } else if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') {
      std::size_t j = i;
      while (j < s.size() && (std::isalnum(static_cast<unsigned char>(s[j])) || s[j] == '_')) ++j;
      out.push_back({Token::kName, s.substr(i, j - i)});
      i = j;
    } else if (c == '+' || c == '-' || c == '*') {
      out.push_back({Token::kOp, std::string(1, c)});
      ++i;
    } else if (c == '<' || c == '>' || c == '=' || c == '!') {
      std::string op(1, c);
      if (i + 1 < s.size() && s[i + 1] == '=') op += '=';
      if (op == "=" || op == "!") throw ExpressionError("unknown operator '" + op + "'");
      out.push_back({Token::kCompare, op});
      i += op.size();
    } else {
      throw ExpressionError(std::string("unexpected character '") + c + "'");
    }
  }
  return out;
}

Expression parse_expression(const std::vector<Token>& toks, std::size_t begin, std::size_t end) {
  if (begin == end) throw ExpressionError("empty expression");
  Expression e;
  std::size_t i = begin;
  double sign = 1.0;
  if (toks[i].kind == Token::kOp && (toks[i].text == "-" || toks[i].text == "+")) {
    sign = toks[i].text == "-" ? -1.0 : 1.0;
    ++i;
  }
  Expression::Term term{sign, {}};
  bool want_operand = true;
  for (; i < end; ++i) {
    const auto& t = toks[i];
    if (want_operand) {
      if (t.kind == Token::kNumber) {
        term.factors.emplace_back(t.number);
      } else if (t.kind == Token::kName) {
        term.factors.emplace_back(t.text);
      } else {
        throw ExpressionError("expected a number or metric, found '" + t.text + "'");
      }
      want_operand = false;
    } else {
      if (t.kind != Token::kOp) throw ExpressionError("expected an operator, found '" + t.text + "'");
      if (t.text != "*") {
        e.terms.push_back(std::move(term));
        term = Expression::Term{t.text == "-" ? -1.0 : 1.0, {}};
      }
      want_operand = true;
    }
  }
  if (want_operand) throw ExpressionError("expression ends with an operator");
  e.terms.push_back(std::move(term));
  return e;
}

}  // namespace

Comparison parse_comparison(const std::string& text) {
  const auto toks = tokenize(text);
  std::size_t cmp = toks.size();
  for (std::size_t i = 0; i < toks.size(); ++i) {
    if (toks[i].kind != Token::kCompare) continue;
    if (cmp != toks.size()) throw ExpressionError("more than one comparison operator");
    cmp = i;
  }
  if (cmp == toks.size()) throw ExpressionError("missing comparison operator");
  return Comparison{parse_expression(toks, 0, cmp), toks[cmp].text,
                    parse_expression(toks, cmp + 1, toks.size()), text};
}

std::set<std::string> referenced_metrics(const Comparison& c) {
  std::set<std::string> out;
  for (const auto* e : {&c.lhs, &c.rhs})
    for (const auto& t : e->terms)
      for (const auto& f : t.factors)
        if (const auto* name = std::get_if<std::string>(&f)) out.insert(*name);
  return out;
}

double evaluate(const Expression& e, const std::map<std::string, double>& metrics) {
  double sum = 0.0;
  for (const auto& t : e.terms) {
    double product = t.sign;
    for (const auto& f : t.factors) {
      if (const auto* v = std::get_if<double>(&f)) {
        product *= *v;
      } else {
        const auto& name = std::get<std::string>(f);
        auto it = metrics.find(name);
        if (it == metrics.end()) throw ExpressionError("undefined metric '" + name + "'");
        product *= it->second;
      }
    }
    sum += product;
  }
  return sum;
}

bool holds(const Comparison& c, double lhs, double rhs) {
  if (c.op == "==") return lhs == rhs;
  if (c.op == "!=") return lhs != rhs;
  if (c.op == "<") return lhs < rhs;
  if (c.op == "<=") return lhs <= rhs;
  if (c.op == ">") return lhs > rhs;
  return lhs >= rhs;
}

}  // namespace btcsync::harness
