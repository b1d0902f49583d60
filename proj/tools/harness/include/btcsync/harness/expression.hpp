#pragma once

#include <map>
#include <set>
#include <stdexcept>
#include <string>
#include <variant>
#include <vector>

namespace btcsync::harness {

class ExpressionError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Sum of signed products of numbers and metric names.
struct Expression {
  struct Term {
    double sign = 1.0;
    std::vector<std::variant<double, std::string>> factors;
  };
  std::vector<Term> terms;
};

/// `lhs op rhs` with op one of == != < <= > >=.
struct Comparison {
  Expression lhs;
  std::string op;
  Expression rhs;
  std::string text;
};

Comparison parse_comparison(const std::string& text);
std::set<std::string> referenced_metrics(const Comparison& c);

/// Throws ExpressionError on an undefined metric.
double evaluate(const Expression& e, const std::map<std::string, double>& metrics);
bool holds(const Comparison& c, double lhs, double rhs);

}  // namespace btcsync::harness
