#pragma once

#include <map>
#include <memory>
#include <string>
#include <vector>

#include <json.hpp>

#include "iobs/rational.hpp"

namespace iobs {

using Exps = std::vector<int>;

// Sparse polynomial over Q in a fixed, ordered list of named variables.
class MultiPoly {
 public:
  using VarList = std::shared_ptr<const std::vector<std::string>>;

  MultiPoly();
  explicit MultiPoly(std::vector<std::string> vars);
  explicit MultiPoly(VarList vars);

  static MultiPoly constant(VarList vars, const Rational& c);
  static MultiPoly variable(VarList vars, int i);
  // a_1..a_n, b_1..b_m
  static VarList ab_vars(int n, int m);
  static VarList named_vars(const std::string& stem, int count);

  const VarList& var_list() const { return vars_; }
  int nvars() const { return static_cast<int>(vars_->size()); }
  const std::map<Exps, Rational>& terms() const { return terms_; }
  bool is_zero() const { return terms_.empty(); }
  std::size_t size() const { return terms_.size(); }

  void add_term(const Exps& e, const Rational& c);
  Rational coeff(const Exps& e) const;

  MultiPoly& operator+=(const MultiPoly& o);
  MultiPoly& operator-=(const MultiPoly& o);
  MultiPoly& operator*=(const Rational& c);
  friend MultiPoly operator+(MultiPoly a, const MultiPoly& b) { return a += b; }
  friend MultiPoly operator-(MultiPoly a, const MultiPoly& b) { return a -= b; }
  friend MultiPoly operator*(const MultiPoly& a, const MultiPoly& b);
  friend MultiPoly operator*(MultiPoly a, const Rational& c) { return a *= c; }
  friend MultiPoly operator*(const Rational& c, MultiPoly a) { return a *= c; }
  MultiPoly operator-() const;
  bool operator==(const MultiPoly& o) const;
  bool operator!=(const MultiPoly& o) const { return !(*this == o); }

  MultiPoly pow(int k) const;
  Rational eval(const std::vector<Rational>& x) const;
  // Replace variable i by q (q must live over the same variables).
  MultiPoly substitute(int i, const MultiPoly& q) const;
  MultiPoly derivative(int i) const;

  int total_degree() const;  // -1 for zero
  // Degree in the variables selected by mask (1 = counted).
  static int degree_in(const Exps& e, const std::vector<int>& mask);
  MultiPoly part_with_degree(const std::vector<int>& mask, int d) const;
  MultiPoly homogeneous_part(int d) const;

  std::string to_string() const;
  nlohmann::json to_json() const;
  static MultiPoly from_json(const nlohmann::json& j, VarList vars);

 private:
  void check_same(const MultiPoly& o) const;
  VarList vars_;
  std::map<Exps, Rational> terms_;
};

std::string monomial_string(const std::vector<std::string>& vars, const Exps& e);

}  // namespace iobs
