#pragma once

#include <vector>

#include "iobs/multipoly.hpp"
#include "iobs/rational.hpp"

namespace iobs {

// B_0..B_M and the coefficient tables of B_0(x)..B_M(x).
class BernoulliCache {
 public:
  explicit BernoulliCache(int max_m = 32);

  int bound() const { return max_m_; }
  const Rational& number(int m) const;
  // coefficients c_k of x^k in B_m(x)
  const std::vector<Rational>& poly(int m) const;

  static const BernoulliCache& global();

 private:
  int max_m_;
  std::vector<Rational> numbers_;
  std::vector<std::vector<Rational>> polys_;
};

Rational bernoulli_number(int m);
Rational bernoulli_poly(int m, const Rational& x);
MultiPoly bernoulli_poly(int m, const MultiPoly& x);
// Coefficients of B_m(x) in powers of x.
std::vector<Rational> bernoulli_poly_coeffs(int m);

}  // namespace iobs
