#pragma once

#include <gmpxx.h>

#include <cstdint>
#include <string>
#include <vector>

namespace iobs {

// Exact rational; mpq_class keeps lowest terms after arithmetic.
using Rational = mpq_class;
using Integer = mpz_class;

// p/q in lowest terms; mpq_class(p, q) alone does not reduce.
inline Rational frac(long p, long q) {
  Rational r(p, q);
  r.canonicalize();
  return r;
}

std::string to_string(const Rational& q);
Rational parse_rational(const std::string& s);

Integer factorial(int n);
Integer binomial(int n, int k);

// total! / prod(parts!)
Rational multinomial(int total, const std::vector<int>& parts);

// (2k-1)!!, with (-1)!! = 1
Integer double_factorial_odd(int k);

}  // namespace iobs
