#include "iobs/rational.hpp"

#include <numeric>
#include <stdexcept>

namespace iobs {

std::string to_string(const Rational& q) { return q.get_str(); }

Rational parse_rational(const std::string& s) {
  if (s.empty()) throw std::invalid_argument("empty rational");
  Rational q;
  if (q.set_str(s, 10) != 0) throw std::invalid_argument("bad rational: " + s);
  if (q.get_den() == 0) throw std::invalid_argument("zero denominator: " + s);
  q.canonicalize();
  return q;
}

Integer factorial(int n) {
  if (n < 0) throw std::invalid_argument("factorial of negative");
  Integer r;
  mpz_fac_ui(r.get_mpz_t(), static_cast<unsigned long>(n));
  return r;
}

Integer binomial(int n, int k) {
  if (k < 0 || n < 0 || k > n) return 0;
  Integer r;
  mpz_bin_uiui(r.get_mpz_t(), static_cast<unsigned long>(n), static_cast<unsigned long>(k));
  return r;
}

Rational multinomial(int total, const std::vector<int>& parts) {
  int s = 0;
  for (int p : parts) {
    if (p < 0) throw std::invalid_argument("multinomial: negative part");
    s += p;
  }
  if (s != total) throw std::invalid_argument("multinomial: parts do not sum to total");
  Integer r = factorial(total);
  for (int p : parts) r /= factorial(p);
  return Rational(r);
}

Integer double_factorial_odd(int k) {
  // (2k-1)!!
  Integer r = 1;
  for (int j = 2 * k - 1; j > 1; j -= 2) r *= j;
  return r;
}

}  // namespace iobs
