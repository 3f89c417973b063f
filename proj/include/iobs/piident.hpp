#pragma once

#include <map>
#include <string>
#include <vector>

#include <json.hpp>

#include "iobs/multipoly.hpp"
#include "iobs/rational.hpp"

namespace iobs {

// num / (x_1 + ... + x_k)^power, where x_1..x_k are all variables of num and the last one is b.
// After at_b0() the base is x_1 + ... + x_{k-1} (that is, a).
class RatFn {
 public:
  RatFn() = default;
  explicit RatFn(MultiPoly num, int power = 0, bool b_zero = false);
  static RatFn constant(const MultiPoly::VarList& vars, const Rational& c, int power = 0, bool b_zero = false);

  const MultiPoly& numerator() const { return num_; }
  int power() const { return power_; }
  const MultiPoly::VarList& vars() const { return num_.var_list(); }
  // sum of all variables (a + b)
  MultiPoly base() const;

  RatFn& operator+=(const RatFn& o);
  RatFn& operator-=(const RatFn& o);
  RatFn& operator*=(const Rational& c);
  friend RatFn operator+(RatFn a, const RatFn& b) { return a += b; }
  friend RatFn operator-(RatFn a, const RatFn& b) { return a -= b; }
  friend RatFn operator*(RatFn a, const Rational& c) { return a *= c; }
  friend RatFn operator*(const RatFn& a, const RatFn& b);

  // quotient rule
  RatFn d_b() const;
  // multiply through by (a+b)^K, differentiate the polynomial, divide back
  RatFn d_b_cleared(int K) const;
  // b -> 0; the denominator becomes a^power
  RatFn at_b0() const;

  bool is_zero() const { return num_.is_zero(); }
  bool operator==(const RatFn& o) const;
  std::string to_string() const;

 private:
  MultiPoly num_;
  int power_ = 0;
  bool b_zero_ = false;
};

// Generators of the formal class ring. Boundary: (xi_{g1,g2}^{I,J})_* [psi_h1^m - (-psi_h2)^m]/(psi_h1 + psi_h2).
struct PiGenerator {
  enum class Kind { One, Kappa, Psi, Boundary };
  Kind kind = Kind::One;
  int m = 0;
  int i = 0;          // Psi: marking (1-based)
  int g1 = 0;         // Boundary
  unsigned I = 0;     // Boundary: bitmask of markings on the genus g1 side
  auto operator<=>(const PiGenerator&) const = default;
  std::string name() const;
};

// Each coefficient lives in its own variables: linear forms a_S over a partition of the markings, then b.
struct FormalClass {
  std::map<PiGenerator, RatFn> terms;
  void add(const PiGenerator& g, const RatFn& c);
  nlohmann::json to_json() const;
};

struct PiOptions {
  bool literal_boundary = false;  // B_m instead of B_{m+1} in the first boundary slot of P_m and Q_m
  bool expanded = false;          // coefficients in a_1..a_n, b for every generator
  int perturb_bernoulli = -1;     // add perturb_delta * x to B_k(x) for k = perturb_bernoulli
  Rational perturb_delta = 0;
  int workers = 1;
};

// f on Mbar_{g,n+1}, truncated at m_max, coefficients in a_1..a_n, b.
FormalClass build_f_exponent(int g, int n, int m_max, const PiOptions& opt = {});

struct PmQm {
  int m = 1;
  FormalClass P, Q;
};
PmQm build_PQ(int g, int n, int m, const PiOptions& opt = {});

struct PiReport {
  struct Entry {
    std::string identity;  // i | ii | iii | iv | d_b-order
    int g = 0, n = 0, m = 0;
    std::string generator;
    bool pass = true;
    std::string residual;
  };
  long checked = 0;
  std::vector<Entry> failures;
  bool pass() const { return failures.empty(); }
  void merge(const PiReport& o);
  nlohmann::json to_json() const;
};

PiReport verify_dilaton_identities(int g, int n, int m_max, const PiOptions& opt = {});
// All (g, n) with g <= g_max, 1 <= n <= n_max, 2g - 2 + n > 0.
PiReport verify_dilaton_range(int g_max, int n_max, int m_max, const PiOptions& opt = {});

}  // namespace iobs
