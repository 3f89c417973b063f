#include <doctest.h>

#include "iobs/bernoulli.hpp"
#include "iobs/piident.hpp"

using namespace iobs;

namespace {

using Kind = PiGenerator::Kind;

Rational eval(const RatFn& f, const std::vector<Rational>& x) {
  Rational d = f.base().eval(x);
  Rational v = f.numerator().eval(x);
  for (int k = 0; k < f.power(); ++k) v /= d;
  return v;
}

const RatFn& coeff(const FormalClass& c, PiGenerator g) {
  auto it = c.terms.find(g);
  REQUIRE(it != c.terms.end());
  return it->second;
}

}  // namespace

TEST_CASE("RatFn: both differentiation orders agree, b = 0 evaluation") {
  auto vars = MultiPoly::named_vars("x", 3);  // x1, x2, b = x3
  MultiPoly x1 = MultiPoly::variable(vars, 0), b = MultiPoly::variable(vars, 2);
  RatFn f(x1 * x1 * b + b * b * b, 3);
  CHECK(f.d_b() == f.d_b_cleared(3));
  CHECK(f.d_b() == f.d_b_cleared(7));
  std::vector<Rational> pt{frac(1, 3), frac(2, 5), frac(1, 7)};
  // d/db of x1^2 b/(x1+x2+b)^3 + b^3/(...)^3 by a difference-free formula
  Rational s = pt[0] + pt[1] + pt[2];
  Rational expect = (pt[0] * pt[0] + 3 * pt[2] * pt[2]) / (s * s * s) -
                    3 * (pt[0] * pt[0] * pt[2] + pt[2] * pt[2] * pt[2]) / (s * s * s * s);
  CHECK(eval(f.d_b(), pt) == expect);
  RatFn z = f.at_b0();
  CHECK(z.is_zero());
  CHECK_THROWS(z.d_b());
  CHECK_THROWS(z + f);
}

TEST_CASE("exponent f: coefficients at m = 1") {
  const int n = 2;
  FormalClass f = build_f_exponent(1, n, 1);
  std::vector<Rational> pt{frac(2, 3), frac(5, 7), frac(1, 11)};  // a1, a2, b
  Rational A = pt[0] + pt[1], c = A + pt[2];
  // kappa_1: -(a+b)/2 * B_2
  CHECK(eval(coeff(f, {Kind::Kappa, 1}), pt) == -c / 2 * bernoulli_number(2));
  // psi_{n+1}: +(a+b)/2 * B_2(a/(a+b))
  CHECK(eval(coeff(f, {Kind::Psi, 1, n + 1}), pt) == c / 2 * bernoulli_poly(2, A / c));
  // psi_1: +(a+b)/2 * B_2((a - a_1)/(a+b))
  CHECK(eval(coeff(f, {Kind::Psi, 1, 1}), pt) == c / 2 * bernoulli_poly(2, (A - pt[0]) / c));
  // boundary with n+1 in I: weight b - a_{I \ {n+1}}; I = {1, 3}, genus split (0, 1)
  PiGenerator xi{Kind::Boundary, 1, 0, 0, 0b101u};
  CHECK(eval(coeff(f, xi), pt) == -c / 4 * bernoulli_poly(2, (pt[2] - pt[0]) / c));
  // b = 0: the psi_i coefficient involves B_2((a - a_i)/a)
  std::vector<Rational> p0{pt[0], pt[1], 0};
  CHECK(eval(coeff(f, {Kind::Psi, 1, 2}).at_b0(), p0) == A / 2 * bernoulli_poly(2, (A - pt[1]) / A));
}

TEST_CASE("P_m and Q_m transcriptions") {
  const int g = 2, n = 3;
  std::vector<Rational> pt{frac(1, 2), frac(1, 3), frac(3, 5), frac(2, 9)};  // a1..a3, b
  Rational A = pt[0] + pt[1] + pt[2], c = A + pt[3];
  PiOptions expanded;
  expanded.expanded = true;
  PmQm p1 = build_PQ(g, n, 1, expanded);
  CHECK(eval(coeff(p1.P, {Kind::Kappa, 0}), pt) == bernoulli_number(2) - bernoulli_poly(2, A / c));
  Rational one = 0;
  for (int i = 0; i < n; ++i)
    one += bernoulli_poly(2, (A - pt[i]) / c) - bernoulli_poly(2, (c - pt[i]) / c);
  CHECK(eval(coeff(p1.P, {Kind::One}), pt) == one);
  // P_1 has no boundary part
  for (const auto& [gen, v] : p1.P.terms) CHECK(gen.kind != Kind::Boundary);

  for (int m = 1; m <= 4; ++m) {
    PmQm pq = build_PQ(g, n, m, expanded);
    CHECK(eval(coeff(pq.Q, {Kind::Kappa, m}), pt) == A * bernoulli_number(m + 1));
    Rational q2 = -((A - pt[1]) * bernoulli_poly(m + 1, (c - pt[1]) / c) + pt[1] * bernoulli_poly(m + 1, (A - pt[1]) / c));
    CHECK(eval(coeff(pq.Q, {Kind::Psi, m, 2}), pt) == q2);
  }
  PmQm p2 = build_PQ(g, n, 2, expanded);
  CHECK(eval(coeff(p2.P, {Kind::Psi, 1, 1}), pt) ==
        bernoulli_poly(3, (A - pt[0]) / c) - bernoulli_poly(3, (c - pt[0]) / c));
  // boundary, I = {1, 3}
  Rational aI = pt[0] + pt[2], aJ = pt[1];
  PiGenerator xi{Kind::Boundary, 1, 0, 1, 0b101u};
  CHECK(eval(coeff(p2.P, xi), pt) ==
        (bernoulli_poly(3, (aI + pt[3]) / c) - bernoulli_poly(3, aI / c)) / 2);
  PiOptions literal = expanded;
  literal.literal_boundary = true;
  CHECK(eval(coeff(build_PQ(g, n, 2, literal).P, xi), pt) ==
        (bernoulli_poly(2, (aI + pt[3]) / c) - bernoulli_poly(3, aI / c)) / 2);
  PiGenerator xi2{Kind::Boundary, 2, 0, 1, 0b101u};
  CHECK(eval(coeff(p2.Q, xi2), pt) ==
        (aI * bernoulli_poly(3, (aI + pt[3]) / c) + aJ * bernoulli_poly(3, aI / c)) / 2);

  // unstable splits are absent: genus 0 side with no marking
  for (const auto& [gen, v] : p2.Q.terms)
    if (gen.kind == Kind::Boundary) {
      int nI = std::popcount(gen.I);
      CHECK(2 * gen.g1 - 1 + nI > 0);
      CHECK(2 * (g - gen.g1) - 1 + (n - nI) > 0);
    }
}

TEST_CASE("dilaton identities hold generator by generator") {
  PiReport r = verify_dilaton_identities(2, 3, 6);
  INFO(r.to_json().dump());
  CHECK(r.pass());
  CHECK(r.checked > 500);
  for (auto [g, n] : std::vector<std::pair<int, int>>{{0, 3}, {0, 5}, {1, 1}, {1, 4}, {3, 2}}) {
    CHECK(verify_dilaton_identities(g, n, 4).pass());
  }
  // reduced variables and fully expanded a_1..a_n give the same verdicts
  PiOptions ex;
  ex.expanded = true;
  PiReport e = verify_dilaton_identities(1, 3, 3, ex);
  CHECK(e.pass());
  CHECK(e.checked == verify_dilaton_identities(1, 3, 3).checked);
  CHECK_THROWS(verify_dilaton_identities(0, 2, 3));
}

TEST_CASE("dilaton identities: negative controls") {
  PiOptions literal;
  literal.literal_boundary = true;
  PiReport r = verify_dilaton_identities(2, 3, 3, literal);
  REQUIRE_FALSE(r.pass());
  for (const auto& f : r.failures) CHECK(f.generator.rfind("xi[", 0) == 0);

  PiOptions lit_ex = literal;
  lit_ex.expanded = true;
  CHECK(verify_dilaton_identities(1, 3, 2, lit_ex).failures.size() ==
        verify_dilaton_identities(1, 3, 2, literal).failures.size());

  PiOptions pert;
  pert.perturb_bernoulli = 3;
  pert.perturb_delta = frac(1, 100);
  PiReport p = verify_dilaton_identities(1, 2, 3, pert);
  REQUIRE_FALSE(p.pass());
  bool kappa = false;
  for (const auto& f : p.failures)
    if (f.generator == "kappa_1" && f.identity == "ii") kappa = true;
  CHECK(kappa);
  auto j = p.to_json();
  CHECK(j["pass"] == false);
  CHECK(j["failures"][0]["status"] == "FAIL");
}
