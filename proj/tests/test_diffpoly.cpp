#include <doctest.h>

#include <random>

#include "iobs/diffpoly.hpp"

using namespace iobs;

namespace {

DiffPoly w(int a, int d, int eps = 6) { return DiffPoly::jet(a, d, eps); }

// Random density with bounded order, factor count and eps power.
DiffPoly random_density(std::mt19937& rng, int N, int eps_max, int max_order = 3, int max_factors = 3) {
  std::uniform_int_distribution<int> nterms(1, 4), nf(1, max_factors), al(1, N), od(0, max_order), co(-4, 4),
      ep(0, eps_max / 2);
  DiffPoly p(eps_max);
  int k = nterms(rng);
  for (int i = 0; i < k; ++i) {
    JetMonomial m;
    int f = nf(rng);
    for (int j = 0; j < f; ++j) m.factors.push_back({al(rng), od(rng)});
    m.eps = 2 * ep(rng);
    int c = co(rng);
    p.add_term(m, frac(c == 0 ? 1 : c, 1 + (i % 3)));
  }
  return p;
}

std::vector<FormalSeries> synthetic_solution(int N, int eps, int tdeg, int dmax) {
  std::vector<FormalSeries> sol;
  FormalSeries x = FormalSeries::time({1, 0}, eps, tdeg);
  for (int a = 1; a <= N; ++a) {
    FormalSeries s(eps, tdeg);
    for (int d = 0; d <= dmax; ++d) {
      FormalSeries term = FormalSeries::time({a, d}, eps, tdeg);
      for (int k = 0; k < d; ++k) term = term * x;
      term *= Rational(1) / Rational(factorial(d));
      s += term;
    }
    // a dispersive correction that keeps the triangular shape
    FormalSeries corr = FormalSeries::time({a, 0}, eps, tdeg) * FormalSeries::time({1, 0}, eps, tdeg) *
                        FormalSeries::time({1, 0}, eps, tdeg) * FormalSeries::time({1, 0}, eps, tdeg);
    SeriesKey k{2, {}};
    FormalSeries e2(eps, tdeg);
    e2.add(k, frac(1, 7));
    s += corr * e2;
    sol.push_back(s);
  }
  return sol;
}

}  // namespace

TEST_CASE("d_x") {
  CHECK(d_x(w(1, 0)) == w(1, 1));
  CHECK(d_x(w(1, 0) * w(1, 0)) == w(1, 0) * w(1, 1) * Rational(2));
  CHECK(d_x(w(1, 2).times_eps(2)) == w(1, 3).times_eps(2));
  CHECK((w(1, 0) * w(1, 0) * frac(1, 2) + w(1, 2).times_eps(2) * frac(1, 12)).to_string() ==
        "1/2*(w[1,0])^2 + 1/12*eps^2*w[1,2]");
}

TEST_CASE("variational derivative") {
  CHECK(var_derivative(w(1, 1) * w(1, 1) * frac(1, 2), 1) == -w(1, 2));
  CHECK(var_derivative(w(1, 0).pow(3) * frac(1, 6), 1) == w(1, 0).pow(2) * frac(1, 2));
  std::mt19937 rng(7);
  for (int i = 0; i < 100; ++i) {
    auto p = random_density(rng, 2, 4);
    for (int a = 1; a <= 2; ++a) CHECK(var_derivative(d_x(p), a).is_zero());
    // deg_dx raises by one on homogeneous parts
    auto h = p.homogeneous(1);
    auto dh = d_x(h);
    for (const auto& [m, c] : dh.terms()) CHECK(m.deg_dx() == 2);
  }
}

TEST_CASE("normal form modulo d_x") {
  std::mt19937 rng(11);
  for (int i = 0; i < 60; ++i) {
    auto p = random_density(rng, 2, 4);
    CHECK(normal_form(d_x(p)).is_zero());
    auto q = random_density(rng, 2, 4);
    // equal classes have equal normal forms
    CHECK(normal_form(q + d_x(p)) == normal_form(q));
    // zero class iff all variational derivatives vanish and there is no constant
    bool zero = normal_form(q).is_zero();
    bool delta_zero = q.coeff({}) == 0 && var_derivative(q, 1).is_zero() && var_derivative(q, 2).is_zero();
    CHECK(zero == delta_zero);
  }
  CHECK(LocalFunctional(w(1, 0) * w(1, 2)) == LocalFunctional(-w(1, 1) * w(1, 1)));
}

TEST_CASE("poisson bracket") {
  Matrix eta1 = identity_matrix(1);
  LocalFunctional h0(w(1, 0) * w(1, 0) * frac(1, 2));
  LocalFunctional h1(w(1, 0).pow(3) * frac(1, 6) + w(1, 0) * w(1, 2) * frac(1, 24));
  CHECK(poisson_bracket(h1, h1, eta1).is_zero());
  LocalFunctional casimir(w(1, 0));
  CHECK(poisson_bracket(casimir, h1, eta1).is_zero());
  CHECK(poisson_bracket(h0, h1, eta1).is_zero());

  Matrix eta2 = {{0, 1}, {1, 0}};
  std::mt19937 rng(2024);
  for (int i = 0; i < 100; ++i) {
    LocalFunctional f(random_density(rng, 2, 4, 2, 2)), g(random_density(rng, 2, 4, 2, 2)),
        h(random_density(rng, 2, 4, 2, 2));
    auto fg = poisson_bracket(f, g, eta2).density();
    auto gf = poisson_bracket(g, f, eta2).density();
    CHECK(LocalFunctional(fg + gf).is_zero());
    if (i < 25) {
      auto j = poisson_bracket(poisson_bracket(f, g, eta2), h, eta2).density() +
               poisson_bracket(poisson_bracket(g, h, eta2), f, eta2).density() +
               poisson_bracket(poisson_bracket(h, f, eta2), g, eta2).density();
      CHECK(LocalFunctional(j).is_zero());
    }
  }
}

TEST_CASE("miura maps") {
  auto id = MiuraMap::identity(1);
  auto p = w(1, 0) * w(1, 2) + w(1, 1).times_eps(2);
  CHECK(apply_miura(id, p) == p);
  MiuraMap m;
  m.targets.push_back(w(1, 0) + w(1, 1).times_eps(1));
  CHECK(apply_miura(m, w(1, 0)) == w(1, 0) + w(1, 1).times_eps(1));
  auto inv = invert_miura(m);
  CHECK(inv.targets[0].eps_part(2) == w(1, 2).times_eps(2));
  CHECK(inv.targets[0].eps_part(1) == -w(1, 1).times_eps(1));
  CHECK(compose_miura(m, inv).is_identity());
  CHECK(compose_miura(inv, m).is_identity());
  CHECK(invert_miura(id).is_identity());

  std::mt19937 rng(99);
  for (int i = 0; i < 20; ++i) {
    MiuraMap r;
    for (int a = 1; a <= 2; ++a) {
      DiffPoly u = random_density(rng, 2, 6, 2, 2);
      DiffPoly t = w(a, 0);
      for (const auto& [mon, c] : u.terms())
        if (mon.eps == 0) t.add_term({mon.factors, 2}, c);
        else t.add_term(mon, c);
      r.targets.push_back(t);
    }
    auto ri = invert_miura(r);
    CHECK(compose_miura(r, ri).is_identity());
    CHECK(compose_miura(ri, r).is_identity());
  }
  MiuraMap bad;
  bad.targets.push_back(w(1, 0) * w(1, 0));
  CHECK_THROWS(invert_miura(bad));
}

TEST_CASE("formal series substitution and matching") {
  auto sol = synthetic_solution(1, 2, 7, 6);
  auto s0 = substitute_solution(w(1, 0), sol);
  CHECK(s0.coeff({0, {{1, 0}}}) == 1);
  auto s1 = substitute_solution(w(1, 1), sol);
  CHECK(s1.coeff({0, {}}) == 1);
  CHECK(s1.coeff({0, {{1, 1}}}) == 1);
  CHECK(substitute_solution(DiffPoly::constant(5), sol).coeff({0, {}}) == 5);

  std::mt19937 rng(5);
  for (int i = 0; i < 10; ++i) {
    DiffPoly q(2);
    q.add_term({{{1, 0}, {1, 0}}, 0}, frac(1 + i, 2));
    q.add_term({{{1, 2}}, 2}, frac(1, 12 + i));
    q.add_term({{{1, 0}, {1, 1}, {1, 1}}, 2}, frac(i, 5));
    auto series = substitute_solution(q, sol);
    auto back = match_diffpoly(series, sol, {0, 2, -1});
    CHECK(back == q);
    // a perturbed coefficient at low t-degree has no preimage
    FormalSeries bad = series;
    bad.add({0, {{1, 0}, {1, 3}}}, 1);
    CHECK_THROWS_AS(match_diffpoly(bad, sol, {0, 2, -1}), NoMatch);
  }

  auto sol2 = synthetic_solution(2, 2, 6, 5);
  DiffPoly q2(2);
  q2.add_term({{{1, 0}, {2, 0}}, 0}, 1);
  q2.add_term({{{2, 2}}, 2}, frac(-3, 4));
  q2.add_term({{{1, 1}, {2, 1}}, 2}, frac(1, 3));
  CHECK(match_diffpoly(substitute_solution(q2, sol2), sol2, {0, 2, -1}) == q2);
}

TEST_CASE("json round trip") {
  auto p = w(1, 0) * w(2, 3) * frac(-2, 3) + w(1, 2).times_eps(2);
  CHECK(DiffPoly::from_json(p.to_json()) == p);
}

TEST_CASE("seeded algebra property suite") {
  AlgebraReport a = check_algebra_properties(42, 12, 4, 1);
  INFO(a.to_json().dump());
  CHECK(a.pass());
  CHECK(a.checks == 12 * 6);
  AlgebraReport b = check_algebra_properties(42, 12, 4, 3);
  CHECK(a.to_json() == b.to_json());
  std::mt19937_64 r1(5), r2(5);
  CHECK(random_density(r1, 2, 4) == random_density(r2, 2, 4));
}
