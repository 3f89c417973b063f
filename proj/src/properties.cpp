#include <mutex>
#include <sstream>

#include "iobs/diffpoly.hpp"
#include "iobs/trees.hpp"

namespace iobs {

DiffPoly random_density(std::mt19937_64& rng, int N, int eps_max, int max_order, int max_factors) {
  std::uniform_int_distribution<int> nterms(1, 4), nf(1, max_factors), al(1, N), od(0, max_order), co(-4, 4),
      ep(0, eps_max / 2);
  DiffPoly p(eps_max);
  int k = nterms(rng);
  for (int i = 0; i < k; ++i) {
    JetMonomial m;
    int f = nf(rng);
    for (int j = 0; j < f; ++j) m.factors.push_back({al(rng), od(rng)});
    m.eps = 2 * ep(rng);
    m.normalize();
    int c = co(rng);
    p.add_term(m, frac(c == 0 ? 1 : c, 1 + (i % 3)));
  }
  return p;
}

nlohmann::json AlgebraReport::to_json() const {
  return {{"seed", seed}, {"samples", samples}, {"eps_max", eps_max}, {"checks", checks},
          {"pass", pass()}, {"failures", failures}};
}

namespace {

// w^a(t) = sum_d t^{a,d} x^d / d! plus an eps^2 correction; triangular in t^{a,0}.
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
    FormalSeries corr = FormalSeries::time({a, 0}, eps, tdeg) * x * x * x;
    FormalSeries e2(eps, tdeg);
    e2.add({2, {}}, frac(1, 7));
    s += corr * e2;
    sol.push_back(s);
  }
  return sol;
}

// Random polynomial with deg_dx = 0 in one field: eps power equals the jet order.
DiffPoly random_flux(std::mt19937_64& rng, int eps_max) {
  std::uniform_int_distribution<int> nterms(1, 3), nf(1, 3), od(0, 2), co(-5, 5);
  DiffPoly q(eps_max);
  int k = nterms(rng);
  for (int i = 0; i < k; ++i) {
    JetMonomial m;
    int f = nf(rng);
    for (int j = 0; j < f; ++j) m.factors.push_back({1, od(rng)});
    m.normalize();
    m.eps = m.order();
    if (m.eps % 2 || m.eps > eps_max) continue;
    int c = co(rng);
    q.add_term(m, frac(c == 0 ? 2 : c, 1 + i));
  }
  if (q.is_zero()) q.add_term({{{1, 0}, {1, 0}}, 0}, frac(1, 2));
  return q;
}

}  // namespace

AlgebraReport check_algebra_properties(std::uint64_t seed, int samples, int eps_max, int workers) {
  AlgebraReport rep;
  rep.seed = seed;
  rep.samples = samples;
  rep.eps_max = eps_max;
  const Matrix eta2 = {{0, 1}, {1, 0}};
  const auto sol = synthetic_solution(1, 2, 7, 6);
  std::vector<std::vector<std::string>> fails(samples);
  std::vector<long> counts(samples, 0);

  parallel_for(samples, workers, [&](std::size_t i) {
    std::mt19937_64 rng(seed + i);
    auto& bad = fails[i];
    long& n = counts[i];
    auto note = [&](bool ok, const std::string& what) {
      ++n;
      if (!ok) bad.push_back("sample " + std::to_string(i) + ": " + what);
    };

    DiffPoly p = random_density(rng, 2, eps_max);
    for (int a = 1; a <= 2; ++a) note(var_derivative(d_x(p), a).is_zero(), "delta_" + std::to_string(a) + " d_x != 0");

    LocalFunctional f(random_density(rng, 2, eps_max, 2, 2)), g(random_density(rng, 2, eps_max, 2, 2)),
        h(random_density(rng, 2, eps_max, 2, 2));
    auto fg = poisson_bracket(f, g, eta2).density();
    auto gf = poisson_bracket(g, f, eta2).density();
    note(LocalFunctional(fg + gf).is_zero(), "bracket not antisymmetric");
    auto jac = poisson_bracket(poisson_bracket(f, g, eta2), h, eta2).density() +
               poisson_bracket(poisson_bracket(g, h, eta2), f, eta2).density() +
               poisson_bracket(poisson_bracket(h, f, eta2), g, eta2).density();
    note(LocalFunctional(jac).is_zero(), "Jacobi identity fails");

    MiuraMap r;
    for (int a = 1; a <= 2; ++a) {
      DiffPoly u = random_density(rng, 2, eps_max, 2, 2);
      DiffPoly t = DiffPoly::jet(a, 0, eps_max);
      for (const auto& [mon, c] : u.terms())
        t.add_term(mon.eps == 0 ? JetMonomial{mon.factors, 2} : mon, c);
      r.targets.push_back(t);
    }
    MiuraMap ri = invert_miura(r);
    note(compose_miura(r, ri).is_identity() && compose_miura(ri, r).is_identity(), "Miura round trip");

    DiffPoly q = random_flux(rng, 2);
    DiffPoly back;
    try {
      back = match_diffpoly(substitute_solution(q, sol), sol, {0, 2, -1});
    } catch (const NoMatch& e) {
      back = DiffPoly(2);
    }
    note(back == q, "match o substitute != id for " + q.to_string());
  });

  for (int i = 0; i < samples; ++i) {
    rep.checks += counts[i];
    rep.failures.insert(rep.failures.end(), fails[i].begin(), fails[i].end());
  }
  return rep;
}

}  // namespace iobs
