#include "iobs/hierarchy.hpp"

#include <algorithm>
#include <functional>
#include <numeric>
#include <sstream>

#include "iobs/bernoulli.hpp"
#include "iobs/correlators.hpp"

namespace iobs {
namespace {

int sum(const std::vector<int>& v) { return std::accumulate(v.begin(), v.end(), 0); }

// Nondecreasing tuples of length n over 1..N.
std::vector<std::vector<int>> field_tuples(int n, int N) {
  std::vector<std::vector<int>> out;
  std::vector<int> cur;
  std::function<void(int)> rec = [&](int lo) {
    if (static_cast<int>(cur.size()) == n) {
      out.push_back(cur);
      return;
    }
    for (int a = lo; a <= N; ++a) {
      cur.push_back(a);
      rec(a);
      cur.pop_back();
    }
  };
  rec(1);
  return out;
}

// Nondecreasing sequences of times of length n with sum of descendant indices <= dmax.
std::vector<std::vector<Var>> time_multisets(int n, int N, int dmax) {
  std::vector<Var> all;
  for (int a = 1; a <= N; ++a)
    for (int d = 0; d <= dmax; ++d) all.push_back({a, d});
  std::sort(all.begin(), all.end());
  std::vector<std::vector<Var>> out;
  std::vector<Var> cur;
  std::function<void(std::size_t, int)> rec = [&](std::size_t lo, int left) {
    if (static_cast<int>(cur.size()) == n) {
      out.push_back(cur);
      return;
    }
    for (std::size_t i = lo; i < all.size(); ++i) {
      if (all[i].d > left) continue;
      cur.push_back(all[i]);
      rec(i, left - all[i].d);
      cur.pop_back();
    }
  };
  rec(0, dmax);
  return out;
}

template <class T>
Rational inv_mult(const std::vector<T>& sorted) {
  Rational w = 1;
  std::size_t i = 0;
  while (i < sorted.size()) {
    std::size_t j = i;
    while (j < sorted.size() && sorted[j] == sorted[i]) ++j;
    w /= factorial(static_cast<int>(j - i));
    i = j;
  }
  return w;
}

// All vectors of n nonnegative integers with the given sum.
std::vector<std::vector<int>> compositions(int total, int n) {
  std::vector<std::vector<int>> out;
  if (n == 0) {
    if (total == 0) out.push_back({});
    return out;
  }
  std::vector<int> cur(n, 0);
  std::function<void(int, int)> rec = [&](int i, int left) {
    if (i == n - 1) {
      cur[i] = left;
      out.push_back(cur);
      return;
    }
    for (int x = 0; x <= left; ++x) {
      cur[i] = x;
      rec(i + 1, left - x);
    }
  };
  rec(0, total);
  return out;
}

JetMonomial jet_monomial(const std::vector<int>& gamma, const std::vector<int>& q, int eps) {
  JetMonomial m;
  for (std::size_t i = 0; i < gamma.size(); ++i) m.factors.push_back({gamma[i], q[i]});
  m.eps = eps;
  return m;
}

// pc_{g,npoints} may have a part of Chow degree d.
bool pc_degree_possible(const HierarchySpec& s, int g, int npoints, int d) {
  if (d < 0) return false;
  auto D = s.cohft.max_degree(g, npoints);
  return !D || d <= *D;
}

std::vector<int> concat(std::vector<int> a, const std::vector<int>& b) {
  a.insert(a.end(), b.begin(), b.end());
  return a;
}

FluxSet empty_fluxes(const HierarchySpec& s, const std::string& stem) {
  FluxSet fs;
  fs.stem = stem;
  fs.N = s.cohft.N();
  fs.eps_max = s.eps_max;
  fs.p_max = s.p_max;
  for (int a = 1; a <= fs.N; ++a)
    for (int b = 1; b <= fs.N; ++b)
      for (int p = 0; p <= s.p_max; ++p) fs.fluxes.emplace(std::make_tuple(a, b, p), DiffPoly(s.eps_max));
  for (int b = 1; b <= fs.N; ++b)
    for (int p = 0; p <= s.p_max; ++p) fs.hamiltonians.emplace(std::make_pair(b, p), DiffPoly(s.eps_max));
  return fs;
}

struct BCell {
  int g = 0, n = 0;
  std::vector<int> gamma;
  std::vector<int> frozen;
  MultiPoly value;
};

// Integrated B^m over all (g <= G, n <= max_fields, gamma, frozen fields) whose pc degree
// deg(n) can be nonzero.
std::vector<BCell> integrate_cells(const HierarchySpec& s, int m, int gmin,
                                   const std::function<bool(int g, int n)>& wanted) {
  const int N = s.cohft.N();
  std::vector<BCell> cells;
  for (int g = gmin; 2 * g <= s.eps_max; ++g)
    for (int n = 1; n <= s.max_fields; ++n) {
      if (2 * g - 2 + n + m <= 0 || !wanted(g, n)) continue;
      std::vector<std::vector<int>> frozen = field_tuples(0, N);
      for (int k = 0; k < m; ++k) {
        std::vector<std::vector<int>> next;
        for (const auto& f : frozen)
          for (int a = 1; a <= N; ++a) next.push_back(concat(f, {a}));
        frozen = next;
      }
      for (const auto& gamma : field_tuples(n, N))
        for (const auto& f : frozen) cells.push_back({g, n, gamma, f, MultiPoly()});
    }
  AssemblyContext ctx = s.context();
  parallel_for(cells.size(), s.workers, [&](std::size_t i) {
    BCell& c = cells[i];
    Insertion ins{concat(c.gamma, c.frozen), std::vector<int>(c.n + c.frozen.size(), 0)};
    c.value = assemble_B(c.g, c.n, static_cast<int>(c.frozen.size()), ins, ctx);
  });
  return cells;
}

std::string diffpoly_mismatch(const std::string& what, const DiffPoly& a, const DiffPoly& b, const std::string& stem) {
  return what + ": " + a.to_string(stem) + " vs " + b.to_string(stem);
}

}  // namespace

const DiffPoly& FluxSet::flux(int alpha, int beta, int p) const {
  auto it = fluxes.find({alpha, beta, p});
  if (it == fluxes.end())
    throw std::out_of_range("flux (" + std::to_string(alpha) + "," + std::to_string(beta) + "," + std::to_string(p) +
                            ") not computed");
  return it->second;
}

std::vector<DiffPoly> FluxSet::flow(int beta, int p) const {
  std::vector<DiffPoly> out;
  for (int a = 1; a <= N; ++a) out.push_back(flux(a, beta, p));
  return out;
}

nlohmann::json FluxSet::to_json() const {
  nlohmann::json j;
  j["stem"] = stem;
  j["N"] = N;
  j["eps_max"] = eps_max;
  j["p_max"] = p_max;
  j["fluxes"] = nlohmann::json::array();
  for (const auto& [k, v] : fluxes) {
    auto [a, b, p] = k;
    j["fluxes"].push_back({{"alpha", a}, {"beta", b}, {"p", p}, {"value", v.to_string(stem)}, {"terms", v.to_json()}});
  }
  j["hamiltonians"] = nlohmann::json::array();
  for (const auto& [k, v] : hamiltonians)
    j["hamiltonians"].push_back(
        {{"beta", k.first}, {"p", k.second}, {"value", v.to_string(stem)}, {"terms", v.to_json()}});
  return j;
}

TauData build_tau(const HierarchySpec& spec, int tdeg) {
  const int N = spec.cohft.N();
  struct Cell {
    int g;
    std::vector<Var> times;
    Rational value;
  };
  std::vector<Cell> cells;
  for (int g = 0; 2 * g <= spec.eps_max; ++g)
    for (int n = 1; n <= tdeg; ++n) {
      int dim = 3 * g - 3 + n;
      if (dim < 0) continue;
      for (auto& t : time_multisets(n, N, dim)) {
        int s = 0;
        for (const auto& v : t) s += v.d;
        if (degree_excludes(spec.cohft, g, n, s)) continue;
        cells.push_back({g, std::move(t), 0});
      }
    }
  parallel_for(cells.size(), spec.workers, [&](std::size_t i) {
    Cell& c = cells[i];
    std::vector<int> fields, d;
    for (const auto& v : c.times) {
      fields.push_back(v.alpha);
      d.push_back(v.d);
    }
    c.value = spec.obs.integral(c.g, fields, std::vector<int>(fields.size(), 0), d, spec.cohft) * inv_mult(c.times);
  });
  TauData tau;
  tau.N = N;
  tau.F = FormalSeries(spec.eps_max, tdeg);
  for (const auto& c : cells)
    if (c.value != 0) tau.F.add({2 * c.g, c.times}, c.value);
  const Matrix& ei = spec.cohft.eta_inv();
  FormalSeries F1 = tau.F.derivative({1, 0});
  for (int a = 1; a <= N; ++a) {
    FormalSeries w(spec.eps_max, tdeg - 2);
    for (int mu = 1; mu <= N; ++mu)
      if (ei[a - 1][mu - 1] != 0) w += F1.derivative({mu, 0}) * ei[a - 1][mu - 1];
    tau.w_top.push_back(w);
  }
  return tau;
}

std::vector<FormalSeries> build_vector_potential(const HierarchySpec& spec, int tdeg) {
  const int N = spec.cohft.N();
  const Matrix& ei = spec.cohft.eta_inv();
  struct Cell {
    int g, alpha;
    std::vector<Var> times;
    Rational value;
  };
  std::vector<Cell> cells;
  for (int g = 0; 2 * g <= spec.eps_max; ++g)
    for (int n = 1; n <= tdeg; ++n) {
      if (2 * g - 1 + n <= 0) continue;
      int dim = 3 * g - 2 + n;  // on Mbar_{g,n+1}
      for (auto& t : time_multisets(n, N, dim)) {
        int s = 0;
        for (const auto& v : t) s += v.d;
        if (degree_excludes(spec.cohft, g, n + 1, s)) continue;
        for (int a = 1; a <= N; ++a) cells.push_back({g, a, t, 0});
      }
    }
  parallel_for(cells.size(), spec.workers, [&](std::size_t i) {
    Cell& c = cells[i];
    std::vector<int> fields, d;
    for (const auto& v : c.times) {
      fields.push_back(v.alpha);
      d.push_back(v.d);
    }
    d.push_back(0);
    Rational total = 0;
    for (int mu = 1; mu <= N; ++mu) {
      if (ei[c.alpha - 1][mu - 1] == 0) continue;
      total += ei[c.alpha - 1][mu - 1] *
               spec.obs.integral(c.g, concat(fields, {mu}), std::vector<int>(d.size(), 0), d, spec.cohft);
    }
    c.value = total * inv_mult(c.times);
  });
  std::vector<FormalSeries> X(N, FormalSeries(spec.eps_max, tdeg));
  for (const auto& c : cells)
    if (c.value != 0) X[c.alpha - 1].add({2 * c.g, c.times}, c.value);
  return X;
}

std::vector<std::string> check_string_dilaton(const TauData& tau, const Matrix& eta) {
  std::vector<std::string> bad;
  const FormalSeries& F = tau.F;
  const int top = F.tdeg_max() - 1;
  const int N = tau.N;
  int dmax = 0;
  for (const auto& [k, c] : F.coeffs())
    for (const auto& v : k.times) dmax = std::max(dmax, v.d);

  FormalSeries S = F.derivative({1, 0});
  for (int a = 1; a <= N; ++a)
    for (int b = 1; b <= N; ++b) {
      if (eta[a - 1][b - 1] == 0) continue;
      std::vector<Var> t{{a, 0}, {b, 0}};
      std::sort(t.begin(), t.end());
      S.add({0, t}, -eta[a - 1][b - 1] / 2);
    }
  for (int a = 1; a <= N; ++a)
    for (int k = 0; k < dmax; ++k) {
      FormalSeries dF = F.derivative({a, k});
      if (dF.is_zero()) continue;
      S -= FormalSeries::time({a, k + 1}, F.eps_max(), top) * dF;
    }
  for (const auto& [k, c] : S.coeffs())
    if (static_cast<int>(k.times.size()) <= top && c != 0) {
      std::ostringstream os;
      os << "string: eps^" << k.eps << " t-degree " << k.times.size() << " residual " << to_string(c);
      bad.push_back(os.str());
    }

  FormalSeries D = F.derivative({1, 1});
  for (const auto& [k, c] : F.coeffs()) {
    if (k.times.empty()) continue;
    D.add(k, -c * (k.eps + static_cast<int>(k.times.size()) - 2));
  }
  for (const auto& [k, c] : D.coeffs())
    if (!k.times.empty() && static_cast<int>(k.times.size()) <= top && c != 0) {
      std::ostringstream os;
      os << "dilaton: eps^" << k.eps << " t-degree " << k.times.size() << " residual " << to_string(c);
      bad.push_back(os.str());
    }
  return bad;
}

bool check_triangularity(const TauData& tau, int dmax) {
  for (int a = 1; a <= tau.N; ++a) {
    FormalSeries W = tau.w_top[a - 1];
    for (int d = 0; d <= dmax; ++d) {
      if (d > 0) W = W.derivative({1, 0});
      FormalSeries r = W;
      r.add({0, {{a, d}}}, -1);
      if (a == 1 && d == 1) r.add({0, {}}, -1);
      for (const auto& [k, c] : r.coeffs()) {
        if (k.eps != 0 || c == 0 || static_cast<int>(k.times.size()) > W.tdeg_max()) continue;
        int s = 0;
        for (const auto& v : k.times) s += v.d;
        if (k.times.size() <= 1 || s <= d) return false;
      }
    }
  }
  return true;
}

FluxSet match_flux_R(const HierarchySpec& spec, int tdeg) {
  TauData tau = build_tau(spec, tdeg);
  const int N = spec.cohft.N();
  const Matrix& ei = spec.cohft.eta_inv();
  FluxSet fs = empty_fluxes(spec, "w");
  MatchOptions opt{0, spec.eps_max, -1};
  std::vector<FormalSeries> dmu;
  for (int mu = 1; mu <= N; ++mu) dmu.push_back(tau.F.derivative({mu, 0}));
  for (int b = 1; b <= N; ++b)
    for (int p = 0; p <= spec.p_max; ++p) {
      for (int a = 1; a <= N; ++a) {
        FormalSeries series(spec.eps_max, tdeg - 2);
        for (int mu = 1; mu <= N; ++mu)
          if (ei[a - 1][mu - 1] != 0) series += dmu[mu - 1].derivative({b, p}) * ei[a - 1][mu - 1];
        fs.fluxes.at({a, b, p}) = match_diffpoly(series, tau.w_top, opt);
      }
      fs.hamiltonians.at({b, p}) = match_diffpoly(dmu[0].derivative({b, p + 1}), tau.w_top, opt);
    }
  return fs;
}

FluxSet build_flux_R(const HierarchySpec& spec) {
  const int N = spec.cohft.N();
  const Matrix& ei = spec.cohft.eta_inv();
  auto cells = integrate_cells(spec, 2, 0, [&](int g, int n) {
    for (int p = 0; p <= spec.p_max + 1; ++p)
      if (pc_degree_possible(spec, g, n + 2, g - 1 + n - p)) return true;
    return false;
  });
  FluxSet fs = empty_fluxes(spec, "w");
  for (const auto& c : cells) {
    const int beta = c.frozen[0], mu = c.frozen[1];
    Rational w = inv_mult(c.gamma);
    for (const auto& [e, coef] : c.value.terms()) {
      if (e[c.n + 1] != 0) continue;
      const int p = e[c.n];
      std::vector<int> q(e.begin(), e.begin() + c.n);
      if (sum(q) != 2 * c.g) continue;
      JetMonomial m = jet_monomial(c.gamma, q, 2 * c.g);
      if (p <= spec.p_max)
        for (int a = 1; a <= N; ++a)
          if (ei[a - 1][mu - 1] != 0) fs.fluxes.at({a, beta, p}).add_term(m, coef * w * ei[a - 1][mu - 1]);
      if (mu == 1 && p >= 1 && p - 1 <= spec.p_max) fs.hamiltonians.at({beta, p - 1}).add_term(m, coef * w);
    }
  }
  if (spec.cross_check) {
    FluxSet other = match_flux_R(spec, spec.p_max + spec.eps_max + 4);
    for (const auto& [k, v] : fs.fluxes) {
      auto [a, b, p] = k;
      if (!(v == other.fluxes.at(k)))
        throw FluxMismatch(diffpoly_mismatch("R^" + std::to_string(a) + "_{" + std::to_string(b) + "," +
                                                 std::to_string(p) + "}",
                                             v, other.fluxes.at(k), "w"));
    }
    for (const auto& [k, v] : fs.hamiltonians)
      if (!(v == other.hamiltonians.at(k)))
        throw FluxMismatch(diffpoly_mismatch(
            "h_{" + std::to_string(k.first) + "," + std::to_string(k.second) + "}", v, other.hamiltonians.at(k), "w"));
  }
  return fs;
}

FluxSet build_flux_DR(const HierarchySpec& spec) {
  if (!spec.dr) throw MissingCorrelator("DR fluxes need a DR source");
  const int N = spec.cohft.N();
  const Matrix& ei = spec.cohft.eta_inv();
  const Matrix& eta = spec.cohft.eta();
  const int pq = spec.p_max + 1;  // h needs one more
  struct Cell {
    int g, n;
    std::vector<int> gamma;
    int beta, mu, p;
    std::vector<int> q;
    Rational value;
  };
  std::vector<Cell> cells;
  for (int g = 0; 2 * g <= spec.eps_max; ++g)
    for (int n = 1; n <= spec.max_fields; ++n)
      for (int p = 0; p <= pq; ++p) {
        if (!pc_degree_possible(spec, g, n + 2, g - 1 + n - p)) continue;
        for (const auto& gamma : field_tuples(n, N))
          for (const auto& q : compositions(2 * g, n))
            for (int b = 1; b <= N; ++b)
              for (int mu = 1; mu <= N; ++mu) cells.push_back({g, n, gamma, b, mu, p, q, 0});
      }
  parallel_for(cells.size(), spec.workers, [&](std::size_t i) {
    Cell& c = cells[i];
    std::vector<int> psi(c.n + 2, 0);
    psi[1] = c.p;
    c.value = spec.dr->dr_q(c.g, concat({c.mu, c.beta}, c.gamma), psi, c.q);
  });
  std::map<std::tuple<int, int, int>, DiffPoly> Q;
  for (int a = 1; a <= N; ++a)
    for (int b = 1; b <= N; ++b)
      for (int p = 0; p <= pq; ++p) Q.emplace(std::make_tuple(a, b, p), DiffPoly(spec.eps_max));
  for (const auto& c : cells) {
    if (c.value == 0) continue;
    JetMonomial m = jet_monomial(c.gamma, c.q, 2 * c.g);
    Rational w = inv_mult(c.gamma) * c.value;
    for (int a = 1; a <= N; ++a)
      if (ei[a - 1][c.mu - 1] != 0) Q.at({a, c.beta, c.p}).add_term(m, w * ei[a - 1][c.mu - 1]);
  }
  FluxSet fs = empty_fluxes(spec, "u");
  for (auto& [k, v] : fs.fluxes) v = Q.at(k);
  for (auto& [k, v] : fs.hamiltonians)
    for (int mu = 1; mu <= N; ++mu)
      if (eta[0][mu - 1] != 0) v += Q.at({mu, k.first, k.second + 1}) * eta[0][mu - 1];
  return fs;
}

MiuraMap miura_O_to_DR(const HierarchySpec& spec) {
  const int N = spec.cohft.N();
  const Matrix& ei = spec.cohft.eta_inv();
  auto cells = integrate_cells(spec, 1, 1,
                               [&](int g, int n) { return pc_degree_possible(spec, g, n + 1, g - 1 + n); });
  std::vector<DiffPoly> R(N, DiffPoly(spec.eps_max));
  for (const auto& c : cells) {
    const int mu = c.frozen[0];
    Rational w = inv_mult(c.gamma);
    for (const auto& [e, coef] : c.value.terms()) {
      if (e[c.n] != 0) continue;
      std::vector<int> q(e.begin(), e.begin() + c.n);
      if (sum(q) != 2 * c.g - 1) continue;
      JetMonomial m = jet_monomial(c.gamma, q, 2 * c.g);
      for (int a = 1; a <= N; ++a)
        if (ei[a - 1][mu - 1] != 0) R[a - 1].add_term(m, coef * w * ei[a - 1][mu - 1]);
    }
  }
  MiuraMap m;
  m.kind = MiuraKind::SecondKind;
  for (int a = 1; a <= N; ++a) m.targets.push_back(DiffPoly::jet(a, 0, spec.eps_max) - d_x(R[a - 1]));
  return m;
}

MiuraMap dr_normal_coordinates(const HierarchySpec& spec) {
  if (!spec.dr) throw MissingCorrelator("normal coordinates need a DR source");
  const int N = spec.cohft.N();
  const Matrix& ei = spec.cohft.eta_inv();
  struct Cell {
    int g, n;
    std::vector<int> gamma;
    int mu;
    std::vector<int> q;
    Rational value;
  };
  std::vector<Cell> cells;
  for (int g = 0; 2 * g <= spec.eps_max; ++g)
    for (int n = 1; n <= spec.max_fields; ++n) {
      if (!pc_degree_possible(spec, g, n + 2, g - 1 + n)) continue;
      for (const auto& gamma : field_tuples(n, N))
        for (const auto& q : compositions(2 * g, n))
          for (int mu = 1; mu <= N; ++mu) cells.push_back({g, n, gamma, mu, q, 0});
    }
  parallel_for(cells.size(), spec.workers, [&](std::size_t i) {
    Cell& c = cells[i];
    c.value = spec.dr->dr_q(c.g, concat({1, c.mu}, c.gamma), std::vector<int>(c.n + 2, 0), c.q);
  });
  MiuraMap m;
  m.kind = MiuraKind::Normal;
  m.targets.assign(N, DiffPoly(spec.eps_max));
  for (const auto& c : cells) {
    if (c.value == 0) continue;
    JetMonomial jm = jet_monomial(c.gamma, c.q, 2 * c.g);
    Rational w = inv_mult(c.gamma) * c.value;
    for (int a = 1; a <= N; ++a)
      if (ei[a - 1][c.mu - 1] != 0) m.targets[a - 1].add_term(jm, w * ei[a - 1][c.mu - 1]);
  }
  return m;
}

NormalMiura normal_miura(const HierarchySpec& spec, const FluxSet& fluxes) {
  const int N = spec.cohft.N();
  const Matrix& ei = spec.cohft.eta_inv();
  auto cells = integrate_cells(spec, 0, 1, [&](int g, int n) { return pc_degree_possible(spec, g, n, g - 1 + n); });
  NormalMiura out{DiffPoly(spec.eps_max), {}};
  for (const auto& c : cells) {
    Rational w = inv_mult(c.gamma);
    for (const auto& [e, coef] : c.value.terms()) {
      std::vector<int> q(e.begin(), e.begin() + c.n);
      if (sum(q) != 2 * c.g - 2) continue;
      out.generator.add_term(jet_monomial(c.gamma, q, 2 * c.g), coef * w);
    }
  }
  const int kmax = out.generator.max_order();
  out.map.kind = MiuraKind::Normal;
  for (int a = 1; a <= N; ++a) {
    DiffPoly corr(spec.eps_max);
    for (int mu = 1; mu <= N; ++mu) {
      if (ei[a - 1][mu - 1] == 0) continue;
      DiffPoly inner(spec.eps_max);
      for (int z = 1; z <= N; ++z) {
        DiffPoly Rz = fluxes.flux(z, mu, 0);
        for (int k = 0; k <= kmax; ++k) {
          DiffPoly dG = partial(out.generator, {z, k});
          if (!dG.is_zero()) inner += dG * d_x_pow(Rz, k + 1);
        }
      }
      corr += d_x(inner) * ei[a - 1][mu - 1];
    }
    out.map.targets.push_back((DiffPoly::jet(a, 0, spec.eps_max) - corr).truncated(spec.eps_max));
  }
  return out;
}

std::vector<DiffPoly> miura_flux_residual(const MiuraMap& m, const std::vector<DiffPoly>& R,
                                          const std::vector<DiffPoly>& Q, int eps_max) {
  std::vector<DiffPoly> out;
  for (int a = 1; a <= m.N(); ++a) {
    DiffPoly lhs = flow_derivative(m.targets[a - 1], R);
    DiffPoly rhs = d_x(substitute_jets(Q[a - 1], m.targets));
    out.push_back((lhs - rhs).truncated(eps_max));
  }
  return out;
}

std::vector<DiffPoly> miura_roundtrip_residual(const MiuraMap& a, const MiuraMap& b) {
  MiuraMap c = compose_miura(a, b);
  std::vector<DiffPoly> out;
  for (int i = 1; i <= c.N(); ++i) out.push_back(c.targets[i - 1] - DiffPoly::jet(i, 0, c.targets[i - 1].eps_max()));
  return out;
}

bool CommutationReport::all_commute() const {
  return std::all_of(entries.begin(), entries.end(), [](const Entry& e) { return e.commute; });
}

nlohmann::json CommutationReport::to_json() const {
  nlohmann::json j = nlohmann::json::array();
  for (const auto& e : entries) {
    nlohmann::json r = nlohmann::json::array();
    for (const auto& d : e.residual) r.push_back(d.to_string());
    j.push_back({{"flow1", {e.pair.beta1, e.pair.p1}},
                 {"flow2", {e.pair.beta2, e.pair.p2}},
                 {"commute", e.commute},
                 {"residual", r}});
  }
  return j;
}

CommutationReport check_commutation(const FluxSet& fluxes, const std::vector<FlowPair>& pairs, int eps_max) {
  CommutationReport rep;
  for (const auto& pr : pairs) {
    auto Q1 = fluxes.flow(pr.beta1, pr.p1);
    auto Q2 = fluxes.flow(pr.beta2, pr.p2);
    CommutationReport::Entry e{pr, true, {}};
    for (int a = 1; a <= fluxes.N; ++a) {
      DiffPoly r = flow_derivative(d_x(Q2[a - 1]), Q1) - flow_derivative(d_x(Q1[a - 1]), Q2);
      r = r.truncated(eps_max);
      if (!r.is_zero()) e.commute = false;
      e.residual.push_back(r);
    }
    rep.entries.push_back(std::move(e));
  }
  return rep;
}

bool hamiltonians_commute(const FluxSet& fluxes, const FlowPair& pair, const Matrix& eta_inv, int eps_max) {
  LocalFunctional h1(fluxes.hamiltonians.at({pair.beta1, pair.p1}).truncated(eps_max));
  LocalFunctional h2(fluxes.hamiltonians.at({pair.beta2, pair.p2}).truncated(eps_max));
  return poisson_bracket(h1, h2, eta_inv).is_zero();
}

std::vector<std::string> KdvReport::lines() const {
  return {"int_{Mbar_{0,4}} Coeff_{b_1} B^2_{0,2} = " + to_string(integral_04),
          "int_{Mbar_{1,3}} Coeff_{b_1 a_1^2} B^2_{1,1} = " + to_string(integral_13),
          "R^1_{1,1} = " + flux.to_string(),
          "d_{t^{1,1}} w^{1,0} = " + evolution.to_string()};
}

nlohmann::json KdvReport::to_json() const {
  return {{"integral_04", to_string(integral_04)},
          {"integral_13", to_string(integral_13)},
          {"flux", flux.to_string()},
          {"evolution", evolution.to_string()},
          {"lines", lines()}};
}

KdvReport kdv_demo(int workers) {
  TrivialCohFT pc;
  PsiObservable obs;
  HierarchySpec spec{pc, obs, nullptr, 2, 1, 6, workers, true};
  AssemblyContext ctx = spec.context();
  KdvReport r;
  r.integral_04 = assemble_B(0, 2, 2, {{1, 1, 1, 1}, {0, 0, 0, 0}}, ctx).coeff({0, 0, 1, 0});
  r.integral_13 = assemble_B(1, 1, 2, {{1, 1, 1}, {0, 0, 0}}, ctx).coeff({2, 1, 0});
  FluxSet fs = build_flux_R(spec);
  r.flux = fs.flux(1, 1, 1);
  r.evolution = d_x(r.flux);
  return r;
}

std::string HodgeReport::formatted() const {
  if (coefficient.is_zero()) return "0";
  mpz_class L = 1;
  for (const auto& [e, c] : coefficient.terms()) mpz_lcm(L.get_mpz_t(), L.get_mpz_t(), c.get_den_mpz_t());
  MultiPoly scaled = coefficient * Rational(L);
  if (L == 1) return scaled.to_string();
  return "(" + scaled.to_string() + ")/" + L.get_str();
}

nlohmann::json HodgeReport::to_json() const {
  return {{"M", M},
          {"coefficient", formatted()},
          {"chain_value", to_string(chain_value)},
          {"bernoulli_value", to_string(bernoulli_value)}};
}

HodgeReport hodge_demo(int M) {
  if (M < 1) throw std::invalid_argument("hodge_demo: M >= 1");
  HodgeReport r;
  r.M = M;
  r.coefficient = MultiPoly(MultiPoly::named_vars("x", M));
  // degree-3 part of prod_i Lambda(x_i), paired with lambda_3 on Mbar_{3,1}
  for (const auto& j : compositions(3, M)) {
    LambdaMonomial lm{3};
    for (int x : j)
      if (x > 0) lm.push_back(x);
    std::sort(lm.rbegin(), lm.rend());
    Rational v = 4 * lambda_integral(lm, 3);
    if (v != 0) r.coefficient.add_term(j, v);
  }
  r.chain_value = 4 * lambda_integral({3, 2, 1}, 3);
  r.bernoulli_value = 2 * abs(bernoulli_number(4)) * abs(bernoulli_number(6)) / 576;
  return r;
}

Rational FCohFTView::correlator(int g, int alpha, const std::vector<int>& fields, int psi0,
                                const std::vector<int>& psi) const {
  const Matrix& ei = pc_.eta_inv();
  Rational total = 0;
  for (int mu = 1; mu <= pc_.N(); ++mu) {
    if (ei[alpha - 1][mu - 1] == 0) continue;
    total += ei[alpha - 1][mu - 1] * pc_.correlator(g, concat(fields, {mu}), concat(psi, {psi0}));
  }
  return total;
}

}  // namespace iobs
