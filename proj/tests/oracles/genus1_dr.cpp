// Genus-1 DR-type correlators of the trivial CohFT, written as a dr_D table, the
// Hodge CohFT 1 + lambda_1 truncated at genus 1, written as a cohft_psi table, and the
// observable O_{g,n} = 2^g prod 1/(1 - x_i psi_i) at genus 1, written as an obs_O table.
// lambda_1 DR_1(A) = lambda_1 * (sum_j A_j^2/2 psi_j - 1/2 sum_S A_S^2 delta_0^S), where delta_0^S
// is the divisor with a rational component carrying the points S (|S| >= 2).
#include <fstream>
#include <functional>
#include <iostream>
#include <numeric>

#include "iobs/correlators.hpp"
#include "iobs/multipoly.hpp"

using namespace iobs;

namespace {

// int_{Mbar_{1,N}} lambda_1 prod psi^d = (N-1)!/(24 prod d!)
Rational lambda1_psi(const std::vector<int>& d) {
  int N = static_cast<int>(d.size());
  int s = std::accumulate(d.begin(), d.end(), 0);
  if (s != N - 1) return 0;
  return multinomial(N - 1, d) / 24;
}

// int lambda_1 DR_1(A) prod psi^p over Mbar_{1,N}, as a polynomial; A are linear forms.
MultiPoly lambda_dr(const std::vector<MultiPoly>& A, const std::vector<int>& p, const MultiPoly::VarList& vars) {
  int N = static_cast<int>(A.size());
  MultiPoly out(vars);
  for (int j = 0; j < N; ++j) {
    std::vector<int> q = p;
    q[j] += 1;
    Rational c = lambda1_psi(q);
    if (c != 0) out += A[j] * A[j] * (c / 2);
  }
  for (unsigned S = 0; S < (1u << N); ++S) {
    int sz = std::popcount(S);
    if (sz < 2) continue;
    std::vector<int> d0, d1;
    MultiPoly AS(vars);
    for (int i = 0; i < N; ++i) {
      if (S >> i & 1u) {
        d0.push_back(p[i]);
        AS += A[i];
      } else {
        d1.push_back(p[i]);
      }
    }
    d0.push_back(0);
    d1.push_back(0);
    Rational c0 = psi_correlator(0, d0);
    if (c0 == 0) continue;
    Rational c1 = lambda1_psi(d1);
    if (c1 == 0) continue;
    out -= AS * AS * (c0 * c1 / 2);
  }
  return out;
}

void all_psi(int N, int total, const std::function<void(const std::vector<int>&)>& fn) {
  std::vector<int> p(N, 0);
  std::function<void(int, int)> rec = [&](int i, int left) {
    if (i == N - 1) {
      p[i] = left;
      fn(p);
      return;
    }
    for (int x = 0; x <= left; ++x) {
      p[i] = x;
      rec(i + 1, left - x);
    }
  };
  rec(0, total);
}

CorrelatorTable hodge_table(int nmax) {
  CorrelatorTable t;
  t.kind = TableKind::CohftPsi;
  t.N = 1;
  t.eta = identity_matrix(1);
  t.eta_inv = identity_matrix(1);
  t.note = "Hodge CohFT 1 + lambda_1 + ..., genus <= 1 only";
  for (int g = 0; g <= 1; ++g)
    for (int N = 1; N <= nmax; ++N) {
      int dim = 3 * g - 3 + N;
      if (dim < 0) continue;
      t.complete.insert({g, N});
      t.degree_bounds[{g, N}] = g;
      for (int s = std::max(0, dim - g); s <= dim; ++s)
        all_psi(N, s, [&](const std::vector<int>& p) {
          Rational v = s == dim ? psi_correlator(g, p) : lambda1_psi(p);
          if (v != 0) t.insert({g, std::vector<int>(N, 1), p, {}}, v);
        });
    }
  return t;
}

void write(const CorrelatorTable& t, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path);
  write_table(out, t);
  std::cout << "wrote " << t.entries.size() << " entries to " << path << "\n";
}

CorrelatorTable dr_table(int nmax) {
  CorrelatorTable t;
  t.kind = TableKind::DrD;
  t.N = 1;
  t.eta = identity_matrix(1);
  t.eta_inv = identity_matrix(1);
  t.note = "genus 1, trivial CohFT; lambda_1 DR_1 from the compact-type formula";

  // D_{1,n+1}(a) = -lambda_1 DR_1(a, -sum a) / (1 + (sum a) psi_{n+1}) on Mbar_{1,n+1}
  for (int n = 1; n <= nmax; ++n) {
    int N = n + 1;
    t.complete_class.insert({1, N, ClassType::DrD});
    auto vars = MultiPoly::named_vars("a", n);
    std::vector<MultiPoly> A;
    MultiPoly abold(vars);
    for (int i = 0; i < n; ++i) {
      A.push_back(MultiPoly::variable(vars, i));
      abold += A.back();
    }
    A.push_back(-abold);
    for (int ps = 0; ps <= N - 2; ++ps) {
      all_psi(N, ps, [&](const std::vector<int>& p) {
        int k = N - 2 - ps;  // power of psi_{n+1} from the geometric series
        std::vector<int> q = p;
        q[n] += k;
        MultiPoly v = lambda_dr(A, q, vars) * (-abold).pow(k) * Rational(-1);
        for (const auto& [e, c] : v.terms()) {
          CorrelatorKey key{1, std::vector<int>(N, 1), p, {ClassType::DrD, e, {}}};
          t.insert(key, c);
        }
      });
    }
  }
  // lambda_1 DR_1(-sum a, 0, a_1..a_n) on Mbar_{1,n+2}
  for (int n = 0; n <= nmax; ++n) {
    int N = n + 2;
    t.complete_class.insert({1, N, ClassType::DrQ});
    auto vars = MultiPoly::named_vars("a", std::max(n, 1));
    std::vector<MultiPoly> A;
    MultiPoly abold(vars);
    std::vector<MultiPoly> legs;
    for (int i = 0; i < n; ++i) {
      legs.push_back(MultiPoly::variable(vars, i));
      abold += legs.back();
    }
    A.push_back(-abold);
    A.push_back(MultiPoly(vars));
    for (auto& l : legs) A.push_back(l);
    all_psi(N, N - 2, [&](const std::vector<int>& p) {
      MultiPoly v = lambda_dr(A, p, vars);
      for (const auto& [e, c] : v.terms()) {
        std::vector<int> ex(e.begin(), e.begin() + n);
        CorrelatorKey key{1, std::vector<int>(N, 1), p, {ClassType::DrQ, ex, {}}};
        t.insert(key, c);
      }
    });
  }
  return t;
}

// Every tree term of B carries 2^{total genus}, so the relations survive the rescaling.
CorrelatorTable scaled_psi_table(int nmax) {
  CorrelatorTable t;
  t.kind = TableKind::ObsO;
  t.N = 1;
  t.eta = identity_matrix(1);
  t.eta_inv = identity_matrix(1);
  t.note = "trivial CohFT, O = 2^g psi-class observable, genus 1";
  for (int N = 1; N <= nmax; ++N) {
    t.complete_class.insert({1, N, ClassType::ObsO});
    all_psi(N, N, [&](const std::vector<int>& total) {
      Rational v = 2 * psi_correlator(1, total);
      if (v == 0) return;
      // split each total exponent into psi and x parts
      std::vector<int> p(N, 0);
      std::function<void(int)> rec = [&](int i) {
        if (i == N) {
          std::vector<int> e(N);
          for (int j = 0; j < N; ++j) e[j] = total[j] - p[j];
          CorrelatorKey key{1, std::vector<int>(N, 1), p, {ClassType::ObsO, e, {}}};
          if (t.entries.find(key.canonical()) == t.entries.end()) t.insert(key, v);
          return;
        }
        for (p[i] = 0; p[i] <= total[i]; ++p[i]) rec(i + 1);
        p[i] = 0;
      };
      rec(0);
    });
  }
  return t;
}

}  // namespace

int main(int argc, char** argv) {
  std::string dir = argc > 1 ? argv[1] : ".";
  try {
    write(dr_table(4), dir + "/trivial_g1_dr.jsonl");
    write(hodge_table(8), dir + "/hodge_g1.jsonl");
    write(scaled_psi_table(9), dir + "/scaled_psi_g1.jsonl");
  } catch (const std::exception& e) {
    std::cerr << e.what() << "\n";
    return 2;
  }
  return 0;
}
