#include <doctest.h>

#include <functional>
#include <numeric>
#include <set>

#include "iobs/trees.hpp"

using namespace iobs;

namespace {

// Independent canonical form: nested sorted vectors rendered with different brackets.
std::string oracle_code(const std::vector<int>& parent, const std::vector<int>& genus,
                        const std::vector<std::vector<int>>& legs) {
  int V = static_cast<int>(parent.size());
  std::function<std::string(int)> rec = [&](int v) {
    std::vector<std::string> kids;
    for (int w = 0; w < V; ++w)
      if (w != v && parent[w] == v) kids.push_back(rec(w));
    std::sort(kids.begin(), kids.end());
    std::vector<int> l = legs[v];
    std::sort(l.begin(), l.end());
    std::string s = "<g" + std::to_string(genus[v]) + "|";
    for (int x : l) s += std::to_string(x) + ".";
    for (auto& k : kids) s += k;
    return s + ">";
  };
  return rec(0);
}

// All trees with parent[v] < v, every genus split and leg placement, filtered by stability.
std::set<std::string> brute_force_trees(int g, int n, int m) {
  std::set<std::string> out;
  int vmax = 2 * g - 2 + n + m;
  for (int V = 1; V <= vmax; ++V) {
    std::vector<int> parent(V, -1);
    std::function<void(int)> par = [&](int v) {
      if (v == V) {
        std::vector<int> genus(V, 0);
        std::function<void(int, int)> gen = [&](int i, int left) {
          if (i == V - 1) {
            genus[i] = left;
            std::vector<int> at(n, 0);
            std::function<void(int)> leg = [&](int l) {
              if (l == n) {
                std::vector<std::vector<int>> legs(V);
                for (int j = 0; j < n; ++j) legs[at[j]].push_back(j);
                for (int u = 0; u < V; ++u) {
                  int val = static_cast<int>(legs[u].size()) + (u == 0 ? m : 1);
                  for (int w = 1; w < V; ++w)
                    if (parent[w] == u) ++val;
                  if (2 * genus[u] - 2 + val <= 0) return;
                }
                out.insert(oracle_code(parent, genus, legs));
                return;
              }
              for (int u = 0; u < V; ++u) {
                at[l] = u;
                leg(l + 1);
              }
            };
            leg(0);
            return;
          }
          for (int x = 0; x <= left; ++x) {
            genus[i] = x;
            gen(i + 1, left - x);
          }
        };
        gen(0, g);
        return;
      }
      for (int p = 0; p < v; ++p) {
        parent[v] = p;
        par(v + 1);
      }
    };
    par(1);
  }
  return out;
}

std::set<std::vector<int>> brute_force_levels(const StableRootedTree& t) {
  int V = t.nvertices();
  std::set<std::vector<int>> out;
  std::vector<int> l(V, 0);
  std::function<void(int)> rec = [&](int v) {
    if (v == V) {
      int top = *std::max_element(l.begin(), l.end());
      std::vector<bool> used(top + 1, false);
      for (int x : l) used[x] = true;
      for (bool u : used)
        if (!u) return;
      for (int w = 1; w < V; ++w)
        if (l[w] <= l[t.parent[w]]) return;
      out.insert(l);
      return;
    }
    for (int x = 1; x < V; ++x) {
      l[v] = x;
      rec(v + 1);
    }
  };
  rec(1);
  return out;
}

struct Fixture {
  TrivialCohFT cohft;
  PsiObservable psi;
  DRSource dr{cohft};
  AssemblyContext ctx{psi, cohft, &dr};
};

}  // namespace

TEST_CASE("tree enumeration examples") {
  auto t012 = enumerate_trees(0, 1, 2);
  REQUIRE(t012.size() == 1);
  CHECK(t012[0].nvertices() == 1);

  auto t111 = enumerate_trees(1, 1, 1);
  std::set<std::string> codes;
  for (auto& t : t111) codes.insert(t.code());
  CHECK(codes == std::set<std::string>{"1{1}[]", "0{1}[1{}[]]"});

  CHECK(enumerate_trees(0, 3, 0).size() == 1);
  CHECK(enumerate_trees(0, 4, 0).size() == 7);
  CHECK_THROWS(enumerate_trees(0, 1, 1));
}

TEST_CASE("tree enumeration against brute force") {
  for (int g = 0; g <= 2; ++g)
    for (int n = 0; n <= 4; ++n)
      for (int m = 0; m <= 2; ++m) {
        if (2 * g - 2 + n + m <= 0 || 2 * g - 2 + n + m > 6) continue;
        auto trees = enumerate_trees(g, n, m);
        std::set<std::string> mine;
        for (auto& t : trees) {
          CHECK(t.total_genus() == g);
          for (int v = 0; v < t.nvertices(); ++v) {
            CHECK(2 * t.genus[v] - 2 + t.valence(v) > 0);
            if (v > 0) CHECK(t.parent[v] < v);
          }
          mine.insert(oracle_code(t.parent, t.genus, t.legs));
        }
        INFO("g=" << g << " n=" << n << " m=" << m);
        CHECK(mine.size() == trees.size());  // no duplicates
        CHECK(mine == brute_force_trees(g, n, m));
      }
}

TEST_CASE("level functions") {
  StableRootedTree single{1, 2, {-1}, {0}, {{0}}};
  CHECK(enumerate_levels(single).size() == 1);

  StableRootedTree antichain{4, 0, {-1, 0, 0}, {0, 0, 0}, {{}, {0, 1}, {2, 3}}};
  CHECK(enumerate_levels(antichain).size() == 3);

  StableRootedTree chain{4, 1, {-1, 0, 1}, {0, 0, 0}, {{0}, {1}, {2, 3}}};
  auto lc = enumerate_levels(chain);
  REQUIRE(lc.size() == 1);
  CHECK(lc[0] == std::vector<int>{0, 1, 2});

  for (auto [g, n, m] : std::vector<std::tuple<int, int, int>>{{0, 5, 0}, {1, 3, 1}, {2, 1, 2}, {1, 2, 2}}) {
    for (auto& t : enumerate_trees(g, n, m)) {
      auto lv = enumerate_levels(t);
      std::set<std::vector<int>> s(lv.begin(), lv.end());
      CHECK(s.size() == lv.size());
      CHECK(s == brute_force_levels(t));
    }
  }
}

TEST_CASE("assembled B examples") {
  Fixture f;
  auto b030 = assemble_B(0, 3, 0, {{1, 1, 1}, {0, 0, 0}}, f.ctx);
  CHECK(b030.to_string() == "1");
  // degree-1 pieces cannot be integrated on Mbar_{0,3}
  CHECK(assemble_B(0, 3, 0, {{1, 1, 1}, {1, 0, 0}}, f.ctx).is_zero());

  auto b040 = assemble_B(0, 4, 0, {{1, 1, 1, 1}, {0, 0, 0, 0}}, f.ctx);
  CHECK(b040 == assemble_A(0, 4, {{1, 1, 1, 1}, {0, 0, 0, 0}}, f.ctx));
  CHECK(b040.to_string() == "a1 + a2 + a3 + a4");

  auto b110 = assemble_B(1, 1, 0, {{1}, {0}}, f.ctx);
  CHECK(b110.to_string() == "1/24*a1");
}

TEST_CASE("homogeneity for the trivial CohFT") {
  Fixture f;
  for (auto [g, n, m] : std::vector<std::tuple<int, int, int>>{{0, 4, 1}, {1, 2, 1}, {1, 1, 2}, {2, 1, 0}}) {
    int dim = 3 * g - 3 + n + m;
    auto ic = integrate_B(g, n, m, f.ctx, dim);
    for (const auto& [ins, p] : ic.values) {
      int ps = std::accumulate(ins.psi.begin(), ins.psi.end(), 0);
      for (const auto& [e, c] : p.terms()) CHECK(std::accumulate(e.begin(), e.end(), 0) == dim - ps);
    }
  }
}

TEST_CASE("worker count does not change results") {
  Fixture f;
  auto a = integrate_B(1, 3, 2, f.ctx, 4, 1).to_json().dump();
  auto b = integrate_B(1, 3, 2, f.ctx, 4, 4).to_json().dump();
  CHECK(a == b);
}

TEST_CASE("LRT-2 for psi classes") {
  Fixture f;
  for (auto [g, n] : std::vector<std::pair<int, int>>{{0, 2}, {0, 3}, {1, 1}, {1, 2}}) {
    for (bool strong : {false, true}) {
      auto r = check_lrt(2, g, n, f.ctx, {strong, 2});
      INFO(r.to_json().dump());
      CHECK(r.pass);
    }
  }
  // the check is not vacuous at (1,1): three-point insertions of degree 3
  CHECK(check_lrt(2, 1, 1, f.ctx).checked > 0);
}

TEST_CASE("perturbed observable violates LRT-2") {
  Fixture f;
  PerturbedObservable bad(f.psi, 1, {3, 0, 0}, Rational(1));
  AssemblyContext ctx{bad, f.cohft, &f.dr};
  auto r = check_lrt(2, 1, 1, ctx, {true, 1});
  CHECK_FALSE(r.pass);
  REQUIRE(!r.violations.empty());
  CHECK(r.violations[0]["monomial"].get<std::string>().find("a1") != std::string::npos);
}

TEST_CASE("LRT_0-m for m = 2, 3 (the pushforward chain is between true relations)") {
  Fixture f;
  for (int g = 0; g <= 1; ++g)
    for (int n = 1; n <= 3; ++n)
      for (int m = 2; m <= 3; ++m) {
        if (2 * g - 2 + n + m <= 0) continue;
        CHECK(check_lrt(m, g, n, f.ctx, {true, 1}).pass);
      }
}

TEST_CASE("LRT-0 and LRT-1 at genus 0 hold in every degree") {
  Fixture f;
  for (int n = 3; n <= 5; ++n) {
    int dim = n - 3;
    for (auto& ins : insertions(n, 1, dim)) {
      CHECK(assemble_B(0, n, 0, ins, f.ctx) == assemble_A(0, n, ins, f.ctx));
    }
  }
  for (int n = 2; n <= 4; ++n) CHECK(check_lrt(1, 0, n, f.ctx).pass);
  CHECK_THROWS_AS(check_lrt(1, 1, 1, f.ctx), MissingCorrelator);
}

TEST_CASE("genus-0 master relations") {
  Fixture f;
  // M-1: Coeff_{b^0} Xi^1 vanishes in every degree
  for (int n = 2; n <= 4; ++n)
    for (auto& ins : insertions(n + 1, 1, n - 2)) {
      auto xi = assemble_Xi(0, n, 1, ins, f.ctx);
      for (const auto& [e, c] : xi.terms()) CHECK((e[n] != 0 || c == 0));
    }
  for (int n = 2; n <= 3; ++n) CHECK(check_master(2, 0, n, f.ctx).pass);
  for (int m = 1; m <= 3; ++m)
    for (int n = 2; n <= 3; ++n) CHECK(check_geometric_master(m, 0, n, f.ctx).pass);
  CHECK_THROWS(assemble_Xi(0, 2, 0, {{1, 1}, {0, 0}}, f.ctx));
}

TEST_CASE("psi Upsilon does not depend on b") {
  Fixture f;
  for (auto& ins : insertions(5, 1, 2)) {
    auto u = assemble_Upsilon(0, 3, 2, ins, f.ctx);
    for (const auto& [e, c] : u.terms()) CHECK((e[3] == 0 && e[4] == 0));
  }
}

TEST_CASE("genus-1 master relations with the oracle dr_D table") {
  auto table = load_table(std::string(IOBS_DATA_DIR) + "/tables/trivial_g1_dr.jsonl", TableKind::DrD);
  TrivialCohFT cohft;
  PsiObservable psi;
  DRSource dr(cohft, &table);
  AssemblyContext ctx{psi, cohft, &dr};
  // int lambda_1 DR_1(a, -a) = a^2/24, so D_{1,2} = -a^2/24 + O(psi)
  CHECK(dr.d_class(1, {1, 1}, {0, 0}, {2}) == frac(-1, 24));
  for (int n = 1; n <= 3; ++n) {
    auto r = check_master(1, 1, n, ctx);
    INFO(r.to_json().dump());
    CHECK(r.pass);
    CHECK(r.checked > 0);
  }
  CHECK(check_master(2, 1, 1, ctx).pass);
  CHECK(check_master(2, 1, 2, ctx).pass);
  for (int m = 1; m <= 2; ++m) CHECK(check_geometric_master(m, 1, 1, ctx).pass);
  // without the table the genus-1 D class is unavailable
  DRSource bare(cohft);
  AssemblyContext ctx0{psi, cohft, &bare};
  CHECK_THROWS_AS(check_master(1, 1, 1, ctx0), MissingCorrelator);
  // a1 at genus 1 is not covered by the dr_d/dr_q completeness
  CHECK_THROWS_AS(dr.a1_class(1, {1, 1}, {0, 0}, {2}), MissingCorrelator);
}

TEST_CASE("perturbed D table violates M-1") {
  auto table = load_table(std::string(IOBS_DATA_DIR) + "/tables/trivial_g1_dr.jsonl", TableKind::DrD);
  CorrelatorKey key{1, {1, 1}, {0, 0}, {ClassType::DrD, {2}, {}}};
  table.entries.erase(key.canonical());
  table.insert(key, frac(-1, 12));
  TrivialCohFT cohft;
  PsiObservable psi;
  DRSource dr(cohft, &table);
  AssemblyContext ctx{psi, cohft, &dr};
  CHECK_FALSE(check_master(1, 1, 1, ctx).pass);
}
