#include <doctest.h>

#include <sstream>

#include "iobs/correlators.hpp"

using namespace iobs;

namespace {

// All multisets of size n with entries summing to s, as descending vectors.
void partitions(int n, int s, int maxv, std::vector<int>& cur, std::vector<std::vector<int>>& out) {
  if (n == 0) {
    if (s == 0) out.push_back(cur);
    return;
  }
  for (int v = std::min(s, maxv); v >= 0; --v) {
    cur.push_back(v);
    partitions(n - 1, s - v, v, cur, out);
    cur.pop_back();
  }
}

}  // namespace

TEST_CASE("psi goldens") {
  CHECK(psi_correlator(0, {0, 0, 0}) == 1);
  CHECK(psi_correlator(1, {1}) == Rational(1, 24));
  CHECK(psi_correlator(0, {0, 0, 1, 0}) == 1);
  CHECK(psi_correlator(1, {2, 1, 0}) == Rational(1, 12));
  CHECK(psi_correlator(2, {4}) == Rational(1, 1152));
  CHECK(psi_correlator(2, {2, 3}) == Rational(29, 5760));
  CHECK(psi_correlator(2, {2, 2, 2}) == Rational(7, 240));
  CHECK(psi_correlator(3, {7}) == Rational(1, 82944));
  CHECK(psi_correlator(1, {1, 1}) == Rational(1, 24));
  CHECK(psi_correlator(2, {1, 1}) == 0);
  CHECK_THROWS(psi_correlator(0, {1}));
}

TEST_CASE("genus 0 fast path") {
  CHECK(psi_correlator_genus0({0, 0, 0}) == 1);
  CHECK(psi_correlator_genus0({0, 1, 2, 0, 0, 0}) == 3);
  CHECK(psi_correlator_genus0({1, 1, 1, 0, 0, 0}) == 6);
  for (int n = 3; n <= 8; ++n) {
    std::vector<std::vector<int>> ps;
    std::vector<int> cur;
    partitions(n, n - 3, n, cur, ps);
    for (auto& d : ps) CHECK(psi_correlator_genus0(d) == psi_correlator(0, d));
  }
}

TEST_CASE("string and dilaton on all keys g<=3, n<=6") {
  for (int g = 0; g <= 3; ++g)
    for (int n = 1; n <= 6; ++n) {
      if (2 * g - 2 + n <= 0) continue;
      std::vector<std::vector<int>> ps;
      std::vector<int> cur;
      partitions(n, 3 * g - 3 + n, 3 * g - 2 + n, cur, ps);
      for (auto d : ps) {
        if (d.back() == 0 && 2 * g - 2 + n - 1 > 0) {
          std::vector<int> base(d.begin(), d.end() - 1);
          Rational s = 0;
          for (std::size_t j = 0; j < base.size(); ++j)
            if (base[j] > 0) {
              auto nd = base;
              nd[j]--;
              s += psi_correlator(g, nd);
            }
          CHECK(psi_correlator(g, d) == s);
        }
        auto withone = d;
        withone.push_back(1);
        CHECK(psi_correlator(g, withone) == Rational(2 * g - 2 + n) * psi_correlator(g, d));
      }
    }
}

TEST_CASE("dimension vanishing") {
  CHECK(psi_correlator(1, {2}) == 0);
  CHECK(psi_correlator(0, {0, 0, 0, 0}) == 0);
  CHECK(psi_correlator(2, {1, 1, 1}) == 0);
}

TEST_CASE("hodge relations") {
  CHECK(hodge_reduce({3, 3}, 3).empty());
  auto r = hodge_reduce({2, 2}, 3);
  CHECK(r.size() == 1);
  CHECK(r[LambdaMonomial{3, 1}] == 2);
  auto r2 = hodge_reduce({1, 1, 1}, 3);
  CHECK(r2.size() == 1);
  CHECK(r2[LambdaMonomial{2, 1}] == 2);
  CHECK(lambda_top_triple(3) == Rational(1, 725760));
  CHECK(lambda_top_triple(2) == Rational(1, 2880));
  CHECK(lambda_integral({2, 2, 2}, 3) == Rational(1, 725760));
  CHECK(lambda_integral({3, 2, 1}, 3) * 4 == Rational(1, 362880));
  // lambda_1^3 on Mbar_2 equals lambda_{g-1}^3
  CHECK(lambda_integral({1, 1, 1}, 2) == Rational(1, 2880));
}

TEST_CASE("table ingestion") {
  std::istringstream good(
      R"({"kind":"cohft_psi","N":2,"eta":[["0","1"],["1","0"]],"complete":[[0,3]],"trivial":false}
{"g":0,"fields":[1,1,2],"psi":[0,0,0],"class":{"type":"plain"},"value":"1"}
{"g":0,"fields":[2,1,1],"psi":[0,0,0],"class":{"type":"plain"},"value":"1"}
)");
  auto t = parse_table(good);
  CHECK(t.entries.size() == 1);
  CHECK(t.lookup({0, {1, 2, 1}, {0, 0, 0}, {}}).value() == 1);
  CHECK(t.lookup({0, {2, 2, 2}, {0, 0, 0}, {}}).value() == 0);
  CHECK(!t.lookup({0, {2, 2, 2, 2}, {0, 0, 0, 1}, {}}).has_value());
  CHECK_THROWS_AS(t.require({0, {2, 2, 2, 2}, {0, 0, 0, 1}, {}}), MissingCorrelator);
  CHECK(t.eta_inv[0][1] == 1);

  std::istringstream bad(
      R"({"kind":"cohft_psi","N":1}
{"g":0,"fields":[1,1,1,1],"psi":[1,0,0,0],"class":{"type":"plain"},"value":"1"}
{"g":0,"fields":[1,1,1,1],"psi":[0,0,1,0],"class":{"type":"plain"},"value":"2"}
)");
  CHECK_THROWS_AS(parse_table(bad), TableError);
  std::istringstream unknown(R"({"kind":"cohft_psi","N":1,"colour":"red"})");
  CHECK_THROWS_AS(parse_table(unknown), TableError);
  std::istringstream singular(R"({"kind":"cohft_psi","N":2,"eta":[["1","1"],["1","1"]]})");
  CHECK_THROWS_AS(parse_table(singular), TableError);
  std::istringstream unstable(R"({"kind":"cohft_psi","N":1}
{"g":0,"fields":[1,1],"psi":[0,0],"class":{"type":"plain"},"value":"1"})");
  CHECK_THROWS_AS(parse_table(unstable), TableError);

  std::istringstream round(
      R"({"kind":"dr_D","N":1}
{"g":1,"fields":[1,1],"psi":[0,0],"class":{"type":"dr_d","a":[2]},"value":"-1/24"})");
  auto d = parse_table(round);
  std::ostringstream out;
  write_table(out, d);
  std::istringstream back(out.str());
  auto d2 = parse_table(back);
  CHECK(d2.entries == d.entries);
}

TEST_CASE("trivial table delegates to the psi engine") {
  std::istringstream s(R"({"kind":"cohft_psi","N":1,"trivial":true})");
  TableCohFT c(parse_table(s));
  CHECK(c.correlator(1, {1}, {1}) == Rational(1, 24));
  CHECK(c.correlator(2, {1}, {4}) == Rational(1, 1152));
}

TEST_CASE("genus 0 D correlators") {
  TrivialCohFT triv;
  DRSource dr(triv);
  CHECK(dr.d_class(0, {1, 1, 1}, {0, 0, 0}, {0, 0}) == -1);
  CHECK(dr.d_class(0, {1, 1, 1, 1}, {0, 0, 0, 0}, {1, 0, 0}) == 1);
  CHECK(dr.d_class(0, {1, 1, 1}, {0, 0, 0}, {1, 0}) == 0);
  CHECK_THROWS_AS(dr.d_class(1, {1, 1}, {0, 0}, {2}), MissingCorrelator);
  // Chow degree 1 on Mbar_{1,2} pairs to zero with the trivial CohFT; no table needed
  CHECK(dr.d_class(1, {1, 1}, {0, 0}, {1}) == 0);
  CHECK(dr.dr_q(0, {1, 1, 1}, {0, 0, 0}, {0}) == 1);
}
