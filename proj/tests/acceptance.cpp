// Acceptance run: one PASS/FAIL line per criterion, with wall time against its limit.
// Usage: acceptance [seed]

#include <algorithm>
#include <chrono>
#include <cstdio>
#include <functional>
#include <iostream>
#include <sstream>
#include <string>
#include <thread>

#include "iobs/bernoulli.hpp"
#include "iobs/hierarchy.hpp"
#include "iobs/piident.hpp"

using namespace iobs;

namespace {

constexpr int kWorkers = 4;

struct Outcome {
  bool ok = true;
  std::string detail;
  void require(bool cond, const std::string& what) {
    if (!cond && ok) {
      ok = false;
      detail = what;
    }
  }
};

bool run(int id, const std::string& title, double limit_s, const std::function<void(Outcome&)>& body) {
  Outcome o;
  auto t0 = std::chrono::steady_clock::now();
  try {
    body(o);
  } catch (const std::exception& e) {
    o.ok = false;
    o.detail = std::string("exception: ") + e.what();
  }
  double s = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  if (o.ok && s >= limit_s) {
    o.ok = false;
    o.detail = "time limit exceeded";
  }
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.2f s / %.0f s", s, limit_s);
  std::cout << (o.ok ? "PASS" : "FAIL") << " " << id << " " << title << " (" << buf << ")";
  if (!o.detail.empty()) std::cout << " : " << o.detail;
  std::cout << std::endl;
  return o.ok;
}

std::string table(const std::string& name) { return std::string(IOBS_DATA_DIR) + "/tables/" + name; }

// All sorted psi vectors of length n summing to s.
void partitions(int n, int s, int min, std::vector<int>& cur, std::vector<std::vector<int>>& out) {
  if (static_cast<int>(cur.size()) == n) {
    if (s == 0) out.push_back(cur);
    return;
  }
  for (int d = min; d <= s; ++d) {
    cur.push_back(d);
    partitions(n, s - d, d, cur, out);
    cur.pop_back();
  }
}

int string_dilaton(Outcome& o) {
  int count = 0;
  for (int g = 0; g <= 3; ++g)
    for (int n = 1; n <= 6; ++n) {
      int dim = 3 * g - 3 + n;
      if (2 * g - 2 + n <= 0 || dim < 0) continue;
      std::vector<std::vector<int>> keys;
      std::vector<int> cur;
      partitions(n, dim, 0, cur, keys);
      for (const auto& d : keys) {
        Rational v = psi_correlator(g, d);
        std::vector<int> rest(d.begin() + 1, d.end());
        bool stable_rest = 2 * g - 2 + (n - 1) > 0;
        std::ostringstream key;
        key << "g=" << g << " psi=";
        for (int x : d) key << x;
        if (d[0] == 0 && stable_rest) {
          Rational s = 0;
          for (std::size_t j = 0; j < rest.size(); ++j)
            if (rest[j] > 0) {
              auto r = rest;
              --r[j];
              s += psi_correlator(g, r);
            }
          o.require(v == s, "string equation at " + key.str());
          ++count;
        }
        auto one = std::find(d.begin(), d.end(), 1);
        if (one != d.end() && stable_rest) {
          std::vector<int> r = d;
          r.erase(r.begin() + (one - d.begin()));
          o.require(v == Rational(2 * g - 2 + n - 1) * psi_correlator(g, r), "dilaton equation at " + key.str());
          ++count;
        }
      }
    }
  return count;
}

}  // namespace

int main(int argc, char** argv) {
  std::uint64_t seed = argc > 1 ? std::stoull(argv[1]) : 20240601;
  std::cout << "seed " << seed << ", workers " << kWorkers << ", hardware threads "
            << std::thread::hardware_concurrency() << std::endl;
  bool all = true;

  all &= run(1, "KdV reproduction", 1, [](Outcome& o) {
    KdvReport r = kdv_demo(1);
    o.require(r.integral_04 == 1, "int over Mbar_{0,4} is " + to_string(r.integral_04));
    o.require(r.integral_13 == frac(1, 12), "int over Mbar_{1,3} is " + to_string(r.integral_13));
    o.require(r.flux.to_string() == "1/2*(w[1,0])^2 + 1/12*eps^2*w[1,2]", "flux " + r.flux.to_string());
    o.require(r.evolution.to_string() == "w[1,0]*w[1,1] + 1/12*eps^2*w[1,3]", "evolution " + r.evolution.to_string());
  });

  all &= run(2, "psi-correlator goldens and string/dilaton (g <= 3, n <= 6)", 5, [](Outcome& o) {
    o.require(psi_correlator(0, {0, 0, 0}) == 1, "<tau_0^3>_0");
    o.require(psi_correlator(0, {0, 0, 0, 1}) == 1, "<tau_0^3 tau_1>_0");
    o.require(psi_correlator(1, {1}) == frac(1, 24), "<tau_1>_1");
    o.require(psi_correlator(1, {2, 1, 0}) == frac(1, 12), "<tau_2 tau_1 tau_0>_1");
    int k = string_dilaton(o);
    o.require(k > 0, "no string/dilaton keys");
    if (o.ok) o.detail = std::to_string(k) + " string/dilaton checks";
  });

  all &= run(3, "Hodge example", 1, [](Outcome& o) {
    o.require(hodge_demo(1).formatted() == "0", "M = 1");
    o.require(hodge_demo(2).formatted() == "(x1^2*x2 + x1*x2^2)/362880", "M = 2");
    HodgeReport r = hodge_demo(3);
    o.require(r.formatted() == "(x1^2*x2 + x1^2*x3 + x1*x2^2 + 2*x1*x2*x3 + x1*x3^2 + x2^2*x3 + x2*x3^2)/362880",
              "M = 3: " + r.formatted());
    Rational b = Rational(2) * abs(bernoulli_number(4)) * abs(bernoulli_number(6)) / Rational(576);
    o.require(r.chain_value == frac(1, 362880), "lambda chain " + to_string(r.chain_value));
    o.require(r.chain_value == b, "Bernoulli product " + to_string(b));
  });

  all &= run(4, "LRT-2 property suite", 60, [](Outcome& o) {
    TrivialCohFT pc;
    PsiObservable psi;
    DRSource dr(pc);
    AssemblyContext ctx{psi, pc, &dr};
    std::vector<std::pair<int, int>> cells{{0, 1}, {0, 2}, {0, 3}, {0, 4}, {1, 1}, {1, 2}, {1, 3}, {2, 1}, {2, 2}};
    long checked = 0;
    for (auto [g, n] : cells) {
      CheckReport r = check_lrt(2, g, n, ctx, {true, kWorkers});
      checked += r.checked;
      o.require(r.pass, r.to_json().dump());
    }
    o.require(checked > 0, "vacuous");
    o.detail = o.ok ? std::to_string(checked) + " coefficients" : o.detail;
  });

  all &= run(5, "genus-0 master relations", 30, [](Outcome& o) {
    TrivialCohFT pc;
    PsiObservable psi;
    DRSource dr(pc);
    AssemblyContext ctx{psi, pc, &dr};
    for (int n = 2; n <= 4; ++n) {
      CheckReport r = check_master(1, 0, n, ctx, {false, kWorkers});
      o.require(r.pass && r.checked > 0, r.to_json().dump());
    }
    for (int n = 2; n <= 3; ++n) {
      CheckReport r = check_master(2, 0, n, ctx, {false, kWorkers});
      o.require(r.pass && r.checked > 0, r.to_json().dump());
    }
  });

  all &= run(6, "Pi dilaton identities (g <= 5, n <= 6, m <= 8)", 30, [](Outcome& o) {
    PiOptions opt;
    opt.workers = kWorkers;
    PiReport r = verify_dilaton_range(5, 6, 8, opt);
    o.require(r.pass(), r.failures.empty() ? "" : r.failures.front().generator);
    if (o.ok) o.detail = std::to_string(r.checked) + " checks";
  });

  all &= run(7, "algebra property suite (100 seeded densities)", 60, [seed](Outcome& o) {
    AlgebraReport r = check_algebra_properties(seed, 100, 4, kWorkers);
    o.require(r.pass(), r.failures.empty() ? "" : r.failures.front());
    if (o.ok) o.detail = std::to_string(r.checks) + " checks";
  });

  all &= run(8, "KdV commutation up to eps^4 and negative control", 30, [](Outcome& o) {
    TrivialCohFT pc;
    PsiObservable psi;
    HierarchySpec spec{pc, psi, nullptr, 4, 2};
    spec.workers = kWorkers;
    FluxSet R = build_flux_R(spec);
    o.require(check_commutation(R, {{1, 1, 1, 2}}, 4).all_commute(), "flows (1,1) and (1,2) do not commute");
    FluxSet bad = R;
    bad.fluxes.at({1, 1, 2}).add_term(JetMonomial{{{1, 4}}, 4}, frac(1, 1000));
    o.require(!check_commutation(bad, {{1, 1, 1, 2}}, 4).all_commute(), "perturbed flux still commutes");
  });

  all &= run(9, "dispersionless universality (p <= 3)", 10, [](Outcome& o) {
    TrivialCohFT pc;
    PsiObservable psi;
    TableObservable scaled(load_table(table("scaled_psi_g1.jsonl"), TableKind::ObsO));
    HierarchySpec a{pc, psi, nullptr, 2, 3};
    HierarchySpec b{pc, scaled, nullptr, 2, 3};
    a.workers = b.workers = kWorkers;
    FluxSet Ra = build_flux_R(a), Rb = build_flux_R(b);
    bool differs = false;
    for (int p = 0; p <= 3; ++p) {
      o.require(Ra.flux(1, 1, p).eps_part(0) == Rb.flux(1, 1, p).eps_part(0), "eps^0 flux p = " + std::to_string(p));
      differs = differs || !(Ra.flux(1, 1, p) == Rb.flux(1, 1, p));
    }
    o.require(differs, "the two observables give identical dispersive fluxes");
  });

  std::cout << (all ? "ALL PASS" : "SOME FAILED") << std::endl;
  return all ? 0 : 1;
}
