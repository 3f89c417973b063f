#pragma once

#include <functional>
#include <map>
#include <memory>
#include <string>
#include <vector>

#include <json.hpp>

#include "iobs/correlators.hpp"
#include "iobs/multipoly.hpp"
#include "iobs/rational.hpp"

namespace iobs {

// Runs fn(i) for i in [0, count) on up to `workers` threads.
void parallel_for(std::size_t count, int workers, const std::function<void(std::size_t)>& fn);

// Polynomial-valued classes O_{g,n}(x_1..x_n), seen through their integrals.
class Observable {
 public:
  virtual ~Observable() = default;
  // Coeff_{x^e} int_{Mbar_{g,n}} O_{g,n}(x) prod psi_i^{psi_i} pc(e_fields)
  virtual Rational integral(int g, const std::vector<int>& fields, const std::vector<int>& psi,
                            const std::vector<int>& e, const CohFT& cohft) const = 0;
  virtual std::string name() const = 0;
};

// prod 1/(1 - x_i psi_i)
class PsiObservable : public Observable {
 public:
  Rational integral(int g, const std::vector<int>& fields, const std::vector<int>& psi,
                    const std::vector<int>& e, const CohFT& cohft) const override;
  std::string name() const override { return "psi"; }
};

// obs_O table; genus 0 is the psi class.
class TableObservable : public Observable {
 public:
  explicit TableObservable(CorrelatorTable t);
  Rational integral(int g, const std::vector<int>& fields, const std::vector<int>& psi,
                    const std::vector<int>& e, const CohFT& cohft) const override;
  std::string name() const override { return "table"; }

 private:
  CorrelatorTable table_;
};

// The A classes: genus 0 from the psi class, higher genus from class "a" of a dr_D table.
class AObservable : public Observable {
 public:
  explicit AObservable(const CorrelatorTable* dr_table) : dr_table_(dr_table) {}
  Rational integral(int g, const std::vector<int>& fields, const std::vector<int>& psi,
                    const std::vector<int>& e, const CohFT& cohft) const override;
  std::string name() const override { return "A"; }

 private:
  const CorrelatorTable* dr_table_;
};

// base + delta * (psi-class coefficient) at one (g, n, e); negative controls.
class PerturbedObservable : public Observable {
 public:
  PerturbedObservable(const Observable& base, int g, std::vector<int> e, Rational delta)
      : base_(base), g_(g), e_(std::move(e)), delta_(std::move(delta)) {}
  Rational integral(int g, const std::vector<int>& fields, const std::vector<int>& psi,
                    const std::vector<int>& e, const CohFT& cohft) const override;
  std::string name() const override { return "perturbed-" + base_.name(); }

 private:
  const Observable& base_;
  int g_;
  std::vector<int> e_;
  Rational delta_;
};

// Vertex 0 is the root; parent[v] < v for v > 0. Legs are 0-based regular leg labels.
struct StableRootedTree {
  int n = 0;  // regular legs
  int m = 0;  // frozen legs, all on the root
  std::vector<int> parent;
  std::vector<int> genus;
  std::vector<std::vector<int>> legs;

  int nvertices() const { return static_cast<int>(parent.size()); }
  int total_genus() const;
  std::vector<std::vector<int>> children() const;
  // Number of half-edges at v.
  int valence(int v) const;
  // Bitmask of regular legs descending from v (v included).
  std::vector<unsigned> descendant_legs() const;
  // True when every non-root vertex has a regular leg below it (otherwise some a(e) = 0).
  bool all_edges_weighted() const;
  std::string code() const;
  nlohmann::json to_json() const;
};

std::vector<StableRootedTree> enumerate_trees(int g, int n, int m);
// Level functions as vectors indexed by vertex.
std::vector<std::vector<int>> enumerate_levels(const StableRootedTree& t);

// Where to integrate: field indices and psi exponents on all n+m points.
struct Insertion {
  std::vector<int> fields;
  std::vector<int> psi;
  auto operator<=>(const Insertion&) const = default;
};

struct IntegratedClass {
  int g = 0, n = 0, m = 0;
  MultiPoly::VarList vars;  // a_1..a_n, b_1..b_m
  std::map<Insertion, MultiPoly> values;
  nlohmann::json to_json() const;
};

struct AssemblyContext {
  const Observable& obs;
  const CohFT& cohft;
  const DRSource* dr = nullptr;  // needed for Xi / Upsilon / LRT-1 / LRT-0
};

// int B^m_{g,n} pc(e_fields) prod psi^psi, as a polynomial in (a, b).
MultiPoly assemble_B(int g, int n, int m, const Insertion& ins, const AssemblyContext& ctx);
MultiPoly assemble_Xi(int g, int n, int m, const Insertion& ins, const AssemblyContext& ctx);
MultiPoly assemble_Upsilon(int g, int n, int m, const Insertion& ins, const AssemblyContext& ctx);
// A^1_{g,n} on Mbar_{g,n+1} and A_{g,n} on Mbar_{g,n}.
MultiPoly assemble_A1(int g, int n, const Insertion& ins, const AssemblyContext& ctx);
MultiPoly assemble_A(int g, int n, const Insertion& ins, const AssemblyContext& ctx);

// All insertions (fields in 1..N, psi) on `points` points with sum(psi) <= max_psi.
std::vector<Insertion> insertions(int points, int N, int max_psi);

IntegratedClass integrate_B(int g, int n, int m, const AssemblyContext& ctx, int max_psi, int workers = 1);

enum class Relation { LRT0, LRT1, LRT2, LRTm, M, GM };
std::string to_string(Relation r);

struct CheckOptions {
  bool strong = false;  // LRT-2: check every b-monomial, not only b_2^0
  int workers = 1;
};

struct CheckReport {
  Relation relation;
  int g = 0, n = 0, m = 0;
  bool pass = true;
  long checked = 0;  // coefficients inspected
  nlohmann::json violations = nlohmann::json::array();
  nlohmann::json to_json() const;
};

// LRT-m for m >= 2, LRT-1 for m = 1, LRT-0 for m = 0.
CheckReport check_lrt(int m, int g, int n, const AssemblyContext& ctx, const CheckOptions& opt = {});
CheckReport check_master(int m, int g, int n, const AssemblyContext& ctx, const CheckOptions& opt = {});
// deg_R bound of Upsilon; needs a CohFT with known Chow degree (max_degree 0).
CheckReport check_geometric_master(int m, int g, int n, const AssemblyContext& ctx,
                                   const CheckOptions& opt = {});

}  // namespace iobs
