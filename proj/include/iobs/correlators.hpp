#pragma once

#include <map>
#include <optional>
#include <set>
#include <tuple>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

#include "iobs/rational.hpp"

namespace iobs {

using Matrix = std::vector<std::vector<Rational>>;

// <tau_{d_1} ... tau_{d_n}>_g for the trivial CohFT.
Rational psi_correlator(int g, const std::vector<int>& d);
// (n-3)! / prod d_i!
Rational psi_correlator_genus0(const std::vector<int>& d);

// Products of lambda classes on Mbar_g, as multisets of indices (lambda_0 dropped).
using LambdaMonomial = std::vector<int>;
using LambdaCombination = std::map<LambdaMonomial, Rational>;
// Rewrites squares with Mumford's relation until every index occurs once.
LambdaCombination hodge_reduce(const LambdaMonomial& indices, int g);
// int_{Mbar_g} lambda_{g-1}^3
Rational lambda_top_triple(int g);
// int_{Mbar_g} of a degree 3g-3 lambda monomial, via hodge_reduce and lambda_top_triple.
Rational lambda_integral(const LambdaMonomial& indices, int g);

class MissingCorrelator : public std::runtime_error {
 public:
  explicit MissingCorrelator(const std::string& what) : std::runtime_error(what) {}
};

class TableError : public std::runtime_error {
 public:
  explicit TableError(const std::string& what) : std::runtime_error(what) {}
};

enum class TableKind { CohftPsi, ObsO, DrD, FcohftPsi };
std::string to_string(TableKind k);
TableKind table_kind_from_string(const std::string& s);

enum class ClassType { Plain, Lambda, DrD, ObsO, A1, A, DrQ };
std::string to_string(ClassType t);

struct ClassTag {
  ClassType type = ClassType::Plain;
  std::vector<int> exps;   // monomial exponents (a, then b for obs_o)
  std::vector<int> parts;  // lambda indices
  auto operator<=>(const ClassTag&) const = default;
};

struct CorrelatorKey {
  int g = 0;
  std::vector<int> fields;  // 1-based field indices, one per marked point
  std::vector<int> psi;
  ClassTag cls;
  auto operator<=>(const CorrelatorKey&) const = default;

  int npoints() const { return static_cast<int>(fields.size()); }
  // Sorts the symmetric marked points simultaneously with their data.
  CorrelatorKey canonical() const;
  std::string describe() const;
};

struct CorrelatorTable {
  TableKind kind = TableKind::CohftPsi;
  int N = 1;
  Matrix eta;
  Matrix eta_inv;
  std::set<std::pair<int, int>> complete;  // (g, number of marked points)
  // Completeness for one class type only: [g, n, "dr_d"] in the header.
  std::set<std::tuple<int, int, ClassType>> complete_class;
  std::map<std::pair<int, int>, int> degree_bounds;
  bool trivial = false;
  std::string note;
  std::map<CorrelatorKey, Rational> entries;

  std::optional<Rational> lookup(const CorrelatorKey& key) const;
  // Throws MissingCorrelator when the key is absent and not covered by "complete".
  Rational require(const CorrelatorKey& key) const;
  void insert(const CorrelatorKey& key, const Rational& v);
};

CorrelatorTable load_table(const std::string& path, std::optional<TableKind> expected = std::nullopt);
CorrelatorTable parse_table(std::istream& in, std::optional<TableKind> expected = std::nullopt);
void write_table(std::ostream& out, const CorrelatorTable& t);
// Search COHFT_TABLE_PATH (colon separated) when name is not an existing path.
std::string resolve_table_path(const std::string& name);

Matrix identity_matrix(int n);
Matrix invert_matrix(const Matrix& m);  // throws TableError if singular

// A P-CohFT seen through its psi-integrals.
class CohFT {
 public:
  virtual ~CohFT() = default;
  virtual int N() const = 0;
  virtual const Matrix& eta() const = 0;
  virtual const Matrix& eta_inv() const = 0;
  // int_{Mbar_{g,n}} pc(e_fields) prod psi_i^{psi_i}
  virtual Rational correlator(int g, const std::vector<int>& fields, const std::vector<int>& psi) const = 0;
  // Upper bound on the Chow degree of pc_{g,n}, if known.
  virtual std::optional<int> max_degree(int g, int n) const = 0;
  virtual std::string name() const = 0;
};

class TrivialCohFT : public CohFT {
 public:
  TrivialCohFT();
  int N() const override { return 1; }
  const Matrix& eta() const override { return eta_; }
  const Matrix& eta_inv() const override { return eta_; }
  Rational correlator(int g, const std::vector<int>& fields, const std::vector<int>& psi) const override;
  std::optional<int> max_degree(int, int) const override { return 0; }
  std::string name() const override { return "trivial"; }

 private:
  Matrix eta_;
};

class TableCohFT : public CohFT {
 public:
  explicit TableCohFT(CorrelatorTable t);
  int N() const override { return table_.N; }
  const Matrix& eta() const override { return table_.eta; }
  const Matrix& eta_inv() const override { return table_.eta_inv; }
  Rational correlator(int g, const std::vector<int>& fields, const std::vector<int>& psi) const override;
  std::optional<int> max_degree(int g, int n) const override;
  std::string name() const override { return "table"; }
  const CorrelatorTable& table() const { return table_; }

 private:
  CorrelatorTable table_;
};

// True when a class of Chow degree `chow` pairs to zero with pc_{g,n} for degree reasons
// (needs the CohFT's degree bound for the lower end).
bool degree_excludes(const CohFT& cohft, int g, int npoints, int chow);

// Correlators of the DR-type classes: D, A^1, A and lambda_g DR_g(-a,0,a_1..a_n).
// Genus 0 is built in; higher genus needs a dr_D table.
class DRSource {
 public:
  DRSource(const CohFT& cohft, const CorrelatorTable* table = nullptr);
  // Coeff_{a^e} int D_{g,n+1}(a) prod psi^psi pc ; fields/psi have n+1 entries.
  Rational d_class(int g, const std::vector<int>& fields, const std::vector<int>& psi,
                   const std::vector<int>& e) const;
  // Coeff_{a^e} int A^1_{g,n}(a) ... on Mbar_{g,n+1}.
  Rational a1_class(int g, const std::vector<int>& fields, const std::vector<int>& psi,
                    const std::vector<int>& e) const;
  // Coeff_{a^e} int A_{g,n}(a) ... on Mbar_{g,n}.
  Rational a_class(int g, const std::vector<int>& fields, const std::vector<int>& psi,
                   const std::vector<int>& e) const;
  // Coeff_{a^e} int lambda_g DR_g(-a, 0, a_1..a_n) ... on Mbar_{g,n+2}.
  Rational dr_q(int g, const std::vector<int>& fields, const std::vector<int>& psi,
                const std::vector<int>& e) const;
  const CohFT& cohft() const { return cohft_; }
  bool has_table() const { return table_ != nullptr; }

 private:
  Rational from_table(ClassType t, int g, const std::vector<int>& fields, const std::vector<int>& psi,
                      const std::vector<int>& e) const;
  const CohFT& cohft_;
  const CorrelatorTable* table_;
};

}  // namespace iobs
