#pragma once

#include <compare>
#include <map>
#include <cstdint>
#include <optional>
#include <random>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include "iobs/correlators.hpp"
#include "iobs/rational.hpp"

namespace iobs {

// w^{alpha,d} (jet variable) or t^{alpha,d} (time variable); alpha is 1-based.
struct Var {
  int alpha = 1;
  int d = 0;
  auto operator<=>(const Var&) const = default;
};

struct JetMonomial {
  std::vector<Var> factors;  // sorted ascending
  int eps = 0;
  auto operator<=>(const JetMonomial&) const = default;

  int order() const;  // sum of jet orders
  int deg_dx() const { return order() - eps; }
  void normalize();
};

constexpr int kDefaultEps = 6;

// Element of A_w[[eps]] truncated above eps^{eps_max}.
class DiffPoly {
 public:
  explicit DiffPoly(int eps_max = kDefaultEps) : eps_max_(eps_max) {}
  static DiffPoly constant(const Rational& c, int eps_max = kDefaultEps);
  static DiffPoly jet(int alpha, int d, int eps_max = kDefaultEps);
  static DiffPoly monomial(JetMonomial m, const Rational& c, int eps_max = kDefaultEps);

  int eps_max() const { return eps_max_; }
  const std::map<JetMonomial, Rational>& terms() const { return terms_; }
  bool is_zero() const { return terms_.empty(); }
  void add_term(JetMonomial m, const Rational& c);
  Rational coeff(const JetMonomial& m) const;
  DiffPoly truncated(int eps_max) const;

  DiffPoly& operator+=(const DiffPoly& o);
  DiffPoly& operator-=(const DiffPoly& o);
  DiffPoly& operator*=(const Rational& c);
  friend DiffPoly operator+(DiffPoly a, const DiffPoly& b) { return a += b; }
  friend DiffPoly operator-(DiffPoly a, const DiffPoly& b) { return a -= b; }
  friend DiffPoly operator*(const DiffPoly& a, const DiffPoly& b);
  friend DiffPoly operator*(DiffPoly a, const Rational& c) { return a *= c; }
  friend DiffPoly operator*(const Rational& c, DiffPoly a) { return a *= c; }
  DiffPoly operator-() const { return *this * Rational(-1); }
  bool operator==(const DiffPoly& o) const { return terms_ == o.terms_; }
  DiffPoly pow(int k) const;
  DiffPoly times_eps(int k) const;

  // Terms with deg_dx == k.
  DiffPoly homogeneous(int k) const;
  DiffPoly eps_part(int e) const;
  int max_order() const;
  int n_fields() const;  // largest alpha occurring

  // "1/2*(w[1,0])^2 + 1/12*eps^2*w[1,2]"
  std::string to_string(const std::string& stem = "w") const;
  nlohmann::json to_json() const;
  static DiffPoly from_json(const nlohmann::json& j, int eps_max = kDefaultEps);

 private:
  int eps_max_;
  std::map<JetMonomial, Rational> terms_;
};

DiffPoly d_x(const DiffPoly& p);
DiffPoly d_x_pow(const DiffPoly& p, int k);
DiffPoly partial(const DiffPoly& p, Var v);
// delta_{w^alpha} applied to a density.
DiffPoly var_derivative(const DiffPoly& density, int alpha);
// Evolutionary derivation: w^{a,d} -> d_x^{d+1} Q^a.
DiffPoly flow_derivative(const DiffPoly& p, const std::vector<DiffPoly>& Q);
// Replace w^{a,d} by d_x^d(targets[a-1]).
DiffPoly substitute_jets(const DiffPoly& p, const std::vector<DiffPoly>& targets);

// Density modulo the image of d_x, reduced to a canonical representative.
class LocalFunctional {
 public:
  LocalFunctional() = default;
  explicit LocalFunctional(DiffPoly density) : density_(std::move(density)) {}
  const DiffPoly& density() const { return density_; }
  DiffPoly normal_form() const;
  bool is_zero() const { return normal_form().is_zero(); }
  bool operator==(const LocalFunctional& o) const { return LocalFunctional(density_ - o.density_).is_zero(); }
  DiffPoly var_derivative(int alpha) const { return iobs::var_derivative(density_, alpha); }

 private:
  DiffPoly density_;
};

DiffPoly normal_form(const DiffPoly& density);

// int delta_a f1 eta^{ab} d_x delta_b f2 dx; eta_up is the inverse metric.
LocalFunctional poisson_bracket(const LocalFunctional& f1, const LocalFunctional& f2, const Matrix& eta_up);

enum class MiuraKind { SecondKind, Normal };

// w^a -> targets[a-1](w); identity at eps^0.
struct MiuraMap {
  MiuraKind kind = MiuraKind::SecondKind;
  std::vector<DiffPoly> targets;

  static MiuraMap identity(int N, int eps_max = kDefaultEps);
  int N() const { return static_cast<int>(targets.size()); }
  int eps_max() const;
  bool is_identity() const;
};

DiffPoly apply_miura(const MiuraMap& m, const DiffPoly& p);
// First apply a (w -> a(w)), then express its arguments through b.
MiuraMap compose_miura(const MiuraMap& a, const MiuraMap& b);
MiuraMap invert_miura(const MiuraMap& m);

// Power series in times t^{alpha,d} and eps.
struct SeriesKey {
  int eps = 0;
  std::vector<Var> times;  // sorted multiset
  auto operator<=>(const SeriesKey&) const = default;
};

class FormalSeries {
 public:
  FormalSeries(int eps_max = kDefaultEps, int tdeg_max = kDefaultEps + 4) : eps_max_(eps_max), tdeg_max_(tdeg_max) {}
  static FormalSeries constant(const Rational& c, int eps_max, int tdeg_max);
  static FormalSeries time(Var t, int eps_max, int tdeg_max);

  int eps_max() const { return eps_max_; }
  int tdeg_max() const { return tdeg_max_; }
  const std::map<SeriesKey, Rational>& coeffs() const { return coeffs_; }
  void add(SeriesKey k, const Rational& c);
  Rational coeff(const SeriesKey& k) const;
  bool is_zero() const { return coeffs_.empty(); }
  FormalSeries truncated(int eps_max, int tdeg_max) const;

  FormalSeries& operator+=(const FormalSeries& o);
  FormalSeries& operator-=(const FormalSeries& o);
  FormalSeries& operator*=(const Rational& c);
  friend FormalSeries operator+(FormalSeries a, const FormalSeries& b) { return a += b; }
  friend FormalSeries operator-(FormalSeries a, const FormalSeries& b) { return a -= b; }
  friend FormalSeries operator*(const FormalSeries& a, const FormalSeries& b);
  friend FormalSeries operator*(FormalSeries a, const Rational& c) { return a *= c; }
  bool operator==(const FormalSeries& o) const { return coeffs_ == o.coeffs_; }

  // d/dt; lowers the reliable t-degree by one.
  FormalSeries derivative(Var t) const;
  nlohmann::json to_json() const;

 private:
  int eps_max_;
  int tdeg_max_;
  std::map<SeriesKey, Rational> coeffs_;
};

// sol[a-1] = w^a(t); w^{a,q} is read as d^q/d(t^{1,0})^q of sol[a-1].
FormalSeries substitute_solution(const DiffPoly& p, const std::vector<FormalSeries>& sol);

class NoMatch : public std::runtime_error {
 public:
  explicit NoMatch(const std::string& what) : std::runtime_error(what) {}
};

struct MatchOptions {
  int deg_dx = 0;        // deg_dx of the sought polynomial
  int eps_max = kDefaultEps;
  int max_factors = -1;  // -1: derived from the series t-degree
};

// Unique P with substitute_solution(P, sol) == series (on the reliable range).
// Throws NoMatch when inconsistent or when the solution is not unique.
DiffPoly match_diffpoly(const FormalSeries& series, const std::vector<FormalSeries>& sol, const MatchOptions& opt);

// Random density with bounded order, factor count and eps power.
DiffPoly random_density(std::mt19937_64& rng, int N, int eps_max, int max_order = 3, int max_factors = 3);

// Seeded property suite: delta o d_x = 0, bracket antisymmetry and Jacobi, Miura round trips,
// match_diffpoly o substitute_solution = id. Sample i uses seed + i, so results do not depend on workers.
struct AlgebraReport {
  std::uint64_t seed = 0;
  int samples = 0;
  int eps_max = 4;
  long checks = 0;
  std::vector<std::string> failures;
  bool pass() const { return failures.empty(); }
  nlohmann::json to_json() const;
};
AlgebraReport check_algebra_properties(std::uint64_t seed, int samples = 100, int eps_max = 4, int workers = 1);

}  // namespace iobs
