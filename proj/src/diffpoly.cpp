#include "iobs/diffpoly.hpp"

#include <algorithm>
#include <functional>
#include <mutex>
#include <set>
#include <sstream>

namespace iobs {

int JetMonomial::order() const {
  int s = 0;
  for (const auto& v : factors) s += v.d;
  return s;
}

void JetMonomial::normalize() { std::sort(factors.begin(), factors.end()); }

// ---------------------------------------------------------------- DiffPoly

DiffPoly DiffPoly::constant(const Rational& c, int eps_max) {
  DiffPoly p(eps_max);
  p.add_term({}, c);
  return p;
}

DiffPoly DiffPoly::jet(int alpha, int d, int eps_max) {
  DiffPoly p(eps_max);
  p.add_term({{{alpha, d}}, 0}, 1);
  return p;
}

DiffPoly DiffPoly::monomial(JetMonomial m, const Rational& c, int eps_max) {
  DiffPoly p(eps_max);
  p.add_term(std::move(m), c);
  return p;
}

void DiffPoly::add_term(JetMonomial m, const Rational& c) {
  if (c == 0 || m.eps > eps_max_) return;
  m.normalize();
  auto it = terms_.find(m);
  if (it == terms_.end()) {
    terms_.emplace(std::move(m), c);
  } else {
    it->second += c;
    if (it->second == 0) terms_.erase(it);
  }
}

Rational DiffPoly::coeff(const JetMonomial& m) const {
  auto it = terms_.find(m);
  return it == terms_.end() ? Rational(0) : it->second;
}

DiffPoly DiffPoly::truncated(int eps_max) const {
  DiffPoly r(eps_max);
  for (const auto& [m, c] : terms_) r.add_term(m, c);
  return r;
}

DiffPoly& DiffPoly::operator+=(const DiffPoly& o) {
  eps_max_ = std::min(eps_max_, o.eps_max_);
  for (auto it = terms_.begin(); it != terms_.end();) it = it->first.eps > eps_max_ ? terms_.erase(it) : std::next(it);
  for (const auto& [m, c] : o.terms_) add_term(m, c);
  return *this;
}

DiffPoly& DiffPoly::operator-=(const DiffPoly& o) { return *this += -o; }

DiffPoly& DiffPoly::operator*=(const Rational& c) {
  if (c == 0) {
    terms_.clear();
    return *this;
  }
  for (auto& [m, v] : terms_) v *= c;
  return *this;
}

DiffPoly operator*(const DiffPoly& a, const DiffPoly& b) {
  DiffPoly r(std::min(a.eps_max_, b.eps_max_));
  for (const auto& [ma, ca] : a.terms_)
    for (const auto& [mb, cb] : b.terms_) {
      if (ma.eps + mb.eps > r.eps_max_) continue;
      JetMonomial m{ma.factors, ma.eps + mb.eps};
      m.factors.insert(m.factors.end(), mb.factors.begin(), mb.factors.end());
      r.add_term(std::move(m), ca * cb);
    }
  return r;
}

DiffPoly DiffPoly::pow(int k) const {
  DiffPoly r = constant(1, eps_max_);
  for (int i = 0; i < k; ++i) r = r * *this;
  return r;
}

DiffPoly DiffPoly::times_eps(int k) const {
  DiffPoly r(eps_max_);
  for (const auto& [m, c] : terms_) r.add_term({m.factors, m.eps + k}, c);
  return r;
}

DiffPoly DiffPoly::homogeneous(int k) const {
  DiffPoly r(eps_max_);
  for (const auto& [m, c] : terms_)
    if (m.deg_dx() == k) r.add_term(m, c);
  return r;
}

DiffPoly DiffPoly::eps_part(int e) const {
  DiffPoly r(eps_max_);
  for (const auto& [m, c] : terms_)
    if (m.eps == e) r.add_term(m, c);
  return r;
}

int DiffPoly::max_order() const {
  int d = -1;
  for (const auto& [m, c] : terms_)
    for (const auto& v : m.factors) d = std::max(d, v.d);
  return d;
}

int DiffPoly::n_fields() const {
  int a = 0;
  for (const auto& [m, c] : terms_)
    for (const auto& v : m.factors) a = std::max(a, v.alpha);
  return a;
}

std::string DiffPoly::to_string(const std::string& stem) const {
  if (terms_.empty()) return "0";
  std::vector<std::pair<JetMonomial, Rational>> v(terms_.begin(), terms_.end());
  std::stable_sort(v.begin(), v.end(), [](const auto& x, const auto& y) {
    if (x.first.eps != y.first.eps) return x.first.eps < y.first.eps;
    return x.first.factors < y.first.factors;
  });
  std::ostringstream os;
  bool first = true;
  for (const auto& [m, c] : v) {
    std::vector<std::string> parts;
    if (m.eps == 1) parts.push_back("eps");
    if (m.eps > 1) parts.push_back("eps^" + std::to_string(m.eps));
    for (std::size_t i = 0; i < m.factors.size();) {
      std::size_t j = i;
      while (j < m.factors.size() && m.factors[j] == m.factors[i]) ++j;
      std::string w = stem + "[" + std::to_string(m.factors[i].alpha) + "," + std::to_string(m.factors[i].d) + "]";
      if (j - i > 1) w = "(" + w + ")^" + std::to_string(j - i);
      parts.push_back(w);
      i = j;
    }
    Rational a = abs(c);
    if (first)
      os << (c < 0 ? "-" : "");
    else
      os << (c < 0 ? " - " : " + ");
    first = false;
    std::string body;
    for (std::size_t i = 0; i < parts.size(); ++i) body += (i ? "*" : "") + parts[i];
    if (body.empty())
      os << iobs::to_string(a);
    else if (a == 1)
      os << body;
    else
      os << iobs::to_string(a) << "*" << body;
  }
  return os.str();
}

nlohmann::json DiffPoly::to_json() const {
  nlohmann::json arr = nlohmann::json::array();
  for (const auto& [m, c] : terms_) {
    nlohmann::json jets = nlohmann::json::array();
    for (const auto& v : m.factors) jets.push_back({v.alpha, v.d});
    arr.push_back({{"eps", m.eps}, {"jets", jets}, {"coeff", iobs::to_string(c)}});
  }
  return arr;
}

DiffPoly DiffPoly::from_json(const nlohmann::json& j, int eps_max) {
  DiffPoly p(eps_max);
  for (const auto& t : j) {
    JetMonomial m;
    m.eps = t.at("eps").get<int>();
    for (const auto& v : t.at("jets")) m.factors.push_back({v.at(0).get<int>(), v.at(1).get<int>()});
    p.add_term(std::move(m), parse_rational(t.at("coeff").get<std::string>()));
  }
  return p;
}

// ---------------------------------------------------------------- derivations

DiffPoly d_x(const DiffPoly& p) {
  DiffPoly r(p.eps_max());
  for (const auto& [m, c] : p.terms()) {
    for (std::size_t i = 0; i < m.factors.size(); ++i) {
      if (i > 0 && m.factors[i] == m.factors[i - 1]) continue;
      int mult = 0;
      for (const auto& v : m.factors) mult += (v == m.factors[i]);
      JetMonomial n = m;
      n.factors[i].d += 1;
      r.add_term(std::move(n), c * mult);
    }
  }
  return r;
}

DiffPoly d_x_pow(const DiffPoly& p, int k) {
  DiffPoly r = p;
  for (int i = 0; i < k; ++i) r = d_x(r);
  return r;
}

DiffPoly partial(const DiffPoly& p, Var v) {
  DiffPoly r(p.eps_max());
  for (const auto& [m, c] : p.terms()) {
    auto it = std::find(m.factors.begin(), m.factors.end(), v);
    if (it == m.factors.end()) continue;
    int mult = static_cast<int>(std::count(m.factors.begin(), m.factors.end(), v));
    JetMonomial n = m;
    n.factors.erase(n.factors.begin() + (it - m.factors.begin()));
    r.add_term(std::move(n), c * mult);
  }
  return r;
}

DiffPoly var_derivative(const DiffPoly& density, int alpha) {
  DiffPoly r(density.eps_max());
  int dmax = density.max_order();
  for (int d = dmax; d >= 0; --d) {
    // Horner in (-d_x)
    r = -d_x(r) + partial(density, {alpha, d});
  }
  return r;
}

DiffPoly flow_derivative(const DiffPoly& p, const std::vector<DiffPoly>& Q) {
  DiffPoly r(p.eps_max());
  int dmax = p.max_order();
  for (int a = 1; a <= static_cast<int>(Q.size()); ++a) {
    DiffPoly dq = d_x(Q[a - 1]);
    for (int d = 0; d <= dmax; ++d) {
      DiffPoly pa = partial(p, {a, d});
      if (!pa.is_zero()) r += pa * dq;
      dq = d_x(dq);
    }
  }
  return r;
}

DiffPoly substitute_jets(const DiffPoly& p, const std::vector<DiffPoly>& targets) {
  int eps = p.eps_max();
  for (const auto& t : targets) eps = std::min(eps, t.eps_max());
  std::map<Var, DiffPoly> cache;
  std::function<const DiffPoly&(Var)> jet = [&](Var v) -> const DiffPoly& {
    auto it = cache.find(v);
    if (it != cache.end()) return it->second;
    if (v.alpha < 1 || v.alpha > static_cast<int>(targets.size()))
      throw std::invalid_argument("substitute_jets: field index out of range");
    DiffPoly x = v.d == 0 ? targets[v.alpha - 1] : d_x(jet({v.alpha, v.d - 1}));
    return cache.emplace(v, std::move(x)).first->second;
  };
  DiffPoly r(eps);
  for (const auto& [m, c] : p.terms()) {
    DiffPoly t = DiffPoly::monomial({{}, m.eps}, c, eps);
    for (const auto& v : m.factors) {
      t = t * jet(v);
      if (t.is_zero()) break;
    }
    r += t;
  }
  return r;
}

// ---------------------------------------------------------------- local functionals

namespace {

// Ordering used to pick pivots: the monomial whose highest jet is largest wins.
std::vector<Var> lead_key(const JetMonomial& m) {
  std::vector<Var> k = m.factors;
  std::sort(k.begin(), k.end(), [](const Var& x, const Var& y) {
    if (x.d != y.d) return x.d > y.d;
    return x.alpha > y.alpha;
  });
  return k;
}

bool lead_less(const JetMonomial& a, const JetMonomial& b) {
  auto ka = lead_key(a), kb = lead_key(b);
  auto cmp = [](const Var& x, const Var& y) { return x.d != y.d ? x.d < y.d : x.alpha < y.alpha; };
  return std::lexicographical_compare(ka.begin(), ka.end(), kb.begin(), kb.end(), cmp);
}

struct ComponentKey {
  std::vector<int> alphas;
  int eps;
  int order;
  auto operator<=>(const ComponentKey&) const = default;
};

ComponentKey component_of(const JetMonomial& m) {
  ComponentKey k{{}, m.eps, m.order()};
  for (const auto& v : m.factors) k.alphas.push_back(v.alpha);
  std::sort(k.alphas.begin(), k.alphas.end());
  return k;
}

void monomials_rec(const std::vector<int>& alphas, std::size_t i, int left, std::vector<Var>& cur,
                   std::set<std::vector<Var>>& out) {
  if (i == alphas.size()) {
    if (left == 0) {
      auto s = cur;
      std::sort(s.begin(), s.end());
      out.insert(s);
    }
    return;
  }
  for (int d = 0; d <= left; ++d) {
    cur.push_back({alphas[i], d});
    monomials_rec(alphas, i + 1, left - d, cur, out);
    cur.pop_back();
  }
}

using Row = std::map<JetMonomial, Rational>;

// Reduced row echelon basis of d_x(component of order k-1), keyed by pivot.
struct Basis {
  std::map<JetMonomial, Row> rows;
};

std::mutex basis_mu;
std::map<ComponentKey, Basis> basis_cache;

JetMonomial row_lead(const Row& r) {
  JetMonomial best = r.begin()->first;
  for (const auto& [m, c] : r)
    if (lead_less(best, m)) best = m;
  return best;
}

Basis build_basis(const ComponentKey& key) {
  Basis b;
  if (key.order == 0) return b;
  std::set<std::vector<Var>> mons;
  std::vector<Var> cur;
  monomials_rec(key.alphas, 0, key.order - 1, cur, mons);
  for (const auto& f : mons) {
    DiffPoly img = d_x(DiffPoly::monomial({f, key.eps}, 1, key.eps));
    Row r(img.terms().begin(), img.terms().end());
    // reduce by existing pivots
    for (const auto& [piv, prow] : b.rows) {
      auto it = r.find(piv);
      if (it == r.end()) continue;
      Rational c = it->second;
      for (const auto& [m, v] : prow) {
        r[m] -= c * v;
        if (r[m] == 0) r.erase(m);
      }
    }
    if (r.empty()) continue;
    JetMonomial piv = row_lead(r);
    Rational inv = Rational(1) / r[piv];
    for (auto& [m, v] : r) v *= inv;
    // keep the basis fully reduced
    for (auto& [p2, prow] : b.rows) {
      auto it = prow.find(piv);
      if (it == prow.end()) continue;
      Rational c = it->second;
      for (const auto& [m, v] : r) {
        prow[m] -= c * v;
        if (prow[m] == 0) prow.erase(m);
      }
    }
    b.rows.emplace(piv, std::move(r));
  }
  return b;
}

const Basis& basis_for(const ComponentKey& key) {
  std::lock_guard lk(basis_mu);
  auto it = basis_cache.find(key);
  if (it == basis_cache.end()) it = basis_cache.emplace(key, build_basis(key)).first;
  return it->second;
}

}  // namespace

DiffPoly normal_form(const DiffPoly& density) {
  std::map<ComponentKey, Row> comps;
  for (const auto& [m, c] : density.terms()) comps[component_of(m)][m] = c;
  DiffPoly out(density.eps_max());
  for (auto& [key, row] : comps) {
    const Basis& b = basis_for(key);
    Row r = row;
    for (const auto& [piv, prow] : b.rows) {
      auto it = r.find(piv);
      if (it == r.end()) continue;
      Rational c = it->second;
      for (const auto& [m, v] : prow) {
        r[m] -= c * v;
        if (r[m] == 0) r.erase(m);
      }
    }
    for (const auto& [m, c] : r) out.add_term(m, c);
  }
  return out;
}

DiffPoly LocalFunctional::normal_form() const { return iobs::normal_form(density_); }

LocalFunctional poisson_bracket(const LocalFunctional& f1, const LocalFunctional& f2, const Matrix& eta_up) {
  const int N = static_cast<int>(eta_up.size());
  int eps = std::min(f1.density().eps_max(), f2.density().eps_max());
  DiffPoly dens(eps);
  std::vector<DiffPoly> d1, d2;
  for (int a = 1; a <= N; ++a) {
    d1.push_back(f1.var_derivative(a));
    d2.push_back(d_x(f2.var_derivative(a)));
  }
  for (int a = 0; a < N; ++a)
    for (int b = 0; b < N; ++b)
      if (eta_up[a][b] != 0) dens += d1[a] * d2[b] * eta_up[a][b];
  return LocalFunctional(dens);
}

// ---------------------------------------------------------------- Miura maps

MiuraMap MiuraMap::identity(int N, int eps_max) {
  MiuraMap m;
  for (int a = 1; a <= N; ++a) m.targets.push_back(DiffPoly::jet(a, 0, eps_max));
  return m;
}

int MiuraMap::eps_max() const {
  int e = kDefaultEps;
  for (const auto& t : targets) e = std::min(e, t.eps_max());
  return e;
}

bool MiuraMap::is_identity() const {
  for (int a = 1; a <= N(); ++a)
    if (!(targets[a - 1] - DiffPoly::jet(a, 0, targets[a - 1].eps_max())).is_zero()) return false;
  return true;
}

DiffPoly apply_miura(const MiuraMap& m, const DiffPoly& p) { return substitute_jets(p, m.targets); }

MiuraMap compose_miura(const MiuraMap& a, const MiuraMap& b) {
  MiuraMap r;
  r.kind = MiuraKind::SecondKind;
  for (const auto& t : a.targets) r.targets.push_back(substitute_jets(t, b.targets));
  return r;
}

MiuraMap invert_miura(const MiuraMap& m) {
  const int N = m.N();
  const int eps = m.eps_max();
  std::vector<DiffPoly> U;
  for (int a = 1; a <= N; ++a) {
    DiffPoly u = m.targets[a - 1] - DiffPoly::jet(a, 0, eps);
    if (!u.eps_part(0).is_zero()) throw std::invalid_argument("invert_miura: eps^0 part is not the identity");
    U.push_back(u);
  }
  // S = v - U(S), iterated; each pass fixes one more eps order.
  MiuraMap s = MiuraMap::identity(N, eps);
  for (int it = 0; it <= eps; ++it) {
    MiuraMap next;
    for (int a = 1; a <= N; ++a) next.targets.push_back(DiffPoly::jet(a, 0, eps) - substitute_jets(U[a - 1], s.targets));
    s = next;
  }
  s.kind = m.kind;
  return s;
}

// ---------------------------------------------------------------- formal series

FormalSeries FormalSeries::constant(const Rational& c, int eps_max, int tdeg_max) {
  FormalSeries s(eps_max, tdeg_max);
  s.add({}, c);
  return s;
}

FormalSeries FormalSeries::time(Var t, int eps_max, int tdeg_max) {
  FormalSeries s(eps_max, tdeg_max);
  s.add({0, {t}}, 1);
  return s;
}

void FormalSeries::add(SeriesKey k, const Rational& c) {
  if (c == 0 || k.eps > eps_max_ || static_cast<int>(k.times.size()) > tdeg_max_) return;
  std::sort(k.times.begin(), k.times.end());
  auto it = coeffs_.find(k);
  if (it == coeffs_.end()) {
    coeffs_.emplace(std::move(k), c);
  } else {
    it->second += c;
    if (it->second == 0) coeffs_.erase(it);
  }
}

Rational FormalSeries::coeff(const SeriesKey& k) const {
  auto it = coeffs_.find(k);
  return it == coeffs_.end() ? Rational(0) : it->second;
}

FormalSeries FormalSeries::truncated(int eps_max, int tdeg_max) const {
  FormalSeries r(std::min(eps_max, eps_max_), std::min(tdeg_max, tdeg_max_));
  for (const auto& [k, c] : coeffs_) r.add(k, c);
  return r;
}

FormalSeries& FormalSeries::operator+=(const FormalSeries& o) {
  if (o.eps_max_ < eps_max_ || o.tdeg_max_ < tdeg_max_) *this = truncated(o.eps_max_, o.tdeg_max_);
  for (const auto& [k, c] : o.coeffs_) add(k, c);
  return *this;
}

FormalSeries& FormalSeries::operator-=(const FormalSeries& o) {
  FormalSeries n = o;
  n *= Rational(-1);
  return *this += n;
}

FormalSeries& FormalSeries::operator*=(const Rational& c) {
  if (c == 0) {
    coeffs_.clear();
    return *this;
  }
  for (auto& [k, v] : coeffs_) v *= c;
  return *this;
}

FormalSeries operator*(const FormalSeries& a, const FormalSeries& b) {
  FormalSeries r(std::min(a.eps_max_, b.eps_max_), std::min(a.tdeg_max_, b.tdeg_max_));
  for (const auto& [ka, ca] : a.coeffs_)
    for (const auto& [kb, cb] : b.coeffs_) {
      if (ka.eps + kb.eps > r.eps_max_) continue;
      if (static_cast<int>(ka.times.size() + kb.times.size()) > r.tdeg_max_) continue;
      SeriesKey k{ka.eps + kb.eps, ka.times};
      k.times.insert(k.times.end(), kb.times.begin(), kb.times.end());
      r.add(std::move(k), ca * cb);
    }
  return r;
}

FormalSeries FormalSeries::derivative(Var t) const {
  FormalSeries r(eps_max_, tdeg_max_ - 1);
  for (const auto& [k, c] : coeffs_) {
    auto it = std::find(k.times.begin(), k.times.end(), t);
    if (it == k.times.end()) continue;
    int mult = static_cast<int>(std::count(k.times.begin(), k.times.end(), t));
    SeriesKey n = k;
    n.times.erase(n.times.begin() + (it - k.times.begin()));
    r.add(std::move(n), c * mult);
  }
  return r;
}

nlohmann::json FormalSeries::to_json() const {
  nlohmann::json arr = nlohmann::json::array();
  for (const auto& [k, c] : coeffs_) {
    nlohmann::json times = nlohmann::json::array();
    for (const auto& v : k.times) times.push_back({v.alpha, v.d});
    arr.push_back({{"eps", k.eps}, {"times", times}, {"coeff", iobs::to_string(c)}});
  }
  return arr;
}

FormalSeries substitute_solution(const DiffPoly& p, const std::vector<FormalSeries>& sol) {
  if (sol.empty()) throw std::invalid_argument("substitute_solution: empty solution");
  int eps = p.eps_max(), tdeg = sol[0].tdeg_max();
  for (const auto& s : sol) {
    eps = std::min(eps, s.eps_max());
    tdeg = std::min(tdeg, s.tdeg_max());
  }
  int q = std::max(0, p.max_order());
  if (q > tdeg) throw std::invalid_argument("substitute_solution: jets beyond the stored t-degree");
  std::map<Var, FormalSeries> jets;
  std::function<const FormalSeries&(Var)> jet = [&](Var v) -> const FormalSeries& {
    auto it = jets.find(v);
    if (it != jets.end()) return it->second;
    if (v.alpha < 1 || v.alpha > static_cast<int>(sol.size()))
      throw std::invalid_argument("substitute_solution: field index out of range");
    FormalSeries s = v.d == 0 ? sol[v.alpha - 1] : jet({v.alpha, v.d - 1}).derivative({1, 0});
    return jets.emplace(v, std::move(s)).first->second;
  };
  FormalSeries r(eps, tdeg - q);
  for (const auto& [m, c] : p.terms()) {
    if (m.eps > eps) continue;
    FormalSeries t(eps, tdeg - q);
    t.add({m.eps, {}}, c);
    for (const auto& v : m.factors) {
      t = t * jet(v).truncated(eps, tdeg - q);
      if (t.is_zero()) break;
    }
    r += t;
  }
  return r;
}

// ---------------------------------------------------------------- matching

namespace {

void jet_monomials(int N, int order_left, int max_d, int nonflat_left, std::vector<Var>& cur,
                   std::vector<std::vector<Var>>& out, int max_factors_total) {
  // cur is built in non-increasing (d, alpha) order to avoid duplicates
  out.push_back(cur);
  if (static_cast<int>(cur.size()) >= max_factors_total) return;
  for (int d = std::min(max_d, order_left); d >= 0; --d)
    for (int a = N; a >= 1; --a) {
      if (!cur.empty()) {
        const Var& last = cur.back();
        if (d > last.d || (d == last.d && a > last.alpha)) continue;
      }
      bool flat = (a == 1 && d == 1);
      if (!flat && nonflat_left == 0) continue;
      cur.push_back({a, d});
      jet_monomials(N, order_left - d, max_d, nonflat_left - (flat ? 0 : 1), cur, out, max_factors_total);
      cur.pop_back();
    }
}

}  // namespace

DiffPoly match_diffpoly(const FormalSeries& series, const std::vector<FormalSeries>& sol, const MatchOptions& opt) {
  const int N = static_cast<int>(sol.size());
  int tdeg = series.tdeg_max();
  for (const auto& s : sol) tdeg = std::min(tdeg, s.tdeg_max());
  const int eps = std::min(opt.eps_max, series.eps_max());
  const int qmax = opt.deg_dx + eps;
  const int reliable = std::min(series.tdeg_max(), tdeg - std::max(0, qmax));
  if (reliable < 0) throw NoMatch("match_diffpoly: solution t-degree too small");
  const int nonflat = opt.max_factors >= 0 ? opt.max_factors : reliable;

  // Candidate monomials with the requested deg_dx.
  std::vector<JetMonomial> cands;
  for (int e = 0; e <= eps; ++e) {
    int order = opt.deg_dx + e;
    if (order < 0) continue;
    std::vector<std::vector<Var>> all;
    std::vector<Var> cur;
    jet_monomials(N, order, order, nonflat, cur, all, nonflat + order);
    for (auto& f : all) {
      JetMonomial m{f, e};
      if (m.order() != order) continue;
      m.normalize();
      cands.push_back(m);
    }
  }
  std::sort(cands.begin(), cands.end());
  cands.erase(std::unique(cands.begin(), cands.end()), cands.end());

  std::vector<FormalSeries> trunc_sol;
  for (const auto& s : sol) trunc_sol.push_back(s.truncated(eps, tdeg));
  std::vector<FormalSeries> images;
  for (const auto& m : cands)
    images.push_back(substitute_solution(DiffPoly::monomial(m, 1, eps), trunc_sol).truncated(eps, reliable));
  FormalSeries target = series.truncated(eps, reliable);

  // Linear system: rows indexed by series keys.
  std::set<SeriesKey> keys;
  for (const auto& [k, c] : target.coeffs()) keys.insert(k);
  for (const auto& im : images)
    for (const auto& [k, c] : im.coeffs()) keys.insert(k);
  const int nc = static_cast<int>(cands.size());
  std::vector<std::vector<Rational>> rows;
  for (const auto& k : keys) {
    std::vector<Rational> r(nc + 1);
    for (int j = 0; j < nc; ++j) r[j] = images[j].coeff(k);
    r[nc] = target.coeff(k);
    rows.push_back(std::move(r));
  }
  // Gaussian elimination
  int rank = 0;
  std::vector<int> pivcol;
  for (int c = 0; c < nc && rank < static_cast<int>(rows.size()); ++c) {
    int p = -1;
    for (int r = rank; r < static_cast<int>(rows.size()); ++r)
      if (rows[r][c] != 0) {
        p = r;
        break;
      }
    if (p < 0) continue;
    std::swap(rows[rank], rows[p]);
    Rational inv = Rational(1) / rows[rank][c];
    for (auto& x : rows[rank]) x *= inv;
    for (int r = 0; r < static_cast<int>(rows.size()); ++r) {
      if (r == rank || rows[r][c] == 0) continue;
      Rational f = rows[r][c];
      for (int j = c; j <= nc; ++j) rows[r][j] -= f * rows[rank][j];
    }
    pivcol.push_back(c);
    ++rank;
  }
  for (int r = rank; r < static_cast<int>(rows.size()); ++r)
    if (rows[r][nc] != 0) throw NoMatch("no match: inconsistent coefficient system (residual " + to_string(rows[r][nc]) + ")");
  if (rank < nc)
    throw NoMatch("no match: " + std::to_string(nc - rank) + " undetermined coefficients; increase the t-degree");
  DiffPoly out(eps);
  for (int i = 0; i < rank; ++i) out.add_term(cands[pivcol[i]], rows[i][nc]);
  return out;
}

}  // namespace iobs
