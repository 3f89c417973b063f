#include "iobs/multipoly.hpp"

#include <sstream>
#include <stdexcept>

namespace iobs {

namespace {
MultiPoly::VarList empty_vars() {
  static const MultiPoly::VarList v = std::make_shared<const std::vector<std::string>>();
  return v;
}
}  // namespace

MultiPoly::MultiPoly() : vars_(empty_vars()) {}
MultiPoly::MultiPoly(std::vector<std::string> vars)
    : vars_(std::make_shared<const std::vector<std::string>>(std::move(vars))) {}
MultiPoly::MultiPoly(VarList vars) : vars_(std::move(vars)) {}

MultiPoly MultiPoly::constant(VarList vars, const Rational& c) {
  MultiPoly p(std::move(vars));
  p.add_term(Exps(p.nvars(), 0), c);
  return p;
}

MultiPoly MultiPoly::variable(VarList vars, int i) {
  MultiPoly p(std::move(vars));
  if (i < 0 || i >= p.nvars()) throw std::out_of_range("MultiPoly::variable");
  Exps e(p.nvars(), 0);
  e[i] = 1;
  p.add_term(e, 1);
  return p;
}

MultiPoly::VarList MultiPoly::ab_vars(int n, int m) {
  std::vector<std::string> v;
  for (int i = 1; i <= n; ++i) v.push_back("a" + std::to_string(i));
  for (int i = 1; i <= m; ++i) v.push_back("b" + std::to_string(i));
  return std::make_shared<const std::vector<std::string>>(std::move(v));
}

MultiPoly::VarList MultiPoly::named_vars(const std::string& stem, int count) {
  std::vector<std::string> v;
  for (int i = 1; i <= count; ++i) v.push_back(stem + std::to_string(i));
  return std::make_shared<const std::vector<std::string>>(std::move(v));
}

void MultiPoly::check_same(const MultiPoly& o) const {
  if (vars_ != o.vars_ && *vars_ != *o.vars_)
    throw std::invalid_argument("MultiPoly: variable lists differ");
}

void MultiPoly::add_term(const Exps& e, const Rational& c) {
  if (static_cast<int>(e.size()) != nvars())
    throw std::invalid_argument("MultiPoly: exponent arity mismatch");
  if (c == 0) return;
  auto it = terms_.find(e);
  if (it == terms_.end()) {
    terms_.emplace(e, c);
  } else {
    it->second += c;
    if (it->second == 0) terms_.erase(it);
  }
}

Rational MultiPoly::coeff(const Exps& e) const {
  auto it = terms_.find(e);
  return it == terms_.end() ? Rational(0) : it->second;
}

MultiPoly& MultiPoly::operator+=(const MultiPoly& o) {
  if (o.is_zero()) return *this;
  if (is_zero() && nvars() == 0) vars_ = o.vars_;
  check_same(o);
  for (const auto& [e, c] : o.terms_) add_term(e, c);
  return *this;
}

MultiPoly& MultiPoly::operator-=(const MultiPoly& o) {
  if (o.is_zero()) return *this;
  if (is_zero() && nvars() == 0) vars_ = o.vars_;
  check_same(o);
  for (const auto& [e, c] : o.terms_) add_term(e, -c);
  return *this;
}

MultiPoly& MultiPoly::operator*=(const Rational& c) {
  if (c == 0) {
    terms_.clear();
    return *this;
  }
  for (auto& [e, v] : terms_) v *= c;
  return *this;
}

MultiPoly operator*(const MultiPoly& a, const MultiPoly& b) {
  if (a.is_zero() || b.is_zero()) return MultiPoly(a.nvars() ? a.vars_ : b.vars_);
  a.check_same(b);
  MultiPoly r(a.vars_);
  Exps e(a.nvars());
  for (const auto& [ea, ca] : a.terms_) {
    for (const auto& [eb, cb] : b.terms_) {
      for (int i = 0; i < a.nvars(); ++i) e[i] = ea[i] + eb[i];
      r.add_term(e, ca * cb);
    }
  }
  return r;
}

MultiPoly MultiPoly::operator-() const {
  MultiPoly r(*this);
  for (auto& [e, c] : r.terms_) c = -c;
  return r;
}

bool MultiPoly::operator==(const MultiPoly& o) const {
  if (is_zero() && o.is_zero()) return true;
  return *vars_ == *o.vars_ && terms_ == o.terms_;
}

MultiPoly MultiPoly::pow(int k) const {
  if (k < 0) throw std::invalid_argument("MultiPoly::pow negative");
  MultiPoly r = constant(vars_, 1);
  MultiPoly base = *this;
  while (k) {
    if (k & 1) r = r * base;
    k >>= 1;
    if (k) base = base * base;
  }
  return r;
}

Rational MultiPoly::eval(const std::vector<Rational>& x) const {
  if (static_cast<int>(x.size()) != nvars()) throw std::invalid_argument("eval arity");
  Rational s = 0;
  for (const auto& [e, c] : terms_) {
    Rational t = c;
    for (int i = 0; i < nvars(); ++i) {
      for (int k = 0; k < e[i]; ++k) t *= x[i];
    }
    s += t;
  }
  return s;
}

MultiPoly MultiPoly::substitute(int i, const MultiPoly& q) const {
  MultiPoly r(vars_);
  std::map<int, MultiPoly> powers;
  for (const auto& [e, c] : terms_) {
    Exps rest = e;
    int k = rest[i];
    rest[i] = 0;
    MultiPoly mono(vars_);
    mono.add_term(rest, c);
    auto it = powers.find(k);
    if (it == powers.end()) it = powers.emplace(k, q.pow(k)).first;
    r += mono * it->second;
  }
  return r;
}

MultiPoly MultiPoly::derivative(int i) const {
  MultiPoly r(vars_);
  for (const auto& [e, c] : terms_) {
    if (e[i] == 0) continue;
    Exps f = e;
    f[i] -= 1;
    r.add_term(f, c * e[i]);
  }
  return r;
}

int MultiPoly::total_degree() const {
  int d = -1;
  for (const auto& [e, c] : terms_) {
    int s = 0;
    for (int x : e) s += x;
    d = std::max(d, s);
  }
  return d;
}

int MultiPoly::degree_in(const Exps& e, const std::vector<int>& mask) {
  int s = 0;
  for (std::size_t i = 0; i < e.size(); ++i)
    if (mask[i]) s += e[i];
  return s;
}

MultiPoly MultiPoly::part_with_degree(const std::vector<int>& mask, int d) const {
  MultiPoly r(vars_);
  for (const auto& [e, c] : terms_)
    if (degree_in(e, mask) == d) r.add_term(e, c);
  return r;
}

MultiPoly MultiPoly::homogeneous_part(int d) const {
  return part_with_degree(std::vector<int>(nvars(), 1), d);
}

std::string monomial_string(const std::vector<std::string>& vars, const Exps& e) {
  std::string s;
  for (std::size_t i = 0; i < e.size(); ++i) {
    if (e[i] == 0) continue;
    if (!s.empty()) s += "*";
    s += vars[i];
    if (e[i] > 1) s += "^" + std::to_string(e[i]);
  }
  return s.empty() ? "1" : s;
}

std::string MultiPoly::to_string() const {
  if (terms_.empty()) return "0";
  std::ostringstream os;
  bool first = true;
  // Highest total degree first, then reverse-lex, to read naturally.
  std::vector<std::pair<Exps, Rational>> v(terms_.begin(), terms_.end());
  std::stable_sort(v.begin(), v.end(), [](const auto& x, const auto& y) {
    int dx = 0, dy = 0;
    for (int t : x.first) dx += t;
    for (int t : y.first) dy += t;
    if (dx != dy) return dx > dy;
    return x.first > y.first;
  });
  for (const auto& [e, c] : v) {
    Rational a = abs(c);
    std::string mono = monomial_string(*vars_, e);
    if (first) {
      if (c < 0) os << "-";
    } else {
      os << (c < 0 ? " - " : " + ");
    }
    first = false;
    if (mono == "1") {
      os << iobs::to_string(a);
    } else if (a == 1) {
      os << mono;
    } else {
      os << iobs::to_string(a) << "*" << mono;
    }
  }
  return os.str();
}

nlohmann::json MultiPoly::to_json() const {
  nlohmann::json arr = nlohmann::json::array();
  for (const auto& [e, c] : terms_) arr.push_back({{"exponents", e}, {"coeff", iobs::to_string(c)}});
  return arr;
}

MultiPoly MultiPoly::from_json(const nlohmann::json& j, VarList vars) {
  MultiPoly p(std::move(vars));
  for (const auto& t : j) p.add_term(t.at("exponents").get<Exps>(), parse_rational(t.at("coeff")));
  return p;
}

}  // namespace iobs
