#include "iobs/piident.hpp"

#include <bit>
#include <functional>
#include <mutex>
#include <optional>
#include <sstream>
#include <stdexcept>

#include "iobs/bernoulli.hpp"
#include "iobs/trees.hpp"

namespace iobs {

// ---------------------------------------------------------------------------
// RatFn

RatFn::RatFn(MultiPoly num, int power, bool b_zero) : num_(std::move(num)), power_(power), b_zero_(b_zero) {
  if (power_ < 0) throw std::invalid_argument("RatFn: negative power");
}

RatFn RatFn::constant(const MultiPoly::VarList& vars, const Rational& c, int power, bool b_zero) {
  return RatFn(MultiPoly::constant(vars, c), power, b_zero);
}

MultiPoly RatFn::base() const {
  MultiPoly c(vars());
  int k = num_.nvars() - (b_zero_ ? 1 : 0);
  for (int i = 0; i < k; ++i) c += MultiPoly::variable(vars(), i);
  return c;
}

namespace {

void check_compatible(bool a, bool b) {
  if (a != b) throw std::logic_error("RatFn: mixing values at b = 0 with general ones");
}

}  // namespace

RatFn& RatFn::operator+=(const RatFn& o) {
  check_compatible(b_zero_, o.b_zero_);
  MultiPoly c = base();
  if (power_ >= o.power_) {
    num_ += o.num_ * c.pow(power_ - o.power_);
  } else {
    num_ = num_ * c.pow(o.power_ - power_) + o.num_;
    power_ = o.power_;
  }
  return *this;
}

RatFn& RatFn::operator-=(const RatFn& o) { return *this += o * Rational(-1); }

RatFn& RatFn::operator*=(const Rational& c) {
  num_ *= c;
  return *this;
}

RatFn operator*(const RatFn& a, const RatFn& b) {
  check_compatible(a.b_zero_, b.b_zero_);
  return RatFn(a.num_ * b.num_, a.power_ + b.power_, a.b_zero_);
}

RatFn RatFn::d_b() const {
  if (b_zero_) throw std::logic_error("RatFn: d_b after b = 0");
  const int ib = num_.nvars() - 1;
  // (p / c^k)' = (p' c - k p) / c^{k+1}, using dc/db = 1
  return RatFn(num_.derivative(ib) * base() - num_ * Rational(power_), power_ + 1);
}

RatFn RatFn::d_b_cleared(int K) const {
  if (b_zero_) throw std::logic_error("RatFn: d_b after b = 0");
  if (K < power_) throw std::invalid_argument("RatFn: clearing power too small");
  const int ib = num_.nvars() - 1;
  MultiPoly c = base();
  MultiPoly X = num_ * c.pow(K - power_);  // value * c^K
  // value' = (X' - K X / c) / c^K = (X' c - K X) / c^{K+1}
  return RatFn(X.derivative(ib) * c - X * Rational(K), K + 1);
}

RatFn RatFn::at_b0() const {
  if (b_zero_) return *this;
  const int ib = num_.nvars() - 1;
  MultiPoly r(vars());
  for (const auto& [e, c] : num_.terms())
    if (e[ib] == 0) r.add_term(e, c);
  return RatFn(r, power_, true);
}

bool RatFn::operator==(const RatFn& o) const { return (*this - o).is_zero(); }

std::string RatFn::to_string() const {
  if (power_ == 0) return num_.to_string();
  std::string d = "(" + base().to_string() + ")";
  if (power_ > 1) d += "^" + std::to_string(power_);
  return "(" + num_.to_string() + ")/" + d;
}

// ---------------------------------------------------------------------------
// generators

std::string PiGenerator::name() const {
  switch (kind) {
    case Kind::One:
      return "1";
    case Kind::Kappa:
      return "kappa_" + std::to_string(m);
    case Kind::Psi:
      return "psi_" + std::to_string(i) + "^" + std::to_string(m);
    case Kind::Boundary: {
      std::string s = "xi[g1=" + std::to_string(g1) + ",I={";
      bool first = true;
      for (int k = 0; k < 32; ++k)
        if (I >> k & 1u) {
          if (!first) s += ",";
          s += std::to_string(k + 1);
          first = false;
        }
      return s + "}]^" + std::to_string(m);
    }
  }
  return "?";
}

void FormalClass::add(const PiGenerator& g, const RatFn& c) {
  auto it = terms.find(g);
  if (it == terms.end())
    terms.emplace(g, c);
  else
    it->second += c;
}

nlohmann::json FormalClass::to_json() const {
  nlohmann::json j = nlohmann::json::array();
  for (const auto& [g, c] : terms) j.push_back({{"generator", g.name()}, {"coefficient", c.to_string()}});
  return j;
}

namespace {

using Kind = PiGenerator::Kind;

// Variables: one linear form a_S per block of a partition of {1..n}, then b.
struct Frame {
  std::vector<unsigned> blocks;
  MultiPoly::VarList vars;

  explicit Frame(std::vector<unsigned> bl) : blocks(std::move(bl)) {
    std::vector<std::string> names;
    for (unsigned S : blocks) {
      if (std::popcount(S) == 1) {
        names.push_back("a" + std::to_string(std::countr_zero(S) + 1));
        continue;
      }
      std::string nm = "a_{";
      bool first = true;
      for (int k = 0; k < 32; ++k)
        if (S >> k & 1u) {
          if (!first) nm += ",";
          nm += std::to_string(k + 1);
          first = false;
        }
      names.push_back(nm + "}");
    }
    names.push_back("b");
    vars = std::make_shared<const std::vector<std::string>>(std::move(names));
  }

  int nvars() const { return static_cast<int>(blocks.size()) + 1; }
  MultiPoly b() const { return MultiPoly::variable(vars, nvars() - 1); }
  MultiPoly constant(const Rational& c) const { return MultiPoly::constant(vars, c); }
  // a_S; S must be a union of blocks
  MultiPoly a(unsigned S) const {
    MultiPoly r(vars);
    for (std::size_t k = 0; k < blocks.size(); ++k) {
      unsigned B = blocks[k];
      if ((B & S) == B) {
        r += MultiPoly::variable(vars, static_cast<int>(k));
      } else if (B & S) {
        throw std::logic_error("linear form does not fit the frame");
      }
    }
    return r;
  }
  MultiPoly c(unsigned all) const { return a(all) + b(); }
};

Frame singletons(int n) {
  std::vector<unsigned> bl;
  for (int i = 0; i < n; ++i) bl.push_back(1u << i);
  return Frame(bl);
}

Frame split_frame(unsigned S, unsigned all) {
  std::vector<unsigned> bl;
  if (S) bl.push_back(S);
  if (all & ~S) bl.push_back(all & ~S);
  return Frame(bl);
}

std::vector<Rational> bern_coeffs(int k, const PiOptions& opt) {
  std::vector<Rational> c = bernoulli_poly_coeffs(k);
  if (k == opt.perturb_bernoulli && c.size() > 1) c[1] += opt.perturb_delta;
  return c;
}

// B_k(u / c) = sum_j beta_j u^j c^{k-j} / c^k
RatFn bern(int k, const MultiPoly& u, const MultiPoly& c, const PiOptions& opt) {
  std::vector<Rational> beta = bern_coeffs(k, opt);
  MultiPoly num(u.var_list());
  MultiPoly up = MultiPoly::constant(u.var_list(), 1);
  for (int j = 0; j <= k; ++j) {
    if (beta[j] != 0) num += up * c.pow(k - j) * beta[j];
    up = up * u;
  }
  return RatFn(num, k);
}

RatFn bern_number(int k, const Frame& F, const PiOptions& opt) {
  return RatFn(F.constant(bern_coeffs(k, opt)[0]), 0);
}

RatFn poly(const MultiPoly& p) { return RatFn(p, 0); }

bool stable_split(int g1, int nI, int g2, int nJ) { return 2 * g1 - 1 + nI > 0 && 2 * g2 - 1 + nJ > 0; }

// P_m on Mbar_{g,n}
FormalClass build_P(int g, int n, int m, const PiOptions& opt) {
  const unsigned all = (1u << n) - 1;
  FormalClass P;
  Frame S = singletons(n);
  {
    Frame F = (m == 1 || opt.expanded) ? S : Frame({all});
    MultiPoly A = F.a(all), c = F.c(all);
    P.add({Kind::Kappa, m - 1}, bern_number(m + 1, F, opt) - bern(m + 1, A, c, opt));
  }
  for (int i = 1; i <= n; ++i) {
    unsigned bi = 1u << (i - 1);
    Frame F = (m == 1 || opt.expanded) ? S : split_frame(bi, all);
    MultiPoly A = F.a(all), c = F.c(all), ai = F.a(bi);
    RatFn v = bern(m + 1, A - ai, c, opt) - bern(m + 1, c - ai, c, opt);
    if (m == 1)
      P.add({Kind::One}, v);
    else
      P.add({Kind::Psi, m - 1, i}, v);
  }
  if (m >= 2) {
    const int first = opt.literal_boundary ? m : m + 1;
    for (unsigned I = 0; I <= all; ++I) {
      std::optional<RatFn> v;  // independent of g1
      for (int g1 = 0; g1 <= g; ++g1) {
        if (!stable_split(g1, std::popcount(I), g - g1, n - std::popcount(I))) continue;
        if (!v) {
          Frame F = opt.expanded ? S : split_frame(I, all);
          MultiPoly c = F.c(all), aI = F.a(I), b = F.b();
          v = (bern(first, aI + b, c, opt) - bern(m + 1, aI, c, opt)) * Rational(1, 2);
        }
        P.add({Kind::Boundary, m - 1, 0, g1, I}, *v);
      }
    }
  }
  return P;
}

// Q_m on Mbar_{g,n}
FormalClass build_Q(int g, int n, int m, const PiOptions& opt) {
  const unsigned all = (1u << n) - 1;
  FormalClass Q;
  Frame S = singletons(n);
  {
    Frame F = opt.expanded ? S : Frame({all});
    Q.add({Kind::Kappa, m}, poly(F.a(all)) * bern_number(m + 1, F, opt));
  }
  for (int i = 1; i <= n; ++i) {
    unsigned bi = 1u << (i - 1);
    Frame F = opt.expanded ? S : split_frame(bi, all);
    MultiPoly A = F.a(all), c = F.c(all), ai = F.a(bi);
    RatFn v = poly(A - ai) * bern(m + 1, c - ai, c, opt) + poly(ai) * bern(m + 1, A - ai, c, opt);
    Q.add({Kind::Psi, m, i}, v * Rational(-1));
  }
  const int first = opt.literal_boundary ? m : m + 1;
  for (unsigned I = 0; I <= all; ++I) {
    std::optional<RatFn> v;
    for (int g1 = 0; g1 <= g; ++g1) {
      if (!stable_split(g1, std::popcount(I), g - g1, n - std::popcount(I))) continue;
      if (!v) {
        Frame F = opt.expanded ? S : split_frame(I, all);
        MultiPoly c = F.c(all), aI = F.a(I), aJ = F.a(all & ~I), b = F.b();
        v = (poly(aI) * bern(first, aI + b, c, opt) + poly(aJ) * bern(m + 1, aI, c, opt)) * Rational(1, 2);
      }
      Q.add({Kind::Boundary, m, 0, g1, I}, *v);
    }
  }
  return Q;
}

void substitute_kappa0(FormalClass& P, int g, int n) {
  auto it = P.terms.find({Kind::Kappa, 0});
  if (it == P.terms.end()) return;
  RatFn v = it->second * Rational(2 * g - 2 + n);
  P.terms.erase(it);
  P.add({Kind::One}, v);
}

}  // namespace

FormalClass build_f_exponent(int g, int n, int m_max, const PiOptions& opt) {
  if (m_max < 1) throw std::invalid_argument("build_f_exponent: m_max >= 1");
  const unsigned all = (1u << n) - 1;
  Frame F = singletons(n);
  MultiPoly A = F.a(all), b = F.b(), c = F.c(all);
  FormalClass f;
  for (int m = 1; m <= m_max; ++m) {
    Rational pre = Rational(m % 2 ? -1 : 1) / (m * (m + 1));
    RatFn pf = poly(c.pow(m) * pre);
    f.add({Kind::Kappa, m}, pf * bern_number(m + 1, F, opt));
    for (int i = 1; i <= n; ++i)
      f.add({Kind::Psi, m, i}, pf * bern(m + 1, A - F.a(1u << (i - 1)), c, opt) * Rational(-1));
    f.add({Kind::Psi, m, n + 1}, pf * bern(m + 1, A, c, opt) * Rational(-1));
    // splits of {1..n+1}; bit n is the marking n+1
    const unsigned allp = (1u << (n + 1)) - 1;
    for (unsigned I = 0; I <= allp; ++I)
      for (int g1 = 0; g1 <= g; ++g1) {
        int nI = std::popcount(I);
        if (!stable_split(g1, nI, g - g1, n + 1 - nI)) continue;
        MultiPoly w = (I >> n & 1u) ? b - F.a(I & all) : F.a(I);
        f.add({Kind::Boundary, m, 0, g1, I}, pf * bern(m + 1, w, c, opt) * Rational(1, 2));
      }
  }
  return f;
}

PmQm build_PQ(int g, int n, int m, const PiOptions& opt) {
  if (m < 1) throw std::invalid_argument("build_PQ: m >= 1");
  if (n < 1 || n > 30) throw std::invalid_argument("build_PQ: 1 <= n <= 30");
  return {m, build_P(g, n, m, opt), build_Q(g, n, m, opt)};
}

void PiReport::merge(const PiReport& o) {
  checked += o.checked;
  failures.insert(failures.end(), o.failures.begin(), o.failures.end());
}

nlohmann::json PiReport::to_json() const {
  nlohmann::json j;
  j["pass"] = pass();
  j["checked"] = checked;
  j["failures"] = nlohmann::json::array();
  for (const auto& e : failures)
    j["failures"].push_back({{"identity", e.identity},
                             {"g", e.g},
                             {"n", e.n},
                             {"m", e.m},
                             {"generator", e.generator},
                             {"status", e.pass ? "PASS" : "FAIL"},
                             {"residual", e.residual}});
  return j;
}

namespace {

// Residual of one identity on one generator, with the d_b order check folded in.
struct Outcome {
  long checked = 0;
  std::string order_residual;  // empty when both differentiation orders agree
  RatFn residual;
};

RatFn derivative_checked(const RatFn& v, Outcome& o) {
  RatFn d = v.d_b();
  ++o.checked;
  RatFn diff = d - v.d_b_cleared(v.power() + 2);
  if (!diff.is_zero() && o.order_residual.empty()) o.order_residual = diff.to_string();
  return d;
}

}  // namespace

PiReport verify_dilaton_identities(int g, int n, int m_max, const PiOptions& opt) {
  if (m_max < 1) throw std::invalid_argument("verify_dilaton_identities: m_max >= 1");
  if (g < 0 || n < 1 || 2 * g - 2 + n <= 0) throw std::invalid_argument("verify_dilaton_identities: unstable (g, n)");
  std::vector<PmQm> pq(m_max + 1);
  parallel_for(pq.size(), opt.workers, [&](std::size_t k) { pq[k] = build_PQ(g, n, static_cast<int>(k) + 1, opt); });
  substitute_kappa0(pq[0].P, g, n);

  PiReport rep;
  std::mutex mu;
  parallel_for(m_max, opt.workers, [&](std::size_t k) {
    const int m = static_cast<int>(k) + 1;
    const FormalClass& P = pq[k].P;
    const FormalClass& Q = pq[k].Q;
    const FormalClass& Pn = pq[k + 1].P;
    PiReport r;
    // boundary coefficients do not depend on g1: one evaluation per (identity, I)
    std::map<std::pair<std::string, unsigned>, Outcome> memo;
    auto check = [&](const std::string& id, const PiGenerator& gen, const std::function<RatFn(Outcome&)>& eval) {
      Outcome local;
      const Outcome* o = &local;
      if (gen.kind == Kind::Boundary) {
        auto key = std::make_pair(id, gen.I);
        auto it = memo.find(key);
        if (it == memo.end()) {
          Outcome fresh;
          fresh.residual = eval(fresh);
          it = memo.emplace(key, std::move(fresh)).first;
        }
        o = &it->second;
      } else {
        local.residual = eval(local);
      }
      r.checked += o->checked + 1;
      const int mm = id == "iv" ? m + 1 : m;
      if (!o->order_residual.empty()) r.failures.push_back({"d_b-order", g, n, mm, gen.name(), false, o->order_residual});
      if (!o->residual.is_zero()) r.failures.push_back({id, g, n, m, gen.name(), false, o->residual.to_string()});
    };

    if (m == 1)
      for (const auto& [gen, v] : P.terms)
        check("i", gen, [&, gen = gen, &v = v](Outcome& o) {
          RatFn expect = RatFn::constant(v.vars(), gen.kind == Kind::One ? Rational(2 * g) : Rational(0), 1, true);
          return derivative_checked(v, o).at_b0() - expect;
        });
    for (const auto& [gen, v] : P.terms) check("ii", gen, [&v = v](Outcome&) { return v.at_b0(); });
    for (const auto& [gen, v] : Q.terms)
      check("iii", gen, [&v = v](Outcome& o) { return derivative_checked(v, o).at_b0(); });
    for (const auto& [gen, v] : Pn.terms)
      check("iv", gen, [&, gen = gen, &v = v](Outcome& o) {
        RatFn lhs = derivative_checked(v, o).at_b0();
        auto it = Q.terms.find(gen);
        if (it == Q.terms.end()) return lhs;
        return lhs - RatFn::constant(v.vars(), m + 2, 2, true) * it->second.at_b0();
      });
    for (const auto& [gen, v] : Q.terms)
      if (!Pn.terms.count(gen)) check("iv", gen, [&v = v](Outcome&) { return v.at_b0(); });

    std::lock_guard<std::mutex> lock(mu);
    rep.merge(r);
  });
  std::sort(rep.failures.begin(), rep.failures.end(), [](const auto& a, const auto& b) {
    return std::tie(a.m, a.identity, a.generator) < std::tie(b.m, b.identity, b.generator);
  });
  return rep;
}

PiReport verify_dilaton_range(int g_max, int n_max, int m_max, const PiOptions& opt) {
  PiReport rep;
  for (int g = 0; g <= g_max; ++g)
    for (int n = 1; n <= n_max; ++n)
      if (2 * g - 2 + n > 0) rep.merge(verify_dilaton_identities(g, n, m_max, opt));
  return rep;
}

}  // namespace iobs
