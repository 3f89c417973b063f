#include "iobs/trees.hpp"

#include <algorithm>
#include <atomic>
#include <bit>
#include <exception>
#include <mutex>
#include <numeric>
#include <stdexcept>
#include <thread>

namespace iobs {

void parallel_for(std::size_t count, int workers, const std::function<void(std::size_t)>& fn) {
  if (workers <= 1 || count <= 1) {
    for (std::size_t i = 0; i < count; ++i) fn(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::exception_ptr err;
  std::mutex err_mu;
  auto run = [&] {
    for (;;) {
      std::size_t i = next.fetch_add(1);
      if (i >= count) return;
      try {
        fn(i);
      } catch (...) {
        std::lock_guard lk(err_mu);
        if (!err) err = std::current_exception();
        next = count;
      }
    }
  };
  int nt = static_cast<int>(std::min<std::size_t>(count, static_cast<std::size_t>(workers)));
  std::vector<std::thread> pool;
  for (int t = 0; t < nt; ++t) pool.emplace_back(run);
  for (auto& t : pool) t.join();
  if (err) std::rethrow_exception(err);
}

// ---------------------------------------------------------------------------
// observables

namespace {
std::vector<int> add_vec(const std::vector<int>& a, const std::vector<int>& b) {
  std::vector<int> r = a;
  for (std::size_t i = 0; i < r.size(); ++i) r[i] += b[i];
  return r;
}
int sum(const std::vector<int>& v) { return std::accumulate(v.begin(), v.end(), 0); }
}  // namespace

Rational PsiObservable::integral(int g, const std::vector<int>& fields, const std::vector<int>& psi,
                                 const std::vector<int>& e, const CohFT& cohft) const {
  return cohft.correlator(g, fields, add_vec(psi, e));
}

TableObservable::TableObservable(CorrelatorTable t) : table_(std::move(t)) {
  if (table_.kind != TableKind::ObsO) throw TableError("observable needs an obs_O table");
}

Rational TableObservable::integral(int g, const std::vector<int>& fields, const std::vector<int>& psi,
                                   const std::vector<int>& e, const CohFT& cohft) const {
  if (g == 0) return cohft.correlator(g, fields, add_vec(psi, e));
  if (degree_excludes(cohft, g, static_cast<int>(fields.size()), sum(psi) + sum(e))) return 0;
  return table_.require(CorrelatorKey{g, fields, psi, {ClassType::ObsO, e, {}}});
}

Rational AObservable::integral(int g, const std::vector<int>& fields, const std::vector<int>& psi,
                               const std::vector<int>& e, const CohFT& cohft) const {
  if (g == 0) return cohft.correlator(g, fields, add_vec(psi, e));
  return DRSource(cohft, dr_table_).a_class(g, fields, psi, e);
}

Rational PerturbedObservable::integral(int g, const std::vector<int>& fields, const std::vector<int>& psi,
                                       const std::vector<int>& e, const CohFT& cohft) const {
  Rational v = base_.integral(g, fields, psi, e, cohft);
  if (g == g_ && e == e_) v += delta_ * cohft.correlator(g, fields, add_vec(psi, e));
  return v;
}

// ---------------------------------------------------------------------------
// trees

int StableRootedTree::total_genus() const { return std::accumulate(genus.begin(), genus.end(), 0); }

std::vector<std::vector<int>> StableRootedTree::children() const {
  std::vector<std::vector<int>> ch(parent.size());
  for (int v = 1; v < nvertices(); ++v) ch[parent[v]].push_back(v);
  return ch;
}

int StableRootedTree::valence(int v) const {
  int k = static_cast<int>(legs[v].size()) + (v == 0 ? m : 1);
  for (int w = 1; w < nvertices(); ++w)
    if (parent[w] == v) ++k;
  return k;
}

std::vector<unsigned> StableRootedTree::descendant_legs() const {
  std::vector<unsigned> d(parent.size(), 0);
  for (int v = nvertices() - 1; v >= 0; --v) {
    for (int l : legs[v]) d[v] |= 1u << l;
    if (v > 0) d[parent[v]] |= d[v];
  }
  return d;
}

bool StableRootedTree::all_edges_weighted() const {
  auto d = descendant_legs();
  for (int v = 1; v < nvertices(); ++v)
    if (d[v] == 0) return false;
  return true;
}

namespace {
std::string subtree_code(const StableRootedTree& t, const std::vector<std::vector<int>>& ch, int v) {
  std::string s = std::to_string(t.genus[v]) + "{";
  for (std::size_t i = 0; i < t.legs[v].size(); ++i) s += (i ? "," : "") + std::to_string(t.legs[v][i] + 1);
  s += "}";
  std::vector<std::string> cs;
  for (int c : ch[v]) cs.push_back(subtree_code(t, ch, c));
  std::sort(cs.begin(), cs.end());
  s += "[";
  for (auto& c : cs) s += c;
  return s + "]";
}
}  // namespace

std::string StableRootedTree::code() const { return subtree_code(*this, children(), 0); }

nlohmann::json StableRootedTree::to_json() const {
  nlohmann::json j;
  j["n"] = n;
  j["m"] = m;
  j["parent"] = parent;
  j["genus"] = genus;
  nlohmann::json l = nlohmann::json::array();
  for (auto& v : legs) {
    std::vector<int> one;
    for (int x : v) one.push_back(x + 1);
    l.push_back(one);
  }
  j["legs"] = l;
  j["code"] = code();
  return j;
}

namespace {

struct Sub {
  int genus = 0;
  unsigned legs = 0;  // own legs
  std::vector<std::shared_ptr<const Sub>> children;
};
using SubList = std::vector<std::shared_ptr<const Sub>>;

class TreeGenerator {
 public:
  const SubList& gen(unsigned R, int G, int k) {
    auto key = std::make_tuple(R, G, k);
    auto it = memo_.find(key);
    if (it != memo_.end()) return it->second;
    SubList out;
    for (int g0 = 0; g0 <= G; ++g0) {
      // S ranges over subsets of R, the root's own legs
      for (unsigned S = R;; S = (S - 1) & R) {
        unsigned rest = R & ~S;
        std::vector<std::vector<unsigned>> parts;
        std::vector<unsigned> cur;
        set_partitions(rest, cur, parts);
        for (auto& blocks : parts) {
          build(blocks, 0, G - g0, {}, g0, S, k, R, out);
        }
        if (S == 0) break;
      }
    }
    return memo_[key] = std::move(out);
  }

 private:
  static void set_partitions(unsigned rest, std::vector<unsigned>& cur, std::vector<std::vector<unsigned>>& out) {
    if (rest == 0) {
      out.push_back(cur);
      return;
    }
    unsigned low = rest & (~rest + 1);
    unsigned others = rest & ~low;
    for (unsigned T = others;; T = (T - 1) & others) {
      cur.push_back(low | T);
      set_partitions(rest & ~(low | T), cur, out);
      cur.pop_back();
      if (T == 0) break;
    }
  }

  // Chooses a genus and subtree for each leg block, then the leg-free children.
  void build(const std::vector<unsigned>& blocks, std::size_t i, int genus_left, SubList chosen, int g0,
             unsigned S, int k, unsigned R, SubList& out) {
    if (i == blocks.size()) {
      add_legfree(genus_left, 0, chosen, g0, S, k, R, out);
      return;
    }
    for (int h = 0; h <= genus_left; ++h) {
      // a genus-0 root whose only child takes everything is unstable (and would recurse on itself)
      if (k == 1 && g0 == 0 && S == 0 && blocks.size() == 1 && h == genus_left) continue;
      const SubList& subs = gen(blocks[i], h, 1);
      for (auto& s : subs) {
        chosen.push_back(s);
        build(blocks, i + 1, genus_left - h, chosen, g0, S, k, R, out);
        chosen.pop_back();
      }
    }
  }

  // Leg-free children: a multiset, taken in nondecreasing order of (genus, index).
  void add_legfree(int genus_left, std::size_t min_pos, SubList chosen, int g0, unsigned S, int k, unsigned R,
                   SubList& out) {
    if (genus_left == 0) {
      int val = std::popcount(S) + static_cast<int>(chosen.size()) + k;
      if (2 * g0 - 2 + val <= 0) return;
      auto s = std::make_shared<Sub>();
      s->genus = g0;
      s->legs = S;
      s->children = chosen;
      out.push_back(s);
      return;
    }
    // candidates of genus 1..genus_left, flattened in a fixed order
    std::size_t pos = 0;
    for (int h = 1; h <= genus_left; ++h) {
      // a single leg-free child carrying all the genus of a leg-free genus-0 vertex is unstable
      if (R == 0 && g0 == 0 && h == genus_left && chosen.empty() && k == 1) break;
      const SubList& subs = gen(0, h, 1);
      for (auto& s : subs) {
        if (pos >= min_pos) {
          chosen.push_back(s);
          add_legfree(genus_left - h, pos, chosen, g0, S, k, R, out);
          chosen.pop_back();
        }
        ++pos;
      }
    }
  }

  std::map<std::tuple<unsigned, int, int>, SubList> memo_;
};

void flatten(const Sub& s, int parent, StableRootedTree& t) {
  // breadth first so that parent[v] < v
  std::vector<std::pair<const Sub*, int>> queue{{&s, parent}};
  for (std::size_t q = 0; q < queue.size(); ++q) {
    auto [node, par] = queue[q];
    int v = t.nvertices();
    t.parent.push_back(par);
    t.genus.push_back(node->genus);
    std::vector<int> l;
    for (int i = 0; i < 32; ++i)
      if (node->legs >> i & 1u) l.push_back(i);
    t.legs.push_back(l);
    for (auto& c : node->children) queue.push_back({c.get(), v});
  }
}

}  // namespace

std::vector<StableRootedTree> enumerate_trees(int g, int n, int m) {
  if (g < 0 || n < 0 || m < 0 || 2 * g - 2 + n + m <= 0) throw std::invalid_argument("enumerate_trees: unstable (g,n,m)");
  if (n > 30) throw std::invalid_argument("enumerate_trees: too many legs");
  TreeGenerator gen;
  unsigned all = n == 0 ? 0u : ((1u << n) - 1);
  const SubList& roots = gen.gen(all, g, m);
  std::vector<StableRootedTree> out;
  for (auto& r : roots) {
    StableRootedTree t;
    t.n = n;
    t.m = m;
    flatten(*r, -1, t);
    out.push_back(std::move(t));
  }
  return out;
}

std::vector<std::vector<int>> enumerate_levels(const StableRootedTree& t) {
  int V = t.nvertices();
  std::vector<std::vector<int>> out;
  std::vector<int> lvl(V, -1);
  lvl[0] = 0;
  unsigned all = V >= 32 ? ~0u : ((1u << V) - 1);
  std::function<void(unsigned, int)> rec = [&](unsigned placed, int level) {
    if (placed == all) {
      out.push_back(lvl);
      return;
    }
    unsigned avail = 0;
    for (int v = 1; v < V; ++v)
      if (!(placed >> v & 1u) && (placed >> t.parent[v] & 1u)) avail |= 1u << v;
    for (unsigned S = avail; S; S = (S - 1) & avail) {
      for (int v = 0; v < V; ++v)
        if (S >> v & 1u) lvl[v] = level;
      rec(placed | S, level + 1);
    }
    for (int v = 1; v < V; ++v)
      if (!(placed >> v & 1u)) lvl[v] = -1;
  };
  rec(1u, 1);
  return out;
}

// ---------------------------------------------------------------------------
// assembly

namespace {

struct PreparedTree {
  StableRootedTree tree;
  std::vector<std::vector<int>> levels;
  std::vector<std::vector<int>> children;
  std::vector<unsigned> desc;
  int height_min = 0;
};

std::shared_ptr<const std::vector<PreparedTree>> prepared_trees(int g, int n, int m) {
  static std::mutex mu;
  static std::map<std::tuple<int, int, int>, std::shared_ptr<const std::vector<PreparedTree>>> cache;
  std::lock_guard lk(mu);
  auto key = std::make_tuple(g, n, m);
  auto it = cache.find(key);
  if (it != cache.end()) return it->second;
  auto v = std::make_shared<std::vector<PreparedTree>>();
  for (auto& t : enumerate_trees(g, n, m)) {
    if (!t.all_edges_weighted()) continue;  // some a(e) = 0
    PreparedTree p;
    p.tree = t;
    p.levels = enumerate_levels(t);
    p.children = t.children();
    p.desc = t.descendant_legs();
    v->push_back(std::move(p));
  }
  cache[key] = v;
  return v;
}

// One half-edge at a vertex, as seen by the vertex integral.
struct HalfEdge {
  int field;
  int psi;
  const MultiPoly* form;  // nullptr means the form 0
  bool counts_a;          // contributes to deg_a
};

MultiPoly leg_sum(const MultiPoly::VarList& vars, unsigned mask) {
  MultiPoly p(vars);
  for (int i = 0; i < 32; ++i)
    if (mask >> i & 1u) p += MultiPoly::variable(vars, i);
  return p;
}

// Iterates exponent vectors e (zero where the form is 0) with sum bounded by `cap`.
void for_exponents(const std::vector<HalfEdge>& hs, int cap, const std::function<void(const std::vector<int>&)>& fn) {
  std::vector<int> e(hs.size(), 0);
  std::function<void(std::size_t, int)> rec = [&](std::size_t i, int left) {
    if (i == hs.size()) {
      fn(e);
      return;
    }
    int top = hs[i].form ? left : 0;
    for (int x = 0; x <= top; ++x) {
      e[i] = x;
      rec(i + 1, left - x);
    }
    e[i] = 0;
  };
  rec(0, cap);
}

class PowerCache {
 public:
  const MultiPoly& get(const MultiPoly* f, int k) {
    auto& v = cache_[f];
    if (v.empty()) v.push_back(MultiPoly::constant(f->var_list(), 1));
    while (static_cast<int>(v.size()) <= k) v.push_back(v.back() * *f);
    return v[k];
  }

 private:
  std::map<const MultiPoly*, std::vector<MultiPoly>> cache_;
};

// Vertex integral as a polynomial, split by a-degree. `value` gives the integral of
// the coefficient of prod x^e.
std::vector<MultiPoly> vertex_poly(int gv, const std::vector<HalfEdge>& hs, const MultiPoly::VarList& vars,
                                   PowerCache& pw,
                                   const std::function<Rational(const std::vector<int>&, const std::vector<int>&,
                                                                const std::vector<int>&)>& value) {
  int npts = static_cast<int>(hs.size());
  int dim = 3 * gv - 3 + npts;
  std::vector<int> fields, psi;
  int psum = 0;
  for (auto& h : hs) {
    fields.push_back(h.field);
    psi.push_back(h.psi);
    psum += h.psi;
  }
  std::vector<MultiPoly> out;
  if (psum > dim) return out;
  out.assign(dim - psum + 1, MultiPoly(vars));
  for_exponents(hs, dim - psum, [&](const std::vector<int>& e) {
    Rational c = value(fields, psi, e);
    if (c == 0) return;
    MultiPoly term = MultiPoly::constant(vars, c);
    int da = 0;
    for (int i = 0; i < npts; ++i) {
      if (e[i] == 0) continue;
      term = term * pw.get(hs[i].form, e[i]);
      if (hs[i].counts_a) da += e[i];
    }
    out[da] += term;
  });
  while (!out.empty() && out.back().is_zero()) out.pop_back();
  return out;
}

struct EdgeAssignment {
  std::vector<int> lower;  // field at the child side, per non-root vertex
  std::vector<int> upper;  // field at the parent side
  Rational weight;
};

std::vector<EdgeAssignment> edge_assignments(int V, const Matrix& eta_inv) {
  int N = static_cast<int>(eta_inv.size());
  std::vector<EdgeAssignment> out;
  EdgeAssignment cur{std::vector<int>(V, 0), std::vector<int>(V, 0), Rational(1)};
  std::function<void(int)> rec = [&](int v) {
    if (v == V) {
      out.push_back(cur);
      return;
    }
    for (int mu = 1; mu <= N; ++mu)
      for (int nu = 1; nu <= N; ++nu) {
        const Rational& w = eta_inv[mu - 1][nu - 1];
        if (w == 0) continue;
        Rational save = cur.weight;
        cur.lower[v] = mu;
        cur.upper[v] = nu;
        cur.weight *= w;
        rec(v + 1);
        cur.weight = save;
      }
  };
  rec(1);
  return out;
}

enum class VertexRule { BRoot, BNonRoot, XiRoot, XiD };

// Builds half-edges of vertex v: own legs, child edges, then the negative ones.
std::vector<HalfEdge> half_edges(const PreparedTree& pt, int v, const Insertion& ins, const EdgeAssignment& ea,
                                 const std::vector<MultiPoly>& leg_forms, const std::vector<MultiPoly>& edge_forms,
                                 const std::vector<MultiPoly>& frozen_forms) {
  const auto& t = pt.tree;
  std::vector<HalfEdge> hs;
  for (int l : t.legs[v]) hs.push_back({ins.fields[l], ins.psi[l], &leg_forms[l], true});
  for (int c : pt.children[v]) hs.push_back({ea.upper[c], 0, &edge_forms[c], true});
  if (v == 0) {
    for (int j = 0; j < t.m; ++j) hs.push_back({ins.fields[t.n + j], ins.psi[t.n + j], &frozen_forms[j], false});
  } else {
    hs.push_back({ea.lower[v], 0, nullptr, false});
  }
  return hs;
}

void check_insertion(int n, int m, const Insertion& ins) {
  if (static_cast<int>(ins.fields.size()) != n + m || static_cast<int>(ins.psi.size()) != n + m)
    throw std::invalid_argument("insertion must have n+m entries");
}

struct Forms {
  MultiPoly::VarList vars;
  std::vector<MultiPoly> legs, frozen;
};

Forms make_forms(int n, int m) {
  Forms f;
  f.vars = MultiPoly::ab_vars(n, m);
  for (int i = 0; i < n; ++i) f.legs.push_back(MultiPoly::variable(f.vars, i));
  for (int j = 0; j < m; ++j) f.frozen.push_back(MultiPoly::variable(f.vars, n + j));
  return f;
}

std::vector<MultiPoly> edge_forms_of(const PreparedTree& pt, const MultiPoly::VarList& vars) {
  std::vector<MultiPoly> ef;
  for (int v = 0; v < pt.tree.nvertices(); ++v) ef.push_back(leg_sum(vars, pt.desc[v]));
  return ef;
}

// Sum over degree splits of a product of per-vertex polynomials indexed by degree.
std::vector<MultiPoly> convolve(const std::vector<MultiPoly>& a, const std::vector<MultiPoly>& b,
                                const MultiPoly::VarList& vars) {
  if (a.empty() || b.empty()) return {};
  std::vector<MultiPoly> r(a.size() + b.size() - 1, MultiPoly(vars));
  for (std::size_t i = 0; i < a.size(); ++i) {
    if (a[i].is_zero()) continue;
    for (std::size_t j = 0; j < b.size(); ++j) {
      if (b[j].is_zero()) continue;
      r[i + j] += a[i] * b[j];
    }
  }
  return r;
}

MultiPoly tree_B_term(const PreparedTree& pt, int g, int m, const Insertion& ins, const AssemblyContext& ctx,
                      const Forms& fm) {
  const auto& t = pt.tree;
  int V = t.nvertices();
  auto ef = edge_forms_of(pt, fm.vars);
  MultiPoly edge_prod = MultiPoly::constant(fm.vars, 1);
  for (int v = 1; v < V; ++v) edge_prod = edge_prod * ef[v];
  MultiPoly total(fm.vars);
  PowerCache pw;
  auto value = [&](int gv) {
    return [&, gv](const std::vector<int>& f, const std::vector<int>& p, const std::vector<int>& e) {
      return ctx.obs.integral(gv, f, p, e, ctx.cohft);
    };
  };
  for (const auto& ea : edge_assignments(V, ctx.cohft.eta_inv())) {
    std::vector<std::vector<MultiPoly>> P(V);
    bool dead = false;
    for (int v = 0; v < V && !dead; ++v) {
      auto hs = half_edges(pt, v, ins, ea, fm.legs, ef, fm.frozen);
      P[v] = vertex_poly(t.genus[v], hs, fm.vars, pw, value(t.genus[v]));
      if (P[v].empty()) dead = true;
    }
    if (dead) continue;
    MultiPoly acc(fm.vars);
    for (const auto& lv : pt.levels) {
      int L = *std::max_element(lv.begin(), lv.end());
      // dp over levels of (sum of d(v) so far) -> polynomial
      std::vector<MultiPoly> dp{MultiPoly::constant(fm.vars, 1)};
      int count = 0, gl = 0;
      for (int i = 0; i <= L && !dp.empty(); ++i) {
        std::vector<MultiPoly> Q{MultiPoly::constant(fm.vars, 1)};
        for (int v = 0; v < V; ++v)
          if (lv[v] == i) {
            Q = convolve(Q, P[v], fm.vars);
            ++count;
            gl += t.genus[v];
          }
        dp = convolve(dp, Q, fm.vars);
        if (i < L) {
          int cap = 2 * gl - 2 + m - count + 1;  // sum d <= cap
          if (cap < 0) dp.clear();
          else if (static_cast<int>(dp.size()) > cap + 1) dp.resize(cap + 1);
        }
      }
      MultiPoly s(fm.vars);
      for (auto& x : dp) s += x;
      if (L % 2) acc -= s;
      else acc += s;
    }
    total += acc * ea.weight;
  }
  return total * edge_prod;
}

// Full O_{g,n+m}(a, b) integrated at ins.
MultiPoly single_vertex_O(int g, const Insertion& ins, const AssemblyContext& ctx, const Forms& fm) {
  std::vector<HalfEdge> hs;
  int n = static_cast<int>(fm.legs.size());
  for (int i = 0; i < n; ++i) hs.push_back({ins.fields[i], ins.psi[i], &fm.legs[i], true});
  for (std::size_t j = 0; j < fm.frozen.size(); ++j)
    hs.push_back({ins.fields[n + j], ins.psi[n + j], &fm.frozen[j], false});
  PowerCache pw;
  auto parts = vertex_poly(g, hs, fm.vars, pw, [&](const std::vector<int>& f, const std::vector<int>& p,
                                                   const std::vector<int>& e) {
    return ctx.obs.integral(g, f, p, e, ctx.cohft);
  });
  MultiPoly s(fm.vars);
  for (auto& x : parts) s += x;
  return s;
}

const DRSource& need_dr(const AssemblyContext& ctx) {
  if (!ctx.dr) throw std::invalid_argument("this class needs a DR source");
  return *ctx.dr;
}

// D_{g,n+1}(a) at ins (first n entries are the legs, entry n is the last point).
MultiPoly d_term(int g, int n, const Insertion& ins, const AssemblyContext& ctx, const Forms& fm) {
  const DRSource& dr = need_dr(ctx);
  MultiPoly out(fm.vars);
  int dim = 3 * g - 3 + n + 1;
  int psum = 0;
  for (int i = 0; i <= n; ++i) psum += ins.psi[i];
  if (psum > dim) return out;
  std::vector<int> fields(ins.fields.begin(), ins.fields.begin() + n + 1);
  std::vector<int> psi(ins.psi.begin(), ins.psi.begin() + n + 1);
  std::vector<int> e(n, 0);
  std::function<void(int, int)> rec = [&](int i, int left) {
    if (i == n) {
      Rational c = dr.d_class(g, fields, psi, e);
      if (c == 0) return;
      Exps x(fm.vars->size(), 0);
      for (int j = 0; j < n; ++j) x[j] = e[j];
      out.add_term(x, c);
      return;
    }
    for (int k = 0; k <= left; ++k) {
      e[i] = k;
      rec(i + 1, left - k);
    }
    e[i] = 0;
  };
  rec(0, dim - psum);
  return out;
}

// The non-D part of Xi: O_{g,n+m} plus height-one trees with D at the children.
MultiPoly xi_nonD(int g, int n, int m, const Insertion& ins, const AssemblyContext& ctx, const Forms& fm) {
  MultiPoly total = single_vertex_O(g, ins, ctx, fm);
  auto trees = prepared_trees(g, n, m);
  for (const auto& pt : *trees) {
    const auto& t = pt.tree;
    int V = t.nvertices();
    if (V == 1) continue;
    bool height_one = true;
    for (int v = 1; v < V; ++v)
      if (t.parent[v] != 0) height_one = false;
    if (!height_one) continue;
    const DRSource& dr = need_dr(ctx);
    auto ef = edge_forms_of(pt, fm.vars);
    MultiPoly edge_prod = MultiPoly::constant(fm.vars, 1);
    for (int v = 1; v < V; ++v) edge_prod = edge_prod * ef[v];
    PowerCache pw;
    MultiPoly tree_sum(fm.vars);
    for (const auto& ea : edge_assignments(V, ctx.cohft.eta_inv())) {
      MultiPoly prod = MultiPoly::constant(fm.vars, 1);
      for (int v = 0; v < V && !prod.is_zero(); ++v) {
        auto hs = half_edges(pt, v, ins, ea, fm.legs, ef, fm.frozen);
        int gv = t.genus[v];
        std::vector<MultiPoly> parts;
        if (v == 0) {
          parts = vertex_poly(gv, hs, fm.vars, pw, [&](const std::vector<int>& f, const std::vector<int>& p,
                                                       const std::vector<int>& e) {
            return ctx.obs.integral(gv, f, p, e, ctx.cohft);
          });
        } else {
          parts = vertex_poly(gv, hs, fm.vars, pw, [&](const std::vector<int>& f, const std::vector<int>& p,
                                                       const std::vector<int>& e) {
            // D takes exponents of the positive half-edges only; the last slot has form 0
            std::vector<int> ea_(e.begin(), e.end() - 1);
            return dr.d_class(gv, f, p, ea_);
          });
        }
        MultiPoly s(fm.vars);
        for (auto& x : parts) s += x;
        prod = prod * s;
      }
      tree_sum += prod * ea.weight;
    }
    total += tree_sum * edge_prod;
  }
  return total;
}

}  // namespace

MultiPoly assemble_B(int g, int n, int m, const Insertion& ins, const AssemblyContext& ctx) {
  check_insertion(n, m, ins);
  Forms fm = make_forms(n, m);
  MultiPoly total(fm.vars);
  auto trees = prepared_trees(g, n, m);
  for (const auto& pt : *trees) total += tree_B_term(pt, g, m, ins, ctx, fm);
  return total;
}

MultiPoly assemble_Xi(int g, int n, int m, const Insertion& ins, const AssemblyContext& ctx) {
  if (m < 1) throw std::invalid_argument("master class needs m >= 1");
  check_insertion(n, m, ins);
  Forms fm = make_forms(n, m);
  MultiPoly total = xi_nonD(g, n, m, ins, ctx, fm);
  if (m == 1) total += d_term(g, n, ins, ctx, fm);
  return total;
}

MultiPoly assemble_Upsilon(int g, int n, int m, const Insertion& ins, const AssemblyContext& ctx) {
  if (m < 1) throw std::invalid_argument("master class needs m >= 1");
  check_insertion(n, m, ins);
  Forms fm = make_forms(n, m);
  MultiPoly total(fm.vars);
  // prod (1 - b_i psi_{n+i}) expands over subsets of the frozen points
  for (unsigned S = 0; S < (1u << m); ++S) {
    Insertion shifted = ins;
    MultiPoly mono = MultiPoly::constant(fm.vars, std::popcount(S) % 2 ? -1 : 1);
    for (int j = 0; j < m; ++j)
      if (S >> j & 1u) {
        shifted.psi[n + j] += 1;
        mono = mono * fm.frozen[j];
      }
    total += mono * xi_nonD(g, n, m, shifted, ctx, fm);
  }
  if (m == 1) total += d_term(g, n, ins, ctx, fm);
  return total;
}

namespace {
MultiPoly dr_poly(int g, int n, int extra_vars, const Insertion& ins,
                  const std::function<Rational(const std::vector<int>&)>& coeff) {
  auto vars = MultiPoly::ab_vars(n, extra_vars);
  MultiPoly out(vars);
  int dim = 3 * g - 3 + static_cast<int>(ins.psi.size());
  int psum = std::accumulate(ins.psi.begin(), ins.psi.end(), 0);
  if (psum > dim) return out;
  std::vector<int> e(n, 0);
  std::function<void(int, int)> rec = [&](int i, int left) {
    if (i == n) {
      Rational c = coeff(e);
      if (c == 0) return;
      Exps x(vars->size(), 0);
      for (int j = 0; j < n; ++j) x[j] = e[j];
      out.add_term(x, c);
      return;
    }
    for (int k = 0; k <= left; ++k) {
      e[i] = k;
      rec(i + 1, left - k);
    }
    e[i] = 0;
  };
  rec(0, dim - psum);
  return out;
}
}  // namespace

MultiPoly assemble_A1(int g, int n, const Insertion& ins, const AssemblyContext& ctx) {
  check_insertion(n, 1, ins);
  const DRSource& dr = need_dr(ctx);
  return dr_poly(g, n, 1, ins, [&](const std::vector<int>& e) { return dr.a1_class(g, ins.fields, ins.psi, e); });
}

MultiPoly assemble_A(int g, int n, const Insertion& ins, const AssemblyContext& ctx) {
  check_insertion(n, 0, ins);
  const DRSource& dr = need_dr(ctx);
  return dr_poly(g, n, 0, ins, [&](const std::vector<int>& e) { return dr.a_class(g, ins.fields, ins.psi, e); });
}

std::vector<Insertion> insertions(int points, int N, int max_psi) {
  std::vector<Insertion> out;
  if (max_psi < 0) return out;
  Insertion cur{std::vector<int>(points, 1), std::vector<int>(points, 0)};
  std::function<void(int, int)> psi_rec = [&](int i, int left) {
    if (i == points) {
      out.push_back(cur);
      return;
    }
    for (int k = 0; k <= left; ++k) {
      cur.psi[i] = k;
      psi_rec(i + 1, left - k);
    }
    cur.psi[i] = 0;
  };
  std::function<void(int)> field_rec = [&](int i) {
    if (i == points) {
      psi_rec(0, max_psi);
      return;
    }
    for (int a = 1; a <= N; ++a) {
      cur.fields[i] = a;
      field_rec(i + 1);
    }
  };
  field_rec(0);
  return out;
}

nlohmann::json IntegratedClass::to_json() const {
  nlohmann::json j;
  j["g"] = g;
  j["n"] = n;
  j["m"] = m;
  j["vars"] = *vars;
  nlohmann::json vals = nlohmann::json::array();
  for (const auto& [ins, p] : values) {
    if (p.is_zero()) continue;
    vals.push_back({{"fields", ins.fields}, {"psi", ins.psi}, {"poly", p.to_json()}});
  }
  j["values"] = vals;
  return j;
}

IntegratedClass integrate_B(int g, int n, int m, const AssemblyContext& ctx, int max_psi, int workers) {
  IntegratedClass ic;
  ic.g = g;
  ic.n = n;
  ic.m = m;
  ic.vars = MultiPoly::ab_vars(n, m);
  auto ins = insertions(n + m, ctx.cohft.N(), max_psi);
  std::vector<MultiPoly> res(ins.size());
  parallel_for(ins.size(), workers, [&](std::size_t i) { res[i] = assemble_B(g, n, m, ins[i], ctx); });
  for (std::size_t i = 0; i < ins.size(); ++i) ic.values[ins[i]] = res[i];
  return ic;
}

// ---------------------------------------------------------------------------
// checks

std::string to_string(Relation r) {
  switch (r) {
    case Relation::LRT0: return "LRT-0";
    case Relation::LRT1: return "LRT-1";
    case Relation::LRT2: return "LRT-2";
    case Relation::LRTm: return "LRT-m";
    case Relation::M: return "M-m";
    case Relation::GM: return "GM-m";
  }
  return "?";
}

nlohmann::json CheckReport::to_json() const {
  std::string rel = to_string(relation);
  if (relation == Relation::LRTm || relation == Relation::M || relation == Relation::GM)
    rel = rel.substr(0, rel.size() - 1) + std::to_string(m);
  return {{"relation", rel}, {"g", g},        {"n", n},
          {"m", m},          {"status", pass ? "PASS" : "FAIL"},
          {"checked", checked}, {"violations", violations}};
}

namespace {

using Builder = std::function<MultiPoly(const Insertion&)>;
// Decides whether a monomial of the target must vanish.
using Filter = std::function<bool(const Exps&)>;

void run_check(CheckReport& rep, int points, int N, int max_psi, const Builder& build, const Filter& forbidden,
               const std::function<bool(const Insertion&, const Exps&)>& forbidden_at, int workers,
               const MultiPoly::VarList& vars) {
  auto ins = insertions(points, N, max_psi);
  std::vector<MultiPoly> res(ins.size());
  parallel_for(ins.size(), workers, [&](std::size_t i) { res[i] = build(ins[i]); });
  for (std::size_t i = 0; i < ins.size(); ++i) {
    rep.checked += 1;
    for (const auto& [e, c] : res[i].terms()) {
      bool bad = forbidden_at ? forbidden_at(ins[i], e) : forbidden(e);
      if (!bad) continue;
      rep.pass = false;
      rep.violations.push_back({{"monomial", monomial_string(*vars, e)},
                                {"value", to_string(c)},
                                {"fields", ins[i].fields},
                                {"psi", ins[i].psi}});
    }
  }
}

int a_degree(const Exps& e, int n) {
  int s = 0;
  for (int i = 0; i < n; ++i) s += e[i];
  return s;
}

}  // namespace

CheckReport check_lrt(int m, int g, int n, const AssemblyContext& ctx, const CheckOptions& opt) {
  CheckReport rep;
  rep.g = g;
  rep.n = n;
  rep.m = m;
  int points = n + m;
  int dim = 3 * g - 3 + points;
  int N = ctx.cohft.N();
  auto vars = MultiPoly::ab_vars(n, m);
  if (m >= 2) {
    rep.relation = m == 2 ? Relation::LRT2 : Relation::LRTm;
    if (2 * g - 2 + n + m <= 0) throw std::invalid_argument("unstable (g,n,m)");
    int bound = 2 * g - 2 + m;
    bool only_b2_zero = (m == 2 && !opt.strong);
    run_check(
        rep, points, N, dim - bound - 1, [&](const Insertion& i) { return assemble_B(g, n, m, i, ctx); },
        [&](const Exps& e) {
          if (only_b2_zero && e[n + 1] != 0) return false;
          return a_degree(e, n) > bound;
        },
        nullptr, opt.workers, vars);
  } else if (m == 1) {
    rep.relation = Relation::LRT1;
    if (n < 1 || 2 * g - 1 + n <= 0) throw std::invalid_argument("LRT-1 needs n >= 1, 2g-1+n > 0");
    int bound = 2 * g - 1;
    run_check(
        rep, points, N, dim - bound - 1,
        [&](const Insertion& i) {
          MultiPoly b = assemble_B(g, n, 1, i, ctx);
          MultiPoly b0(vars);
          for (const auto& [e, c] : b.terms())
            if (e[n] == 0) b0.add_term(e, c);
          return b0 - assemble_A1(g, n, i, ctx);
        },
        [&](const Exps& e) { return a_degree(e, n) > bound; }, nullptr, opt.workers, vars);
  } else {
    rep.relation = Relation::LRT0;
    if (n < 1 || 2 * g - 2 + n <= 0) throw std::invalid_argument("LRT-0 needs n >= 1, 2g-2+n > 0");
    int bound = 2 * g - 2;
    run_check(
        rep, points, N, dim - bound - 1,
        [&](const Insertion& i) { return assemble_B(g, n, 0, i, ctx) - assemble_A(g, n, i, ctx); },
        [&](const Exps& e) { return a_degree(e, n) > bound; }, nullptr, opt.workers, vars);
  }
  return rep;
}

CheckReport check_master(int m, int g, int n, const AssemblyContext& ctx, const CheckOptions& opt) {
  if (m < 1) throw std::invalid_argument("master relation needs m >= 1");
  if (n < 1 || 2 * g - 2 + n < 0) throw std::invalid_argument("master relation needs n >= 1, 2g-2+n >= 0");
  CheckReport rep;
  rep.relation = Relation::M;
  rep.g = g;
  rep.n = n;
  rep.m = m;
  int points = n + m;
  int dim = 3 * g - 3 + points;
  auto vars = MultiPoly::ab_vars(n, m);
  int bound = m == 1 ? 2 * g - 1 : 2 * g - 2 + m;
  run_check(
      rep, points, ctx.cohft.N(), dim - bound - 1, [&](const Insertion& i) { return assemble_Xi(g, n, m, i, ctx); },
      [&](const Exps& e) {
        if (m == 1 && e[n] != 0) return false;
        return a_degree(e, n) > bound;
      },
      nullptr, opt.workers, vars);
  return rep;
}

CheckReport check_geometric_master(int m, int g, int n, const AssemblyContext& ctx, const CheckOptions& opt) {
  if (m < 1) throw std::invalid_argument("master relation needs m >= 1");
  if (n < 1 || 2 * g - 2 + n < 0) throw std::invalid_argument("master relation needs n >= 1, 2g-2+n >= 0");
  CheckReport rep;
  rep.relation = Relation::GM;
  rep.g = g;
  rep.n = n;
  rep.m = m;
  int points = n + m;
  int dim = 3 * g - 3 + points;
  auto pc_deg = ctx.cohft.max_degree(g, points);
  if (!pc_deg) throw MissingCorrelator("geometric master check needs the Chow degree bound of the CohFT");
  auto vars = MultiPoly::ab_vars(n, m);
  int bound = 2 * g - 2 + m;
  // the class paired with psi^p and pc has Chow degree >= dim - |p| - deg pc
  run_check(
      rep, points, ctx.cohft.N(), dim - bound - 1 - *pc_deg,
      [&](const Insertion& i) { return assemble_Upsilon(g, n, m, i, ctx); }, nullptr,
      [&](const Insertion& i, const Exps&) {
        int ps = std::accumulate(i.psi.begin(), i.psi.end(), 0);
        return dim - ps - *pc_deg > bound;
      },
      opt.workers, vars);
  return rep;
}

}  // namespace iobs
