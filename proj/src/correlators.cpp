#include "iobs/correlators.hpp"

#include <algorithm>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <mutex>
#include <numeric>
#include <shared_mutex>
#include <sstream>

#include "iobs/bernoulli.hpp"

namespace iobs {

// ---------------------------------------------------------------- psi engine

namespace {

struct PsiCache {
  std::shared_mutex mu;
  std::map<std::pair<int, std::vector<int>>, Rational> values;
};

PsiCache& psi_cache() {
  static PsiCache c;
  return c;
}

Rational psi_sorted(int g, const std::vector<int>& d);

Rational psi_lookup(int g, std::vector<int> d) {
  std::sort(d.begin(), d.end(), std::greater<>());
  return psi_sorted(g, d);
}

bool stable(int g, int n) { return 2 * g - 2 + n > 0; }

Rational dvv(int g, const std::vector<int>& d) {
  // d sorted descending, all entries >= 2; peel off tau_{k+1} = d[0].
  const int k = d[0] - 1;
  std::vector<int> rest(d.begin() + 1, d.end());
  const int s = static_cast<int>(rest.size());
  Rational total = 0;

  for (int j = 0; j < s; ++j) {
    std::vector<int> nd = rest;
    const int dj = nd[j];
    nd[j] = k + dj;
    Rational c(double_factorial_odd(k + dj + 1), double_factorial_odd(dj));
    c.canonicalize();
    total += c * psi_lookup(g, nd);
  }

  Rational half(1, 2);
  for (int r = 0; r <= k - 1; ++r) {
    int t = k - 1 - r;
    Rational w = half * Rational(double_factorial_odd(r + 1) * double_factorial_odd(t + 1));
    if (g >= 1 && stable(g - 1, s + 2)) {
      std::vector<int> nd = rest;
      nd.push_back(r);
      nd.push_back(t);
      total += w * psi_lookup(g - 1, nd);
    }
    // Separating splits: subsets of rest, genus split.
    for (unsigned mask = 0; mask < (1u << s); ++mask) {
      std::vector<int> I{r}, J{t};
      for (int i = 0; i < s; ++i) ((mask >> i) & 1u ? I : J).push_back(rest[i]);
      for (int g1 = 0; g1 <= g; ++g1) {
        int g2 = g - g1;
        if (!stable(g1, static_cast<int>(I.size())) || !stable(g2, static_cast<int>(J.size()))) continue;
        Rational a = psi_lookup(g1, I);
        if (a == 0) continue;
        total += w * a * psi_lookup(g2, J);
      }
    }
  }
  return total / Rational(double_factorial_odd(k + 2));
}

Rational psi_compute(int g, const std::vector<int>& d) {
  const int n = static_cast<int>(d.size());
  if (g == 0 && n == 3) return 1;  // all zero by the dimension check
  if (g == 1 && n == 1) return Rational(1, 24);
  // d is descending, so zeros and ones sit at the end.
  if (d.back() == 0) {
    std::vector<int> base(d.begin(), d.end() - 1);
    Rational s = 0;
    for (std::size_t j = 0; j < base.size(); ++j) {
      if (base[j] == 0) continue;
      std::vector<int> nd = base;
      nd[j] -= 1;
      s += psi_lookup(g, nd);
    }
    return s;
  }
  if (d.back() == 1) {
    std::vector<int> base(d.begin(), d.end() - 1);
    if (!stable(g, n - 1)) return 0;
    return Rational(2 * g - 2 + (n - 1)) * psi_lookup(g, base);
  }
  return dvv(g, d);
}

Rational psi_sorted(int g, const std::vector<int>& d) {
  const int n = static_cast<int>(d.size());
  if (g < 0 || !stable(g, n)) return 0;
  int sum = 0;
  for (int x : d) {
    if (x < 0) return 0;
    sum += x;
  }
  if (sum != 3 * g - 3 + n) return 0;
  auto key = std::make_pair(g, d);
  auto& c = psi_cache();
  {
    std::shared_lock lk(c.mu);
    auto it = c.values.find(key);
    if (it != c.values.end()) return it->second;
  }
  Rational v = psi_compute(g, d);
  std::unique_lock lk(c.mu);
  c.values.emplace(std::move(key), v);
  return v;
}

}  // namespace

Rational psi_correlator(int g, const std::vector<int>& d) {
  if (g < 0) throw std::invalid_argument("psi_correlator: negative genus");
  if (!stable(g, static_cast<int>(d.size())))
    throw std::invalid_argument("psi_correlator: unstable (2g-2+n <= 0)");
  return psi_lookup(g, d);
}

Rational psi_correlator_genus0(const std::vector<int>& d) {
  const int n = static_cast<int>(d.size());
  if (n < 3) throw std::invalid_argument("psi_correlator_genus0: need n >= 3");
  int s = 0;
  for (int x : d) s += x;
  if (s != n - 3) return 0;
  return multinomial(n - 3, d);
}

// ---------------------------------------------------------------- lambda classes

LambdaCombination hodge_reduce(const LambdaMonomial& indices, int g) {
  LambdaCombination work;
  LambdaMonomial start;
  for (int i : indices) {
    if (i < 0) throw std::invalid_argument("hodge_reduce: negative index");
    if (i > g) return {};
    if (i > 0) start.push_back(i);
  }
  std::sort(start.begin(), start.end(), std::greater<>());
  work[start] = 1;
  LambdaCombination done;
  while (!work.empty()) {
    auto node = work.extract(work.begin());
    const LambdaMonomial& mono = node.key();
    const Rational coef = node.mapped();
    int k = -1;
    for (std::size_t i = 0; i + 1 < mono.size(); ++i)
      if (mono[i] == mono[i + 1]) {
        k = mono[i];
        break;
      }
    if (k < 0) {
      done[mono] += coef;
      if (done[mono] == 0) done.erase(mono);
      continue;
    }
    LambdaMonomial rest = mono;
    rest.erase(std::find(rest.begin(), rest.end(), k));
    rest.erase(std::find(rest.begin(), rest.end(), k));
    // lambda_k^2 = 2 sum_{i<k} (-1)^{k+1+i} lambda_i lambda_{2k-i}
    for (int i = 0; i < k; ++i) {
      int j = 2 * k - i;
      if (j > g) continue;
      LambdaMonomial nm = rest;
      if (i > 0) nm.push_back(i);
      nm.push_back(j);
      std::sort(nm.begin(), nm.end(), std::greater<>());
      Rational c = coef * ((k + 1 + i) % 2 == 0 ? 2 : -2);
      work[nm] += c;
      if (work[nm] == 0) work.erase(nm);
    }
  }
  return done;
}

Rational lambda_top_triple(int g) {
  if (g < 2) throw std::invalid_argument("lambda_top_triple: g >= 2 required");
  Rational b1 = abs(bernoulli_number(2 * g));
  Rational b2 = abs(bernoulli_number(2 * g - 2));
  Rational den(Integer(2 * g) * Integer(2 * g - 2) * factorial(2 * g - 2));
  return b1 * b2 / den;
}

Rational lambda_integral(const LambdaMonomial& indices, int g) {
  int s = 0;
  for (int i : indices) s += i;
  if (s != 3 * g - 3) return 0;
  LambdaCombination red = hodge_reduce(indices, g);
  LambdaMonomial target;
  for (int i : {g, g - 1, g - 2})
    if (i > 0) target.push_back(i);
  Rational total = 0;
  for (const auto& [m, c] : red) {
    if (m != target) throw std::runtime_error("lambda_integral: unsupported lambda monomial after reduction");
    // lambda_{g-1}^3 = 2 lambda_g lambda_{g-1} lambda_{g-2}
    total += c * lambda_top_triple(g) / 2;
  }
  return total;
}

// ---------------------------------------------------------------- keys and tables

std::string to_string(TableKind k) {
  switch (k) {
    case TableKind::CohftPsi: return "cohft_psi";
    case TableKind::ObsO: return "obs_O";
    case TableKind::DrD: return "dr_D";
    case TableKind::FcohftPsi: return "fcohft_psi";
  }
  return "?";
}

TableKind table_kind_from_string(const std::string& s) {
  if (s == "cohft_psi") return TableKind::CohftPsi;
  if (s == "obs_O") return TableKind::ObsO;
  if (s == "dr_D") return TableKind::DrD;
  if (s == "fcohft_psi") return TableKind::FcohftPsi;
  throw TableError("unknown table kind: " + s);
}

std::string to_string(ClassType t) {
  switch (t) {
    case ClassType::Plain: return "plain";
    case ClassType::Lambda: return "lambda";
    case ClassType::DrD: return "dr_d";
    case ClassType::ObsO: return "obs_o";
    case ClassType::A1: return "a1";
    case ClassType::A: return "a";
    case ClassType::DrQ: return "dr_q";
  }
  return "?";
}

namespace {

ClassType class_type_from_string(const std::string& s) {
  for (ClassType t : {ClassType::Plain, ClassType::Lambda, ClassType::DrD, ClassType::ObsO, ClassType::A1,
                      ClassType::A, ClassType::DrQ})
    if (to_string(t) == s) return t;
  throw TableError("unknown class type: " + s);
}

// Range [lo, hi) of marked points permuted by the symmetric group, and whether
// exps are attached per point with offset lo.
std::pair<int, int> symmetric_range(const CorrelatorKey& k) {
  const int n = k.npoints();
  switch (k.cls.type) {
    case ClassType::DrD:
    case ClassType::A1: return {0, n - 1};
    case ClassType::DrQ: return {2, n};
    default: return {0, n};
  }
}

int expected_exps(const CorrelatorKey& k) {
  const int n = k.npoints();
  switch (k.cls.type) {
    case ClassType::Plain:
    case ClassType::Lambda: return 0;
    case ClassType::DrD:
    case ClassType::A1: return n - 1;
    case ClassType::DrQ: return n - 2;
    case ClassType::ObsO:
    case ClassType::A: return n;
  }
  return 0;
}

bool kind_allows(TableKind kind, ClassType t) {
  switch (kind) {
    case TableKind::CohftPsi:
    case TableKind::FcohftPsi: return t == ClassType::Plain || t == ClassType::Lambda;
    case TableKind::ObsO: return t == ClassType::ObsO;
    case TableKind::DrD: return t == ClassType::DrD || t == ClassType::A1 || t == ClassType::A || t == ClassType::DrQ;
  }
  return false;
}

std::string join(const std::vector<int>& v) {
  std::string s;
  for (std::size_t i = 0; i < v.size(); ++i) s += (i ? "," : "") + std::to_string(v[i]);
  return s;
}

}  // namespace

CorrelatorKey CorrelatorKey::canonical() const {
  CorrelatorKey k = *this;
  std::sort(k.cls.parts.begin(), k.cls.parts.end());
  auto [lo, hi] = symmetric_range(k);
  const bool per_point = expected_exps(k) > 0;
  const int off = (k.cls.type == ClassType::DrQ) ? 2 : 0;
  std::vector<std::tuple<int, int, int>> pts;
  for (int i = lo; i < hi; ++i) pts.emplace_back(k.fields[i], k.psi[i], per_point ? k.cls.exps[i - off] : 0);
  std::sort(pts.begin(), pts.end());
  for (int i = lo; i < hi; ++i) {
    auto [f, p, e] = pts[i - lo];
    k.fields[i] = f;
    k.psi[i] = p;
    if (per_point) k.cls.exps[i - off] = e;
  }
  return k;
}

std::string CorrelatorKey::describe() const {
  std::string s = "g=" + std::to_string(g) + " fields=[" + join(fields) + "] psi=[" + join(psi) +
                  "] class=" + to_string(cls.type);
  if (!cls.exps.empty()) s += " a=[" + join(cls.exps) + "]";
  if (!cls.parts.empty()) s += " parts=[" + join(cls.parts) + "]";
  return s;
}

std::optional<Rational> CorrelatorTable::lookup(const CorrelatorKey& key) const {
  auto it = entries.find(key.canonical());
  if (it != entries.end()) return it->second;
  if (complete.count({key.g, key.npoints()})) return Rational(0);
  if (complete_class.count({key.g, key.npoints(), key.cls.type})) return Rational(0);
  return std::nullopt;
}

Rational CorrelatorTable::require(const CorrelatorKey& key) const {
  auto v = lookup(key);
  if (!v) throw MissingCorrelator("missing correlator in " + to_string(kind) + " table: " + key.describe());
  return *v;
}

void CorrelatorTable::insert(const CorrelatorKey& key, const Rational& v) {
  CorrelatorKey c = key.canonical();
  auto it = entries.find(c);
  if (it != entries.end()) {
    if (it->second != v) throw TableError("symmetry inconsistency at " + c.describe());
    return;
  }
  entries.emplace(std::move(c), v);
}

Matrix identity_matrix(int n) {
  Matrix m(n, std::vector<Rational>(n, 0));
  for (int i = 0; i < n; ++i) m[i][i] = 1;
  return m;
}

Matrix invert_matrix(const Matrix& m) {
  const int n = static_cast<int>(m.size());
  Matrix a = m, inv = identity_matrix(n);
  for (int c = 0; c < n; ++c) {
    int piv = -1;
    for (int r = c; r < n; ++r)
      if (a[r][c] != 0) {
        piv = r;
        break;
      }
    if (piv < 0) throw TableError("eta is not invertible");
    std::swap(a[c], a[piv]);
    std::swap(inv[c], inv[piv]);
    Rational p = a[c][c];
    for (int j = 0; j < n; ++j) {
      a[c][j] /= p;
      inv[c][j] /= p;
    }
    for (int r = 0; r < n; ++r) {
      if (r == c || a[r][c] == 0) continue;
      Rational f = a[r][c];
      for (int j = 0; j < n; ++j) {
        a[r][j] -= f * a[c][j];
        inv[r][j] -= f * inv[c][j];
      }
    }
  }
  return inv;
}

namespace {

void check_keys(const nlohmann::json& j, const std::set<std::string>& required, const std::set<std::string>& optional,
                const std::string& where) {
  if (!j.is_object()) throw TableError(where + ": expected object");
  for (const auto& [k, v] : j.items())
    if (!required.count(k) && !optional.count(k)) throw TableError(where + ": unknown field '" + k + "'");
  for (const auto& k : required)
    if (!j.contains(k)) throw TableError(where + ": missing field '" + k + "'");
}

std::vector<int> int_list(const nlohmann::json& j, const std::string& where) {
  if (!j.is_array()) throw TableError(where + ": expected array");
  std::vector<int> v;
  for (const auto& x : j) {
    if (!x.is_number_integer()) throw TableError(where + ": expected integers");
    v.push_back(x.get<int>());
  }
  return v;
}

Rational rational_field(const nlohmann::json& j, const std::string& where) {
  try {
    if (j.is_number_integer()) return Rational(j.get<long>());
    if (j.is_string()) return parse_rational(j.get<std::string>());
  } catch (const std::exception& e) {
    throw TableError(where + ": " + e.what());
  }
  throw TableError(where + ": expected rational string");
}

ClassTag parse_class(const nlohmann::json& j, const std::string& where) {
  if (!j.is_object() || !j.contains("type")) throw TableError(where + ": class needs a type");
  ClassTag c;
  c.type = class_type_from_string(j.at("type").get<std::string>());
  switch (c.type) {
    case ClassType::Plain: check_keys(j, {"type"}, {}, where); break;
    case ClassType::Lambda:
      check_keys(j, {"type", "parts"}, {}, where);
      c.parts = int_list(j["parts"], where);
      for (int p : c.parts)
        if (p <= 0) throw TableError(where + ": lambda indices must be positive");
      break;
    case ClassType::ObsO:
      check_keys(j, {"type", "a"}, {"b"}, where);
      c.exps = int_list(j["a"], where);
      if (j.contains("b")) {
        auto b = int_list(j["b"], where);
        c.exps.insert(c.exps.end(), b.begin(), b.end());
      }
      break;
    default:
      check_keys(j, {"type", "a"}, {}, where);
      c.exps = int_list(j["a"], where);
  }
  for (int e : c.exps)
    if (e < 0) throw TableError(where + ": negative exponent");
  return c;
}

}  // namespace

CorrelatorTable parse_table(std::istream& in, std::optional<TableKind> expected) {
  CorrelatorTable t;
  std::string line;
  int lineno = 0;
  bool have_header = false;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    const std::string where = "line " + std::to_string(lineno);
    nlohmann::json j;
    try {
      j = nlohmann::json::parse(line);
    } catch (const std::exception& e) {
      throw TableError(where + ": invalid JSON");
    }
    if (!have_header) {
      check_keys(j, {"kind", "N"}, {"eta", "complete", "trivial", "note", "degree_bounds"}, where);
      t.kind = table_kind_from_string(j["kind"].get<std::string>());
      if (expected && *expected != t.kind)
        throw TableError("table kind " + to_string(t.kind) + " where " + to_string(*expected) + " expected");
      if (!j["N"].is_number_integer() || j["N"].get<int>() < 1) throw TableError(where + ": N must be >= 1");
      t.N = j["N"].get<int>();
      if (j.contains("eta")) {
        if (!j["eta"].is_array() || static_cast<int>(j["eta"].size()) != t.N)
          throw TableError(where + ": eta must be N x N");
        for (const auto& row : j["eta"]) {
          if (!row.is_array() || static_cast<int>(row.size()) != t.N) throw TableError(where + ": eta must be N x N");
          std::vector<Rational> r;
          for (const auto& x : row) r.push_back(rational_field(x, where));
          t.eta.push_back(r);
        }
        for (int a = 0; a < t.N; ++a)
          for (int b = 0; b < t.N; ++b)
            if (t.eta[a][b] != t.eta[b][a]) throw TableError(where + ": eta must be symmetric");
      } else {
        t.eta = identity_matrix(t.N);
      }
      t.eta_inv = invert_matrix(t.eta);
      if (j.contains("complete")) {
        for (const auto& p : j["complete"]) {
          if (p.is_array() && p.size() == 3 && p[2].is_string()) {
            auto v = int_list(nlohmann::json{p[0], p[1]}, where);
            t.complete_class.insert({v[0], v[1], class_type_from_string(p[2].get<std::string>())});
            continue;
          }
          auto v = int_list(p, where);
          if (v.size() != 2) throw TableError(where + ": complete entries are [g,n] or [g,n,class]");
          t.complete.insert({v[0], v[1]});
        }
      }
      if (j.contains("degree_bounds")) {
        for (const auto& p : j["degree_bounds"]) {
          auto v = int_list(p, where);
          if (v.size() != 3) throw TableError(where + ": degree_bounds entries are [g,n,deg]");
          t.degree_bounds[{v[0], v[1]}] = v[2];
        }
      }
      if (j.contains("trivial")) {
        if (!j["trivial"].is_boolean()) throw TableError(where + ": trivial must be boolean");
        t.trivial = j["trivial"].get<bool>();
        if (t.trivial && t.N != 1) throw TableError(where + ": trivial tables have N = 1");
      }
      if (j.contains("note")) t.note = j["note"].get<std::string>();
      have_header = true;
      continue;
    }
    check_keys(j, {"g", "fields", "psi", "class", "value"}, {}, where);
    CorrelatorKey k;
    if (!j["g"].is_number_integer()) throw TableError(where + ": g must be an integer");
    k.g = j["g"].get<int>();
    k.fields = int_list(j["fields"], where);
    k.psi = int_list(j["psi"], where);
    k.cls = parse_class(j["class"], where);
    if (k.g < 0) throw TableError(where + ": negative genus");
    if (k.fields.size() != k.psi.size()) throw TableError(where + ": fields and psi differ in length");
    if (2 * k.g - 2 + k.npoints() <= 0) throw TableError(where + ": unstable key (2g-2+n <= 0)");
    for (int f : k.fields)
      if (f < 1 || f > t.N) throw TableError(where + ": field index out of range");
    for (int p : k.psi)
      if (p < 0) throw TableError(where + ": negative psi exponent");
    if (!kind_allows(t.kind, k.cls.type))
      throw TableError(where + ": class " + to_string(k.cls.type) + " not allowed in " + to_string(t.kind));
    if (static_cast<int>(k.cls.exps.size()) != expected_exps(k))
      throw TableError(where + ": class exponent count does not match marked points");
    t.insert(k, rational_field(j["value"], where));
  }
  if (!have_header) throw TableError("empty table");
  return t;
}

std::string resolve_table_path(const std::string& name) {
  namespace fs = std::filesystem;
  if (fs::exists(name)) return name;
  if (const char* env = std::getenv("COHFT_TABLE_PATH")) {
    std::stringstream ss(env);
    std::string dir;
    while (std::getline(ss, dir, ':')) {
      if (dir.empty()) continue;
      fs::path p = fs::path(dir) / name;
      if (fs::exists(p)) return p.string();
    }
  }
  throw TableError("table not found: " + name);
}

CorrelatorTable load_table(const std::string& path, std::optional<TableKind> expected) {
  std::ifstream in(resolve_table_path(path));
  if (!in) throw TableError("cannot open table: " + path);
  return parse_table(in, expected);
}

void write_table(std::ostream& out, const CorrelatorTable& t) {
  nlohmann::json h;
  h["kind"] = to_string(t.kind);
  h["N"] = t.N;
  nlohmann::json eta = nlohmann::json::array();
  for (const auto& row : t.eta) {
    nlohmann::json r = nlohmann::json::array();
    for (const auto& x : row) r.push_back(to_string(x));
    eta.push_back(r);
  }
  h["eta"] = eta;
  nlohmann::json comp = nlohmann::json::array();
  for (const auto& [g, n] : t.complete) comp.push_back({g, n});
  for (const auto& [g, n, c] : t.complete_class) comp.push_back({g, n, to_string(c)});
  h["complete"] = comp;
  h["trivial"] = t.trivial;
  if (!t.degree_bounds.empty()) {
    nlohmann::json db = nlohmann::json::array();
    for (const auto& [gn, d] : t.degree_bounds) db.push_back({gn.first, gn.second, d});
    h["degree_bounds"] = db;
  }
  if (!t.note.empty()) h["note"] = t.note;
  out << h.dump() << "\n";
  for (const auto& [k, v] : t.entries) {
    nlohmann::json e;
    e["g"] = k.g;
    e["fields"] = k.fields;
    e["psi"] = k.psi;
    nlohmann::json c;
    c["type"] = to_string(k.cls.type);
    if (k.cls.type == ClassType::Lambda) c["parts"] = k.cls.parts;
    if (k.cls.type != ClassType::Plain && k.cls.type != ClassType::Lambda) c["a"] = k.cls.exps;
    e["class"] = c;
    e["value"] = to_string(v);
    out << e.dump() << "\n";
  }
}

// ---------------------------------------------------------------- CohFTs

TrivialCohFT::TrivialCohFT() : eta_(identity_matrix(1)) {}

Rational TrivialCohFT::correlator(int g, const std::vector<int>& fields, const std::vector<int>& psi) const {
  for (int f : fields)
    if (f != 1) throw std::invalid_argument("trivial CohFT has a single field");
  return psi_correlator(g, psi);
}

TableCohFT::TableCohFT(CorrelatorTable t) : table_(std::move(t)) {
  if (table_.kind != TableKind::CohftPsi) throw TableError("TableCohFT needs a cohft_psi table");
}

Rational TableCohFT::correlator(int g, const std::vector<int>& fields, const std::vector<int>& psi) const {
  if (table_.trivial) return psi_correlator(g, psi);
  int dim = 3 * g - 3 + static_cast<int>(psi.size());
  int s = std::accumulate(psi.begin(), psi.end(), 0);
  if (s > dim) return 0;
  CorrelatorKey k{g, fields, psi, {}};
  return table_.require(k);
}

std::optional<int> TableCohFT::max_degree(int g, int n) const {
  if (table_.trivial) return 0;
  auto it = table_.degree_bounds.find({g, n});
  if (it != table_.degree_bounds.end()) return it->second;
  return std::nullopt;
}

// ---------------------------------------------------------------- DR-type classes

DRSource::DRSource(const CohFT& cohft, const CorrelatorTable* table) : cohft_(cohft), table_(table) {
  if (table_ && table_->kind != TableKind::DrD) throw TableError("DR source needs a dr_D table");
}

bool degree_excludes(const CohFT& cohft, int g, int npoints, int chow) {
  int dim = 3 * g - 3 + npoints;
  if (chow > dim) return true;
  auto D = cohft.max_degree(g, npoints);
  return D && chow + *D < dim;
}

Rational DRSource::from_table(ClassType t, int g, const std::vector<int>& fields, const std::vector<int>& psi,
                              const std::vector<int>& e) const {
  int chow = std::accumulate(psi.begin(), psi.end(), 0) + std::accumulate(e.begin(), e.end(), 0);
  if (degree_excludes(cohft_, g, static_cast<int>(fields.size()), chow)) return 0;
  CorrelatorKey k{g, fields, psi, {t, e, {}}};
  if (!table_) throw MissingCorrelator("table required: " + k.describe());
  return table_->require(k);
}

Rational DRSource::d_class(int g, const std::vector<int>& fields, const std::vector<int>& psi,
                           const std::vector<int>& e) const {
  if (g > 0) return from_table(ClassType::DrD, g, fields, psi, e);
  int k = std::accumulate(e.begin(), e.end(), 0);
  std::vector<int> p = psi;
  p.back() += k;
  // D_{0,n+1} = -sum_k (-a)^k psi_{n+1}^k
  Rational c = multinomial(k, e) * (k % 2 == 0 ? -1 : 1);
  return c * cohft_.correlator(0, fields, p);
}

Rational DRSource::a1_class(int g, const std::vector<int>& fields, const std::vector<int>& psi,
                            const std::vector<int>& e) const {
  if (g > 0) return from_table(ClassType::A1, g, fields, psi, e);
  std::vector<int> p = psi;
  for (std::size_t i = 0; i < e.size(); ++i) p[i] += e[i];
  return cohft_.correlator(0, fields, p);
}

Rational DRSource::a_class(int g, const std::vector<int>& fields, const std::vector<int>& psi,
                           const std::vector<int>& e) const {
  if (g > 0) return from_table(ClassType::A, g, fields, psi, e);
  std::vector<int> p = psi;
  for (std::size_t i = 0; i < e.size(); ++i) p[i] += e[i];
  return cohft_.correlator(0, fields, p);
}

Rational DRSource::dr_q(int g, const std::vector<int>& fields, const std::vector<int>& psi,
                        const std::vector<int>& e) const {
  if (g > 0) return from_table(ClassType::DrQ, g, fields, psi, e);
  for (int x : e)
    if (x != 0) return 0;
  return cohft_.correlator(0, fields, psi);
}

}  // namespace iobs
