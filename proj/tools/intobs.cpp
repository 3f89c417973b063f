// intobs: correlators, relation checks and hierarchy computations from the command line.
// Exit codes: 0 success / all checks pass, 1 a relation is violated, 2 usage error or missing data.

#include <fstream>
#include <iostream>
#include <memory>
#include <optional>
#include <sstream>

#include <CLI11.hpp>

#include "iobs/hierarchy.hpp"
#include "iobs/piident.hpp"

using namespace iobs;
using json = nlohmann::json;

namespace {

struct Usage : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct Range {
  int lo = 0, hi = 0;
};

Range parse_range(const std::string& s) {
  Range r;
  try {
    auto dots = s.find("..");
    if (dots == std::string::npos) {
      r.lo = r.hi = std::stoi(s);
    } else {
      r.lo = std::stoi(s.substr(0, dots));
      r.hi = std::stoi(s.substr(dots + 2));
    }
  } catch (const std::exception&) {
    throw Usage("bad range '" + s + "' (expected a or a..b)");
  }
  if (r.lo > r.hi || r.lo < 0) throw Usage("bad range '" + s + "'");
  return r;
}

std::optional<std::string> table_arg(const std::string& s) {
  if (s.rfind("table:", 0) == 0) return s.substr(6);
  return std::nullopt;
}

// Owns whatever the selected CohFT, observable and DR source need.
struct Setup {
  std::unique_ptr<CohFT> cohft;
  std::unique_ptr<Observable> obs;
  std::unique_ptr<CorrelatorTable> dr_table;
  std::unique_ptr<DRSource> dr;
  std::string provenance = "builtin";

  Setup(const std::string& cohft_sel, const std::string& obs_sel, const std::string& dr_path) {
    if (cohft_sel == "trivial") {
      cohft = std::make_unique<TrivialCohFT>();
    } else if (auto p = table_arg(cohft_sel)) {
      cohft = std::make_unique<TableCohFT>(load_table(*p, TableKind::CohftPsi));
      provenance = "table " + *p;
    } else {
      throw Usage("--cohft must be trivial or table:PATH");
    }
    if (!dr_path.empty()) dr_table = std::make_unique<CorrelatorTable>(load_table(dr_path, TableKind::DrD));
    dr = std::make_unique<DRSource>(*cohft, dr_table.get());
    if (obs_sel == "psi") {
      obs = std::make_unique<PsiObservable>();
    } else if (obs_sel == "A") {
      obs = std::make_unique<AObservable>(dr_table.get());
    } else if (auto p = table_arg(obs_sel)) {
      obs = std::make_unique<TableObservable>(load_table(*p, TableKind::ObsO));
    } else {
      throw Usage("--obs must be psi, A or table:PATH");
    }
  }
  AssemblyContext ctx() const { return {*obs, *cohft, dr.get()}; }
};

struct Global {
  std::uint64_t seed = 0;
  int workers = 1;
  std::string out;
  std::string cohft = "trivial";
  std::string obs = "psi";
  std::string dr_table;
};

void emit(const Global& gl, const json& report, const std::vector<std::string>& text, bool json_default) {
  if (!gl.out.empty()) {
    std::ofstream f(gl.out);
    if (!f) throw Usage("cannot write " + gl.out);
    f << report.dump(2) << "\n";
  }
  if (json_default && gl.out.empty()) {
    std::cout << report.dump(2) << "\n";
  } else {
    for (const auto& l : text) std::cout << l << "\n";
  }
}

std::string describe_psi(int g, const std::vector<int>& psi) {
  std::ostringstream s;
  s << "<";
  for (std::size_t i = 0; i < psi.size(); ++i) s << (i ? " " : "") << "tau_" << psi[i];
  s << ">_" << g;
  return s.str();
}

// ---- correlator

int cmd_correlator(const Global& gl, int g, const std::vector<int>& psi, std::vector<int> fields) {
  int n = static_cast<int>(psi.size());
  if (g < 0 || 2 * g - 2 + n <= 0) throw Usage("unstable key: 2g-2+n must be positive");
  if (fields.empty()) fields.assign(n, 1);
  if (static_cast<int>(fields.size()) != n) throw Usage("--fields and --psi need the same length");
  for (int d : psi)
    if (d < 0) throw Usage("negative psi exponent");
  Setup s(gl.cohft, gl.obs, gl.dr_table);
  for (int a : fields)
    if (a < 1 || a > s.cohft->N()) throw Usage("field index out of range 1.." + std::to_string(s.cohft->N()));
  Rational v = s.cohft->correlator(g, fields, psi);
  json rep = {{"command", "correlator"}, {"g", g},        {"psi", psi}, {"fields", fields},
              {"value", to_string(v)},   {"provenance", s.provenance}};
  emit(gl, rep, {to_string(v), describe_psi(g, psi) + " provenance: " + s.provenance}, false);
  return 0;
}

// ---- check

int cmd_check(const Global& gl, const std::string& relation, const std::string& gs, const std::string& ns,
              std::string ms, bool strong, int samples, int eps) {
  json rep = {{"command", "check"}, {"relation", relation}};
  bool pass = true;
  std::vector<std::string> text;

  if (relation == "pi-dilaton") {
    Range g = parse_range(gs.empty() ? "0..5" : gs), n = parse_range(ns.empty() ? "1..6" : ns),
          m = parse_range(ms.empty() ? "1..8" : ms);
    if (m.lo != 1 && m.lo != m.hi) throw Usage("pi-dilaton checks every m from 1; use --m 1..M");
    PiOptions opt;
    opt.workers = gl.workers;
    PiReport total;
    for (int gg = g.lo; gg <= g.hi; ++gg)
      for (int nn = std::max(1, n.lo); nn <= n.hi; ++nn)
        if (2 * gg - 2 + nn > 0) total.merge(verify_dilaton_identities(gg, nn, m.hi, opt));
    rep["report"] = total.to_json();
    pass = total.pass();
    text.push_back("pi-dilaton: " + std::string(pass ? "PASS" : "FAIL") + " (" + std::to_string(total.checked) +
                   " checks, " + std::to_string(total.failures.size()) + " failures)");
  } else if (relation == "algebra") {
    AlgebraReport a = check_algebra_properties(gl.seed, samples, eps, gl.workers);
    rep["report"] = a.to_json();
    pass = a.pass();
    text.push_back("algebra: " + std::string(pass ? "PASS" : "FAIL") + " (" + std::to_string(a.checks) + " checks)");
  } else {
    int m_default_lo = 1, m_default_hi = 1;
    if (relation == "lrt1") {
    } else if (relation == "lrt2") {
      m_default_lo = m_default_hi = 2;
    } else if (relation == "lrtm") {
      m_default_lo = 2, m_default_hi = 3;
    } else if (relation == "master" || relation == "gmaster") {
      m_default_hi = 2;
    } else {
      throw Usage("unknown relation '" + relation + "'");
    }
    if ((relation == "lrt1" || relation == "lrt2") && !ms.empty()) throw Usage("--m is fixed for " + relation);
    Range g = parse_range(gs.empty() ? "0..1" : gs), n = parse_range(ns.empty() ? "1..3" : ns);
    Range m = ms.empty() ? Range{m_default_lo, m_default_hi} : parse_range(ms);
    Setup s(gl.cohft, gl.obs, gl.dr_table);
    AssemblyContext ctx = s.ctx();
    CheckOptions opt{strong, gl.workers};
    json reports = json::array();
    for (int gg = g.lo; gg <= g.hi; ++gg)
      for (int nn = std::max(1, n.lo); nn <= n.hi; ++nn)
        for (int mm = m.lo; mm <= m.hi; ++mm) {
          if (relation == "lrtm" && mm < 2) throw Usage("lrtm needs m >= 2");
          if (2 * gg - 2 + nn + mm <= 0) continue;
          CheckReport r;
          try {
            if (relation == "master") r = check_master(mm, gg, nn, ctx, opt);
            else if (relation == "gmaster") r = check_geometric_master(mm, gg, nn, ctx, opt);
            else r = check_lrt(mm, gg, nn, ctx, opt);
          } catch (const std::invalid_argument&) {
            continue;  // outside the relation's stable range
          }
          pass = pass && r.pass;
          reports.push_back(r.to_json());
          text.push_back(relation + " (g,n,m) = (" + std::to_string(gg) + "," + std::to_string(nn) + "," +
                         std::to_string(mm) + "): " + (r.pass ? "PASS" : "FAIL") + " (" +
                         std::to_string(r.checked) + " coefficients)");
        }
    rep["reports"] = reports;
    rep["cohft"] = gl.cohft;
    rep["obs"] = gl.obs;
  }
  rep["seed"] = gl.seed;
  rep["pass"] = pass;
  text.push_back("seed: " + std::to_string(gl.seed));
  emit(gl, rep, text, true);
  return pass ? 0 : 1;
}

// ---- hierarchy

std::vector<FlowPair> parse_pairs(const std::string& s) {
  // "b1,p1:b2,p2" with several pairs separated by ';'
  std::vector<FlowPair> out;
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, ';')) {
    FlowPair f;
    char c1, c2, c3;
    std::istringstream is(item);
    if (!(is >> f.beta1 >> c1 >> f.p1 >> c2 >> f.beta2 >> c3 >> f.p2) || c1 != ',' || c2 != ':' || c3 != ',')
      throw Usage("bad --pairs item '" + item + "' (expected b1,p1:b2,p2)");
    out.push_back(f);
  }
  if (out.empty()) throw Usage("--pairs is empty");
  return out;
}

std::vector<std::string> flux_lines(const FluxSet& f) {
  std::vector<std::string> out;
  for (const auto& [k, v] : f.fluxes) {
    auto [a, b, p] = k;
    out.push_back("R^" + std::to_string(a) + "_{" + std::to_string(b) + "," + std::to_string(p) +
                  "} = " + v.to_string(f.stem));
  }
  for (const auto& [k, v] : f.hamiltonians)
    out.push_back("h_{" + std::to_string(k.first) + "," + std::to_string(k.second) + "} = " + v.to_string(f.stem));
  return out;
}

std::vector<std::string> miura_lines(const std::string& label, const MiuraMap& m) {
  std::vector<std::string> out;
  for (int a = 1; a <= m.N(); ++a)
    out.push_back(label + ": u^" + std::to_string(a) + " = " + m.targets[a - 1].to_string());
  return out;
}

json miura_json(const MiuraMap& m) {
  json j = json::array();
  for (const auto& t : m.targets) j.push_back({{"value", t.to_string()}, {"terms", t.to_json()}});
  return j;
}

struct HierOpts {
  int eps = 2;
  int p_max = 2;
  int M = 2;
  int max_fields = 6;
  std::string kind = "R";
  std::string pairs = "1,1:1,2";
  bool no_cross_check = false;
};

int cmd_hierarchy(const Global& gl, const std::string& action, const HierOpts& h) {
  if (h.eps < 0 || h.eps % 2) throw Usage("--eps must be even and >= 0");
  if (h.p_max < 0) throw Usage("--p-max must be >= 0");
  json rep = {{"command", "hierarchy"}, {"action", action}};
  std::vector<std::string> text;
  int code = 0;

  if (action == "kdv") {
    KdvReport r = kdv_demo(gl.workers);
    rep["report"] = r.to_json();
    text = r.lines();
  } else if (action == "hodge") {
    if (h.M < 1) throw Usage("--M must be >= 1");
    HodgeReport r = hodge_demo(h.M);
    rep["report"] = r.to_json();
    text = {r.formatted(), "int_{Mbar_{3,1}} lambda_3 lambda_2 lambda_1 psi_1 = " + to_string(r.chain_value),
            "2|B_4||B_6|/576 = " + to_string(r.bernoulli_value)};
  } else {
    Setup s(gl.cohft, gl.obs, gl.dr_table);
    int p_max = h.p_max;
    std::vector<FlowPair> pairs;
    if (action == "commute") {
      pairs = parse_pairs(h.pairs);
      for (const auto& f : pairs) {
        if (f.beta1 < 1 || f.beta2 < 1 || f.beta1 > s.cohft->N() || f.beta2 > s.cohft->N() || f.p1 < 0 || f.p2 < 0)
          throw Usage("flow index out of range");
        p_max = std::max({p_max, f.p1, f.p2});
      }
    }
    HierarchySpec spec{*s.cohft, *s.obs, s.dr.get(), h.eps, p_max, h.max_fields, gl.workers, !h.no_cross_check};
    rep["cohft"] = gl.cohft;
    rep["obs"] = gl.obs;
    rep["eps"] = h.eps;
    rep["p_max"] = p_max;
    if (action == "build") {
      FluxSet f;
      if (h.kind == "R") f = build_flux_R(spec);
      else if (h.kind == "DR") f = build_flux_DR(spec);
      else throw Usage("--kind must be R or DR");
      rep["fluxes"] = f.to_json();
      text = flux_lines(f);
    } else if (action == "miura") {
      FluxSet R = build_flux_R(spec);
      NormalMiura nm = normal_miura(spec, R);
      MiuraMap od = miura_O_to_DR(spec);
      rep["normal_generator"] = nm.generator.to_string();
      rep["normal"] = miura_json(nm.map);
      rep["o_to_dr"] = miura_json(od);
      text.push_back("normal generator: " + nm.generator.to_string());
      for (auto& l : miura_lines("normal", nm.map)) text.push_back(l);
      for (auto& l : miura_lines("O->DR", od)) text.push_back(l);
      if (s.dr_table) {
        MiuraMap dn = dr_normal_coordinates(spec);
        rep["dr_normal"] = miura_json(dn);
        for (auto& l : miura_lines("DR->normal", dn)) text.push_back(l);
      }
    } else if (action == "commute") {
      FluxSet R = build_flux_R(spec);
      CommutationReport c = check_commutation(R, pairs, h.eps);
      rep["report"] = c.to_json();
      rep["commute"] = c.all_commute();
      text.push_back(std::string("commute: ") + (c.all_commute() ? "true" : "false"));
      code = c.all_commute() ? 0 : 1;
    } else {
      throw Usage("unknown hierarchy action '" + action + "'");
    }
  }
  emit(gl, rep, text, false);
  return code;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"intobs: integrable observables toolkit"};
  app.set_config("--config", "", "TOML/INI file with option defaults (flags override it)");
  app.require_subcommand(1);
  app.fallthrough();
  Global gl;
  app.add_option("--seed", gl.seed, "Seed for randomized checks")->capture_default_str();
  app.add_option("--workers", gl.workers, "Worker threads")->check(CLI::PositiveNumber)->capture_default_str();
  app.add_option("--out", gl.out, "Write the JSON report here");
  app.add_option("--cohft", gl.cohft, "trivial | table:PATH")->capture_default_str();
  app.add_option("--obs", gl.obs, "psi | A | table:PATH")->capture_default_str();
  app.add_option("--dr-table", gl.dr_table, "dr_D table (genus >= 1 D/Q classes)");

  auto* corr = app.add_subcommand("correlator", "Print a psi correlator of the CohFT");
  int cg = 0;
  std::vector<int> cpsi, cfields;
  corr->add_option("--g", cg, "Genus")->required();
  corr->add_option("--psi", cpsi, "Comma-separated psi exponents")->required()->delimiter(',');
  corr->add_option("--fields", cfields, "Comma-separated field indices (default all 1)")->delimiter(',');

  auto* check = app.add_subcommand("check", "Verify a relation over a parameter range");
  std::string relation, gs, ns, ms;
  bool strong = false;
  int samples = 100, eps_prop = 4;
  check->add_option("relation", relation, "lrt1 | lrt2 | lrtm | master | gmaster | pi-dilaton | algebra")
      ->required();
  check->add_option("--g", gs, "Genus range a..b");
  check->add_option("--n", ns, "Marked-point range a..b");
  check->add_option("--m", ms, "Frozen-point range a..b (pi-dilaton: 1..m_max)");
  check->add_flag("--strong", strong, "LRT-2: check every b-monomial");
  check->add_option("--samples", samples, "algebra: number of random samples")->check(CLI::PositiveNumber);
  check->add_option("--eps", eps_prop, "algebra: eps truncation 2G");

  auto* hier = app.add_subcommand("hierarchy", "Build and inspect the hierarchy");
  std::string action;
  HierOpts ho;
  hier->add_option("action", action, "build | kdv | hodge | miura | commute")->required();
  hier->add_option("--eps", ho.eps, "eps truncation 2G")->capture_default_str();
  hier->add_option("--p-max", ho.p_max, "Largest descendant index p")->capture_default_str();
  hier->add_option("--max-fields", ho.max_fields, "Cap on jet factors per monomial")->capture_default_str();
  hier->add_option("--M", ho.M, "hodge: number of x variables")->capture_default_str();
  hier->add_option("--kind", ho.kind, "build: R (observable) or DR")->capture_default_str();
  hier->add_option("--pairs", ho.pairs, "commute: b1,p1:b2,p2[;...]")->capture_default_str();
  hier->add_flag("--no-cross-check", ho.no_cross_check, "Skip the tau-function cross-check of the fluxes");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 2;
  }

  try {
    if (*corr) return cmd_correlator(gl, cg, cpsi, cfields);
    if (*check) return cmd_check(gl, relation, gs, ns, ms, strong, samples, eps_prop);
    if (*hier) return cmd_hierarchy(gl, action, ho);
  } catch (const Usage& e) {
    std::cerr << "usage error: " << e.what() << "\n";
    return 2;
  } catch (const MissingCorrelator& e) {
    std::cerr << "missing data: " << e.what() << "\n";
    return 2;
  } catch (const TableError& e) {
    std::cerr << "table error: " << e.what() << "\n";
    return 2;
  } catch (const FluxMismatch& e) {
    std::cerr << "flux mismatch: " << e.what() << "\n";
    return 1;
  } catch (const std::invalid_argument& e) {
    std::cerr << "usage error: " << e.what() << "\n";
    return 2;
  }
  return 2;
}
