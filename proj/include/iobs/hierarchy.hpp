#pragma once

#include <map>
#include <string>
#include <tuple>
#include <vector>

#include <json.hpp>

#include "iobs/diffpoly.hpp"
#include "iobs/multipoly.hpp"
#include "iobs/trees.hpp"

namespace iobs {

struct HierarchySpec {
  const CohFT& cohft;
  const Observable& obs;
  const DRSource* dr = nullptr;
  int eps_max = 2;     // 2G
  int p_max = 2;
  int max_fields = 6;  // cap on the number of jet factors per monomial
  int workers = 1;
  bool cross_check = true;  // build_flux_R: also match against the tau function

  AssemblyContext context() const { return {obs, cohft, dr}; }
};

// Fluxes keyed by (alpha, beta, p) and Hamiltonian densities keyed by (beta, p).
struct FluxSet {
  std::string stem = "w";
  int N = 1;
  int eps_max = 0;
  int p_max = 0;
  std::map<std::tuple<int, int, int>, DiffPoly> fluxes;
  std::map<std::pair<int, int>, DiffPoly> hamiltonians;

  const DiffPoly& flux(int alpha, int beta, int p) const;
  // (R^1_{beta,p}, ..., R^N_{beta,p})
  std::vector<DiffPoly> flow(int beta, int p) const;
  nlohmann::json to_json() const;
};

struct TauData {
  int N = 1;
  FormalSeries F;
  std::vector<FormalSeries> w_top;  // eta^{a mu} d_{t^{1,0}} d_{t^{mu,0}} F
};

// F = sum eps^{2g}/n! int pc Coeff O prod t, up to t-degree tdeg.
TauData build_tau(const HierarchySpec& spec, int tdeg);
// X^alpha of the F-CohFT canonically attached to spec.cohft; w_top^alpha = d_{t^{1,0}} X^alpha.
std::vector<FormalSeries> build_vector_potential(const HierarchySpec& spec, int tdeg);

// Coefficient-wise residuals of the string and dilaton equations (the t-constant term
// of the dilaton equation is excluded). Empty when they hold.
std::vector<std::string> check_string_dilaton(const TauData& tau, const Matrix& eta);
// w_top^{a,d} - t^{a,d} - [a=1,d=1] has no coefficient with one time or with sum k <= d at eps^0.
bool check_triangularity(const TauData& tau, int dmax);

class FluxMismatch : public std::runtime_error {
 public:
  explicit FluxMismatch(const std::string& what) : std::runtime_error(what) {}
};

// O-hierarchy fluxes and densities from integrated B^2. With cross_check, also
// reconstructs every flux from the tau function and throws FluxMismatch on disagreement.
FluxSet build_flux_R(const HierarchySpec& spec);
// Same fluxes, only through match_diffpoly on the tau function.
FluxSet match_flux_R(const HierarchySpec& spec, int tdeg);
// DR fluxes Q^a_{b,p} and h_{b,p} = eta_{1 mu} Q^mu_{b,p+1} (needs spec.dr).
FluxSet build_flux_DR(const HierarchySpec& spec);

// u = w - d_x R^a, R^a from Coeff_{b_1^0} of integrated B^1.
MiuraMap miura_O_to_DR(const HierarchySpec& spec);
// u_norm from the natural DR coordinates u.
MiuraMap dr_normal_coordinates(const HierarchySpec& spec);

struct NormalMiura {
  DiffPoly generator;  // R from integrated B^0, deg_dx = -2
  MiuraMap map;        // u_norm = w - eta^{a mu} d_x(d_{w^{z,k}} R * d_x^{k+1} R^z_{mu,0})
};
NormalMiura normal_miura(const HierarchySpec& spec, const FluxSet& fluxes);

// New fluxes after the change of variables u = m(w): d_t u = flow_derivative(m(w), R).
// Returns the residual d_t u^a - d_x(Q^a(u(w))) per alpha, truncated at eps_max.
std::vector<DiffPoly> miura_flux_residual(const MiuraMap& m, const std::vector<DiffPoly>& R,
                                          const std::vector<DiffPoly>& Q, int eps_max);
// compose(a, b) minus the identity, per alpha.
std::vector<DiffPoly> miura_roundtrip_residual(const MiuraMap& a, const MiuraMap& b);

struct FlowPair {
  int beta1 = 1, p1 = 0, beta2 = 1, p2 = 0;
};

struct CommutationReport {
  struct Entry {
    FlowPair pair;
    bool commute = true;
    std::vector<DiffPoly> residual;
  };
  std::vector<Entry> entries;
  bool all_commute() const;
  nlohmann::json to_json() const;
};

CommutationReport check_commutation(const FluxSet& fluxes, const std::vector<FlowPair>& pairs, int eps_max);
// {h_{b1,p1}, h_{b2,p2}} modulo d_x, with the bracket eta^{-1} d_x.
bool hamiltonians_commute(const FluxSet& fluxes, const FlowPair& pair, const Matrix& eta_inv, int eps_max);

struct KdvReport {
  Rational integral_04;  // int_{Mbar_{0,4}} Coeff_{b_1} B^2_{0,2}
  Rational integral_13;  // int_{Mbar_{1,3}} Coeff_{b_1 a_1^2} B^2_{1,1}
  DiffPoly flux;         // R^1_{1,1}
  DiffPoly evolution;    // d_{t^{1,1}} w^{1,0} = d_x R^1_{1,1}
  std::vector<std::string> lines() const;
  nlohmann::json to_json() const;
};
KdvReport kdv_demo(int workers = 1);

struct HodgeReport {
  int M = 1;
  MultiPoly coefficient;  // of eps^6 w^{1,4} in R, in x_1..x_M
  Rational chain_value;   // int_{Mbar_{3,1}} lambda_3 lambda_2 lambda_1 psi_1
  Rational bernoulli_value;  // 2 |B_4| |B_6| / 576
  std::string formatted() const;  // "(x1^2*x2 + x1*x2^2)/362880"
  nlohmann::json to_json() const;
};
HodgeReport hodge_demo(int M);

// e^alpha(fc_{g,n}(e_fields)) paired with psi_0^{psi0} prod psi_i^{psi_i} on Mbar_{g,n+1}.
class FCohFTView {
 public:
  explicit FCohFTView(const CohFT& pc) : pc_(pc) {}
  Rational correlator(int g, int alpha, const std::vector<int>& fields, int psi0, const std::vector<int>& psi) const;
  int N() const { return pc_.N(); }

 private:
  const CohFT& pc_;
};

}  // namespace iobs
