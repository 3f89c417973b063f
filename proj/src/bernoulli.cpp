#include "iobs/bernoulli.hpp"

#include <memory>
#include <stdexcept>

namespace iobs {

BernoulliCache::BernoulliCache(int max_m) : max_m_(max_m) {
  if (max_m < 0) throw std::invalid_argument("BernoulliCache bound");
  numbers_.resize(max_m + 1);
  numbers_[0] = 1;
  // sum_{j=0}^{m} C(m+1, j) B_j = 0
  for (int m = 1; m <= max_m; ++m) {
    Rational s = 0;
    for (int j = 0; j < m; ++j) s += Rational(binomial(m + 1, j)) * numbers_[j];
    numbers_[m] = -s / Rational(m + 1);
  }
  polys_.resize(max_m + 1);
  for (int m = 0; m <= max_m; ++m) {
    polys_[m].assign(m + 1, 0);
    for (int k = 0; k <= m; ++k) polys_[m][m - k] = Rational(binomial(m, k)) * numbers_[k];
  }
}

const Rational& BernoulliCache::number(int m) const {
  if (m < 0 || m > max_m_) throw std::out_of_range("Bernoulli index beyond cache bound");
  return numbers_[m];
}

const std::vector<Rational>& BernoulliCache::poly(int m) const {
  if (m < 0 || m > max_m_) throw std::out_of_range("Bernoulli index beyond cache bound");
  return polys_[m];
}

const BernoulliCache& BernoulliCache::global() {
  static const BernoulliCache cache(32);
  return cache;
}

namespace {
const BernoulliCache& cache_for(int m) {
  if (m < 0) throw std::invalid_argument("Bernoulli index must be nonnegative");
  const BernoulliCache& g = BernoulliCache::global();
  if (m <= g.bound()) return g;
  // Rare: build a private larger table; kept alive for the process.
  static thread_local std::unique_ptr<BernoulliCache> big;
  if (!big || big->bound() < m) big = std::make_unique<BernoulliCache>(m);
  return *big;
}
}  // namespace

Rational bernoulli_number(int m) { return cache_for(m).number(m); }

std::vector<Rational> bernoulli_poly_coeffs(int m) { return cache_for(m).poly(m); }

Rational bernoulli_poly(int m, const Rational& x) {
  const auto& c = cache_for(m).poly(m);
  Rational r = 0;
  for (int k = m; k >= 0; --k) r = r * x + c[k];
  return r;
}

MultiPoly bernoulli_poly(int m, const MultiPoly& x) {
  const auto& c = cache_for(m).poly(m);
  MultiPoly r = MultiPoly::constant(x.var_list(), 0);
  for (int k = m; k >= 0; --k) r = r * x + MultiPoly::constant(x.var_list(), c[k]);
  return r;
}

}  // namespace iobs
