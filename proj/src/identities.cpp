#include "hybrid/identities.hpp"

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <map>
#include <random>
#include <stdexcept>
#include <utility>
#include <vector>

#include "hybrid/maps.hpp"
#include "hybrid/observable.hpp"
#include "hybrid/weyl.hpp"

namespace hybrid {
namespace {

using Rng = std::mt19937;

Complex random_coeff(Rng& rng) {
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  const double re = u(rng);
  const double im = u(rng);
  return {re, im};
}

ClassicalMultiIndex random_index(Rng& rng, int max_degree) {
  std::uniform_int_distribution<int> dq(0, max_degree);
  const int eq = dq(rng);
  std::uniform_int_distribution<int> dp(0, max_degree - eq);
  const int ep = dp(rng);
  return ClassicalMultiIndex({eq, ep});
}

Word random_quantum_word(Rng& rng, int max_len) {
  std::uniform_int_distribution<int> len(0, max_len);
  std::uniform_int_distribution<int> pick(0, 1);
  std::vector<GeneratorId> gens;
  const int n = len(rng);
  for (int i = 0; i < n; ++i) {
    gens.push_back(pick(rng) == 0 ? GeneratorId::position(2)
                                  : GeneratorId::momentum(2));
  }
  return Word(std::move(gens));
}

int random_term_count(Rng& rng) {
  std::uniform_int_distribution<int> n(1, 3);
  return n(rng);
}

HybridObservable random_hybrid(Rng& rng) {
  HybridObservable h(1, 1.0);
  const int n = random_term_count(rng);
  for (int t = 0; t < n; ++t) {
    const Complex c = random_coeff(rng);
    const Word w = random_quantum_word(rng, 2);
    h.add_term(random_index(rng, 3), OperatorPolynomial::monomial(c, w));
  }
  return h;
}

HybridObservable random_classical_only(Rng& rng) {
  HybridObservable h(1, 1.0);
  const int n = random_term_count(rng);
  for (int t = 0; t < n; ++t) {
    const Complex c = random_coeff(rng);
    h.add_term(random_index(rng, 3), c * OperatorPolynomial::identity());
  }
  return h;
}

OperatorPolynomial random_quantum_op(Rng& rng) {
  OperatorPolynomial op(1.0);
  const int n = random_term_count(rng);
  for (int t = 0; t < n; ++t) {
    const Complex c = random_coeff(rng);
    op += OperatorPolynomial::monomial(c, random_quantum_word(rng, 2));
  }
  return op;
}

// Word over both modes, at most three classical and two quantum factors in
// random interleaving.
OperatorPolynomial random_mixed_op(Rng& rng) {
  OperatorPolynomial op(1.0);
  std::uniform_int_distribution<int> nc(0, 3);
  std::uniform_int_distribution<int> nq(0, 2);
  std::uniform_int_distribution<int> pick(0, 1);
  const int n = random_term_count(rng);
  for (int t = 0; t < n; ++t) {
    const Complex c = random_coeff(rng);
    std::vector<GeneratorId> gens;
    const int classical = nc(rng);
    const int quantum = nq(rng);
    for (int i = 0; i < classical; ++i) {
      gens.push_back(pick(rng) == 0 ? GeneratorId::position(1)
                                    : GeneratorId::momentum(1));
    }
    for (int i = 0; i < quantum; ++i) {
      gens.push_back(pick(rng) == 0 ? GeneratorId::position(2)
                                    : GeneratorId::momentum(2));
    }
    std::shuffle(gens.begin(), gens.end(), rng);
    op += OperatorPolynomial::monomial(c, Word(std::move(gens)));
  }
  return op;
}

// Plain commutative polynomial in one (q, p) pair, keyed by exponents. Kept
// separate from the library types so the Moyal check has a second, directly
// written evaluation path.
using ScalarPoly = std::map<std::pair<int, int>, Complex>;

ScalarPoly scalar_derivative(const ScalarPoly& a, int dq, int dp) {
  ScalarPoly out;
  for (const auto& [e, c] : a) {
    if (e.first < dq || e.second < dp) continue;
    double factor = 1.0;
    for (int k = 0; k < dq; ++k) factor *= e.first - k;
    for (int k = 0; k < dp; ++k) factor *= e.second - k;
    out[{e.first - dq, e.second - dp}] += factor * c;
  }
  return out;
}

ScalarPoly scalar_product(const ScalarPoly& a, const ScalarPoly& b) {
  ScalarPoly out;
  for (const auto& [ea, ca] : a) {
    for (const auto& [eb, cb] : b) {
      out[{ea.first + eb.first, ea.second + eb.second}] += ca * cb;
    }
  }
  return out;
}

int scalar_degree(const ScalarPoly& a) {
  int deg = 0;
  for (const auto& [e, c] : a) deg = std::max(deg, e.first + e.second);
  return deg;
}

// a exp((i hbar / 2)(d_q d_p - d_p d_q)) b expanded order by order:
// sum_n (i hbar / 2)^n / n! sum_k C(n,k) (-1)^k (d_q^{n-k} d_p^k a)
// (d_p^{n-k} d_q^k b). The series stops once either factor runs out of
// degree.
ScalarPoly scalar_star(const ScalarPoly& a, const ScalarPoly& b,
                       double hbar) {
  ScalarPoly out;
  const int max_order = std::min(scalar_degree(a), scalar_degree(b));
  Complex scale(1.0, 0.0);
  for (int n = 0; n <= max_order; ++n) {
    double binom = 1.0;
    for (int k = 0; k <= n; ++k) {
      const double sign = k % 2 == 0 ? 1.0 : -1.0;
      const ScalarPoly da = scalar_derivative(a, n - k, k);
      const ScalarPoly db = scalar_derivative(b, k, n - k);
      for (const auto& [e, c] : scalar_product(da, db)) {
        out[e] += scale * (sign * binom) * c;
      }
      binom = binom * (n - k) / (k + 1);
    }
    scale *= Complex(0.0, hbar / 2.0) / static_cast<double>(n + 1);
  }
  return out;
}

ScalarPoly scalar_moyal_bracket(const ScalarPoly& a, const ScalarPoly& b,
                                double hbar) {
  ScalarPoly out = scalar_star(a, b, hbar);
  for (const auto& [e, c] : scalar_star(b, a, hbar)) out[e] -= c;
  return out;
}

// Collapses an observable whose coefficients are multiples of the identity
// into a ScalarPoly; any stray non-identity coefficient mass is returned so
// it can be counted against the residual.
std::pair<ScalarPoly, double> scalarize(const HybridObservable& h) {
  ScalarPoly out;
  double stray = 0.0;
  for (const auto& [idx, op] : h.terms()) {
    for (const auto& [w, c] : op.terms()) {
      if (w.empty()) {
        out[{idx[0], idx[1]}] += c;
      } else {
        stray += std::abs(c);
      }
    }
  }
  return {out, stray};
}

double scalar_distance(const ScalarPoly& a, const ScalarPoly& b) {
  ScalarPoly diff = a;
  for (const auto& [e, c] : b) diff[e] -= c;
  double sum = 0.0;
  for (const auto& [e, c] : diff) sum += std::norm(c);
  return std::sqrt(sum);
}

}  // namespace

IdentityReport run_identity_checks(unsigned seed, int trials) {
  if (trials < 1) {
    throw std::invalid_argument("run_identity_checks: trials must be >= 1");
  }

  struct Law {
    const char* name;
    double threshold;
  };
  const std::vector<Law> laws = {
      {"star associativity", 1e-12},
      {"star two-sided identity", 1e-12},
      {"star distributivity", 1e-12},
      {"bracket antisymmetry", 1e-12},
      {"bracket linearity", 1e-12},
      {"bracket jacobi", 1e-10},
      {"product isomorphism", 1e-10},
      {"bracket isomorphism", 1e-10},
      {"dagger anti-homomorphism", 1e-12},
      {"moyal reduction", 1e-12},
      {"commutator reduction", 1e-12},
  };

  std::vector<double> worst(laws.size(), 0.0);
  const HybridObservable one = HybridObservable::identity(1, 1.0);
  Rng rng(seed);

  for (int trial = 0; trial < trials; ++trial) {
    const HybridObservable a = random_hybrid(rng);
    const HybridObservable b = random_hybrid(rng);
    const HybridObservable c = random_hybrid(rng);
    const Complex alpha = random_coeff(rng);
    const OperatorPolynomial oa = random_mixed_op(rng);
    const OperatorPolynomial ob = random_mixed_op(rng);
    const HybridObservable ca = random_classical_only(rng);
    const HybridObservable cb = random_classical_only(rng);
    const OperatorPolynomial qa = random_quantum_op(rng);
    const OperatorPolynomial qb = random_quantum_op(rng);

    std::size_t law = 0;
    auto record = [&](double residual) {
      worst[law] = std::max(worst[law], residual);
      ++law;
    };

    record(coefficient_norm(star(star(a, b), c) - star(a, star(b, c))));
    record(std::max(coefficient_norm(star(one, a) - a),
                    coefficient_norm(star(a, one) - a)));
    record(
        std::max(coefficient_norm(star(a, b + c) - star(a, b) - star(a, c)),
                 coefficient_norm(star(a + b, c) - star(a, c) - star(b, c))));
    record(coefficient_norm(bracket(a, b) + bracket(b, a)));
    record(coefficient_norm(bracket(a, alpha * b + c) -
                            alpha * bracket(a, b) - bracket(a, c)));
    record(coefficient_norm(bracket(a, bracket(b, c)) +
                            bracket(b, bracket(c, a)) +
                            bracket(c, bracket(a, b))));
    record(coefficient_norm(dequantize_hq(multiply(oa, ob), 1) -
                            star(dequantize_hq(oa, 1), dequantize_hq(ob, 1))));
    record(coefficient_norm(
        dequantize_hq(commutator(oa, ob), 1) -
        bracket(dequantize_hq(oa, 1), dequantize_hq(ob, 1))));
    record(coefficient_norm(dagger(star(a, b)) -
                            star(dagger(b), dagger(a))));
    {
      const auto [sa, stray_a] = scalarize(ca);
      const auto [sb, stray_b] = scalarize(cb);
      const auto [sab, stray_ab] = scalarize(bracket(ca, cb));
      const ScalarPoly ref = scalar_moyal_bracket(sa, sb, 1.0);
      record(scalar_distance(sab, ref) + stray_a + stray_b + stray_ab);
    }
    record(coefficient_norm(
        bracket(HybridObservable::quantum(1, 1.0, qa),
                HybridObservable::quantum(1, 1.0, qb)) -
        HybridObservable::quantum(1, 1.0, commutator(qa, qb))));
  }

  IdentityReport report;
  report.trials = trials;
  report.seed = seed;
  report.pass = true;
  for (std::size_t i = 0; i < laws.size(); ++i) {
    const bool ok = worst[i] <= laws[i].threshold;
    report.checks.push_back({laws[i].name, worst[i], laws[i].threshold, ok});
    report.pass = report.pass && ok;
  }
  return report;
}

}  // namespace hybrid
