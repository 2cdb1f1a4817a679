#pragma once

#include <algorithm>
#include <cmath>
#include <random>
#include <vector>

#include "hybrid/observable.hpp"
#include "hybrid/weyl.hpp"

namespace hybrid::testutil {

inline Word random_word(std::mt19937& rng, int max_mode, int max_len) {
  std::uniform_int_distribution<int> len_dist(0, max_len);
  std::uniform_int_distribution<int> gen_dist(1, 2 * max_mode);
  std::vector<GeneratorId> f;
  const int len = len_dist(rng);
  f.reserve(len);
  for (int i = 0; i < len; ++i) f.emplace_back(gen_dist(rng));
  return Word(std::move(f));
}

inline Complex random_coeff(std::mt19937& rng) {
  std::uniform_real_distribution<double> dist(-2.0, 2.0);
  return {dist(rng), dist(rng)};
}

inline OperatorPolynomial random_poly(std::mt19937& rng, double hbar,
                                      int max_mode, int max_len,
                                      int n_terms) {
  OperatorPolynomial p(hbar);
  for (int i = 0; i < n_terms; ++i) {
    p += OperatorPolynomial::monomial(random_coeff(rng),
                                      random_word(rng, max_mode, max_len),
                                      hbar);
  }
  return p;
}

// Definition-level symmetrization: the plain average over every
// permutation of the factors. Used as an oracle for the production code.
inline OperatorPolynomial symmetrize_bruteforce(const Word& w, double hbar) {
  std::vector<GeneratorId> f(w.begin(), w.end());
  std::sort(f.begin(), f.end());
  OperatorPolynomial sum(hbar);
  std::size_t count = 0;
  do {
    sum += normal_order(Word(f), hbar);
    ++count;
  } while (std::next_permutation(f.begin(), f.end()));
  // Each distinct arrangement occurs with equal multiplicity in the full
  // permutation average, so averaging distinct arrangements is identical.
  sum *= Complex{1.0 / static_cast<double>(count), 0.0};
  return sum;
}

// One classical oscillator (q, x) bilinearly coupled to one quantum
// oscillator through its position: H = (x^2 + q^2)/2 + k x Q. The classical
// momentum is named x throughout, matching the sign convention q_dot = +x.
inline HybridObservable coupled_hamiltonian(double k, double hbar) {
  auto q = HybridObservable::classical_generator(1, 1, hbar);
  auto x = HybridObservable::classical_generator(1, 2, hbar);
  auto Q = HybridObservable::quantum(
      1, hbar, OperatorPolynomial::generator(GeneratorId::position(2), hbar));
  return Complex{0.5, 0.0} * ordinary_product(x, x) +
         Complex{0.5, 0.0} * ordinary_product(q, q) +
         Complex{k, 0.0} * ordinary_product(x, Q);
}

// Closed-form Heisenberg evolution of the four canonical observables of
// the coupled system. Solved from the linear equations of motion
// q_dot = x + kQ, x_dot = -q, Q_dot = 0, P_dot = -k x(t); the P line fixes
// its integration constant so that P(0) = P.
inline HybridObservable closed_form_evolved(char which, double k, double t,
                                            double hbar) {
  auto q = HybridObservable::classical_generator(1, 1, hbar);
  auto x = HybridObservable::classical_generator(1, 2, hbar);
  auto Q = HybridObservable::quantum(
      1, hbar, OperatorPolynomial::generator(GeneratorId::position(2), hbar));
  auto P = HybridObservable::quantum(
      1, hbar, OperatorPolynomial::generator(GeneratorId::momentum(2), hbar));
  const double c = std::cos(t);
  const double s = std::sin(t);
  auto real = [](double v) { return Complex{v, 0.0}; };
  switch (which) {
    case 'q':
      return real(c) * q + real(s) * x + real(k * s) * Q;
    case 'x':
      return real(-s) * q + real(c) * x + real(k * (c - 1.0)) * Q;
    case 'Q':
      return Q;
    case 'P':
      return P + real(-k * (c - 1.0)) * q + real(-k * s) * x +
             real(-k * k * (s - t)) * Q;
    default:
      throw std::invalid_argument("unknown observable tag");
  }
}

}  // namespace hybrid::testutil
