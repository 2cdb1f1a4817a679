#pragma once

#include <optional>
#include <stdexcept>
#include <string>

#include "hybrid/observable.hpp"

namespace hybrid {

struct EvolutionConfig {
  double time = 0.0;
  int max_order = 1;
  // Optional cutoff on classical monomial degree; dropped weight is
  // reported, not silently lost.
  std::optional<int> degree_cap;
  // When positive, a final series term larger than this aborts the
  // evolution instead of returning a poorly converged result.
  double tail_tolerance = 0.0;

  void validate() const;
};

struct EvolutionResult {
  HybridObservable value;
  // Coefficient norm of the last retained series term.
  double tail_norm = 0.0;
  // Total coefficient norm removed by degree_cap across all orders.
  double discarded_norm = 0.0;
};

class ConvergenceError : public std::runtime_error {
 public:
  ConvergenceError(const std::string& what, double tail_norm)
      : std::runtime_error(what), tail_norm_(tail_norm) {}
  double tail_norm() const { return tail_norm_; }

 private:
  double tail_norm_;
};

// Heisenberg-picture evolution of a under the Hamiltonian h: the nested
// bracket series sum_n (1/n!) (it/hbar)^n [[h, [[h, ... [[h, a]]...]].
// h must be Hermitian.
EvolutionResult evolve_series(const HybridObservable& a,
                              const HybridObservable& h,
                              const EvolutionConfig& cfg);

// Star exponential sum_n (1/n!) (-it/hbar)^n h^(star n); the power-series
// solution of i hbar dU/dt = h * U with U(0) = 1.
EvolutionResult propagator_series(const HybridObservable& h,
                                  const EvolutionConfig& cfg);

// star(dagger(u), star(a, u)).
HybridObservable conjugate_by(const HybridObservable& u,
                              const HybridObservable& a);

// Coefficient norm of the canonicality defect of conjugation by u on the
// pair (a, b): conjugating the bracket versus bracketing the conjugates.
double check_canonical(const HybridObservable& u, const HybridObservable& a,
                       const HybridObservable& b);

}  // namespace hybrid
