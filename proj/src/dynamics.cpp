#include "hybrid/dynamics.hpp"

#include <cmath>
#include <utility>

namespace hybrid {

namespace {

void require_hermitian(const HybridObservable& h) {
  const double scale = std::max(1.0, coefficient_norm(h));
  if (coefficient_norm(h - dagger(h)) > 1e-10 * scale) {
    throw std::invalid_argument("hamiltonian is not Hermitian");
  }
}

// Removes classical monomials above the degree cap, returning the
// coefficient norm of what was dropped.
double apply_degree_cap(HybridObservable& a, const std::optional<int>& cap) {
  if (!cap) return 0.0;
  HybridObservable kept(a.n_classical(), a.hbar());
  HybridObservable dropped(a.n_classical(), a.hbar());
  for (const auto& [idx, op] : a.terms()) {
    (idx.degree() <= *cap ? kept : dropped).add_term(idx, op);
  }
  const double lost = coefficient_norm(dropped);
  a = std::move(kept);
  return lost;
}

}  // namespace

void EvolutionConfig::validate() const {
  if (max_order < 1) {
    throw std::invalid_argument("max_order must be >= 1");
  }
  if (tail_tolerance < 0.0) {
    throw std::invalid_argument("tail_tolerance must be non-negative");
  }
  if (degree_cap && *degree_cap < 0) {
    throw std::invalid_argument("degree_cap must be non-negative");
  }
  if (!std::isfinite(time)) {
    throw std::invalid_argument("time must be finite");
  }
}

EvolutionResult evolve_series(const HybridObservable& a,
                              const HybridObservable& h,
                              const EvolutionConfig& cfg) {
  cfg.validate();
  require_hermitian(h);

  EvolutionResult out{a, 0.0, 0.0};
  out.discarded_norm += apply_degree_cap(out.value, cfg.degree_cap);
  HybridObservable term = out.value;
  const Complex it_over_hbar{0.0, cfg.time / a.hbar()};
  for (int n = 1; n <= cfg.max_order; ++n) {
    term = bracket(h, term);
    term *= it_over_hbar / static_cast<double>(n);
    out.discarded_norm += apply_degree_cap(term, cfg.degree_cap);
    out.value += term;
    if (term.is_zero()) break;
  }
  out.tail_norm = coefficient_norm(term);
  if (cfg.tail_tolerance > 0.0 && out.tail_norm > cfg.tail_tolerance) {
    throw ConvergenceError(
        "evolution series tail norm " + std::to_string(out.tail_norm) +
            " exceeds tolerance " + std::to_string(cfg.tail_tolerance) +
            " at order " + std::to_string(cfg.max_order),
        out.tail_norm);
  }
  return out;
}

EvolutionResult propagator_series(const HybridObservable& h,
                                  const EvolutionConfig& cfg) {
  cfg.validate();
  require_hermitian(h);

  EvolutionResult out{HybridObservable::identity(h.n_classical(), h.hbar()),
                      0.0, 0.0};
  HybridObservable term = out.value;
  const Complex step{0.0, -cfg.time / h.hbar()};
  for (int n = 1; n <= cfg.max_order; ++n) {
    term = star(h, term);
    term *= step / static_cast<double>(n);
    out.discarded_norm += apply_degree_cap(term, cfg.degree_cap);
    out.value += term;
    if (term.is_zero()) break;
  }
  out.tail_norm = coefficient_norm(term);
  if (cfg.tail_tolerance > 0.0 && out.tail_norm > cfg.tail_tolerance) {
    throw ConvergenceError(
        "propagator series tail norm " + std::to_string(out.tail_norm) +
            " exceeds tolerance " + std::to_string(cfg.tail_tolerance) +
            " at order " + std::to_string(cfg.max_order),
        out.tail_norm);
  }
  return out;
}

HybridObservable conjugate_by(const HybridObservable& u,
                              const HybridObservable& a) {
  return star(dagger(u), star(a, u));
}

double check_canonical(const HybridObservable& u, const HybridObservable& a,
                       const HybridObservable& b) {
  HybridObservable lhs = conjugate_by(u, bracket(a, b));
  HybridObservable rhs = bracket(conjugate_by(u, a), conjugate_by(u, b));
  return coefficient_norm(lhs - rhs);
}

}  // namespace hybrid
