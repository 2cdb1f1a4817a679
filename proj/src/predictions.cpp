#include "hybrid/predictions.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

#include "hybrid/fock.hpp"

namespace hybrid {

HybridEigensystem hybrid_eigensystem(const HybridObservable& b_evolved,
                                     const PhasePoint& centers,
                                     const SectorState& phi_q, int dim) {
  if (phi_q.dim() != dim) {
    throw std::invalid_argument("state dimension " +
                                std::to_string(phi_q.dim()) +
                                " does not match requested dimension " +
                                std::to_string(dim));
  }
  const Eigen::MatrixXcd m = to_matrix(evaluate_classical(b_evolved, centers),
                                       dim);
  const double scale = std::max(1.0, m.norm());
  if ((m - m.adjoint()).norm() > 1e-10 * scale) {
    throw std::invalid_argument(
        "evaluated observable is not Hermitian at the given centers");
  }
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> solver(
      (m + m.adjoint()) / 2.0);
  if (solver.info() != Eigen::Success) {
    throw std::runtime_error("eigendecomposition failed");
  }
  HybridEigensystem out;
  out.eigenvalues = solver.eigenvalues();
  out.eigenvectors = solver.eigenvectors();
  out.probabilities =
      (out.eigenvectors.adjoint() * phi_q.amplitudes()).cwiseAbs2();
  return out;
}

SpectrumTable cluster_spectrum(const HybridEigensystem& eig, double tol) {
  if (!(tol >= 0.0)) throw std::invalid_argument("tolerance must be >= 0");
  SpectrumTable table{{}, tol};
  const auto n = eig.eigenvalues.size();
  if (n == 0) return table;
  const double scale =
      std::max(1.0, std::max(std::abs(eig.eigenvalues[0]),
                             std::abs(eig.eigenvalues[n - 1])));
  double sum_value = eig.eigenvalues[0];
  double sum_prob = eig.probabilities[0];
  int count = 1;
  for (Eigen::Index k = 1; k <= n; ++k) {
    if (k < n && eig.eigenvalues[k] - eig.eigenvalues[k - 1] <= tol * scale) {
      sum_value += eig.eigenvalues[k];
      sum_prob += eig.probabilities[k];
      ++count;
      continue;
    }
    table.entries.emplace_back(sum_value / count, sum_prob);
    if (k < n) {
      sum_value = eig.eigenvalues[k];
      sum_prob = eig.probabilities[k];
      count = 1;
    }
  }
  double total = 0.0;
  for (const auto& [value, prob] : table.entries) total += prob;
  if (std::abs(total - 1.0) > 1e-8) {
    throw std::logic_error("spectrum probabilities sum to " +
                           std::to_string(total));
  }
  return table;
}

SpectrumTable hybrid_spectrum(const HybridObservable& b_evolved,
                              const PhasePoint& centers,
                              const SectorState& phi_q, int dim, double tol) {
  return cluster_spectrum(hybrid_eigensystem(b_evolved, centers, phi_q, dim),
                          tol);
}

void Interval::validate() const {
  if (!(half_width > 0.0)) {
    throw std::invalid_argument("interval half-width must be positive");
  }
}

double interval_probability(const SpectrumTable& s, const Interval& i) {
  i.validate();
  double out = 0.0;
  for (const auto& [value, prob] : s.entries) {
    if (value >= i.lo() && value <= i.hi()) out += prob;
  }
  return out;
}

double epsilon_factor(double p, int order) {
  if (!(p >= 0.0 && p < 1.0)) {
    throw std::invalid_argument("confidence level must lie in [0, 1)");
  }
  switch (order) {
    case 1:
      return std::pow(1.0 - p, 0.25);
    case 2:
      return std::pow(1.0 - p, 0.375) / std::sqrt(3.0);
    default:
      throw std::invalid_argument("bound order must be 1 or 2, got " +
                                  std::to_string(order));
  }
}

SandwichBounds sandwich_bounds(const SpectrumTable& s, const Interval& i0,
                               double delta, double p, int order) {
  i0.validate();
  if (!(delta >= 0.0)) throw std::invalid_argument("spread must be >= 0");
  if (!(i0.half_width > 2.0 * delta)) {
    throw std::invalid_argument(
        "interval half-width must exceed twice the spread");
  }
  const double eps = epsilon_factor(p, order);
  const auto clamp01 = [](double v) { return std::clamp(v, 0.0, 1.0); };
  const double in_min =
      interval_probability(s, {i0.center, i0.half_width - 2.0 * delta});
  const double in_max =
      interval_probability(s, {i0.center, i0.half_width + 2.0 * delta});
  const double out_min = clamp01(1.0 - in_min);
  SandwichBounds b;
  const double low_term = std::sqrt(out_min) + eps;
  b.lower_raw = 1.0 - low_term * low_term;
  const double high_term = std::sqrt(clamp01(in_max)) + eps;
  b.upper_raw = high_term * high_term;
  b.lower = clamp01(b.lower_raw);
  b.upper = clamp01(b.upper_raw);
  return b;
}

}  // namespace hybrid
