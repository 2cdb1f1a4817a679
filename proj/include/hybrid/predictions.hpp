#pragma once

#include <Eigen/Dense>
#include <utility>
#include <vector>

#include "hybrid/classicality.hpp"
#include "hybrid/observable.hpp"

namespace hybrid {

// Eigenvalues of an evaluated observable with the squared projections of a
// sector state, degenerate levels merged. Entries ascend in eigenvalue and
// the probabilities sum to one.
struct SpectrumTable {
  std::vector<std::pair<double, double>> entries;
  double degeneracy_tolerance;
};

// Unmerged eigensystem kept around when the eigenvectors themselves are
// needed, e.g. for per-eigenvector spread bounds.
struct HybridEigensystem {
  Eigen::VectorXd eigenvalues;
  Eigen::MatrixXcd eigenvectors;
  Eigen::VectorXd probabilities;
};

// Diagonalizes the matrix of evaluate_classical(b_evolved, centers) on a
// dim-dimensional Fock space and projects phi_q onto the eigenbasis. The
// matrix must be Hermitian within 1e-10 relative; dim must match the state.
HybridEigensystem hybrid_eigensystem(const HybridObservable& b_evolved,
                                     const PhasePoint& centers,
                                     const SectorState& phi_q, int dim);

// Merges eigenvalues whose gap is at most tol times the spectral scale
// max(1, |lambda|_max). The merged eigenvalue is the plain mean of the
// cluster, its probability the sum.
SpectrumTable cluster_spectrum(const HybridEigensystem& eig, double tol);

SpectrumTable hybrid_spectrum(const HybridObservable& b_evolved,
                              const PhasePoint& centers,
                              const SectorState& phi_q, int dim,
                              double tol = 1e-9);

// Closed interval [center - half_width, center + half_width].
struct Interval {
  double center;
  double half_width;

  double lo() const { return center - half_width; }
  double hi() const { return center + half_width; }
  void validate() const;

  friend bool operator==(const Interval&, const Interval&) = default;
};

// Total probability of the eigenvalues inside the closed interval,
// endpoints included.
double interval_probability(const SpectrumTable& s, const Interval& i);

// Additive slack of the two-sided probability bound: (1-p)^(1/4) at first
// order, (1-p)^(3/8)/sqrt(3) at second.
double epsilon_factor(double p, int order);

struct SandwichBounds {
  double lower;
  double upper;
  double lower_raw;
  double upper_raw;
};

// Two-sided bound on the full-quantum probability of measuring inside i0,
// assembled from the probabilities of a narrowed interval (half-width
// shrunk by 2 delta) and a widened one (grown by 2 delta). Requires
// half_width > 2 delta. lower/upper are clamped to [0, 1]; the raw fields
// keep the unclamped values.
SandwichBounds sandwich_bounds(const SpectrumTable& s, const Interval& i0,
                               double delta, double p, int order);

}  // namespace hybrid
