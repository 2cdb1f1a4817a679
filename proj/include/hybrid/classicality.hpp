#pragma once

#include <Eigen/Dense>
#include <string>
#include <vector>

#include "hybrid/observable.hpp"

namespace hybrid {

// Initial data of the classical sector: central values and strictly
// positive error margins for the 2N fundamental observables, in
// ClassicalMultiIndex slot order (q_1 .. q_N, p_1 .. p_N).
struct ClassicalData {
  std::vector<double> centers;
  std::vector<double> margins;

  int n_classical() const { return static_cast<int>(centers.size()) / 2; }
  void validate() const;

  friend bool operator==(const ClassicalData&, const ClassicalData&) = default;
};

// Wave function of a single sector on a truncated Fock basis.
class SectorState {
 public:
  SectorState(Eigen::VectorXcd amplitudes, double hbar);

  int dim() const { return static_cast<int>(amplitudes_.size()); }
  double hbar() const { return hbar_; }
  const Eigen::VectorXcd& amplitudes() const { return amplitudes_; }

 private:
  Eigen::VectorXcd amplitudes_;
  double hbar_;
};

// Fock amplitudes of the coherent state with alpha = (q0 + i p0)/sqrt(2 hbar),
// renormalized after truncation. Throws if the retained weight falls below
// 1 - 1e-8.
SectorState coherent_state(double center_q, double center_p, int dim,
                           double hbar);

// Ordered run of classical generator indices (1-based), never empty. The
// order matters: the shifted operators are applied in the written order.
struct Sequence {
  std::vector<int> indices;

  // Product of the margins of the participating generators.
  double margin(const ClassicalData& data) const;
  std::string str() const;

  friend auto operator<=>(const Sequence&, const Sequence&) = default;
};

// (O_{i_1} - c_{i_1}) ... (O_{i_n} - c_{i_n}) |state>, unnormalized. The
// matrices act on the single mode the state lives on, so only N = 1 data
// is representable.
Eigen::VectorXcd error_ket(const Sequence& seq, const SectorState& state,
                           const ClassicalData& data);

// Sequences whose mixed classical derivative does not vanish for at least
// one of the given observables. Pass the observables already evolved to
// every time of interest. order 1 returns the sequences themselves; order 2
// returns all pairwise concatenations of the order-1 set.
std::vector<Sequence> relevant_sequences(
    const std::vector<HybridObservable>& observables, int order);

struct SequenceCheck {
  Sequence seq;
  double norm2;
  double bound;
  bool pass;

  friend bool operator==(const SequenceCheck&, const SequenceCheck&) = default;
};

struct ClassicalityReport {
  std::vector<SequenceCheck> checks;
  bool pass;

  friend bool operator==(const ClassicalityReport&,
                         const ClassicalityReport&) = default;
};

// Error-ket norm test <E|E> <= (margin product)^2 for every sequence.
// An empty sequence list passes vacuously.
ClassicalityReport check_classicality(const SectorState& state,
                                      const ClassicalData& data,
                                      const std::vector<Sequence>& seqs);

// First-order spread bound: the margin-weighted sum of the derivative
// norms || dB/dO_i(centers) eigvec ||, divided by (1-p)^(1/(2 order)).
double spread_bound(const HybridObservable& b_evolved,
                    const ClassicalData& data, const Eigen::VectorXcd& eigvec,
                    double p, int order);

// Norm of the first-order term of the error-ket expansion of b_evolved
// around the data centers, with the classical-sector factors realized on
// phi_c and the derivative operators applied to eigvec. Exact whenever the
// classical dependence has degree one.
double first_order_error_norm(const HybridObservable& b_evolved,
                              const ClassicalData& data,
                              const SectorState& phi_c,
                              const Eigen::VectorXcd& eigvec);

}  // namespace hybrid
