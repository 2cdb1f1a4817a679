#include "hybrid/classicality.hpp"

#include <algorithm>
#include <cmath>
#include <set>
#include <sstream>
#include <stdexcept>

#include "hybrid/fock.hpp"

namespace hybrid {

void ClassicalData::validate() const {
  if (centers.empty() || centers.size() % 2 != 0) {
    throw std::invalid_argument(
        "classical data needs a nonempty, even-sized center list, got " +
        std::to_string(centers.size()));
  }
  if (margins.size() != centers.size()) {
    throw std::invalid_argument("margin count " +
                                std::to_string(margins.size()) +
                                " does not match center count " +
                                std::to_string(centers.size()));
  }
  for (double d : margins) {
    if (!(d > 0.0) || !std::isfinite(d)) {
      throw std::invalid_argument("margins must be positive and finite");
    }
  }
}

SectorState::SectorState(Eigen::VectorXcd amplitudes, double hbar)
    : amplitudes_(std::move(amplitudes)), hbar_(hbar) {
  if (amplitudes_.size() < 2) {
    throw std::invalid_argument("sector state needs dimension >= 2");
  }
  if (!(hbar_ > 0.0)) {
    throw std::invalid_argument("hbar must be positive");
  }
  if (std::abs(amplitudes_.norm() - 1.0) > 1e-10) {
    throw std::invalid_argument("sector state must be normalized, norm is " +
                                std::to_string(amplitudes_.norm()));
  }
}

SectorState coherent_state(double center_q, double center_p, int dim,
                           double hbar) {
  if (dim < 2) throw std::invalid_argument("dimension must be >= 2");
  if (!(hbar > 0.0)) throw std::invalid_argument("hbar must be positive");
  const Complex alpha{center_q / std::sqrt(2.0 * hbar),
                      center_p / std::sqrt(2.0 * hbar)};
  Eigen::VectorXcd amps(dim);
  amps[0] = std::exp(-0.5 * std::norm(alpha));
  for (int n = 1; n < dim; ++n) {
    amps[n] = amps[n - 1] * alpha / std::sqrt(static_cast<double>(n));
  }
  const double weight = amps.squaredNorm();
  if (weight < 1.0 - 1e-8) {
    throw std::invalid_argument(
        "coherent state at (" + std::to_string(center_q) + ", " +
        std::to_string(center_p) + ") does not fit in dimension " +
        std::to_string(dim) + "; retained weight " + std::to_string(weight));
  }
  amps /= std::sqrt(weight);
  return SectorState(std::move(amps), hbar);
}

double Sequence::margin(const ClassicalData& data) const {
  double out = 1.0;
  for (int i : indices) {
    out *= data.margins[ClassicalMultiIndex::slot_of_generator(
        i, data.n_classical())];
  }
  return out;
}

std::string Sequence::str() const {
  std::ostringstream out;
  out << "(";
  for (std::size_t k = 0; k < indices.size(); ++k) {
    if (k) out << ", ";
    const int i = indices[k];
    out << (i % 2 == 1 ? "q" : "p") << (i + 1) / 2;
  }
  out << ")";
  return out.str();
}

Eigen::VectorXcd error_ket(const Sequence& seq, const SectorState& state,
                           const ClassicalData& data) {
  data.validate();
  if (data.n_classical() != 1) {
    throw std::invalid_argument(
        "error kets are realized on a single classical mode, data has " +
        std::to_string(data.n_classical()));
  }
  if (seq.indices.empty()) {
    throw std::invalid_argument("sequence must not be empty");
  }
  const int dim = state.dim();
  const Eigen::MatrixXcd q = position_matrix(dim, state.hbar());
  const Eigen::MatrixXcd p = momentum_matrix(dim, state.hbar());
  Eigen::VectorXcd out = state.amplitudes();
  for (auto it = seq.indices.rbegin(); it != seq.indices.rend(); ++it) {
    const auto slot = ClassicalMultiIndex::slot_of_generator(*it, 1);
    const auto& m = *it % 2 == 1 ? q : p;
    out = m * out - data.centers[slot] * out;
  }
  return out;
}

namespace {

// Ordered arrangements of the multiset {generator i with multiplicity m_i},
// inserted into the accumulating set.
void insert_arrangements(const std::vector<int>& multiplicities,
                         int n_classical, std::set<Sequence>& out) {
  std::vector<int> base;
  for (std::size_t s = 0; s < multiplicities.size(); ++s) {
    const int gen = s < static_cast<std::size_t>(n_classical)
                        ? 2 * static_cast<int>(s) + 1
                        : 2 * (static_cast<int>(s) - n_classical) + 2;
    base.insert(base.end(), multiplicities[s], gen);
  }
  std::sort(base.begin(), base.end());
  do {
    out.insert(Sequence{base});
  } while (std::next_permutation(base.begin(), base.end()));
}

}  // namespace

std::vector<Sequence> relevant_sequences(
    const std::vector<HybridObservable>& observables, int order) {
  if (order != 1 && order != 2) {
    throw std::invalid_argument("sequence order must be 1 or 2, got " +
                                std::to_string(order));
  }
  std::set<Sequence> first;
  for (const auto& obs : observables) {
    const int n = obs.n_classical();
    for (const auto& [idx, op] : obs.terms()) {
      if (idx.is_constant()) continue;
      // Every componentwise 0 < m <= idx has a nonvanishing mixed partial.
      std::vector<int> m(idx.size(), 0);
      while (true) {
        std::size_t s = 0;
        while (s < m.size() && m[s] == idx[s]) {
          m[s] = 0;
          ++s;
        }
        if (s == m.size()) break;
        ++m[s];
        insert_arrangements(m, n, first);
      }
    }
  }
  if (order == 1) return {first.begin(), first.end()};
  std::set<Sequence> second;
  for (const auto& a : first) {
    for (const auto& b : first) {
      Sequence s = a;
      s.indices.insert(s.indices.end(), b.indices.begin(), b.indices.end());
      second.insert(std::move(s));
    }
  }
  return {second.begin(), second.end()};
}

ClassicalityReport check_classicality(const SectorState& state,
                                      const ClassicalData& data,
                                      const std::vector<Sequence>& seqs) {
  ClassicalityReport report{{}, true};
  for (const auto& seq : seqs) {
    const double norm2 = error_ket(seq, state, data).squaredNorm();
    const double delta = seq.margin(data);
    const bool ok = norm2 <= delta * delta;
    report.checks.push_back({seq, norm2, delta * delta, ok});
    report.pass = report.pass && ok;
  }
  return report;
}

double spread_bound(const HybridObservable& b_evolved,
                    const ClassicalData& data, const Eigen::VectorXcd& eigvec,
                    double p, int order) {
  data.validate();
  if (data.n_classical() != b_evolved.n_classical()) {
    throw std::invalid_argument("classical data covers " +
                                std::to_string(data.n_classical()) +
                                " modes, observable has " +
                                std::to_string(b_evolved.n_classical()));
  }
  if (!(p >= 0.0 && p < 1.0)) {
    throw std::invalid_argument("confidence level must lie in [0, 1)");
  }
  if (order < 1) throw std::invalid_argument("order must be >= 1");
  const PhasePoint pt{data.centers};
  const int dim = static_cast<int>(eigvec.size());
  double sum = 0.0;
  for (int i = 1; i <= 2 * b_evolved.n_classical(); ++i) {
    const auto deriv = classical_derivative(b_evolved, i);
    if (deriv.is_zero()) continue;
    const auto op = evaluate_classical(deriv, pt);
    const double len = (to_matrix(op, dim) * eigvec).norm();
    sum += len * data.margins[ClassicalMultiIndex::slot_of_generator(
               i, data.n_classical())];
  }
  return sum / std::pow(1.0 - p, 1.0 / (2.0 * order));
}

double first_order_error_norm(const HybridObservable& b_evolved,
                              const ClassicalData& data,
                              const SectorState& phi_c,
                              const Eigen::VectorXcd& eigvec) {
  data.validate();
  if (data.n_classical() != b_evolved.n_classical()) {
    throw std::invalid_argument("classical data covers " +
                                std::to_string(data.n_classical()) +
                                " modes, observable has " +
                                std::to_string(b_evolved.n_classical()));
  }
  const PhasePoint pt{data.centers};
  const int dim = static_cast<int>(eigvec.size());
  Eigen::MatrixXcd joint = Eigen::MatrixXcd::Zero(phi_c.dim(), dim);
  for (int i = 1; i <= 2 * b_evolved.n_classical(); ++i) {
    const auto deriv = classical_derivative(b_evolved, i);
    if (deriv.is_zero()) continue;
    const Eigen::VectorXcd left = error_ket(Sequence{{i}}, phi_c, data);
    const Eigen::VectorXcd right =
        to_matrix(evaluate_classical(deriv, pt), dim) * eigvec;
    joint += left * right.transpose();
  }
  return joint.norm();
}

}  // namespace hybrid
