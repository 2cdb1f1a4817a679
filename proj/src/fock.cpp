#include "hybrid/fock.hpp"

#include <cmath>
#include <optional>
#include <stdexcept>
#include <string>

namespace hybrid {

Eigen::MatrixXcd lowering_matrix(int dim) {
  if (dim < 1) throw std::invalid_argument("dimension must be >= 1");
  Eigen::MatrixXcd a = Eigen::MatrixXcd::Zero(dim, dim);
  for (int n = 1; n < dim; ++n) {
    a(n - 1, n) = std::sqrt(static_cast<double>(n));
  }
  return a;
}

Eigen::MatrixXcd position_matrix(int dim, double hbar) {
  const auto a = lowering_matrix(dim);
  return std::sqrt(hbar / 2.0) * (a + a.adjoint());
}

Eigen::MatrixXcd momentum_matrix(int dim, double hbar) {
  const auto a = lowering_matrix(dim);
  return Complex{0.0, 1.0} * std::sqrt(hbar / 2.0) * (a.adjoint() - a);
}

Eigen::MatrixXcd to_matrix(const OperatorPolynomial& op, int dim) {
  std::optional<int> mode;
  for (const auto& [w, c] : op.terms()) {
    for (const auto& g : w) {
      if (!mode) {
        mode = g.mode();
      } else if (*mode != g.mode()) {
        throw std::invalid_argument(
            "matrix representation requires a single mode, found modes " +
            std::to_string(*mode) + " and " + std::to_string(g.mode()));
      }
    }
  }
  const Eigen::MatrixXcd q = position_matrix(dim, op.hbar());
  const Eigen::MatrixXcd p = momentum_matrix(dim, op.hbar());
  Eigen::MatrixXcd out = Eigen::MatrixXcd::Zero(dim, dim);
  for (const auto& [w, c] : op.terms()) {
    Eigen::MatrixXcd m = Eigen::MatrixXcd::Identity(dim, dim);
    for (const auto& g : w) {
      m = m * (g.kind() == GeneratorId::Kind::position ? q : p);
    }
    out += c * m;
  }
  return out;
}

}  // namespace hybrid
