#pragma once

#include <Eigen/Dense>

#include "hybrid/weyl.hpp"

namespace hybrid {

// Truncated harmonic-oscillator ladder representation with the lowering
// convention a|n> = sqrt(n)|n-1>.
Eigen::MatrixXcd lowering_matrix(int dim);
Eigen::MatrixXcd position_matrix(int dim, double hbar);
Eigen::MatrixXcd momentum_matrix(int dim, double hbar);

// Dense Fock-basis matrix of a polynomial that involves at most one mode.
// Throws if words mix distinct modes; the truncation breaks canonical
// commutators only in the highest Fock level.
Eigen::MatrixXcd to_matrix(const OperatorPolynomial& op, int dim);

}  // namespace hybrid
