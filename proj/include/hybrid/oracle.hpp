#pragma once

#include <Eigen/Dense>
#include <vector>

#include "hybrid/classicality.hpp"
#include "hybrid/observable.hpp"
#include "hybrid/predictions.hpp"
#include "hybrid/weyl.hpp"

namespace hybrid {

// Truncation sizes of the two-mode product space, classical sector first.
struct FullDims {
  int dim_c;
  int dim_q;

  int total() const { return dim_c * dim_q; }
  void validate() const;
};

// Normalized wave function on the product space. Amplitudes are stored
// with the quantum index fastest: entry i_c * dim_q + i_q.
class FullState {
 public:
  FullState(Eigen::VectorXcd amplitudes, FullDims dims, double hbar);

  static FullState product(const SectorState& phi_c, const SectorState& phi_q);

  const Eigen::VectorXcd& amplitudes() const { return amplitudes_; }
  FullDims dims() const { return dims_; }
  double hbar() const { return hbar_; }

 private:
  Eigen::VectorXcd amplitudes_;
  FullDims dims_;
  double hbar_;
};

// Dense product-space matrix of a polynomial over one classical mode
// (mode 1) and one quantum mode (mode 2). Factors of a word multiply in
// their written order within each sector.
Eigen::MatrixXcd full_operator(const OperatorPolynomial& a, FullDims dims);

struct HermitianEigen {
  Eigen::VectorXd eigenvalues;
  Eigen::MatrixXcd eigenvectors;
};

// Eigendecomposition of a Hermitian matrix (residual within 1e-10
// relative). Large matrices go through LAPACK directly.
HermitianEigen hermitian_eigen(const Eigen::MatrixXcd& m);

// Schroedinger evolution exp(-i h t / hbar) applied through the
// eigendecomposition of h. The overload taking HermitianEigen lets one
// decomposition serve many times.
FullState propagate(const FullState& state, const Eigen::MatrixXcd& h,
                    double t);
FullState propagate(const FullState& state, const HermitianEigen& h_eig,
                    double t);

// Probability of measuring an eigenvalue of op inside the closed interval.
double measure_interval(const FullState& state, const Eigen::MatrixXcd& op,
                        const Interval& i);
double measure_interval(const FullState& state, const HermitianEigen& op_eig,
                        const Interval& i);

enum class Sector { classical, quantum };

// Same measurement for an operator acting on a single sector, given as its
// sector-sized matrix. Avoids forming the product-space operator.
double measure_mode_interval(const FullState& state,
                             const Eigen::MatrixXcd& op, Sector sector,
                             const Interval& i);

// Matrix-free action of a two-mode polynomial, one (classical, quantum)
// matrix pair per word. Lets Krylov propagation reach sizes where the
// dense product-space matrix is no longer practical.
class FullOperatorAction {
 public:
  FullOperatorAction(const OperatorPolynomial& a, FullDims dims);

  FullDims dims() const { return dims_; }
  Eigen::VectorXcd apply(const Eigen::VectorXcd& psi) const;

 private:
  struct Term {
    Complex coeff;
    Eigen::MatrixXcd classical;
    Eigen::MatrixXcd quantum;
  };
  std::vector<Term> terms_;
  FullDims dims_;
};

// Lanczos propagation with full reorthogonalization. The basis grows until
// two successive exponential approximations differ by less than tol; if
// the basis cap is hit first, the time step is halved recursively.
FullState krylov_propagate(const FullState& state,
                           const FullOperatorAction& h, double t,
                           double tol = 1e-12);

// Exact spread ||(A - B) |phi_c> (x) eigvec|| of the evolved symbol against
// the product-space observable a_full, where B realizes the symbol at the
// classical centers on the quantum sector alone.
double exact_delta_b(const HybridObservable& b_evolved,
                     const Eigen::MatrixXcd& a_full, const PhasePoint& centers,
                     const Eigen::VectorXcd& eigvec, const SectorState& phi_c);

}  // namespace hybrid
