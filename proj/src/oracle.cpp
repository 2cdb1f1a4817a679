#include "hybrid/oracle.hpp"

#include <cmath>
#include <complex>
#include <stdexcept>
#include <string>
#include <unsupported/Eigen/KroneckerProduct>
#include <utility>

#include <lapacke.h>

#include "hybrid/fock.hpp"

namespace hybrid {

void FullDims::validate() const {
  if (dim_c < 2 || dim_q < 2) {
    throw std::invalid_argument("sector dimensions must be >= 2");
  }
}

FullState::FullState(Eigen::VectorXcd amplitudes, FullDims dims, double hbar)
    : amplitudes_(std::move(amplitudes)), dims_(dims), hbar_(hbar) {
  dims_.validate();
  if (amplitudes_.size() != dims_.total()) {
    throw std::invalid_argument("amplitude vector has length " +
                                std::to_string(amplitudes_.size()) +
                                ", dims give " +
                                std::to_string(dims_.total()));
  }
  if (!(hbar_ > 0.0)) throw std::invalid_argument("hbar must be positive");
  if (std::abs(amplitudes_.norm() - 1.0) > 1e-10) {
    throw std::invalid_argument("full state must be normalized, norm is " +
                                std::to_string(amplitudes_.norm()));
  }
}

FullState FullState::product(const SectorState& phi_c,
                             const SectorState& phi_q) {
  if (phi_c.hbar() != phi_q.hbar()) {
    throw std::invalid_argument("sector states disagree on hbar");
  }
  const FullDims dims{phi_c.dim(), phi_q.dim()};
  Eigen::VectorXcd amps(dims.total());
  for (int c = 0; c < dims.dim_c; ++c) {
    amps.segment(c * dims.dim_q, dims.dim_q) =
        phi_c.amplitudes()[c] * phi_q.amplitudes();
  }
  return FullState(std::move(amps), dims, phi_c.hbar());
}

Eigen::MatrixXcd full_operator(const OperatorPolynomial& a, FullDims dims) {
  dims.validate();
  const Eigen::MatrixXcd qc = position_matrix(dims.dim_c, a.hbar());
  const Eigen::MatrixXcd pc = momentum_matrix(dims.dim_c, a.hbar());
  const Eigen::MatrixXcd qq = position_matrix(dims.dim_q, a.hbar());
  const Eigen::MatrixXcd pq = momentum_matrix(dims.dim_q, a.hbar());
  Eigen::MatrixXcd out =
      Eigen::MatrixXcd::Zero(dims.total(), dims.total());
  for (const auto& [w, c] : a.terms()) {
    Eigen::MatrixXcd mc = Eigen::MatrixXcd::Identity(dims.dim_c, dims.dim_c);
    Eigen::MatrixXcd mq = Eigen::MatrixXcd::Identity(dims.dim_q, dims.dim_q);
    for (const auto& g : w) {
      const bool pos = g.kind() == GeneratorId::Kind::position;
      switch (g.mode()) {
        case 1:
          mc = mc * (pos ? qc : pc);
          break;
        case 2:
          mq = mq * (pos ? qq : pq);
          break;
        default:
          throw std::invalid_argument(
              "product-space representation supports modes 1 and 2, found " +
              std::to_string(g.mode()));
      }
    }
    out += c * Eigen::kroneckerProduct(mc, mq);
  }
  return out;
}

namespace {

void require_hermitian(const Eigen::MatrixXcd& m) {
  const double scale = std::max(1.0, m.norm());
  if ((m - m.adjoint()).norm() > 1e-10 * scale) {
    throw std::invalid_argument("matrix is not Hermitian");
  }
}

}  // namespace

HermitianEigen hermitian_eigen(const Eigen::MatrixXcd& m) {
  require_hermitian(m);
  const auto n = m.rows();
  HermitianEigen out;
  if (n >= 256) {
    out.eigenvectors = (m + m.adjoint()) / 2.0;
    out.eigenvalues.resize(n);
    const auto info = LAPACKE_zheevd(
        LAPACK_COL_MAJOR, 'V', 'L', static_cast<lapack_int>(n),
        reinterpret_cast<lapack_complex_double*>(out.eigenvectors.data()),
        static_cast<lapack_int>(n), out.eigenvalues.data());
    if (info != 0) {
      throw std::runtime_error("eigendecomposition failed, info " +
                               std::to_string(info));
    }
  } else {
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> solver(
        (m + m.adjoint()) / 2.0);
    if (solver.info() != Eigen::Success) {
      throw std::runtime_error("eigendecomposition failed");
    }
    out.eigenvalues = solver.eigenvalues();
    out.eigenvectors = solver.eigenvectors();
  }
  return out;
}

FullState propagate(const FullState& state, const Eigen::MatrixXcd& h,
                    double t) {
  return propagate(state, hermitian_eigen(h), t);
}

FullState propagate(const FullState& state, const HermitianEigen& h_eig,
                    double t) {
  if (h_eig.eigenvectors.rows() != state.amplitudes().size()) {
    throw std::invalid_argument("operator and state dimensions differ");
  }
  const Eigen::VectorXcd phases =
      (Complex{0.0, -t / state.hbar()} *
       h_eig.eigenvalues.cast<Complex>().array())
          .exp()
          .matrix();
  Eigen::VectorXcd out =
      h_eig.eigenvectors *
      (phases.array() *
       (h_eig.eigenvectors.adjoint() * state.amplitudes()).array())
          .matrix();
  const double norm = out.norm();
  if (std::abs(norm - 1.0) > 1e-9) {
    throw std::logic_error("propagation lost normalization, norm " +
                           std::to_string(norm));
  }
  out /= norm;
  return FullState(std::move(out), state.dims(), state.hbar());
}

double measure_interval(const FullState& state, const Eigen::MatrixXcd& op,
                        const Interval& i) {
  return measure_interval(state, hermitian_eigen(op), i);
}

double measure_interval(const FullState& state, const HermitianEigen& op_eig,
                        const Interval& i) {
  i.validate();
  if (op_eig.eigenvectors.rows() != state.amplitudes().size()) {
    throw std::invalid_argument("operator and state dimensions differ");
  }
  const Eigen::VectorXd probs =
      (op_eig.eigenvectors.adjoint() * state.amplitudes()).cwiseAbs2();
  double out = 0.0;
  for (Eigen::Index k = 0; k < probs.size(); ++k) {
    const double value = op_eig.eigenvalues[k];
    if (value >= i.lo() && value <= i.hi()) out += probs[k];
  }
  return out;
}

double measure_mode_interval(const FullState& state,
                             const Eigen::MatrixXcd& op, Sector sector,
                             const Interval& i) {
  i.validate();
  const auto dims = state.dims();
  const int own = sector == Sector::classical ? dims.dim_c : dims.dim_q;
  if (op.rows() != own || op.cols() != own) {
    throw std::invalid_argument("operator size does not match its sector");
  }
  const auto eig = hermitian_eigen(op);
  using RowMajorMatrix =
      Eigen::Matrix<Complex, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
  const Eigen::Map<const RowMajorMatrix> psi(state.amplitudes().data(),
                                             dims.dim_c, dims.dim_q);
  Eigen::VectorXd probs(own);
  if (sector == Sector::classical) {
    const Eigen::MatrixXcd w = eig.eigenvectors.adjoint() * psi;
    for (int k = 0; k < own; ++k) probs[k] = w.row(k).squaredNorm();
  } else {
    const Eigen::MatrixXcd w = psi * eig.eigenvectors.conjugate();
    for (int k = 0; k < own; ++k) probs[k] = w.col(k).squaredNorm();
  }
  double out = 0.0;
  for (int k = 0; k < own; ++k) {
    if (eig.eigenvalues[k] >= i.lo() && eig.eigenvalues[k] <= i.hi()) {
      out += probs[k];
    }
  }
  return out;
}

FullOperatorAction::FullOperatorAction(const OperatorPolynomial& a,
                                       FullDims dims)
    : dims_(dims) {
  dims_.validate();
  const Eigen::MatrixXcd qc = position_matrix(dims.dim_c, a.hbar());
  const Eigen::MatrixXcd pc = momentum_matrix(dims.dim_c, a.hbar());
  const Eigen::MatrixXcd qq = position_matrix(dims.dim_q, a.hbar());
  const Eigen::MatrixXcd pq = momentum_matrix(dims.dim_q, a.hbar());
  for (const auto& [w, c] : a.terms()) {
    Term term{c, Eigen::MatrixXcd::Identity(dims.dim_c, dims.dim_c),
              Eigen::MatrixXcd::Identity(dims.dim_q, dims.dim_q)};
    for (const auto& g : w) {
      const bool pos = g.kind() == GeneratorId::Kind::position;
      switch (g.mode()) {
        case 1:
          term.classical = term.classical * (pos ? qc : pc);
          break;
        case 2:
          term.quantum = term.quantum * (pos ? qq : pq);
          break;
        default:
          throw std::invalid_argument(
              "product-space representation supports modes 1 and 2, found " +
              std::to_string(g.mode()));
      }
    }
    terms_.push_back(std::move(term));
  }
}

Eigen::VectorXcd FullOperatorAction::apply(const Eigen::VectorXcd& psi) const {
  if (psi.size() != dims_.total()) {
    throw std::invalid_argument("vector length does not match dims");
  }
  // With the quantum index fastest, psi viewed column-major is the
  // dim_q x dim_c coefficient matrix, and (Mc (x) Mq) psi becomes
  // Mq * Psi * Mc^T.
  const Eigen::Map<const Eigen::MatrixXcd> m(psi.data(), dims_.dim_q,
                                             dims_.dim_c);
  Eigen::VectorXcd out = Eigen::VectorXcd::Zero(psi.size());
  Eigen::Map<Eigen::MatrixXcd> out_m(out.data(), dims_.dim_q, dims_.dim_c);
  for (const auto& term : terms_) {
    out_m.noalias() +=
        term.coeff * (term.quantum * m * term.classical.transpose());
  }
  return out;
}

namespace {

Eigen::VectorXcd lanczos_step(const FullOperatorAction& h,
                              const Eigen::VectorXcd& psi, double t,
                              double hbar, double tol, int depth) {
  if (depth > 40) {
    throw std::runtime_error("Krylov propagation failed to converge");
  }
  constexpr int kMaxBasis = 96;
  constexpr int kCheckpoint = 8;
  const auto n = psi.size();
  const double scale0 = psi.norm();
  Eigen::MatrixXcd basis(n, kMaxBasis + 1);
  basis.col(0) = psi / scale0;
  Eigen::VectorXd alpha(kMaxBasis), beta(kMaxBasis);
  Eigen::VectorXcd previous;
  const auto evaluate = [&](int m) {
    Eigen::MatrixXd tri = Eigen::MatrixXd::Zero(m, m);
    for (int j = 0; j < m; ++j) {
      tri(j, j) = alpha[j];
      if (j + 1 < m) tri(j, j + 1) = tri(j + 1, j) = beta[j];
    }
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> small(tri);
    const Eigen::VectorXcd phases =
        (Complex{0.0, -t / hbar} *
         small.eigenvalues().cast<Complex>().array())
            .exp()
            .matrix();
    const Eigen::VectorXcd start =
        small.eigenvectors().row(0).transpose().cast<Complex>();
    const Eigen::VectorXcd weights = small.eigenvectors().cast<Complex>() *
                                     (phases.array() * start.array()).matrix();
    return Eigen::VectorXcd(scale0 * (basis.leftCols(m) * weights));
  };
  for (int j = 0; j < kMaxBasis; ++j) {
    Eigen::VectorXcd w = h.apply(basis.col(j));
    alpha[j] = (basis.col(j).adjoint() * w).value().real();
    w -= alpha[j] * basis.col(j);
    if (j > 0) w -= beta[j - 1] * basis.col(j - 1);
    w -= basis.leftCols(j + 1) * (basis.leftCols(j + 1).adjoint() * w);
    beta[j] = w.norm();
    if (beta[j] < 1e-14 * (1.0 + std::abs(alpha[j]))) {
      return evaluate(j + 1);
    }
    basis.col(j + 1) = w / beta[j];
    const int m = j + 1;
    if (m % kCheckpoint == 0 || m == kMaxBasis) {
      Eigen::VectorXcd candidate = evaluate(m);
      if (previous.size() > 0 && (candidate - previous).norm() < tol) {
        return candidate;
      }
      previous = std::move(candidate);
    }
  }
  const Eigen::VectorXcd half =
      lanczos_step(h, psi, t / 2.0, hbar, tol, depth + 1);
  return lanczos_step(h, half, t / 2.0, hbar, tol, depth + 1);
}

}  // namespace

FullState krylov_propagate(const FullState& state, const FullOperatorAction& h,
                           double t, double tol) {
  if (h.dims().total() != state.dims().total()) {
    throw std::invalid_argument("operator and state dimensions differ");
  }
  if (t == 0.0) return state;
  Eigen::VectorXcd out =
      lanczos_step(h, state.amplitudes(), t, state.hbar(), tol, 0);
  const double norm = out.norm();
  if (std::abs(norm - 1.0) > 1e-9) {
    throw std::logic_error("propagation lost normalization, norm " +
                           std::to_string(norm));
  }
  out /= norm;
  return FullState(std::move(out), state.dims(), state.hbar());
}

double exact_delta_b(const HybridObservable& b_evolved,
                     const Eigen::MatrixXcd& a_full, const PhasePoint& centers,
                     const Eigen::VectorXcd& eigvec,
                     const SectorState& phi_c) {
  const int dim_q = static_cast<int>(eigvec.size());
  const int dim_c = phi_c.dim();
  if (a_full.rows() != dim_c * dim_q || a_full.cols() != dim_c * dim_q) {
    throw std::invalid_argument("product-space operator has size " +
                                std::to_string(a_full.rows()) +
                                ", sectors give " +
                                std::to_string(dim_c * dim_q));
  }
  const Eigen::MatrixXcd b_matrix =
      to_matrix(evaluate_classical(b_evolved, centers), dim_q);
  const Eigen::VectorXcd rotated = b_matrix * eigvec;
  Eigen::VectorXcd residual(dim_c * dim_q);
  for (int c = 0; c < dim_c; ++c) {
    residual.segment(c * dim_q, dim_q) = phi_c.amplitudes()[c] * eigvec;
  }
  residual = a_full * residual;
  for (int c = 0; c < dim_c; ++c) {
    residual.segment(c * dim_q, dim_q) -= phi_c.amplitudes()[c] * rotated;
  }
  return residual.norm();
}

}  // namespace hybrid
