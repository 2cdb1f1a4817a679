#include <Eigen/Dense>
#include <cmath>
#include <complex>
#include <random>
#include <unsupported/Eigen/KroneckerProduct>

#include "doctest.h"
#include "hybrid/classicality.hpp"
#include "hybrid/dynamics.hpp"
#include "hybrid/fock.hpp"
#include "hybrid/maps.hpp"
#include "hybrid/oracle.hpp"
#include "test_util.hpp"

using namespace hybrid;
using testutil::closed_form_evolved;
using testutil::coupled_hamiltonian;

namespace {

SectorState basis_state(int dim, int n) {
  Eigen::VectorXcd v = Eigen::VectorXcd::Zero(dim);
  v[n] = 1.0;
  return SectorState(v, 1.0);
}

HybridObservable quantum_oscillator(double hbar) {
  const auto q2 = GeneratorId::position(2);
  const auto p2 = GeneratorId::momentum(2);
  OperatorPolynomial op(hbar);
  op += OperatorPolynomial::monomial({0.5, 0.0}, Word{q2, q2}, hbar);
  op += OperatorPolynomial::monomial({0.5, 0.0}, Word{p2, p2}, hbar);
  return HybridObservable::quantum(1, hbar, op);
}

Eigen::MatrixXcd unitary_at(const HermitianEigen& eig, double t,
                            double hbar) {
  const Eigen::VectorXcd phases =
      (Complex{0.0, -t / hbar} * eig.eigenvalues.cast<Complex>().array())
          .exp()
          .matrix();
  return eig.eigenvectors * phases.asDiagonal() *
         eig.eigenvectors.adjoint();
}

}  // namespace

TEST_SUITE("oracle") {

TEST_CASE("full operator of the identity is the identity") {
  auto one = OperatorPolynomial::identity(1.0);
  const FullDims dims{4, 3};
  CHECK((full_operator(one, dims) -
         Eigen::MatrixXcd::Identity(12, 12))
            .norm() == 0.0);
}

TEST_CASE("sector generators factor into Kronecker products") {
  const FullDims dims{5, 4};
  auto qc = OperatorPolynomial::generator(GeneratorId::position(1), 1.0);
  Eigen::MatrixXcd expected = Eigen::kroneckerProduct(
      position_matrix(5, 1.0), Eigen::MatrixXcd::Identity(4, 4));
  CHECK((full_operator(qc, dims) - expected).norm() < 1e-14);

  auto pq = OperatorPolynomial::generator(GeneratorId::momentum(2), 1.0);
  expected = Eigen::kroneckerProduct(Eigen::MatrixXcd::Identity(5, 5),
                                     momentum_matrix(4, 1.0));
  CHECK((full_operator(pq, dims) - expected).norm() < 1e-14);
}

TEST_CASE("word factors multiply in their written order") {
  const FullDims dims{6, 2};
  const auto q1 = GeneratorId::position(1);
  const auto p1 = GeneratorId::momentum(1);
  auto qp = OperatorPolynomial::monomial({1.0, 0.0}, Word{q1, p1}, 1.0);
  const Eigen::MatrixXcd q = position_matrix(6, 1.0);
  const Eigen::MatrixXcd p = momentum_matrix(6, 1.0);
  Eigen::MatrixXcd expected = Eigen::kroneckerProduct(
      Eigen::MatrixXcd(q * p), Eigen::MatrixXcd::Identity(2, 2));
  CHECK((full_operator(qp, dims) - expected).norm() < 1e-14);
}

TEST_CASE("modes beyond the two sectors are rejected") {
  auto stray = OperatorPolynomial::generator(GeneratorId::position(3), 1.0);
  CHECK_THROWS_AS(full_operator(stray, FullDims{4, 4}),
                  std::invalid_argument);
}

TEST_CASE("quantized coupled Hamiltonian is Hermitian") {
  auto h = full_operator(to_operator(coupled_hamiltonian(0.1, 1.0)),
                         FullDims{12, 12});
  CHECK((h - h.adjoint()).norm() < 1e-12);
}

TEST_CASE("product states interleave with the quantum index fastest") {
  auto phi_c = basis_state(3, 1);
  Eigen::VectorXcd amps(2);
  amps << 1.0 / std::sqrt(2.0), 1.0 / std::sqrt(2.0);
  SectorState phi_q(amps, 1.0);
  auto full = FullState::product(phi_c, phi_q);
  REQUIRE(full.amplitudes().size() == 6);
  CHECK(std::abs(full.amplitudes()[2] - 1.0 / std::sqrt(2.0)) < 1e-15);
  CHECK(std::abs(full.amplitudes()[3] - 1.0 / std::sqrt(2.0)) < 1e-15);
  CHECK(std::abs(full.amplitudes()[0]) == 0.0);
}

TEST_CASE("product states require matching hbar") {
  Eigen::VectorXcd e0 = Eigen::VectorXcd::Zero(2);
  e0[0] = 1.0;
  SectorState a(e0, 1.0);
  SectorState b(e0, 0.5);
  CHECK_THROWS_AS(FullState::product(a, b), std::invalid_argument);
}

TEST_CASE("full states validate their length and norm") {
  Eigen::VectorXcd v = Eigen::VectorXcd::Zero(6);
  v[0] = 1.0;
  CHECK_THROWS_AS(FullState(v, FullDims{2, 2}, 1.0), std::invalid_argument);
  Eigen::VectorXcd small = Eigen::VectorXcd::Zero(4);
  small[0] = 0.7;
  CHECK_THROWS_AS(FullState(small, FullDims{2, 2}, 1.0),
                  std::invalid_argument);
}

TEST_CASE("zero-time propagation leaves the state unchanged") {
  auto state = FullState::product(coherent_state(0.5, 0.0, 8, 1.0),
                                  basis_state(6, 0));
  auto h = full_operator(to_operator(coupled_hamiltonian(0.2, 1.0)),
                         state.dims());
  auto moved = propagate(state, h, 0.0);
  CHECK((moved.amplitudes() - state.amplitudes()).norm() < 1e-12);
}

TEST_CASE("harmonic classical sector returns after one period") {
  auto state = FullState::product(coherent_state(1.0, 0.0, 40, 1.0),
                                  basis_state(2, 0));
  auto number = OperatorPolynomial::monomial({0.5, 0.0},
                                             Word{GeneratorId::position(1),
                                                  GeneratorId::position(1)},
                                             1.0);
  number += OperatorPolynomial::monomial({0.5, 0.0},
                                         Word{GeneratorId::momentum(1),
                                              GeneratorId::momentum(1)},
                                         1.0);
  auto h = full_operator(number, state.dims());
  auto cycled = propagate(state, h, 2.0 * std::acos(-1.0));
  const double fidelity =
      std::abs((state.amplitudes().adjoint() * cycled.amplitudes()).value());
  CHECK(fidelity > 1.0 - 1e-6);
}

TEST_CASE("two half steps compose into one full step") {
  auto state = FullState::product(coherent_state(0.8, -0.3, 10, 1.0),
                                  basis_state(8, 1));
  auto eig = hermitian_eigen(full_operator(
      to_operator(coupled_hamiltonian(0.3, 1.0)), state.dims()));
  auto once = propagate(state, eig, 0.8);
  auto twice = propagate(propagate(state, eig, 0.4), eig, 0.4);
  CHECK((once.amplitudes() - twice.amplitudes()).norm() < 1e-9);
  CHECK(std::abs(once.amplitudes().norm() - 1.0) < 1e-12);
}

TEST_CASE("non-Hermitian generators are rejected") {
  auto state = FullState::product(basis_state(2, 0), basis_state(2, 0));
  Eigen::MatrixXcd bad = Eigen::MatrixXcd::Zero(4, 4);
  bad(0, 1) = 1.0;
  CHECK_THROWS_AS(propagate(state, bad, 1.0), std::invalid_argument);
  CHECK_THROWS_AS(measure_interval(state, bad, Interval{0.0, 1.0}),
                  std::invalid_argument);
}

TEST_CASE("measuring the identity is certain") {
  auto state = FullState::product(coherent_state(0.3, 0.2, 6, 1.0),
                                  basis_state(5, 2));
  Eigen::MatrixXcd one = Eigen::MatrixXcd::Identity(30, 30);
  CHECK(std::abs(measure_interval(state, one, {1.0, 0.5}) - 1.0) < 1e-12);
  CHECK(measure_interval(state, one, {-3.0, 1.0}) == 0.0);
}

TEST_CASE("diagonal observables sum the expected amplitudes") {
  auto phi_c = basis_state(2, 0);
  Eigen::VectorXcd amps(3);
  amps << 0.6, 0.0, 0.8;
  SectorState phi_q(amps, 1.0);
  auto state = FullState::product(phi_c, phi_q);
  Eigen::VectorXd entries(6);
  entries << 0.0, 1.0, 2.0, 3.0, 4.0, 5.0;
  Eigen::MatrixXcd op = entries.cast<Complex>().asDiagonal();
  CHECK(std::abs(measure_interval(state, op, {1.5, 1.0}) - 0.64) < 1e-12);
  CHECK(std::abs(measure_interval(state, op, {0.0, 0.5}) - 0.36) < 1e-12);
}

TEST_CASE("sector measurements agree with the product-space route") {
  auto state = FullState::product(coherent_state(0.7, -0.4, 10, 1.0),
                                  coherent_state(-0.2, 0.5, 8, 1.0));
  const Interval window{0.3, 1.1};

  Eigen::MatrixXcd op_q = position_matrix(8, 1.0);
  Eigen::MatrixXcd lifted = Eigen::kroneckerProduct(
      Eigen::MatrixXcd::Identity(10, 10), op_q);
  CHECK(std::abs(measure_mode_interval(state, op_q, Sector::quantum, window) -
                 measure_interval(state, lifted, window)) < 1e-12);

  Eigen::MatrixXcd op_c = momentum_matrix(10, 1.0);
  lifted = Eigen::kroneckerProduct(op_c, Eigen::MatrixXcd::Identity(8, 8));
  CHECK(
      std::abs(measure_mode_interval(state, op_c, Sector::classical, window) -
               measure_interval(state, lifted, window)) < 1e-12);
}

TEST_CASE("sector operators must match their sector size") {
  auto state = FullState::product(basis_state(4, 0), basis_state(3, 0));
  Eigen::MatrixXcd wrong = Eigen::MatrixXcd::Identity(4, 4);
  CHECK_THROWS_AS(
      measure_mode_interval(state, wrong, Sector::quantum, {0.0, 1.0}),
      std::invalid_argument);
}

TEST_CASE("Heisenberg and Schroedinger expectations coincide") {
  const FullDims dims{16, 8};
  auto state = FullState::product(coherent_state(1.0, 0.5, 16, 1.0),
                                  basis_state(8, 0));
  auto eig = hermitian_eigen(
      full_operator(to_operator(coupled_hamiltonian(0.2, 1.0)), dims));
  const Eigen::MatrixXcd obs = Eigen::kroneckerProduct(
      position_matrix(16, 1.0), Eigen::MatrixXcd::Identity(8, 8));
  const double t = 0.9;
  const Eigen::MatrixXcd u = unitary_at(eig, t, 1.0);
  auto moved = propagate(state, eig, t);
  const Complex schroedinger =
      (moved.amplitudes().adjoint() * obs * moved.amplitudes()).value();
  const Complex heisenberg = (state.amplitudes().adjoint() *
                              (u.adjoint() * obs * u) * state.amplitudes())
                                 .value();
  CHECK(std::abs(schroedinger - heisenberg) < 1e-9);
}

TEST_CASE("matrix-free action matches the dense operator") {
  const FullDims dims{6, 5};
  auto op = to_operator(coupled_hamiltonian(0.3, 1.0));
  FullOperatorAction action(op, dims);
  const Eigen::MatrixXcd dense = full_operator(op, dims);
  std::mt19937 rng(404);
  std::normal_distribution<double> g;
  Eigen::VectorXcd psi(dims.total());
  for (int k = 0; k < dims.total(); ++k) psi[k] = Complex{g(rng), g(rng)};
  CHECK((action.apply(psi) - dense * psi).norm() < 1e-12 * psi.norm());
}

TEST_CASE("Krylov propagation matches the dense route") {
  const FullDims dims{10, 8};
  auto state = FullState::product(coherent_state(1.0, 0.2, 10, 1.0),
                                  coherent_state(0.3, 0.0, 8, 1.0));
  auto op = to_operator(coupled_hamiltonian(0.3, 1.0) +
                        quantum_oscillator(1.0));
  auto dense = propagate(state, full_operator(op, dims), 2.0);
  auto krylov = krylov_propagate(state, FullOperatorAction(op, dims), 2.0);
  CHECK((dense.amplitudes() - krylov.amplitudes()).norm() < 1e-9);
  CHECK(krylov_propagate(state, FullOperatorAction(op, dims), 0.0)
            .amplitudes()
            .isApprox(state.amplitudes()));
}

TEST_CASE("exact spread vanishes without classical dependence") {
  auto b = closed_form_evolved('Q', 0.1, 0.8, 1.0);
  const int dim_c = 12, dim_q = 6;
  Eigen::MatrixXcd a_full = Eigen::kroneckerProduct(
      Eigen::MatrixXcd::Identity(dim_c, dim_c), position_matrix(dim_q, 1.0));
  auto phi_c = coherent_state(1.0, 0.5, dim_c, 1.0);
  Eigen::VectorXcd v = Eigen::VectorXcd::Zero(dim_q);
  v[0] = 1.0;
  CHECK(exact_delta_b(b, a_full, PhasePoint{{1.0, 0.5}}, v, phi_c) < 1e-12);
}

TEST_CASE("exact spread of the evolved position is sqrt(hbar/2)") {
  const FullDims dims{24, 6};
  const double t = 0.6;
  auto eig = hermitian_eigen(
      full_operator(to_operator(coupled_hamiltonian(0.1, 1.0)), dims));
  const Eigen::MatrixXcd u = unitary_at(eig, t, 1.0);
  const Eigen::MatrixXcd q_full = Eigen::kroneckerProduct(
      position_matrix(24, 1.0), Eigen::MatrixXcd::Identity(6, 6));
  const Eigen::MatrixXcd a_full = u.adjoint() * q_full * u;
  auto phi_c = coherent_state(1.0, 0.5, 24, 1.0);
  Eigen::VectorXcd v = Eigen::VectorXcd::Zero(6);
  v[0] = 1.0;
  auto b = closed_form_evolved('q', 0.1, t, 1.0);
  const double delta =
      exact_delta_b(b, a_full, PhasePoint{{1.0, 0.5}}, v, phi_c);
  CHECK(std::abs(delta - std::sqrt(0.5)) < 1e-6);
}

TEST_CASE("decoupled quantum measurements match the hybrid spectrum") {
  const FullDims dims{20, 16};
  const double t = 0.7;
  auto h = coupled_hamiltonian(0.0, 1.0) + quantum_oscillator(1.0);
  auto phi_c = coherent_state(1.0, 1.0, dims.dim_c, 1.0);
  auto phi_q = coherent_state(0.5, 0.0, dims.dim_q, 1.0);

  EvolutionConfig cfg;
  cfg.time = t;
  cfg.max_order = 24;
  auto evolved = evolve_series(
      HybridObservable::quantum(
          1, 1.0,
          OperatorPolynomial::generator(GeneratorId::position(2), 1.0)),
      h, cfg);
  auto table =
      hybrid_spectrum(evolved.value, PhasePoint{{1.0, 1.0}}, phi_q,
                      dims.dim_q);

  auto state = propagate(FullState::product(phi_c, phi_q),
                         full_operator(to_operator(h), dims), t);
  for (const Interval& window :
       {Interval{0.0, 0.8}, Interval{-1.0, 0.5}, Interval{0.3, 2.0}}) {
    CHECK(std::abs(
              interval_probability(table, window) -
              measure_mode_interval(state, position_matrix(dims.dim_q, 1.0),
                                    Sector::quantum, window)) < 1e-8);
  }
}

}  // TEST_SUITE
