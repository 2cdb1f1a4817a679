#include <Eigen/Dense>
#include <cmath>
#include <random>
#include <vector>

#include "doctest.h"
#include "hybrid/classicality.hpp"
#include "hybrid/fock.hpp"
#include "hybrid/predictions.hpp"
#include "test_util.hpp"

using namespace hybrid;
using testutil::closed_form_evolved;

namespace {

SectorState superposition01(int dim) {
  Eigen::VectorXcd v = Eigen::VectorXcd::Zero(dim);
  v[0] = v[1] = 1.0 / std::sqrt(2.0);
  return SectorState(v, 1.0);
}

HybridObservable number_operator(int n_classical, double hbar) {
  const auto q2 = GeneratorId::position(n_classical + 1);
  const auto p2 = GeneratorId::momentum(n_classical + 1);
  OperatorPolynomial op(hbar);
  op += OperatorPolynomial::monomial({1.0 / (2.0 * hbar), 0.0}, Word{q2, q2},
                                     hbar);
  op += OperatorPolynomial::monomial({1.0 / (2.0 * hbar), 0.0}, Word{p2, p2},
                                     hbar);
  op += OperatorPolynomial::monomial({-0.5, 0.0}, Word{}, hbar);
  return HybridObservable::quantum(n_classical, hbar, op);
}

SpectrumTable toy_table() {
  return SpectrumTable{{{1.0, 0.5}, {2.0, 0.5}}, 1e-9};
}

}  // namespace

TEST_SUITE("predictions") {

TEST_CASE("identity observable collapses to a single spectral entry") {
  auto one = HybridObservable::identity(1, 1.0);
  auto phi = coherent_state(0.3, 0.1, 16, 1.0);
  auto table = hybrid_spectrum(one, PhasePoint{{0.0, 0.0}}, phi, 16);
  REQUIRE(table.entries.size() == 1);
  CHECK(std::abs(table.entries[0].first - 1.0) < 1e-12);
  CHECK(std::abs(table.entries[0].second - 1.0) < 1e-12);
}

TEST_CASE("number operator splits an equal superposition evenly") {
  auto n_op = number_operator(1, 1.0);
  auto phi = superposition01(12);
  auto table = hybrid_spectrum(n_op, PhasePoint{{0.0, 0.0}}, phi, 12);
  CHECK(std::abs(interval_probability(table, {0.0, 0.01}) - 0.5) < 1e-12);
  CHECK(std::abs(interval_probability(table, {1.0, 0.01}) - 0.5) < 1e-12);
  CHECK(std::abs(interval_probability(table, {5.0, 6.0}) - 1.0) < 1e-12);
}

TEST_CASE("quarter-period position at unit center reduces to the bare one") {
  const int dim = 40;
  auto b = closed_form_evolved('q', 1.0, std::acos(-1.0) / 2.0, 1.0);
  auto phi = coherent_state(0.0, 0.0, dim, 1.0);
  auto table = hybrid_spectrum(b, PhasePoint{{1.0, 0.0}}, phi, dim);
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> direct(
      position_matrix(dim, 1.0));
  REQUIRE(table.entries.size() == static_cast<std::size_t>(dim));
  double total = 0.0;
  for (int k = 0; k < dim; ++k) {
    CHECK(std::abs(table.entries[k].first - direct.eigenvalues()[k]) < 1e-9);
    total += table.entries[k].second;
  }
  CHECK(std::abs(total - 1.0) < 1e-12);
}

TEST_CASE("squared position merges the symmetric eigenvalue pairs") {
  const int dim = 16;
  const auto g = GeneratorId::position(2);
  auto b = HybridObservable::quantum(
      1, 1.0,
      OperatorPolynomial::monomial({1.0, 0.0}, Word{g, g}, 1.0));
  auto phi = coherent_state(0.0, 0.0, dim, 1.0);
  auto table = hybrid_spectrum(b, PhasePoint{{0.0, 0.0}}, phi, dim);
  CHECK(table.entries.size() == static_cast<std::size_t>(dim / 2));
}

TEST_CASE("non-Hermitian evaluations are rejected") {
  auto b = HybridObservable::quantum(
      1, 1.0,
      OperatorPolynomial::monomial({0.0, 1.0},
                                   Word{GeneratorId::position(2)}, 1.0));
  auto phi = coherent_state(0.0, 0.0, 8, 1.0);
  CHECK_THROWS_AS(hybrid_spectrum(b, PhasePoint{{0.0, 0.0}}, phi, 8),
                  std::invalid_argument);
}

TEST_CASE("state dimension must match the requested one") {
  auto one = HybridObservable::identity(1, 1.0);
  auto phi = coherent_state(0.0, 0.0, 8, 1.0);
  CHECK_THROWS_AS(hybrid_spectrum(one, PhasePoint{{0.0, 0.0}}, phi, 12),
                  std::invalid_argument);
}

TEST_CASE("interval probabilities use closed endpoints") {
  auto table = toy_table();
  CHECK(interval_probability(table, {0.5, 0.5}) == 0.5);
  CHECK(interval_probability(table, {1.5, 0.5}) == 1.0);
  CHECK(interval_probability(table, {1.0, 0.1}) == 0.5);
  CHECK(interval_probability(table, {1.5, 5.0}) == 1.0);
  CHECK(interval_probability(table, {3.0, 0.5}) == 0.0);
}

TEST_CASE("intervals require a positive half-width") {
  const Interval degenerate{1.0, 0.0};
  const Interval backwards{1.0, -2.0};
  const Interval fine{1.0, 0.5};
  CHECK_THROWS_AS(degenerate.validate(), std::invalid_argument);
  CHECK_THROWS_AS(backwards.validate(), std::invalid_argument);
  CHECK_NOTHROW(fine.validate());
}

TEST_CASE("additive factors match their closed forms") {
  CHECK(std::abs(epsilon_factor(0.99, 1) - std::pow(0.01, 0.25)) < 1e-15);
  CHECK(std::abs(epsilon_factor(0.9999, 1) - 0.1) < 1e-12);
  CHECK(std::abs(epsilon_factor(0.9999, 2) -
                 std::pow(1e-4, 0.375) / std::sqrt(3.0)) < 1e-15);
  CHECK(epsilon_factor(0.9999, 2) < epsilon_factor(0.9999, 1));
  CHECK_THROWS_AS(epsilon_factor(1.0, 1), std::invalid_argument);
  CHECK_THROWS_AS(epsilon_factor(-0.1, 1), std::invalid_argument);
  CHECK_THROWS_AS(epsilon_factor(0.5, 3), std::invalid_argument);
}

TEST_CASE("sandwich bounds on a concentrated spectrum") {
  SpectrumTable table{{{0.0, 1.0}}, 1e-9};
  auto b = sandwich_bounds(table, {0.0, 1.0}, 0.1, 0.9999, 1);
  CHECK(std::abs(b.lower - 0.99) < 1e-12);
  CHECK(b.upper == 1.0);
  CHECK(std::abs(b.upper_raw - 1.21) < 1e-12);
  CHECK(std::abs(b.lower_raw - 0.99) < 1e-12);
}

TEST_CASE("sandwich bounds reject too narrow intervals") {
  auto table = toy_table();
  CHECK_THROWS_AS(sandwich_bounds(table, {1.0, 1.0}, 0.5, 0.99, 1),
                  std::invalid_argument);
  CHECK_THROWS_AS(sandwich_bounds(table, {1.0, 1.0}, 0.6, 0.99, 1),
                  std::invalid_argument);
  CHECK_NOTHROW(sandwich_bounds(table, {1.0, 1.0}, 0.49, 0.99, 1));
  CHECK_THROWS_AS(sandwich_bounds(table, {1.0, 1.0}, -0.1, 0.99, 1),
                  std::invalid_argument);
}

TEST_CASE("lower never exceeds upper and both stay in the unit interval") {
  std::mt19937 rng(7771);
  std::uniform_real_distribution<double> value_dist(-3.0, 3.0);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  for (int trial = 0; trial < 50; ++trial) {
    std::vector<double> values(6), probs(6);
    double total = 0.0;
    for (int k = 0; k < 6; ++k) {
      values[k] = value_dist(rng);
      probs[k] = unit(rng) + 1e-3;
      total += probs[k];
    }
    std::sort(values.begin(), values.end());
    SpectrumTable table{{}, 1e-9};
    for (int k = 0; k < 6; ++k) {
      table.entries.emplace_back(values[k], probs[k] / total);
    }
    const double delta = unit(rng) * 0.3;
    const Interval i0{value_dist(rng), 2.0 * delta + 0.1 + unit(rng)};
    for (double p : {0.0, 0.9, 0.9999}) {
      for (int l : {1, 2}) {
        auto b = sandwich_bounds(table, i0, delta, p, l);
        CHECK(b.lower <= b.upper);
        CHECK(b.lower >= 0.0);
        CHECK(b.upper <= 1.0);
        CHECK(b.lower_raw <= b.lower + 1e-15);
        CHECK(b.upper_raw >= b.upper - 1e-15);
      }
    }
  }
}

TEST_CASE("widening the target interval never lowers either bound") {
  auto table = toy_table();
  const double delta = 0.05;
  auto narrow = sandwich_bounds(table, {1.2, 0.4}, delta, 0.99, 1);
  auto wide = sandwich_bounds(table, {1.2, 1.2}, delta, 0.99, 1);
  CHECK(wide.lower >= narrow.lower);
  CHECK(wide.upper >= narrow.upper);
}

TEST_CASE("bounds tighten as the spread shrinks") {
  SpectrumTable table{{{0.0, 0.7}, {1.5, 0.3}}, 1e-9};
  const Interval i0{0.0, 1.0};
  auto loose = sandwich_bounds(table, i0, 0.4, 0.9999, 1);
  auto tight = sandwich_bounds(table, i0, 0.05, 0.9999, 1);
  CHECK(tight.lower >= loose.lower);
  CHECK(tight.upper <= loose.upper);
}

TEST_CASE("evolved momentum keeps a unit-sum spectrum") {
  const int dim = 24;
  auto b = closed_form_evolved('P', 0.1, 0.8, 1.0);
  auto phi = coherent_state(0.4, -0.3, dim, 1.0);
  auto table = hybrid_spectrum(b, PhasePoint{{0.7, -0.2}}, phi, dim);
  double total = 0.0;
  for (const auto& [value, prob] : table.entries) total += prob;
  CHECK(std::abs(total - 1.0) < 1e-12);
}

}  // TEST_SUITE
