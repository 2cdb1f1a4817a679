#include <cmath>
#include <random>

#include "doctest.h"
#include "hybrid/maps.hpp"
#include "hybrid/observable.hpp"
#include "test_util.hpp"

using namespace hybrid;
using testutil::random_poly;

namespace {

const GeneratorId q1 = GeneratorId::position(1);
const GeneratorId p1 = GeneratorId::momentum(1);
const GeneratorId Q2 = GeneratorId::position(2);
const GeneratorId P2 = GeneratorId::momentum(2);

}  // namespace

TEST_SUITE("maps") {

TEST_CASE("dequantize_hq sends classical symmetric words to monomials") {
  auto h = dequantize_hq(symmetrize(Word{q1, p1}, 1.0), 1);
  CHECK(h.terms().size() == 1);
  auto coeff = h.coefficient(ClassicalMultiIndex({1, 1}));
  CHECK(coeff.coeff(Word{}) == Complex{1.0, 0.0});
}

TEST_CASE("dequantize_hq of normal-ordered q p picks up the half trace") {
  auto qp = multiply(OperatorPolynomial::generator(q1),
                     OperatorPolynomial::generator(p1));
  auto h = dequantize_hq(qp, 1);
  CHECK(h.coefficient(ClassicalMultiIndex({1, 1})).coeff(Word{}) ==
        Complex{1.0, 0.0});
  CHECK(h.coefficient(ClassicalMultiIndex({0, 0})).coeff(Word{}) ==
        Complex{0.0, 0.5});
  // Matches the star product of the dequantized factors.
  auto q = HybridObservable::classical_generator(1, 1, 1.0);
  auto p = HybridObservable::classical_generator(1, 2, 1.0);
  CHECK(coefficient_norm(h - star(q, p)) < 1e-13);
}

TEST_CASE("dequantize_hq of the identity is the hybrid identity") {
  auto h = dequantize_hq(OperatorPolynomial::identity(1.0), 1);
  CHECK(coefficient_norm(h - HybridObservable::identity(1, 1.0)) == 0.0);
}

TEST_CASE("dequantize_hq keeps quantum factors as operators") {
  auto mixed = multiply(OperatorPolynomial::generator(q1),
                        OperatorPolynomial::generator(Q2));
  auto h = dequantize_hq(mixed, 1);
  CHECK(h.terms().size() == 1);
  auto coeff = h.coefficient(ClassicalMultiIndex({1, 0}));
  CHECK(coeff.coeff(Word{Q2}) == Complex{1.0, 0.0});
}

TEST_CASE("quantize_hq passes classical factors and symmetrizes quantum ones") {
  ClassicalPolynomial sym(2, 1.0);
  sym.add_term(ClassicalMultiIndex({1, 1, 0, 0}), 1.0);  // q * X_Q
  auto h = quantize_hq(sym, 1);
  CHECK(h.coefficient(ClassicalMultiIndex({1, 0})).coeff(Word{Q2}) ==
        Complex{1.0, 0.0});

  ClassicalPolynomial sym2(2, 1.0);
  sym2.add_term(ClassicalMultiIndex({0, 1, 0, 1}), 1.0);  // X_Q * P_Q
  auto h2 = quantize_hq(sym2, 1);
  auto coeff = h2.coefficient(ClassicalMultiIndex({0, 0}));
  CHECK(max_coeff_difference(coeff, symmetrize(Word{Q2, P2}, 1.0)) == 0.0);
}

TEST_CASE("quantize_hq builds the coupled-oscillator hamiltonian") {
  const double k = 0.1;
  ClassicalPolynomial sym(2, 1.0);
  sym.add_term(ClassicalMultiIndex({2, 0, 0, 0}), 0.5);      // q^2 / 2
  sym.add_term(ClassicalMultiIndex({0, 0, 2, 0}), 0.5);      // x^2 / 2
  sym.add_term(ClassicalMultiIndex({0, 1, 1, 0}), k);        // k x X_Q
  auto h = quantize_hq(sym, 1);

  auto q = HybridObservable::classical_generator(1, 1, 1.0);
  auto x = HybridObservable::classical_generator(1, 2, 1.0);
  auto Q = HybridObservable::quantum(1, 1.0,
                                     OperatorPolynomial::generator(Q2, 1.0));
  auto expected = Complex{0.5, 0.0} * ordinary_product(x, x) +
                  Complex{0.5, 0.0} * ordinary_product(q, q) +
                  Complex{k, 0.0} * ordinary_product(x, Q);
  CHECK(coefficient_norm(h - expected) < 1e-14);
}

TEST_CASE("dequantize_total maps both sectors to commuting monomials") {
  auto c = dequantize_total(symmetrize(Word{Q2, P2}, 1.0), 2);
  CHECK(c.terms().size() == 1);
  CHECK(c.coefficient(ClassicalMultiIndex({0, 1, 0, 1})) == Complex{1.0, 0.0});

  auto qp = multiply(OperatorPolynomial::generator(q1),
                     OperatorPolynomial::generator(p1));
  auto c2 = dequantize_total(qp, 1);
  CHECK(c2.coefficient(ClassicalMultiIndex({1, 1})) == Complex{1.0, 0.0});
  CHECK(c2.coefficient(ClassicalMultiIndex({0, 0})) == Complex{0.0, 0.5});
}

TEST_CASE("dequantize_hq intertwines products with star") {
  std::mt19937 rng(61);
  for (int t = 0; t < 40; ++t) {
    auto a = random_poly(rng, 1.0, 2, 4, 2);
    auto b = random_poly(rng, 1.0, 2, 4, 2);
    auto lhs = dequantize_hq(multiply(a, b), 1);
    auto rhs = star(dequantize_hq(a, 1), dequantize_hq(b, 1));
    CHECK(coefficient_norm(lhs - rhs) < 1e-10);
  }
}

TEST_CASE("dequantize_hq intertwines commutators with the bracket") {
  std::mt19937 rng(67);
  for (int t = 0; t < 25; ++t) {
    auto a = random_poly(rng, 1.0, 2, 4, 2);
    auto b = random_poly(rng, 1.0, 2, 4, 2);
    auto lhs = dequantize_hq(commutator(a, b), 1);
    auto rhs = bracket(dequantize_hq(a, 1), dequantize_hq(b, 1));
    CHECK(coefficient_norm(lhs - rhs) < 1e-10);
  }
}

TEST_CASE("dequantize_hq intertwines adjoint with dagger") {
  std::mt19937 rng(71);
  for (int t = 0; t < 30; ++t) {
    auto a = random_poly(rng, 1.0, 2, 4, 3);
    auto lhs = dequantize_hq(adjoint(a), 1);
    auto rhs = dagger(dequantize_hq(a, 1));
    CHECK(coefficient_norm(lhs - rhs) < 1e-12);
  }
}

TEST_CASE("half quantization composed with total dequantization is dequantize_hq") {
  std::mt19937 rng(73);
  for (int t = 0; t < 30; ++t) {
    auto a = random_poly(rng, 1.0, 2, 4, 3);
    auto via_total = quantize_hq(dequantize_total(a, 2), 1);
    auto direct = dequantize_hq(a, 1);
    CHECK(coefficient_norm(via_total - direct) < 1e-12);
  }
}

TEST_CASE("to_operator inverts dequantize_hq") {
  std::mt19937 rng(79);
  for (int t = 0; t < 30; ++t) {
    auto a = random_poly(rng, 1.0, 2, 4, 3);
    auto back = to_operator(dequantize_hq(a, 1));
    CHECK(max_coeff_difference(a, back) < 1e-11);
  }
}

TEST_CASE("multi-index and word conversions are mutually inverse") {
  auto idx = ClassicalMultiIndex({2, 1, 0, 3});
  CHECK(multi_index_of_word(word_of_multi_index(idx), 2) == idx);
  CHECK_THROWS_AS(multi_index_of_word(Word{GeneratorId::position(3)}, 2),
                  std::invalid_argument);
}

}  // TEST_SUITE
