#pragma once

#include <map>
#include <string>
#include <vector>

#include "hybrid/weyl.hpp"

namespace hybrid {

// Exponent vector of a classical monomial over N modes, ordered
// (q_1 .. q_N, p_1 .. p_N).
class ClassicalMultiIndex {
 public:
  ClassicalMultiIndex() = default;
  explicit ClassicalMultiIndex(std::vector<int> exponents);
  static ClassicalMultiIndex constant(int n_classical);

  int n_classical() const { return static_cast<int>(exps_.size()) / 2; }
  std::size_t size() const { return exps_.size(); }
  int operator[](std::size_t slot) const { return exps_[slot]; }
  const std::vector<int>& exponents() const { return exps_; }
  int degree() const;
  bool is_constant() const { return degree() == 0; }

  // Slot of the exponent belonging to classical generator i (1-based, odd
  // for positions, even for momenta).
  static std::size_t slot_of_generator(int i, int n_classical);

  std::string str() const;

  friend bool operator==(const ClassicalMultiIndex&,
                         const ClassicalMultiIndex&) = default;
  // Graded ordering: total degree first, then lexicographic.
  friend std::strong_ordering operator<=>(const ClassicalMultiIndex& a,
                                          const ClassicalMultiIndex& b);

 private:
  std::vector<int> exps_;
};

// Point of the classical phase space, ordered like ClassicalMultiIndex.
struct PhasePoint {
  std::vector<double> values;
};

// Polynomial over the classical sector whose coefficients are quantum
// operator polynomials. Coefficients never touch classical generators and
// zero coefficients are never stored.
class HybridObservable {
 public:
  HybridObservable(int n_classical, double hbar);

  static HybridObservable zero(int n_classical, double hbar);
  static HybridObservable identity(int n_classical, double hbar);
  // Classical generator i in 1..2N as an observable.
  static HybridObservable classical_generator(int n_classical, int i,
                                              double hbar);
  // Purely quantum observable; op must avoid modes 1..N.
  static HybridObservable quantum(int n_classical, double hbar,
                                  const OperatorPolynomial& op);

  int n_classical() const { return n_classical_; }
  double hbar() const { return hbar_; }
  const std::map<ClassicalMultiIndex, OperatorPolynomial>& terms() const {
    return terms_;
  }
  bool is_zero() const { return terms_.empty(); }
  int classical_degree() const;
  OperatorPolynomial coefficient(const ClassicalMultiIndex& idx) const;

  HybridObservable& add_term(const ClassicalMultiIndex& idx,
                             const OperatorPolynomial& op);

  HybridObservable& operator+=(const HybridObservable& other);
  HybridObservable& operator-=(const HybridObservable& other);
  HybridObservable& operator*=(Complex scalar);

  friend HybridObservable operator+(HybridObservable a,
                                    const HybridObservable& b) {
    a += b;
    return a;
  }
  friend HybridObservable operator-(HybridObservable a,
                                    const HybridObservable& b) {
    a -= b;
    return a;
  }
  friend HybridObservable operator*(Complex c, HybridObservable a) {
    a *= c;
    return a;
  }

  std::string str() const;

 private:
  void check_compatible_(const HybridObservable& other) const;

  int n_classical_;
  double hbar_;
  std::map<ClassicalMultiIndex, OperatorPolynomial> terms_;
};

// Noncommutative star product: the classical sectors compose through the
// exponential of the mixed Poisson bi-derivative, the quantum coefficients
// through the operator product, left factors acting from the left.
HybridObservable star(const HybridObservable& a, const HybridObservable& b);

// star(a, b) - star(b, a).
HybridObservable bracket(const HybridObservable& a, const HybridObservable& b);

// Leading-order truncation of the bracket: the operator commutator plus
// (i hbar / 2) times the antisymmetrized ordered Poisson bracket. Not a
// Lie bracket; it deviates from bracket() at second order in hbar.
HybridObservable bt_bracket(const HybridObservable& a,
                            const HybridObservable& b);

// Term-by-term product with no derivative corrections; the coefficient of
// a multiplies from the left.
HybridObservable ordinary_product(const HybridObservable& a,
                                  const HybridObservable& b);

// sum_i (d_{q_i} a o d_{p_i} b - d_{p_i} a o d_{q_i} b) with o the ordered
// product above.
HybridObservable poisson_ordered(const HybridObservable& a,
                                 const HybridObservable& b);

// Hermitian adjoint: conjugates classical coefficients through the adjoint
// of each operator coefficient.
HybridObservable dagger(const HybridObservable& a);

// Partial derivative along classical generator i in 1..2N.
HybridObservable classical_derivative(const HybridObservable& a, int i);

// Substitutes numbers for the classical generators, leaving an operator.
OperatorPolynomial evaluate_classical(const HybridObservable& a,
                                      const PhasePoint& pt);

// Sum over classical monomials of the l2 norm of the symmetric-basis
// coefficients of the operator part. The single size measure used for
// convergence and residual checks throughout.
double coefficient_norm(const HybridObservable& a);

bool is_hermitian(const HybridObservable& a, double tol);

}  // namespace hybrid
