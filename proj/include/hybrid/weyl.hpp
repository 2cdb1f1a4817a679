#pragma once

#include <complex>
#include <compare>
#include <cstdint>
#include <initializer_list>
#include <map>
#include <string>
#include <vector>

namespace hybrid {

using Complex = std::complex<double>;

// Coefficients with magnitude below this are dropped after every operation.
// The value sits far below double-precision noise on purpose: truncated star
// exponentials carry coefficients spanning thirty orders of magnitude, and
// derivative contractions between high-degree terms amplify whatever gets
// dropped.  Pruning at 1e-14 leaves those products with residual errors near
// 1e-5; pruning at 1e-30 pushes the same residuals to the roundoff floor.
inline constexpr double kCoeffPruneThreshold = 1e-30;

// Canonical generator of the Heisenberg algebra, identified by a 1-based
// index: generator 2m-1 is the position of mode m, generator 2m its
// momentum. Modes 1..N form the classical sector and modes N+1..N+M the
// quantum sector; N is context the caller supplies, not state.
class GeneratorId {
 public:
  enum class Kind { position, momentum };

  GeneratorId() = default;
  explicit GeneratorId(int index);

  static GeneratorId position(int mode) { return GeneratorId(2 * mode - 1); }
  static GeneratorId momentum(int mode) { return GeneratorId(2 * mode); }

  int index() const { return index_; }
  int mode() const { return (index_ + 1) / 2; }
  Kind kind() const {
    return index_ % 2 == 1 ? Kind::position : Kind::momentum;
  }
  bool is_classical(int n_classical) const { return mode() <= n_classical; }

  friend auto operator<=>(const GeneratorId&, const GeneratorId&) = default;

 private:
  int index_ = 1;
};

// Ordered product of generators. The empty word is the identity.
class Word {
 public:
  Word() = default;
  Word(std::initializer_list<GeneratorId> factors) : factors_(factors) {}
  explicit Word(std::vector<GeneratorId> factors)
      : factors_(std::move(factors)) {}

  std::size_t size() const { return factors_.size(); }
  bool empty() const { return factors_.empty(); }
  int degree() const { return static_cast<int>(factors_.size()); }
  const GeneratorId& operator[](std::size_t i) const { return factors_[i]; }

  auto begin() const { return factors_.begin(); }
  auto end() const { return factors_.end(); }

  const std::vector<GeneratorId>& factors() const { return factors_; }

  // Normal order means generator indices are non-decreasing: modes ascend
  // and within a mode the position precedes the momentum.
  bool is_normal_ordered() const;

  Word reversed() const;
  Word sorted() const;
  Word concat(const Word& other) const;

  std::string str() const;

  friend bool operator==(const Word&, const Word&) = default;
  // Graded ordering: shorter words first, then lexicographic by index.
  friend std::strong_ordering operator<=>(const Word& a, const Word& b);

 private:
  std::vector<GeneratorId> factors_;
};

// Complex-linear combination of normal-ordered words, with the deformation
// parameter hbar attached. All keys are kept in normal order and all stored
// coefficients exceed the pruning threshold in magnitude.
class OperatorPolynomial {
 public:
  explicit OperatorPolynomial(double hbar = 1.0);

  static OperatorPolynomial zero(double hbar = 1.0);
  static OperatorPolynomial identity(double hbar = 1.0);
  static OperatorPolynomial generator(GeneratorId g, double hbar = 1.0);
  // Builds c * w, normal-ordering w first.
  static OperatorPolynomial monomial(Complex c, const Word& w,
                                     double hbar = 1.0);

  double hbar() const { return hbar_; }
  const std::map<Word, Complex>& terms() const { return terms_; }
  Complex coeff(const Word& w) const;
  bool is_zero() const { return terms_.empty(); }
  int degree() const;
  std::size_t size() const { return terms_.size(); }

  // Highest term in the graded word order. Requires a non-zero polynomial.
  std::pair<Word, Complex> leading_term() const;

  OperatorPolynomial& operator+=(const OperatorPolynomial& other);
  OperatorPolynomial& operator-=(const OperatorPolynomial& other);
  OperatorPolynomial& operator*=(Complex scalar);

  friend OperatorPolynomial operator+(OperatorPolynomial a,
                                      const OperatorPolynomial& b) {
    a += b;
    return a;
  }
  friend OperatorPolynomial operator-(OperatorPolynomial a,
                                      const OperatorPolynomial& b) {
    a -= b;
    return a;
  }
  friend OperatorPolynomial operator*(Complex c, OperatorPolynomial a) {
    a *= c;
    return a;
  }
  friend OperatorPolynomial operator*(OperatorPolynomial a, Complex c) {
    a *= c;
    return a;
  }

  std::string str() const;

 private:
  friend OperatorPolynomial normal_order(const Word& w, double hbar);
  friend OperatorPolynomial multiply(const OperatorPolynomial& a,
                                     const OperatorPolynomial& b);
  friend OperatorPolynomial adjoint(const OperatorPolynomial& a);
  friend std::map<Word, Complex> to_symmetric_basis(
      const OperatorPolynomial& a);

  void add_term_(const Word& w, Complex c);  // no pruning
  void erase_(const Word& w);
  void prune_();

  std::map<Word, Complex> terms_;
  double hbar_ = 1.0;
};

// Rewrites a word into normal order with the per-mode relation
// p_m q_m = q_m p_m - i hbar; generators of distinct modes commute.
OperatorPolynomial normal_order(const Word& w, double hbar);

// Operator product, result in normal form. Throws on mismatched hbar.
OperatorPolynomial multiply(const OperatorPolynomial& a,
                            const OperatorPolynomial& b);

// multiply(a, b) - multiply(b, a).
OperatorPolynomial commutator(const OperatorPolynomial& a,
                              const OperatorPolynomial& b);

// Average of the products over all orderings of the factors of w.
OperatorPolynomial symmetrize(const Word& w, double hbar);

// Reverses each word, conjugates coefficients, normal-orders.
OperatorPolynomial adjoint(const OperatorPolynomial& a);

// Expansion of a in the symmetrized basis, keyed by the sorted word.
// Reconstruction through symmetrize reproduces a exactly up to pruning.
std::map<Word, Complex> to_symmetric_basis(const OperatorPolynomial& a);

OperatorPolynomial from_symmetric_basis(const std::map<Word, Complex>& coeffs,
                                        double hbar);

// sqrt(sum |c|^2) over the symmetric-basis coefficients of a.
double symmetric_norm(const OperatorPolynomial& a);

// Largest coefficient magnitude of a - b in normal form.
double max_coeff_difference(const OperatorPolynomial& a,
                            const OperatorPolynomial& b);

}  // namespace hybrid
