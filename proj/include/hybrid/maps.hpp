#pragma once

#include <map>
#include <string>

#include "hybrid/observable.hpp"
#include "hybrid/weyl.hpp"

namespace hybrid {

// Commutative polynomial over every mode, the image of total
// dequantization. Multi-indices run over 2*n_modes exponents ordered
// (q_1..q_n, p_1..p_n); quantum modes keep their generator numbering, so
// no renaming happens between the symbol and operator pictures.
class ClassicalPolynomial {
 public:
  ClassicalPolynomial(int n_modes, double hbar);

  int n_modes() const { return n_modes_; }
  double hbar() const { return hbar_; }
  const std::map<ClassicalMultiIndex, Complex>& terms() const {
    return terms_;
  }
  bool is_zero() const { return terms_.empty(); }
  Complex coefficient(const ClassicalMultiIndex& idx) const;

  ClassicalPolynomial& add_term(const ClassicalMultiIndex& idx, Complex c);
  ClassicalPolynomial& operator+=(const ClassicalPolynomial& other);
  ClassicalPolynomial& operator-=(const ClassicalPolynomial& other);

  std::string str() const;

 private:
  int n_modes_;
  double hbar_;
  std::map<ClassicalMultiIndex, Complex> terms_;
};

// Half dequantization: expands a in the symmetric basis and sends each
// classical-sector symmetric factor to the commuting monomial while the
// quantum-sector factor stays an operator. Linear and invertible.
HybridObservable dequantize_hq(const OperatorPolynomial& a, int n_classical);

// Inverse of dequantize_hq: promotes every classical monomial back to its
// symmetrized word and multiplies it onto the quantum coefficient.
OperatorPolynomial to_operator(const HybridObservable& h);

// Half quantization: classical-sector variables pass through, quantum
// monomials become Weyl-symmetrized words.
HybridObservable quantize_hq(const ClassicalPolynomial& c, int n_classical);

// Total dequantization: every symmetric factor becomes a commuting
// monomial over n_modes modes.
ClassicalPolynomial dequantize_total(const OperatorPolynomial& a,
                                     int n_modes);

// Sorted word whose exponent profile matches idx.
Word word_of_multi_index(const ClassicalMultiIndex& idx);

// Exponent profile of a word over the first n_modes modes.
ClassicalMultiIndex multi_index_of_word(const Word& w, int n_modes);

}  // namespace hybrid
