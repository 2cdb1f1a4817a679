#include "hybrid/maps.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>
#include <stdexcept>
#include <vector>

namespace hybrid {

ClassicalPolynomial::ClassicalPolynomial(int n_modes, double hbar)
    : n_modes_(n_modes), hbar_(hbar) {
  if (n_modes < 1) throw std::invalid_argument("n_modes must be positive");
  if (!(hbar > 0.0)) throw std::invalid_argument("hbar must be positive");
}

Complex ClassicalPolynomial::coefficient(const ClassicalMultiIndex& idx) const {
  auto it = terms_.find(idx);
  return it == terms_.end() ? Complex{0.0, 0.0} : it->second;
}

ClassicalPolynomial& ClassicalPolynomial::add_term(
    const ClassicalMultiIndex& idx, Complex c) {
  if (static_cast<int>(idx.size()) != 2 * n_modes_) {
    throw std::invalid_argument("multi-index length does not match n_modes");
  }
  auto [it, inserted] = terms_.try_emplace(idx, c);
  if (!inserted) it->second += c;
  if (std::abs(it->second) < kCoeffPruneThreshold) terms_.erase(it);
  return *this;
}

ClassicalPolynomial& ClassicalPolynomial::operator+=(
    const ClassicalPolynomial& other) {
  if (other.n_modes_ != n_modes_ || other.hbar_ != hbar_) {
    throw std::invalid_argument("polynomial shape mismatch");
  }
  for (const auto& [idx, c] : other.terms_) add_term(idx, c);
  return *this;
}

ClassicalPolynomial& ClassicalPolynomial::operator-=(
    const ClassicalPolynomial& other) {
  if (other.n_modes_ != n_modes_ || other.hbar_ != hbar_) {
    throw std::invalid_argument("polynomial shape mismatch");
  }
  for (const auto& [idx, c] : other.terms_) add_term(idx, -c);
  return *this;
}

std::string ClassicalPolynomial::str() const {
  if (terms_.empty()) return "0";
  std::ostringstream out;
  bool first = true;
  for (const auto& [idx, c] : terms_) {
    if (!first) out << " + ";
    first = false;
    out << '(' << c.real() << (c.imag() < 0 ? "-" : "+") << std::abs(c.imag())
        << "i) " << idx.str();
  }
  return out.str();
}

Word word_of_multi_index(const ClassicalMultiIndex& idx) {
  const int n = idx.n_classical();
  std::vector<GeneratorId> f;
  for (int m = 1; m <= n; ++m) {
    for (int k = 0; k < idx[static_cast<std::size_t>(m - 1)]; ++k) {
      f.push_back(GeneratorId::position(m));
    }
    for (int k = 0; k < idx[static_cast<std::size_t>(n + m - 1)]; ++k) {
      f.push_back(GeneratorId::momentum(m));
    }
  }
  return Word(std::move(f));
}

ClassicalMultiIndex multi_index_of_word(const Word& w, int n_modes) {
  std::vector<int> exps(2 * static_cast<std::size_t>(n_modes), 0);
  for (const auto& g : w) {
    if (g.mode() > n_modes) {
      throw std::invalid_argument("word mode exceeds n_modes");
    }
    const std::size_t slot =
        g.kind() == GeneratorId::Kind::position
            ? static_cast<std::size_t>(g.mode() - 1)
            : static_cast<std::size_t>(n_modes + g.mode() - 1);
    ++exps[slot];
  }
  return ClassicalMultiIndex(std::move(exps));
}

HybridObservable dequantize_hq(const OperatorPolynomial& a, int n_classical) {
  HybridObservable out(n_classical, a.hbar());
  for (const auto& [w, c] : to_symmetric_basis(a)) {
    // Sorted words list classical-sector generators first, so the sector
    // split is a prefix split. Full symmetrization factorizes across
    // commuting sectors.
    std::vector<GeneratorId> cls, qnt;
    for (const auto& g : w) {
      (g.is_classical(n_classical) ? cls : qnt).push_back(g);
    }
    OperatorPolynomial coeff = symmetrize(Word(std::move(qnt)), a.hbar());
    coeff *= c;
    out.add_term(multi_index_of_word(Word(std::move(cls)), n_classical),
                 coeff);
  }
  return out;
}

OperatorPolynomial to_operator(const HybridObservable& h) {
  std::map<Word, Complex> basis;
  for (const auto& [idx, op] : h.terms()) {
    const Word cls = word_of_multi_index(idx);
    for (const auto& [w, c] : to_symmetric_basis(op)) {
      basis[cls.concat(w).sorted()] += c;
    }
  }
  return from_symmetric_basis(basis, h.hbar());
}

HybridObservable quantize_hq(const ClassicalPolynomial& c, int n_classical) {
  if (n_classical > c.n_modes()) {
    throw std::invalid_argument("n_classical exceeds n_modes");
  }
  HybridObservable out(n_classical, c.hbar());
  for (const auto& [idx, coeff] : c.terms()) {
    std::vector<int> cls(2 * static_cast<std::size_t>(n_classical), 0);
    std::vector<GeneratorId> qnt;
    const int n = c.n_modes();
    for (int m = 1; m <= n; ++m) {
      const int eq = idx[static_cast<std::size_t>(m - 1)];
      const int ep = idx[static_cast<std::size_t>(n + m - 1)];
      if (m <= n_classical) {
        cls[static_cast<std::size_t>(m - 1)] = eq;
        cls[static_cast<std::size_t>(n_classical + m - 1)] = ep;
      } else {
        for (int k = 0; k < eq; ++k) qnt.push_back(GeneratorId::position(m));
        for (int k = 0; k < ep; ++k) qnt.push_back(GeneratorId::momentum(m));
      }
    }
    OperatorPolynomial op = symmetrize(Word(std::move(qnt)), c.hbar());
    op *= coeff;
    out.add_term(ClassicalMultiIndex(std::move(cls)), op);
  }
  return out;
}

ClassicalPolynomial dequantize_total(const OperatorPolynomial& a,
                                     int n_modes) {
  ClassicalPolynomial out(n_modes, a.hbar());
  for (const auto& [w, c] : to_symmetric_basis(a)) {
    out.add_term(multi_index_of_word(w, n_modes), c);
  }
  return out;
}

}  // namespace hybrid
