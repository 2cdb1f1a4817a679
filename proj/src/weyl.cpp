#include "hybrid/weyl.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>
#include <stdexcept>
#include <utility>

namespace hybrid {

namespace {

constexpr Complex kImag{0.0, 1.0};

void check_same_hbar(double a, double b) {
  if (a != b) {
    throw std::invalid_argument("operands carry different hbar values: " +
                                std::to_string(a) + " vs " +
                                std::to_string(b));
  }
}

}  // namespace

GeneratorId::GeneratorId(int index) : index_(index) {
  if (index < 1) {
    throw std::invalid_argument("generator index must be >= 1, got " +
                                std::to_string(index));
  }
}

bool Word::is_normal_ordered() const {
  return std::is_sorted(factors_.begin(), factors_.end());
}

Word Word::reversed() const {
  return Word(std::vector<GeneratorId>(factors_.rbegin(), factors_.rend()));
}

Word Word::sorted() const {
  auto f = factors_;
  std::sort(f.begin(), f.end());
  return Word(std::move(f));
}

Word Word::concat(const Word& other) const {
  auto f = factors_;
  f.insert(f.end(), other.factors_.begin(), other.factors_.end());
  return Word(std::move(f));
}

std::string Word::str() const {
  if (factors_.empty()) return "1";
  std::ostringstream out;
  for (std::size_t i = 0; i < factors_.size(); ++i) {
    if (i) out << ' ';
    const auto& g = factors_[i];
    out << (g.kind() == GeneratorId::Kind::position ? 'q' : 'p') << g.mode();
  }
  return out.str();
}

std::strong_ordering operator<=>(const Word& a, const Word& b) {
  if (auto c = a.size() <=> b.size(); c != 0) return c;
  for (std::size_t i = 0; i < a.size(); ++i) {
    if (auto c = a[i] <=> b[i]; c != 0) return c;
  }
  return std::strong_ordering::equal;
}

OperatorPolynomial::OperatorPolynomial(double hbar) : hbar_(hbar) {
  if (!(hbar > 0.0)) {
    throw std::invalid_argument("hbar must be positive");
  }
}

OperatorPolynomial OperatorPolynomial::zero(double hbar) {
  return OperatorPolynomial(hbar);
}

OperatorPolynomial OperatorPolynomial::identity(double hbar) {
  OperatorPolynomial p(hbar);
  p.terms_[Word{}] = 1.0;
  return p;
}

OperatorPolynomial OperatorPolynomial::generator(GeneratorId g, double hbar) {
  OperatorPolynomial p(hbar);
  p.terms_[Word{g}] = 1.0;
  return p;
}

OperatorPolynomial OperatorPolynomial::monomial(Complex c, const Word& w,
                                                double hbar) {
  OperatorPolynomial p = normal_order(w, hbar);
  p *= c;
  return p;
}

Complex OperatorPolynomial::coeff(const Word& w) const {
  auto it = terms_.find(w);
  return it == terms_.end() ? Complex{0.0, 0.0} : it->second;
}

int OperatorPolynomial::degree() const {
  return terms_.empty() ? 0 : terms_.rbegin()->first.degree();
}

std::pair<Word, Complex> OperatorPolynomial::leading_term() const {
  if (terms_.empty()) {
    throw std::logic_error("leading_term of the zero polynomial");
  }
  auto it = terms_.rbegin();
  return {it->first, it->second};
}

OperatorPolynomial& OperatorPolynomial::operator+=(
    const OperatorPolynomial& other) {
  check_same_hbar(hbar_, other.hbar_);
  for (const auto& [w, c] : other.terms_) add_term_(w, c);
  prune_();
  return *this;
}

OperatorPolynomial& OperatorPolynomial::operator-=(
    const OperatorPolynomial& other) {
  check_same_hbar(hbar_, other.hbar_);
  for (const auto& [w, c] : other.terms_) add_term_(w, -c);
  prune_();
  return *this;
}

OperatorPolynomial& OperatorPolynomial::operator*=(Complex scalar) {
  for (auto& [w, c] : terms_) c *= scalar;
  prune_();
  return *this;
}

std::string OperatorPolynomial::str() const {
  if (terms_.empty()) return "0";
  std::ostringstream out;
  bool first = true;
  for (const auto& [w, c] : terms_) {
    if (!first) out << " + ";
    first = false;
    out << '(' << c.real() << (c.imag() < 0 ? "-" : "+")
        << std::abs(c.imag()) << "i)";
    if (!w.empty()) out << ' ' << w.str();
  }
  return out.str();
}

void OperatorPolynomial::add_term_(const Word& w, Complex c) {
  auto [it, inserted] = terms_.try_emplace(w, c);
  if (!inserted) it->second += c;
}

void OperatorPolynomial::erase_(const Word& w) { terms_.erase(w); }

void OperatorPolynomial::prune_() {
  for (auto it = terms_.begin(); it != terms_.end();) {
    if (std::abs(it->second) < kCoeffPruneThreshold) {
      it = terms_.erase(it);
    } else {
      ++it;
    }
  }
}

OperatorPolynomial normal_order(const Word& w, double hbar) {
  OperatorPolynomial out(hbar);
  // Work queue of words with coefficients; each momentum-position swap
  // within a mode splits a word into the swapped word and a contracted
  // one carrying -i hbar.
  std::vector<std::pair<std::vector<GeneratorId>, Complex>> queue;
  queue.emplace_back(w.factors(), Complex{1.0, 0.0});
  while (!queue.empty()) {
    auto [f, c] = std::move(queue.back());
    queue.pop_back();
    std::size_t i = 0;
    bool sorted = true;
    for (; i + 1 < f.size(); ++i) {
      if (f[i + 1] < f[i]) {
        sorted = false;
        break;
      }
    }
    if (sorted) {
      out.add_term_(Word(std::move(f)), c);
      continue;
    }
    if (f[i].mode() == f[i + 1].mode()) {
      auto contracted = f;
      contracted.erase(contracted.begin() + i, contracted.begin() + i + 2);
      queue.emplace_back(std::move(contracted), c * (-kImag) * hbar);
    }
    std::swap(f[i], f[i + 1]);
    queue.emplace_back(std::move(f), c);
  }
  out.prune_();
  return out;
}

OperatorPolynomial multiply(const OperatorPolynomial& a,
                            const OperatorPolynomial& b) {
  check_same_hbar(a.hbar(), b.hbar());
  OperatorPolynomial out(a.hbar());
  for (const auto& [wa, ca] : a.terms()) {
    for (const auto& [wb, cb] : b.terms()) {
      OperatorPolynomial part = normal_order(wa.concat(wb), a.hbar());
      const Complex scale = ca * cb;
      for (const auto& [w, c] : part.terms()) out.add_term_(w, scale * c);
    }
  }
  out.prune_();
  return out;
}

OperatorPolynomial commutator(const OperatorPolynomial& a,
                              const OperatorPolynomial& b) {
  return multiply(a, b) - multiply(b, a);
}

namespace {

// Recursive form of the symmetrized product: the average over orderings of
// a multiset equals the average over which factor comes first, times the
// symmetrization of the rest. Memoized on the sorted remainder.
const OperatorPolynomial& symmetrize_rec(
    const Word& sorted, double hbar,
    std::map<Word, OperatorPolynomial>& memo) {
  auto it = memo.find(sorted);
  if (it != memo.end()) return it->second;

  OperatorPolynomial result(hbar);
  if (sorted.empty()) {
    result = OperatorPolynomial::identity(hbar);
  } else {
    const auto& f = sorted.factors();
    const double n = static_cast<double>(f.size());
    for (std::size_t i = 0; i < f.size(); ++i) {
      if (i > 0 && f[i] == f[i - 1]) continue;  // one branch per distinct g
      std::size_t count = 1;
      while (i + count < f.size() && f[i + count] == f[i]) ++count;
      auto rest = f;
      rest.erase(rest.begin() + i);
      const auto& sub = symmetrize_rec(Word(std::move(rest)), hbar, memo);
      OperatorPolynomial branch =
          multiply(OperatorPolynomial::generator(f[i], hbar), sub);
      branch *= Complex{static_cast<double>(count) / n, 0.0};
      result += branch;
    }
  }
  return memo.emplace(sorted, std::move(result)).first->second;
}

}  // namespace

OperatorPolynomial symmetrize(const Word& w, double hbar) {
  std::map<Word, OperatorPolynomial> memo;
  return symmetrize_rec(w.sorted(), hbar, memo);
}

OperatorPolynomial adjoint(const OperatorPolynomial& a) {
  OperatorPolynomial out(a.hbar());
  for (const auto& [w, c] : a.terms()) {
    OperatorPolynomial part = normal_order(w.reversed(), a.hbar());
    const Complex scale = std::conj(c);
    for (const auto& [rw, rc] : part.terms()) out.add_term_(rw, scale * rc);
  }
  out.prune_();
  return out;
}

std::map<Word, Complex> to_symmetric_basis(const OperatorPolynomial& a) {
  std::map<Word, Complex> out;
  OperatorPolynomial rest = a;
  std::map<Word, OperatorPolynomial> memo;
  while (!rest.is_zero()) {
    auto [w, c] = rest.leading_term();
    // The symmetrization of w has leading term w with unit coefficient, so
    // subtracting c * symmetrize(w) cancels the leading term and touches
    // lower-order words only. Erase explicitly to absorb roundoff.
    out[w.sorted()] += c;
    const auto& sym = symmetrize_rec(w.sorted(), a.hbar(), memo);
    OperatorPolynomial sub = sym;
    sub *= c;
    rest -= sub;
    rest.erase_(w);
  }
  for (auto it = out.begin(); it != out.end();) {
    if (std::abs(it->second) < kCoeffPruneThreshold) {
      it = out.erase(it);
    } else {
      ++it;
    }
  }
  return out;
}

OperatorPolynomial from_symmetric_basis(const std::map<Word, Complex>& coeffs,
                                        double hbar) {
  OperatorPolynomial out(hbar);
  std::map<Word, OperatorPolynomial> memo;
  for (const auto& [w, c] : coeffs) {
    OperatorPolynomial part = symmetrize_rec(w.sorted(), hbar, memo);
    part *= c;
    out += part;
  }
  return out;
}

double symmetric_norm(const OperatorPolynomial& a) {
  double sum = 0.0;
  for (const auto& [w, c] : to_symmetric_basis(a)) sum += std::norm(c);
  return std::sqrt(sum);
}

double max_coeff_difference(const OperatorPolynomial& a,
                            const OperatorPolynomial& b) {
  OperatorPolynomial d = a - b;
  double m = 0.0;
  for (const auto& [w, c] : d.terms()) m = std::max(m, std::abs(c));
  return m;
}

}  // namespace hybrid
