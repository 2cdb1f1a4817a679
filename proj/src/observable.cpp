#include "hybrid/observable.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>
#include <stdexcept>

namespace hybrid {

namespace {

constexpr Complex kImag{0.0, 1.0};

double falling_factorial(int n, int k) {
  double out = 1.0;
  for (int j = 0; j < k; ++j) out *= static_cast<double>(n - j);
  return out;
}

double factorial(int n) {
  double out = 1.0;
  for (int j = 2; j <= n; ++j) out *= static_cast<double>(j);
  return out;
}

// Steps a multi-derivative index through 0..max componentwise; returns
// false (and resets to all zeros) once the odometer wraps.
bool advance(std::vector<int>& idx, const std::vector<int>& max) {
  for (std::size_t i = 0; i < idx.size(); ++i) {
    if (idx[i] < max[i]) {
      ++idx[i];
      std::fill(idx.begin(), idx.begin() + static_cast<long>(i), 0);
      return true;
    }
  }
  std::fill(idx.begin(), idx.end(), 0);
  return false;
}

void check_quantum_sector(const OperatorPolynomial& op, int n_classical) {
  for (const auto& [w, c] : op.terms()) {
    for (const auto& g : w) {
      if (g.is_classical(n_classical)) {
        throw std::invalid_argument(
            "operator coefficient contains classical-sector generator " +
            std::to_string(g.index()));
      }
    }
  }
}

}  // namespace

ClassicalMultiIndex::ClassicalMultiIndex(std::vector<int> exponents)
    : exps_(std::move(exponents)) {
  if (exps_.size() % 2 != 0) {
    throw std::invalid_argument("multi-index length must be even");
  }
  for (int e : exps_) {
    if (e < 0) throw std::invalid_argument("negative exponent");
  }
}

ClassicalMultiIndex ClassicalMultiIndex::constant(int n_classical) {
  return ClassicalMultiIndex(std::vector<int>(2 * n_classical, 0));
}

int ClassicalMultiIndex::degree() const {
  return std::accumulate(exps_.begin(), exps_.end(), 0);
}

std::size_t ClassicalMultiIndex::slot_of_generator(int i, int n_classical) {
  if (i < 1 || i > 2 * n_classical) {
    throw std::invalid_argument("classical generator index out of range: " +
                                std::to_string(i));
  }
  return i % 2 == 1 ? static_cast<std::size_t>((i - 1) / 2)
                    : static_cast<std::size_t>(n_classical + i / 2 - 1);
}

std::string ClassicalMultiIndex::str() const {
  std::ostringstream out;
  const int n = n_classical();
  bool any = false;
  for (int m = 0; m < n; ++m) {
    if (exps_[m]) {
      out << "q" << (m + 1) << "^" << exps_[m] << " ";
      any = true;
    }
  }
  for (int m = 0; m < n; ++m) {
    if (exps_[n + m]) {
      out << "p" << (m + 1) << "^" << exps_[n + m] << " ";
      any = true;
    }
  }
  if (!any) return "1";
  auto s = out.str();
  s.pop_back();
  return s;
}

std::strong_ordering operator<=>(const ClassicalMultiIndex& a,
                                 const ClassicalMultiIndex& b) {
  if (auto c = a.degree() <=> b.degree(); c != 0) return c;
  if (auto c = a.exps_.size() <=> b.exps_.size(); c != 0) return c;
  for (std::size_t i = 0; i < a.exps_.size(); ++i) {
    if (auto c = a.exps_[i] <=> b.exps_[i]; c != 0) return c;
  }
  return std::strong_ordering::equal;
}

HybridObservable::HybridObservable(int n_classical, double hbar)
    : n_classical_(n_classical), hbar_(hbar) {
  if (n_classical < 0) {
    throw std::invalid_argument("n_classical must be non-negative");
  }
  if (!(hbar > 0.0)) {
    throw std::invalid_argument("hbar must be positive");
  }
}

HybridObservable HybridObservable::zero(int n_classical, double hbar) {
  return HybridObservable(n_classical, hbar);
}

HybridObservable HybridObservable::identity(int n_classical, double hbar) {
  HybridObservable h(n_classical, hbar);
  h.add_term(ClassicalMultiIndex::constant(n_classical),
             OperatorPolynomial::identity(hbar));
  return h;
}

HybridObservable HybridObservable::classical_generator(int n_classical, int i,
                                                       double hbar) {
  HybridObservable h(n_classical, hbar);
  std::vector<int> exps(2 * n_classical, 0);
  exps[ClassicalMultiIndex::slot_of_generator(i, n_classical)] = 1;
  h.add_term(ClassicalMultiIndex(std::move(exps)),
             OperatorPolynomial::identity(hbar));
  return h;
}

HybridObservable HybridObservable::quantum(int n_classical, double hbar,
                                           const OperatorPolynomial& op) {
  HybridObservable h(n_classical, hbar);
  h.add_term(ClassicalMultiIndex::constant(n_classical), op);
  return h;
}

int HybridObservable::classical_degree() const {
  return terms_.empty() ? 0 : terms_.rbegin()->first.degree();
}

OperatorPolynomial HybridObservable::coefficient(
    const ClassicalMultiIndex& idx) const {
  auto it = terms_.find(idx);
  return it == terms_.end() ? OperatorPolynomial::zero(hbar_) : it->second;
}

HybridObservable& HybridObservable::add_term(const ClassicalMultiIndex& idx,
                                             const OperatorPolynomial& op) {
  if (static_cast<int>(idx.size()) != 2 * n_classical_) {
    throw std::invalid_argument("multi-index length does not match sector");
  }
  if (op.hbar() != hbar_) {
    throw std::invalid_argument("coefficient hbar mismatch");
  }
  check_quantum_sector(op, n_classical_);
  if (op.is_zero()) return *this;
  auto it = terms_.find(idx);
  if (it == terms_.end()) {
    terms_.emplace(idx, op);
  } else {
    it->second += op;
    if (it->second.is_zero()) terms_.erase(it);
  }
  return *this;
}

HybridObservable& HybridObservable::operator+=(const HybridObservable& other) {
  check_compatible_(other);
  for (const auto& [idx, op] : other.terms_) add_term(idx, op);
  return *this;
}

HybridObservable& HybridObservable::operator-=(const HybridObservable& other) {
  check_compatible_(other);
  for (const auto& [idx, op] : other.terms_) {
    add_term(idx, op * Complex{-1.0, 0.0});
  }
  return *this;
}

HybridObservable& HybridObservable::operator*=(Complex scalar) {
  for (auto it = terms_.begin(); it != terms_.end();) {
    it->second *= scalar;
    it = it->second.is_zero() ? terms_.erase(it) : std::next(it);
  }
  return *this;
}

std::string HybridObservable::str() const {
  if (terms_.empty()) return "0";
  std::ostringstream out;
  bool first = true;
  for (const auto& [idx, op] : terms_) {
    if (!first) out << "  +  ";
    first = false;
    out << idx.str() << " * [" << op.str() << "]";
  }
  return out.str();
}

void HybridObservable::check_compatible_(const HybridObservable& other) const {
  if (other.n_classical_ != n_classical_) {
    throw std::invalid_argument("classical sector size mismatch");
  }
  if (other.hbar_ != hbar_) {
    throw std::invalid_argument("hbar mismatch");
  }
}

HybridObservable star(const HybridObservable& a, const HybridObservable& b) {
  if (a.n_classical() != b.n_classical()) {
    throw std::invalid_argument("classical sector size mismatch");
  }
  if (a.hbar() != b.hbar()) {
    throw std::invalid_argument("hbar mismatch");
  }
  const int n = a.n_classical();
  const double hbar = a.hbar();
  const Complex half_ih = kImag * hbar * 0.5;

  HybridObservable out(n, hbar);
  for (const auto& [alpha, a_op] : a.terms()) {
    for (const auto& [beta, b_op] : b.terms()) {
      OperatorPolynomial op_prod = multiply(a_op, b_op);
      if (op_prod.is_zero()) continue;

      // Derivative order per mode: u_i differentiates q on the left factor
      // and p on the right, v_i the reverse with a sign flip.
      std::vector<int> umax(n), vmax(n);
      for (int i = 0; i < n; ++i) {
        umax[i] = std::min(alpha[i], beta[n + i]);
        vmax[i] = std::min(alpha[n + i], beta[i]);
      }
      std::vector<int> u(n, 0), v(n, 0);
      do {
        do {
          Complex scale{1.0, 0.0};
          std::vector<int> exps(2 * n);
          int order = 0;
          for (int i = 0; i < n; ++i) {
            order += u[i] + v[i];
            scale *= falling_factorial(alpha[i], u[i]) *
                     falling_factorial(beta[n + i], u[i]) /
                     factorial(u[i]) *
                     falling_factorial(alpha[n + i], v[i]) *
                     falling_factorial(beta[i], v[i]) / factorial(v[i]);
            if (v[i] % 2 == 1) scale = -scale;
            exps[i] = alpha[i] - u[i] + beta[i] - v[i];
            exps[n + i] = alpha[n + i] - v[i] + beta[n + i] - u[i];
          }
          for (int k = 0; k < order; ++k) scale *= half_ih;
          out.add_term(ClassicalMultiIndex(std::move(exps)),
                       op_prod * scale);
        } while (advance(v, vmax));
      } while (advance(u, umax));
    }
  }
  return out;
}

HybridObservable bracket(const HybridObservable& a, const HybridObservable& b) {
  return star(a, b) - star(b, a);
}

HybridObservable ordinary_product(const HybridObservable& a,
                                  const HybridObservable& b) {
  if (a.n_classical() != b.n_classical()) {
    throw std::invalid_argument("classical sector size mismatch");
  }
  if (a.hbar() != b.hbar()) {
    throw std::invalid_argument("hbar mismatch");
  }
  const int n = a.n_classical();
  HybridObservable out(n, a.hbar());
  for (const auto& [alpha, a_op] : a.terms()) {
    for (const auto& [beta, b_op] : b.terms()) {
      std::vector<int> exps(2 * n);
      for (int i = 0; i < 2 * n; ++i) exps[i] = alpha[i] + beta[i];
      out.add_term(ClassicalMultiIndex(std::move(exps)),
                   multiply(a_op, b_op));
    }
  }
  return out;
}

HybridObservable poisson_ordered(const HybridObservable& a,
                                 const HybridObservable& b) {
  const int n = a.n_classical();
  HybridObservable out(n, a.hbar());
  for (int m = 1; m <= n; ++m) {
    const int iq = 2 * m - 1;
    const int ip = 2 * m;
    out += ordinary_product(classical_derivative(a, iq),
                            classical_derivative(b, ip));
    out -= ordinary_product(classical_derivative(a, ip),
                            classical_derivative(b, iq));
  }
  return out;
}

HybridObservable bt_bracket(const HybridObservable& a,
                            const HybridObservable& b) {
  HybridObservable out = ordinary_product(a, b) - ordinary_product(b, a);
  HybridObservable pb = poisson_ordered(a, b) - poisson_ordered(b, a);
  pb *= kImag * a.hbar() * 0.5;
  out += pb;
  return out;
}

HybridObservable dagger(const HybridObservable& a) {
  HybridObservable out(a.n_classical(), a.hbar());
  for (const auto& [idx, op] : a.terms()) out.add_term(idx, adjoint(op));
  return out;
}

HybridObservable classical_derivative(const HybridObservable& a, int i) {
  const std::size_t slot =
      ClassicalMultiIndex::slot_of_generator(i, a.n_classical());
  HybridObservable out(a.n_classical(), a.hbar());
  for (const auto& [idx, op] : a.terms()) {
    const int e = idx[slot];
    if (e == 0) continue;
    auto exps = idx.exponents();
    exps[slot] -= 1;
    out.add_term(ClassicalMultiIndex(std::move(exps)),
                 op * Complex{static_cast<double>(e), 0.0});
  }
  return out;
}

OperatorPolynomial evaluate_classical(const HybridObservable& a,
                                      const PhasePoint& pt) {
  if (pt.values.size() != static_cast<std::size_t>(2 * a.n_classical())) {
    throw std::invalid_argument("phase point dimension mismatch");
  }
  OperatorPolynomial out(a.hbar());
  for (const auto& [idx, op] : a.terms()) {
    double factor = 1.0;
    for (std::size_t s = 0; s < idx.size(); ++s) {
      for (int k = 0; k < idx[s]; ++k) factor *= pt.values[s];
    }
    out += op * Complex{factor, 0.0};
  }
  return out;
}

double coefficient_norm(const HybridObservable& a) {
  double sum = 0.0;
  for (const auto& [idx, op] : a.terms()) sum += symmetric_norm(op);
  return sum;
}

bool is_hermitian(const HybridObservable& a, double tol) {
  return coefficient_norm(a - dagger(a)) <= tol;
}

}  // namespace hybrid
