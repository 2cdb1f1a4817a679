#pragma once

#include <string>
#include <vector>

namespace hybrid {

struct IdentityCheck {
  std::string name;
  double max_residual;
  double threshold;
  bool pass;
};

struct IdentityReport {
  std::vector<IdentityCheck> checks;
  int trials;
  unsigned seed;
  bool pass;
};

// Randomized sweep over the algebraic laws of the star calculus: star
// associativity and unitality, bracket Jacobi, the product and bracket
// isomorphisms of half dequantization, the dagger anti-homomorphism, and
// the pure-sector reductions (scalar Moyal bracket, operator commutator).
// Each check reports the maximum residual over all trials against its
// pinned threshold. Deterministic in the seed.
IdentityReport run_identity_checks(unsigned seed, int trials);

}  // namespace hybrid
