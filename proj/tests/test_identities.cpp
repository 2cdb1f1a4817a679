#include <stdexcept>
#include <string>
#include <vector>

#include <doctest.h>

#include "hybrid/identities.hpp"

using namespace hybrid;

TEST_SUITE("identities") {
  TEST_CASE("two hundred trials stay under every pinned threshold") {
    const IdentityReport report = run_identity_checks(20260814, 200);
    CHECK(report.pass);
    CHECK(report.trials == 200);

    const std::vector<std::pair<std::string, double>> expected = {
        {"star associativity", 1e-12},
        {"star two-sided identity", 1e-12},
        {"star distributivity", 1e-12},
        {"bracket antisymmetry", 1e-12},
        {"bracket linearity", 1e-12},
        {"bracket jacobi", 1e-10},
        {"product isomorphism", 1e-10},
        {"bracket isomorphism", 1e-10},
        {"dagger anti-homomorphism", 1e-12},
        {"moyal reduction", 1e-12},
        {"commutator reduction", 1e-12},
    };
    REQUIRE(report.checks.size() == expected.size());
    for (std::size_t i = 0; i < expected.size(); ++i) {
      const IdentityCheck& check = report.checks[i];
      INFO("check: ", check.name);
      CHECK(check.name == expected[i].first);
      CHECK(check.threshold == expected[i].second);
      CHECK(check.max_residual <= check.threshold);
      CHECK(check.pass);
    }
  }

  TEST_CASE("residuals are attained, not structurally zero") {
    const IdentityReport report = run_identity_checks(11, 40);
    double star_assoc = -1.0;
    double jacobi = -1.0;
    for (const IdentityCheck& check : report.checks) {
      if (check.name == "star associativity") star_assoc = check.max_residual;
      if (check.name == "bracket jacobi") jacobi = check.max_residual;
    }
    CHECK(star_assoc > 0.0);
    CHECK(jacobi > 0.0);
  }

  TEST_CASE("a fixed seed reproduces the report exactly") {
    const IdentityReport a = run_identity_checks(42, 60);
    const IdentityReport b = run_identity_checks(42, 60);
    REQUIRE(a.checks.size() == b.checks.size());
    for (std::size_t i = 0; i < a.checks.size(); ++i) {
      CHECK(a.checks[i].max_residual == b.checks[i].max_residual);
    }
    const IdentityReport c = run_identity_checks(43, 60);
    bool any_different = false;
    for (std::size_t i = 0; i < a.checks.size(); ++i) {
      any_different =
          any_different || a.checks[i].max_residual != c.checks[i].max_residual;
    }
    CHECK(any_different);
  }

  TEST_CASE("at least one trial is required") {
    CHECK_THROWS_AS(run_identity_checks(0, 0), std::invalid_argument);
    CHECK_THROWS_AS(run_identity_checks(0, -5), std::invalid_argument);
  }
}
