// Acceptance suite: runs every verification criterion at its contractual
// problem size and tolerance, printing one pass/fail line per criterion.
#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <iostream>

#include "fraclab/verification.hpp"

using namespace fraclab;

namespace {

void report(const CheckResult& r) {
    std::cout << (r.pass ? "[PASS] " : "[FAIL] ") << "criterion " << r.id << ": " << r.name
              << " -- " << r.detail << "\n";
    CHECK_MESSAGE(r.pass, r.name, ": ", r.detail);
}

}  // namespace

TEST_CASE("criterion 1: constant-weight identity") { report(check_constant_weight_identity(false)); }

TEST_CASE("criterion 2: Dirichlet rate, slope and envelope") { report(check_dirichlet_rate(false)); }

TEST_CASE("criterion 3: Neumann rate, slope and envelope") { report(check_neumann_rate(false)); }

TEST_CASE("criterion 4: general-p convergence and cross-check") {
    report(check_general_p_convergence(false));
}

TEST_CASE("criterion 5: sandwich bound") { report(check_sandwich_bound(false)); }

TEST_CASE("criterion 6: Neumann-Dirichlet ordering") { report(check_ordering(false)); }

TEST_CASE("criterion 7: Weyl growth") { report(check_weyl_growth(false)); }

TEST_CASE("criterion 8: Poincare scaling") { report(check_poincare_scaling(false)); }

TEST_CASE("criterion 9: oscillating-integral lemma") { report(check_oscillation_lemma(false)); }

TEST_CASE("criterion 10: boundary layer") { report(check_boundary_layer(false)); }

TEST_CASE("criterion 11: pointwise p-inequality") { report(check_pointwise_inequality(false)); }

TEST_CASE("criterion 12: numerical hygiene") { report(check_numerical_hygiene(false)); }
