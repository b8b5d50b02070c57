#pragma once

#include <ostream>
#include <string>
#include <vector>

namespace fraclab {

/// One row of the verify-all table.
struct CheckResult {
    std::string id;
    std::string name;
    bool pass = false;
    std::string detail;
    double seconds = 0.0;
};

/// The twelve acceptance checks. quick == true shrinks problem sizes for a
/// fast smoke pass (the full sizes are the contractual ones).
CheckResult check_constant_weight_identity(bool quick);
CheckResult check_dirichlet_rate(bool quick);
CheckResult check_neumann_rate(bool quick);
CheckResult check_general_p_convergence(bool quick);
CheckResult check_sandwich_bound(bool quick);
CheckResult check_ordering(bool quick);
CheckResult check_weyl_growth(bool quick);
CheckResult check_poincare_scaling(bool quick);
CheckResult check_oscillation_lemma(bool quick);
CheckResult check_boundary_layer(bool quick);
CheckResult check_pointwise_inequality(bool quick);
CheckResult check_numerical_hygiene(bool quick);

/// Runs every check in order, streaming one pass/fail line per check to
/// `progress` when given.
std::vector<CheckResult> run_verification(bool quick, std::ostream* progress = nullptr);

}  // namespace fraclab
