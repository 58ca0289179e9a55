#pragma once

#include <cstdint>
#include <random>
#include <string>
#include <vector>

#include "qnls/config.hpp"

namespace qnls {

struct InvariantCheck {
    std::string name;
    double measured = 0.0;   // worst residual or ratio observed
    double tolerance = 0.0;
    bool passed = false;
    bool skipped = false;    // not applicable to this configuration
    std::string detail;
};

struct VerifyReport {
    GroundStateResult ground_state;
    std::vector<InvariantCheck> checks;

    bool all_passed() const;
    /// First failing check, or nullptr.
    const InvariantCheck* first_failure() const;
};

/// Random pair in {P > 0}: sums of one to three radial Gaussian bumps per
/// component with random signs, centres and widths. Draws until P > 0.
FieldPair random_admissible_pair(const GridPtr& grid, std::mt19937_64& rng, double length_scale);

/// Uniform double in [lo, hi) from the top 53 bits (same stream on every platform).
double uniform(std::mt19937_64& rng, double lo, double hi);

/// Runs the invariant suite on the configured (n, kappa) ground state. When
/// 'preset' is given it is used instead of a fresh solve.
VerifyReport run_verify(const RunConfig& cfg, const GroundStateResult* preset = nullptr);

}  // namespace qnls
