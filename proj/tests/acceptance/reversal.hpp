#ifndef TWISTGAS_ACCEPTANCE_REVERSAL_HPP
#define TWISTGAS_ACCEPTANCE_REVERSAL_HPP

#include <cstdint>
#include <vector>

#include "twistgas/core.hpp"

namespace acceptance {

struct ReversalResult {
  double roundtrip = 0.0;  // worst max-norm distance, reversible shear
  double duality = 0.0;    // worst max-norm distance, tan-center with negated lambda
  double double_roundtrip = 0.0;  // same roundtrip in plain double, for reference
};

/// Runs both reversal checks from each start in 600-bit floating point.
ReversalResult reversal_checks(const std::vector<twistgas::PhaseState<double>>& starts,
                               double lambda, std::uint64_t events);

}  // namespace acceptance

#endif  // TWISTGAS_ACCEPTANCE_REVERSAL_HPP
