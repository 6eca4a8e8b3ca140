#pragma once

#include <cstdint>
#include <string>
#include <vector>

namespace persona {

struct CheckResult {
    std::string name;
    bool passed = false;
    std::string details;
};

/// Frozen first outputs of the pinned generator.
CheckResult check_rng_reference();

/// Analytic gradients against central finite differences (dropout disabled).
CheckResult check_gradients(int configurations = 100, double step = 1e-5, double tolerance = 1e-4,
                            std::uint64_t seed = 1);

/// Summary-statistics aggregation equals centralized evaluation, exactly,
/// for random partitions of a synthetic corpus into 2..8 node shards.
CheckResult check_fedeval_exactness(int rounds = 20, std::uint64_t seed = 1);

std::vector<CheckResult> run_selfchecks();

}  // namespace persona
