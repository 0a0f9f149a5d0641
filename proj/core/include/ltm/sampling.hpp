#pragma once

#include <cstdint>

#include "ltm/model.hpp"
#include "ltm/sample_set.hpp"

namespace ltm {

/// Ancestral sampling root -> leaves. Categorical observations come back
/// sparse (one-hot columns), gaussian ones dense. Deterministic per seed.
SampleSet sample_model(const GroundTruthModel& model, long n, std::uint64_t seed);

}  // namespace ltm
