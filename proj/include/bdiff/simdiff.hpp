#pragma once

#include <vector>

#include "bdiff/model.hpp"

namespace bdiff {

/// One (size weight, similarity ratio) observation.
struct WeightedRatio {
    uint64_t s = 0;
    double r = 0.0;
};

/// Which side's value size supplies the weight s.
enum class WeightSide { Pre, Backup };

/// Content-overlap similarity of two byte strings in [0, 1]:
///   r = 2 * sum_v min(count_a(v), count_b(v)) / (|a| + |b|)
/// over byte values v; 1.0 for two empty inputs. Order-insensitive by
/// construction and symmetric.
double similarity_ratio(std::span<const uint8_t> a, std::span<const uint8_t> b);

/// Weighted arithmetic mean of the ratios; 0.0 for an empty list.
/// All-zero weights on a nonempty list raise ZeroWeightSum.
double weighted_mean_ratio(const std::vector<WeightedRatio>& items);

/// Weighted standard deviation around weighted_mean_ratio; 0.0 for empty.
double weighted_std_ratio(const std::vector<WeightedRatio>& items);

struct SimilarityAggregate {
    double mean = 0.0;
    double std_dev = 0.0;
    size_t skipped = 0;  // records whose values could not be loaded
};

/// Fills r and s on every mismatch record by loading both value versions,
/// then returns the weighted aggregates. Records whose values are no longer
/// loadable keep r absent and are excluded (counted in `skipped`).
SimilarityAggregate aggregate_run_similarity(std::vector<MismatchRecord>& records,
                                             const Snapshot& pre, const Snapshot& backup,
                                             WeightSide side = WeightSide::Pre);

}  // namespace bdiff
