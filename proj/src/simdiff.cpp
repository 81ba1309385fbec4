#include "bdiff/simdiff.hpp"

#include <array>
#include <cmath>

#include "bdiff/errors.hpp"

namespace bdiff {

double similarity_ratio(std::span<const uint8_t> a, std::span<const uint8_t> b) {
    if (a.empty() && b.empty()) return 1.0;
    std::array<uint64_t, 256> ca{}, cb{};
    for (uint8_t v : a) ++ca[v];
    for (uint8_t v : b) ++cb[v];
    uint64_t matches = 0;
    for (size_t v = 0; v < 256; ++v) matches += std::min(ca[v], cb[v]);
    return 2.0 * double(matches) / double(a.size() + b.size());
}

double weighted_mean_ratio(const std::vector<WeightedRatio>& items) {
    if (items.empty()) return 0.0;
    double weight_sum = 0.0;
    double acc = 0.0;
    for (const auto& it : items) {
        weight_sum += double(it.s);
        acc += double(it.s) * it.r;
    }
    if (weight_sum == 0.0) throw ZeroWeightSum("all weights are zero over a nonempty list");
    return acc / weight_sum;
}

double weighted_std_ratio(const std::vector<WeightedRatio>& items) {
    if (items.empty()) return 0.0;
    double mean = weighted_mean_ratio(items);
    double weight_sum = 0.0;
    double acc = 0.0;
    for (const auto& it : items) {
        weight_sum += double(it.s);
        acc += double(it.s) * (it.r - mean) * (it.r - mean);
    }
    return std::sqrt(acc / weight_sum);
}

SimilarityAggregate aggregate_run_similarity(std::vector<MismatchRecord>& records,
                                             const Snapshot& pre, const Snapshot& backup,
                                             WeightSide side) {
    SimilarityAggregate out;
    std::vector<WeightedRatio> items;
    items.reserve(records.size());
    for (auto& rec : records) {
        Bytes pre_value, backup_value;
        try {
            pre_value = pre.load_value(rec.name);
            backup_value = backup.load_value(rec.name);
        } catch (const Error& err) {
            rec.r.reset();
            rec.diagnostic = err.what();
            ++out.skipped;
            continue;
        }
        rec.r = similarity_ratio(pre_value, backup_value);
        rec.s = side == WeightSide::Pre ? pre_value.size() : backup_value.size();
        items.push_back({rec.s, *rec.r});
    }
    // An all-zero weight sum here means every mismatched value was empty on
    // the weighting side; report zeros rather than failing the run.
    bool any_weight = false;
    for (const auto& it : items)
        if (it.s > 0) any_weight = true;
    if (!items.empty() && any_weight) {
        out.mean = weighted_mean_ratio(items);
        out.std_dev = weighted_std_ratio(items);
    }
    return out;
}

}  // namespace bdiff
