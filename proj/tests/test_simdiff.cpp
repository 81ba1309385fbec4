#include <doctest.h>

#include <cmath>

#include "bdiff/errors.hpp"
#include "bdiff/fixturegen.hpp"
#include "bdiff/simdiff.hpp"
#include "oracles.hpp"

using namespace bdiff;

TEST_CASE("similarity ratio on the defining examples") {
    CHECK(similarity_ratio(to_bytes("abc"), to_bytes("abc")) == 1.0);
    CHECK(similarity_ratio(to_bytes("abcd"), to_bytes("bcde")) == doctest::Approx(0.75).epsilon(1e-12));
    CHECK(similarity_ratio(to_bytes(""), to_bytes("")) == 1.0);
    CHECK(similarity_ratio(to_bytes("aaaa"), to_bytes("bbbb")) == 0.0);
    CHECK(similarity_ratio(to_bytes("ab"), to_bytes("")) == 0.0);
}

TEST_CASE("similarity ratio is symmetric, permutation-invariant, and matches the oracle") {
    DeterministicRng rng(555);
    for (int i = 0; i < 500; ++i) {
        Bytes a = rng.bytes(size_t(rng.below(600)), rng.below(2) == 0);
        Bytes b = rng.bytes(size_t(rng.below(600)), rng.below(2) == 0);
        double r = similarity_ratio(a, b);
        CHECK(r == doctest::Approx(oracle::overlap_ratio(a, b)).epsilon(1e-12));
        CHECK(r == doctest::Approx(similarity_ratio(b, a)).epsilon(1e-12));
        CHECK(r >= 0.0);
        CHECK(r <= 1.0);
        // order does not matter
        Bytes shuffled = a;
        for (size_t j = shuffled.size(); j > 1; --j)
            std::swap(shuffled[j - 1], shuffled[rng.below(j)]);
        CHECK(similarity_ratio(shuffled, b) == doctest::Approx(r).epsilon(1e-12));
        CHECK(similarity_ratio(a, a) == 1.0);
    }
}

TEST_CASE("weighted mean on the defining examples") {
    CHECK(weighted_mean_ratio({{5, 0.7951}}) == doctest::Approx(0.7951).epsilon(1e-12));
    CHECK(weighted_mean_ratio({{1, 1.0}, {1, 0.0}}) == doctest::Approx(0.5).epsilon(1e-12));
    CHECK(weighted_mean_ratio({}) == 0.0);
    CHECK_THROWS_AS(weighted_mean_ratio({{0, 0.5}, {0, 0.9}}), ZeroWeightSum);
}

TEST_CASE("weighted std on the defining examples") {
    CHECK(weighted_std_ratio({{7, 0.3}}) == 0.0);
    CHECK(weighted_std_ratio({{1, 1.0}, {1, 0.0}}) == doctest::Approx(0.5).epsilon(1e-12));
    CHECK(weighted_std_ratio({{3, 1.0}, {1, 0.0}}) ==
          doctest::Approx(std::sqrt((3 * 0.0625 + 1 * 0.5625) / 4.0)).epsilon(1e-12));
    CHECK(weighted_std_ratio({{3, 1.0}, {1, 0.0}}) == doctest::Approx(0.4330).epsilon(1e-4));
    CHECK(weighted_std_ratio({}) == 0.0);
}

TEST_CASE("equal weights reduce to the unweighted mean") {
    DeterministicRng rng(8);
    for (int trial = 0; trial < 50; ++trial) {
        std::vector<WeightedRatio> items;
        double sum = 0;
        int n = 1 + int(rng.below(20));
        for (int i = 0; i < n; ++i) {
            double r = rng.unit();
            items.push_back({17, r});
            sum += r;
        }
        CHECK(weighted_mean_ratio(items) == doctest::Approx(sum / n).epsilon(1e-12));
    }
}

TEST_CASE("std is zero iff all weighted ratios are equal") {
    std::vector<WeightedRatio> same = {{3, 0.42}, {9, 0.42}, {1, 0.42}};
    CHECK(weighted_std_ratio(same) == doctest::Approx(0.0).epsilon(1e-12));
    std::vector<WeightedRatio> diff = {{3, 0.42}, {9, 0.43}};
    CHECK(weighted_std_ratio(diff) > 1e-12);
    // zero-weight outlier does not break the equality case
    std::vector<WeightedRatio> zw = {{3, 0.42}, {0, 0.9}, {5, 0.42}};
    CHECK(weighted_std_ratio(zw) == doctest::Approx(0.0).epsilon(1e-12));
}

TEST_CASE("aggregate fills r and s from loaded values") {
    SnapshotBuilder pb(std::make_shared<MemBlobStore>());
    pb.add("/f1", EntryKind::FileBased, std::string_view("abcd"));
    pb.add("/f2", EntryKind::FileBased, std::string_view("xxxx"));
    Snapshot pre = pb.build();
    SnapshotBuilder bb(std::make_shared<MemBlobStore>());
    bb.add("/f1", EntryKind::FileBased, std::string_view("bcde"));
    bb.add("/f2", EntryKind::FileBased, std::string_view("xxxx!"));
    Snapshot backup = bb.build();

    std::vector<MismatchRecord> records(2);
    records[0].name = "/f1";
    records[1].name = "/f2";
    SimilarityAggregate agg = aggregate_run_similarity(records, pre, backup, WeightSide::Pre);

    // hand-recomputed from the raw bytes
    double r1 = 0.75;
    double r2 = 2.0 * 4 / 9.0;
    double mean = (4 * r1 + 4 * r2) / 8.0;
    double var = (4 * (r1 - mean) * (r1 - mean) + 4 * (r2 - mean) * (r2 - mean)) / 8.0;
    CHECK(records[0].r == doctest::Approx(r1).epsilon(1e-12));
    CHECK(records[0].s == 4);
    CHECK(agg.mean == doctest::Approx(mean).epsilon(1e-12));
    CHECK(agg.std_dev == doctest::Approx(std::sqrt(var)).epsilon(1e-12));
    CHECK(agg.skipped == 0);
}

TEST_CASE("weight side switches to the backup value length") {
    SnapshotBuilder pb(std::make_shared<MemBlobStore>());
    pb.add("/f", EntryKind::FileBased, std::string_view("aa"));
    Snapshot pre = pb.build();
    SnapshotBuilder bb(std::make_shared<MemBlobStore>());
    bb.add("/f", EntryKind::FileBased, std::string_view("aaaaaaaa"));
    Snapshot backup = bb.build();
    std::vector<MismatchRecord> records(1);
    records[0].name = "/f";
    aggregate_run_similarity(records, pre, backup, WeightSide::Backup);
    CHECK(records[0].s == 8);
}

TEST_CASE("zero records aggregate to zeros") {
    Snapshot empty = SnapshotBuilder(std::make_shared<MemBlobStore>()).build();
    std::vector<MismatchRecord> records;
    SimilarityAggregate agg = aggregate_run_similarity(records, empty, empty);
    CHECK(agg.mean == 0.0);
    CHECK(agg.std_dev == 0.0);
}

TEST_CASE("unloadable values are skipped with r absent") {
    SnapshotBuilder pb(std::make_shared<MemBlobStore>());
    pb.add("/ok", EntryKind::FileBased, std::string_view("abcd"));
    Snapshot pre = pb.build();
    SnapshotBuilder bb(std::make_shared<MemBlobStore>());
    bb.add("/ok", EntryKind::FileBased, std::string_view("abce"));
    Snapshot backup = bb.build();
    std::vector<MismatchRecord> records(2);
    records[0].name = "/ok";
    records[1].name = "/vanished";
    SimilarityAggregate agg = aggregate_run_similarity(records, pre, backup);
    CHECK(agg.skipped == 1);
    CHECK(!records[1].r.has_value());
    CHECK(records[0].r.has_value());
}

TEST_CASE("single-mismatch case reproduces the published pair exactly") {
    // One mismatched value with r = 0.7951 renders as (0.7951, 0.0000).
    std::vector<WeightedRatio> items = {{58, 0.7951}};
    double mean = weighted_mean_ratio(items);
    double std_dev = weighted_std_ratio(items);
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.4f", mean);
    CHECK(std::string(buf) == "0.7951");
    std::snprintf(buf, sizeof(buf), "%.4f", std_dev);
    CHECK(std::string(buf) == "0.0000");
}

TEST_CASE("aggregate-consistent synthetic records reproduce the published iOS pair") {
    // 71 equal-weight records, two distinct ratio levels solved from the
    // published mean/std: 60 at mean+d1, 11 at mean-(60/11)d1.
    const double mean = 0.9310, stdv = 0.1351;
    const double var = stdv * stdv;
    // solve var = (60 d1^2 + 11 d2^2)/71 with the mean constraint 60 d1 = 11 d2
    const double d1x = std::sqrt(var * 71.0 / (60.0 * (1.0 + 60.0 / 11.0)));
    std::vector<WeightedRatio> items;
    for (int i = 0; i < 60; ++i) items.push_back({1, mean + d1x});
    for (int i = 0; i < 11; ++i) items.push_back({1, mean - d1x * 60.0 / 11.0});
    CHECK(weighted_mean_ratio(items) == doctest::Approx(0.9310).epsilon(1e-4));
    CHECK(weighted_std_ratio(items) == doctest::Approx(0.1351).epsilon(1e-4));
}
