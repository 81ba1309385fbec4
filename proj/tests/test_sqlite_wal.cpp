#include <doctest.h>

#include <sqlite3.h>

#include "bdiff/errors.hpp"
#include "bdiff/fixturegen.hpp"
#include "bdiff/hash.hpp"
#include "bdiff/sqlite_util.hpp"
#include "bdiff/wal.hpp"

using namespace bdiff;

namespace {

// Scripted in-memory database builder (independent of the fixture module).
Bytes build_db(const std::vector<std::string>& statements) {
    sqlite3* db = nullptr;
    REQUIRE(sqlite3_open(":memory:", &db) == SQLITE_OK);
    for (const auto& sql : statements)
        REQUIRE(sqlite3_exec(db, sql.c_str(), nullptr, nullptr, nullptr) == SQLITE_OK);
    sqlite3_int64 n = 0;
    unsigned char* image = sqlite3_serialize(db, "main", &n, 0);
    REQUIRE(image != nullptr);
    Bytes out(image, image + n);
    sqlite3_free(image);
    sqlite3_close(db);
    return out;
}

}  // namespace

TEST_CASE("logical dump is order-independent and canonical") {
    Bytes a = build_db({"CREATE TABLE t(x INTEGER, y TEXT);",
                        "INSERT INTO t VALUES(1,'one');", "INSERT INTO t VALUES(2,'two');"});
    Bytes b = build_db({"CREATE TABLE t(x INTEGER, y TEXT);",
                        "INSERT INTO t VALUES(2,'two');", "INSERT INTO t VALUES(1,'one');"});
    CHECK(logical_dump(a) == logical_dump(b));

    Bytes c = build_db({"CREATE TABLE t(x INTEGER, y TEXT);",
                        "INSERT INTO t VALUES(1,'one');", "INSERT INTO t VALUES(3,'three');"});
    CHECK(logical_dump(a) != logical_dump(c));
}

TEST_CASE("non-database bytes are rejected") {
    CHECK_THROWS_AS(SqliteDb(to_bytes("not a database at all, sorry")), NotDatabase);
    CHECK_THROWS_AS(logical_dump(to_bytes("")), NotDatabase);
}

TEST_CASE("wal fixture: main file lacks the pending rows, checkpoint has them") {
    WalFixture fx = gen_wal_fixture(5);
    LogicalContent before = logical_dump(fx.db);
    LogicalContent after = logical_dump(fx.checkpointed);
    REQUIRE(before.count("items"));
    REQUIRE(after.count("items"));
    CHECK(after.at("items").size() > before.at("items").size());
}

TEST_CASE("merge_wal folds committed frames to match the engine's checkpoint") {
    for (uint64_t seed : {1ULL, 2ULL, 3ULL, 9ULL}) {
        WalFixture fx = gen_wal_fixture(seed);
        WalMergeInfo info;
        Bytes merged = merge_wal(fx.db, fx.wal, &info);
        CHECK(info.commit_frames > 0);
        CHECK(info.frames_applied == info.frames_valid);
        CHECK(logical_dump(merged) == logical_dump(fx.checkpointed));
        CHECK(logical_dump(merged) != logical_dump(fx.db));
    }
}

TEST_CASE("merge_wal with an empty log is the identity on logical content") {
    WalFixture fx = gen_wal_fixture(4);
    Bytes merged = merge_wal(fx.db, Bytes{});
    CHECK(merged == Bytes(fx.db.begin(), fx.db.end()));
}

TEST_CASE("merge_wal does not modify its inputs") {
    WalFixture fx = gen_wal_fixture(6);
    Digest db_before = sha256(fx.db);
    Digest wal_before = sha256(fx.wal);
    (void)merge_wal(fx.db, fx.wal);
    CHECK(sha256(fx.db) == db_before);
    CHECK(sha256(fx.wal) == wal_before);
}

TEST_CASE("torn trailing frame is dropped at the last commit point") {
    WalFixture fx = gen_wal_fixture(7);
    // cut into the final frame
    Bytes torn(fx.wal.begin(), fx.wal.end() - 100);
    WalMergeInfo info;
    Bytes merged = merge_wal(fx.db, torn, &info);
    CHECK(info.truncated_tail);
    // dropping the last commit frame of a single-commit log reverts to the
    // main file; with several commits, to the last intact one
    LogicalContent lm = logical_dump(merged);
    LogicalContent lc = logical_dump(fx.checkpointed);
    LogicalContent lb = logical_dump(fx.db);
    CHECK(lm.at("items").size() >= lb.at("items").size());
    CHECK(lm.at("items").size() <= lc.at("items").size());
    // a fully torn log (only header) is the identity
    Bytes header_only(fx.wal.begin(), fx.wal.begin() + 32);
    CHECK(logical_dump(merge_wal(fx.db, header_only)) == lb);
}

TEST_CASE("a log header failing its checksum holds no usable frames") {
    WalFixture fx = gen_wal_fixture(13);
    Bytes corrupted = fx.wal;
    corrupted[26] ^= 0xff;  // clobber the stored header checksum
    WalMergeInfo info;
    Bytes merged = merge_wal(fx.db, corrupted, &info);
    CHECK(info.header_invalid);
    CHECK(info.frames_applied == 0);
    CHECK(logical_dump(merged) == logical_dump(fx.db));
}

TEST_CASE("wal belonging to a different database is rejected") {
    WalFixture fx = gen_wal_fixture(8);
    Bytes garbage = to_bytes(std::string(64, 'x'));
    CHECK_THROWS_AS(merge_wal(fx.db, garbage), WalMismatch);
    Bytes short_wal = to_bytes("tooshort");
    CHECK_THROWS_AS(merge_wal(fx.db, short_wal), WalMismatch);
}

TEST_CASE("normalized log stays valid for the engine itself") {
    // gen_wal_fixture already re-salts the log; the checkpointed member was
    // produced by the engine from the re-salted pair, so agreement between
    // merge_wal and the checkpoint (checked above) also certifies the
    // normalization. Here: determinism.
    WalFixture a = gen_wal_fixture(11);
    WalFixture b = gen_wal_fixture(11);
    CHECK(a.db == b.db);
    CHECK(a.wal == b.wal);
    CHECK(a.checkpointed == b.checkpointed);
}

TEST_CASE("explain_db_mismatch distinguishes the three verdicts") {
    WalFixture fx = gen_wal_fixture(12);

    SUBCASE("identical bytes are logically equal") {
        auto cmp = explain_db_mismatch(fx.db, std::nullopt, fx.db);
        CHECK(cmp.verdict == DbVerdict::LogicallyEqual);
    }
    SUBCASE("pending log frames explain the checkpointed backup") {
        auto cmp = explain_db_mismatch(fx.db, std::span<const uint8_t>(fx.wal), fx.checkpointed);
        CHECK(cmp.verdict == DbVerdict::WalExplained);
    }
    SUBCASE("empty log, identical db") {
        Bytes empty;
        auto cmp = explain_db_mismatch(fx.db, std::span<const uint8_t>(empty), fx.db);
        CHECK(cmp.verdict == DbVerdict::LogicallyEqual);
    }
    SUBCASE("a planted foreign row is not explained") {
        Bytes foreign = build_db({"CREATE TABLE items(id INTEGER PRIMARY KEY, label TEXT, payload BLOB);",
                                  "INSERT INTO items VALUES(999,'planted',x'00');"});
        auto cmp = explain_db_mismatch(fx.db, std::span<const uint8_t>(fx.wal), foreign);
        CHECK(cmp.verdict == DbVerdict::Different);
    }
    SUBCASE("unparseable backup side degrades to Different") {
        auto cmp = explain_db_mismatch(fx.db, std::nullopt, to_bytes("garbage"));
        CHECK(cmp.verdict == DbVerdict::Different);
        CHECK(!cmp.diagnostic.empty());
    }
}
