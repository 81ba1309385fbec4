#include "bdiff/wal.hpp"

#include <cstring>
#include <map>

#include "bdiff/errors.hpp"
#include "bdiff/sqlite_util.hpp"

namespace bdiff {

namespace {

constexpr uint32_t kWalMagicBase = 0x377f0682;  // low bit selects checksum word order
constexpr size_t kWalHeaderSize = 32;
constexpr size_t kFrameHeaderSize = 24;
constexpr size_t kDbHeaderSize = 100;

uint32_t be32(const uint8_t* p) {
    return (uint32_t(p[0]) << 24) | (uint32_t(p[1]) << 16) | (uint32_t(p[2]) << 8) | uint32_t(p[3]);
}

uint32_t le32(const uint8_t* p) {
    return uint32_t(p[0]) | (uint32_t(p[1]) << 8) | (uint32_t(p[2]) << 16) | (uint32_t(p[3]) << 24);
}

void put_be32(uint8_t* p, uint32_t v) {
    p[0] = uint8_t(v >> 24);
    p[1] = uint8_t(v >> 16);
    p[2] = uint8_t(v >> 8);
    p[3] = uint8_t(v);
}

struct WalChecksum {
    uint32_t s0 = 0, s1 = 0;
    bool big_endian_words = false;

    // Feeds a byte run (length must be a multiple of 8). Words are read in
    // the byte order selected by the log magic; the stored checksum fields
    // themselves are always big-endian.
    void feed(const uint8_t* p, size_t n) {
        for (size_t i = 0; i + 8 <= n; i += 8) {
            uint32_t x0 = big_endian_words ? be32(p + i) : le32(p + i);
            uint32_t x1 = big_endian_words ? be32(p + i + 4) : le32(p + i + 4);
            s0 += x0 + s1;
            s1 += x1 + s0;
        }
    }
};

uint32_t db_page_size(std::span<const uint8_t> db) {
    uint32_t raw = (uint32_t(db[16]) << 8) | uint32_t(db[17]);
    return raw == 1 ? 65536u : raw;
}

}  // namespace

const char* to_string(DbVerdict v) {
    switch (v) {
        case DbVerdict::LogicallyEqual: return "logically_equal";
        case DbVerdict::WalExplained: return "wal_explained";
        default: return "different";
    }
}

Bytes merge_wal(std::span<const uint8_t> db, std::span<const uint8_t> wal, WalMergeInfo* info) {
    WalMergeInfo local;
    WalMergeInfo& out = info ? *info : local;
    out = {};

    if (!looks_like_sqlite(db)) throw NotDatabase("main file is not a database image");
    uint32_t psz = db_page_size(db);
    out.page_size = psz;

    Bytes merged(db.begin(), db.end());
    if (wal.empty()) return merged;

    if (wal.size() < kWalHeaderSize)
        throw WalMismatch("log shorter than its header (" + std::to_string(wal.size()) + " bytes)");
    uint32_t magic = be32(wal.data());
    if ((magic & 0xfffffffe) != kWalMagicBase)
        throw WalMismatch("bad log magic");
    uint32_t wal_psz = be32(wal.data() + 8);
    if (wal_psz != psz)
        throw WalMismatch("log page size " + std::to_string(wal_psz) + " != database page size " +
                          std::to_string(psz));
    uint32_t salt1 = be32(wal.data() + 16);
    uint32_t salt2 = be32(wal.data() + 20);

    WalChecksum cks;
    cks.big_endian_words = (magic & 1) != 0;
    cks.feed(wal.data(), 24);
    if (cks.s0 != be32(wal.data() + 24) || cks.s1 != be32(wal.data() + 28)) {
        // Recovery semantics: a log whose header fails its checksum holds no
        // usable frames.
        out.header_invalid = true;
        return merged;
    }

    const size_t frame_size = kFrameHeaderSize + psz;
    size_t pos = kWalHeaderSize;

    struct Applied {
        uint32_t pgno;
        const uint8_t* data;
    };
    std::map<uint32_t, const uint8_t*> pages_up_to_commit;  // latest frame per page, committed
    std::map<uint32_t, const uint8_t*> pages_pending;       // frames past the last commit
    uint32_t truncate_pages = 0;
    bool saw_commit = false;

    while (pos + frame_size <= wal.size()) {
        const uint8_t* fh = wal.data() + pos;
        ++out.frames_seen;
        if (be32(fh + 8) != salt1 || be32(fh + 12) != salt2) {
            out.truncated_tail = true;
            break;
        }
        WalChecksum trial = cks;
        trial.feed(fh, 8);
        trial.feed(fh + kFrameHeaderSize, psz);
        if (trial.s0 != be32(fh + 16) || trial.s1 != be32(fh + 20)) {
            out.truncated_tail = true;
            break;
        }
        cks = trial;
        ++out.frames_valid;
        uint32_t pgno = be32(fh);
        uint32_t commit_size = be32(fh + 4);
        pages_pending[pgno] = fh + kFrameHeaderSize;
        if (commit_size != 0) {
            ++out.commit_frames;
            saw_commit = true;
            truncate_pages = commit_size;
            for (const auto& [p, d] : pages_pending) pages_up_to_commit[p] = d;
            pages_pending.clear();
            out.frames_applied = out.frames_valid;
        }
        pos += frame_size;
    }
    if (pos < wal.size() && !out.truncated_tail) out.truncated_tail = true;
    if (!pages_pending.empty()) out.truncated_tail = true;

    if (!saw_commit) return merged;

    merged.resize(size_t(truncate_pages) * psz, 0);
    for (const auto& [pgno, data] : pages_up_to_commit) {
        if (pgno == 0 || pgno > truncate_pages) continue;
        std::memcpy(merged.data() + size_t(pgno - 1) * psz, data, psz);
    }
    // Normalize the image to a standalone committed database: rollback-mode
    // version bytes, trusted in-header page count.
    if (merged.size() >= kDbHeaderSize) {
        merged[18] = 1;
        merged[19] = 1;
        put_be32(merged.data() + 28, truncate_pages);
        std::memcpy(merged.data() + 92, merged.data() + 24, 4);
    }
    return merged;
}

DbComparison explain_db_mismatch(std::span<const uint8_t> pre_db,
                                 std::optional<std::span<const uint8_t>> pre_wal,
                                 std::span<const uint8_t> backup_db) {
    DbComparison out;
    LogicalContent backup_content;
    try {
        backup_content = logical_dump(backup_db);
    } catch (const Error& err) {
        out.verdict = DbVerdict::Different;
        out.diagnostic = std::string("backup side unreadable: ") + err.what();
        return out;
    }
    try {
        if (logical_dump(pre_db) == backup_content) {
            out.verdict = DbVerdict::LogicallyEqual;
            return out;
        }
    } catch (const Error& err) {
        out.verdict = DbVerdict::Different;
        out.diagnostic = std::string("reference side unreadable: ") + err.what();
        return out;
    }
    if (pre_wal && !pre_wal->empty()) {
        try {
            WalMergeInfo info;
            Bytes merged = merge_wal(pre_db, *pre_wal, &info);
            if (logical_dump(merged) == backup_content) {
                out.verdict = DbVerdict::WalExplained;
                out.diagnostic = "pending log frames account for the change (" +
                                 std::to_string(info.frames_applied) + " frames, " +
                                 std::to_string(info.commit_frames) + " commits)";
                return out;
            }
        } catch (const Error& err) {
            out.verdict = DbVerdict::Different;
            out.diagnostic = std::string("log merge failed: ") + err.what();
            return out;
        }
    }
    out.verdict = DbVerdict::Different;
    out.diagnostic = "logical content differs beyond pending log frames";
    return out;
}

}  // namespace bdiff
