#pragma once

#include <optional>
#include <string>

#include "bdiff/bytes.hpp"

namespace bdiff {

/// What the frame walk over a write-ahead log found.
struct WalMergeInfo {
    uint32_t page_size = 0;
    uint32_t frames_seen = 0;      // complete frames present in the file
    uint32_t frames_valid = 0;     // frames with matching salts and checksums
    uint32_t frames_applied = 0;   // frames up to the last commit point
    uint32_t commit_frames = 0;
    bool truncated_tail = false;   // bytes after the last valid commit frame
    bool header_invalid = false;   // log header failed its checksum
};

/// Folds all committed write-ahead-log frames into the main database image
/// and returns the result; inputs are untouched. An empty log is the
/// identity. Frames after the last valid commit frame (torn writes) are
/// dropped, mirroring recovery semantics; counts land in `info`.
///
/// Errors: WalMismatch when the log is not a write-ahead log for this
/// database (bad magic, truncated header, page-size mismatch).
Bytes merge_wal(std::span<const uint8_t> db, std::span<const uint8_t> wal,
                WalMergeInfo* info = nullptr);

enum class DbVerdict { LogicallyEqual, WalExplained, Different };
const char* to_string(DbVerdict v);

struct DbComparison {
    DbVerdict verdict = DbVerdict::Different;
    std::string diagnostic;
};

/// Explains a database value mismatch between the reference and the backup:
/// LogicallyEqual when committed logical content already matches,
/// WalExplained when folding the reference's pending log produces matching
/// logical content, Different otherwise. Parser failures degrade to
/// Different with a diagnostic; this never throws.
DbComparison explain_db_mismatch(std::span<const uint8_t> pre_db,
                                 std::optional<std::span<const uint8_t>> pre_wal,
                                 std::span<const uint8_t> backup_db);

}  // namespace bdiff
