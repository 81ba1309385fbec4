#pragma once

#include <map>
#include <memory>
#include <string>
#include <vector>

#include "bdiff/bytes.hpp"

struct sqlite3;

namespace bdiff {

bool looks_like_sqlite(std::span<const uint8_t> data);

/// Read-only connection over an in-memory copy of main-database bytes.
/// Only committed main-file content is visible: no journal or WAL sidecar
/// is ever consulted. The input bytes are never modified.
class SqliteDb {
public:
    /// Throws NotDatabase when the bytes are not a main database image.
    explicit SqliteDb(std::span<const uint8_t> main_db_bytes);
    ~SqliteDb();
    SqliteDb(const SqliteDb&) = delete;
    SqliteDb& operator=(const SqliteDb&) = delete;

    sqlite3* handle() const { return db_; }

    bool has_table(const std::string& table) const;
    std::vector<std::string> table_names() const;
    std::vector<std::string> column_names(const std::string& table) const;

private:
    sqlite3* db_ = nullptr;
};

/// Canonical display text for a database value: integers in decimal, blobs
/// as lowercase hex, text as UTF-8, null as "NULL". Comparison of logical
/// rows is byte-equality over this form.
std::string canonical_int(int64_t v);
std::string canonical_real(double v);
std::string canonical_blob(std::span<const uint8_t> v);
constexpr const char* kCanonicalNull = "NULL";

/// Logical content of a database: table name → sorted canonical row texts.
/// Order-independent by construction, so two dumps compare equal iff the
/// committed rows match.
using LogicalContent = std::map<std::string, std::vector<std::string>>;
LogicalContent logical_dump(std::span<const uint8_t> main_db_bytes);

}  // namespace bdiff
