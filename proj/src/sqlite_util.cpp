#include "bdiff/sqlite_util.hpp"

#include <sqlite3.h>

#include <algorithm>
#include <cstdio>
#include <cstring>

#include "bdiff/errors.hpp"
#include "bdiff/hash.hpp"

namespace bdiff {

namespace {

constexpr char kSqliteMagic[16] = {'S', 'Q', 'L', 'i', 't', 'e', ' ', 'f',
                                   'o', 'r', 'm', 'a', 't', ' ', '3', '\0'};

struct StmtGuard {
    sqlite3_stmt* stmt = nullptr;
    ~StmtGuard() { sqlite3_finalize(stmt); }
};

std::string quote_ident(const std::string& name) {
    std::string out = "\"";
    for (char c : name) {
        out += c;
        if (c == '"') out += c;
    }
    out += "\"";
    return out;
}

}  // namespace

bool looks_like_sqlite(std::span<const uint8_t> data) {
    return data.size() >= 100 && std::memcmp(data.data(), kSqliteMagic, 16) == 0;
}

SqliteDb::SqliteDb(std::span<const uint8_t> main_db_bytes) {
    if (!looks_like_sqlite(main_db_bytes))
        throw NotDatabase("bytes do not start with the database magic");
    if (sqlite3_open(":memory:", &db_) != SQLITE_OK) {
        sqlite3_close(db_);
        throw NotDatabase("cannot open in-memory connection");
    }
    sqlite3_int64 n = sqlite3_int64(main_db_bytes.size());
    auto* buf = static_cast<unsigned char*>(sqlite3_malloc64(uint64_t(n)));
    if (!buf) {
        sqlite3_close(db_);
        throw NotDatabase("out of memory deserializing database");
    }
    std::memcpy(buf, main_db_bytes.data(), size_t(n));
    // The deserialized copy must present as a plain rollback-journal image:
    // a write-ahead-log read version cannot be served from memory.
    if (buf[18] == 2 || buf[19] == 2) {
        buf[18] = 1;
        buf[19] = 1;
    }
    int rc = sqlite3_deserialize(db_, "main", buf, n, n,
                                 SQLITE_DESERIALIZE_FREEONCLOSE | SQLITE_DESERIALIZE_READONLY);
    if (rc != SQLITE_OK) {
        std::string msg = sqlite3_errmsg(db_);
        sqlite3_close(db_);
        throw NotDatabase("deserialize failed: " + msg);
    }
    // Force a read so corrupt images fail here, not mid-extraction.
    sqlite3_stmt* stmt = nullptr;
    if (sqlite3_prepare_v2(db_, "SELECT count(*) FROM sqlite_master", -1, &stmt, nullptr) !=
            SQLITE_OK ||
        sqlite3_step(stmt) != SQLITE_ROW) {
        std::string msg = sqlite3_errmsg(db_);
        sqlite3_finalize(stmt);
        sqlite3_close(db_);
        db_ = nullptr;
        throw NotDatabase("schema unreadable: " + msg);
    }
    sqlite3_finalize(stmt);
}

SqliteDb::~SqliteDb() { sqlite3_close(db_); }

bool SqliteDb::has_table(const std::string& table) const {
    auto names = table_names();
    return std::find(names.begin(), names.end(), table) != names.end();
}

std::vector<std::string> SqliteDb::table_names() const {
    StmtGuard g;
    if (sqlite3_prepare_v2(db_,
                           "SELECT name FROM sqlite_master WHERE type='table' "
                           "AND name NOT LIKE 'sqlite_%' ORDER BY name",
                           -1, &g.stmt, nullptr) != SQLITE_OK)
        throw NotDatabase(sqlite3_errmsg(db_));
    std::vector<std::string> out;
    while (sqlite3_step(g.stmt) == SQLITE_ROW)
        out.emplace_back(reinterpret_cast<const char*>(sqlite3_column_text(g.stmt, 0)));
    return out;
}

std::vector<std::string> SqliteDb::column_names(const std::string& table) const {
    StmtGuard g;
    std::string sql = "PRAGMA table_info(" + quote_ident(table) + ")";
    if (sqlite3_prepare_v2(db_, sql.c_str(), -1, &g.stmt, nullptr) != SQLITE_OK)
        throw NotDatabase(sqlite3_errmsg(db_));
    std::vector<std::string> out;
    while (sqlite3_step(g.stmt) == SQLITE_ROW)
        out.emplace_back(reinterpret_cast<const char*>(sqlite3_column_text(g.stmt, 1)));
    return out;
}

std::string canonical_int(int64_t v) { return std::to_string(v); }

std::string canonical_real(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

std::string canonical_blob(std::span<const uint8_t> v) { return to_hex(v); }

namespace {

std::string canonical_column(sqlite3_stmt* stmt, int col) {
    switch (sqlite3_column_type(stmt, col)) {
        case SQLITE_INTEGER:
            return canonical_int(sqlite3_column_int64(stmt, col));
        case SQLITE_FLOAT:
            return canonical_real(sqlite3_column_double(stmt, col));
        case SQLITE_TEXT: {
            const unsigned char* t = sqlite3_column_text(stmt, col);
            return std::string(reinterpret_cast<const char*>(t),
                               size_t(sqlite3_column_bytes(stmt, col)));
        }
        case SQLITE_BLOB: {
            auto* p = static_cast<const uint8_t*>(sqlite3_column_blob(stmt, col));
            return canonical_blob({p, size_t(sqlite3_column_bytes(stmt, col))});
        }
        default:
            return kCanonicalNull;
    }
}

}  // namespace

std::string sqlite_canonical_column(sqlite3_stmt* stmt, int col);  // exposed to contentx
std::string sqlite_canonical_column(sqlite3_stmt* stmt, int col) {
    return canonical_column(stmt, col);
}

LogicalContent logical_dump(std::span<const uint8_t> main_db_bytes) {
    SqliteDb db(main_db_bytes);
    LogicalContent out;
    for (const auto& table : db.table_names()) {
        auto cols = db.column_names(table);
        StmtGuard g;
        std::string sql = "SELECT * FROM " + quote_ident(table);
        if (sqlite3_prepare_v2(db.handle(), sql.c_str(), -1, &g.stmt, nullptr) != SQLITE_OK)
            throw NotDatabase(sqlite3_errmsg(db.handle()));
        std::vector<std::string> rows;
        while (true) {
            int rc = sqlite3_step(g.stmt);
            if (rc == SQLITE_DONE) break;
            if (rc != SQLITE_ROW) throw NotDatabase(sqlite3_errmsg(db.handle()));
            std::string row;
            int n = sqlite3_column_count(g.stmt);
            for (int c = 0; c < n; ++c) {
                if (c > 0) row += '\x1f';
                row += (c < int(cols.size()) ? cols[c] : std::to_string(c));
                row += '=';
                row += canonical_column(g.stmt, c);
            }
            rows.push_back(std::move(row));
        }
        std::sort(rows.begin(), rows.end());
        out.emplace(table, std::move(rows));
    }
    return out;
}

}  // namespace bdiff
