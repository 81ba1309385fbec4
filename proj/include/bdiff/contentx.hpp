#pragma once

#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "bdiff/bytes.hpp"
#include "bdiff/model.hpp"

namespace bdiff {

enum class RecipeFormat { Sqlite, SettingsXml, SmsArchive, KvStream };
RecipeFormat recipe_format_from(const std::string& s);
const char* to_string(RecipeFormat f);

/// Whether one extracted element is a whole row or a single column value.
/// Per-row is the default counting used in reports.
enum class CountingMode { PerRow, PerColumn };

/// Declarative description of one content-based source. Records with
/// reference formats (Sqlite, SettingsXml) describe Pre/Post extraction;
/// carrier formats (SmsArchive, KvStream) describe the matching backup file.
/// `table` names the logical table and joins carrier to reference records
/// within a label.
struct ExtractionRecipe {
    std::string label;
    RecipeFormat format = RecipeFormat::Sqlite;
    std::string source_path;
    std::string table;
    std::vector<std::string> key_columns;
    std::vector<std::string> value_columns;
};

std::vector<ExtractionRecipe> load_recipes_file(const std::filesystem::path& p);

struct NamedValue {
    std::string name;
    std::string value;
};

/// Scans one table of a main-database image per the recipe. Element names
/// are "<source_path>#<table>/<rowkey>" (per-row) or ".../<column>"
/// (per-column); rowkey is the canonical key-column values joined with '|'.
/// The pseudo-column "recipients" resolves the conventional
/// thread -> address join when the recipe's table is "sms".
std::vector<NamedValue> extract_sqlite_values(std::span<const uint8_t> db,
                                              const ExtractionRecipe& recipe,
                                              CountingMode mode = CountingMode::PerRow);

struct SettingsParseResult {
    std::vector<std::pair<std::string, std::string>> pairs;  // key -> value
    std::vector<std::string> warnings;                       // duplicate keys etc.
};

/// Flat platform settings document: every <setting> element contributes its
/// name/value attribute pair. Duplicate keys keep the last occurrence with a
/// warning. Malformed markup raises ParseError naming the byte offset.
SettingsParseResult parse_settings_xml(std::span<const uint8_t> file);

struct SmsParseResult {
    std::vector<NamedValue> pairs;  // "msg/<index>/<field>" names
    size_t message_count = 0;
    size_t omitted_fields = 0;  // fields absent from a message record
};

/// Message archive: deflate-wrapped JSON array of message records. Exactly
/// the known field list is extracted; unknown fields are ignored, absent
/// ones omitted and counted.
SmsParseResult parse_sms_backup(std::span<const uint8_t> archive);

extern const std::vector<std::string> kSmsFields;

/// Key-value entity stream: ordered (key, payload) records. The byte layout
/// is locked by golden fixtures; see decode in contentx.cpp.
std::vector<std::pair<std::string, Bytes>> parse_kv_stream(std::span<const uint8_t> blob);

/// Field table carried by one call-log entity payload.
std::vector<std::pair<std::string, std::string>> decode_field_payload(std::span<const uint8_t> payload);

/// Recipes sharing a label form one dataset: reference records feed Pre/Post
/// extraction, carrier records feed Backup extraction, aligned by table.
struct ContentDataset {
    std::string label;
    std::vector<ExtractionRecipe> reference;
    std::vector<ExtractionRecipe> carriers;
};

std::vector<ContentDataset> group_recipes(const std::vector<ExtractionRecipe>& all);

/// Extracts the dataset's elements from a reference snapshot (Pre or Post).
std::vector<NamedValue> extract_reference_content(const Snapshot& snap,
                                                  const ContentDataset& ds, CountingMode mode,
                                                  std::vector<std::string>* warnings = nullptr);

/// Extracts the dataset's elements from a backup snapshot, renaming them into
/// the reference locator space so both sides share one namespace. Key-value
/// carriers ("kv:..." sources) are looked up in `carriers` when given.
std::vector<NamedValue> extract_backup_content(const Snapshot& snap, const Snapshot* carriers,
                                               const ContentDataset& ds, CountingMode mode,
                                               std::vector<std::string>* warnings = nullptr);

}  // namespace bdiff
