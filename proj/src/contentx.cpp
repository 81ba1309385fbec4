#include "bdiff/contentx.hpp"

#include <sqlite3.h>

#include <algorithm>
#include <map>
#include <set>
#include <sstream>

#include <nlohmann/json.hpp>

#include "bdiff/errors.hpp"
#include "bdiff/sqlite_util.hpp"

namespace bdiff {

using nlohmann::json;

// from sqlite_util.cpp
std::string sqlite_canonical_column(sqlite3_stmt* stmt, int col);

const std::vector<std::string> kSmsFields = {"address", "body",   "date", "date_sent",
                                             "read",    "status", "type", "recipients"};

RecipeFormat recipe_format_from(const std::string& s) {
    if (s == "sqlite") return RecipeFormat::Sqlite;
    if (s == "settings_xml") return RecipeFormat::SettingsXml;
    if (s == "sms_archive") return RecipeFormat::SmsArchive;
    if (s == "kv_stream") return RecipeFormat::KvStream;
    throw ParseError("unknown recipe format '" + s + "'");
}

const char* to_string(RecipeFormat f) {
    switch (f) {
        case RecipeFormat::Sqlite: return "sqlite";
        case RecipeFormat::SettingsXml: return "settings_xml";
        case RecipeFormat::SmsArchive: return "sms_archive";
        default: return "kv_stream";
    }
}

std::vector<ExtractionRecipe> load_recipes_file(const std::filesystem::path& p) {
    json doc = json::parse(to_string(read_file(p)));
    if (!doc.is_array()) throw ParseError("recipes file must hold an array of recipe records");
    std::vector<ExtractionRecipe> out;
    for (const auto& rec : doc) {
        ExtractionRecipe r;
        r.label = rec.at("label").get<std::string>();
        r.format = recipe_format_from(rec.at("format").get<std::string>());
        r.source_path = rec.at("source_path").get<std::string>();
        r.table = rec.value("table", "");
        if (rec.contains("key_columns"))
            r.key_columns = rec["key_columns"].get<std::vector<std::string>>();
        if (rec.contains("value_columns"))
            r.value_columns = rec["value_columns"].get<std::vector<std::string>>();
        if (r.format == RecipeFormat::Sqlite) {
            if (r.table.empty()) throw ParseError("sqlite recipe without table: " + r.label);
            if (r.value_columns.empty())
                throw ParseError("sqlite recipe without value columns: " + r.label);
        }
        out.push_back(std::move(r));
    }
    return out;
}

namespace {

std::string join(const std::vector<std::string>& parts, char sep) {
    std::string out;
    for (size_t i = 0; i < parts.size(); ++i) {
        if (i) out += sep;
        out += parts[i];
    }
    return out;
}

std::string serialize_row(const std::vector<std::string>& cols,
                          const std::vector<std::pair<std::string, std::string>>& fields) {
    // Field order follows the recipe's column list; absent fields are skipped.
    std::string out;
    bool first = true;
    for (const auto& col : cols) {
        auto it = std::find_if(fields.begin(), fields.end(),
                               [&](const auto& f) { return f.first == col; });
        if (it == fields.end()) continue;
        if (!first) out += '\x1f';
        first = false;
        out += col;
        out += '=';
        out += it->second;
    }
    return out;
}

std::string quote_ident(const std::string& name) {
    std::string out = "\"";
    for (char c : name) {
        out += c;
        if (c == '"') out += c;
    }
    out += "\"";
    return out;
}

// Conventional recipients join: sms.thread_id -> threads.recipient_ids
// (space-separated rowids into canonical_addresses) -> address strings.
std::map<std::string, std::string> build_recipients_by_thread(const SqliteDb& db) {
    std::map<std::string, std::string> addr_by_id;
    sqlite3_stmt* stmt = nullptr;
    if (sqlite3_prepare_v2(db.handle(), "SELECT _id, address FROM canonical_addresses", -1, &stmt,
                           nullptr) != SQLITE_OK)
        throw RecipeMismatch("recipients requested but canonical_addresses is unreadable");
    while (sqlite3_step(stmt) == SQLITE_ROW) {
        addr_by_id[sqlite_canonical_column(stmt, 0)] = sqlite_canonical_column(stmt, 1);
    }
    sqlite3_finalize(stmt);

    std::map<std::string, std::string> out;
    if (sqlite3_prepare_v2(db.handle(), "SELECT _id, recipient_ids FROM threads", -1, &stmt,
                           nullptr) != SQLITE_OK)
        throw RecipeMismatch("recipients requested but threads is unreadable");
    while (sqlite3_step(stmt) == SQLITE_ROW) {
        std::string tid = sqlite_canonical_column(stmt, 0);
        std::istringstream ids(sqlite_canonical_column(stmt, 1));
        std::string id;
        std::vector<std::string> addrs;
        while (ids >> id) {
            auto it = addr_by_id.find(id);
            addrs.push_back(it == addr_by_id.end() ? "NULL" : it->second);
        }
        out[tid] = join(addrs, ' ');
    }
    sqlite3_finalize(stmt);
    return out;
}

}  // namespace

std::vector<NamedValue> extract_sqlite_values(std::span<const uint8_t> dbbytes,
                                              const ExtractionRecipe& recipe, CountingMode mode) {
    SqliteDb db(dbbytes);
    if (!db.has_table(recipe.table))
        throw RecipeMismatch("table '" + recipe.table + "' not in database; available: " +
                             join(db.table_names(), ' '));
    auto available = db.column_names(recipe.table);
    std::set<std::string> avail_set(available.begin(), available.end());
    bool wants_recipients = false;
    std::vector<std::string> real_columns;
    auto require_column = [&](const std::string& c) {
        if (c == "recipients" && !avail_set.count("recipients")) {
            wants_recipients = true;
            return;
        }
        if (!avail_set.count(c))
            throw RecipeMismatch("column '" + c + "' not in table '" + recipe.table +
                                 "'; available: " + join(available, ' '));
        real_columns.push_back(c);
    };
    for (const auto& c : recipe.key_columns) require_column(c);
    for (const auto& c : recipe.value_columns)
        if (std::find(recipe.key_columns.begin(), recipe.key_columns.end(), c) ==
            recipe.key_columns.end())
            require_column(c);

    std::map<std::string, std::string> recipients_by_thread;
    if (wants_recipients) {
        if (!avail_set.count("thread_id"))
            throw RecipeMismatch("recipients requested but table '" + recipe.table +
                                 "' has no thread_id column");
        recipients_by_thread = build_recipients_by_thread(db);
        if (std::find(real_columns.begin(), real_columns.end(), "thread_id") ==
            real_columns.end())
            real_columns.push_back("thread_id");
    }

    std::string sql = "SELECT ";
    for (size_t i = 0; i < real_columns.size(); ++i) {
        if (i) sql += ", ";
        sql += quote_ident(real_columns[i]);
    }
    sql += " FROM " + quote_ident(recipe.table);
    sqlite3_stmt* stmt = nullptr;
    if (sqlite3_prepare_v2(db.handle(), sql.c_str(), -1, &stmt, nullptr) != SQLITE_OK)
        throw RecipeMismatch(sqlite3_errmsg(db.handle()));

    std::vector<NamedValue> out;
    std::set<std::string> seen_keys;
    while (true) {
        int rc = sqlite3_step(stmt);
        if (rc == SQLITE_DONE) break;
        if (rc != SQLITE_ROW) {
            std::string msg = sqlite3_errmsg(db.handle());
            sqlite3_finalize(stmt);
            throw NotDatabase(msg);
        }
        std::vector<std::pair<std::string, std::string>> fields;
        for (size_t c = 0; c < real_columns.size(); ++c)
            fields.emplace_back(real_columns[c], sqlite_canonical_column(stmt, int(c)));
        if (wants_recipients) {
            auto tid = std::find_if(fields.begin(), fields.end(),
                                    [](const auto& f) { return f.first == "thread_id"; });
            auto it = recipients_by_thread.find(tid->second);
            fields.emplace_back("recipients",
                                it == recipients_by_thread.end() ? "NULL" : it->second);
        }
        std::vector<std::string> key_parts;
        for (const auto& k : recipe.key_columns) {
            auto it = std::find_if(fields.begin(), fields.end(),
                                   [&](const auto& f) { return f.first == k; });
            key_parts.push_back(it->second);
        }
        std::string key = join(key_parts, '|');
        if (!seen_keys.insert(key).second) {
            sqlite3_finalize(stmt);
            throw RecipeMismatch("key columns (" + join(recipe.key_columns, ',') +
                                 ") do not uniquely identify rows: duplicate key '" + key + "'");
        }
        std::string base = recipe.source_path + "#" + recipe.table + "/" + key;
        if (mode == CountingMode::PerRow) {
            out.push_back({base, serialize_row(recipe.value_columns, fields)});
        } else {
            for (const auto& col : recipe.value_columns) {
                auto it = std::find_if(fields.begin(), fields.end(),
                                       [&](const auto& f) { return f.first == col; });
                if (it != fields.end()) out.push_back({base + "/" + col, it->second});
            }
        }
    }
    sqlite3_finalize(stmt);
    std::sort(out.begin(), out.end(), [](const auto& a, const auto& b) { return a.name < b.name; });
    return out;
}

namespace {

struct XmlScanner {
    std::span<const uint8_t> data;
    size_t pos = 0;

    [[noreturn]] void fail(const std::string& what) const {
        throw ParseError(what + " at byte offset " + std::to_string(pos));
    }
    bool eof() const { return pos >= data.size(); }
    char peek() const { return char(data[pos]); }
    char take() { return char(data[pos++]); }
    void skip_ws() {
        while (!eof() && (peek() == ' ' || peek() == '\t' || peek() == '\n' || peek() == '\r'))
            ++pos;
    }
    bool consume(std::string_view s) {
        if (data.size() - pos < s.size()) return false;
        if (std::string_view(reinterpret_cast<const char*>(data.data() + pos), s.size()) != s)
            return false;
        pos += s.size();
        return true;
    }
    void skip_until(std::string_view s) {
        while (!eof()) {
            if (consume(s)) return;
            ++pos;
        }
        fail("unterminated construct (looking for '" + std::string(s) + "')");
    }
};

std::string decode_entities(const std::string& s, XmlScanner& sc) {
    std::string out;
    for (size_t i = 0; i < s.size(); ++i) {
        if (s[i] != '&') {
            out += s[i];
            continue;
        }
        size_t semi = s.find(';', i);
        if (semi == std::string::npos) sc.fail("unterminated entity");
        std::string ent = s.substr(i + 1, semi - i - 1);
        if (ent == "amp") out += '&';
        else if (ent == "lt") out += '<';
        else if (ent == "gt") out += '>';
        else if (ent == "quot") out += '"';
        else if (ent == "apos") out += '\'';
        else if (!ent.empty() && ent[0] == '#') out += char(std::stoi(ent.substr(1)));
        else sc.fail("unknown entity '&" + ent + ";'");
        i = semi;
    }
    return out;
}

}  // namespace

SettingsParseResult parse_settings_xml(std::span<const uint8_t> file) {
    SettingsParseResult out;
    std::map<std::string, size_t> index_by_key;
    XmlScanner sc{file};
    int depth = 0;
    bool saw_root = false;
    while (true) {
        sc.skip_ws();
        if (sc.eof()) break;
        if (sc.peek() != '<') sc.fail(depth == 0 ? "text outside the root element" : "stray text");
        if (sc.consume("<?")) {
            sc.skip_until("?>");
            continue;
        }
        if (sc.consume("<!--")) {
            sc.skip_until("-->");
            continue;
        }
        if (sc.consume("</")) {
            sc.skip_until(">");
            if (--depth < 0) sc.fail("closing tag without opener");
            continue;
        }
        sc.take();  // '<'
        std::string tag;
        while (!sc.eof() && !std::isspace(uint8_t(sc.peek())) && sc.peek() != '>' &&
               sc.peek() != '/')
            tag += sc.take();
        if (tag.empty()) sc.fail("empty tag name");

        std::map<std::string, std::string> attrs;
        bool self_closing = false;
        while (true) {
            sc.skip_ws();
            if (sc.eof()) sc.fail("unterminated element <" + tag + ">");
            if (sc.consume("/>")) {
                self_closing = true;
                break;
            }
            if (sc.peek() == '>') {
                sc.take();
                break;
            }
            std::string aname;
            while (!sc.eof() && sc.peek() != '=' && !std::isspace(uint8_t(sc.peek())))
                aname += sc.take();
            sc.skip_ws();
            if (sc.eof() || sc.take() != '=') sc.fail("attribute '" + aname + "' without value");
            sc.skip_ws();
            if (sc.eof()) sc.fail("attribute '" + aname + "' without value");
            char q = sc.take();
            if (q != '"' && q != '\'') sc.fail("attribute value must be quoted");
            std::string aval;
            while (!sc.eof() && sc.peek() != q) aval += sc.take();
            if (sc.eof()) sc.fail("unterminated attribute value");
            sc.take();  // closing quote
            attrs[aname] = decode_entities(aval, sc);
        }
        if (depth == 0) {
            if (saw_root && !self_closing) sc.fail("multiple root elements");
            saw_root = true;
        }
        if (tag == "setting") {
            auto n = attrs.find("name");
            auto v = attrs.find("value");
            if (n != attrs.end()) {
                std::string value = v == attrs.end() ? "" : v->second;
                auto prev = index_by_key.find(n->second);
                if (prev != index_by_key.end()) {
                    out.warnings.push_back("DuplicateKey: '" + n->second +
                                           "', last occurrence wins");
                    out.pairs[prev->second].second = value;
                } else {
                    index_by_key[n->second] = out.pairs.size();
                    out.pairs.emplace_back(n->second, value);
                }
            }
        }
        if (!self_closing) ++depth;
    }
    if (depth != 0) sc.fail("unclosed element at end of document");
    return out;
}

SmsParseResult parse_sms_backup(std::span<const uint8_t> archive) {
    Bytes plain;
    try {
        plain = zlib_decompress(archive);
    } catch (const CorruptPayload& err) {
        throw NotArchive(std::string("message archive does not inflate: ") + err.what());
    }
    json doc;
    try {
        doc = json::parse(to_string(plain));
    } catch (const json::exception& ex) {
        throw ParseError(std::string("message archive payload is not a JSON document: ") +
                         ex.what());
    }
    if (!doc.is_array()) throw ParseError("message archive must hold an array of records");
    SmsParseResult out;
    out.message_count = doc.size();
    size_t index = 0;
    for (const auto& msg : doc) {
        for (const auto& field : kSmsFields) {
            if (!msg.contains(field)) {
                ++out.omitted_fields;
                continue;
            }
            const auto& v = msg[field];
            std::string text;
            if (v.is_string()) text = v.get<std::string>();
            else if (v.is_number_integer()) text = canonical_int(v.get<int64_t>());
            else if (v.is_number_float()) text = canonical_real(v.get<double>());
            else if (v.is_null()) text = kCanonicalNull;
            else text = v.dump();
            out.pairs.push_back({"msg/" + std::to_string(index) + "/" + field, text});
        }
        ++index;
    }
    return out;
}

namespace {

// Entity stream layout, locked by golden fixtures: per entity a 12-byte
// header of little-endian fields ['Data' magic][key length][payload size],
// the NUL-terminated key padded to 4 bytes, then the payload padded to 4.
constexpr uint32_t kEntityMagic = 0x61746144;  // "Data"

uint32_t rd_le32(const uint8_t* p) {
    return uint32_t(p[0]) | (uint32_t(p[1]) << 8) | (uint32_t(p[2]) << 16) | (uint32_t(p[3]) << 24);
}

size_t pad4(size_t n) { return (n + 3) & ~size_t(3); }

}  // namespace

std::vector<std::pair<std::string, Bytes>> parse_kv_stream(std::span<const uint8_t> blob) {
    std::vector<std::pair<std::string, Bytes>> out;
    std::set<std::string> seen;
    size_t pos = 0;
    while (pos < blob.size()) {
        if (blob.size() - pos < 12)
            throw TruncatedEntity("entity header truncated at offset " + std::to_string(pos));
        uint32_t magic = rd_le32(blob.data() + pos);
        if (magic != kEntityMagic)
            throw CorruptEntity("bad entity magic at offset " + std::to_string(pos));
        int32_t key_len = int32_t(rd_le32(blob.data() + pos + 4));
        int32_t data_size = int32_t(rd_le32(blob.data() + pos + 8));
        if (key_len < 0 || data_size < 0)
            throw CorruptEntity("negative declared size at offset " + std::to_string(pos));
        size_t key_block = pad4(size_t(key_len) + 1);
        size_t data_block = pad4(size_t(data_size));
        if (blob.size() - pos < 12 + key_block)
            throw TruncatedEntity("entity key truncated at offset " + std::to_string(pos + 12));
        std::string key(reinterpret_cast<const char*>(blob.data() + pos + 12), size_t(key_len));
        if (blob.size() - pos < 12 + key_block + data_block)
            throw TruncatedEntity("entity payload truncated at offset " +
                                  std::to_string(pos + 12 + key_block));
        const uint8_t* d = blob.data() + pos + 12 + key_block;
        if (!seen.insert(key).second)
            throw CorruptEntity("duplicate key '" + key + "' at offset " + std::to_string(pos));
        out.emplace_back(std::move(key), Bytes(d, d + size_t(data_size)));
        pos += 12 + key_block + data_block;
    }
    return out;
}

std::vector<std::pair<std::string, std::string>> decode_field_payload(
    std::span<const uint8_t> payload) {
    std::vector<std::pair<std::string, std::string>> out;
    size_t pos = 0;
    auto need = [&](size_t n, const char* what) {
        if (payload.size() - pos < n)
            throw TruncatedEntity(std::string(what) + " truncated at offset " +
                                  std::to_string(pos));
    };
    while (pos < payload.size()) {
        need(4, "field name length");
        uint32_t nlen = rd_le32(payload.data() + pos);
        pos += 4;
        need(nlen, "field name");
        std::string name(reinterpret_cast<const char*>(payload.data() + pos), nlen);
        pos += nlen;
        need(4, "field value length");
        uint32_t vlen = rd_le32(payload.data() + pos);
        pos += 4;
        need(vlen, "field value");
        std::string value(reinterpret_cast<const char*>(payload.data() + pos), vlen);
        pos += vlen;
        out.emplace_back(std::move(name), std::move(value));
    }
    return out;
}

std::vector<ContentDataset> group_recipes(const std::vector<ExtractionRecipe>& all) {
    std::vector<ContentDataset> out;
    auto find = [&out](const std::string& label) -> ContentDataset& {
        for (auto& ds : out)
            if (ds.label == label) return ds;
        out.push_back({label, {}, {}});
        return out.back();
    };
    for (const auto& r : all) {
        ContentDataset& ds = find(r.label);
        if (r.format == RecipeFormat::Sqlite || r.format == RecipeFormat::SettingsXml)
            ds.reference.push_back(r);
        else
            ds.carriers.push_back(r);
    }
    return out;
}

namespace {

void warn(std::vector<std::string>* warnings, const std::string& msg) {
    if (warnings) warnings->push_back(msg);
}

const ExtractionRecipe* find_reference(const ContentDataset& ds, const std::string& table) {
    for (const auto& r : ds.reference)
        if (r.table == table) return &r;
    return nullptr;
}

}  // namespace

std::vector<NamedValue> extract_reference_content(const Snapshot& snap, const ContentDataset& ds,
                                                  CountingMode mode,
                                                  std::vector<std::string>* warnings) {
    std::vector<NamedValue> out;
    for (const auto& recipe : ds.reference) {
        const Entry* src = snap.find(recipe.source_path);
        if (!src) {
            warn(warnings, ds.label + ": reference source missing from snapshot: " +
                               recipe.source_path);
            continue;
        }
        Bytes bytes = snap.load_value(*src);
        if (recipe.format == RecipeFormat::Sqlite) {
            auto vals = extract_sqlite_values(bytes, recipe, mode);
            out.insert(out.end(), vals.begin(), vals.end());
        } else {
            auto parsed = parse_settings_xml(bytes);
            for (const auto& w : parsed.warnings)
                warn(warnings, recipe.source_path + ": " + w);
            for (const auto& [key, value] : parsed.pairs)
                out.push_back({recipe.source_path + "#" + recipe.table + "/" + key, value});
        }
    }
    std::sort(out.begin(), out.end(), [](const auto& a, const auto& b) { return a.name < b.name; });
    return out;
}

std::vector<NamedValue> extract_backup_content(const Snapshot& snap, const Snapshot* carriers,
                                               const ContentDataset& ds, CountingMode mode,
                                               std::vector<std::string>* warnings) {
    std::vector<NamedValue> out;
    for (const auto& carrier : ds.carriers) {
        const Snapshot* holder = &snap;
        const Entry* src = snap.find(carrier.source_path);
        if (!src && carriers) {
            src = carriers->find(carrier.source_path);
            holder = carriers;
        }
        if (!src) {
            warn(warnings,
                 ds.label + ": backup carrier missing from snapshot: " + carrier.source_path);
            continue;
        }
        Bytes bytes = holder->load_value(*src);
        if (carrier.format == RecipeFormat::SmsArchive) {
            const ExtractionRecipe* ref = find_reference(ds, carrier.table);
            if (!ref) {
                warn(warnings, ds.label + ": no reference recipe for table " + carrier.table);
                continue;
            }
            auto parsed = parse_sms_backup(bytes);
            if (parsed.omitted_fields > 0)
                warn(warnings, carrier.source_path + ": " + std::to_string(parsed.omitted_fields) +
                                   " fields omitted from message records");
            // Regroup "msg/<i>/<field>" pairs per message, then key them like
            // the reference side so the namespaces align.
            std::map<size_t, std::vector<std::pair<std::string, std::string>>> by_msg;
            for (const auto& nv : parsed.pairs) {
                size_t a = nv.name.find('/');
                size_t b = nv.name.find('/', a + 1);
                by_msg[std::stoul(nv.name.substr(a + 1, b - a - 1))].emplace_back(
                    nv.name.substr(b + 1), nv.value);
            }
            for (const auto& [idx, fields] : by_msg) {
                std::vector<std::string> key_parts;
                bool complete = true;
                for (const auto& k : ref->key_columns) {
                    auto it = std::find_if(fields.begin(), fields.end(),
                                           [&](const auto& f) { return f.first == k; });
                    if (it == fields.end()) {
                        complete = false;
                        break;
                    }
                    key_parts.push_back(it->second);
                }
                if (!complete) {
                    warn(warnings, carrier.source_path + ": message " + std::to_string(idx) +
                                       " lacks key fields, skipped");
                    continue;
                }
                std::string base =
                    ref->source_path + "#" + ref->table + "/" + join(key_parts, '|');
                if (mode == CountingMode::PerRow) {
                    out.push_back({base, serialize_row(ref->value_columns, fields)});
                } else {
                    for (const auto& col : ref->value_columns) {
                        auto it = std::find_if(fields.begin(), fields.end(),
                                               [&](const auto& f) { return f.first == col; });
                        if (it != fields.end()) out.push_back({base + "/" + col, it->second});
                    }
                }
            }
        } else if (carrier.format == RecipeFormat::KvStream) {
            auto entities = parse_kv_stream(bytes);
            if (carrier.table == "settings") {
                // Entity keys are "<file-stem>/<setting-key>"; payload is the
                // value text. The stem selects the reference file.
                for (const auto& [key, payload] : entities) {
                    size_t slash = key.find('/');
                    if (slash == std::string::npos) {
                        warn(warnings, carrier.source_path + ": entity key without file stem: " +
                                           key);
                        continue;
                    }
                    std::string stem = key.substr(0, slash);
                    const ExtractionRecipe* ref = find_reference(ds, stem);
                    if (!ref) {
                        warn(warnings,
                             carrier.source_path + ": no reference recipe for stem " + stem);
                        continue;
                    }
                    out.push_back({ref->source_path + "#" + stem + "/" + key.substr(slash + 1),
                                   to_string(payload)});
                }
            } else {
                const ExtractionRecipe* ref = find_reference(ds, carrier.table);
                if (!ref) {
                    warn(warnings, ds.label + ": no reference recipe for table " + carrier.table);
                    continue;
                }
                for (const auto& [key, payload] : entities) {
                    auto fields = decode_field_payload(payload);
                    std::vector<std::string> key_parts;
                    bool complete = true;
                    for (const auto& k : ref->key_columns) {
                        auto it = std::find_if(fields.begin(), fields.end(),
                                               [&](const auto& f) { return f.first == k; });
                        if (it == fields.end()) {
                            complete = false;
                            break;
                        }
                        key_parts.push_back(it->second);
                    }
                    if (!complete) {
                        warn(warnings, carrier.source_path + ": entity '" + key +
                                           "' lacks key fields, skipped");
                        continue;
                    }
                    std::string base =
                        ref->source_path + "#" + ref->table + "/" + join(key_parts, '|');
                    if (mode == CountingMode::PerRow) {
                        out.push_back({base, serialize_row(ref->value_columns, fields)});
                    } else {
                        for (const auto& col : ref->value_columns) {
                            auto it = std::find_if(fields.begin(), fields.end(),
                                                   [&](const auto& f) { return f.first == col; });
                            if (it != fields.end())
                                out.push_back({base + "/" + col, it->second});
                        }
                    }
                }
            }
        }
    }
    std::sort(out.begin(), out.end(), [](const auto& a, const auto& b) { return a.name < b.name; });
    return out;
}

}  // namespace bdiff
