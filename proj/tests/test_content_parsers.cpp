#include <doctest.h>

#include <sqlite3.h>

#include <nlohmann/json.hpp>

#include "bdiff/contentx.hpp"
#include "bdiff/errors.hpp"
#include "bdiff/hash.hpp"
#include "oracles.hpp"

using namespace bdiff;
using nlohmann::json;

namespace {

Bytes build_db(const std::vector<std::string>& statements) {
    sqlite3* db = nullptr;
    REQUIRE(sqlite3_open(":memory:", &db) == SQLITE_OK);
    for (const auto& sql : statements)
        REQUIRE(sqlite3_exec(db, sql.c_str(), nullptr, nullptr, nullptr) == SQLITE_OK);
    sqlite3_int64 n = 0;
    unsigned char* image = sqlite3_serialize(db, "main", &n, 0);
    Bytes out(image, image + n);
    sqlite3_free(image);
    sqlite3_close(db);
    return out;
}

ExtractionRecipe sms_recipe() {
    ExtractionRecipe r;
    r.label = "SMS Backup";
    r.format = RecipeFormat::Sqlite;
    r.source_path = "/data/data/com.android.providers.telephony/databases/mmssms.db";
    r.table = "sms";
    r.key_columns = {"date", "address"};
    r.value_columns = {"address", "body", "date", "date_sent", "read", "status", "type"};
    return r;
}

}  // namespace

TEST_CASE("empty table extracts to an empty set") {
    Bytes db = build_db({"CREATE TABLE sms(address TEXT, body TEXT, date INTEGER, "
                         "date_sent INTEGER, read INTEGER, status INTEGER, type INTEGER);"});
    CHECK(extract_sqlite_values(db, sms_recipe()).empty());
}

TEST_CASE("per-column extraction enumerates row-by-column pairs") {
    Bytes db = build_db({"CREATE TABLE t(k INTEGER, a TEXT, b TEXT, c TEXT);",
                         "INSERT INTO t VALUES(1,'a1','b1','c1');",
                         "INSERT INTO t VALUES(2,'a2','b2','c2');"});
    ExtractionRecipe r;
    r.label = "x";
    r.format = RecipeFormat::Sqlite;
    r.source_path = "/db";
    r.table = "t";
    r.key_columns = {"k"};
    r.value_columns = {"a", "b", "c"};
    auto vals = extract_sqlite_values(db, r, CountingMode::PerColumn);
    REQUIRE(vals.size() == 6);
    // brute-force enumeration of the fixture's known contents
    std::set<std::string> expected;
    for (int k : {1, 2})
        for (std::string c : {"a", "b", "c"})
            expected.insert("/db#t/" + std::to_string(k) + "/" + c);
    std::set<std::string> got;
    for (const auto& nv : vals) got.insert(nv.name);
    CHECK(got == expected);
    for (const auto& nv : vals)
        if (nv.name == "/db#t/2/b") CHECK(nv.value == "b2");
}

TEST_CASE("per-row extraction serializes columns in recipe order") {
    Bytes db = build_db({"CREATE TABLE t(k INTEGER, a TEXT, b INTEGER);",
                         "INSERT INTO t VALUES(7,'hello',NULL);"});
    ExtractionRecipe r;
    r.label = "x";
    r.format = RecipeFormat::Sqlite;
    r.source_path = "/db";
    r.table = "t";
    r.key_columns = {"k"};
    r.value_columns = {"b", "a"};
    auto vals = extract_sqlite_values(db, r, CountingMode::PerRow);
    REQUIRE(vals.size() == 1);
    CHECK(vals[0].name == "/db#t/7");
    CHECK(vals[0].value == std::string("b=NULL") + '\x1f' + "a=hello");
}

TEST_CASE("extraction is read-only over the input bytes") {
    Bytes db = build_db({"CREATE TABLE sms(address TEXT, body TEXT, date INTEGER, "
                         "date_sent INTEGER, read INTEGER, status INTEGER, type INTEGER);",
                         "INSERT INTO sms VALUES('+1','hi',10,10,1,0,1);"});
    Digest before = sha256(db);
    (void)extract_sqlite_values(db, sms_recipe());
    CHECK(sha256(db) == before);
}

TEST_CASE("missing table or column raises RecipeMismatch naming what exists") {
    Bytes db = build_db({"CREATE TABLE other(x INTEGER);"});
    CHECK_THROWS_WITH_AS(extract_sqlite_values(db, sms_recipe()),
                         doctest::Contains("available: other"), RecipeMismatch);

    Bytes db2 = build_db({"CREATE TABLE sms(address TEXT);"});
    CHECK_THROWS_AS(extract_sqlite_values(db2, sms_recipe()), RecipeMismatch);
    CHECK_THROWS_AS(extract_sqlite_values(to_bytes("nope"), sms_recipe()), NotDatabase);
}

TEST_CASE("recipients come from the thread join") {
    Bytes db = build_db(
        {"CREATE TABLE sms(address TEXT, body TEXT, date INTEGER, date_sent INTEGER, "
         "read INTEGER, status INTEGER, type INTEGER, thread_id INTEGER);",
         "CREATE TABLE threads(_id INTEGER PRIMARY KEY, recipient_ids TEXT);",
         "CREATE TABLE canonical_addresses(_id INTEGER PRIMARY KEY, address TEXT);",
         "INSERT INTO canonical_addresses VALUES(1,'+491701111111');",
         "INSERT INTO canonical_addresses VALUES(2,'+491702222222');",
         "INSERT INTO threads VALUES(5,'1 2');",
         "INSERT INTO sms VALUES('+491701111111','hey',1000,999,1,0,1,5);"});
    ExtractionRecipe r = sms_recipe();
    r.value_columns.push_back("recipients");
    auto vals = extract_sqlite_values(db, r, CountingMode::PerColumn);
    bool found = false;
    for (const auto& nv : vals)
        if (nv.name.ends_with("/recipients")) {
            found = true;
            CHECK(nv.value == "+491701111111 +491702222222");
        }
    CHECK(found);
}

TEST_CASE("settings documents parse to key-value pairs") {
    std::string xml = R"(<?xml version='1.0' encoding='utf-8' standalone='yes' ?>
<settings version="184">
  <setting id="1" name="adb_enabled" value="1" package="android" />
  <setting id="2" name="bluetooth_on" value="0" package="android" />
  <setting id="3" name="device_name" value="Pixel &amp; Friends" package="android" />
</settings>
)";
    auto parsed = parse_settings_xml(to_bytes(xml));
    REQUIRE(parsed.pairs.size() == 3);
    CHECK(parsed.pairs[0] == std::pair<std::string, std::string>{"adb_enabled", "1"});
    CHECK(parsed.pairs[2].second == "Pixel & Friends");
    CHECK(parsed.warnings.empty());
}

TEST_CASE("settings document with no setting elements is empty") {
    CHECK(parse_settings_xml(to_bytes("<settings version=\"1\"></settings>")).pairs.empty());
}

TEST_CASE("duplicate settings keys keep the last value with a warning") {
    std::string xml = "<settings>"
                      "<setting name=\"k\" value=\"first\"/>"
                      "<setting name=\"k\" value=\"second\"/>"
                      "</settings>";
    auto parsed = parse_settings_xml(to_bytes(xml));
    REQUIRE(parsed.pairs.size() == 1);
    CHECK(parsed.pairs[0].second == "second");
    REQUIRE(parsed.warnings.size() == 1);
    CHECK(parsed.warnings[0].find("DuplicateKey") != std::string::npos);
}

TEST_CASE("malformed settings markup names a byte offset") {
    CHECK_THROWS_WITH_AS(parse_settings_xml(to_bytes("<settings><setting name=")),
                         doctest::Contains("byte offset"), ParseError);
    CHECK_THROWS_AS(parse_settings_xml(to_bytes("<settings><setting name=\"x\" value=\"1\"/>")),
                    ParseError);
}

TEST_CASE("message archive round-trips through the parser") {
    json messages = json::array();
    messages.push_back({{"address", "+4917011"},
                        {"body", "hello"},
                        {"date", 1000},
                        {"date_sent", 999},
                        {"read", 1},
                        {"status", -1},
                        {"type", 1},
                        {"recipients", "+4917011"}});
    messages.push_back({{"address", "+4917022"},
                        {"body", "extra"},
                        {"date", 2000},
                        {"date_sent", 1999},
                        {"read", 0},
                        {"status", -1},
                        {"type", 2},
                        {"recipients", "+4917022"},
                        {"unknown_extra", "ignored"}});
    Bytes archive = zlib_compress(to_bytes(messages.dump()));
    auto parsed = parse_sms_backup(archive);
    CHECK(parsed.message_count == 2);
    CHECK(parsed.omitted_fields == 0);
    CHECK(parsed.pairs.size() == 16);  // 8 known fields per message, extras ignored
    bool saw = false;
    for (const auto& nv : parsed.pairs)
        if (nv.name == "msg/1/body") {
            saw = true;
            CHECK(nv.value == "extra");
        }
    CHECK(saw);
}

TEST_CASE("empty message array parses to an empty set") {
    Bytes archive = zlib_compress(to_bytes(std::string("[]")));
    auto parsed = parse_sms_backup(archive);
    CHECK(parsed.pairs.empty());
    CHECK(parsed.message_count == 0);
}

TEST_CASE("missing message fields are omitted and counted") {
    json messages = json::array();
    messages.push_back({{"address", "+49"}, {"date", 1}});
    Bytes archive = zlib_compress(to_bytes(messages.dump()));
    auto parsed = parse_sms_backup(archive);
    CHECK(parsed.pairs.size() == 2);
    CHECK(parsed.omitted_fields == 6);
}

TEST_CASE("non-archive bytes raise NotArchive") {
    CHECK_THROWS_AS(parse_sms_backup(to_bytes("plainly not compressed")), NotArchive);
}

TEST_CASE("entity stream golden fixture decodes byte-for-byte") {
    // Golden layout, written out by hand: 'Data' magic, key length, payload
    // size (little-endian), NUL-terminated key padded to 4, payload padded.
    const uint8_t golden[] = {
        'D', 'a', 't', 'a',             // magic
        0x02, 0x00, 0x00, 0x00,         // key length 2
        0x03, 0x00, 0x00, 0x00,         // payload size 3
        'k', '1', 0x00, 0x00,           // "k1" + NUL + pad
        0xde, 0xad, 0xbe, 0x00,         // payload + pad
        'D', 'a', 't', 'a',             // second entity
        0x01, 0x00, 0x00, 0x00,         // key length 1
        0x00, 0x00, 0x00, 0x00,         // payload size 0
        'q', 0x00, 0x00, 0x00,          // "q" + NUL + pad
    };
    auto entities = parse_kv_stream(std::span<const uint8_t>(golden, sizeof(golden)));
    REQUIRE(entities.size() == 2);
    CHECK(entities[0].first == "k1");
    CHECK(entities[0].second == Bytes{0xde, 0xad, 0xbe});
    CHECK(entities[1].first == "q");
    CHECK(entities[1].second.empty());
}

TEST_CASE("entity stream reader consumes the reference writer") {
    std::vector<std::pair<std::string, Bytes>> entities = {
        {"1", to_bytes("payload one")},
        {"22", to_bytes("")},
        {"three", Bytes{0x00, 0x01, 0x02, 0xff}},
    };
    Bytes stream = oracle::kv_stream_reference(entities);
    auto parsed = parse_kv_stream(stream);
    REQUIRE(parsed.size() == entities.size());
    for (size_t i = 0; i < entities.size(); ++i) {
        CHECK(parsed[i].first == entities[i].first);
        CHECK(parsed[i].second == entities[i].second);
    }
}

TEST_CASE("empty entity stream is an empty list") {
    CHECK(parse_kv_stream({}).empty());
}

TEST_CASE("truncated entity reports its offset, prior entities survive contract") {
    Bytes stream = oracle::kv_stream_reference({{"a", to_bytes("0123456789")}});
    Bytes full = stream;
    stream.resize(stream.size() - 6);
    CHECK_THROWS_WITH_AS(parse_kv_stream(stream), doctest::Contains("offset"), TruncatedEntity);
    CHECK(parse_kv_stream(full).size() == 1);
}

TEST_CASE("negative declared size is CorruptEntity") {
    Bytes stream = oracle::kv_stream_reference({{"a", to_bytes("x")}});
    stream[8] = 0xff;  // payload size -> negative int32
    stream[9] = 0xff;
    stream[10] = 0xff;
    stream[11] = 0xff;
    CHECK_THROWS_AS(parse_kv_stream(stream), CorruptEntity);
}

TEST_CASE("duplicate entity keys are corrupt") {
    Bytes stream = oracle::kv_stream_reference({{"a", to_bytes("1")}, {"a", to_bytes("2")}});
    CHECK_THROWS_AS(parse_kv_stream(stream), CorruptEntity);
}

TEST_CASE("field payload decoder round-trips the reference encoding") {
    std::vector<std::pair<std::string, std::string>> fields = {
        {"_id", "4"}, {"number", "+4917000"}, {"duration", "62"}, {"type", "2"}};
    auto decoded = decode_field_payload(oracle::field_payload_reference(fields));
    CHECK(decoded == fields);
    CHECK_THROWS_AS(decode_field_payload(to_bytes("\x05")), TruncatedEntity);
}
