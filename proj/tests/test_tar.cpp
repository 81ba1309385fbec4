#include <doctest.h>

#include <cstring>

#include "bdiff/errors.hpp"
#include "bdiff/fixturegen.hpp"
#include "bdiff/tar.hpp"
#include "oracles.hpp"

using namespace bdiff;

TEST_CASE("reader consumes the reference writer's output") {
    std::map<std::string, Bytes> files{{"apps/p/f/x", to_bytes("abc")},
                                       {"data/a.txt", to_bytes("hello world")},
                                       {"deep/l/y/nested/file.bin", to_bytes(std::string(700, 'q'))}};
    Bytes tar = oracle::tar_reference(files);
    TarReader r(tar);
    std::map<std::string, Bytes> got;
    while (auto m = r.next()) {
        REQUIRE(m->typeflag == '0');
        got[m->name] = m->data;
    }
    CHECK(got.size() == 3);
    for (const auto& [name, data] : files) CHECK(got.at(name) == data);
    CHECK(r.warnings().empty());
}

TEST_CASE("writer output round-trips through the reader") {
    TarWriter w;
    w.add_dir("top");
    w.add_file("top/a", std::string_view("AAAA"));
    w.add_symlink("top/link", "a");
    w.add_file("top/empty", std::string_view(""));
    Bytes tar = w.finish();
    REQUIRE(tar.size() % 512 == 0);

    TarReader r(tar);
    std::vector<TarMember> members;
    while (auto m = r.next()) members.push_back(std::move(*m));
    REQUIRE(members.size() == 4);
    CHECK(members[0].typeflag == '5');
    CHECK(members[1].name == "top/a");
    CHECK(to_string(members[1].data) == "AAAA");
    CHECK(members[2].typeflag == '2');
    CHECK(members[2].linkname == "a");
    CHECK(members[3].data.empty());
}

TEST_CASE("corrupt header checksum is reported with its offset") {
    TarWriter w;
    w.add_file("f", std::string_view("x"));
    Bytes tar = w.finish();
    tar[150] = 'Z';  // clobber the stored checksum digits
    TarReader r(tar);
    CHECK_THROWS_AS(r.next(), CorruptHeader);
}

TEST_CASE("truncated archive is reported with its offset") {
    TarWriter w;
    w.add_file("f", std::string_view(std::string(600, 'a')));
    Bytes tar = w.finish();

    Bytes mid_header(tar.begin(), tar.begin() + 200);
    TarReader r1(mid_header);
    CHECK_THROWS_AS(r1.next(), TruncatedArchive);

    Bytes mid_body(tar.begin(), tar.begin() + 512 + 100);
    TarReader r2(mid_body);
    CHECK_THROWS_AS(r2.next(), TruncatedArchive);
}

TEST_CASE("long names use the ustar prefix split") {
    std::string dir(120, 'd');
    std::string name = dir + "/leaf_file_with_a_reasonably_long_name.txt";
    TarWriter w;
    w.add_file(name, std::string_view("deep"));
    Bytes tar = w.finish();
    TarReader r(tar);
    auto m = r.next();
    REQUIRE(m.has_value());
    CHECK(m->name == name);
    CHECK(to_string(m->data) == "deep");
}

TEST_CASE("gnu long-name members apply to the following entry") {
    std::string longname(180, 'n');
    longname += "/leaf";
    // build an 'L' member by hand: its payload is the real name
    TarWriter helper;
    helper.add_file("././@LongLink", std::string_view(longname));
    helper.add_file("truncated_name", std::string_view("payload"));
    Bytes tar = helper.finish();
    tar[156] = 'L';  // typeflag of the first header
    // re-fix the checksum for the patched header
    {
        uint8_t* block = tar.data();
        std::memset(block + 148, ' ', 8);
        unsigned sum = 0;
        for (size_t i = 0; i < 512; ++i) sum += block[i];
        std::snprintf((char*)block + 148, 7, "%06o", sum);
        block[155] = ' ';
    }
    TarReader r(tar);
    auto m = r.next();
    REQUIRE(m.has_value());
    CHECK(m->name == longname);
    CHECK(to_string(m->data) == "payload");
}

TEST_CASE("tar bytes are deterministic") {
    auto build = [] {
        TarWriter w;
        w.add_file("a", std::string_view("1"));
        w.add_file("b", std::string_view("2"));
        return w.finish();
    };
    CHECK(build() == build());
}
