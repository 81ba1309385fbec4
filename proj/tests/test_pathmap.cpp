#include <doctest.h>

#include "bdiff/errors.hpp"
#include "bdiff/fixturegen.hpp"
#include "bdiff/pathmap.hpp"
#include "oracles.hpp"

using namespace bdiff;

TEST_CASE("android token table expands package areas") {
    MappingTable t = MappingTable::builtin();
    auto mapped = [&](const std::string& member) {
        auto r = t.map_android(member);
        REQUIRE(r.kind == AndroidMapResult::Kind::Mapped);
        return r.device_path;
    };
    CHECK(mapped("apps/com.whatsapp/f/log.txt") == "/data/data/com.whatsapp/files/log.txt");
    CHECK(mapped("apps/com.x/db/msgs.db") == "/data/data/com.x/databases/msgs.db");
    CHECK(mapped("apps/com.x/sp/prefs.xml") == "/data/data/com.x/shared_prefs/prefs.xml");
    CHECK(mapped("apps/com.x/d_f/000000_sms_backup") ==
          "/data/user_de/0/com.x/files/000000_sms_backup");
    CHECK(mapped("apps/com.x/ef/cache/img") == "/data/media/0/Android/data/com.x/cache/img");
    CHECK(mapped("apps/com.x/r/top.cfg") == "/data/data/com.x/top.cfg");
    CHECK(mapped("shared/0/DCIM/img.jpg") == "/data/media/0/DCIM/img.jpg");
}

TEST_CASE("key-value members are carriers, not file paths") {
    MappingTable t = MappingTable::builtin();
    auto r = t.map_android("apps/com.android.calllogbackup/k/com.android.calllogbackup.data");
    REQUIRE(r.kind == AndroidMapResult::Kind::KvCarrier);
    CHECK(r.package == "com.android.calllogbackup");
    CHECK(r.kv_file == "com.android.calllogbackup.data");
}

TEST_CASE("unknown tokens yield Unmapped") {
    MappingTable t = MappingTable::builtin();
    CHECK(t.map_android("apps/com.x/zz/file").kind == AndroidMapResult::Kind::Unmapped);
    CHECK(t.map_android("_manifest").kind == AndroidMapResult::Kind::Unmapped);
    CHECK(t.map_android("apps/com.x/f").kind == AndroidMapResult::Kind::Unmapped);
}

TEST_CASE("rules can be loaded from a file and override the table") {
    ScratchDir scratch("rules");
    write_file(scratch.path() / "rules.txt",
               std::string("# test rules\n") +
                   "android apps/<pkg>/f/<rest> => /custom/<pkg>/<rest>\n" +
                   "android shared/0/<rest> => /media/<rest>\n");
    MappingTable t = MappingTable::load_rules_file(scratch.path() / "rules.txt");
    CHECK(t.map_android("apps/a.b/f/x").device_path == "/custom/a.b/x");
    CHECK(t.map_android("shared/0/y").device_path == "/media/y");
    CHECK(t.map_android("apps/a.b/db/x").kind == AndroidMapResult::Kind::Unmapped);
}

TEST_CASE("fixture emitter and token table are mutually inverse") {
    FileTree tree = gen_base_tree(404, 60, Platform::Android);
    MappingTable t = MappingTable::builtin();
    for (const auto& [device_path, _] : tree) {
        auto member = android_member_for(device_path);
        REQUIRE_MESSAGE(member.has_value(), device_path);
        auto r = t.map_android(*member);
        REQUIRE(r.kind == AndroidMapResult::Kind::Mapped);
        CHECK(r.device_path == device_path);
    }
}

TEST_CASE("ios home domain maps to the mobile root") {
    ContainerResolver empty;
    CHECK(map_ios_manifest_row("HomeDomain", "Library/SMS/sms.db", empty) ==
          "/private/var/mobile/Library/SMS/sms.db");
}

TEST_CASE("app domains resolve through the container resolver") {
    ContainerResolver r;
    r.add("net.whatsapp.WhatsApp", std::string(kIosContainerRoot) + "/UUID-1234");
    CHECK(map_ios_manifest_row("AppDomain-net.whatsapp.WhatsApp", "Documents/x", r) ==
          "/private/var/mobile/Containers/Data/Application/UUID-1234/Documents/x");
}

TEST_CASE("unresolved domains fall back to the symbolic form") {
    ContainerResolver empty;
    CHECK(map_ios_manifest_row("CameraRollDomain", "Media/DCIM/100APPLE/IMG_0001.JPG", empty) ==
          "CameraRollDomain:Media/DCIM/100APPLE/IMG_0001.JPG");
    CHECK(map_ios_manifest_row("AppDomain-not.installed", "Documents/y", empty) ==
          "AppDomain-not.installed:Documents/y");
}

TEST_CASE("malformed domains are rejected") {
    ContainerResolver empty;
    CHECK_THROWS_AS(map_ios_manifest_row("", "x", empty), MalformedDomain);
    CHECK_THROWS_AS(map_ios_manifest_row("Weird:Domain", "x", empty), MalformedDomain);
    CHECK_THROWS_AS(map_ios_manifest_row("AppDomain-", "x", empty), MalformedDomain);
}

TEST_CASE("file identifiers hash domain-dash-path") {
    CHECK(compute_file_id("", "") == oracle::sha1_hex("-"));
    CHECK(compute_file_id("HomeDomain", "Library/x.txt") ==
          oracle::sha1_hex("HomeDomain-Library/x.txt"));
    // well-known self-test vector for the underlying 160-bit hash
    CHECK(sha1_hex("") == "da39a3ee5e6b4b0d3255bfef95601890afd80709");
}

TEST_CASE("resolver scan picks up container markers from a reference snapshot") {
    SnapshotBuilder b(std::make_shared<MemBlobStore>());
    std::string container = std::string(kIosContainerRoot) + "/ABCDEF";
    b.add(container + "/" + kContainerMarkerFile, EntryKind::FileBased,
          std::string_view("org.sample.notes\n"));
    b.add(container + "/Documents/n.txt", EntryKind::FileBased, std::string_view("x"));
    Snapshot snap = b.build();
    ContainerResolver r = ContainerResolver::scan_reference(snap);
    REQUIRE(r.size() == 1);
    CHECK(r.container_for("org.sample.notes") == container);
}
