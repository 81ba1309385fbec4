#include "bdiff/fixturegen.hpp"

#include <sqlite3.h>

#include <algorithm>
#include <cstring>
#include <set>

#include <nlohmann/json.hpp>

#include "bdiff/errors.hpp"
#include "bdiff/pathmap.hpp"
#include "bdiff/tar.hpp"
#include "bdiff/android_ab.hpp"
#include "bdiff/wal.hpp"

namespace bdiff {

namespace fs = std::filesystem;
using nlohmann::json;

uint64_t DeterministicRng::next() {
    // splitmix64
    uint64_t z = (state_ += 0x9e3779b97f4a7c15ULL);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

uint64_t DeterministicRng::below(uint64_t bound) { return bound == 0 ? 0 : next() % bound; }

double DeterministicRng::unit() { return double(next() >> 11) * 0x1.0p-53; }

Bytes DeterministicRng::bytes(size_t n, bool text) {
    Bytes out(n);
    if (text) {
        static const char alphabet[] =
            "abcdefghijklmnopqrstuvwxyz ABCDEFGHIJKLMNOPQRSTUVWXYZ0123456789\n";
        for (size_t i = 0; i < n; ++i) out[i] = uint8_t(alphabet[below(sizeof(alphabet) - 1)]);
    } else {
        for (size_t i = 0; i < n; ++i) out[i] = uint8_t(next() & 0xff);
    }
    return out;
}

std::string DeterministicRng::word() {
    static const char* pool[] = {"alpha", "bravo", "cache",  "delta", "echo",  "files", "golf",
                                 "hotel", "index", "juliet", "kilo",  "lima",  "media", "note",
                                 "oscar", "photo", "queue",  "romeo", "sierra", "tango"};
    return pool[below(std::size(pool))];
}

namespace {

const char* kAndroidPackages[] = {"com.example.alpha", "com.example.beta", "org.sample.gamma"};
const char* kIosBundles[] = {"net.sample.chat", "org.sample.notes"};

uint64_t fnv1a(const std::string& s) {
    uint64_t h = 1469598103934665603ULL;
    for (unsigned char c : s) {
        h ^= c;
        h *= 1099511628211ULL;
    }
    return h;
}

size_t draw_size(DeterministicRng& rng) {
    uint64_t bucket = rng.below(100);
    if (bucket < 80) return size_t(rng.below(513));
    if (bucket < 95) return size_t(rng.below(4097));
    return size_t(rng.below(65537));
}

std::string unique_path(FileTree& tree, std::string base) {
    std::string path = base;
    int suffix = 1;
    while (tree.count(path)) path = base + "_" + std::to_string(suffix++);
    return path;
}

}  // namespace

FileTree gen_base_tree(uint64_t seed, size_t n_files, Platform platform) {
    DeterministicRng rng(seed);
    FileTree tree;
    std::string ios_uuid[2];
    if (platform == Platform::Ios) {
        for (int i = 0; i < 2; ++i) {
            std::string u;
            for (int j = 0; j < 32; ++j) u += "0123456789ABCDEF"[rng.below(16)];
            ios_uuid[i] = u;
            std::string marker = std::string(kIosContainerRoot) + "/" + u + "/" +
                                 kContainerMarkerFile;
            tree[marker] = to_bytes(kIosBundles[i]);
        }
    }
    while (tree.size() < n_files) {
        std::string dir;
        switch (platform) {
            case Platform::Android: {
                const char* pkg = kAndroidPackages[rng.below(std::size(kAndroidPackages))];
                switch (rng.below(6)) {
                    case 0: dir = std::string("/data/data/") + pkg + "/files"; break;
                    case 1: dir = std::string("/data/data/") + pkg + "/databases"; break;
                    case 2: dir = std::string("/data/data/") + pkg + "/shared_prefs"; break;
                    case 3: dir = std::string("/data/user_de/0/") + pkg + "/files"; break;
                    case 4: dir = std::string("/data/media/0/") + rng.word(); break;
                    default:
                        dir = std::string("/data/media/0/Android/data/") + pkg + "/" + rng.word();
                }
                break;
            }
            case Platform::Ios: {
                switch (rng.below(4)) {
                    case 0: dir = std::string(kIosHomeRoot) + "/Library/" + rng.word(); break;
                    case 1: dir = std::string(kIosHomeRoot) + "/Documents"; break;
                    default:
                        dir = std::string(kIosContainerRoot) + "/" + ios_uuid[rng.below(2)] +
                              "/Documents";
                }
                break;
            }
            default: {
                dir = "/base/" + rng.word();
                if (rng.below(2)) dir += "/" + rng.word();
            }
        }
        std::string name = rng.word() + "_" + std::to_string(rng.below(10000));
        if (rng.below(3) == 0) name += ".txt";
        bool text = rng.below(2) == 0;
        std::string path = unique_path(tree, dir + "/" + name);
        tree[path] = rng.bytes(draw_size(rng), text);
    }
    return tree;
}

namespace {

const char* to_string(MutationWindow w) {
    switch (w) {
        case MutationWindow::BeforeBackup: return "before_backup";
        case MutationWindow::DuringBackup: return "during_backup";
        default: return "after_backup";
    }
}
const char* to_string(MutationAction a) {
    switch (a) {
        case MutationAction::Rewrite: return "rewrite";
        case MutationAction::Delete: return "delete";
        default: return "create";
    }
}
MutationWindow window_from(const std::string& s) {
    if (s == "before_backup") return MutationWindow::BeforeBackup;
    if (s == "during_backup") return MutationWindow::DuringBackup;
    if (s == "after_backup") return MutationWindow::AfterBackup;
    throw InvalidPlan("unknown mutation window '" + s + "'");
}
MutationAction action_from(const std::string& s) {
    if (s == "rewrite") return MutationAction::Rewrite;
    if (s == "delete") return MutationAction::Delete;
    if (s == "create") return MutationAction::Create;
    throw InvalidPlan("unknown mutation action '" + s + "'");
}

}  // namespace

MutationPlan plan_from_json_text(const std::string& text) {
    json doc = json::parse(text);
    MutationPlan p;
    p.seed = doc.value("seed", 1ULL);
    p.n_files = doc.value("n_files", size_t(10));
    p.backup_inclusion_rate = doc.value("backup_inclusion_rate", 1.0);
    p.platform = platform_from(doc.value("platform", "generic"));
    p.include_db = doc.value("include_db", false);
    if (doc.contains("mutations"))
        for (const auto& jm : doc["mutations"])
            p.mutations.push_back({jm.at("target").get<std::string>(),
                                   window_from(jm.at("window").get<std::string>()),
                                   action_from(jm.at("action").get<std::string>())});
    return p;
}

std::string plan_to_json_text(const MutationPlan& plan) {
    json doc{{"seed", plan.seed},
             {"n_files", plan.n_files},
             {"backup_inclusion_rate", plan.backup_inclusion_rate},
             {"platform", to_string(plan.platform)},
             {"include_db", plan.include_db}};
    doc["mutations"] = json::array();
    for (const auto& m : plan.mutations)
        doc["mutations"].push_back({{"target", m.target_name},
                                    {"window", to_string(m.window)},
                                    {"action", to_string(m.action)}});
    return doc.dump(2) + "\n";
}

namespace {

struct RunStates {
    FileTree pre, backup, post;
    RunClassification expected;
};

void apply_window(FileTree& device, const MutationPlan& plan, MutationWindow window,
                  DeterministicRng& fresh) {
    std::set<std::string> touched;
    for (const auto& m : plan.mutations) {
        if (m.window != window) continue;
        if (!touched.insert(m.target_name).second)
            throw InvalidPlan("two mutations touch '" + m.target_name + "' in one window");
        switch (m.action) {
            case MutationAction::Rewrite: {
                auto it = device.find(m.target_name);
                if (it == device.end())
                    throw InvalidPlan("rewrite target missing: " + m.target_name);
                Bytes nv = fresh.bytes(1 + draw_size(fresh), fresh.below(2) == 0);
                if (nv == it->second) nv.push_back('!');
                it->second = std::move(nv);
                break;
            }
            case MutationAction::Delete:
                if (device.erase(m.target_name) == 0)
                    throw InvalidPlan("delete target missing: " + m.target_name);
                break;
            case MutationAction::Create: {
                if (device.count(m.target_name))
                    throw InvalidPlan("create target already exists: " + m.target_name);
                device[m.target_name] = fresh.bytes(1 + draw_size(fresh), true);
                break;
            }
        }
    }
}

RunStates compute_run_states(const MutationPlan& plan) {
    FileTree base = gen_base_tree(plan.seed, plan.n_files, plan.platform);

    std::string db_path, wal_path;
    WalFixture walfx;
    if (plan.include_db) {
        walfx = gen_wal_fixture(plan.seed);
        std::string dbdir = plan.platform == Platform::Android
                                ? std::string("/data/data/") + kAndroidPackages[0] + "/databases"
                            : plan.platform == Platform::Ios
                                ? std::string(kIosHomeRoot) + "/Library/Databases"
                                : "/base/databases";
        db_path = dbdir + "/app.db";
        wal_path = db_path + "-wal";
        base[db_path] = walfx.db;
        base[wal_path] = walfx.wal;
    }

    std::set<std::string> targeted;
    for (const auto& m : plan.mutations) targeted.insert(m.target_name);

    RunStates out;
    out.pre = base;
    FileTree device = base;
    DeterministicRng fresh(plan.seed ^ 0x5eedf00dULL);

    apply_window(device, plan, MutationWindow::BeforeBackup, fresh);

    // Instantaneous backup copy. Mutation targets are always included so a
    // planned change lands in its intended class; the inclusion draw is
    // per-name, independent of mutation order.
    for (const auto& [name, bytes] : device) {
        bool include;
        if (targeted.count(name)) {
            include = true;
        } else if (name == wal_path) {
            include = false;  // pending logs never ride along
        } else if (name == db_path) {
            include = true;
        } else {
            DeterministicRng draw(plan.seed ^ fnv1a(name));
            include = draw.unit() < plan.backup_inclusion_rate;
        }
        if (include) out.backup[name] = bytes;
    }
    if (plan.include_db && out.backup.count(db_path))
        out.backup[db_path] = walfx.checkpointed;  // the backup folds pending frames in

    apply_window(out.backup, plan, MutationWindow::DuringBackup, fresh);
    apply_window(device, plan, MutationWindow::AfterBackup, fresh);
    out.post = device;

    // Ground truth per name, straight from the three value maps.
    RunClassification& rc = out.expected;
    for (const auto& [name, _] : out.pre) rc.e.insert(name);
    for (const auto& [name, _] : out.backup) rc.e.insert(name);
    for (const auto& name : rc.e) {
        auto pi = out.pre.find(name);
        auto bi = out.backup.find(name);
        if (pi != out.pre.end() && bi == out.backup.end()) {
            rc.n_over.insert(name);
        } else if (pi == out.pre.end() && bi != out.backup.end()) {
            rc.n_new.insert(name);
            if (out.post.count(name)) rc.n_new_in_post.insert(name);
        } else {
            rc.n_both.insert(name);
            if (pi->second == bi->second) {
                rc.v_eq.insert(name);
            } else {
                rc.v_ch.insert(name);
                auto qi = out.post.find(name);
                if (qi == out.post.end()) rc.p_mis.insert(name);
                else if (qi->second == bi->second) rc.p_mback.insert(name);
                else if (qi->second == pi->second) rc.p_mpre.insert(name);
                else rc.p_nom.insert(name);
            }
        }
    }
    return out;
}

Snapshot snapshot_of(const FileTree& tree, SnapshotLabel label, Platform platform, int run_id) {
    auto store = std::make_shared<MemBlobStore>();
    SnapshotBuilder b(store);
    b.label(label).platform(platform).run_id(run_id);
    for (const auto& [name, bytes] : tree) b.add(name, EntryKind::FileBased, bytes);
    return b.build();
}

}  // namespace

RunTriple gen_run(const MutationPlan& plan, int run_id) {
    RunStates st = compute_run_states(plan);
    RunTriple out;
    out.pre = snapshot_of(st.pre, SnapshotLabel::Pre, plan.platform, run_id);
    out.backup = snapshot_of(st.backup, SnapshotLabel::Backup, plan.platform, run_id);
    out.post = snapshot_of(st.post, SnapshotLabel::Post, plan.platform, run_id);
    out.expected = std::move(st.expected);
    out.expected.run_id = run_id;
    return out;
}

MutationPlan random_plan(uint64_t seed, size_t max_files, Platform platform) {
    DeterministicRng rng(seed * 0x9e3779b97f4a7c15ULL + 1);
    MutationPlan plan;
    plan.seed = seed;
    plan.n_files = 5 + size_t(rng.below(max_files > 5 ? max_files - 5 : 1));
    plan.backup_inclusion_rate = 0.3 + 0.7 * rng.unit();
    plan.platform = platform;

    FileTree base = gen_base_tree(plan.seed, plan.n_files, plan.platform);
    std::vector<std::string> names;
    for (const auto& [n, _] : base) names.push_back(n);
    for (size_t i = names.size(); i > 1; --i) std::swap(names[i - 1], names[rng.below(i)]);

    size_t cursor = 0;
    auto take = [&]() -> std::optional<std::string> {
        if (cursor >= names.size()) return std::nullopt;
        return names[cursor++];
    };
    auto add = [&plan](const std::string& t, MutationWindow w, MutationAction a) {
        plan.mutations.push_back({t, w, a});
    };

    // Canonical recipes, each tied to one expected class.
    for (uint64_t i = rng.below(4); i > 0; --i)
        if (auto t = take()) add(*t, MutationWindow::BeforeBackup, MutationAction::Rewrite);
    for (uint64_t i = rng.below(4); i > 0; --i)
        if (auto t = take()) add(*t, MutationWindow::DuringBackup, MutationAction::Rewrite);
    for (uint64_t i = rng.below(3); i > 0; --i)
        if (auto t = take()) {
            add(*t, MutationWindow::BeforeBackup, MutationAction::Rewrite);
            add(*t, MutationWindow::AfterBackup, MutationAction::Rewrite);
        }
    for (uint64_t i = rng.below(3); i > 0; --i)
        if (auto t = take()) {
            add(*t, MutationWindow::DuringBackup, MutationAction::Rewrite);
            add(*t, MutationWindow::AfterBackup, MutationAction::Delete);
        }
    std::string created_root = platform == Platform::Android
                                   ? std::string("/data/data/") + kAndroidPackages[0] + "/files"
                               : platform == Platform::Ios
                                   ? std::string(kIosHomeRoot) + "/Documents"
                                   : "/spurious";
    for (uint64_t i = rng.below(3); i > 0; --i)
        add(created_root + "/created_" + std::to_string(i) + "_" + std::to_string(seed),
            MutationWindow::DuringBackup, MutationAction::Create);
    for (uint64_t i = rng.below(2); i > 0; --i)
        if (auto t = take()) add(*t, MutationWindow::BeforeBackup, MutationAction::Delete);
    for (uint64_t i = rng.below(2); i > 0; --i)
        if (auto t = take()) add(*t, MutationWindow::AfterBackup, MutationAction::Rewrite);
    return plan;
}

Bytes normalize_wal_salts(std::span<const uint8_t> wal, uint32_t salt1, uint32_t salt2) {
    auto be32 = [](const uint8_t* p) {
        return (uint32_t(p[0]) << 24) | (uint32_t(p[1]) << 16) | (uint32_t(p[2]) << 8) |
               uint32_t(p[3]);
    };
    auto put_be32 = [](uint8_t* p, uint32_t v) {
        p[0] = uint8_t(v >> 24);
        p[1] = uint8_t(v >> 16);
        p[2] = uint8_t(v >> 8);
        p[3] = uint8_t(v);
    };
    if (wal.size() < 32) throw WalMismatch("log too short to normalize");
    Bytes out(wal.begin(), wal.end());
    uint32_t magic = be32(out.data());
    if ((magic & 0xfffffffe) != 0x377f0682) throw WalMismatch("bad log magic");
    bool bigend = (magic & 1) != 0;
    uint32_t psz = be32(out.data() + 8);
    uint32_t old_salt1 = be32(out.data() + 16);
    uint32_t old_salt2 = be32(out.data() + 20);
    put_be32(out.data() + 16, salt1);
    put_be32(out.data() + 20, salt2);

    auto feed = [&](uint32_t& s0, uint32_t& s1, const uint8_t* p, size_t n) {
        for (size_t i = 0; i + 8 <= n; i += 8) {
            uint32_t x0 = bigend ? be32(p + i)
                                 : (uint32_t(p[i]) | (uint32_t(p[i + 1]) << 8) |
                                    (uint32_t(p[i + 2]) << 16) | (uint32_t(p[i + 3]) << 24));
            uint32_t x1 = bigend ? be32(p + i + 4)
                                 : (uint32_t(p[i + 4]) | (uint32_t(p[i + 5]) << 8) |
                                    (uint32_t(p[i + 6]) << 16) | (uint32_t(p[i + 7]) << 24));
            s0 += x0 + s1;
            s1 += x1 + s0;
        }
    };
    uint32_t s0 = 0, s1 = 0;
    feed(s0, s1, out.data(), 24);
    put_be32(out.data() + 24, s0);
    put_be32(out.data() + 28, s1);

    size_t frame_size = 24 + psz;
    size_t pos = 32;
    while (pos + frame_size <= out.size()) {
        uint8_t* fh = out.data() + pos;
        if (be32(fh + 8) != old_salt1 || be32(fh + 12) != old_salt2) break;  // stale tail
        put_be32(fh + 8, salt1);
        put_be32(fh + 12, salt2);
        feed(s0, s1, fh, 8);
        feed(s0, s1, fh + 24, psz);
        put_be32(fh + 16, s0);
        put_be32(fh + 20, s1);
        pos += frame_size;
    }
    out.resize(pos);
    return out;
}

namespace {

struct SqliteHandle {
    sqlite3* db = nullptr;
    ~SqliteHandle() { sqlite3_close(db); }
    void exec(const std::string& sql) {
        char* err = nullptr;
        if (sqlite3_exec(db, sql.c_str(), nullptr, nullptr, &err) != SQLITE_OK) {
            std::string msg = err ? err : "unknown";
            sqlite3_free(err);
            throw Error("fixture sql failed: " + msg + " (" + sql + ")");
        }
    }
};

}  // namespace

WalFixture gen_wal_fixture(uint64_t seed) {
    DeterministicRng rng(seed ^ 0x77a15eedULL);
    WalFixture out;
    ScratchDir scratch("walfx");
    fs::path dbp = scratch.path() / "f.db";
    {
        SqliteHandle h;
        if (sqlite3_open(dbp.string().c_str(), &h.db) != SQLITE_OK)
            throw Error("cannot create fixture database");
        sqlite3_db_config(h.db, SQLITE_DBCONFIG_NO_CKPT_ON_CLOSE, 1, nullptr);
        int one = 1;
        sqlite3_file_control(h.db, "main", SQLITE_FCNTL_PERSIST_WAL, &one);
        sqlite3_wal_autocheckpoint(h.db, 0);
        h.exec("PRAGMA page_size=4096;");
        h.exec("PRAGMA journal_mode=WAL;");
        h.exec("CREATE TABLE items(id INTEGER PRIMARY KEY, label TEXT, payload BLOB);");
        size_t base_rows = 3 + size_t(seed % 5);
        for (size_t i = 0; i < base_rows; ++i)
            h.exec("INSERT INTO items VALUES(" + std::to_string(i + 1) + ", '" +
                   to_string(rng.bytes(12, true)) + "', x'" +
                   to_hex(rng.bytes(16, false)) + "');");
        h.exec("PRAGMA wal_checkpoint(TRUNCATE);");
        size_t pending_rows = 1 + size_t(seed % 3);
        for (size_t i = 0; i < pending_rows; ++i)
            h.exec("INSERT INTO items VALUES(" + std::to_string(100 + i) + ", '" +
                   to_string(rng.bytes(12, true)) + "', x'" +
                   to_hex(rng.bytes(16, false)) + "');");
    }
    out.db = read_file(dbp);
    Bytes raw_wal = read_file(dbp.string() + "-wal");
    out.wal = normalize_wal_salts(raw_wal, uint32_t(seed * 2654435761ULL + 17),
                                  uint32_t(seed * 40503ULL + 29));

    fs::path cpt = scratch.path() / "c.db";
    write_file(cpt, out.db);
    write_file(cpt.string() + "-wal", out.wal);
    {
        SqliteHandle h;
        if (sqlite3_open(cpt.string().c_str(), &h.db) != SQLITE_OK)
            throw Error("cannot open checkpoint copy");
        h.exec("PRAGMA wal_checkpoint(TRUNCATE);");
    }
    out.checkpointed = read_file(cpt);
    return out;
}

std::optional<std::string> android_member_for(const std::string& device_path) {
    struct Prefix {
        const char* root;
        const char* token;  // nullptr: fixed-target rule
    };
    // Order matters: more specific package areas first.
    auto try_pkg = [&](const std::string& root, const char* token,
                       const std::string& area) -> std::optional<std::string> {
        if (!device_path.starts_with(root)) return std::nullopt;
        std::string rest = device_path.substr(root.size());
        size_t slash = rest.find('/');
        if (slash == std::string::npos || slash == 0) return std::nullopt;
        std::string pkg = rest.substr(0, slash);
        std::string tail = rest.substr(slash + 1);
        if (!area.empty()) {
            if (!tail.starts_with(area + "/")) return std::nullopt;
            tail = tail.substr(area.size() + 1);
        }
        if (tail.empty()) return std::nullopt;
        return "apps/" + pkg + "/" + token + "/" + tail;
    };
    if (auto m = try_pkg("/data/media/0/Android/data/", "ef", "")) return m;
    if (device_path.starts_with("/data/media/0/")) {
        std::string tail = device_path.substr(std::strlen("/data/media/0/"));
        if (!tail.empty()) return "shared/0/" + tail;
    }
    if (auto m = try_pkg("/data/data/", "f", "files")) return m;
    if (auto m = try_pkg("/data/data/", "db", "databases")) return m;
    if (auto m = try_pkg("/data/data/", "sp", "shared_prefs")) return m;
    if (auto m = try_pkg("/data/data/", "c", "cache")) return m;
    if (auto m = try_pkg("/data/data/", "r", "")) return m;
    if (auto m = try_pkg("/data/user_de/0/", "d_f", "files")) return m;
    if (auto m = try_pkg("/data/user_de/0/", "d_db", "databases")) return m;
    if (auto m = try_pkg("/data/user_de/0/", "d_sp", "shared_prefs")) return m;
    if (auto m = try_pkg("/data/user_de/0/", "d_r", "")) return m;
    if (auto m = try_pkg("/data/app/", "a", "")) return m;
    return std::nullopt;
}

Bytes emit_android_ab(const FileTree& files) {
    std::map<std::string, const Bytes*> members;
    for (const auto& [path, bytes] : files) {
        auto member = android_member_for(path);
        if (!member) throw InvalidPlan("device path outside the token table: " + path);
        members[*member] = &bytes;
    }
    TarWriter tw;
    for (const auto& [member, bytes] : members) tw.add_file(member, *bytes);
    return wrap_android_backup(tw.finish());
}

void materialize_ios_backup(const FileTree& files,
                            const std::map<std::string, std::string>& bundle_containers,
                            const fs::path& dir) {
    std::map<std::string, std::string> bundle_by_container;
    for (const auto& [bundle, container] : bundle_containers)
        bundle_by_container[container] = bundle;

    SqliteHandle h;
    if (sqlite3_open(":memory:", &h.db) != SQLITE_OK)
        throw Error("cannot open manifest scratch database");
    h.exec(
        "CREATE TABLE Files(fileID TEXT PRIMARY KEY, domain TEXT, relativePath TEXT, "
        "flags INTEGER, file BLOB);");

    fs::create_directories(dir);
    const std::string container_root = std::string(kIosContainerRoot) + "/";
    const std::string home_root = std::string(kIosHomeRoot) + "/";
    for (const auto& [path, bytes] : files) {
        std::string domain, rel;
        if (path.starts_with(container_root)) {
            std::string rest = path.substr(container_root.size());
            size_t slash = rest.find('/');
            if (slash == std::string::npos) throw InvalidPlan("container path too short: " + path);
            std::string uuid = rest.substr(0, slash);
            auto it = bundle_by_container.find(uuid);
            if (it == bundle_by_container.end())
                throw InvalidPlan("no bundle known for container " + uuid);
            domain = "AppDomain-" + it->second;
            rel = rest.substr(slash + 1);
        } else if (path.starts_with(home_root)) {
            domain = "HomeDomain";
            rel = path.substr(home_root.size());
        } else {
            throw InvalidPlan("device path outside backup domains: " + path);
        }
        std::string file_id = compute_file_id(domain, rel);
        write_file(dir / file_id.substr(0, 2) / file_id, bytes);

        sqlite3_stmt* stmt = nullptr;
        sqlite3_prepare_v2(h.db, "INSERT INTO Files VALUES(?,?,?,1,NULL)", -1, &stmt, nullptr);
        sqlite3_bind_text(stmt, 1, file_id.c_str(), -1, SQLITE_TRANSIENT);
        sqlite3_bind_text(stmt, 2, domain.c_str(), -1, SQLITE_TRANSIENT);
        sqlite3_bind_text(stmt, 3, rel.c_str(), -1, SQLITE_TRANSIENT);
        if (sqlite3_step(stmt) != SQLITE_DONE) {
            sqlite3_finalize(stmt);
            throw Error("manifest insert failed for " + path);
        }
        sqlite3_finalize(stmt);
    }
    sqlite3_int64 n = 0;
    unsigned char* image = sqlite3_serialize(h.db, "main", &n, 0);
    if (!image) throw Error("manifest serialize failed");
    write_file(dir / "Manifest.db", std::span<const uint8_t>(image, size_t(n)));
    sqlite3_free(image);
}

void materialize_tree(const FileTree& files, const fs::path& dir) {
    fs::create_directories(dir);
    for (const auto& [path, bytes] : files) {
        std::string rel = path.starts_with('/') ? path.substr(1) : path;
        write_file(dir / rel, bytes);
    }
}

void materialize_android_run(const MutationPlan& plan, const fs::path& dir) {
    if (plan.platform != Platform::Android)
        throw InvalidPlan("android run materialization needs an android-shaped plan");
    RunStates st = compute_run_states(plan);
    materialize_tree(st.pre, dir / "pre");
    materialize_tree(st.post, dir / "post");
    write_file(dir / "backup.ab", emit_android_ab(st.backup));

    json expected;
    auto names = [](const NameSet& s) { return std::vector<std::string>(s.begin(), s.end()); };
    expected["e"] = names(st.expected.e);
    expected["n_over"] = names(st.expected.n_over);
    expected["n_new"] = names(st.expected.n_new);
    expected["n_both"] = names(st.expected.n_both);
    expected["v_eq"] = names(st.expected.v_eq);
    expected["v_ch"] = names(st.expected.v_ch);
    expected["p_mis"] = names(st.expected.p_mis);
    expected["p_mback"] = names(st.expected.p_mback);
    expected["p_mpre"] = names(st.expected.p_mpre);
    expected["p_nom"] = names(st.expected.p_nom);
    write_file(dir / "expected.json", expected.dump(2) + "\n");
}

}  // namespace bdiff
