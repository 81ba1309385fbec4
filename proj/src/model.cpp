#include "bdiff/model.hpp"

#include <fstream>

#include <nlohmann/json.hpp>

#include "bdiff/errors.hpp"

namespace bdiff {

namespace fs = std::filesystem;
using nlohmann::json;

const char* to_string(EntryKind k) {
    return k == EntryKind::FileBased ? "file" : "content";
}

const char* to_string(SnapshotLabel l) {
    switch (l) {
        case SnapshotLabel::Pre: return "pre";
        case SnapshotLabel::Backup: return "backup";
        default: return "post";
    }
}

const char* to_string(Platform p) {
    switch (p) {
        case Platform::Android: return "android";
        case Platform::Ios: return "ios";
        default: return "generic";
    }
}

const char* to_string(PClass c) {
    switch (c) {
        case PClass::Mis: return "p_mis";
        case PClass::Mback: return "p_mback";
        case PClass::Mpre: return "p_mpre";
        default: return "p_nom";
    }
}

EntryKind entry_kind_from(const std::string& s) {
    if (s == "file") return EntryKind::FileBased;
    if (s == "content") return EntryKind::ContentBased;
    throw CorruptManifest("unknown entry kind '" + s + "'");
}

SnapshotLabel label_from(const std::string& s) {
    if (s == "pre") return SnapshotLabel::Pre;
    if (s == "backup") return SnapshotLabel::Backup;
    if (s == "post") return SnapshotLabel::Post;
    throw CorruptManifest("unknown snapshot label '" + s + "'");
}

Platform platform_from(const std::string& s) {
    if (s == "android") return Platform::Android;
    if (s == "ios") return Platform::Ios;
    if (s == "generic") return Platform::Generic;
    throw CorruptManifest("unknown platform '" + s + "'");
}

const Entry* Snapshot::find(const std::string& name) const {
    auto it = entries_.find(name);
    return it == entries_.end() ? nullptr : &it->second;
}

NameSet Snapshot::names() const {
    NameSet out;
    for (const auto& [n, _] : entries_) out.insert(out.end(), n);
    return out;
}

Bytes Snapshot::load_value(const Entry& e) const {
    if (!store_) throw IOFailure("snapshot has no blob store (entry " + e.name + ")");
    Bytes data;
    try {
        data = store_->load(e.digest);
    } catch (const Error& err) {
        throw IOFailure("entry " + e.name + ": " + err.what());
    }
    if (sha256(data) != e.digest)
        throw DigestMismatch("entry " + e.name + ": stored bytes do not match digest");
    if (data.size() != e.size)
        throw DigestMismatch("entry " + e.name + ": stored size " + std::to_string(data.size()) +
                             " != declared " + std::to_string(e.size));
    return data;
}

Bytes Snapshot::load_value(const std::string& name) const {
    const Entry* e = find(name);
    if (!e) throw IOFailure("no entry named " + name);
    return load_value(*e);
}

SnapshotBuilder::SnapshotBuilder(std::shared_ptr<BlobStore> store) : store_(std::move(store)) {
    snap_.store_ = store_;
}

SnapshotBuilder& SnapshotBuilder::label(SnapshotLabel l) {
    snap_.label = l;
    return *this;
}
SnapshotBuilder& SnapshotBuilder::platform(Platform p) {
    snap_.platform = p;
    return *this;
}
SnapshotBuilder& SnapshotBuilder::run_id(int id) {
    snap_.run_id = id;
    return *this;
}
SnapshotBuilder& SnapshotBuilder::captured_at(std::string ts) {
    snap_.captured_at = std::move(ts);
    return *this;
}

Digest SnapshotBuilder::add(const std::string& name, EntryKind kind,
                            std::span<const uint8_t> value) {
    if (snap_.entries_.count(name) > 0)
        throw MappingCollision("two sources produced the name " + name);
    Digest d = store_->put(value);
    snap_.entries_[name] = Entry{name, kind, value.size(), d};
    return d;
}

Digest SnapshotBuilder::add(const std::string& name, EntryKind kind, std::string_view value) {
    return add(name, kind,
               std::span<const uint8_t>(reinterpret_cast<const uint8_t*>(value.data()),
                                        value.size()));
}

bool SnapshotBuilder::add_or_replace(const std::string& name, EntryKind kind,
                                     std::span<const uint8_t> value) {
    bool replaced = snap_.entries_.count(name) > 0;
    Digest d = store_->put(value);
    snap_.entries_[name] = Entry{name, kind, value.size(), d};
    return replaced;
}

void SnapshotBuilder::add_stored(const Entry& e) {
    if (snap_.entries_.count(e.name) > 0) snap_.raw_duplicates.push_back(e.name);
    snap_.entries_[e.name] = e;
}

void SnapshotBuilder::note_skipped(const std::string& what) { snap_.skipped.push_back(what); }

Snapshot SnapshotBuilder::build() {
    built_ = true;
    return std::move(snap_);
}

std::vector<Violation> validate_snapshot(const Snapshot& snap) {
    std::vector<Violation> out;
    for (const auto& name : snap.raw_duplicates)
        out.push_back({name, "DuplicateName", "name occurs more than once in the raw manifest"});
    for (const auto& [name, e] : snap.entries()) {
        if (name.empty()) {
            out.push_back({name, "EmptyName", "entry with empty name"});
            continue;
        }
        Bytes data;
        try {
            data = snap.store()->load(e.digest);
        } catch (const Error& err) {
            throw IOFailure("entry " + name + ": " + err.what());
        }
        if (sha256(data) != e.digest)
            out.push_back({name, "DigestMismatch", "stored digest != hash(bytes)"});
        else if (data.size() != e.size)
            out.push_back({name, "SizeMismatch",
                           "declared " + std::to_string(e.size) + " actual " +
                               std::to_string(data.size())});
    }
    return out;
}

void save_snapshot(const Snapshot& snap, const fs::path& dir) {
    fs::create_directories(dir);
    DirBlobStore out_store(dir);
    std::ofstream mf(dir / "manifest.jsonl", std::ios::trunc);
    if (!mf) throw IOFailure("cannot create manifest in " + dir.string());
    for (const auto& [name, e] : snap.entries()) {
        Bytes value = snap.load_value(e);
        out_store.put(value);
        json rec{{"name", e.name},
                 {"kind", to_string(e.kind)},
                 {"size", e.size},
                 {"digest", e.digest.hex()},
                 {"blob", DirBlobStore::rel_blob_path(e.digest)}};
        mf << rec.dump() << "\n";
    }
    json meta{{"label", to_string(snap.label)},
              {"platform", to_string(snap.platform)},
              {"run_id", snap.run_id},
              {"captured_at", snap.captured_at},
              {"digest_algorithm", kDigestAlgorithm},
              {"entry_count", snap.entries().size()},
              {"skipped", snap.skipped}};
    write_file(dir / "meta.json", meta.dump(2) + "\n");
}

Snapshot load_snapshot(const fs::path& dir) {
    fs::path mpath = dir / "manifest.jsonl";
    if (!fs::exists(mpath)) throw MissingManifest("no manifest.jsonl in " + dir.string());
    auto store = std::make_shared<DirBlobStore>(dir);
    SnapshotBuilder b(store);
    if (fs::exists(dir / "meta.json")) {
        json meta = json::parse(to_string(read_file(dir / "meta.json")));
        if (meta.contains("digest_algorithm") && meta["digest_algorithm"] != kDigestAlgorithm)
            throw CorruptManifest("snapshot written with digest algorithm '" +
                                  meta["digest_algorithm"].get<std::string>() + "', expected '" +
                                  kDigestAlgorithm + "'");
        b.label(label_from(meta.value("label", "pre")));
        b.platform(platform_from(meta.value("platform", "generic")));
        b.run_id(meta.value("run_id", 1));
        b.captured_at(meta.value("captured_at", ""));
    }
    std::ifstream in(mpath);
    std::string line;
    size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.empty()) continue;
        json rec;
        try {
            rec = json::parse(line);
        } catch (const json::exception& ex) {
            throw CorruptManifest("manifest line " + std::to_string(lineno) + ": " + ex.what());
        }
        Entry e;
        e.name = rec.at("name").get<std::string>();
        e.kind = entry_kind_from(rec.at("kind").get<std::string>());
        e.size = rec.at("size").get<uint64_t>();
        e.digest = Digest::from_hex(rec.at("digest").get<std::string>());
        b.add_stored(e);
    }
    return b.build();
}

}  // namespace bdiff
