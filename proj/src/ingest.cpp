#include "bdiff/ingest.hpp"

#include <sqlite3.h>

#include <algorithm>

#include "bdiff/errors.hpp"
#include "bdiff/sqlite_util.hpp"
#include "bdiff/tar.hpp"

namespace bdiff {

namespace fs = std::filesystem;

SourceSpec::Format source_format_from(const std::string& s) {
    if (s == "dir") return SourceSpec::Format::DirTree;
    if (s == "tar") return SourceSpec::Format::Tar;
    if (s == "ab") return SourceSpec::Format::AndroidAb;
    if (s == "ios") return SourceSpec::Format::IosBackupDir;
    throw UnsupportedFormat("unknown source format '" + s + "'");
}

namespace {

std::vector<std::string> split_csv(const std::string& s) {
    std::vector<std::string> out;
    size_t start = 0;
    while (start <= s.size()) {
        size_t comma = s.find(',', start);
        std::string part = s.substr(start, comma == std::string::npos ? comma : comma - start);
        if (!part.empty()) out.push_back(part);
        if (comma == std::string::npos) break;
        start = comma + 1;
    }
    return out;
}

bool name_included(const std::string& name, const std::vector<std::string>& prefixes) {
    if (prefixes.empty()) return true;
    for (const auto& p : prefixes)
        if (name.starts_with(p)) return true;
    return false;
}

struct BuilderPair {
    SnapshotBuilder files;
    SnapshotBuilder carriers;
    std::map<std::string, std::string> producer;  // device name -> source member

    explicit BuilderPair(const IngestContext& ctx)
        : files(ctx.store), carriers(ctx.store) {
        files.label(ctx.label).platform(ctx.platform).run_id(ctx.run_id);
        carriers.label(ctx.label).platform(ctx.platform).run_id(ctx.run_id);
    }

    void add_file(const std::string& name, std::span<const uint8_t> value,
                  const std::string& source) {
        auto [it, fresh] = producer.emplace(name, source);
        if (!fresh && it->second != source)
            throw MappingCollision("members '" + it->second + "' and '" + source +
                                   "' both map to " + name);
        files.add_or_replace(name, EntryKind::FileBased, value);
    }
};

}  // namespace

IngestResult ingest_directory_tree(const SourceSpec& spec, const IngestContext& ctx) {
    if (spec.format != SourceSpec::Format::DirTree)
        throw UnsupportedFormat("spec is not a directory tree");
    if (!fs::exists(spec.path)) throw IOFailure("source path missing: " + spec.path.string());

    std::string prefix = "/";
    if (auto it = spec.options.find("device_prefix"); it != spec.options.end())
        prefix = it->second.ends_with('/') ? it->second : it->second + "/";
    auto include = split_csv(spec.options.count("include_prefixes")
                                 ? spec.options.at("include_prefixes")
                                 : "");

    IngestResult out;
    SnapshotBuilder b(ctx.store);
    b.label(ctx.label).platform(ctx.platform).run_id(ctx.run_id);

    std::vector<fs::path> paths;
    for (auto it = fs::recursive_directory_iterator(
             spec.path, fs::directory_options::skip_permission_denied);
         it != fs::recursive_directory_iterator(); ++it)
        paths.push_back(it->path());
    std::sort(paths.begin(), paths.end());

    for (const auto& p : paths) {
        std::string name = prefix + p.lexically_relative(spec.path).generic_string();
        if (!name_included(name, include)) continue;
        std::error_code ec;
        auto status = fs::symlink_status(p, ec);
        if (ec) {
            b.note_skipped(name + ": " + ec.message());
            continue;
        }
        if (fs::is_symlink(status)) {
            std::string target = fs::read_symlink(p, ec).generic_string();
            if (ec) {
                b.note_skipped(name + ": unreadable symlink");
                continue;
            }
            b.add(name, EntryKind::FileBased, std::string(kSymlinkMarker) + target);
        } else if (fs::is_regular_file(status)) {
            try {
                Bytes data = read_file(p);
                b.add(name, EntryKind::FileBased, data);
            } catch (const IOFailure& err) {
                b.note_skipped(name + ": " + err.what());
            }
        } else if (!fs::is_directory(status)) {
            b.note_skipped(name + ": special file");
        }
    }
    out.snapshot = b.build();
    for (const auto& s : out.snapshot.skipped) out.warnings.push_back("skipped " + s);
    return out;
}

IngestResult ingest_tar_bytes(std::span<const uint8_t> tar, const IngestContext& ctx,
                              bool android_mapping) {
    IngestResult out;
    BuilderPair bp(ctx);

    // Archive overwrite semantics first: last occurrence of a member wins.
    TarReader reader(tar);
    std::map<std::string, TarMember> members;
    std::vector<std::string> order;
    while (auto m = reader.next()) {
        if (m->typeflag == '5') continue;  // structure only
        auto [it, fresh] = members.insert_or_assign(m->name, std::move(*m));
        if (!fresh)
            out.warnings.push_back("duplicate member '" + it->first +
                                   "', keeping the last occurrence");
        else
            order.push_back(it->first);
    }
    for (const auto& w : reader.warnings()) out.warnings.push_back(w);

    const MappingTable* table = ctx.mapping;
    MappingTable fallback;
    if (android_mapping && !table) {
        fallback = MappingTable::builtin();
        table = &fallback;
    }

    for (const auto& mname : order) {
        const TarMember& m = members.at(mname);
        Bytes value = m.typeflag == '2' ? to_bytes(std::string(kSymlinkMarker) + m.linkname)
                                        : m.data;
        if (android_mapping) {
            AndroidMapResult mapped = table->map_android(m.name);
            switch (mapped.kind) {
                case AndroidMapResult::Kind::Mapped:
                    bp.add_file(mapped.device_path, value, m.name);
                    break;
                case AndroidMapResult::Kind::KvCarrier:
                    bp.carriers.add_or_replace("kv:" + mapped.package + "/" + mapped.kv_file,
                                               EntryKind::ContentBased, value);
                    break;
                case AndroidMapResult::Kind::Unmapped:
                    out.unmapped.push_back(m.name);
                    break;
            }
        } else {
            std::string name = m.name.starts_with('/') ? m.name : "/" + m.name;
            bp.add_file(name, value, m.name);
        }
    }
    out.snapshot = bp.files.build();
    out.kv_carriers = bp.carriers.build();
    return out;
}

IngestResult ingest_tar_stream(const SourceSpec& spec, const IngestContext& ctx) {
    if (spec.format != SourceSpec::Format::Tar)
        throw UnsupportedFormat("spec is not a tar source");
    Bytes tar = read_file(spec.path);
    return ingest_tar_bytes(tar, ctx, false);
}

IngestResult ingest_android_ab(const SourceSpec& spec, const IngestContext& ctx) {
    if (spec.format != SourceSpec::Format::AndroidAb)
        throw UnsupportedFormat("spec is not an android backup source");
    Bytes ab = read_file(spec.path);
    AbContent content = unwrap_android_backup(ab);
    IngestResult out = ingest_tar_bytes(content.tar, ctx, true);
    out.ab_header = content.header;
    return out;
}

IngestResult ingest_ios_backup(const SourceSpec& spec, const IngestContext& ctx) {
    if (spec.format != SourceSpec::Format::IosBackupDir)
        throw UnsupportedFormat("spec is not an ios backup source");
    fs::path manifest_path = spec.path / "Manifest.db";
    if (!fs::exists(manifest_path))
        throw MissingManifest("no Manifest.db under " + spec.path.string());

    ContainerResolver local_resolver;
    const ContainerResolver* resolver = ctx.resolver;
    if (!resolver) {
        if (auto it = spec.options.find("container_map"); it != spec.options.end())
            local_resolver = ContainerResolver::load_map_file(it->second);
        resolver = &local_resolver;
    }

    IngestResult out;
    SnapshotBuilder b(ctx.store);
    b.label(ctx.label).platform(Platform::Ios).run_id(ctx.run_id);

    struct Row {
        std::string file_id, domain, rel;
        int64_t flags;
    };
    std::vector<Row> rows;
    try {
        SqliteDb manifest(read_file(manifest_path));
        if (!manifest.has_table("Files"))
            throw CorruptManifest("manifest database lacks a Files table");
        sqlite3_stmt* stmt = nullptr;
        if (sqlite3_prepare_v2(manifest.handle(),
                               "SELECT fileID, domain, relativePath, flags FROM Files "
                               "ORDER BY fileID",
                               -1, &stmt, nullptr) != SQLITE_OK)
            throw CorruptManifest(sqlite3_errmsg(manifest.handle()));
        while (sqlite3_step(stmt) == SQLITE_ROW) {
            auto text = [&](int c) {
                const unsigned char* t = sqlite3_column_text(stmt, c);
                return t ? std::string(reinterpret_cast<const char*>(t)) : std::string();
            };
            rows.push_back({text(0), text(1), text(2), sqlite3_column_int64(stmt, 3)});
        }
        sqlite3_finalize(stmt);
    } catch (const NotDatabase& err) {
        throw CorruptManifest(std::string("Manifest.db unreadable: ") + err.what());
    }

    std::map<std::string, std::string> producer;
    for (const auto& row : rows) {
        if (row.flags != 1) continue;  // only file rows carry blobs
        fs::path blob = spec.path / row.file_id.substr(0, 2) / row.file_id;
        if (!fs::exists(blob)) {
            out.missing_blobs.push_back(row.domain + ":" + row.rel);
            continue;
        }
        std::string name = map_ios_manifest_row(row.domain, row.rel, *resolver);
        auto [it, fresh] = producer.emplace(name, row.file_id);
        if (!fresh)
            throw MappingCollision("manifest rows '" + it->second + "' and '" + row.file_id +
                                   "' both map to " + name);
        b.add(name, EntryKind::FileBased, read_file(blob));
    }
    out.snapshot = b.build();
    return out;
}

IngestResult ingest_source(const SourceSpec& spec, const IngestContext& ctx) {
    switch (spec.format) {
        case SourceSpec::Format::DirTree: return ingest_directory_tree(spec, ctx);
        case SourceSpec::Format::Tar: return ingest_tar_stream(spec, ctx);
        case SourceSpec::Format::AndroidAb: return ingest_android_ab(spec, ctx);
        case SourceSpec::Format::IosBackupDir: return ingest_ios_backup(spec, ctx);
    }
    throw UnsupportedFormat("unhandled source format");
}

}  // namespace bdiff
