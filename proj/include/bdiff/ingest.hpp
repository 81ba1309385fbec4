#pragma once

#include <map>
#include <memory>
#include <optional>
#include <string>

#include "bdiff/android_ab.hpp"
#include "bdiff/model.hpp"
#include "bdiff/pathmap.hpp"

namespace bdiff {

struct SourceSpec {
    enum class Format { DirTree, Tar, AndroidAb, IosBackupDir };
    Format format = Format::DirTree;
    std::filesystem::path path;
    /// Recognized options: device_prefix (dir trees; default "/"),
    /// include_prefixes (comma-separated name filter),
    /// container_map (ios resolver file).
    std::map<std::string, std::string> options;
};

SourceSpec::Format source_format_from(const std::string& s);

struct IngestContext {
    std::shared_ptr<BlobStore> store;
    SnapshotLabel label = SnapshotLabel::Pre;
    Platform platform = Platform::Generic;
    int run_id = 1;
    const MappingTable* mapping = nullptr;        // Android member mapping
    const ContainerResolver* resolver = nullptr;  // iOS domain resolution
};

struct IngestResult {
    Snapshot snapshot;
    /// Key-value carrier members ("kv:<pkg>/<file>" names); kept out of the
    /// file-based namespace so they never count as spurious backup data.
    Snapshot kv_carriers;
    std::vector<std::string> unmapped;       // members no rule covered
    std::vector<std::string> missing_blobs;  // manifest rows without blobs
    std::vector<std::string> warnings;
    std::optional<AbHeader> ab_header;
};

/// One file-based entry per regular file under the tree; symlinks become
/// marker-valued entries; unreadable files and special nodes are skipped and
/// logged.
IngestResult ingest_directory_tree(const SourceSpec& spec, const IngestContext& ctx);

/// One entry per regular-file member. Duplicate member names keep the last
/// occurrence with a warning (archive overwrite semantics).
IngestResult ingest_tar_stream(const SourceSpec& spec, const IngestContext& ctx);
IngestResult ingest_tar_bytes(std::span<const uint8_t> tar, const IngestContext& ctx,
                              bool android_mapping = false);

/// Unwraps the container, then ingests the inner tar with Android member
/// mapping: two distinct members mapping to one device path is a hard error.
IngestResult ingest_android_ab(const SourceSpec& spec, const IngestContext& ctx);

/// Joins Manifest.db file rows with their blobs; names come from the domain
/// mapping. Rows whose blob is absent land in missing_blobs.
IngestResult ingest_ios_backup(const SourceSpec& spec, const IngestContext& ctx);

IngestResult ingest_source(const SourceSpec& spec, const IngestContext& ctx);

}  // namespace bdiff
