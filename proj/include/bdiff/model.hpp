#pragma once

#include <map>
#include <memory>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "bdiff/blob_store.hpp"
#include "bdiff/bytes.hpp"
#include "bdiff/hash.hpp"

namespace bdiff {

enum class EntryKind { FileBased, ContentBased };
enum class SnapshotLabel { Pre, Backup, Post };
enum class Platform { Android, Ios, Generic };

const char* to_string(EntryKind k);
const char* to_string(SnapshotLabel l);
const char* to_string(Platform p);
EntryKind entry_kind_from(const std::string& s);
SnapshotLabel label_from(const std::string& s);
Platform platform_from(const std::string& s);

/// Symlink values are stored as marker-prefixed target strings so they take
/// part in value comparison like any other content.
constexpr const char* kSymlinkMarker = "@symlink:";

/// One name-value pair. The name is unique within a snapshot: the mapped
/// device path for file-based entries, "device-path#object-locator" for
/// content-based ones. Values live in the snapshot's blob store, addressed
/// by digest and loaded on demand.
struct Entry {
    std::string name;
    EntryKind kind = EntryKind::FileBased;
    uint64_t size = 0;
    Digest digest;
};

using NameSet = std::set<std::string>;

/// Immutable set of entries for one acquisition point. Reads are safe from
/// any thread once construction finished; construction is single-writer.
class Snapshot {
public:
    Snapshot() = default;

    SnapshotLabel label = SnapshotLabel::Pre;
    Platform platform = Platform::Generic;
    int run_id = 1;
    std::string captured_at;  // informational only

    const std::map<std::string, Entry>& entries() const { return entries_; }
    size_t size() const { return entries_.size(); }
    bool has(const std::string& name) const { return entries_.count(name) > 0; }
    const Entry* find(const std::string& name) const;
    NameSet names() const;

    /// Loads the entry's value, verifying digest and size on the way.
    Bytes load_value(const Entry& e) const;
    Bytes load_value(const std::string& name) const;

    std::shared_ptr<const BlobStore> store() const { return store_; }

    /// Duplicate names observed in the raw manifest during load (last
    /// occurrence kept). Surfaced by validate_snapshot.
    std::vector<std::string> raw_duplicates;
    /// Sources skipped during ingestion (unreadable files, specials), with reason.
    std::vector<std::string> skipped;

private:
    friend class SnapshotBuilder;
    std::map<std::string, Entry> entries_;
    std::shared_ptr<const BlobStore> store_;
};

class SnapshotBuilder {
public:
    explicit SnapshotBuilder(std::shared_ptr<BlobStore> store);

    SnapshotBuilder& label(SnapshotLabel l);
    SnapshotBuilder& platform(Platform p);
    SnapshotBuilder& run_id(int id);
    SnapshotBuilder& captured_at(std::string ts);

    /// Stores the value and adds the entry. A repeated name means two
    /// sources claimed one device path: MappingCollision.
    Digest add(const std::string& name, EntryKind kind, std::span<const uint8_t> value);
    Digest add(const std::string& name, EntryKind kind, std::string_view value);
    /// Overwrite semantics for archive members: returns true when an earlier
    /// entry was replaced.
    bool add_or_replace(const std::string& name, EntryKind kind, std::span<const uint8_t> value);
    /// Adds an entry whose value is already in the store; repeated names are
    /// recorded as raw-manifest duplicates (surfaced by validation).
    void add_stored(const Entry& e);
    void note_skipped(const std::string& what);

    Snapshot build();

private:
    Snapshot snap_;
    std::shared_ptr<BlobStore> store_;
    bool built_ = false;
};

/// Per-name change evidence for one V_ch member.
enum class PClass { Mis, Mback, Mpre, Nom };
const char* to_string(PClass c);

struct MismatchRecord {
    std::string name;
    Digest pre_digest;
    Digest backup_digest;
    std::optional<Digest> post_digest;  // absent exactly for PClass::Mis
    std::optional<double> r;            // similarity ratio in [0,1]
    uint64_t s = 0;                     // weight in bytes
    PClass p_class = PClass::Nom;
    bool wal_explained = false;
    std::string diagnostic;  // e.g. db comparison verdict, load failures
};

/// The ten sets of one evaluation iteration plus similarity aggregates.
struct RunClassification {
    int run_id = 1;
    NameSet e, n_over, n_new, n_both;
    NameSet v_eq, v_ch;
    NameSet p_mis, p_mback, p_mpre, p_nom;
    std::vector<MismatchRecord> mismatches;
    double r_w_mean = 0.0;
    double r_w_std = 0.0;
    /// N_new names that are also present in Post (reported, not classified).
    NameSet n_new_in_post;
};

/// One broken invariant found by validate_snapshot.
struct Violation {
    std::string entry;  // offending entry name (may be empty for snapshot-level)
    std::string kind;   // DuplicateName | DigestMismatch | SizeMismatch | EmptyName
    std::string detail;
};

/// Returns an empty list iff all Entry/Snapshot invariants hold. Unreadable
/// values raise IOFailure naming the entry.
std::vector<Violation> validate_snapshot(const Snapshot& snap);

/// Snapshot directory layout: manifest.jsonl (one entry record per line,
/// sorted by name), meta.json (label, platform, digest algorithm, counts),
/// blobs under two-hex-char subdirectories.
void save_snapshot(const Snapshot& snap, const std::filesystem::path& dir);
Snapshot load_snapshot(const std::filesystem::path& dir);

}  // namespace bdiff
