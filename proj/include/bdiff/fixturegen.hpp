#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "bdiff/bytes.hpp"
#include "bdiff/model.hpp"

namespace bdiff {

/// Deterministic generator (splitmix64 core) so fixtures are byte-identical
/// across platforms and standard libraries.
class DeterministicRng {
public:
    explicit DeterministicRng(uint64_t seed) : state_(seed) {}
    uint64_t next();
    uint64_t below(uint64_t bound);  // uniform in [0, bound)
    double unit();                   // uniform in [0, 1)
    Bytes bytes(size_t n, bool text);
    std::string word();

private:
    uint64_t state_;
};

/// In-memory file tree: device path -> content bytes.
using FileTree = std::map<std::string, Bytes>;

/// Deterministic pseudo-random tree: nested paths, sizes 0-64 KiB, mixed
/// text and binary content, fully determined by the seed.
FileTree gen_base_tree(uint64_t seed, size_t n_files, Platform platform = Platform::Generic);

enum class MutationWindow { BeforeBackup, DuringBackup, AfterBackup };
enum class MutationAction { Rewrite, Delete, Create };

struct Mutation {
    std::string target_name;
    MutationWindow window = MutationWindow::BeforeBackup;
    MutationAction action = MutationAction::Rewrite;
};

/// Simulated-iteration script: which files exist, which the backup includes,
/// and what changes around the backup instant. Windows map onto the mismatch
/// classes: a rewrite before the backup lands in P_mback, one visible only
/// to the backup copy in P_mpre, rewrites on both sides of the backup in
/// P_nom, and a backup-changed value deleted before Post in P_mis.
struct MutationPlan {
    uint64_t seed = 1;
    size_t n_files = 10;
    double backup_inclusion_rate = 1.0;
    Platform platform = Platform::Generic;
    bool include_db = false;  // plant a database + pending log in the tree
    std::vector<Mutation> mutations;
};

MutationPlan plan_from_json_text(const std::string& text);
std::string plan_to_json_text(const MutationPlan& plan);

/// A generated iteration with its analytically derived ground truth.
struct RunTriple {
    Snapshot pre, backup, post;
    RunClassification expected;
};

/// Materializes the three snapshots by applying mutations in their windows
/// around a simulated instantaneous backup copy. The expected sets are
/// derived per-name from the three values, independent of the set-algebra
/// classifier. Contradictory mutation combinations raise InvalidPlan.
RunTriple gen_run(const MutationPlan& plan, int run_id = 1);

/// Random plan whose mutations use the canonical window recipes, so every
/// generated name has a known expected class.
MutationPlan random_plan(uint64_t seed, size_t max_files = 200,
                         Platform platform = Platform::Generic);

struct WalFixture {
    Bytes db;             // main database with committed-but-unfolded log
    Bytes wal;            // the pending log (salts normalized from the seed)
    Bytes checkpointed;   // folded result produced by the database engine
};

/// Builds a database plus a write-ahead log holding committed frames that
/// are absent from the main file, and the checkpointed result.
WalFixture gen_wal_fixture(uint64_t seed);

/// Rewrites a log's salts to fixed values and recomputes all checksums;
/// the result is an equally valid log with deterministic bytes.
Bytes normalize_wal_salts(std::span<const uint8_t> wal, uint32_t salt1, uint32_t salt2);

/// Inverse of the shipped Android token table: device path -> backup member.
std::optional<std::string> android_member_for(const std::string& device_path);

/// Packs device-path files into an .ab container (tar members per the token
/// table). Paths outside the table raise InvalidPlan.
Bytes emit_android_ab(const FileTree& files);

/// Lays a device-path tree out as a backup directory: Manifest.db rows keyed
/// by computed file identifiers, blobs under two-hex-char subdirectories.
/// `bundle_containers` maps bundle ids to container directory names (UUIDs).
void materialize_ios_backup(const FileTree& files,
                            const std::map<std::string, std::string>& bundle_containers,
                            const std::filesystem::path& dir);

void materialize_tree(const FileTree& files, const std::filesystem::path& dir);

/// Writes pre/ and post/ trees, backup.ab, and expected.json under dir.
void materialize_android_run(const MutationPlan& plan, const std::filesystem::path& dir);

}  // namespace bdiff
