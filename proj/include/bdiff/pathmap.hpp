#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "bdiff/model.hpp"

namespace bdiff {

/// One backup-path → device-path rule. Patterns are slash-separated with
/// <pkg>-style single-segment placeholders and a trailing <rest> capture.
/// A target of "@kv:<pkg>/<rest>" marks key-value carrier members.
struct MappingRule {
    Platform platform = Platform::Android;
    std::string pattern;
    std::string target;
};

struct AndroidMapResult {
    enum class Kind { Mapped, KvCarrier, Unmapped };
    Kind kind = Kind::Unmapped;
    std::string device_path;  // Mapped: the device filesystem path
    std::string package;      // KvCarrier: owning package
    std::string kv_file;      // KvCarrier: file name inside the k/ directory
};

/// Rule table with the shipped token meanings. Editable: load_rules_file
/// replaces the table, keeping mapping behavior data-driven.
class MappingTable {
public:
    /// The built-in Android token table.
    static MappingTable builtin();
    /// Parses a rules file: one "platform pattern => target" rule per line,
    /// '#' comments allowed.
    static MappingTable load_rules_file(const std::filesystem::path& p);

    const std::vector<MappingRule>& rules() const { return rules_; }

    /// Maps one member path from an unwrapped .ab tar. Unknown tokens yield
    /// Unmapped (counted by the caller, excluded from classification).
    AndroidMapResult map_android(const std::string& member_path) const;

private:
    std::vector<MappingRule> rules_;
};

/// Resolves iOS app bundle identifiers to their data container paths.
/// Built by scanning a reference snapshot for container marker entries
/// ("<container>/.container-bundle-id" holding the bundle identifier),
/// or loaded from an explicit "bundle=container-uuid" map file.
class ContainerResolver {
public:
    void add(const std::string& bundle_id, const std::string& container_path);
    std::optional<std::string> container_for(const std::string& bundle_id) const;

    static ContainerResolver scan_reference(const Snapshot& reference);
    static ContainerResolver load_map_file(const std::filesystem::path& p);

    size_t size() const { return map_.size(); }

private:
    std::map<std::string, std::string> map_;
};

constexpr const char* kIosHomeRoot = "/private/var/mobile";
constexpr const char* kIosContainerRoot = "/private/var/mobile/Containers/Data/Application";
constexpr const char* kContainerMarkerFile = ".container-bundle-id";

/// Maps one Manifest.db row to a device path. Domains without a resolver
/// entry fall back to the symbolic "<domain>:<relative_path>" form, stable
/// on both comparison sides. Malformed domain strings raise MalformedDomain.
std::string map_ios_manifest_row(const std::string& domain, const std::string& relative_path,
                                 const ContainerResolver& resolver);

/// Backup blob identifier for a manifest row: 160-bit hash of
/// "<domain>-<relative_path>", lowercase hex.
std::string compute_file_id(const std::string& domain, const std::string& relative_path);

}  // namespace bdiff
