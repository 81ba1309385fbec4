#include "bdiff/pathmap.hpp"

#include <fstream>
#include <sstream>

#include "bdiff/errors.hpp"
#include "bdiff/hash.hpp"

namespace bdiff {

namespace {

std::vector<std::string> split_segments(const std::string& s) {
    std::vector<std::string> out;
    size_t start = 0;
    while (start <= s.size()) {
        size_t slash = s.find('/', start);
        if (slash == std::string::npos) {
            out.push_back(s.substr(start));
            break;
        }
        out.push_back(s.substr(start, slash - start));
        start = slash + 1;
    }
    return out;
}

bool is_placeholder(const std::string& seg) {
    return seg.size() >= 3 && seg.front() == '<' && seg.back() == '>';
}

// Matches pattern segments against a path; fills placeholder captures.
// "<rest>" must be the final pattern segment and captures the remainder.
bool match_pattern(const std::string& pattern, const std::string& path,
                   std::map<std::string, std::string>& captures) {
    auto pseg = split_segments(pattern);
    auto xseg = split_segments(path);
    size_t i = 0;
    for (; i < pseg.size(); ++i) {
        const std::string& p = pseg[i];
        if (p == "<rest>") {
            if (i > xseg.size()) return false;
            std::string rest;
            for (size_t j = i; j < xseg.size(); ++j) {
                if (j > i) rest += '/';
                rest += xseg[j];
            }
            if (rest.empty()) return false;
            captures["<rest>"] = rest;
            return true;
        }
        if (i >= xseg.size()) return false;
        if (is_placeholder(p)) {
            if (xseg[i].empty()) return false;
            captures[p] = xseg[i];
        } else if (p != xseg[i]) {
            return false;
        }
    }
    return i == xseg.size();
}

std::string substitute(const std::string& target, const std::map<std::string, std::string>& caps) {
    std::string out = target;
    for (const auto& [k, v] : caps) {
        size_t pos;
        while ((pos = out.find(k)) != std::string::npos) out.replace(pos, k.size(), v);
    }
    return out;
}

}  // namespace

MappingTable MappingTable::builtin() {
    MappingTable t;
    auto add = [&t](const char* pattern, const char* target) {
        t.rules_.push_back({Platform::Android, pattern, target});
    };
    // Package-area tokens of the backup tar, in match order.
    add("apps/<pkg>/a/<rest>", "/data/app/<pkg>/<rest>");
    add("apps/<pkg>/f/<rest>", "/data/data/<pkg>/files/<rest>");
    add("apps/<pkg>/db/<rest>", "/data/data/<pkg>/databases/<rest>");
    add("apps/<pkg>/sp/<rest>", "/data/data/<pkg>/shared_prefs/<rest>");
    add("apps/<pkg>/c/<rest>", "/data/data/<pkg>/cache/<rest>");
    add("apps/<pkg>/r/<rest>", "/data/data/<pkg>/<rest>");
    add("apps/<pkg>/ef/<rest>", "/data/media/0/Android/data/<pkg>/<rest>");
    add("apps/<pkg>/d_f/<rest>", "/data/user_de/0/<pkg>/files/<rest>");
    add("apps/<pkg>/d_db/<rest>", "/data/user_de/0/<pkg>/databases/<rest>");
    add("apps/<pkg>/d_sp/<rest>", "/data/user_de/0/<pkg>/shared_prefs/<rest>");
    add("apps/<pkg>/d_r/<rest>", "/data/user_de/0/<pkg>/<rest>");
    add("apps/<pkg>/k/<rest>", "@kv:<pkg>/<rest>");
    add("shared/0/<rest>", "/data/media/0/<rest>");
    return t;
}

MappingTable MappingTable::load_rules_file(const std::filesystem::path& p) {
    std::ifstream in(p);
    if (!in) throw IOFailure("cannot open mapping rules file " + p.string());
    MappingTable t;
    std::string line;
    size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        size_t hash = line.find('#');
        if (hash != std::string::npos) line.erase(hash);
        std::istringstream ls(line);
        std::string platform, pattern, arrow, target;
        if (!(ls >> platform)) continue;  // blank line
        if (!(ls >> pattern >> arrow >> target) || arrow != "=>")
            throw ParseError("rules file " + p.string() + " line " + std::to_string(lineno) +
                             ": expected 'platform pattern => target'");
        t.rules_.push_back({platform_from(platform), pattern, target});
    }
    return t;
}

AndroidMapResult MappingTable::map_android(const std::string& member_path) const {
    for (const auto& rule : rules_) {
        if (rule.platform != Platform::Android) continue;
        std::map<std::string, std::string> caps;
        if (!match_pattern(rule.pattern, member_path, caps)) continue;
        std::string expanded = substitute(rule.target, caps);
        AndroidMapResult r;
        if (expanded.starts_with("@kv:")) {
            r.kind = AndroidMapResult::Kind::KvCarrier;
            std::string rest = expanded.substr(4);
            size_t slash = rest.find('/');
            r.package = rest.substr(0, slash);
            r.kv_file = slash == std::string::npos ? "" : rest.substr(slash + 1);
        } else {
            r.kind = AndroidMapResult::Kind::Mapped;
            r.device_path = expanded;
        }
        return r;
    }
    return {};  // Unmapped
}

void ContainerResolver::add(const std::string& bundle_id, const std::string& container_path) {
    map_[bundle_id] = container_path;
}

std::optional<std::string> ContainerResolver::container_for(const std::string& bundle_id) const {
    auto it = map_.find(bundle_id);
    if (it == map_.end()) return std::nullopt;
    return it->second;
}

ContainerResolver ContainerResolver::scan_reference(const Snapshot& reference) {
    ContainerResolver r;
    const std::string root = std::string(kIosContainerRoot) + "/";
    const std::string marker = std::string("/") + kContainerMarkerFile;
    for (const auto& [name, entry] : reference.entries()) {
        if (!name.starts_with(root) || !name.ends_with(marker)) continue;
        std::string container = name.substr(0, name.size() - marker.size());
        std::string bundle = to_string(reference.load_value(entry));
        while (!bundle.empty() && (bundle.back() == '\n' || bundle.back() == '\r'))
            bundle.pop_back();
        if (!bundle.empty()) r.add(bundle, container);
    }
    return r;
}

ContainerResolver ContainerResolver::load_map_file(const std::filesystem::path& p) {
    std::ifstream in(p);
    if (!in) throw IOFailure("cannot open container map file " + p.string());
    ContainerResolver r;
    std::string line;
    while (std::getline(in, line)) {
        if (line.empty() || line[0] == '#') continue;
        size_t eq = line.find('=');
        if (eq == std::string::npos) throw ParseError("container map line without '=': " + line);
        r.add(line.substr(0, eq), std::string(kIosContainerRoot) + "/" + line.substr(eq + 1));
    }
    return r;
}

std::string map_ios_manifest_row(const std::string& domain, const std::string& relative_path,
                                 const ContainerResolver& resolver) {
    if (domain.empty()) throw MalformedDomain("empty domain");
    if (domain.find(':') != std::string::npos)
        throw MalformedDomain("domain contains ':': " + domain);
    std::string rel = relative_path;
    if (domain == "HomeDomain")
        return rel.empty() ? std::string(kIosHomeRoot) : std::string(kIosHomeRoot) + "/" + rel;
    if (domain.starts_with("AppDomain-")) {
        std::string bundle = domain.substr(10);
        if (bundle.empty()) throw MalformedDomain("AppDomain- with empty bundle id");
        if (auto container = resolver.container_for(bundle))
            return rel.empty() ? *container : *container + "/" + rel;
    }
    // Symbolic fallback: stable on both comparison sides.
    return domain + ":" + rel;
}

std::string compute_file_id(const std::string& domain, const std::string& relative_path) {
    return sha1_hex(domain + "-" + relative_path);
}

}  // namespace bdiff
