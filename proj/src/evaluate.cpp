#include "bdiff/evaluate.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <fstream>
#include <iostream>
#include <thread>

#include <nlohmann/json.hpp>

#include "bdiff/classify.hpp"
#include "bdiff/errors.hpp"
#include "bdiff/sqlite_util.hpp"
#include "bdiff/wal.hpp"

namespace bdiff {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

fs::path resolve(const fs::path& base, const std::string& p) {
    fs::path path(p);
    return path.is_absolute() ? path : base / path;
}

SourceSpec spec_from_json(const json& j, const fs::path& base) {
    SourceSpec s;
    s.format = source_format_from(j.at("format").get<std::string>());
    s.path = resolve(base, j.at("path").get<std::string>());
    if (j.contains("options"))
        for (const auto& [k, v] : j.at("options").items()) s.options[k] = v.get<std::string>();
    return s;
}

}  // namespace

EvaluationManifest load_manifest(const fs::path& p) {
    json doc;
    try {
        doc = json::parse(to_string(read_file(p)));
    } catch (const json::exception& ex) {
        throw InvalidPlan(std::string("manifest does not parse: ") + ex.what());
    }
    fs::path base = p.has_parent_path() ? p.parent_path() : fs::path(".");
    EvaluationManifest m;
    m.dataset_label = doc.value("dataset_label", "File-Based");
    m.platform = platform_from(doc.value("platform", "generic"));
    m.output_dir = resolve(base, doc.value("output_dir", "out"));
    if (doc.contains("recipes_file"))
        m.recipes_file = resolve(base, doc.at("recipes_file").get<std::string>());
    if (doc.contains("mapping_rules"))
        m.mapping_rules = resolve(base, doc.at("mapping_rules").get<std::string>());
    std::string side = doc.value("weight_side", "pre");
    if (side == "pre") m.weight_side = WeightSide::Pre;
    else if (side == "backup") m.weight_side = WeightSide::Backup;
    else throw InvalidPlan("weight_side must be 'pre' or 'backup'");
    if (doc.contains("scope_filter"))
        m.scope_filter = doc.at("scope_filter").get<std::vector<std::string>>();
    std::string counting = doc.value("content_counting", "row");
    if (counting == "row") m.content_counting = CountingMode::PerRow;
    else if (counting == "column") m.content_counting = CountingMode::PerColumn;
    else throw InvalidPlan("content_counting must be 'row' or 'column'");
    m.include_name_lists = doc.value("include_name_lists", false);

    if (!doc.contains("runs") || !doc.at("runs").is_array() || doc.at("runs").empty())
        throw InvalidPlan("manifest declares no runs");
    for (const auto& jr : doc.at("runs")) {
        ManifestRun run;
        run.run_id = jr.at("run_id").get<int>();
        run.pre = spec_from_json(jr.at("pre"), base);
        run.backup = spec_from_json(jr.at("backup"), base);
        run.post = spec_from_json(jr.at("post"), base);
        m.runs.push_back(std::move(run));
    }
    for (size_t i = 0; i < m.runs.size(); ++i)
        if (m.runs[i].run_id != int(i) + 1)
            throw InvalidPlan("run ids must be unique and contiguous from 1");
    // Missing inputs are a per-run ingestion failure (exit 1), not a
    // manifest-validation error: the run gets marked Failed in the report.
    return m;
}

namespace {

Snapshot content_snapshot(const std::vector<NamedValue>& values, SnapshotLabel label,
                          Platform platform, int run_id) {
    auto store = std::make_shared<MemBlobStore>();
    SnapshotBuilder b(store);
    b.label(label).platform(platform).run_id(run_id);
    for (const auto& nv : values) b.add_or_replace(nv.name, EntryKind::ContentBased, to_bytes(nv.value));
    return b.build();
}

/// Marks v_ch members that a pending write-ahead log fully explains.
void explain_database_mismatches(const Snapshot& pre, const Snapshot& backup,
                                 std::vector<MismatchRecord>& records,
                                 std::vector<std::string>& warnings) {
    for (auto& rec : records) {
        const Entry* pre_e = pre.find(rec.name);
        const Entry* back_e = backup.find(rec.name);
        if (!pre_e || !back_e) continue;
        Bytes pre_bytes;
        try {
            pre_bytes = pre.load_value(*pre_e);
        } catch (const Error&) {
            continue;
        }
        if (!looks_like_sqlite(pre_bytes)) continue;
        std::optional<Bytes> wal_bytes;
        if (const Entry* wal_e = pre.find(rec.name + "-wal")) {
            try {
                wal_bytes = pre.load_value(*wal_e);
            } catch (const Error& err) {
                warnings.push_back(rec.name + "-wal unreadable: " + err.what());
            }
        }
        Bytes back_bytes;
        try {
            back_bytes = backup.load_value(*back_e);
        } catch (const Error&) {
            continue;
        }
        DbComparison cmp = explain_db_mismatch(
            pre_bytes,
            wal_bytes ? std::optional<std::span<const uint8_t>>(*wal_bytes) : std::nullopt,
            back_bytes);
        rec.wal_explained = cmp.verdict == DbVerdict::WalExplained;
        rec.diagnostic = std::string("db:") + to_string(cmp.verdict) +
                         (cmp.diagnostic.empty() ? "" : " (" + cmp.diagnostic + ")");
    }
}

DatasetRunResult evaluate_triple(const std::string& label, const Snapshot& pre,
                                 const Snapshot& backup, const Snapshot& post, int run_id,
                                 const std::vector<std::string>& scope_filter,
                                 WeightSide weight_side, bool explain_dbs) {
    DatasetRunResult out;
    out.label = label;
    RunInput input{&pre, &backup, &post, run_id, scope_filter};
    RunClassification rc = classify_run(input);

    if (explain_dbs) {
        std::vector<std::string> wal_warnings;
        explain_database_mismatches(pre, backup, rc.mismatches, wal_warnings);
        for (auto& w : wal_warnings) out.warnings.push_back(std::move(w));
    }
    SimilarityAggregate agg = aggregate_run_similarity(rc.mismatches, pre, backup, weight_side);
    rc.r_w_mean = agg.mean;
    rc.r_w_std = agg.std_dev;
    if (agg.skipped > 0)
        out.warnings.push_back(std::to_string(agg.skipped) +
                               " mismatched values were no longer loadable");

    auto violations = check_cardinality_identities(rc);
    for (const auto& v : violations) out.warnings.push_back("IDENTITY: " + v);

    long long pre_count = (long long)apply_scope_filter(pre.names(), scope_filter).size();
    long long backup_count = (long long)apply_scope_filter(backup.names(), scope_filter).size();
    long long post_count = (long long)apply_scope_filter(post.names(), scope_filter).size();
    out.stats = run_stats_from(rc, pre_count, backup_count, post_count);
    out.p_names = {rc.p_mis, rc.p_mback, rc.p_mpre, rc.p_nom};
    out.n_new_in_post = rc.n_new_in_post;
    out.mismatches = rc.mismatches;
    out.classification = std::move(rc);
    return out;
}

struct AuditSink {
    std::vector<std::string> lines;
    void add(const std::string& line) { lines.push_back(line); }
};

std::string now_iso8601() {
    auto t = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
    char buf[32];
    std::strftime(buf, sizeof(buf), "%FT%TZ", std::gmtime(&t));
    return buf;
}

Digest digest_of_file(const fs::path& p) { return sha256(read_file(p)); }

}  // namespace

std::string run_result_to_json(const RunResult& r, bool include_name_lists) {
    json doc;
    doc["run_id"] = r.run_id;
    doc["status"] = r.failed ? "failed" : "ok";
    if (r.failed) doc["error"] = r.error;
    doc["datasets"] = json::array();
    for (const auto& ds : r.datasets) {
        json jd;
        jd["label"] = ds.label;
        jd["counts"] = json{{"pre", ds.stats.pre},       {"backup", ds.stats.backup},
                            {"post", ds.stats.post},     {"e", ds.stats.e},
                            {"n_over", ds.stats.n_over}, {"n_new", ds.stats.n_new},
                            {"n_both", ds.stats.n_both}, {"v_eq", ds.stats.v_eq},
                            {"v_ch", ds.stats.v_ch},     {"p_mis", ds.stats.p_mis},
                            {"p_mback", ds.stats.p_mback}, {"p_mpre", ds.stats.p_mpre},
                            {"p_nom", ds.stats.p_nom}};
        jd["r_w_mean"] = ds.stats.r_w_mean;
        jd["r_w_std"] = ds.stats.r_w_std;
        const char* pkeys[4] = {"p_mis", "p_mback", "p_mpre", "p_nom"};
        json pn;
        for (int i = 0; i < 4; ++i)
            pn[pkeys[i]] = std::vector<std::string>(ds.p_names[i].begin(), ds.p_names[i].end());
        jd["p_names"] = pn;
        jd["n_new_in_post"] =
            std::vector<std::string>(ds.n_new_in_post.begin(), ds.n_new_in_post.end());
        jd["unmapped_count"] = ds.unmapped_count;
        jd["warnings"] = ds.warnings;
        json jms = json::array();
        for (const auto& m : ds.mismatches) {
            json jm;
            jm["name"] = m.name;
            jm["pre_digest"] = m.pre_digest.hex();
            jm["backup_digest"] = m.backup_digest.hex();
            if (m.post_digest) jm["post_digest"] = m.post_digest->hex();
            if (m.r) jm["r"] = *m.r;
            jm["s"] = m.s;
            jm["p_class"] = to_string(m.p_class);
            jm["wal_explained"] = m.wal_explained;
            if (!m.diagnostic.empty()) jm["diagnostic"] = m.diagnostic;
            jms.push_back(jm);
        }
        jd["mismatches"] = jms;
        if (include_name_lists) {
            const RunClassification& rc = ds.classification;
            json nl;
            nl["e"] = std::vector<std::string>(rc.e.begin(), rc.e.end());
            nl["n_over"] = std::vector<std::string>(rc.n_over.begin(), rc.n_over.end());
            nl["n_new"] = std::vector<std::string>(rc.n_new.begin(), rc.n_new.end());
            nl["n_both"] = std::vector<std::string>(rc.n_both.begin(), rc.n_both.end());
            nl["v_eq"] = std::vector<std::string>(rc.v_eq.begin(), rc.v_eq.end());
            nl["v_ch"] = std::vector<std::string>(rc.v_ch.begin(), rc.v_ch.end());
            jd["name_lists"] = nl;
        }
        doc["datasets"].push_back(jd);
    }
    return doc.dump(2) + "\n";
}

RunResult run_result_from_json(const std::string& text) {
    json doc = json::parse(text);
    RunResult r;
    r.run_id = doc.at("run_id").get<int>();
    r.failed = doc.at("status").get<std::string>() == "failed";
    r.error = doc.value("error", "");
    for (const auto& jd : doc.at("datasets")) {
        DatasetRunResult ds;
        ds.label = jd.at("label").get<std::string>();
        const auto& c = jd.at("counts");
        ds.stats.run_id = r.run_id;
        ds.stats.pre = c.at("pre").get<long long>();
        ds.stats.backup = c.at("backup").get<long long>();
        ds.stats.post = c.at("post").get<long long>();
        ds.stats.e = c.at("e").get<long long>();
        ds.stats.n_over = c.at("n_over").get<long long>();
        ds.stats.n_new = c.at("n_new").get<long long>();
        ds.stats.n_both = c.at("n_both").get<long long>();
        ds.stats.v_eq = c.at("v_eq").get<long long>();
        ds.stats.v_ch = c.at("v_ch").get<long long>();
        ds.stats.p_mis = c.at("p_mis").get<long long>();
        ds.stats.p_mback = c.at("p_mback").get<long long>();
        ds.stats.p_mpre = c.at("p_mpre").get<long long>();
        ds.stats.p_nom = c.at("p_nom").get<long long>();
        ds.stats.r_w_mean = jd.at("r_w_mean").get<double>();
        ds.stats.r_w_std = jd.at("r_w_std").get<double>();
        const char* pkeys[4] = {"p_mis", "p_mback", "p_mpre", "p_nom"};
        for (int i = 0; i < 4; ++i) {
            auto v = jd.at("p_names").at(pkeys[i]).get<std::vector<std::string>>();
            ds.p_names[i] = NameSet(v.begin(), v.end());
        }
        ds.unmapped_count = jd.value("unmapped_count", size_t(0));
        r.datasets.push_back(std::move(ds));
    }
    return r;
}

namespace {

RunResult evaluate_one_run(const EvaluationManifest& m, const ManifestRun& run,
                           const MappingTable* mapping,
                           const std::vector<ContentDataset>& content_datasets) {
    RunResult result;
    result.run_id = run.run_id;
    try {
        auto store = std::make_shared<MemBlobStore>();
        IngestContext base_ctx{store, SnapshotLabel::Pre, m.platform, run.run_id, mapping,
                               nullptr};

        IngestContext pre_ctx = base_ctx;
        pre_ctx.label = SnapshotLabel::Pre;
        IngestResult pre = ingest_source(run.pre, pre_ctx);

        ContainerResolver resolver;
        IngestContext backup_ctx = base_ctx;
        backup_ctx.label = SnapshotLabel::Backup;
        if (m.platform == Platform::Ios) {
            resolver = ContainerResolver::scan_reference(pre.snapshot);
            backup_ctx.resolver = &resolver;
        }
        IngestResult backup = ingest_source(run.backup, backup_ctx);

        IngestContext post_ctx = base_ctx;
        post_ctx.label = SnapshotLabel::Post;
        IngestResult post = ingest_source(run.post, post_ctx);

        DatasetRunResult file_ds =
            evaluate_triple(m.dataset_label, pre.snapshot, backup.snapshot, post.snapshot,
                            run.run_id, m.scope_filter, m.weight_side, true);
        file_ds.unmapped_count = backup.unmapped.size();
        for (const auto& u : backup.unmapped)
            file_ds.warnings.push_back("unmapped backup member: " + u);
        for (const auto& src : {&pre, &backup, &post})
            for (const auto& w : src->warnings) file_ds.warnings.push_back(w);
        result.datasets.push_back(std::move(file_ds));

        for (const auto& ds : content_datasets) {
            std::vector<std::string> warnings;
            auto pre_vals =
                extract_reference_content(pre.snapshot, ds, m.content_counting, &warnings);
            auto post_vals =
                extract_reference_content(post.snapshot, ds, m.content_counting, &warnings);
            auto backup_vals = extract_backup_content(backup.snapshot, &backup.kv_carriers, ds,
                                                      m.content_counting, &warnings);
            Snapshot cpre = content_snapshot(pre_vals, SnapshotLabel::Pre, m.platform, run.run_id);
            Snapshot cback =
                content_snapshot(backup_vals, SnapshotLabel::Backup, m.platform, run.run_id);
            Snapshot cpost =
                content_snapshot(post_vals, SnapshotLabel::Post, m.platform, run.run_id);
            DatasetRunResult content_ds = evaluate_triple(ds.label, cpre, cback, cpost,
                                                          run.run_id, {}, m.weight_side, false);
            for (auto& w : warnings) content_ds.warnings.push_back(std::move(w));
            result.datasets.push_back(std::move(content_ds));
        }
    } catch (const std::exception& ex) {
        result.failed = true;
        result.error = ex.what();
        result.datasets.clear();
    }
    return result;
}

}  // namespace

int run_evaluation(const EvaluationManifest& m, int jobs) {
    fs::create_directories(m.output_dir);
    AuditSink audit;
    audit.add("tool backupdiff " BDIFF_VERSION);
    audit.add("digest_algorithm " + std::string(kDigestAlgorithm));
    audit.add("started " + now_iso8601());

    MappingTable mapping =
        m.mapping_rules ? MappingTable::load_rules_file(*m.mapping_rules)
                        : MappingTable::builtin();
    if (m.mapping_rules)
        audit.add("mapping_rules " + m.mapping_rules->string() + " sha256=" +
                  digest_of_file(*m.mapping_rules).hex());
    std::vector<ContentDataset> content_datasets;
    if (m.recipes_file) {
        content_datasets = group_recipes(load_recipes_file(*m.recipes_file));
        audit.add("recipes_file " + m.recipes_file->string() + " sha256=" +
                  digest_of_file(*m.recipes_file).hex());
    }
    for (const auto& run : m.runs)
        for (const auto& [tag, spec] : {std::pair{"pre", &run.pre},
                                        std::pair{"backup", &run.backup},
                                        std::pair{"post", &run.post}}) {
            if (fs::is_regular_file(spec->path))
                audit.add("input run=" + std::to_string(run.run_id) + " " + tag + " " +
                          spec->path.string() + " sha256=" + digest_of_file(spec->path).hex());
            else
                audit.add("input run=" + std::to_string(run.run_id) + " " + tag + " " +
                          spec->path.string() +
                          (fs::is_directory(spec->path) ? " (directory)" : " (missing)"));
        }

    std::vector<RunResult> results(m.runs.size());
    std::atomic<size_t> next{0};
    auto worker = [&]() {
        while (true) {
            size_t i = next.fetch_add(1);
            if (i >= m.runs.size()) return;
            results[i] = evaluate_one_run(m, m.runs[i], &mapping, content_datasets);
        }
    };
    int n_threads = std::max(1, std::min<int>(jobs, int(m.runs.size())));
    if (n_threads <= 1) {
        worker();
    } else {
        std::vector<std::thread> pool;
        for (int t = 0; t < n_threads; ++t) pool.emplace_back(worker);
        for (auto& t : pool) t.join();
    }

    bool any_failed = false;
    bool any_identity_violation = false;
    for (const auto& r : results) {
        write_file(m.output_dir / ("run_" + std::to_string(r.run_id) + ".json"),
                   run_result_to_json(r, m.include_name_lists));
        if (r.failed) {
            any_failed = true;
            audit.add("run " + std::to_string(r.run_id) + " FAILED: " + r.error);
            continue;
        }
        audit.add("run " + std::to_string(r.run_id) + " ok");
        for (const auto& ds : r.datasets)
            for (const auto& w : ds.warnings)
                if (w.starts_with("IDENTITY: ")) {
                    any_identity_violation = true;
                    audit.add("run " + std::to_string(r.run_id) + " " + ds.label + " " + w);
                }
    }

    // Grouped report over successful runs, one dataset section per label.
    std::vector<DatasetReport> report;
    std::vector<std::string> labels;
    labels.push_back(m.dataset_label);
    for (const auto& ds : content_datasets) labels.push_back(ds.label);
    for (const auto& label : labels) {
        std::vector<RunStats> stats;
        std::vector<RunClassification> classifications;
        for (const auto& r : results) {
            if (r.failed) continue;
            for (const auto& ds : r.datasets)
                if (ds.label == label) {
                    stats.push_back(ds.stats);
                    classifications.push_back(ds.classification);
                }
        }
        if (stats.empty()) continue;
        DatasetReport dr;
        dr.label = label;
        dr.groups = group_runs(stats);
        dr.overlaps = {{(long long)overlapping_files(classifications, PClass::Mis).size(),
                        (long long)overlapping_files(classifications, PClass::Mback).size(),
                        (long long)overlapping_files(classifications, PClass::Mpre).size(),
                        (long long)overlapping_files(classifications, PClass::Nom).size()}};
        report.push_back(std::move(dr));
    }
    write_file(m.output_dir / "report.md", emit_table(report, ReportFormat::Markdown));
    write_file(m.output_dir / "report.csv", emit_table(report, ReportFormat::Csv));
    write_file(m.output_dir / "report.json", emit_table(report, ReportFormat::Json));

    audit.add("finished " + now_iso8601());
    std::string audit_text;
    for (const auto& line : audit.lines) audit_text += line + "\n";
    write_file(m.output_dir / "audit.log", audit_text);

    if (any_identity_violation) return kExitIdentityViolation;
    if (any_failed) return kExitRunFailed;
    return kExitOk;
}

int run_replay(const fs::path& numbers_file, const std::optional<fs::path>& output_dir) {
    NumbersFile numbers = load_numbers_file(numbers_file);
    ReplayResult replay = replay_numbers(numbers);
    std::string md = emit_table(replay.datasets, ReportFormat::Markdown);
    if (output_dir) {
        fs::create_directories(*output_dir);
        write_file(*output_dir / "report.md", md);
        write_file(*output_dir / "report.csv", emit_table(replay.datasets, ReportFormat::Csv));
        write_file(*output_dir / "report.json", emit_table(replay.datasets, ReportFormat::Json));
    } else {
        std::cout << md;
    }
    if (replay.flagged_rows > 0) {
        for (const auto& v : replay.violations) std::cerr << "identity violation: " << v << "\n";
        return kExitIdentityViolation;
    }
    return kExitOk;
}

int rebuild_report(const fs::path& runs_dir, ReportFormat format, std::string& out_document) {
    std::vector<RunResult> results;
    std::vector<fs::path> files;
    for (const auto& e : fs::directory_iterator(runs_dir)) {
        std::string name = e.path().filename().string();
        if (name.starts_with("run_") && name.ends_with(".json")) files.push_back(e.path());
    }
    std::sort(files.begin(), files.end());
    for (const auto& f : files) results.push_back(run_result_from_json(to_string(read_file(f))));
    if (results.empty()) throw InvalidPlan("no run_<id>.json files under " + runs_dir.string());

    std::map<std::string, std::vector<RunStats>> by_label;
    std::map<std::string, std::vector<std::array<NameSet, 4>>> names_by_label;
    std::vector<std::string> label_order;
    for (const auto& r : results) {
        if (r.failed) continue;
        for (const auto& ds : r.datasets) {
            if (!by_label.count(ds.label)) label_order.push_back(ds.label);
            by_label[ds.label].push_back(ds.stats);
            names_by_label[ds.label].push_back(ds.p_names);
        }
    }
    std::vector<DatasetReport> report;
    for (const auto& label : label_order) {
        DatasetReport dr;
        dr.label = label;
        dr.groups = group_runs(by_label[label]);
        std::array<long long, 4> overlaps{};
        for (int cat = 0; cat < 4; ++cat) {
            NameSet acc = names_by_label[label].front()[cat];
            for (const auto& pn : names_by_label[label]) {
                NameSet next;
                std::set_intersection(acc.begin(), acc.end(), pn[cat].begin(), pn[cat].end(),
                                      std::inserter(next, next.end()));
                acc = std::move(next);
            }
            overlaps[size_t(cat)] = (long long)acc.size();
        }
        dr.overlaps = overlaps;
        report.push_back(std::move(dr));
    }
    out_document = emit_table(report, format);
    return kExitOk;
}

}  // namespace bdiff
