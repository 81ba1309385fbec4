#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>

#include "bdiff/errors.hpp"
#include "bdiff/evaluate.hpp"
#include "bdiff/fixturegen.hpp"
#include "bdiff/ingest.hpp"

namespace fs = std::filesystem;
using namespace bdiff;

int main(int argc, char** argv) {
    CLI::App app{"backupdiff - differential evaluation of smartphone local backups"};
    app.require_subcommand(1);
    app.set_version_flag("--version", std::string("backupdiff ") + BDIFF_VERSION);

    // ingest: one source -> snapshot directory
    auto* ing = app.add_subcommand("ingest", "Ingest a source into a snapshot directory");
    std::string ing_format = "dir", ing_in, ing_out, ing_label = "pre", ing_platform = "generic";
    std::string ing_prefix, ing_container_map, ing_rules;
    int ing_run_id = 1;
    ing->add_option("--format", ing_format, "dir | tar | ab | ios")->capture_default_str();
    ing->add_option("--in", ing_in, "source path")->required();
    ing->add_option("--out", ing_out, "snapshot output directory")->required();
    ing->add_option("--label", ing_label, "pre | backup | post")->capture_default_str();
    ing->add_option("--platform", ing_platform, "android | ios | generic")->capture_default_str();
    ing->add_option("--run-id", ing_run_id)->capture_default_str();
    ing->add_option("--device-prefix", ing_prefix, "device root for directory sources");
    ing->add_option("--container-map", ing_container_map, "bundle=uuid map file (ios)");
    ing->add_option("--mapping-rules", ing_rules, "override the built-in mapping table");

    // fixture gen
    auto* fx = app.add_subcommand("fixture", "Fixture generation");
    auto* fxgen = fx->add_subcommand("gen", "Generate a run fixture from a plan");
    std::string fx_plan, fx_out;
    fxgen->add_option("--plan", fx_plan, "mutation plan JSON")->required();
    fxgen->add_option("--out", fx_out, "output directory")->required();

    // evaluate
    auto* ev = app.add_subcommand("evaluate", "Run the full evaluation pipeline");
    std::string ev_manifest, ev_weight_side, ev_rules;
    int ev_jobs = 1;
    ev->add_option("--manifest", ev_manifest, "evaluation manifest JSON")->required();
    ev->add_option("--jobs", ev_jobs, "parallel runs")->capture_default_str();
    ev->add_option("--weight-side", ev_weight_side, "pre | backup (overrides manifest)");
    ev->add_option("--mapping-rules", ev_rules, "rules file overriding the built-in table");

    // replay
    auto* rp = app.add_subcommand("replay", "Re-render grouped tables from published numbers");
    std::string rp_numbers, rp_out;
    rp->add_option("--numbers", rp_numbers, "numbers JSON file")->required();
    rp->add_option("--out", rp_out, "output directory (default: print markdown)");

    // report
    auto* rep = app.add_subcommand("report", "Rebuild a report from stored run results");
    std::string rep_from, rep_format = "md";
    rep->add_option("--from", rep_from, "directory holding run_<id>.json files")->required();
    rep->add_option("--format", rep_format, "md | csv | json")->capture_default_str();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        int rc = app.exit(e);
        return rc == 0 ? 0 : kExitUsage;
    }

    try {
        if (*ing) {
            SourceSpec spec;
            spec.format = source_format_from(ing_format);
            spec.path = ing_in;
            if (!ing_prefix.empty()) spec.options["device_prefix"] = ing_prefix;
            if (!ing_container_map.empty()) spec.options["container_map"] = ing_container_map;
            MappingTable table =
                ing_rules.empty() ? MappingTable::builtin() : MappingTable::load_rules_file(ing_rules);
            IngestContext ctx{std::make_shared<MemBlobStore>(), label_from(ing_label),
                              platform_from(ing_platform), ing_run_id, &table, nullptr};
            IngestResult result = ingest_source(spec, ctx);
            save_snapshot(result.snapshot, ing_out);
            if (result.kv_carriers.size() > 0)
                save_snapshot(result.kv_carriers, fs::path(ing_out) / "kv_carriers");
            for (const auto& w : result.warnings) std::cerr << "warning: " << w << "\n";
            for (const auto& u : result.unmapped) std::cerr << "unmapped: " << u << "\n";
            for (const auto& b : result.missing_blobs) std::cerr << "missing blob: " << b << "\n";
            std::cout << "ingested " << result.snapshot.size() << " entries ("
                      << result.unmapped.size() << " unmapped, " << result.missing_blobs.size()
                      << " missing blobs)\n";
            return kExitOk;
        }
        if (*fxgen) {
            MutationPlan plan = plan_from_json_text(to_string(read_file(fx_plan)));
            if (plan.platform == Platform::Android) {
                materialize_android_run(plan, fx_out);
            } else {
                RunTriple triple = gen_run(plan);
                save_snapshot(triple.pre, fs::path(fx_out) / "pre");
                save_snapshot(triple.backup, fs::path(fx_out) / "backup");
                save_snapshot(triple.post, fs::path(fx_out) / "post");
            }
            std::cout << "fixture written to " << fx_out << "\n";
            return kExitOk;
        }
        if (*ev) {
            EvaluationManifest manifest = load_manifest(ev_manifest);
            if (ev_weight_side == "pre") manifest.weight_side = WeightSide::Pre;
            else if (ev_weight_side == "backup") manifest.weight_side = WeightSide::Backup;
            else if (!ev_weight_side.empty()) throw InvalidPlan("bad --weight-side");
            if (!ev_rules.empty()) manifest.mapping_rules = ev_rules;
            int rc = run_evaluation(manifest, ev_jobs);
            std::cout << "evaluation finished with status " << rc << ", report under "
                      << manifest.output_dir.string() << "\n";
            return rc;
        }
        if (*rp) {
            std::optional<fs::path> out;
            if (!rp_out.empty()) out = rp_out;
            return run_replay(rp_numbers, out);
        }
        if (*rep) {
            std::string doc;
            int rc = rebuild_report(rep_from, report_format_from(rep_format), doc);
            std::cout << doc;
            return rc;
        }
    } catch (const InvalidPlan& ex) {
        std::cerr << "error: " << ex.what() << "\n";
        return kExitUsage;
    } catch (const Error& ex) {
        std::cerr << "error: " << ex.what() << "\n";
        return kExitRunFailed;
    } catch (const std::exception& ex) {
        std::cerr << "error: " << ex.what() << "\n";
        return kExitRunFailed;
    }
    return kExitUsage;
}
