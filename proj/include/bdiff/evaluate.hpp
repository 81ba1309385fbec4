#pragma once

#include <array>
#include <optional>
#include <string>
#include <vector>

#include "bdiff/contentx.hpp"
#include "bdiff/ingest.hpp"
#include "bdiff/report.hpp"
#include "bdiff/simdiff.hpp"

namespace bdiff {

struct ManifestRun {
    int run_id = 1;
    SourceSpec pre, backup, post;
};

/// The evaluation manifest drives the whole pipeline: ingest -> map ->
/// extract -> classify -> similarity -> report.
struct EvaluationManifest {
    std::string dataset_label = "File-Based";
    Platform platform = Platform::Generic;
    std::vector<ManifestRun> runs;
    std::optional<std::filesystem::path> recipes_file;
    std::optional<std::filesystem::path> mapping_rules;
    WeightSide weight_side = WeightSide::Pre;
    std::filesystem::path output_dir;
    std::vector<std::string> scope_filter;
    CountingMode content_counting = CountingMode::PerRow;
    bool include_name_lists = false;
};

/// Parses the manifest JSON; relative paths resolve against the file's
/// directory. Violated manifest invariants (no runs, duplicate or gapped run
/// ids, missing inputs) throw InvalidPlan.
EvaluationManifest load_manifest(const std::filesystem::path& p);

/// One dataset's outcome within one run.
struct DatasetRunResult {
    std::string label;
    RunStats stats;
    std::array<NameSet, 4> p_names;  // P_mis, P_mback, P_mpre, P_nom
    NameSet n_new_in_post;
    std::vector<MismatchRecord> mismatches;
    std::vector<std::string> warnings;
    size_t unmapped_count = 0;
    RunClassification classification;  // with name lists when requested
};

struct RunResult {
    int run_id = 0;
    bool failed = false;
    std::string error;
    std::vector<DatasetRunResult> datasets;
};

/// Exit-status contract: every execution path ends in one of these.
enum ExitStatus : int {
    kExitOk = 0,
    kExitRunFailed = 1,
    kExitIdentityViolation = 2,
    kExitUsage = 64,
};

/// Runs every iteration, writes run_<id>.json per run plus report.{md,csv,json}
/// and audit.log under output_dir, and returns the exit status.
int run_evaluation(const EvaluationManifest& manifest, int jobs = 1);

/// Reproduces grouped tables from published per-run or per-group numbers:
/// identity checking, grouping, averaging, emission. Writes the three report
/// files under output_dir when given, else prints markdown to stdout.
int run_replay(const std::filesystem::path& numbers_file,
               const std::optional<std::filesystem::path>& output_dir);

/// Rebuilds grouped reports from stored run_<id>.json files.
int rebuild_report(const std::filesystem::path& runs_dir, ReportFormat format,
                   std::string& out_document);

/// Serialization of run results (run_<id>.json).
std::string run_result_to_json(const RunResult& r, bool include_name_lists);
RunResult run_result_from_json(const std::string& text);

}  // namespace bdiff
