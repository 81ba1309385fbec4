#pragma once

#include <array>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "bdiff/classify.hpp"
#include "bdiff/model.hpp"

namespace bdiff {

/// Exact column average: sum of per-run integers over run count. Display
/// rendering rounds half-to-even; JSON output carries the reduced rational.
struct Rational {
    long long num = 0;
    long long den = 1;

    static Rational of(long long sum, long long count);
    bool operator==(const Rational&) const = default;
    long long round_half_even() const;
    double to_double() const { return double(num) / double(den); }
};

/// Per-run scalar row feeding the grouped tables.
struct RunStats {
    int run_id = 0;
    long long pre = 0, backup = 0, post = 0;
    long long e = 0, n_over = 0, n_new = 0, n_both = 0;
    long long v_eq = 0, v_ch = 0;
    long long p_mis = 0, p_mback = 0, p_mpre = 0, p_nom = 0;
    double r_w_mean = 0.0, r_w_std = 0.0;
};

RunStats run_stats_from(const RunClassification& rc, long long pre_count, long long backup_count,
                        long long post_count);

/// Averaged column names, in table order.
extern const std::array<const char*, 8> kAveragedColumns;

/// Runs sharing an identical mismatch-classification vector (and |V_ch|).
struct ReportGroup {
    std::vector<int> run_ids;
    long long count = 0;
    std::array<long long, 4> p_vector{};  // |P_mis|, |P_mback|, |P_mpre|, |P_nom|
    long long v_ch = 0;
    std::map<std::string, Rational> averages;  // pre backup post e n_over n_new n_both v_eq
    double r_w_mean = 0.0, r_w_std = 0.0;

    bool operator==(const ReportGroup&) const = default;
};

/// Partitions runs by (p_vector, v_ch), sorted descending by group size;
/// ties break by lexicographic p_vector, then v_ch, then lowest run id.
std::vector<ReportGroup> group_runs(const std::vector<RunStats>& runs);

/// Names affected in the category in every run (intersection).
NameSet overlapping_files(const std::vector<RunClassification>& runs, PClass category);

struct DatasetReport {
    std::string label;
    std::vector<ReportGroup> groups;
    std::optional<std::array<long long, 4>> overlaps;  // per P-class overlap counts
    std::vector<std::string> notes;                    // consistency diagnostics
};

enum class ReportFormat { Markdown, Csv, Json };
ReportFormat report_format_from(const std::string& s);

/// Renders the grouped tables. Deterministic: identical inputs produce
/// identical bytes. Markdown/CSV apply display rounding; JSON carries the
/// exact rationals and round-trips through parse_report_json.
std::string emit_table(const std::vector<DatasetReport>& datasets, ReportFormat format);

std::vector<DatasetReport> parse_report_json(const std::string& text);

/// One published (or recomputed) group row of an evaluation table, as read
/// from a replay numbers file.
struct GroupRow {
    long long count = 1;
    long long pre = 0, backup = 0, post = 0;
    long long e = 0, n_over = 0, n_new = 0, n_both = 0;
    long long v_eq = 0, v_ch = 0;
    long long p_mis = 0, p_mback = 0, p_mpre = 0, p_nom = 0;
    double r_w_mean = 0.0, r_w_std = 0.0;
};

struct RowCheck {
    std::vector<std::string> violations;  // decidable identity failures
    std::vector<std::string> notes;       // averaged-column consistency deltas
};

/// Identity checking for one table row.
///
/// Single-run rows carry exact integers, so every identity is decidable and
/// checked exactly. Rows aggregating several runs hold independently rounded
/// column means: only |V_ch| = sum of P-classes stays exact, the coupled
/// N_both/V_eq identity is checked within rounding distance 1, and the
/// remaining cross-column sums are reported as consistency notes with their
/// deltas rather than pass/fail verdicts.
RowCheck check_group_row(const GroupRow& row);

struct NumbersDataset {
    std::string label;
    std::vector<GroupRow> rows;
    std::optional<std::array<long long, 4>> overlaps;
};

struct NumbersFile {
    std::string table;
    std::vector<NumbersDataset> datasets;
};

NumbersFile load_numbers_file(const std::filesystem::path& p);

struct ReplayResult {
    std::vector<DatasetReport> datasets;
    size_t flagged_rows = 0;
    std::vector<std::string> violations;
};

/// Re-runs grouping, identity checking, averaging and emission over published
/// per-group (or per-run) set cardinalities.
ReplayResult replay_numbers(const NumbersFile& numbers);

}  // namespace bdiff
