#include "bdiff/report.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <numeric>
#include <sstream>

#include <nlohmann/json.hpp>

#include "bdiff/errors.hpp"

namespace bdiff {

using nlohmann::json;

const std::array<const char*, 8> kAveragedColumns = {"pre",    "backup", "post",   "e",
                                                     "n_over", "n_new",  "n_both", "v_eq"};

Rational Rational::of(long long sum, long long count) {
    if (count <= 0) throw Error("rational with nonpositive denominator");
    long long g = std::gcd(sum < 0 ? -sum : sum, count);
    if (g == 0) g = 1;
    return Rational{sum / g, count / g};
}

long long Rational::round_half_even() const {
    long long q = num / den;
    long long r = num % den;
    if (r < 0) {  // column sums are nonnegative in practice; stay correct anyway
        q -= 1;
        r += den;
    }
    long long twice = 2 * r;
    if (twice > den) return q + 1;
    if (twice < den) return q;
    return (q % 2 == 0) ? q : q + 1;
}

RunStats run_stats_from(const RunClassification& rc, long long pre_count, long long backup_count,
                        long long post_count) {
    RunStats s;
    s.run_id = rc.run_id;
    s.pre = pre_count;
    s.backup = backup_count;
    s.post = post_count;
    s.e = (long long)rc.e.size();
    s.n_over = (long long)rc.n_over.size();
    s.n_new = (long long)rc.n_new.size();
    s.n_both = (long long)rc.n_both.size();
    s.v_eq = (long long)rc.v_eq.size();
    s.v_ch = (long long)rc.v_ch.size();
    s.p_mis = (long long)rc.p_mis.size();
    s.p_mback = (long long)rc.p_mback.size();
    s.p_mpre = (long long)rc.p_mpre.size();
    s.p_nom = (long long)rc.p_nom.size();
    s.r_w_mean = rc.r_w_mean;
    s.r_w_std = rc.r_w_std;
    return s;
}

namespace {

struct GroupKey {
    std::array<long long, 4> p;
    long long v_ch;
    auto operator<=>(const GroupKey&) const = default;
};

long long column_of(const RunStats& s, const std::string& col) {
    if (col == "pre") return s.pre;
    if (col == "backup") return s.backup;
    if (col == "post") return s.post;
    if (col == "e") return s.e;
    if (col == "n_over") return s.n_over;
    if (col == "n_new") return s.n_new;
    if (col == "n_both") return s.n_both;
    if (col == "v_eq") return s.v_eq;
    throw Error("unknown column " + col);
}

std::string fmt4(double v) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.4f", v);
    return buf;
}

}  // namespace

std::vector<ReportGroup> group_runs(const std::vector<RunStats>& runs) {
    if (runs.empty()) throw Error("group_runs over an empty run list");
    std::map<GroupKey, std::vector<const RunStats*>> buckets;
    for (const auto& r : runs)
        buckets[GroupKey{{r.p_mis, r.p_mback, r.p_mpre, r.p_nom}, r.v_ch}].push_back(&r);

    std::vector<ReportGroup> out;
    for (const auto& [key, members] : buckets) {
        ReportGroup g;
        g.count = (long long)members.size();
        g.p_vector = key.p;
        g.v_ch = key.v_ch;
        double mean_sum = 0.0, std_sum = 0.0;
        for (const auto* m : members) {
            g.run_ids.push_back(m->run_id);
            mean_sum += m->r_w_mean;
            std_sum += m->r_w_std;
        }
        std::sort(g.run_ids.begin(), g.run_ids.end());
        for (const char* col : kAveragedColumns) {
            long long sum = 0;
            for (const auto* m : members) sum += column_of(*m, col);
            g.averages[col] = Rational::of(sum, g.count);
        }
        g.r_w_mean = mean_sum / double(g.count);
        g.r_w_std = std_sum / double(g.count);
        out.push_back(std::move(g));
    }
    std::sort(out.begin(), out.end(), [](const ReportGroup& a, const ReportGroup& b) {
        if (a.count != b.count) return a.count > b.count;
        if (a.p_vector != b.p_vector) return a.p_vector < b.p_vector;
        if (a.v_ch != b.v_ch) return a.v_ch < b.v_ch;
        return a.run_ids < b.run_ids;
    });
    return out;
}

NameSet overlapping_files(const std::vector<RunClassification>& runs, PClass category) {
    NameSet acc;
    bool first = true;
    for (const auto& rc : runs) {
        const NameSet* cat = nullptr;
        switch (category) {
            case PClass::Mis: cat = &rc.p_mis; break;
            case PClass::Mback: cat = &rc.p_mback; break;
            case PClass::Mpre: cat = &rc.p_mpre; break;
            case PClass::Nom: cat = &rc.p_nom; break;
        }
        if (first) {
            acc = *cat;
            first = false;
        } else {
            NameSet next;
            std::set_intersection(acc.begin(), acc.end(), cat->begin(), cat->end(),
                                  std::inserter(next, next.end()));
            acc = std::move(next);
        }
    }
    return acc;
}

ReportFormat report_format_from(const std::string& s) {
    if (s == "md" || s == "markdown") return ReportFormat::Markdown;
    if (s == "csv") return ReportFormat::Csv;
    if (s == "json") return ReportFormat::Json;
    throw UnsupportedFormat("unknown report format '" + s + "'");
}

namespace {

const std::array<const char*, 16> kTableHeader = {
    "#",      "Pre",  "Backup", "Post",    "E",     "N_over", "N_new",    "N_both",
    "V_eq",   "V_ch", "P_mis",  "P_mback", "P_mpre", "P_nom", "r_w_mean", "r_w_std"};

std::vector<std::string> group_cells(const ReportGroup& g) {
    std::vector<std::string> cells;
    cells.push_back(std::to_string(g.count));
    for (const char* col : kAveragedColumns)
        cells.push_back(std::to_string(g.averages.at(col).round_half_even()));
    // v_ch sits between the averaged columns and the P-vector in table order
    cells.insert(cells.begin() + 9, std::to_string(g.v_ch));
    for (long long p : g.p_vector) cells.push_back(std::to_string(p));
    cells.push_back(fmt4(g.r_w_mean));
    cells.push_back(fmt4(g.r_w_std));
    return cells;
}

std::vector<std::string> overlap_cells(const std::array<long long, 4>& ov) {
    std::vector<std::string> cells(16, "-");
    cells[0] = "overlap";
    for (size_t i = 0; i < 4; ++i) cells[10 + i] = std::to_string(ov[i]);
    return cells;
}

std::string emit_markdown(const std::vector<DatasetReport>& datasets) {
    std::ostringstream out;
    out << "# Evaluation Report\n";
    for (const auto& ds : datasets) {
        out << "\n## " << ds.label << "\n\n";
        out << "|";
        for (const char* h : kTableHeader) out << " " << h << " |";
        out << "\n|";
        for (size_t i = 0; i < kTableHeader.size(); ++i) out << " --- |";
        out << "\n";
        for (const auto& g : ds.groups) {
            out << "|";
            for (const auto& c : group_cells(g)) out << " " << c << " |";
            out << "\n";
        }
        if (ds.overlaps) {
            out << "|";
            for (const auto& c : overlap_cells(*ds.overlaps)) out << " " << c << " |";
            out << "\n";
        }
        for (const auto& n : ds.notes) out << "\n> note: " << n << "\n";
    }
    return out.str();
}

std::string emit_csv(const std::vector<DatasetReport>& datasets) {
    std::ostringstream out;
    out << "dataset";
    for (const char* h : kTableHeader) out << "," << h;
    out << "\n";
    for (const auto& ds : datasets) {
        for (const auto& g : ds.groups) {
            out << ds.label;
            for (const auto& c : group_cells(g)) out << "," << c;
            out << "\n";
        }
        if (ds.overlaps) {
            out << ds.label;
            for (const auto& c : overlap_cells(*ds.overlaps)) out << "," << (c == "-" ? "" : c);
            out << "\n";
        }
    }
    return out.str();
}

json rational_json(const Rational& r) { return json{{"num", r.num}, {"den", r.den}}; }

std::string emit_json(const std::vector<DatasetReport>& datasets) {
    json doc;
    doc["datasets"] = json::array();
    for (const auto& ds : datasets) {
        json jds;
        jds["dataset"] = ds.label;
        jds["groups"] = json::array();
        for (const auto& g : ds.groups) {
            json jg;
            jg["count"] = g.count;
            jg["run_ids"] = g.run_ids;
            jg["p_vector"] = g.p_vector;
            jg["v_ch"] = g.v_ch;
            json avg;
            for (const auto& [col, r] : g.averages) avg[col] = rational_json(r);
            jg["averages"] = avg;
            jg["similarity"] = json{{"mean", g.r_w_mean}, {"std", g.r_w_std}};
            jds["groups"].push_back(jg);
        }
        if (ds.overlaps)
            jds["overlaps"] = json{{"p_mis", (*ds.overlaps)[0]},
                                   {"p_mback", (*ds.overlaps)[1]},
                                   {"p_mpre", (*ds.overlaps)[2]},
                                   {"p_nom", (*ds.overlaps)[3]}};
        else
            jds["overlaps"] = nullptr;
        jds["notes"] = ds.notes;
        doc["datasets"].push_back(jds);
    }
    return doc.dump(2) + "\n";
}

}  // namespace

std::string emit_table(const std::vector<DatasetReport>& datasets, ReportFormat format) {
    switch (format) {
        case ReportFormat::Markdown: return emit_markdown(datasets);
        case ReportFormat::Csv: return emit_csv(datasets);
        case ReportFormat::Json: return emit_json(datasets);
    }
    throw UnsupportedFormat("unhandled report format");
}

std::vector<DatasetReport> parse_report_json(const std::string& text) {
    json doc = json::parse(text);
    std::vector<DatasetReport> out;
    for (const auto& jds : doc.at("datasets")) {
        DatasetReport ds;
        ds.label = jds.at("dataset").get<std::string>();
        for (const auto& jg : jds.at("groups")) {
            ReportGroup g;
            g.count = jg.at("count").get<long long>();
            g.run_ids = jg.at("run_ids").get<std::vector<int>>();
            auto pv = jg.at("p_vector").get<std::vector<long long>>();
            std::copy_n(pv.begin(), 4, g.p_vector.begin());
            g.v_ch = jg.at("v_ch").get<long long>();
            for (const auto& [col, jr] : jg.at("averages").items())
                g.averages[col] = Rational{jr.at("num").get<long long>(),
                                           jr.at("den").get<long long>()};
            g.r_w_mean = jg.at("similarity").at("mean").get<double>();
            g.r_w_std = jg.at("similarity").at("std").get<double>();
            ds.groups.push_back(std::move(g));
        }
        if (!jds.at("overlaps").is_null()) {
            const auto& ov = jds.at("overlaps");
            ds.overlaps = {ov.at("p_mis").get<long long>(), ov.at("p_mback").get<long long>(),
                           ov.at("p_mpre").get<long long>(), ov.at("p_nom").get<long long>()};
        }
        ds.notes = jds.at("notes").get<std::vector<std::string>>();
        out.push_back(std::move(ds));
    }
    return out;
}

RowCheck check_group_row(const GroupRow& row) {
    RowCheck out;
    long long p_sum = row.p_mis + row.p_mback + row.p_mpre + row.p_nom;
    if (row.v_ch != p_sum)
        out.violations.push_back("|V_ch| != |P_mis|+|P_mback|+|P_mpre|+|P_nom| (" +
                                 std::to_string(row.v_ch) + " vs " + std::to_string(p_sum) + ")");
    if (row.count == 1) {
        auto exact = [&out](long long lhs, long long rhs, const char* what) {
            if (lhs != rhs)
                out.violations.push_back(std::string(what) + " (" + std::to_string(lhs) + " vs " +
                                         std::to_string(rhs) + ")");
        };
        exact(row.e, row.n_over + row.n_new + row.n_both, "|E| != |N_over|+|N_new|+|N_both|");
        exact(row.n_both, row.v_eq + row.v_ch, "|N_both| != |V_eq|+|V_ch|");
        exact(row.pre, row.n_over + row.n_both, "|Pre| != |N_over|+|N_both|");
        exact(row.backup, row.n_new + row.n_both, "|Backup| != |N_new|+|N_both|");
        return out;
    }
    // Aggregated rows hold independently rounded column means. N_both and
    // V_eq differ per run by the group-constant V_ch, so their printed means
    // stay within 1 of each other; that bound is checkable. The remaining
    // sums mix four rounded columns whose underlying per-run identity cannot
    // be decided from the aggregate, so deltas are reported, not judged.
    long long nb_delta = row.n_both - (row.v_eq + row.v_ch);
    if (nb_delta < -1 || nb_delta > 1)
        out.violations.push_back("|N_both| vs |V_eq|+|V_ch| beyond rounding distance (delta " +
                                 std::to_string(nb_delta) + ")");
    auto note = [&out](long long lhs, long long rhs, const char* what) {
        if (lhs != rhs)
            out.notes.push_back(std::string(what) + " delta " + std::to_string(lhs - rhs) +
                                " across averaged columns");
    };
    note(row.e, row.n_over + row.n_new + row.n_both, "E vs N_over+N_new+N_both");
    note(row.pre, row.n_over + row.n_both, "Pre vs N_over+N_both");
    note(row.backup, row.n_new + row.n_both, "Backup vs N_new+N_both");
    return out;
}

NumbersFile load_numbers_file(const std::filesystem::path& p) {
    json doc = json::parse(to_string(read_file(p)));
    NumbersFile out;
    out.table = doc.value("table", "");
    for (const auto& jds : doc.at("datasets")) {
        NumbersDataset ds;
        ds.label = jds.at("label").get<std::string>();
        for (const auto& jr : jds.at("groups")) {
            GroupRow r;
            r.count = jr.value("count", 1LL);
            r.pre = jr.at("pre").get<long long>();
            r.backup = jr.at("backup").get<long long>();
            r.post = jr.at("post").get<long long>();
            r.e = jr.at("e").get<long long>();
            r.n_over = jr.at("n_over").get<long long>();
            r.n_new = jr.at("n_new").get<long long>();
            r.n_both = jr.at("n_both").get<long long>();
            r.v_eq = jr.at("v_eq").get<long long>();
            r.v_ch = jr.value("v_ch", 0LL);
            r.p_mis = jr.value("p_mis", 0LL);
            r.p_mback = jr.value("p_mback", 0LL);
            r.p_mpre = jr.value("p_mpre", 0LL);
            r.p_nom = jr.value("p_nom", 0LL);
            r.r_w_mean = jr.value("r_w_mean", 0.0);
            r.r_w_std = jr.value("r_w_std", 0.0);
            ds.rows.push_back(r);
        }
        if (jds.contains("overlaps") && !jds.at("overlaps").is_null()) {
            const auto& ov = jds.at("overlaps");
            ds.overlaps = {ov.at("p_mis").get<long long>(), ov.at("p_mback").get<long long>(),
                           ov.at("p_mpre").get<long long>(), ov.at("p_nom").get<long long>()};
        }
        out.datasets.push_back(std::move(ds));
    }
    return out;
}

ReplayResult replay_numbers(const NumbersFile& numbers) {
    ReplayResult out;
    for (const auto& nds : numbers.datasets) {
        DatasetReport ds;
        ds.label = nds.label;
        std::vector<std::pair<GroupRow, size_t>> rows;
        for (size_t i = 0; i < nds.rows.size(); ++i) rows.emplace_back(nds.rows[i], i);
        // Same ordering rule the pipeline applies to freshly grouped runs.
        std::stable_sort(rows.begin(), rows.end(), [](const auto& a, const auto& b) {
            if (a.first.count != b.first.count) return a.first.count > b.first.count;
            std::array<long long, 4> pa{a.first.p_mis, a.first.p_mback, a.first.p_mpre,
                                        a.first.p_nom};
            std::array<long long, 4> pb{b.first.p_mis, b.first.p_mback, b.first.p_mpre,
                                        b.first.p_nom};
            if (pa != pb) return pa < pb;
            if (a.first.v_ch != b.first.v_ch) return a.first.v_ch < b.first.v_ch;
            return a.second < b.second;
        });
        for (const auto& [row, idx] : rows) {
            RowCheck check = check_group_row(row);
            if (!check.violations.empty()) {
                ++out.flagged_rows;
                for (const auto& v : check.violations)
                    out.violations.push_back(nds.label + " row " + std::to_string(idx + 1) + ": " +
                                             v);
            }
            for (const auto& n : check.notes)
                ds.notes.push_back("row " + std::to_string(idx + 1) + ": " + n);
            ReportGroup g;
            g.count = row.count;
            g.p_vector = {row.p_mis, row.p_mback, row.p_mpre, row.p_nom};
            g.v_ch = row.v_ch;
            g.averages["pre"] = Rational::of(row.pre, 1);
            g.averages["backup"] = Rational::of(row.backup, 1);
            g.averages["post"] = Rational::of(row.post, 1);
            g.averages["e"] = Rational::of(row.e, 1);
            g.averages["n_over"] = Rational::of(row.n_over, 1);
            g.averages["n_new"] = Rational::of(row.n_new, 1);
            g.averages["n_both"] = Rational::of(row.n_both, 1);
            g.averages["v_eq"] = Rational::of(row.v_eq, 1);
            g.r_w_mean = row.r_w_mean;
            g.r_w_std = row.r_w_std;
            ds.groups.push_back(std::move(g));
        }
        ds.overlaps = nds.overlaps;
        out.datasets.push_back(std::move(ds));
    }
    return out;
}

}  // namespace bdiff
