#pragma once

#include <optional>
#include <string>
#include <vector>

#include "bdiff/model.hpp"

namespace bdiff {

/// One evaluation iteration: the three snapshots sharing a device-path
/// namespace, plus an optional scope restriction (name prefixes) applied to
/// all three sides before set arithmetic.
struct RunInput {
    const Snapshot* pre = nullptr;
    const Snapshot* backup = nullptr;
    const Snapshot* post = nullptr;
    int run_id = 1;
    std::vector<std::string> scope_filter;
};

struct NameClassification {
    NameSet e, n_over, n_new, n_both;
};

/// Name comparison between Pre and Backup:
///   e      = names(pre) ∪ names(backup)
///   n_over = names(pre) \ names(backup)
///   n_new  = names(backup) \ names(pre)
///   n_both = names(pre) ∩ names(backup)
NameClassification classify_names(const NameSet& pre, const NameSet& backup);

struct ValueClassification {
    NameSet v_eq, v_ch;
};

/// Value comparison over n_both: digest equality decides membership.
ValueClassification classify_values(const Snapshot& pre, const Snapshot& backup,
                                    const NameSet& n_both);

struct MismatchClassification {
    NameSet p_mis, p_mback, p_mpre, p_nom;
    std::vector<MismatchRecord> records;
};

/// Mismatch classification using Post: for each changed name,
///   absent from Post                          -> p_mis
///   Backup value = Post value                 -> p_mback
///   Pre value = Post value (Backup differs)   -> p_mpre
///   all three values distinct                 -> p_nom
MismatchClassification classify_mismatches(const RunInput& run, const NameSet& v_ch);

/// Runs the full name/value/mismatch pipeline over one iteration.
RunClassification classify_run(const RunInput& run);

/// Returns the identities and disjointness constraints violated by rc; empty
/// for every classification the pipeline itself produces.
std::vector<std::string> check_cardinality_identities(const RunClassification& rc);

/// Applies the scope filter (keep names with any listed prefix) to a name set.
NameSet apply_scope_filter(const NameSet& names, const std::vector<std::string>& prefixes);

}  // namespace bdiff
