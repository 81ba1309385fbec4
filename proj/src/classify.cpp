#include "bdiff/classify.hpp"

#include <algorithm>

#include "bdiff/errors.hpp"

namespace bdiff {

namespace {

NameSet set_union(const NameSet& a, const NameSet& b) {
    NameSet out;
    std::set_union(a.begin(), a.end(), b.begin(), b.end(), std::inserter(out, out.end()));
    return out;
}

NameSet set_difference(const NameSet& a, const NameSet& b) {
    NameSet out;
    std::set_difference(a.begin(), a.end(), b.begin(), b.end(), std::inserter(out, out.end()));
    return out;
}

NameSet set_intersection(const NameSet& a, const NameSet& b) {
    NameSet out;
    std::set_intersection(a.begin(), a.end(), b.begin(), b.end(), std::inserter(out, out.end()));
    return out;
}

bool disjoint(const NameSet& a, const NameSet& b) {
    auto ia = a.begin();
    auto ib = b.begin();
    while (ia != a.end() && ib != b.end()) {
        if (*ia == *ib) return false;
        if (*ia < *ib) ++ia;
        else ++ib;
    }
    return true;
}

}  // namespace

NameSet apply_scope_filter(const NameSet& names, const std::vector<std::string>& prefixes) {
    if (prefixes.empty()) return names;
    NameSet out;
    for (const auto& n : names)
        for (const auto& p : prefixes)
            if (n.starts_with(p)) {
                out.insert(out.end(), n);
                break;
            }
    return out;
}

NameClassification classify_names(const NameSet& pre, const NameSet& backup) {
    NameClassification out;
    out.e = set_union(pre, backup);
    out.n_over = set_difference(pre, backup);
    out.n_new = set_difference(backup, pre);
    out.n_both = set_intersection(pre, backup);
    return out;
}

ValueClassification classify_values(const Snapshot& pre, const Snapshot& backup,
                                    const NameSet& n_both) {
    ValueClassification out;
    for (const auto& name : n_both) {
        const Entry* a = pre.find(name);
        const Entry* b = backup.find(name);
        if (!a || !b) throw Error("n_both name missing from snapshot: " + name);
        if (a->digest == b->digest) out.v_eq.insert(out.v_eq.end(), name);
        else out.v_ch.insert(out.v_ch.end(), name);
    }
    return out;
}

MismatchClassification classify_mismatches(const RunInput& run, const NameSet& v_ch) {
    MismatchClassification out;
    NameSet post_names = apply_scope_filter(run.post->names(), run.scope_filter);
    for (const auto& name : v_ch) {
        const Entry* pre_e = run.pre->find(name);
        const Entry* back_e = run.backup->find(name);
        MismatchRecord rec;
        rec.name = name;
        rec.pre_digest = pre_e->digest;
        rec.backup_digest = back_e->digest;
        rec.s = pre_e->size;
        if (!post_names.count(name)) {
            rec.p_class = PClass::Mis;
            out.p_mis.insert(name);
        } else {
            const Entry* post_e = run.post->find(name);
            rec.post_digest = post_e->digest;
            if (back_e->digest == post_e->digest) {
                rec.p_class = PClass::Mback;
                out.p_mback.insert(name);
            } else if (pre_e->digest == post_e->digest) {
                rec.p_class = PClass::Mpre;
                out.p_mpre.insert(name);
            } else {
                rec.p_class = PClass::Nom;
                out.p_nom.insert(name);
            }
        }
        out.records.push_back(std::move(rec));
    }
    return out;
}

RunClassification classify_run(const RunInput& run) {
    if (!run.pre || !run.backup || !run.post) throw Error("classify_run: missing snapshot");
    RunClassification rc;
    rc.run_id = run.run_id;
    NameSet pre_names = apply_scope_filter(run.pre->names(), run.scope_filter);
    NameSet backup_names = apply_scope_filter(run.backup->names(), run.scope_filter);

    auto nc = classify_names(pre_names, backup_names);
    rc.e = std::move(nc.e);
    rc.n_over = std::move(nc.n_over);
    rc.n_new = std::move(nc.n_new);
    rc.n_both = std::move(nc.n_both);

    auto vc = classify_values(*run.pre, *run.backup, rc.n_both);
    rc.v_eq = std::move(vc.v_eq);
    rc.v_ch = std::move(vc.v_ch);

    auto mc = classify_mismatches(run, rc.v_ch);
    rc.p_mis = std::move(mc.p_mis);
    rc.p_mback = std::move(mc.p_mback);
    rc.p_mpre = std::move(mc.p_mpre);
    rc.p_nom = std::move(mc.p_nom);
    rc.mismatches = std::move(mc.records);

    for (const auto& name : rc.n_new)
        if (run.post->has(name)) rc.n_new_in_post.insert(rc.n_new_in_post.end(), name);
    return rc;
}

std::vector<std::string> check_cardinality_identities(const RunClassification& rc) {
    std::vector<std::string> out;
    auto expect = [&out](bool ok, const std::string& what) {
        if (!ok) out.push_back(what);
    };
    expect(rc.e.size() == rc.n_over.size() + rc.n_new.size() + rc.n_both.size(),
           "|E| != |N_over| + |N_new| + |N_both| (" + std::to_string(rc.e.size()) + " vs " +
               std::to_string(rc.n_over.size() + rc.n_new.size() + rc.n_both.size()) + ")");
    expect(rc.n_both.size() == rc.v_eq.size() + rc.v_ch.size(),
           "|N_both| != |V_eq| + |V_ch| (" + std::to_string(rc.n_both.size()) + " vs " +
               std::to_string(rc.v_eq.size() + rc.v_ch.size()) + ")");
    expect(rc.v_ch.size() ==
               rc.p_mis.size() + rc.p_mback.size() + rc.p_mpre.size() + rc.p_nom.size(),
           "|V_ch| != |P_mis| + |P_mback| + |P_mpre| + |P_nom| (" + std::to_string(rc.v_ch.size()) +
               " vs " +
               std::to_string(rc.p_mis.size() + rc.p_mback.size() + rc.p_mpre.size() +
                              rc.p_nom.size()) +
               ")");
    // Disjointness and coverage, not just cardinalities.
    expect(disjoint(rc.n_over, rc.n_new) && disjoint(rc.n_over, rc.n_both) &&
               disjoint(rc.n_new, rc.n_both),
           "N-sets are not pairwise disjoint");
    expect(disjoint(rc.v_eq, rc.v_ch), "V_eq and V_ch intersect");
    expect(disjoint(rc.p_mis, rc.p_mback) && disjoint(rc.p_mis, rc.p_mpre) &&
               disjoint(rc.p_mis, rc.p_nom) && disjoint(rc.p_mback, rc.p_mpre) &&
               disjoint(rc.p_mback, rc.p_nom) && disjoint(rc.p_mpre, rc.p_nom),
           "P-sets are not pairwise disjoint");
    auto subset = [](const NameSet& a, const NameSet& b) {
        return std::includes(b.begin(), b.end(), a.begin(), a.end());
    };
    expect(subset(rc.n_over, rc.e) && subset(rc.n_new, rc.e) && subset(rc.n_both, rc.e),
           "an N-set is not a subset of E");
    expect(subset(rc.v_eq, rc.n_both) && subset(rc.v_ch, rc.n_both),
           "a V-set is not a subset of N_both");
    expect(subset(rc.p_mis, rc.v_ch) && subset(rc.p_mback, rc.v_ch) &&
               subset(rc.p_mpre, rc.v_ch) && subset(rc.p_nom, rc.v_ch),
           "a P-set is not a subset of V_ch");
    return out;
}

}  // namespace bdiff
