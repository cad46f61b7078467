#include "tabtax/discovery.hpp"

#include <algorithm>
#include <map>

#include "tabtax/error.hpp"

namespace tabtax {

std::string_view to_string(ProposalStatus status) {
    switch (status) {
        case ProposalStatus::pending: return "pending";
        case ProposalStatus::accepted: return "accepted";
        case ProposalStatus::rejected: return "rejected";
    }
    return "pending";
}

void validate(const DiscoveryConfig& config) {
    validate(config.train);
    if (config.max_proposals < 2) throw InvalidArgument("max_proposals must be at least 2");
}

nlohmann::json to_json(const DiscoveryConfig& config) {
    return {{"train", to_json(config.train)},
            {"ignore_columns", std::vector<std::string>(config.ignore_columns.begin(), config.ignore_columns.end())},
            {"max_proposals", config.max_proposals}};
}

DiscoveryConfig discovery_config_from_json(const nlohmann::json& j, DiscoveryConfig c) {
    if (j.is_null()) return c;
    if (!j.is_object()) throw InvalidArgument("discovery config must be an object");
    try {
        if (j.contains("train")) c.train = train_config_from_json(j.at("train"), c.train);
        // Flat training keys are accepted too, matching the UI form fields.
        nlohmann::json flat = nlohmann::json::object();
        for (const char* key : {"side", "epochs", "alpha0", "beta0", "distance", "weight_lr", "lambda", "batch_size",
                                "seed"}) {
            if (j.contains(key)) flat[key] = j.at(key);
        }
        if (!flat.empty()) c.train = train_config_from_json(flat, c.train);
        if (j.contains("ignore_columns")) {
            c.ignore_columns.clear();
            for (const auto& v : j.at("ignore_columns")) c.ignore_columns.insert(v.get<std::string>());
        }
        if (j.contains("max_proposals")) c.max_proposals = j.at("max_proposals").get<std::size_t>();
    } catch (const nlohmann::json::exception& e) {
        throw InvalidArgument(std::string("bad discovery config: ") + e.what());
    }
    validate(c);
    return c;
}

std::vector<std::pair<std::string, double>> column_weight_scores(const Table& table, const FeatureWeights& weights,
                                                                 const std::vector<Feature>& feature_map) {
    if (weights.size() != feature_map.size()) throw InvalidArgument("weights do not match the feature map");
    std::vector<std::pair<std::string, double>> scores;
    std::map<std::size_t, std::size_t> slot;
    for (std::size_t j = 0; j < feature_map.size(); ++j) {
        const std::size_t col = feature_map[j].column;
        auto [it, fresh] = slot.emplace(col, scores.size());
        if (fresh) scores.emplace_back(table.column(col).name, 0.0);
        scores[it->second].second += weights.w[j];
    }
    std::stable_sort(scores.begin(), scores.end(), [&](const auto& a, const auto& b) {
        return table.index_of(a.first) < table.index_of(b.first);
    });
    return scores;
}

std::string top_weighted_column(const Table& table, const FeatureWeights& weights,
                                const std::vector<Feature>& feature_map,
                                const std::set<std::string, std::less<>>& ignore) {
    std::optional<std::pair<std::string, double>> best;
    for (const auto& score : column_weight_scores(table, weights, feature_map)) {
        if (ignore.contains(score.first)) continue;
        if (!best || score.second > best->second) best = score;
    }
    if (!best) throw InvalidArgument("every weighted column is ignored");
    return best->first;
}

std::vector<Restriction> unit_restriction(const Table& table, const std::string& column,
                                          std::span<const RowId> unit_rows) {
    const std::size_t col = table.index_of(column);
    const ColumnMeta& meta = table.column(col);
    if (meta.kind == ColumnKind::identifier) throw InvalidArgument("identifier columns cannot be restricted");
    if (is_ordered(meta.kind)) {
        std::optional<double> lo;
        std::optional<double> hi;
        for (RowId r : unit_rows) {
            if (table.is_missing(col, r)) continue;
            const double v = table.number(col, r);
            lo = lo ? std::min(*lo, v) : v;
            hi = hi ? std::max(*hi, v) : v;
        }
        if (!lo) throw InvalidArgument("unit has no values in column '" + column + "'");
        return {Restriction{column, RestrictionOp::ge, *lo}, Restriction{column, RestrictionOp::le, *hi}};
    }
    std::map<std::string, std::size_t> counts;
    for (RowId r : unit_rows) {
        if (!table.is_missing(col, r)) ++counts[table.text(col, r)];
    }
    if (counts.empty()) throw InvalidArgument("unit has no values in column '" + column + "'");
    // std::map iterates in lexicographic order, so strict > keeps the smallest on ties.
    auto mode = counts.begin();
    for (auto it = counts.begin(); it != counts.end(); ++it) {
        if (it->second > mode->second) mode = it;
    }
    return {Restriction{column, RestrictionOp::eq, mode->first}};
}

std::vector<ConceptProposal> reassign_and_prune(const Table& table, std::span<const RowId> parent_rows,
                                                const std::vector<UnitRestrictions>& per_unit) {
    std::vector<ConceptProposal> out;
    for (const auto& u : per_unit) {
        RowSet ext = filter_rows(table, parent_rows, u.restrictions);
        if (ext.empty()) continue;
        ConceptProposal p;
        p.column = u.restrictions.empty() ? std::string{} : u.restrictions.front().column;
        p.restrictions = u.restrictions;
        p.extension = std::move(ext);
        p.source_unit = u.unit;
        p.source_cell = u.cell;
        out.push_back(std::move(p));
    }
    return out;
}

double restriction_span(const ConceptProposal& p) {
    std::optional<double> lo;
    std::optional<double> hi;
    double values = 0.0;
    for (const auto& r : p.restrictions) {
        if (r.op == RestrictionOp::gt || r.op == RestrictionOp::ge) lo = std::get<double>(r.value);
        if (r.op == RestrictionOp::lt || r.op == RestrictionOp::le) hi = std::get<double>(r.value);
        if (r.op == RestrictionOp::eq) values += 1.0;
        if (r.op == RestrictionOp::in) values += static_cast<double>(std::get<std::vector<std::string>>(r.value).size());
    }
    if (lo && hi) return *hi - *lo;
    return values;
}

std::vector<ConceptProposal> merge_by_containment(std::vector<ConceptProposal> proposals) {
    std::stable_sort(proposals.begin(), proposals.end(), [](const ConceptProposal& a, const ConceptProposal& b) {
        if (a.extension.size() != b.extension.size()) return a.extension.size() > b.extension.size();
        const double sa = restriction_span(a);
        const double sb = restriction_span(b);
        if (sa != sb) return sa > sb;
        return a.source_unit < b.source_unit;
    });
    // Any superset of a proposal sorts before it, so one pass suffices.
    std::vector<ConceptProposal> kept;
    for (auto& p : proposals) {
        const bool contained = std::any_of(kept.begin(), kept.end(),
                                           [&](const ConceptProposal& q) { return is_subset(p.extension, q.extension); });
        if (!contained) kept.push_back(std::move(p));
    }
    return kept;
}

DiscoveryResult discover(const Table& table, std::span<const RowId> parent_rows, const DiscoveryConfig& config,
                         const ProgressFn& progress) {
    validate(config);
    if (parent_rows.size() < 2) throw InvalidArgument("concept extension is too small for discovery (needs 2 rows)");
    const FeatureMatrix data = encode_for_clustering(table, parent_rows, config.ignore_columns);
    if (data.size() < 2) throw InvalidArgument("concept has fewer than 2 rows without missing values");

    DiscoveryResult result;
    result.encoded_rows = data.rows;
    result.omitted_rows = data.omitted;

    ProgressFn train_progress;
    if (progress) train_progress = [&](double f) { progress(0.9 * f); };
    result.training = train(data, config.train, train_progress);

    const SomMap& map = result.training.map;
    const FeatureWeights& weights = result.training.weights;
    result.column_scores = column_weight_scores(table, weights, data.features);
    result.column = top_weighted_column(table, weights, data.features, config.ignore_columns);

    const auto bmus = assign_bmus(map, weights, data, config.train.distance);
    std::vector<RowSet> members(map.unit_count());
    for (std::size_t i = 0; i < bmus.size(); ++i) members[bmus[i]].push_back(data.rows[i]);

    std::vector<UnitRestrictions> per_unit;
    for (std::size_t u = 0; u < members.size(); ++u) {
        if (members[u].empty()) continue;
        per_unit.push_back({u, map.coords(u), unit_restriction(table, result.column, members[u])});
    }
    result.pre_merge = reassign_and_prune(table, parent_rows, per_unit);
    result.proposals = merge_by_containment(result.pre_merge);
    if (result.proposals.size() > config.max_proposals) result.proposals.resize(config.max_proposals);
    for (std::size_t i = 0; i < result.proposals.size(); ++i) result.proposals[i].id = static_cast<ProposalId>(i);
    if (progress) progress(1.0);
    return result;
}

std::vector<ConceptProposal> propose_subconcepts(const Taxonomy& tax, ConceptId concept_id,
                                                 const DiscoveryConfig& config, const ProgressFn& progress) {
    auto result = discover(tax.table(), tax.extension(concept_id), config, progress);
    for (auto& p : result.proposals) p.parent = concept_id;
    return std::move(result.proposals);
}

std::string proposal_label(const Taxonomy& tax, const ConceptProposal& p) {
    std::string label = tax.get(p.parent).label + "_" + p.column;
    const auto col = tax.table().find(p.column);
    const bool dates = col && tax.table().column(*col).kind == ColumnKind::date;
    auto num = [&](double v) { return dates ? format_date(v) : format_number(v); };
    std::optional<double> lo;
    std::optional<double> hi;
    for (const auto& r : p.restrictions) {
        if (r.op == RestrictionOp::ge || r.op == RestrictionOp::gt) lo = std::get<double>(r.value);
        if (r.op == RestrictionOp::le || r.op == RestrictionOp::lt) hi = std::get<double>(r.value);
        if (r.op == RestrictionOp::eq) label += "=" + std::get<std::string>(r.value);
        if (r.op == RestrictionOp::in) {
            label += "=";
            const auto& values = std::get<std::vector<std::string>>(r.value);
            for (std::size_t i = 0; i < values.size(); ++i) label += (i ? "|" : "") + values[i];
        }
    }
    if (lo || hi) label += "[" + (lo ? num(*lo) : std::string("*")) + "," + (hi ? num(*hi) : std::string("*")) + "]";
    return label;
}

std::optional<ConceptId> resolve_proposal(Taxonomy& tax, ConceptProposal& proposal, bool accept) {
    if (proposal.status != ProposalStatus::pending) {
        throw Conflict("proposal " + std::to_string(proposal.id) + " was already " +
                       std::string(to_string(proposal.status)));
    }
    if (!accept) {
        proposal.status = ProposalStatus::rejected;
        return std::nullopt;
    }
    const ConceptId id = tax.add_restriction_subconcept(proposal.parent, proposal.restrictions,
                                                        proposal_label(tax, proposal));
    proposal.status = ProposalStatus::accepted;
    proposal.concept_id = id;
    proposal.extension = tax.extension(id);
    return id;
}

nlohmann::json to_json(const ConceptProposal& p, const Table& table) {
    nlohmann::json rs = nlohmann::json::array();
    for (const auto& r : p.restrictions) rs.push_back(to_json(r, table));
    nlohmann::json j{{"id", p.id},
                     {"parent", p.parent},
                     {"column", p.column},
                     {"restrictions", std::move(rs)},
                     {"extension_size", p.extension.size()},
                     {"source_unit", p.source_unit},
                     {"source_cell", {p.source_cell.first, p.source_cell.second}},
                     {"status", std::string(to_string(p.status))}};
    j["concept"] = p.concept_id ? nlohmann::json(*p.concept_id) : nlohmann::json(nullptr);
    return j;
}

ConceptProposal proposal_from_json(const nlohmann::json& j, const Table& table) {
    ConceptProposal p;
    p.id = j.at("id").get<ProposalId>();
    p.parent = j.at("parent").get<ConceptId>();
    p.column = j.at("column").get<std::string>();
    for (const auto& r : j.at("restrictions")) p.restrictions.push_back(restriction_from_json(r, table));
    p.source_unit = j.value("source_unit", std::size_t{0});
    if (j.contains("source_cell")) {
        p.source_cell = {j.at("source_cell").at(0).get<std::size_t>(), j.at("source_cell").at(1).get<std::size_t>()};
    }
    const std::string status = j.value("status", "pending");
    p.status = status == "accepted" ? ProposalStatus::accepted
               : status == "rejected" ? ProposalStatus::rejected
                                      : ProposalStatus::pending;
    if (j.contains("concept") && !j.at("concept").is_null()) p.concept_id = j.at("concept").get<ConceptId>();
    return p;
}

}  // namespace tabtax
