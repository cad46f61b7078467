#include "tabtax/commands.hpp"

#include <algorithm>
#include <cctype>

#include "tabtax/error.hpp"

namespace tabtax {
namespace {

using nlohmann::json;

const json& field(const json& cmd, const char* key) {
    if (!cmd.contains(key)) throw InvalidArgument(std::string("command is missing '") + key + "'");
    return cmd.at(key);
}

std::string string_field(const json& cmd, const char* key) {
    const json& v = field(cmd, key);
    if (!v.is_string()) throw InvalidArgument(std::string("'") + key + "' must be a string");
    return v.get<std::string>();
}

std::optional<std::string> optional_label(const json& cmd) {
    if (!cmd.contains("label") || cmd.at("label").is_null()) return std::nullopt;
    if (!cmd.at("label").is_string()) throw InvalidArgument("'label' must be a string");
    return cmd.at("label").get<std::string>();
}

ConceptId ref_in(const Taxonomy& tax, const json& ref) {
    if (ref.is_number_unsigned() || ref.is_number_integer()) {
        const auto v = ref.get<long long>();
        if (v < 0 || !tax.contains(static_cast<ConceptId>(v))) {
            throw NotFound("unknown concept " + std::to_string(v));
        }
        return static_cast<ConceptId>(v);
    }
    if (ref.is_string()) return tax.find_by_label(ref.get<std::string>());
    throw InvalidArgument("concept reference must be an id or a label");
}

std::vector<ConceptId> refs_in(const Taxonomy& tax, const json& list) {
    if (!list.is_array()) throw InvalidArgument("'concepts' must be an array");
    std::vector<ConceptId> ids;
    for (const auto& r : list) ids.push_back(ref_in(tax, r));
    return ids;
}

std::string join_labels(const Taxonomy& tax, const std::vector<ConceptId>& ids, std::string_view sep) {
    std::string out;
    for (std::size_t i = 0; i < ids.size(); ++i) out += (i ? std::string(sep) : std::string()) + tax.get(ids[i]).label;
    return out;
}

}  // namespace

bool is_mutation_op(std::string_view op) {
    return op == "create_root" || op == "add_restriction" || op == "combine" || op == "merge" ||
           op == "find_intersections" || op == "relabel" || op == "delete" || op == "set_column";
}

std::string default_restriction_label(const Taxonomy& tax, ConceptId parent,
                                      const std::vector<Restriction>& restrictions) {
    std::string label = tax.get(parent).label;
    for (const auto& r : restrictions) {
        label += "_";
        for (const char c : describe(r, tax.table())) {
            if (!std::isspace(static_cast<unsigned char>(c))) label += c;
        }
    }
    return label;
}

Workspace::Workspace(std::shared_ptr<const Table> table, std::string root_label)
    : initial_(table), table_(table), tax_(table, std::move(root_label)) {}

ConceptId Workspace::resolve_ref(const json& ref) const { return ref_in(tax_, ref); }

json Workspace::apply(const json& command) {
    Taxonomy next = tax_;
    std::shared_ptr<const Table> table = table_;
    json logged;
    json result;
    try {
        result = apply_to(next, table, command, logged);
    } catch (const json::exception& e) {
        throw InvalidArgument(std::string("bad command payload: ") + e.what());
    }
    tax_ = std::move(next);
    table_ = std::move(table);
    log_.push_back(std::move(logged));
    return result;
}

json Workspace::apply_to(Taxonomy& tax, std::shared_ptr<const Table>& table, const json& cmd, json& logged) const {
    if (!cmd.is_object()) throw InvalidArgument("command must be an object");
    const std::string op = string_field(cmd, "op");
    logged = json{{"op", op}};

    if (op == "create_root") {
        if (tax.size() != 1) throw Conflict("create_root needs a taxonomy holding only the root");
        const std::string label = optional_label(cmd).value_or(std::string{});
        tax = Taxonomy(table, label);
        logged["label"] = tax.get(tax.root()).label;
        return {{"concept", tax.root()}};
    }
    if (op == "add_restriction") {
        const ConceptId parent = ref_in(tax, field(cmd, "parent"));
        const json& list = field(cmd, "restrictions");
        std::vector<Restriction> restrictions;
        if (list.is_object()) {
            restrictions.push_back(restriction_from_json(list, *table));
        } else if (list.is_array()) {
            for (const auto& r : list) restrictions.push_back(restriction_from_json(r, *table));
        } else {
            throw InvalidArgument("'restrictions' must be an array");
        }
        const std::string label =
            optional_label(cmd).value_or(default_restriction_label(tax, parent, restrictions));
        const ConceptId id = tax.add_restriction_subconcept(parent, restrictions, label);
        json rs = json::array();
        for (const auto& r : restrictions) rs.push_back(to_json(r, *table));
        logged["parent"] = parent;
        logged["restrictions"] = std::move(rs);
        logged["label"] = label;
        return {{"concept", id}, {"empty_warning", tax.get(id).empty_warning}};
    }
    if (op == "combine") {
        const CombineKind kind = parse_combine_kind(string_field(cmd, "kind"));
        const auto ids = refs_in(tax, field(cmd, "concepts"));
        std::optional<ConceptId> reference;
        if (cmd.contains("reference_parent") && !cmd.at("reference_parent").is_null()) {
            reference = ref_in(tax, cmd.at("reference_parent"));
        }
        std::string label;
        if (auto l = optional_label(cmd)) {
            label = *l;
        } else if (kind == CombineKind::union_of) {
            label = join_labels(tax, ids, "_or_");
        } else if (kind == CombineKind::intersection) {
            label = join_labels(tax, ids, "_and_");
        } else {
            label = "not_" + join_labels(tax, ids, "_or_");
        }
        const ConceptId id = tax.combine(ids, kind, label, reference);
        logged["kind"] = std::string(to_string(kind));
        logged["concepts"] = ids;
        logged["label"] = label;
        if (kind == CombineKind::complement) logged["reference_parent"] = tax.get(id).parents.front();
        return {{"concept", id}};
    }
    if (op == "merge") {
        const auto ids = refs_in(tax, field(cmd, "concepts"));
        const std::string label = optional_label(cmd).value_or(join_labels(tax, ids, "+"));
        const ConceptId id = tax.merge_concepts(ids, label);
        logged["concepts"] = ids;
        logged["label"] = label;
        return {{"concept", id}};
    }
    if (op == "find_intersections") {
        const auto ids = refs_in(tax, field(cmd, "concepts"));
        if (ids.size() < 2) throw InvalidArgument("find_intersections needs at least two concepts");
        const auto created = tax.find_intersections(ids);
        logged["concepts"] = ids;
        return {{"concepts", created}};
    }
    if (op == "relabel") {
        const ConceptId id = ref_in(tax, field(cmd, "concept"));
        const std::string label = string_field(cmd, "label");
        tax.relabel(id, label);
        logged["concept"] = id;
        logged["label"] = label;
        return json::object();
    }
    if (op == "delete") {
        const ConceptId id = ref_in(tax, field(cmd, "concept"));
        tax.delete_concept(id);
        logged["concept"] = id;
        return json::object();
    }
    if (op == "set_column") {
        const std::string column = string_field(cmd, "column");
        auto next = std::make_shared<Table>(*table);
        const std::size_t col = next->index_of(column);
        logged["column"] = column;
        if (cmd.contains("kind")) {
            const ColumnKind kind = parse_column_kind(string_field(cmd, "kind"));
            next->set_kind(col, kind);
            logged["kind"] = std::string(to_string(kind));
        }
        if (cmd.contains("included")) {
            if (!cmd.at("included").is_boolean()) throw InvalidArgument("'included' must be a boolean");
            next->set_included(col, cmd.at("included").get<bool>());
            logged["included"] = cmd.at("included").get<bool>();
        }
        tax.rebind(next);
        table = std::move(next);
        return json::object();
    }
    throw InvalidArgument("unknown command '" + op + "'");
}

std::optional<ConceptId> Workspace::resolve(ConceptProposal& proposal, bool accept) {
    if (proposal.status != ProposalStatus::pending) {
        throw Conflict("proposal " + std::to_string(proposal.id) + " was already " +
                       std::string(to_string(proposal.status)));
    }
    if (!accept) {
        proposal.status = ProposalStatus::rejected;
        return std::nullopt;
    }
    if (!tax_.contains(proposal.parent)) throw NotFound("parent concept " + std::to_string(proposal.parent) + " is gone");
    json rs = json::array();
    for (const auto& r : proposal.restrictions) rs.push_back(to_json(r, *table_));
    const json result = apply({{"op", "add_restriction"},
                               {"parent", proposal.parent},
                               {"restrictions", std::move(rs)},
                               {"label", proposal_label(tax_, proposal)}});
    const auto id = result.at("concept").get<ConceptId>();
    proposal.status = ProposalStatus::accepted;
    proposal.concept_id = id;
    proposal.extension = tax_.extension(id);
    return id;
}

Workspace Workspace::replay(std::shared_ptr<const Table> initial, const json& log, std::string root_label) {
    if (!log.is_array()) throw InvalidArgument("log must be an array");
    Workspace ws(std::move(initial), std::move(root_label));
    for (std::size_t i = 0; i < log.size(); ++i) {
        try {
            ws.apply(log[i]);
        } catch (const Error& e) {
            throw Error(e.category(), "log entry " + std::to_string(i) + ": " + e.what());
        }
    }
    return ws;
}

}  // namespace tabtax
