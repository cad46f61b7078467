#pragma once

#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"
#include "tabtax/discovery.hpp"
#include "tabtax/taxonomy.hpp"

namespace tabtax {

/// A table plus its taxonomy, mutated only through JSON commands so that
/// every change lands in the event log. Replaying the log against the table
/// the workspace started from rebuilds the same taxonomy.
///
/// Logged commands:
///   create_root {label}
///   add_restriction {parent, restrictions, label}
///   combine {kind, concepts, label, reference_parent?}
///   merge {concepts, label}
///   find_intersections {concepts}
///   relabel {concept, label}
///   delete {concept}
///   set_column {column, kind?, included?}
/// Concept references may be ids or labels; the log stores ids.
class Workspace {
public:
    explicit Workspace(std::shared_ptr<const Table> table, std::string root_label = {});

    const Table& table() const noexcept { return *table_; }
    std::shared_ptr<const Table> table_ptr() const noexcept { return table_; }
    std::shared_ptr<const Table> initial_table() const noexcept { return initial_; }
    const Taxonomy& taxonomy() const noexcept { return tax_; }
    const nlohmann::json& log() const noexcept { return log_; }

    /// Validates and applies one command. Nothing changes when it throws.
    /// Returns {"concept": id}, {"concepts": [...]} or {}.
    nlohmann::json apply(const nlohmann::json& command);

    /// Adds the proposal under its parent and logs it as add_restriction.
    std::optional<ConceptId> resolve(ConceptProposal& proposal, bool accept);

    ConceptId resolve_ref(const nlohmann::json& ref) const;

    static Workspace replay(std::shared_ptr<const Table> initial, const nlohmann::json& log,
                            std::string root_label = {});

private:
    nlohmann::json apply_to(Taxonomy& tax, std::shared_ptr<const Table>& table, const nlohmann::json& cmd,
                            nlohmann::json& logged) const;

    std::shared_ptr<const Table> initial_;
    std::shared_ptr<const Table> table_;
    Taxonomy tax_;
    nlohmann::json log_ = nlohmann::json::array();
};

bool is_mutation_op(std::string_view op);

/// "<parent>_<restrictions>" with whitespace removed.
std::string default_restriction_label(const Taxonomy& tax, ConceptId parent,
                                      const std::vector<Restriction>& restrictions);

}  // namespace tabtax
