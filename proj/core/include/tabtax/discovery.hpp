#pragma once

#include <cstdint>
#include <optional>
#include <set>
#include <string>
#include <utility>
#include <vector>

#include "json.hpp"
#include "tabtax/encoding.hpp"
#include "tabtax/restriction.hpp"
#include "tabtax/taxonomy.hpp"
#include "tabtax/wsom.hpp"

namespace tabtax {

using ProposalId = std::uint32_t;

enum class ProposalStatus { pending, accepted, rejected };

std::string_view to_string(ProposalStatus status);

/// Candidate subconcept: restrictions on a single column plus the parent rows
/// satisfying them.
struct ConceptProposal {
    ProposalId id = 0;
    ConceptId parent = 0;
    std::string column;
    std::vector<Restriction> restrictions;
    RowSet extension;
    std::size_t source_unit = 0;
    std::pair<std::size_t, std::size_t> source_cell{0, 0};
    ProposalStatus status = ProposalStatus::pending;
    std::optional<ConceptId> concept_id;  // set once accepted
};

struct DiscoveryConfig {
    TrainConfig train;
    std::set<std::string, std::less<>> ignore_columns;
    std::size_t max_proposals = 16;
};

void validate(const DiscoveryConfig& config);
nlohmann::json to_json(const DiscoveryConfig& config);
DiscoveryConfig discovery_config_from_json(const nlohmann::json& j, DiscoveryConfig defaults = {});

struct DiscoveryResult {
    std::string column;
    std::vector<std::pair<std::string, double>> column_scores;  // in column order
    std::vector<ConceptProposal> pre_merge;                     // after reassignment and pruning
    std::vector<ConceptProposal> proposals;                     // final, containment-free
    RowSet encoded_rows;
    RowSet omitted_rows;
    TrainResult training;
};

/// Sum of weights per source column; the best non-ignored column wins, ties
/// going to the earlier column.
std::string top_weighted_column(const Table& table, const FeatureWeights& weights,
                                const std::vector<Feature>& feature_map,
                                const std::set<std::string, std::less<>>& ignore = {});

std::vector<std::pair<std::string, double>> column_weight_scores(const Table& table, const FeatureWeights& weights,
                                                                 const std::vector<Feature>& feature_map);

/// [min, max] interval on ordered columns, the most frequent value
/// (lexicographically smallest on ties) on categorical ones.
std::vector<Restriction> unit_restriction(const Table& table, const std::string& column,
                                          std::span<const RowId> unit_rows);

struct UnitRestrictions {
    std::size_t unit = 0;
    std::pair<std::size_t, std::size_t> cell{0, 0};
    std::vector<Restriction> restrictions;
};

/// Each proposal gets every parent row satisfying its restrictions, so
/// extensions may overlap. Empty proposals are dropped.
std::vector<ConceptProposal> reassign_and_prune(const Table& table, std::span<const RowId> parent_rows,
                                                const std::vector<UnitRestrictions>& per_unit);

/// Drops every proposal whose extension is contained in another's. Among
/// equal extensions the widest restriction span survives, then the lowest
/// source unit. Survivors come back largest extension first.
std::vector<ConceptProposal> merge_by_containment(std::vector<ConceptProposal> proposals);

/// Width of the proposal's restriction: interval length, or value count.
double restriction_span(const ConceptProposal& proposal);

/// Full pipeline over a snapshot of rows: encode, train, pick the top
/// column, derive per-unit restrictions, reassign, prune, merge, truncate.
DiscoveryResult discover(const Table& table, std::span<const RowId> parent_rows, const DiscoveryConfig& config,
                         const ProgressFn& progress = {});

std::vector<ConceptProposal> propose_subconcepts(const Taxonomy& tax, ConceptId concept_id,
                                                 const DiscoveryConfig& config, const ProgressFn& progress = {});

std::string proposal_label(const Taxonomy& tax, const ConceptProposal& proposal);

/// Accepting adds the proposal as a restriction subconcept of its parent
/// (re-evaluated against the parent's current extension). Throws Conflict
/// when the proposal was already resolved.
std::optional<ConceptId> resolve_proposal(Taxonomy& tax, ConceptProposal& proposal, bool accept);

nlohmann::json to_json(const ConceptProposal& proposal, const Table& table);
ConceptProposal proposal_from_json(const nlohmann::json& j, const Table& table);

}  // namespace tabtax
