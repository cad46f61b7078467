#pragma once

#include <cstdint>
#include <map>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "json.hpp"
#include "tabtax/restriction.hpp"
#include "tabtax/rowset.hpp"
#include "tabtax/table.hpp"

namespace tabtax {

using ConceptId = std::uint32_t;

struct RootExpr {
    friend bool operator==(const RootExpr&, const RootExpr&) = default;
};

/// Rows of `parent` satisfying every restriction.
struct RestrictExpr {
    ConceptId parent = 0;
    std::vector<Restriction> restrictions;
    friend bool operator==(const RestrictExpr&, const RestrictExpr&) = default;
};

struct UnionExpr {
    std::vector<ConceptId> operands;
    friend bool operator==(const UnionExpr&, const UnionExpr&) = default;
};

struct IntersectionExpr {
    std::vector<ConceptId> operands;
    friend bool operator==(const IntersectionExpr&, const IntersectionExpr&) = default;
};

/// Rows of `parent` outside every excluded concept.
struct ComplementExpr {
    ConceptId parent = 0;
    std::vector<ConceptId> excluded;
    friend bool operator==(const ComplementExpr&, const ComplementExpr&) = default;
};

using ConceptExpr = std::variant<RootExpr, RestrictExpr, UnionExpr, IntersectionExpr, ComplementExpr>;

/// Concepts an expression reads its extension from.
std::vector<ConceptId> referenced_concepts(const ConceptExpr& expr);

enum class CombineKind { union_of, intersection, complement };

CombineKind parse_combine_kind(std::string_view text);
std::string_view to_string(CombineKind kind);

struct Concept {
    ConceptId id = 0;
    std::string label;
    ConceptExpr expr;
    std::vector<ConceptId> parents;   // sorted
    std::vector<ConceptId> children;  // sorted
    RowSet extension;
    bool empty_warning = false;  // set when a restriction produced an empty extension
};

/// Single-rooted DAG of concepts over one table. Extensions are materialized
/// on every mutation; concepts depending on a changed concept are recomputed
/// in topological order.
class Taxonomy {
public:
    /// Creates the root concept whose extension is every row. The label
    /// defaults to the table name.
    explicit Taxonomy(std::shared_ptr<const Table> table, std::string root_label = {});

    const Table& table() const noexcept { return *table_; }
    std::shared_ptr<const Table> table_ptr() const noexcept { return table_; }

    ConceptId root() const noexcept { return root_; }
    std::size_t size() const noexcept { return concepts_.size(); }
    bool contains(ConceptId id) const { return concepts_.contains(id); }
    const Concept& get(ConceptId id) const;
    std::vector<ConceptId> ids() const;
    ConceptId next_id() const noexcept { return next_id_; }

    const RowSet& extension(ConceptId id) const { return get(id).extension; }

    /// Throws NotFound if absent, InvalidArgument if ambiguous.
    ConceptId find_by_label(std::string_view label) const;

    /// Proper ancestors along parent edges, ascending.
    std::vector<ConceptId> ancestors(ConceptId id) const;
    /// Concepts whose expression references `id`.
    std::vector<ConceptId> dependents(ConceptId id) const;

    ConceptId add_restriction_subconcept(ConceptId parent, std::vector<Restriction> restrictions, std::string label);

    /// Union and intersection take at least two concepts and become their
    /// child. A complement is taken under `reference_parent`, or under the
    /// unique nearest common ancestor of `ids` when none is given.
    ConceptId combine(std::span<const ConceptId> ids, CombineKind kind, std::string label,
                      std::optional<ConceptId> reference_parent = std::nullopt);

    /// Replaces restriction-defined siblings over the same columns by one
    /// concept whose restrictions cover theirs (interval hull for ordered
    /// columns, value-set union for categorical ones). Children and other
    /// dependents of the replaced concepts are re-pointed to the new concept.
    ConceptId merge_concepts(std::span<const ConceptId> ids, std::string label);

    /// One intersection concept per unordered pair with overlapping
    /// extensions, labeled "<A>_and_<B>".
    std::vector<ConceptId> find_intersections(std::span<const ConceptId> ids);

    void relabel(ConceptId id, std::string label);

    /// Only concepts without children or other dependents can be deleted.
    void delete_concept(ConceptId id);

    /// Re-evaluates every concept against a re-typed table. Throws (leaving
    /// this taxonomy untouched) if a restriction no longer type-checks.
    void rebind(std::shared_ptr<const Table> table);

    /// True when parent edges and expression references form a DAG reachable
    /// from the root.
    bool check_invariants() const;

    nlohmann::json to_json() const;
    static Taxonomy from_json(std::shared_ptr<const Table> table, const nlohmann::json& doc);

private:
    Taxonomy() = default;

    Concept& mut(ConceptId id);
    RowSet evaluate(const ConceptExpr& expr) const;
    ConceptId insert(ConceptExpr expr, std::vector<ConceptId> parents, std::string label);
    std::vector<ConceptId> topological_order() const;
    void recompute(std::span<const ConceptId> changed);
    void validate_expr(const ConceptExpr& expr, ConceptId self) const;

    std::shared_ptr<const Table> table_;
    std::map<ConceptId, Concept> concepts_;
    ConceptId root_ = 0;
    ConceptId next_id_ = 0;
};

nlohmann::json expr_to_json(const ConceptExpr& expr, const Table& table);
ConceptExpr expr_from_json(const nlohmann::json& j, const Table& table);

/// Human-readable intension, e.g. "Iris and PetalLength < 4.4".
std::string describe_intension(const Taxonomy& tax, ConceptId id);

}  // namespace tabtax
