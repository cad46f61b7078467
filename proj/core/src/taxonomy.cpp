#include "tabtax/taxonomy.hpp"

#include <algorithm>
#include <array>
#include <deque>
#include <limits>
#include <set>

#include "tabtax/error.hpp"

namespace tabtax {

namespace {

template <class... Ts>
struct overloaded : Ts... {
    using Ts::operator()...;
};
template <class... Ts>
overloaded(Ts...) -> overloaded<Ts...>;

std::vector<ConceptId> parents_of(const ConceptExpr& expr) {
    std::vector<ConceptId> out = std::visit(
        overloaded{
            [](const RootExpr&) { return std::vector<ConceptId>{}; },
            [](const RestrictExpr& e) { return std::vector<ConceptId>{e.parent}; },
            [](const UnionExpr& e) { return e.operands; },
            [](const IntersectionExpr& e) { return e.operands; },
            [](const ComplementExpr& e) { return std::vector<ConceptId>{e.parent}; },
        },
        expr);
    std::sort(out.begin(), out.end());
    out.erase(std::unique(out.begin(), out.end()), out.end());
    return out;
}

void sorted_insert(std::vector<ConceptId>& v, ConceptId id) {
    auto it = std::lower_bound(v.begin(), v.end(), id);
    if (it == v.end() || *it != id) v.insert(it, id);
}

void sorted_erase(std::vector<ConceptId>& v, ConceptId id) {
    auto it = std::lower_bound(v.begin(), v.end(), id);
    if (it != v.end() && *it == id) v.erase(it);
}

void require_distinct(std::span<const ConceptId> ids) {
    std::set<ConceptId> seen(ids.begin(), ids.end());
    if (seen.size() != ids.size()) throw InvalidArgument("concept ids must be distinct");
}

// Replaces every occurrence of an id in `from` by `to`, keeping first
// occurrences only.
std::vector<ConceptId> substitute(const std::vector<ConceptId>& ids, const std::set<ConceptId>& from, ConceptId to) {
    std::vector<ConceptId> out;
    for (ConceptId id : ids) {
        const ConceptId mapped = from.contains(id) ? to : id;
        if (std::find(out.begin(), out.end(), mapped) == out.end()) out.push_back(mapped);
    }
    return out;
}

ConceptExpr substitute(const ConceptExpr& expr, const std::set<ConceptId>& from, ConceptId to) {
    auto map_one = [&](ConceptId id) { return from.contains(id) ? to : id; };
    return std::visit(
        overloaded{
            [](const RootExpr& e) -> ConceptExpr { return e; },
            [&](const RestrictExpr& e) -> ConceptExpr { return RestrictExpr{map_one(e.parent), e.restrictions}; },
            [&](const UnionExpr& e) -> ConceptExpr { return UnionExpr{substitute(e.operands, from, to)}; },
            [&](const IntersectionExpr& e) -> ConceptExpr {
                return IntersectionExpr{substitute(e.operands, from, to)};
            },
            [&](const ComplementExpr& e) -> ConceptExpr {
                return ComplementExpr{map_one(e.parent), substitute(e.excluded, from, to)};
            },
        },
        expr);
}

struct Bound {
    double value;
    bool inclusive;
};

// Tightest bounds of one concept on one ordered column.
struct Interval {
    std::optional<Bound> lower;
    std::optional<Bound> upper;
};

Interval interval_of(const std::vector<Restriction>& restrictions, const std::string& column) {
    Interval iv;
    for (const auto& r : restrictions) {
        if (r.column != column) continue;
        const double v = std::get<double>(r.value);
        if (r.op == RestrictionOp::gt || r.op == RestrictionOp::ge) {
            const Bound b{v, r.op == RestrictionOp::ge};
            if (!iv.lower || v > iv.lower->value || (v == iv.lower->value && !b.inclusive)) iv.lower = b;
        } else {
            const Bound b{v, r.op == RestrictionOp::le};
            if (!iv.upper || v < iv.upper->value || (v == iv.upper->value && !b.inclusive)) iv.upper = b;
        }
    }
    return iv;
}

std::set<std::string> values_of(const std::vector<Restriction>& restrictions, const std::string& column) {
    std::optional<std::set<std::string>> acc;
    for (const auto& r : restrictions) {
        if (r.column != column) continue;
        std::set<std::string> vals;
        if (r.op == RestrictionOp::eq) {
            vals.insert(std::get<std::string>(r.value));
        } else {
            const auto& v = std::get<std::vector<std::string>>(r.value);
            vals.insert(v.begin(), v.end());
        }
        if (!acc) {
            acc = std::move(vals);
        } else {
            std::set<std::string> both;
            std::set_intersection(acc->begin(), acc->end(), vals.begin(), vals.end(),
                                  std::inserter(both, both.begin()));
            acc = std::move(both);
        }
    }
    return acc.value_or(std::set<std::string>{});
}

}  // namespace

std::vector<ConceptId> referenced_concepts(const ConceptExpr& expr) {
    if (const auto* c = std::get_if<ComplementExpr>(&expr)) {
        std::vector<ConceptId> out{c->parent};
        out.insert(out.end(), c->excluded.begin(), c->excluded.end());
        std::sort(out.begin(), out.end());
        out.erase(std::unique(out.begin(), out.end()), out.end());
        return out;
    }
    return parents_of(expr);
}

CombineKind parse_combine_kind(std::string_view text) {
    if (text == "union") return CombineKind::union_of;
    if (text == "intersection") return CombineKind::intersection;
    if (text == "complement") return CombineKind::complement;
    throw InvalidArgument("unknown combination kind '" + std::string(text) + "'");
}

std::string_view to_string(CombineKind kind) {
    switch (kind) {
        case CombineKind::union_of: return "union";
        case CombineKind::intersection: return "intersection";
        case CombineKind::complement: return "complement";
    }
    return "union";
}

Taxonomy::Taxonomy(std::shared_ptr<const Table> table, std::string root_label) : table_(std::move(table)) {
    if (!table_) throw InvalidArgument("taxonomy needs a table");
    if (root_label.empty()) root_label = table_->name().empty() ? "Root" : table_->name();
    root_ = insert(RootExpr{}, {}, std::move(root_label));
}

const Concept& Taxonomy::get(ConceptId id) const {
    auto it = concepts_.find(id);
    if (it == concepts_.end()) throw NotFound("unknown concept " + std::to_string(id));
    return it->second;
}

Concept& Taxonomy::mut(ConceptId id) {
    auto it = concepts_.find(id);
    if (it == concepts_.end()) throw NotFound("unknown concept " + std::to_string(id));
    return it->second;
}

std::vector<ConceptId> Taxonomy::ids() const {
    std::vector<ConceptId> out;
    out.reserve(concepts_.size());
    for (const auto& [id, c] : concepts_) out.push_back(id);
    return out;
}

ConceptId Taxonomy::find_by_label(std::string_view label) const {
    std::optional<ConceptId> found;
    for (const auto& [id, c] : concepts_) {
        if (c.label != label) continue;
        if (found) throw InvalidArgument("label '" + std::string(label) + "' is ambiguous");
        found = id;
    }
    if (!found) throw NotFound("no concept labeled '" + std::string(label) + "'");
    return *found;
}

std::vector<ConceptId> Taxonomy::ancestors(ConceptId id) const {
    std::set<ConceptId> seen;
    std::deque<ConceptId> queue(get(id).parents.begin(), get(id).parents.end());
    while (!queue.empty()) {
        const ConceptId c = queue.front();
        queue.pop_front();
        if (!seen.insert(c).second) continue;
        for (ConceptId p : get(c).parents) queue.push_back(p);
    }
    return {seen.begin(), seen.end()};
}

std::vector<ConceptId> Taxonomy::dependents(ConceptId id) const {
    std::vector<ConceptId> out;
    for (const auto& [cid, c] : concepts_) {
        const auto refs = referenced_concepts(c.expr);
        if (std::binary_search(refs.begin(), refs.end(), id)) out.push_back(cid);
    }
    return out;
}

RowSet Taxonomy::evaluate(const ConceptExpr& expr) const {
    return std::visit(
        overloaded{
            [&](const RootExpr&) { return all_rows(table_->row_count()); },
            [&](const RestrictExpr& e) { return filter_rows(*table_, extension(e.parent), e.restrictions); },
            [&](const UnionExpr& e) {
                RowSet acc = extension(e.operands.front());
                for (std::size_t i = 1; i < e.operands.size(); ++i) acc = set_union(acc, extension(e.operands[i]));
                return acc;
            },
            [&](const IntersectionExpr& e) {
                RowSet acc = extension(e.operands.front());
                for (std::size_t i = 1; i < e.operands.size(); ++i) {
                    acc = set_intersection(acc, extension(e.operands[i]));
                }
                return acc;
            },
            [&](const ComplementExpr& e) {
                RowSet removed;
                for (ConceptId x : e.excluded) removed = set_union(removed, extension(x));
                return set_difference(extension(e.parent), removed);
            },
        },
        expr);
}

void Taxonomy::validate_expr(const ConceptExpr& expr, ConceptId self) const {
    for (ConceptId ref : referenced_concepts(expr)) {
        if (ref == self) throw InvalidArgument("a concept cannot reference itself");
        get(ref);
    }
    std::visit(overloaded{
                   [](const RootExpr&) {},
                   [&](const RestrictExpr& e) {
                       if (e.restrictions.empty()) throw InvalidArgument("a subconcept needs at least one restriction");
                       for (const auto& r : e.restrictions) validate(r, *table_);
                   },
                   [](const UnionExpr& e) {
                       if (e.operands.size() < 2) throw InvalidArgument("union needs at least two concepts");
                       require_distinct(e.operands);
                   },
                   [](const IntersectionExpr& e) {
                       if (e.operands.size() < 2) throw InvalidArgument("intersection needs at least two concepts");
                       require_distinct(e.operands);
                   },
                   [&](const ComplementExpr& e) {
                       if (e.excluded.empty()) throw InvalidArgument("complement needs at least one concept");
                       require_distinct(e.excluded);
                       for (ConceptId x : e.excluded) {
                           const auto anc = ancestors(x);
                           if (!std::binary_search(anc.begin(), anc.end(), e.parent)) {
                               throw InvalidArgument("complement reference " + std::to_string(e.parent) +
                                                     " is not an ancestor of concept " + std::to_string(x));
                           }
                       }
                   },
               },
               expr);
}

ConceptId Taxonomy::insert(ConceptExpr expr, std::vector<ConceptId> parents, std::string label) {
    if (next_id_ == std::numeric_limits<ConceptId>::max()) throw Conflict("concept id space exhausted");
    validate_expr(expr, next_id_);
    Concept c;
    c.id = next_id_++;
    c.label = std::move(label);
    c.extension = evaluate(expr);
    c.empty_warning = std::holds_alternative<RestrictExpr>(expr) && c.extension.empty();
    c.expr = std::move(expr);
    std::sort(parents.begin(), parents.end());
    parents.erase(std::unique(parents.begin(), parents.end()), parents.end());
    c.parents = std::move(parents);
    for (ConceptId p : c.parents) sorted_insert(mut(p).children, c.id);
    const ConceptId id = c.id;
    concepts_.emplace(id, std::move(c));
    return id;
}

ConceptId Taxonomy::add_restriction_subconcept(ConceptId parent, std::vector<Restriction> restrictions,
                                               std::string label) {
    get(parent);
    return insert(RestrictExpr{parent, std::move(restrictions)}, {parent}, std::move(label));
}

ConceptId Taxonomy::combine(std::span<const ConceptId> ids, CombineKind kind, std::string label,
                            std::optional<ConceptId> reference_parent) {
    for (ConceptId id : ids) get(id);
    require_distinct(ids);
    const std::vector<ConceptId> operands(ids.begin(), ids.end());

    if (kind == CombineKind::union_of) return insert(UnionExpr{operands}, operands, std::move(label));
    if (kind == CombineKind::intersection) return insert(IntersectionExpr{operands}, operands, std::move(label));

    if (operands.empty()) throw InvalidArgument("complement needs at least one concept");
    std::vector<ConceptId> common = ancestors(operands.front());
    for (std::size_t i = 1; i < operands.size(); ++i) common = set_intersection(common, ancestors(operands[i]));

    ConceptId parent = 0;
    if (reference_parent) {
        get(*reference_parent);
        if (!std::binary_search(common.begin(), common.end(), *reference_parent)) {
            throw InvalidArgument("concept " + std::to_string(*reference_parent) +
                                  " is not a common ancestor of the selected concepts");
        }
        parent = *reference_parent;
    } else {
        if (common.empty()) throw InvalidArgument("complement needs concepts sharing a parent concept");
        std::vector<ConceptId> nearest;
        for (ConceptId c : common) {
            const bool shadowed = std::any_of(common.begin(), common.end(), [&](ConceptId d) {
                if (d == c) return false;
                const auto anc = ancestors(d);
                return std::binary_search(anc.begin(), anc.end(), c);
            });
            if (!shadowed) nearest.push_back(c);
        }
        if (nearest.size() != 1) {
            throw InvalidArgument("the selected concepts have several nearest common ancestors; designate one");
        }
        parent = nearest.front();
    }
    return insert(ComplementExpr{parent, operands}, {parent}, std::move(label));
}

ConceptId Taxonomy::merge_concepts(std::span<const ConceptId> ids, std::string label) {
    if (ids.empty()) throw InvalidArgument("merge needs at least one concept");
    require_distinct(ids);
    std::vector<const RestrictExpr*> exprs;
    for (ConceptId id : ids) {
        const auto* e = std::get_if<RestrictExpr>(&get(id).expr);
        if (e == nullptr) throw InvalidArgument("concept " + std::to_string(id) + " is not defined by restrictions");
        exprs.push_back(e);
    }
    const ConceptId parent = exprs.front()->parent;
    auto columns_of = [](const RestrictExpr& e) {
        std::vector<std::string> cols;
        for (const auto& r : e.restrictions) {
            if (std::find(cols.begin(), cols.end(), r.column) == cols.end()) cols.push_back(r.column);
        }
        return cols;
    };
    const std::vector<std::string> columns = columns_of(*exprs.front());
    const std::set<std::string> column_set(columns.begin(), columns.end());
    for (const auto* e : exprs) {
        if (e->parent != parent) throw InvalidArgument("merged concepts must share the same parent");
        const auto cols = columns_of(*e);
        if (std::set<std::string>(cols.begin(), cols.end()) != column_set) {
            throw InvalidArgument("merged concepts must restrict the same columns");
        }
    }

    std::vector<Restriction> merged;
    if (exprs.size() == 1) {
        merged = exprs.front()->restrictions;
    } else {
        for (const auto& column : columns) {
            const ColumnKind kind = table_->column(table_->index_of(column)).kind;
            if (is_ordered(kind)) {
                Interval hull = interval_of(exprs.front()->restrictions, column);
                for (std::size_t i = 1; i < exprs.size(); ++i) {
                    const Interval iv = interval_of(exprs[i]->restrictions, column);
                    if (!hull.lower || !iv.lower) {
                        hull.lower.reset();
                    } else if (iv.lower->value < hull.lower->value ||
                               (iv.lower->value == hull.lower->value && iv.lower->inclusive)) {
                        hull.lower = iv.lower;
                    }
                    if (!hull.upper || !iv.upper) {
                        hull.upper.reset();
                    } else if (iv.upper->value > hull.upper->value ||
                               (iv.upper->value == hull.upper->value && iv.upper->inclusive)) {
                        hull.upper = iv.upper;
                    }
                }
                if (hull.lower) {
                    merged.push_back({column, hull.lower->inclusive ? RestrictionOp::ge : RestrictionOp::gt,
                                      hull.lower->value});
                }
                if (hull.upper) {
                    merged.push_back({column, hull.upper->inclusive ? RestrictionOp::le : RestrictionOp::lt,
                                      hull.upper->value});
                }
            } else {
                std::set<std::string> all;
                for (const auto* e : exprs) {
                    const auto vals = values_of(e->restrictions, column);
                    all.insert(vals.begin(), vals.end());
                }
                if (all.empty()) continue;
                if (all.size() == 1) {
                    merged.push_back({column, RestrictionOp::eq, *all.begin()});
                } else {
                    merged.push_back({column, RestrictionOp::in, std::vector<std::string>(all.begin(), all.end())});
                }
            }
        }
    }
    if (merged.empty()) {
        throw InvalidArgument("the merged restrictions would not restrict the parent concept at all");
    }

    const std::set<ConceptId> replaced(ids.begin(), ids.end());
    const ConceptId placeholder = next_id_;

    // Re-pointed dependents must remain well formed before anything changes.
    std::vector<std::pair<ConceptId, ConceptExpr>> rewired;
    for (const auto& [cid, c] : concepts_) {
        if (replaced.contains(cid)) continue;
        const auto refs = referenced_concepts(c.expr);
        if (std::none_of(refs.begin(), refs.end(), [&](ConceptId r) { return replaced.contains(r); })) continue;
        ConceptExpr e = substitute(c.expr, replaced, placeholder);
        if (const auto* u = std::get_if<UnionExpr>(&e); u && u->operands.size() < 2) {
            throw Conflict("merge would collapse union concept " + std::to_string(cid) + " to a single operand");
        }
        if (const auto* x = std::get_if<IntersectionExpr>(&e); x && x->operands.size() < 2) {
            throw Conflict("merge would collapse intersection concept " + std::to_string(cid) +
                           " to a single operand");
        }
        rewired.emplace_back(cid, std::move(e));
    }

    const ConceptId merged_id = insert(RestrictExpr{parent, std::move(merged)}, {parent}, std::move(label));
    for (auto& [cid, e] : rewired) {
        Concept& c = mut(cid);
        c.expr = std::move(e);
        for (ConceptId old : c.parents) {
            if (replaced.contains(old)) sorted_erase(mut(old).children, cid);
        }
        c.parents = parents_of(c.expr);
        for (ConceptId p : c.parents) sorted_insert(mut(p).children, cid);
    }
    for (ConceptId old : replaced) {
        for (ConceptId p : get(old).parents) sorted_erase(mut(p).children, old);
        concepts_.erase(old);
    }
    const std::vector<ConceptId> changed{merged_id};
    recompute(changed);
    return merged_id;
}

std::vector<ConceptId> Taxonomy::find_intersections(std::span<const ConceptId> ids) {
    if (ids.size() < 2) throw InvalidArgument("find-intersections needs at least two concepts");
    for (ConceptId id : ids) get(id);
    require_distinct(ids);
    std::vector<ConceptId> created;
    for (std::size_t i = 0; i < ids.size(); ++i) {
        for (std::size_t j = i + 1; j < ids.size(); ++j) {
            if (!intersects(extension(ids[i]), extension(ids[j]))) continue;
            const std::array<ConceptId, 2> pair{ids[i], ids[j]};
            created.push_back(
                combine(pair, CombineKind::intersection, get(ids[i]).label + "_and_" + get(ids[j]).label));
        }
    }
    return created;
}

void Taxonomy::relabel(ConceptId id, std::string label) { mut(id).label = std::move(label); }

void Taxonomy::delete_concept(ConceptId id) {
    const Concept& c = get(id);
    if (id == root_) throw InvalidArgument("the root concept cannot be deleted");
    if (!c.children.empty()) throw InvalidArgument("concept " + std::to_string(id) + " has subconcepts");
    if (!dependents(id).empty()) {
        throw InvalidArgument("concept " + std::to_string(id) + " is used in another concept's definition");
    }
    for (ConceptId p : c.parents) sorted_erase(mut(p).children, id);
    concepts_.erase(id);
}

std::vector<ConceptId> Taxonomy::topological_order() const {
    std::map<ConceptId, std::size_t> indegree;
    std::map<ConceptId, std::vector<ConceptId>> users;
    for (const auto& [id, c] : concepts_) {
        const auto refs = referenced_concepts(c.expr);
        indegree[id] = refs.size();
        for (ConceptId r : refs) users[r].push_back(id);
    }
    std::set<ConceptId> ready;
    for (const auto& [id, d] : indegree) {
        if (d == 0) ready.insert(id);
    }
    std::vector<ConceptId> order;
    while (!ready.empty()) {
        const ConceptId id = *ready.begin();
        ready.erase(ready.begin());
        order.push_back(id);
        for (ConceptId u : users[id]) {
            if (--indegree[u] == 0) ready.insert(u);
        }
    }
    return order;
}

void Taxonomy::recompute(std::span<const ConceptId> changed) {
    std::set<ConceptId> affected(changed.begin(), changed.end());
    for (ConceptId id : topological_order()) {
        const auto refs = referenced_concepts(get(id).expr);
        if (affected.contains(id) ||
            std::any_of(refs.begin(), refs.end(), [&](ConceptId r) { return affected.contains(r); })) {
            affected.insert(id);
            mut(id).extension = evaluate(get(id).expr);
        }
    }
}

void Taxonomy::rebind(std::shared_ptr<const Table> table) {
    if (!table) throw InvalidArgument("taxonomy needs a table");
    if (table->row_count() != table_->row_count()) throw InvalidArgument("replacement table has different rows");
    Taxonomy copy = *this;
    copy.table_ = std::move(table);
    for (ConceptId id : copy.topological_order()) {
        const Concept& c = copy.get(id);
        copy.validate_expr(c.expr, id);
        copy.mut(id).extension = copy.evaluate(c.expr);
    }
    *this = std::move(copy);
}

bool Taxonomy::check_invariants() const {
    if (!concepts_.contains(root_)) return false;
    if (topological_order().size() != concepts_.size()) return false;
    std::size_t roots = 0;
    for (const auto& [id, c] : concepts_) {
        if (c.parents.empty()) ++roots;
        if (c.parents != parents_of(c.expr)) return false;
        for (ConceptId p : c.parents) {
            if (!std::binary_search(get(p).children.begin(), get(p).children.end(), id)) return false;
        }
        for (ConceptId ch : c.children) {
            if (!concepts_.contains(ch)) return false;
        }
    }
    if (roots != 1 || !get(root_).parents.empty()) return false;
    // Reachability: every concept is root or has an ancestor chain to it.
    for (const auto& [id, c] : concepts_) {
        if (id == root_) continue;
        const auto anc = ancestors(id);
        if (!std::binary_search(anc.begin(), anc.end(), root_)) return false;
    }
    return true;
}

nlohmann::json Taxonomy::to_json() const {
    nlohmann::json concepts = nlohmann::json::array();
    for (const auto& [id, c] : concepts_) {
        concepts.push_back({{"id", id}, {"label", c.label}, {"expr", expr_to_json(c.expr, *table_)}});
    }
    return {{"format", "tabtax-taxonomy"}, {"version", 1}, {"root", root_}, {"next_id", next_id_},
            {"concepts", std::move(concepts)}};
}

Taxonomy Taxonomy::from_json(std::shared_ptr<const Table> table, const nlohmann::json& doc) {
    if (!table) throw InvalidArgument("taxonomy needs a table");
    if (!doc.is_object() || doc.value("format", "") != "tabtax-taxonomy") {
        throw InvalidArgument("not a taxonomy document");
    }
    if (doc.value("version", 0) != 1) throw InvalidArgument("unsupported taxonomy document version");

    struct Pending {
        std::string label;
        ConceptExpr expr;
    };
    std::map<ConceptId, Pending> pending;
    for (const auto& j : doc.at("concepts")) {
        const auto id = j.at("id").get<ConceptId>();
        if (!pending.emplace(id, Pending{j.at("label").get<std::string>(), expr_from_json(j.at("expr"), *table)})
                 .second) {
            throw InvalidArgument("duplicate concept id " + std::to_string(id));
        }
    }

    Taxonomy tax;
    tax.table_ = std::move(table);
    tax.root_ = doc.at("root").get<ConceptId>();
    if (!pending.contains(tax.root_) || !std::holds_alternative<RootExpr>(pending.at(tax.root_).expr)) {
        throw InvalidArgument("taxonomy document root is missing or not a root expression");
    }

    ConceptId max_id = 0;
    while (!pending.empty()) {
        bool progressed = false;
        for (auto it = pending.begin(); it != pending.end();) {
            const auto refs = referenced_concepts(it->second.expr);
            if (!std::all_of(refs.begin(), refs.end(), [&](ConceptId r) { return tax.contains(r); })) {
                ++it;
                continue;
            }
            if (std::holds_alternative<RootExpr>(it->second.expr) && it->first != tax.root_) {
                throw InvalidArgument("taxonomy document has more than one root");
            }
            tax.next_id_ = it->first;
            tax.insert(std::move(it->second.expr), parents_of(it->second.expr), std::move(it->second.label));
            max_id = std::max(max_id, it->first);
            it = pending.erase(it);
            progressed = true;
        }
        if (!progressed) throw InvalidArgument("taxonomy document references unknown concepts or has a cycle");
    }
    tax.next_id_ = std::max<ConceptId>(doc.value("next_id", ConceptId{0}), max_id + 1);
    return tax;
}

nlohmann::json expr_to_json(const ConceptExpr& expr, const Table& table) {
    return std::visit(overloaded{
                          [](const RootExpr&) { return nlohmann::json{{"type", "root"}}; },
                          [&](const RestrictExpr& e) {
                              nlohmann::json rs = nlohmann::json::array();
                              for (const auto& r : e.restrictions) rs.push_back(to_json(r, table));
                              return nlohmann::json{{"type", "restrict"}, {"parent", e.parent}, {"restrictions", rs}};
                          },
                          [](const UnionExpr& e) { return nlohmann::json{{"type", "union"}, {"operands", e.operands}}; },
                          [](const IntersectionExpr& e) {
                              return nlohmann::json{{"type", "intersection"}, {"operands", e.operands}};
                          },
                          [](const ComplementExpr& e) {
                              return nlohmann::json{{"type", "complement"}, {"parent", e.parent}, {"excluded", e.excluded}};
                          },
                      },
                      expr);
}

ConceptExpr expr_from_json(const nlohmann::json& j, const Table& table) {
    const std::string type = j.at("type").get<std::string>();
    if (type == "root") return RootExpr{};
    if (type == "restrict") {
        RestrictExpr e;
        e.parent = j.at("parent").get<ConceptId>();
        for (const auto& r : j.at("restrictions")) e.restrictions.push_back(restriction_from_json(r, table));
        return e;
    }
    if (type == "union") return UnionExpr{j.at("operands").get<std::vector<ConceptId>>()};
    if (type == "intersection") return IntersectionExpr{j.at("operands").get<std::vector<ConceptId>>()};
    if (type == "complement") {
        return ComplementExpr{j.at("parent").get<ConceptId>(), j.at("excluded").get<std::vector<ConceptId>>()};
    }
    throw InvalidArgument("unknown expression type '" + type + "'");
}

std::string describe_intension(const Taxonomy& tax, ConceptId id) {
    auto label = [&](ConceptId c) { return tax.get(c).label; };
    auto join = [&](const std::vector<ConceptId>& ids, std::string_view sep) {
        std::string out;
        for (std::size_t i = 0; i < ids.size(); ++i) {
            if (i) out += sep;
            out += label(ids[i]);
        }
        return out;
    };
    return std::visit(overloaded{
                          [](const RootExpr&) { return std::string("all rows"); },
                          [&](const RestrictExpr& e) {
                              std::string out = label(e.parent);
                              for (const auto& r : e.restrictions) out += " and " + describe(r, tax.table());
                              return out;
                          },
                          [&](const UnionExpr& e) { return join(e.operands, " or "); },
                          [&](const IntersectionExpr& e) { return join(e.operands, " and "); },
                          [&](const ComplementExpr& e) {
                              return label(e.parent) + " and not (" + join(e.excluded, " or ") + ")";
                          },
                      },
                      tax.get(id).expr);
}

}  // namespace tabtax
