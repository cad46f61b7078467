#include "tabtax/owl.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <fstream>
#include <functional>
#include <map>
#include <set>
#include <sstream>

#include "tabtax/error.hpp"
#include "tabtax/turtle.hpp"

namespace tabtax {
namespace {

struct Naming {
    std::string ns;
    std::string ontology;
    std::vector<std::size_t> property_columns;  // column order
    std::map<std::size_t, std::string> properties;
    std::map<ConceptId, std::string> classes;
    std::set<std::string> used;

    std::string allocate(std::string_view label) {
        std::string base = sanitize_local_name(label);
        if (base.empty()) base = "x";
        std::string name = base;
        for (int k = 2; used.contains(name); ++k) name = base + "_" + std::to_string(k);
        used.insert(name);
        return name;
    }
};

void collect_columns(const Taxonomy& tax, std::set<std::size_t>& out) {
    for (ConceptId id : tax.ids()) {
        if (const auto* r = std::get_if<RestrictExpr>(&tax.get(id).expr)) {
            for (const auto& restriction : r->restrictions) out.insert(tax.table().index_of(restriction.column));
        }
    }
}

Naming make_naming(const Taxonomy& tax, const ExportOptions& options) {
    Naming n;
    std::string base = options.base_iri;
    if (base.empty()) {
        const std::string name = sanitize_local_name(tax.table().name());
        base = "http://example.org/tabtax/" + (name.empty() ? std::string("taxonomy") : name);
    }
    validate_base_iri(base);
    if (base.back() == '#' || base.back() == '/') {
        n.ns = base;
        n.ontology = base.back() == '#' ? base.substr(0, base.size() - 1) : base;
    } else {
        n.ns = base + "#";
        n.ontology = base;
    }
    const Table& table = tax.table();
    std::set<std::size_t> cols;
    for (std::size_t c = 0; c < table.column_count(); ++c) {
        const ColumnMeta& meta = table.column(c);
        if (meta.included && meta.kind != ColumnKind::identifier) cols.insert(c);
    }
    collect_columns(tax, cols);
    for (std::size_t c : cols) {
        n.property_columns.push_back(c);
        n.properties[c] = n.allocate(table.column(c).name);
    }
    for (ConceptId id : tax.ids()) n.classes[id] = n.allocate(tax.get(id).label);
    return n;
}

std::string decimal_lexical(double v) {
    char buf[400];
    const auto res = std::to_chars(buf, buf + sizeof buf, v, std::chars_format::fixed);
    std::string s(buf, res.ptr);
    if (s == "-0") s = "0";
    return s;
}

std::string datetime_lexical(double days) {
    std::string s = format_date(days);
    if (s.find('T') == std::string::npos) s += "T00:00:00";
    return s;
}

std::string_view datatype_of(ColumnKind kind) {
    switch (kind) {
        case ColumnKind::numerical: return "decimal";
        case ColumnKind::date: return "dateTime";
        default: return "string";
    }
}

std::string facet_of(RestrictionOp op) {
    switch (op) {
        case RestrictionOp::lt: return "maxExclusive";
        case RestrictionOp::le: return "maxInclusive";
        case RestrictionOp::gt: return "minExclusive";
        case RestrictionOp::ge: return "minInclusive";
        default: return {};
    }
}

std::string literal(std::string_view s) { return "\"" + turtle::escape_string(s) + "\""; }

/// Lexical values of a restriction as both the exporter and skeleton_of see them.
std::vector<std::string> restriction_values(const Restriction& r, ColumnKind kind) {
    if (const auto* d = std::get_if<double>(&r.value)) {
        return {kind == ColumnKind::date ? datetime_lexical(*d) : decimal_lexical(*d)};
    }
    if (const auto* s = std::get_if<std::string>(&r.value)) return {*s};
    return std::get<std::vector<std::string>>(r.value);
}

class Writer {
public:
    std::ostringstream out;
    int depth = 0;

    void line(std::string_view text) {
        for (int i = 0; i < depth; ++i) out << "    ";
        out << text << '\n';
    }
};

void write_restriction(Writer& w, const Naming& n, const Table& table, const Restriction& r) {
    const std::size_t col = table.index_of(r.column);
    const ColumnKind kind = table.column(col).kind;
    const auto values = restriction_values(r, kind);
    w.line("[");
    ++w.depth;
    w.line("a owl:Restriction ;");
    w.line("owl:onProperty :" + n.properties.at(col) + " ;");
    w.line("owl:someValuesFrom [");
    ++w.depth;
    w.line("a rdfs:Datatype ;");
    if (is_ordered(kind)) {
        const std::string dt = "xsd:" + std::string(datatype_of(kind));
        w.line("owl:onDatatype " + dt + " ;");
        w.line("owl:withRestrictions ( [ xsd:" + facet_of(r.op) + " " + literal(values.front()) + "^^" + dt + " ] )");
    } else {
        std::string list;
        for (const auto& v : values) list += literal(v) + " ";
        w.line("owl:oneOf ( " + list + ")");
    }
    --w.depth;
    w.line("]");
    --w.depth;
    w.line("]");
}

void write_class(Writer& w, const Naming& n, const Taxonomy& tax, ConceptId id) {
    const Concept& c = tax.get(id);
    const std::string& name = n.classes.at(id);
    auto ref = [&](ConceptId other) { return ":" + n.classes.at(other); };
    w.line(":" + name + " a owl:Class ;");
    ++w.depth;
    std::vector<std::string> supers;
    std::visit(
        [&](const auto& e) {
            using T = std::decay_t<decltype(e)>;
            if constexpr (std::is_same_v<T, RootExpr>) {
                supers.push_back("owl:Thing");
            } else if constexpr (std::is_same_v<T, RestrictExpr> || std::is_same_v<T, ComplementExpr>) {
                supers.push_back(ref(e.parent));
            } else if constexpr (std::is_same_v<T, IntersectionExpr>) {
                for (ConceptId o : e.operands) supers.push_back(ref(o));
            }
        },
        c.expr);
    const bool has_equivalent = !std::holds_alternative<RootExpr>(c.expr);
    w.line("rdfs:label " + literal(c.label) + (supers.empty() && !has_equivalent ? " ." : " ;"));
    if (!supers.empty()) {
        std::string joined;
        for (std::size_t i = 0; i < supers.size(); ++i) joined += (i ? ", " : "") + supers[i];
        w.line("rdfs:subClassOf " + joined + (has_equivalent ? " ;" : " ."));
    }
    if (!has_equivalent) {
        --w.depth;
        w.line("");
        return;
    }
    w.line("owl:equivalentClass [");
    ++w.depth;
    w.line("a owl:Class ;");
    auto operand_list = [&](std::string_view keyword, const std::vector<ConceptId>& ids) {
        std::string list;
        for (ConceptId o : ids) list += ref(o) + " ";
        w.line(std::string(keyword) + " ( " + list + ")");
    };
    std::visit(
        [&](const auto& e) {
            using T = std::decay_t<decltype(e)>;
            if constexpr (std::is_same_v<T, RestrictExpr>) {
                w.line("owl:intersectionOf (");
                ++w.depth;
                w.line(ref(e.parent));
                for (const auto& r : e.restrictions) write_restriction(w, n, tax.table(), r);
                --w.depth;
                w.line(")");
            } else if constexpr (std::is_same_v<T, UnionExpr>) {
                operand_list("owl:unionOf", e.operands);
            } else if constexpr (std::is_same_v<T, IntersectionExpr>) {
                operand_list("owl:intersectionOf", e.operands);
            } else if constexpr (std::is_same_v<T, ComplementExpr>) {
                w.line("owl:intersectionOf (");
                ++w.depth;
                w.line(ref(e.parent));
                if (e.excluded.size() == 1) {
                    w.line("[ a owl:Class ; owl:complementOf " + ref(e.excluded.front()) + " ]");
                } else {
                    std::string list;
                    for (ConceptId o : e.excluded) list += ref(o) + " ";
                    w.line("[ a owl:Class ; owl:complementOf [ a owl:Class ; owl:unionOf ( " + list + ") ] ]");
                }
                --w.depth;
                w.line(")");
            }
        },
        c.expr);
    --w.depth;
    w.line("] .");
    --w.depth;
    w.line("");
}

/// Strict ancestors along the subclass axioms the exporter writes.
std::map<ConceptId, std::set<ConceptId>> asserted_ancestors(const Taxonomy& tax) {
    std::map<ConceptId, std::vector<ConceptId>> supers;
    for (ConceptId id : tax.ids()) {
        const Concept& c = tax.get(id);
        if (const auto* r = std::get_if<RestrictExpr>(&c.expr)) supers[id] = {r->parent};
        if (const auto* k = std::get_if<ComplementExpr>(&c.expr)) supers[id] = {k->parent};
        if (const auto* i = std::get_if<IntersectionExpr>(&c.expr)) supers[id] = i->operands;
    }
    std::map<ConceptId, std::set<ConceptId>> anc;
    std::function<const std::set<ConceptId>&(ConceptId)> visit = [&](ConceptId id) -> const std::set<ConceptId>& {
        if (auto it = anc.find(id); it != anc.end()) return it->second;
        std::set<ConceptId> acc;
        for (ConceptId s : supers[id]) {
            acc.insert(s);
            const auto& up = visit(s);
            acc.insert(up.begin(), up.end());
        }
        return anc[id] = std::move(acc);
    };
    for (ConceptId id : tax.ids()) visit(id);
    return anc;
}

void write_individuals(Writer& w, Naming& n, const Taxonomy& tax) {
    const Table& table = tax.table();
    const std::size_t rows = table.row_count();
    std::vector<std::vector<ConceptId>> containing(rows);
    for (ConceptId id : tax.ids()) {
        for (RowId r : tax.extension(id)) containing[r].push_back(id);
    }
    const auto anc = asserted_ancestors(tax);
    std::optional<std::size_t> id_column;
    for (std::size_t c = 0; c < table.column_count(); ++c) {
        if (table.column(c).kind == ColumnKind::identifier) {
            id_column = c;
            break;
        }
    }
    std::set<ConceptId> covered;
    for (std::size_t r = 0; r < rows; ++r) {
        covered.clear();
        for (ConceptId c : containing[r]) {
            const auto& up = anc.at(c);
            covered.insert(up.begin(), up.end());
        }
        std::string types = "owl:NamedIndividual";
        for (ConceptId c : containing[r]) {
            if (!covered.contains(c)) types += ", :" + n.classes.at(c);
        }
        std::vector<std::string> assertions;
        if (id_column && !table.is_missing(*id_column, static_cast<RowId>(r))) {
            assertions.push_back("rdfs:label " + literal(table.text(*id_column, static_cast<RowId>(r))));
        }
        for (std::size_t c : n.property_columns) {
            const ColumnMeta& meta = table.column(c);
            if (!meta.included || table.is_missing(c, static_cast<RowId>(r))) continue;
            std::string lit;
            if (meta.kind == ColumnKind::numerical) {
                lit = literal(decimal_lexical(table.number(c, static_cast<RowId>(r)))) + "^^xsd:decimal";
            } else if (meta.kind == ColumnKind::date) {
                lit = literal(datetime_lexical(table.number(c, static_cast<RowId>(r)))) + "^^xsd:dateTime";
            } else {
                lit = literal(table.text(c, static_cast<RowId>(r)));
            }
            assertions.push_back(":" + n.properties.at(c) + " " + lit);
        }
        const std::string name = n.allocate("row_" + std::to_string(r));
        w.line(":" + name + " a " + types + (assertions.empty() ? " ." : " ;"));
        ++w.depth;
        for (std::size_t i = 0; i < assertions.size(); ++i) {
            w.line(assertions[i] + (i + 1 == assertions.size() ? " ." : " ;"));
        }
        --w.depth;
    }
}

}  // namespace

void validate_base_iri(std::string_view iri) {
    const auto colon = iri.find(':');
    bool ok = colon != std::string_view::npos && colon > 0 && colon + 1 < iri.size() &&
              std::isalpha(static_cast<unsigned char>(iri.front()));
    for (std::size_t i = 0; ok && i < colon; ++i) {
        const char c = iri[i];
        ok = std::isalnum(static_cast<unsigned char>(c)) || c == '+' || c == '-' || c == '.';
    }
    for (const char c : iri) {
        if (!ok) break;
        const auto u = static_cast<unsigned char>(c);
        ok = u > 0x20 && std::string_view("<>\"{}|\\^`").find(c) == std::string_view::npos;
    }
    if (!ok) throw InvalidArgument("invalid base IRI '" + std::string(iri) + "'");
}

std::string sanitize_local_name(std::string_view label) {
    std::string out;
    out.reserve(label.size());
    for (const char c : label) {
        out += std::isalnum(static_cast<unsigned char>(c)) ? c : '_';
    }
    return out;
}

std::string export_turtle(const Taxonomy& tax, const ExportOptions& options) {
    Naming n = make_naming(tax, options);
    const Table& table = tax.table();
    Writer w;
    w.line("@prefix : <" + n.ns + "> .");
    w.line("@prefix owl: <" + std::string(turtle::owl_ns) + "> .");
    w.line("@prefix rdf: <" + std::string(turtle::rdf_ns) + "> .");
    w.line("@prefix rdfs: <" + std::string(turtle::rdfs_ns) + "> .");
    w.line("@prefix xsd: <" + std::string(turtle::xsd_ns) + "> .");
    w.line("");
    const std::string label = options.ontology_label.empty() ? tax.get(tax.root()).label : options.ontology_label;
    w.line("<" + n.ontology + "> a owl:Ontology ;");
    w.line("    rdfs:label " + literal(label) + " .");
    w.line("");
    for (std::size_t c : n.property_columns) {
        const ColumnMeta& meta = table.column(c);
        w.line(":" + n.properties.at(c) + " a owl:DatatypeProperty ;");
        w.line("    rdfs:label " + literal(meta.name) + " ;");
        w.line("    rdfs:range xsd:" + std::string(datatype_of(meta.kind)) + " .");
        w.line("");
    }
    for (ConceptId id : tax.ids()) write_class(w, n, tax, id);
    if (options.include_individuals) write_individuals(w, n, tax);
    return w.out.str();
}

void export_turtle_file(const Taxonomy& tax, const std::string& path, const ExportOptions& options) {
    const std::string doc = export_turtle(tax, options);
    std::ofstream out(path, std::ios::binary);
    if (!out) throw Error(Error::Category::io, "cannot open '" + path + "' for writing");
    out << doc;
    if (!out) throw Error(Error::Category::io, "failed writing '" + path + "'");
}

TaxonomySkeleton skeleton_of(const Taxonomy& tax, const ExportOptions& options) {
    const Naming n = make_naming(tax, options);
    const Table& table = tax.table();
    TaxonomySkeleton sk;
    sk.individuals = table.row_count();
    auto iri = [&](ConceptId id) { return n.ns + n.classes.at(id); };
    for (ConceptId id : tax.ids()) {
        const Concept& c = tax.get(id);
        SkeletonClass cls;
        cls.iri = iri(id);
        cls.label = c.label;
        cls.instances = c.extension.size();
        for (ConceptId p : c.parents) cls.parents.push_back(iri(p));
        std::visit(
            [&](const auto& e) {
                using T = std::decay_t<decltype(e)>;
                if constexpr (std::is_same_v<T, RestrictExpr>) {
                    cls.kind = SkeletonKind::restrict;
                    cls.superclasses = {iri(e.parent)};
                    for (const auto& r : e.restrictions) {
                        const ColumnKind kind = table.column(table.index_of(r.column)).kind;
                        SkeletonRestriction sr;
                        sr.property = r.column;
                        sr.values = restriction_values(r, kind);
                        sr.datatype = std::string(turtle::xsd_ns) + std::string(datatype_of(kind));
                        if (is_ordered(kind)) {
                            sr.op = std::string(to_string(r.op));
                        } else {
                            sr.op = sr.values.size() == 1 ? "=" : "in";
                            sr.datatype.clear();
                        }
                        cls.restrictions.push_back(std::move(sr));
                    }
                } else if constexpr (std::is_same_v<T, UnionExpr>) {
                    cls.kind = SkeletonKind::union_of;
                    for (ConceptId o : e.operands) cls.operands.push_back(iri(o));
                } else if constexpr (std::is_same_v<T, IntersectionExpr>) {
                    cls.kind = SkeletonKind::intersection;
                    for (ConceptId o : e.operands) {
                        cls.operands.push_back(iri(o));
                        cls.superclasses.push_back(iri(o));
                    }
                } else if constexpr (std::is_same_v<T, ComplementExpr>) {
                    cls.kind = SkeletonKind::complement;
                    cls.superclasses = {iri(e.parent)};
                    for (ConceptId o : e.excluded) cls.operands.push_back(iri(o));
                }
            },
            c.expr);
        std::sort(cls.parents.begin(), cls.parents.end());
        std::sort(cls.superclasses.begin(), cls.superclasses.end());
        sk.classes.push_back(std::move(cls));
    }
    std::sort(sk.classes.begin(), sk.classes.end(),
              [](const SkeletonClass& a, const SkeletonClass& b) { return a.iri < b.iri; });
    return sk;
}

const SkeletonClass* TaxonomySkeleton::find(std::string_view iri) const {
    const auto it = std::lower_bound(classes.begin(), classes.end(), iri,
                                     [](const SkeletonClass& c, std::string_view key) { return c.iri < key; });
    return it != classes.end() && it->iri == iri ? &*it : nullptr;
}

}  // namespace tabtax
