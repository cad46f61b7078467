#include "tabtax/owl.hpp"

#include <algorithm>
#include <fstream>
#include <functional>
#include <map>
#include <set>
#include <sstream>

#include "tabtax/error.hpp"

namespace tabtax {
namespace {

using turtle::Term;
using turtle::Triple;

std::string rdf(std::string_view local) { return std::string(turtle::rdf_ns) + std::string(local); }
std::string rdfs(std::string_view local) { return std::string(turtle::rdfs_ns) + std::string(local); }
std::string owl(std::string_view local) { return std::string(turtle::owl_ns) + std::string(local); }
std::string xsd(std::string_view local) { return std::string(turtle::xsd_ns) + std::string(local); }

std::string local_name(const std::string& iri) {
    const auto cut = iri.find_last_of("#/");
    return cut == std::string::npos ? iri : iri.substr(cut + 1);
}

class Graph {
public:
    explicit Graph(const std::vector<Triple>& triples) : triples_(triples) {
        for (std::size_t i = 0; i < triples.size(); ++i) by_subject_[triples[i].subject].push_back(i);
        used_.assign(triples.size(), false);
    }

    std::vector<Term> objects(const Term& s, const std::string& p, bool mark = true) {
        std::vector<Term> out;
        const auto it = by_subject_.find(s);
        if (it == by_subject_.end()) return out;
        for (std::size_t i : it->second) {
            if (triples_[i].predicate.value == p) {
                out.push_back(triples_[i].object);
                if (mark) used_[i] = true;
            }
        }
        return out;
    }

    std::optional<Term> object(const Term& s, const std::string& p, bool mark = true) {
        auto all = objects(s, p, mark);
        if (all.empty()) return std::nullopt;
        return all.front();
    }

    bool has_type(const Term& s, const std::string& type) {
        for (const auto& t : objects(s, rdf("type"), false)) {
            if (t.is(type)) return true;
        }
        return false;
    }

    /// Marks every triple of `s` whose predicate is in `preds`.
    void mark(const Term& s, std::initializer_list<std::string> preds) {
        for (const auto& p : preds) objects(s, p, true);
    }

    std::vector<Term> list(Term node) {
        std::vector<Term> items;
        std::set<Term> seen;
        while (!node.is(rdf("nil"))) {
            if (!seen.insert(node).second) throw ParseError("cyclic RDF list", 0, 0);
            auto first = object(node, rdf("first"));
            auto rest = object(node, rdf("rest"));
            if (!first || !rest) throw ParseError("malformed RDF list", 0, 0);
            items.push_back(*first);
            node = *rest;
        }
        return items;
    }

    const std::vector<Triple>& triples() const { return triples_; }
    bool used(std::size_t i) const { return used_[i]; }
    void use(std::size_t i) { used_[i] = true; }

private:
    const std::vector<Triple>& triples_;
    std::map<Term, std::vector<std::size_t>> by_subject_;
    std::vector<bool> used_;
};

class Importer {
public:
    explicit Importer(const turtle::Document& doc) : doc_(doc), g_(doc.triples) {}

    TaxonomySkeleton run() {
        collect_classes();
        std::map<std::string, SkeletonClass> classes;
        for (const auto& iri : class_iris_) classes[iri] = read_class(iri);
        count_instances(classes);
        mark_misc();
        TaxonomySkeleton sk;
        sk.individuals = individuals_;
        for (auto& [iri, cls] : classes) sk.classes.push_back(std::move(cls));
        for (std::size_t i = 0; i < doc_.triples.size(); ++i) {
            if (!g_.used(i)) sk.unknown.push_back(doc_.triples[i]);
        }
        return sk;
    }

private:
    const turtle::Document& doc_;
    Graph g_;
    std::set<std::string> class_iris_;
    std::set<Term> individuals_seen_;
    std::size_t individuals_ = 0;

    static bool is_top(const Term& t) { return t.is(owl("Thing")) || t.is(owl("Nothing")) || t.is(rdfs("Resource")); }

    void collect_classes() {
        for (const auto& t : doc_.triples) {
            if (t.predicate.is(rdf("type")) && t.subject.is_iri() &&
                (t.object.is(owl("Class")) || t.object.is(rdfs("Class"))) && !is_top(t.subject)) {
                class_iris_.insert(t.subject.value);
            }
            if (t.predicate.is(rdfs("subClassOf"))) {
                if (t.subject.is_iri() && !is_top(t.subject)) class_iris_.insert(t.subject.value);
                if (t.object.is_iri() && !is_top(t.object)) class_iris_.insert(t.object.value);
            }
        }
    }

    std::string property_name(const Term& p) {
        if (auto label = g_.object(p, rdfs("label"), false); label && label->is_literal()) return label->value;
        return p.is_iri() ? local_name(p.value) : p.value;
    }

    void read_restriction(const Term& node, std::vector<SkeletonRestriction>& out) {
        const auto prop = g_.object(node, owl("onProperty"));
        g_.mark(node, {rdf("type")});
        const std::string property = prop ? property_name(*prop) : std::string{};
        if (auto some = g_.object(node, owl("someValuesFrom"))) {
            if (some->is_blank()) {
                g_.mark(*some, {rdf("type")});
                const auto on = g_.object(*some, owl("onDatatype"));
                const auto facets = g_.object(*some, owl("withRestrictions"));
                const auto one_of = g_.object(*some, owl("oneOf"));
                if (facets) {
                    static const std::map<std::string, std::string> ops{{xsd("maxExclusive"), "<"},
                                                                        {xsd("maxInclusive"), "<="},
                                                                        {xsd("minExclusive"), ">"},
                                                                        {xsd("minInclusive"), ">="}};
                    for (const auto& f : g_.list(*facets)) {
                        for (const auto& [facet, op] : ops) {
                            for (const auto& v : g_.objects(f, facet)) {
                                out.push_back({property, op, {v.value}, on ? on->value : v.datatype});
                            }
                        }
                    }
                    return;
                }
                if (one_of) {
                    std::vector<std::string> values;
                    for (const auto& v : g_.list(*one_of)) values.push_back(v.value);
                    std::sort(values.begin(), values.end());
                    values.erase(std::unique(values.begin(), values.end()), values.end());
                    out.push_back({property, values.size() == 1 ? "=" : "in", std::move(values), {}});
                    return;
                }
            }
            out.push_back({property, "some", {some->value}, {}});
            return;
        }
        if (auto value = g_.object(node, owl("hasValue"))) {
            out.push_back({property, "=", {value->value}, value->datatype});
            return;
        }
        for (const char* other : {"allValuesFrom", "minCardinality", "maxCardinality", "cardinality",
                                  "minQualifiedCardinality", "maxQualifiedCardinality", "qualifiedCardinality"}) {
            if (auto v = g_.object(node, owl(other))) {
                out.push_back({property, other, {v->value}, {}});
                return;
            }
        }
        out.push_back({property, "other", {}, {}});
    }

    /// Walks a class expression, collecting restrictions and the named
    /// classes at its top level.
    void walk(const Term& node, std::vector<SkeletonRestriction>& restrictions, std::vector<std::string>& named,
              bool& has_complement, std::vector<std::string>& complemented, std::string& shape) {
        if (node.is_iri()) {
            if (!is_top(node)) named.push_back(node.value);
            return;
        }
        if (!node.is_blank()) return;
        if (g_.has_type(node, owl("Restriction"))) {
            read_restriction(node, restrictions);
            return;
        }
        g_.mark(node, {rdf("type")});
        if (auto list = g_.object(node, owl("intersectionOf"))) {
            if (shape.empty()) shape = "intersection";
            for (const auto& m : g_.list(*list)) walk(m, restrictions, named, has_complement, complemented, shape);
            return;
        }
        if (auto list = g_.object(node, owl("unionOf"))) {
            if (shape.empty()) shape = "union";
            std::vector<std::string> inner;
            std::string ignored = "nested";
            for (const auto& m : g_.list(*list)) walk(m, restrictions, inner, has_complement, complemented, ignored);
            named.insert(named.end(), inner.begin(), inner.end());
            return;
        }
        if (auto target = g_.object(node, owl("complementOf"))) {
            has_complement = true;
            std::vector<std::string> inner;
            std::string ignored = "nested";
            walk(*target, restrictions, inner, has_complement, complemented, ignored);
            complemented.insert(complemented.end(), inner.begin(), inner.end());
        }
    }

    SkeletonClass read_class(const std::string& iri) {
        const Term self{Term::Kind::iri, iri, {}, {}};
        SkeletonClass cls;
        cls.iri = iri;
        if (auto label = g_.object(self, rdfs("label")); label && label->is_literal()) {
            cls.label = label->value;
        } else {
            cls.label = local_name(iri);
        }
        std::set<std::string> supers;
        for (const auto& s : g_.objects(self, rdfs("subClassOf"))) {
            if (s.is_iri()) {
                if (!is_top(s)) supers.insert(s.value);
                continue;
            }
            // Anonymous superclass: its restrictions belong to this class.
            std::vector<std::string> named;
            std::vector<std::string> complemented;
            bool has_complement = false;
            std::string shape;
            walk(s, cls.restrictions, named, has_complement, complemented, shape);
        }
        for (const auto& e : g_.objects(self, owl("equivalentClass"))) {
            std::vector<std::string> named;
            std::vector<std::string> complemented;
            bool has_complement = false;
            std::string shape;
            const std::size_t before = cls.restrictions.size();
            walk(e, cls.restrictions, named, has_complement, complemented, shape);
            if (e.is_iri()) continue;
            if (shape == "union") {
                cls.kind = SkeletonKind::union_of;
                cls.operands = named;
            } else if (has_complement) {
                cls.kind = SkeletonKind::complement;
                cls.operands = complemented;
            } else if (cls.restrictions.size() > before) {
                cls.kind = SkeletonKind::restrict;
            } else if (shape == "intersection") {
                cls.kind = SkeletonKind::intersection;
                cls.operands = named;
            }
        }
        cls.superclasses.assign(supers.begin(), supers.end());
        std::set<std::string> parents = supers;
        if (cls.kind == SkeletonKind::union_of) parents.insert(cls.operands.begin(), cls.operands.end());
        parents.erase(iri);
        cls.parents.assign(parents.begin(), parents.end());
        return cls;
    }

    void count_instances(std::map<std::string, SkeletonClass>& classes) {
        std::map<std::string, std::vector<std::string>> ancestors;
        std::function<const std::vector<std::string>&(const std::string&)> up =
            [&](const std::string& iri) -> const std::vector<std::string>& {
            if (auto it = ancestors.find(iri); it != ancestors.end()) return it->second;
            ancestors[iri] = {};  // cycle guard
            std::set<std::string> acc{iri};
            for (const auto& s : classes.at(iri).superclasses) {
                if (!classes.contains(s)) continue;
                const auto& more = up(s);
                acc.insert(more.begin(), more.end());
            }
            return ancestors[iri] = std::vector<std::string>(acc.begin(), acc.end());
        };
        std::map<Term, std::set<std::string>> types;
        for (std::size_t i = 0; i < doc_.triples.size(); ++i) {
            const Triple& t = doc_.triples[i];
            if (!t.predicate.is(rdf("type")) || t.subject.is_literal()) continue;
            if (t.object.is(owl("NamedIndividual"))) {
                types[t.subject];
                g_.use(i);
            } else if (t.object.is_iri() && classes.contains(t.object.value) && !class_iris_.contains(t.subject.value)) {
                types[t.subject].insert(t.object.value);
                g_.use(i);
            }
        }
        individuals_ = types.size();
        for (const auto& [ind, direct] : types) {
            std::set<std::string> closure;
            for (const auto& c : direct) {
                const auto& a = up(c);
                closure.insert(a.begin(), a.end());
            }
            for (const auto& c : closure) ++classes.at(c).instances;
            individuals_seen_.insert(ind);
        }
    }

    void mark_misc() {
        std::set<Term> properties;
        for (std::size_t i = 0; i < doc_.triples.size(); ++i) {
            const Triple& t = doc_.triples[i];
            if (t.predicate.is(rdf("type")) &&
                (t.object.is(owl("DatatypeProperty")) || t.object.is(owl("ObjectProperty")) ||
                 t.object.is(owl("AnnotationProperty")) || t.object.is(owl("Ontology")) ||
                 ((t.object.is(owl("Class")) || t.object.is(rdfs("Class"))) && t.subject.is_iri()))) {
                g_.use(i);
                if (!t.object.is(owl("Ontology")) && !t.object.is(owl("Class")) && !t.object.is(rdfs("Class"))) {
                    properties.insert(t.subject);
                }
            }
        }
        for (std::size_t i = 0; i < doc_.triples.size(); ++i) {
            const Triple& t = doc_.triples[i];
            const bool annotation = t.predicate.is(rdfs("label")) || t.predicate.is(rdfs("comment")) ||
                                    t.predicate.is(owl("versionInfo"));
            const bool schema = properties.contains(t.subject) &&
                                (t.predicate.is(rdfs("range")) || t.predicate.is(rdfs("domain")));
            const bool assertion = individuals_seen_.contains(t.subject) && properties.contains(t.predicate);
            if (annotation || schema || assertion) g_.use(i);
        }
    }
};

}  // namespace

TaxonomySkeleton import_turtle(std::string_view document) {
    const turtle::Document doc = turtle::parse(document);
    return Importer(doc).run();
}

TaxonomySkeleton import_turtle_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error(Error::Category::io, "cannot open '" + path + "'");
    std::ostringstream buf;
    buf << in.rdbuf();
    return import_turtle(buf.str());
}

}  // namespace tabtax
