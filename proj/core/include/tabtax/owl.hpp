#pragma once

#include <cstddef>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "tabtax/taxonomy.hpp"
#include "tabtax/turtle.hpp"

namespace tabtax {

struct ExportOptions {
    std::string base_iri;  // empty: derived from the table name
    bool include_individuals = true;
    std::string ontology_label;  // empty: the root label
};

/// Throws InvalidArgument unless `iri` is an absolute IRI without spaces or
/// delimiter characters.
void validate_base_iri(std::string_view iri);

/// Letters and digits kept, everything else mapped to '_'.
std::string sanitize_local_name(std::string_view label);

std::string export_turtle(const Taxonomy& tax, const ExportOptions& options = {});
void export_turtle_file(const Taxonomy& tax, const std::string& path, const ExportOptions& options = {});

/// One datatype facet or value enumeration as it appears in the ontology.
struct SkeletonRestriction {
    std::string property;             // property label, or its IRI when unlabeled
    std::string op;                   // "<", "<=", ">", ">=", "=", "in", or "some"/"has" for other forms
    std::vector<std::string> values;  // lexical forms; sorted for enumerations
    std::string datatype;

    friend bool operator==(const SkeletonRestriction&, const SkeletonRestriction&) = default;
    friend auto operator<=>(const SkeletonRestriction&, const SkeletonRestriction&) = default;
};

enum class SkeletonKind { named, restrict, union_of, intersection, complement };

struct SkeletonClass {
    std::string iri;
    std::string label;
    SkeletonKind kind = SkeletonKind::named;
    std::vector<std::string> parents;       // taxonomy edges: subclass axioms plus union operands
    std::vector<std::string> superclasses;  // asserted named superclasses only
    std::vector<std::string> operands;      // union / intersection / excluded concepts
    std::vector<SkeletonRestriction> restrictions;
    std::size_t instances = 0;  // extension size or typed-instance closure count
};

/// The part of a taxonomy the statistics look at. Classes are sorted by IRI;
/// parent lists are sorted.
struct TaxonomySkeleton {
    std::vector<SkeletonClass> classes;
    std::size_t individuals = 0;
    std::vector<turtle::Triple> unknown;  // triples the importer does not interpret

    std::size_t unknown_triples() const noexcept { return unknown.size(); }

    const SkeletonClass* find(std::string_view iri) const;
};

TaxonomySkeleton import_turtle(std::string_view document);
TaxonomySkeleton import_turtle_file(const std::string& path);

/// Skeleton of a live taxonomy, keyed by the IRIs export_turtle would use.
/// Instance counts are extension sizes; individuals is the row count.
TaxonomySkeleton skeleton_of(const Taxonomy& tax, const ExportOptions& options = {});

}  // namespace tabtax
