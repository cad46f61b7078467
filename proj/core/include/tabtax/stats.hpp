#pragma once

#include <cstddef>
#include <string>

#include "json.hpp"
#include "tabtax/owl.hpp"

namespace tabtax {

struct TaxonomyStats {
    std::size_t concepts = 0;
    std::size_t instances = 0;
    std::size_t restrictions = 0;
    std::size_t levels = 0;
    std::size_t leaves = 0;
    std::size_t multi_parent = 0;
    double avg_branching = 0.0;
    double std_branching = 0.0;  // population std
    double avg_instances = 0.0;
    double avg_leaf_instances = 0.0;

    friend bool operator==(const TaxonomyStats&, const TaxonomyStats&) = default;
};

/// Throws InvalidArgument on an empty skeleton or a subclass cycle.
TaxonomyStats compute_stats(const TaxonomySkeleton& skeleton);
TaxonomyStats compute_stats(const Taxonomy& tax);

std::string stats_csv_header();
std::string stats_csv_row(const TaxonomyStats& stats);
/// Header plus one row.
std::string stats_csv(const TaxonomyStats& stats);
std::string stats_text_table(const TaxonomyStats& stats);
nlohmann::json to_json(const TaxonomyStats& stats);

}  // namespace tabtax
