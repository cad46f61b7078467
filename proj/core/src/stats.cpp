#include "tabtax/stats.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <functional>
#include <map>
#include <set>
#include <sstream>

#include "tabtax/error.hpp"

namespace tabtax {

TaxonomyStats compute_stats(const TaxonomySkeleton& sk) {
    if (sk.classes.empty()) throw InvalidArgument("taxonomy has no concepts");
    const std::size_t n = sk.classes.size();
    std::map<std::string_view, std::size_t> index;
    for (std::size_t i = 0; i < n; ++i) index.emplace(sk.classes[i].iri, i);

    std::vector<std::vector<std::size_t>> parents(n);
    std::vector<std::size_t> child_count(n, 0);
    TaxonomyStats s;
    s.concepts = n;
    s.instances = sk.individuals;
    for (std::size_t i = 0; i < n; ++i) {
        std::set<std::size_t> ps;
        for (const auto& p : sk.classes[i].parents) {
            if (auto it = index.find(p); it != index.end() && it->second != i) ps.insert(it->second);
        }
        parents[i].assign(ps.begin(), ps.end());
        for (std::size_t p : ps) ++child_count[p];
        if (ps.size() >= 2) ++s.multi_parent;
        s.restrictions += sk.classes[i].restrictions.size();
    }

    // Longest chain of nodes ending at each class.
    std::vector<std::size_t> depth(n, 0);
    std::vector<int> state(n, 0);
    std::function<std::size_t(std::size_t)> visit = [&](std::size_t i) -> std::size_t {
        if (state[i] == 2) return depth[i];
        if (state[i] == 1) throw InvalidArgument("subclass cycle through '" + sk.classes[i].iri + "'");
        state[i] = 1;
        std::size_t best = 0;
        for (std::size_t p : parents[i]) best = std::max(best, visit(p));
        state[i] = 2;
        return depth[i] = best + 1;
    };
    for (std::size_t i = 0; i < n; ++i) s.levels = std::max(s.levels, visit(i));

    double branch_sum = 0.0;
    std::size_t internal = 0;
    double inst_sum = 0.0;
    double leaf_inst_sum = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        const auto inst = static_cast<double>(sk.classes[i].instances);
        inst_sum += inst;
        if (child_count[i] == 0) {
            ++s.leaves;
            leaf_inst_sum += inst;
        } else {
            ++internal;
            branch_sum += static_cast<double>(child_count[i]);
        }
    }
    if (internal > 0) {
        s.avg_branching = branch_sum / static_cast<double>(internal);
        double sq = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            if (child_count[i] == 0) continue;
            const double d = static_cast<double>(child_count[i]) - s.avg_branching;
            sq += d * d;
        }
        s.std_branching = std::sqrt(sq / static_cast<double>(internal));
    }
    s.avg_instances = inst_sum / static_cast<double>(n);
    s.avg_leaf_instances = leaf_inst_sum / static_cast<double>(s.leaves);
    return s;
}

TaxonomyStats compute_stats(const Taxonomy& tax) { return compute_stats(skeleton_of(tax)); }

std::string stats_csv_header() {
    return "Concepts,Instances,Restrictions,Levels,Leaves,Multi-parent,Avg branching,Std branching,Avg instances,"
           "Avg leaf instances";
}

std::string stats_csv_row(const TaxonomyStats& s) {
    std::ostringstream out;
    out << s.concepts << ',' << s.instances << ',' << s.restrictions << ',' << s.levels << ',' << s.leaves << ','
        << s.multi_parent << ',' << format_number(s.avg_branching) << ',' << format_number(s.std_branching) << ','
        << format_number(s.avg_instances) << ',' << format_number(s.avg_leaf_instances);
    return out.str();
}

std::string stats_csv(const TaxonomyStats& s) { return stats_csv_header() + "\n" + stats_csv_row(s) + "\n"; }

std::string stats_text_table(const TaxonomyStats& s) {
    auto fixed3 = [](double v) {
        char buf[64];
        std::snprintf(buf, sizeof buf, "%.3f", v);
        return std::string(buf);
    };
    const std::vector<std::pair<std::string, std::string>> cells{
        {"Concepts", std::to_string(s.concepts)},
        {"Instances", std::to_string(s.instances)},
        {"Restrictions", std::to_string(s.restrictions)},
        {"Levels", std::to_string(s.levels)},
        {"Leaves", std::to_string(s.leaves)},
        {"Multi-parent", std::to_string(s.multi_parent)},
        {"Avg branching", fixed3(s.avg_branching)},
        {"Std branching", fixed3(s.std_branching)},
        {"Avg instances", fixed3(s.avg_instances)},
        {"Avg leaf instances", fixed3(s.avg_leaf_instances)},
    };
    std::string head;
    std::string row;
    for (std::size_t i = 0; i < cells.size(); ++i) {
        const std::size_t width = std::max(cells[i].first.size(), cells[i].second.size());
        const std::string sep = i ? "  " : "";
        head += sep + std::string(width - cells[i].first.size(), ' ') + cells[i].first;
        row += sep + std::string(width - cells[i].second.size(), ' ') + cells[i].second;
    }
    return head + "\n" + row + "\n";
}

nlohmann::json to_json(const TaxonomyStats& s) {
    return {{"concepts", s.concepts},
            {"instances", s.instances},
            {"restrictions", s.restrictions},
            {"levels", s.levels},
            {"leaves", s.leaves},
            {"multi_parent", s.multi_parent},
            {"avg_branching", s.avg_branching},
            {"std_branching", s.std_branching},
            {"avg_instances", s.avg_instances},
            {"avg_leaf_instances", s.avg_leaf_instances}};
}

}  // namespace tabtax
