#pragma once

#include <cmath>
#include <algorithm>
#include <fstream>
#include <map>
#include <memory>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "tabtax/table.hpp"
#include "tabtax/taxonomy.hpp"

namespace test_support {

inline std::string data_path(const std::string& name) { return std::string(TABTAX_TEST_DATA) + "/" + name; }

inline std::string read_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    std::ostringstream buf;
    buf << in.rdbuf();
    return buf.str();
}

inline std::shared_ptr<tabtax::Table> iris() {
    auto t = std::make_shared<tabtax::Table>(
        tabtax::load_table_file(data_path("iris.csv"), tabtax::TableFormat::csv));
    return t;
}

/// Synthetic table: numeric columns x0..x{numeric-1}, a date column d, a
/// categorical column c over {a..e}, with a sprinkling of missing cells.
inline std::shared_ptr<tabtax::Table> synthetic_table(std::size_t rows, std::size_t numeric, std::uint64_t seed,
                                                      double missing_rate = 0.03) {
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    std::vector<std::string> names;
    std::vector<std::vector<std::string>> cols;
    for (std::size_t j = 0; j < numeric; ++j) {
        names.push_back("x" + std::to_string(j));
        std::vector<std::string> col;
        for (std::size_t r = 0; r < rows; ++r) {
            if (u(rng) < missing_rate) {
                col.emplace_back("");
            } else {
                // Two decimals so that generated cut points hit ties.
                col.push_back(tabtax::format_number(std::round(u(rng) * 1000.0) / 100.0));
            }
        }
        cols.push_back(std::move(col));
    }
    names.emplace_back("d");
    {
        std::vector<std::string> col;
        for (std::size_t r = 0; r < rows; ++r) {
            if (u(rng) < missing_rate) {
                col.emplace_back("NA");
                continue;
            }
            const int day = 1 + static_cast<int>(u(rng) * 28);
            const int month = 1 + static_cast<int>(u(rng) * 12);
            char buf[32];
            std::snprintf(buf, sizeof buf, "2020-%02d-%02d", month, day);
            col.emplace_back(buf);
        }
        cols.push_back(std::move(col));
    }
    names.emplace_back("c");
    {
        std::vector<std::string> col;
        for (std::size_t r = 0; r < rows; ++r) {
            if (u(rng) < missing_rate) {
                col.emplace_back("?");
            } else {
                col.emplace_back(1, static_cast<char>('a' + static_cast<int>(u(rng) * 5)));
            }
        }
        cols.push_back(std::move(col));
    }
    auto t = std::make_shared<tabtax::Table>("synthetic", names, cols);
    t->set_kind(t->index_of("c"), tabtax::ColumnKind::categorical);
    return t;
}

/// Brute-force membership, evaluated row by row from the expression tree
/// without touching materialized extensions.
class Oracle {
public:
    explicit Oracle(const tabtax::Taxonomy& tax) : tax_(tax) {}

    bool member(tabtax::ConceptId id, tabtax::RowId row) {
        const auto key = std::pair{id, row};
        if (auto it = memo_.find(key); it != memo_.end()) return it->second;
        const auto& c = tax_.get(id);
        bool in = false;
        if (std::holds_alternative<tabtax::RootExpr>(c.expr)) {
            in = true;
        } else if (const auto* r = std::get_if<tabtax::RestrictExpr>(&c.expr)) {
            in = member(r->parent, row);
            for (const auto& restriction : r->restrictions) in = in && holds(restriction, row);
        } else if (const auto* u = std::get_if<tabtax::UnionExpr>(&c.expr)) {
            for (auto o : u->operands) in = in || member(o, row);
        } else if (const auto* i = std::get_if<tabtax::IntersectionExpr>(&c.expr)) {
            in = true;
            for (auto o : i->operands) in = in && member(o, row);
        } else if (const auto* k = std::get_if<tabtax::ComplementExpr>(&c.expr)) {
            in = member(k->parent, row);
            for (auto o : k->excluded) in = in && !member(o, row);
        }
        memo_[key] = in;
        return in;
    }

    tabtax::RowSet extension(tabtax::ConceptId id) {
        tabtax::RowSet out;
        for (std::size_t r = 0; r < tax_.table().row_count(); ++r) {
            if (member(id, static_cast<tabtax::RowId>(r))) out.push_back(static_cast<tabtax::RowId>(r));
        }
        return out;
    }

    /// Number of concepts whose materialized extension differs.
    std::size_t mismatches() {
        std::size_t bad = 0;
        for (auto id : tax_.ids()) bad += extension(id) != tax_.extension(id) ? 1 : 0;
        return bad;
    }

private:
    bool holds(const tabtax::Restriction& r, tabtax::RowId row) const {
        const tabtax::Table& t = tax_.table();
        std::size_t col = 0;
        while (t.column(col).name != r.column) ++col;
        if (t.is_missing(col, row)) return false;
        using Op = tabtax::RestrictionOp;
        switch (r.op) {
            case Op::lt: return t.number(col, row) < std::get<double>(r.value);
            case Op::le: return t.number(col, row) <= std::get<double>(r.value);
            case Op::gt: return t.number(col, row) > std::get<double>(r.value);
            case Op::ge: return t.number(col, row) >= std::get<double>(r.value);
            case Op::eq: return t.text(col, row) == std::get<std::string>(r.value);
            case Op::in: {
                const auto& vs = std::get<std::vector<std::string>>(r.value);
                return std::find(vs.begin(), vs.end(), t.text(col, row)) != vs.end();
            }
        }
        return false;
    }

    const tabtax::Taxonomy& tax_;
    std::map<std::pair<tabtax::ConceptId, tabtax::RowId>, bool> memo_;
};

/// Random restriction on one of the synthetic table's columns.
inline tabtax::Restriction random_restriction(const tabtax::Table& t, std::mt19937_64& rng) {
    using Op = tabtax::RestrictionOp;
    std::uniform_int_distribution<std::size_t> pick_col(0, t.column_count() - 1);
    const std::size_t col = pick_col(rng);
    const auto& meta = t.column(col);
    if (meta.kind == tabtax::ColumnKind::categorical) {
        std::vector<std::string> values;
        for (const auto& [v, n] : meta.stats.value_counts) values.push_back(v);
        std::shuffle(values.begin(), values.end(), rng);
        std::uniform_int_distribution<std::size_t> k(1, std::min<std::size_t>(3, values.size()));
        values.resize(k(rng));
        std::sort(values.begin(), values.end());
        if (values.size() == 1) return {meta.name, Op::eq, values.front()};
        return {meta.name, Op::in, values};
    }
    const Op ops[] = {Op::lt, Op::le, Op::gt, Op::ge};
    std::uniform_int_distribution<int> pick_op(0, 3);
    // Cut at an existing value half of the time so that <, <= differ.
    std::uniform_real_distribution<double> u(0.0, 1.0);
    double v = *meta.stats.min + u(rng) * (*meta.stats.max - *meta.stats.min);
    if (u(rng) < 0.5) {
        std::uniform_int_distribution<std::size_t> pick_row(0, t.row_count() - 1);
        const auto row = static_cast<tabtax::RowId>(pick_row(rng));
        if (!t.is_missing(col, row)) v = t.number(col, row);
    }
    return {meta.name, ops[pick_op(rng)], v};
}

/// Grows a random taxonomy with restrictions, unions, intersections and
/// complements, keeping every expression tree at depth <= max_depth.
inline void grow_random_taxonomy(tabtax::Taxonomy& tax, std::mt19937_64& rng, std::size_t steps,
                                 std::size_t max_depth = 5) {
    std::map<tabtax::ConceptId, std::size_t> depth{{tax.root(), 0}};
    std::uniform_real_distribution<double> u(0.0, 1.0);
    auto candidates = [&] {
        std::vector<tabtax::ConceptId> out;
        for (auto id : tax.ids()) {
            if (depth.at(id) < max_depth) out.push_back(id);
        }
        return out;
    };
    auto pick = [&](const std::vector<tabtax::ConceptId>& from) {
        std::uniform_int_distribution<std::size_t> d(0, from.size() - 1);
        return from[d(rng)];
    };
    for (std::size_t step = 0; step < steps; ++step) {
        const auto pool = candidates();
        const double roll = u(rng);
        const std::string label = "c" + std::to_string(tax.next_id());
        if (roll < 0.5 || pool.size() < 2) {
            const auto parent = pick(pool);
            std::vector<tabtax::Restriction> rs{random_restriction(tax.table(), rng)};
            if (u(rng) < 0.3) rs.push_back(random_restriction(tax.table(), rng));
            const auto id = tax.add_restriction_subconcept(parent, rs, label);
            depth[id] = depth.at(parent) + 1;
        } else if (roll < 0.85) {
            auto a = pick(pool);
            auto b = pick(pool);
            if (a == b) continue;
            std::vector<tabtax::ConceptId> ops{a, b};
            const auto kind = roll < 0.68 ? tabtax::CombineKind::union_of : tabtax::CombineKind::intersection;
            const auto id = tax.combine(ops, kind, label);
            depth[id] = std::max(depth.at(a), depth.at(b)) + 1;
        } else {
            // Complement of a concept under one of its ancestors.
            const auto s = pick(pool);
            const auto anc = tax.ancestors(s);
            if (anc.empty()) continue;
            const auto p = pick(anc);
            std::vector<tabtax::ConceptId> ops{s};
            const auto id = tax.combine(ops, tabtax::CombineKind::complement, label, p);
            depth[id] = std::max(depth.at(s), depth.at(p)) + 1;
        }
    }
}

}  // namespace test_support
