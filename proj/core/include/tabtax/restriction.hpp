#pragma once

#include <span>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "json.hpp"
#include "tabtax/rowset.hpp"
#include "tabtax/table.hpp"

namespace tabtax {

enum class RestrictionOp { lt, le, gt, ge, eq, in };

std::string_view to_string(RestrictionOp op);
RestrictionOp parse_restriction_op(std::string_view text);

inline bool is_inequality(RestrictionOp op) {
    return op == RestrictionOp::lt || op == RestrictionOp::le || op == RestrictionOp::gt || op == RestrictionOp::ge;
}

/// Number (epoch days on date columns), a category value for `=`, or a
/// sorted value set for `in`.
using RestrictionValue = std::variant<double, std::string, std::vector<std::string>>;

struct Restriction {
    std::string column;
    RestrictionOp op = RestrictionOp::eq;
    RestrictionValue value;

    friend bool operator==(const Restriction&, const Restriction&) = default;
};

/// Throws InvalidArgument when the operator does not fit the column kind:
/// inequalities need numerical/date columns, `=` and `in` categorical ones.
/// Identifier columns never accept restrictions.
void validate(const Restriction& restriction, const Table& table);

/// Missing cells never satisfy a restriction.
bool satisfies(const Restriction& restriction, const Table& table, std::size_t column, RowId row);

/// Rows of `rows` that satisfy every restriction (conjunction).
RowSet filter_rows(const Table& table, std::span<const RowId> rows, std::span<const Restriction> restrictions);

std::string describe(const Restriction& restriction, const Table& table);

nlohmann::json to_json(const Restriction& restriction, const Table& table);
Restriction restriction_from_json(const nlohmann::json& j, const Table& table);

}  // namespace tabtax
