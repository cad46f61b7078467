#include "tabtax/restriction.hpp"

#include <algorithm>
#include <cmath>

#include "tabtax/error.hpp"

namespace tabtax {

std::string_view to_string(RestrictionOp op) {
    switch (op) {
        case RestrictionOp::lt: return "<";
        case RestrictionOp::le: return "<=";
        case RestrictionOp::gt: return ">";
        case RestrictionOp::ge: return ">=";
        case RestrictionOp::eq: return "=";
        case RestrictionOp::in: return "in";
    }
    return "=";
}

RestrictionOp parse_restriction_op(std::string_view text) {
    if (text == "<" || text == "lt") return RestrictionOp::lt;
    if (text == "<=" || text == "≤" || text == "le") return RestrictionOp::le;
    if (text == ">" || text == "gt") return RestrictionOp::gt;
    if (text == ">=" || text == "≥" || text == "ge") return RestrictionOp::ge;
    if (text == "=" || text == "==" || text == "eq") return RestrictionOp::eq;
    if (text == "in") return RestrictionOp::in;
    throw InvalidArgument("unknown restriction operator '" + std::string(text) + "'");
}

void validate(const Restriction& r, const Table& table) {
    const auto col = table.find(r.column);
    if (!col) throw InvalidArgument("restriction on unknown column '" + r.column + "'");
    const ColumnKind kind = table.column(*col).kind;
    if (kind == ColumnKind::identifier) {
        throw InvalidArgument("identifier column '" + r.column + "' cannot be restricted");
    }
    if (is_inequality(r.op)) {
        if (!is_ordered(kind)) {
            throw InvalidArgument("operator " + std::string(to_string(r.op)) + " needs a numerical or date column; '" +
                                  r.column + "' is " + std::string(to_string(kind)));
        }
        if (!std::holds_alternative<double>(r.value) || !std::isfinite(std::get<double>(r.value))) {
            throw InvalidArgument("operator " + std::string(to_string(r.op)) + " needs a finite numeric value");
        }
        return;
    }
    if (kind != ColumnKind::categorical) {
        throw InvalidArgument("operator " + std::string(to_string(r.op)) + " needs a categorical column; '" +
                              r.column + "' is " + std::string(to_string(kind)));
    }
    if (r.op == RestrictionOp::eq && !std::holds_alternative<std::string>(r.value)) {
        throw InvalidArgument("operator = needs a text value");
    }
    if (r.op == RestrictionOp::in) {
        const auto* values = std::get_if<std::vector<std::string>>(&r.value);
        if (values == nullptr || values->size() < 2) throw InvalidArgument("operator in needs at least two values");
        if (!std::is_sorted(values->begin(), values->end()) ||
            std::adjacent_find(values->begin(), values->end()) != values->end()) {
            throw InvalidArgument("operator in needs a sorted, duplicate-free value set");
        }
    }
}

bool satisfies(const Restriction& r, const Table& table, std::size_t column, RowId row) {
    if (table.is_missing(column, row)) return false;
    switch (r.op) {
        case RestrictionOp::lt: return table.number(column, row) < std::get<double>(r.value);
        case RestrictionOp::le: return table.number(column, row) <= std::get<double>(r.value);
        case RestrictionOp::gt: return table.number(column, row) > std::get<double>(r.value);
        case RestrictionOp::ge: return table.number(column, row) >= std::get<double>(r.value);
        case RestrictionOp::eq: return table.text(column, row) == std::get<std::string>(r.value);
        case RestrictionOp::in: {
            const auto& values = std::get<std::vector<std::string>>(r.value);
            return std::binary_search(values.begin(), values.end(), table.text(column, row));
        }
    }
    return false;
}

RowSet filter_rows(const Table& table, std::span<const RowId> rows, std::span<const Restriction> restrictions) {
    std::vector<std::size_t> cols;
    cols.reserve(restrictions.size());
    for (const auto& r : restrictions) cols.push_back(table.index_of(r.column));
    RowSet out;
    for (RowId row : rows) {
        bool ok = true;
        for (std::size_t i = 0; i < restrictions.size() && ok; ++i) {
            ok = satisfies(restrictions[i], table, cols[i], row);
        }
        if (ok) out.push_back(row);
    }
    return out;
}

namespace {

std::string value_text(const Restriction& r, const Table& table) {
    if (const auto* d = std::get_if<double>(&r.value)) {
        const auto col = table.find(r.column);
        if (col && table.column(*col).kind == ColumnKind::date) return format_date(*d);
        return format_number(*d);
    }
    if (const auto* s = std::get_if<std::string>(&r.value)) return *s;
    std::string out = "{";
    const auto& values = std::get<std::vector<std::string>>(r.value);
    for (std::size_t i = 0; i < values.size(); ++i) {
        if (i) out += ", ";
        out += values[i];
    }
    return out + "}";
}

}  // namespace

std::string describe(const Restriction& r, const Table& table) {
    return r.column + " " + std::string(to_string(r.op)) + " " + value_text(r, table);
}

nlohmann::json to_json(const Restriction& r, const Table& table) {
    nlohmann::json j;
    j["column"] = r.column;
    j["op"] = std::string(to_string(r.op));
    if (const auto* d = std::get_if<double>(&r.value)) {
        const auto col = table.find(r.column);
        if (col && table.column(*col).kind == ColumnKind::date) {
            j["value"] = format_date(*d);
        } else {
            j["value"] = *d;
        }
    } else if (const auto* s = std::get_if<std::string>(&r.value)) {
        j["value"] = *s;
    } else {
        j["value"] = std::get<std::vector<std::string>>(r.value);
    }
    return j;
}

Restriction restriction_from_json(const nlohmann::json& j, const Table& table) {
    if (!j.is_object() || !j.contains("column") || !j.contains("op") || !j.contains("value")) {
        throw InvalidArgument("restriction needs column, op and value");
    }
    Restriction r;
    r.column = j.at("column").get<std::string>();
    r.op = parse_restriction_op(j.at("op").get<std::string>());
    const auto col = table.find(r.column);
    if (!col) throw InvalidArgument("restriction on unknown column '" + r.column + "'");
    const ColumnKind kind = table.column(*col).kind;
    const auto& v = j.at("value");
    if (is_inequality(r.op)) {
        if (v.is_number()) {
            r.value = v.get<double>();
        } else if (v.is_string()) {
            const std::string text = v.get<std::string>();
            auto parsed = kind == ColumnKind::date ? parse_date(text) : parse_number(text);
            if (!parsed) parsed = kind == ColumnKind::date ? parse_number(text) : std::nullopt;
            if (!parsed) throw InvalidArgument("cannot read '" + text + "' as a value for column '" + r.column + "'");
            r.value = *parsed;
        } else {
            throw InvalidArgument("inequality restriction needs a numeric or date value");
        }
    } else if (r.op == RestrictionOp::eq) {
        if (v.is_string()) {
            r.value = v.get<std::string>();
        } else if (v.is_number()) {
            r.value = v.dump();
        } else {
            throw InvalidArgument("= restriction needs a text value");
        }
    } else {
        if (!v.is_array()) throw InvalidArgument("in restriction needs an array value");
        std::vector<std::string> values;
        for (const auto& e : v) values.push_back(e.is_string() ? e.get<std::string>() : e.dump());
        std::sort(values.begin(), values.end());
        values.erase(std::unique(values.begin(), values.end()), values.end());
        if (values.size() == 1) {
            r.op = RestrictionOp::eq;
            r.value = std::move(values.front());
        } else {
            r.value = std::move(values);
        }
    }
    validate(r, table);
    return r;
}

}  // namespace tabtax
