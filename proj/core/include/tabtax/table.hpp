#pragma once

#include <cstddef>
#include <iosfwd>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "json.hpp"
#include "tabtax/rowset.hpp"

namespace tabtax {

enum class ColumnKind { numerical, date, categorical, identifier };

std::string_view to_string(ColumnKind kind);
ColumnKind parse_column_kind(std::string_view text);

inline bool is_ordered(ColumnKind kind) {
    return kind == ColumnKind::numerical || kind == ColumnKind::date;
}

/// A date cell, stored as (possibly fractional) days since 1970-01-01.
struct DateValue {
    double days = 0.0;
    friend bool operator==(const DateValue&, const DateValue&) = default;
};

/// A typed cell. Which alternative is populated follows the column kind:
/// numbers for numerical columns, dates for date columns and text otherwise.
using Cell = std::variant<std::monostate, double, DateValue, std::string>;

struct ColumnStats {
    std::size_t count = 0;  // non-missing cells
    std::size_t missing_count = 0;

    // Ordered kinds only.
    std::optional<double> min;
    std::optional<double> max;
    std::optional<double> mean;
    std::optional<double> std;

    // Categorical and identifier kinds only.
    std::map<std::string, std::size_t> value_counts;
    std::size_t distinct_count = 0;
};

struct ColumnMeta {
    std::string name;
    ColumnKind kind = ColumnKind::categorical;
    bool included = true;
    ColumnStats stats;
};

enum class TableFormat { csv, tsv };

TableFormat parse_table_format(std::string_view text);

struct CsvOptions {
    std::optional<char> delimiter;  // defaults to ',' for csv and '\t' for tsv
    char quote = '"';
    bool trim = true;
};

/// In-memory dataset. Raw cell text is kept so that a column can be re-typed
/// when the user overrides its kind; typed values are cached per column.
class Table {
public:
    Table() = default;
    Table(std::string name, std::vector<std::string> column_names,
          std::vector<std::vector<std::string>> raw_columns);

    const std::string& name() const noexcept { return name_; }
    std::size_t row_count() const noexcept { return row_count_; }
    std::size_t column_count() const noexcept { return columns_.size(); }

    const ColumnMeta& column(std::size_t index) const { return columns_.at(index).meta; }
    std::vector<ColumnMeta> columns() const;

    std::optional<std::size_t> find(std::string_view column_name) const;
    /// Throws NotFound.
    std::size_t index_of(std::string_view column_name) const;

    bool is_missing(std::size_t col, RowId row) const { return columns_[col].missing[row] != 0; }
    /// Numeric value for ordered columns (epoch days for dates); NaN when missing.
    double number(std::size_t col, RowId row) const { return columns_[col].values[row]; }
    /// Trimmed source text of the cell.
    const std::string& text(std::size_t col, RowId row) const { return columns_[col].raw[row]; }
    Cell cell(std::size_t col, RowId row) const;

    void set_kind(std::size_t col, ColumnKind kind);
    void set_included(std::size_t col, bool included);

private:
    struct Column {
        ColumnMeta meta;
        std::vector<std::string> raw;
        std::vector<double> values;
        std::vector<unsigned char> missing;
    };

    void retype(Column& column);

    std::string name_;
    std::size_t row_count_ = 0;
    std::vector<Column> columns_;
};

/// Parses delimited text. The first record holds the column names.
Table load_table(std::string_view text, TableFormat format, const CsvOptions& options = {},
                 std::string name = {});
Table load_table(std::istream& in, TableFormat format, const CsvOptions& options = {},
                 std::string name = {});
Table load_table_file(const std::string& path, TableFormat format, const CsvOptions& options = {});

void write_table(std::ostream& out, const Table& table, TableFormat format);

bool is_missing_token(std::string_view text);
std::optional<double> parse_number(std::string_view text);
std::optional<double> parse_date(std::string_view text);
std::string format_number(double value);
std::string format_date(double days);

/// Classifies a column from its raw cells: numerical if at least 95% of the
/// non-missing cells parse as numbers, date if 95% parse as dates, identifier
/// if values are mostly distinct (ratio >= 0.8, at least 20 values), and
/// categorical otherwise. An id-like name promotes a mostly-distinct column to
/// identifier before the numeric test.
ColumnKind infer_column_kind(std::span<const std::string> values, std::string_view name);

ColumnStats column_stats(const Table& table, std::string_view column);
ColumnStats column_stats(const Table& table, std::size_t column, std::span<const RowId> rows);

/// Applies {column: {"kind": ..., "included": ...}} overrides.
void apply_column_config(Table& table, const nlohmann::json& config);

nlohmann::json column_to_json(const ColumnMeta& meta);

}  // namespace tabtax
