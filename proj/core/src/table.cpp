#include "tabtax/table.hpp"

#include <algorithm>
#include <array>
#include <charconv>
#include <chrono>
#include <cmath>
#include <fstream>
#include <istream>
#include <iterator>
#include <limits>
#include <ostream>
#include <set>
#include <sstream>
#include <unordered_set>

#include "tabtax/error.hpp"

namespace tabtax {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

std::string_view trim(std::string_view s) {
    while (!s.empty() && (s.front() == ' ' || s.front() == '\t' || s.front() == '\r')) {
        s.remove_prefix(1);
    }
    while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) {
        s.remove_suffix(1);
    }
    return s;
}

std::string lower(std::string_view s) {
    std::string out(s);
    std::transform(out.begin(), out.end(), out.begin(),
                   [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
    return out;
}

// Returns the byte offset of the first invalid UTF-8 sequence, or npos.
std::size_t find_invalid_utf8(std::string_view s) {
    std::size_t i = 0;
    while (i < s.size()) {
        auto c = static_cast<unsigned char>(s[i]);
        std::size_t len = 0;
        std::uint32_t cp = 0;
        if (c < 0x80) {
            ++i;
            continue;
        } else if ((c & 0xE0) == 0xC0) {
            len = 2;
            cp = c & 0x1F;
        } else if ((c & 0xF0) == 0xE0) {
            len = 3;
            cp = c & 0x0F;
        } else if ((c & 0xF8) == 0xF0) {
            len = 4;
            cp = c & 0x07;
        } else {
            return i;
        }
        if (i + len > s.size()) return i;
        for (std::size_t k = 1; k < len; ++k) {
            auto cc = static_cast<unsigned char>(s[i + k]);
            if ((cc & 0xC0) != 0x80) return i;
            cp = (cp << 6) | (cc & 0x3F);
        }
        // Overlong encodings and surrogates.
        if ((len == 2 && cp < 0x80) || (len == 3 && cp < 0x800) || (len == 4 && cp < 0x10000) ||
            cp > 0x10FFFF || (cp >= 0xD800 && cp <= 0xDFFF)) {
            return i;
        }
        i += len;
    }
    return std::string_view::npos;
}

bool name_looks_like_identifier(std::string_view name) {
    const std::string n = lower(trim(name));
    if (n == "id" || n == "identifier" || n == "uuid" || n == "guid" || n == "key") return true;
    for (std::string_view suffix : {"_id", "-id", " id", ".id"}) {
        if (n.size() > suffix.size() && n.ends_with(suffix)) return true;
    }
    for (std::string_view prefix : {"id_", "id-", "id "}) {
        if (n.starts_with(prefix)) return true;
    }
    // camelCase suffix such as userId or carID
    if (name.size() > 2 && name.ends_with("Id") && std::islower(static_cast<unsigned char>(name[name.size() - 3]))) {
        return true;
    }
    if (name.size() > 2 && name.ends_with("ID") && std::islower(static_cast<unsigned char>(name[name.size() - 3]))) {
        return true;
    }
    return false;
}

bool parse_int(std::string_view s, int& out) {
    if (s.empty()) return false;
    auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), out);
    return ec == std::errc{} && p == s.data() + s.size();
}

std::optional<double> days_from_civil(int y, int m, int d) {
    using namespace std::chrono;
    const year_month_day ymd{year{y}, month{static_cast<unsigned>(m)}, day{static_cast<unsigned>(d)}};
    if (!ymd.ok()) return std::nullopt;
    return static_cast<double>(sys_days{ymd}.time_since_epoch().count());
}

// Parses "HH:MM[:SS[.fff]]" followed by an optional zone designator.
std::optional<double> parse_time_of_day(std::string_view t) {
    if (t.size() < 5 || t[2] != ':') return std::nullopt;
    int hh = 0;
    int mm = 0;
    if (!parse_int(t.substr(0, 2), hh) || !parse_int(t.substr(3, 2), mm)) return std::nullopt;
    double seconds = 0.0;
    std::size_t pos = 5;
    if (pos < t.size() && t[pos] == ':') {
        std::size_t end = pos + 1;
        while (end < t.size() && (std::isdigit(static_cast<unsigned char>(t[end])) || t[end] == '.')) ++end;
        const std::string_view sec = t.substr(pos + 1, end - pos - 1);
        auto [p, ec] = std::from_chars(sec.data(), sec.data() + sec.size(), seconds);
        if (ec != std::errc{} || p != sec.data() + sec.size()) return std::nullopt;
        pos = end;
    }
    double offset_minutes = 0.0;
    const std::string_view zone = t.substr(pos);
    if (zone == "Z") {
        // UTC
    } else if (!zone.empty()) {
        if (zone.size() != 6 || (zone[0] != '+' && zone[0] != '-') || zone[3] != ':') return std::nullopt;
        int zh = 0;
        int zm = 0;
        if (!parse_int(zone.substr(1, 2), zh) || !parse_int(zone.substr(4, 2), zm)) return std::nullopt;
        offset_minutes = (zone[0] == '+' ? 1.0 : -1.0) * (zh * 60 + zm);
    }
    if (hh > 23 || mm > 59 || seconds < 0.0 || seconds >= 61.0) return std::nullopt;
    return (hh * 3600.0 + mm * 60.0 + seconds - offset_minutes * 60.0) / 86400.0;
}

std::vector<std::string_view> split(std::string_view s, char sep) {
    std::vector<std::string_view> parts;
    std::size_t start = 0;
    for (std::size_t i = 0; i <= s.size(); ++i) {
        if (i == s.size() || s[i] == sep) {
            parts.push_back(s.substr(start, i - start));
            start = i + 1;
        }
    }
    return parts;
}

struct CsvRecord {
    std::vector<std::string> fields;
    std::size_t line = 0;
};

// RFC-4180 style record splitter. Quoted fields may span lines and escape
// the quote character by doubling it.
std::vector<CsvRecord> split_records(std::string_view text, char delim, char quote) {
    std::vector<CsvRecord> records;
    CsvRecord current;
    std::string field;
    bool in_quotes = false;
    bool field_started = false;
    bool was_quoted = false;
    std::size_t line = 1;
    current.line = 1;

    auto end_field = [&] {
        current.fields.push_back(std::move(field));
        field.clear();
        field_started = false;
        was_quoted = false;
    };
    auto end_record = [&] {
        end_field();
        const bool blank = current.fields.size() == 1 && current.fields[0].empty();
        if (!blank) records.push_back(std::move(current));
        current = CsvRecord{};
        current.line = line;
    };

    for (std::size_t i = 0; i < text.size(); ++i) {
        const char c = text[i];
        if (in_quotes) {
            if (c == quote) {
                if (i + 1 < text.size() && text[i + 1] == quote) {
                    field.push_back(quote);
                    ++i;
                } else {
                    in_quotes = false;
                }
            } else {
                if (c == '\n') ++line;
                field.push_back(c);
            }
            continue;
        }
        if (c == quote && !field_started) {
            in_quotes = true;
            field_started = true;
            was_quoted = true;
        } else if (c == delim) {
            end_field();
        } else if (c == '\n') {
            ++line;
            end_record();
        } else if (c == '\r') {
            // swallowed; CRLF handled by the following '\n'
        } else {
            if (was_quoted && c != ' ') {
                throw LoadError("unexpected character after closing quote on line " + std::to_string(line),
                                static_cast<long>(records.size()));
            }
            field.push_back(c);
            field_started = true;
        }
    }
    if (in_quotes) {
        throw LoadError("unterminated quoted field starting on line " + std::to_string(current.line),
                        static_cast<long>(records.size()));
    }
    if (field_started || !current.fields.empty() || !field.empty()) end_record();
    return records;
}

bool needs_quoting(std::string_view s, char delim, char quote) {
    if (s.empty()) return false;
    if (s.front() == ' ' || s.back() == ' ') return true;
    return s.find_first_of(std::string{delim, quote, '\n', '\r'}) != std::string_view::npos;
}

template <class Missing, class Number, class Text>
ColumnStats accumulate_stats(ColumnKind kind, std::span<const RowId> rows, Missing missing, Number number,
                             Text text) {
    ColumnStats s;
    double sum = 0.0;
    for (RowId r : rows) {
        if (missing(r)) {
            ++s.missing_count;
            continue;
        }
        ++s.count;
        if (is_ordered(kind)) {
            const double v = number(r);
            s.min = s.min ? std::min(*s.min, v) : v;
            s.max = s.max ? std::max(*s.max, v) : v;
            sum += v;
        } else {
            ++s.value_counts[text(r)];
        }
    }
    if (is_ordered(kind) && s.count > 0) {
        const double mean = sum / static_cast<double>(s.count);
        double ss = 0.0;
        for (RowId r : rows) {
            if (!missing(r)) ss += (number(r) - mean) * (number(r) - mean);
        }
        // Summation error can push the mean a hair outside [min, max].
        s.mean = std::clamp(mean, *s.min, *s.max);
        s.std = std::sqrt(ss / static_cast<double>(s.count));
    }
    s.distinct_count = s.value_counts.size();
    return s;
}

}  // namespace

std::string_view to_string(ColumnKind kind) {
    switch (kind) {
        case ColumnKind::numerical: return "numerical";
        case ColumnKind::date: return "date";
        case ColumnKind::categorical: return "categorical";
        case ColumnKind::identifier: return "identifier";
    }
    return "categorical";
}

ColumnKind parse_column_kind(std::string_view text) {
    if (text == "numerical" || text == "numeric" || text == "number") return ColumnKind::numerical;
    if (text == "date") return ColumnKind::date;
    if (text == "categorical" || text == "category") return ColumnKind::categorical;
    if (text == "identifier" || text == "id") return ColumnKind::identifier;
    throw InvalidArgument("unknown column kind '" + std::string(text) + "'");
}

TableFormat parse_table_format(std::string_view text) {
    if (text == "csv") return TableFormat::csv;
    if (text == "tsv") return TableFormat::tsv;
    throw InvalidArgument("unknown table format '" + std::string(text) + "' (expected csv or tsv)");
}

bool is_missing_token(std::string_view text) {
    text = trim(text);
    return text.empty() || text == "NA" || text == "N/A" || text == "n/a" || text == "null" ||
           text == "NULL" || text == "?";
}

std::optional<double> parse_number(std::string_view text) {
    text = trim(text);
    if (!text.empty() && text.front() == '+') text.remove_prefix(1);
    if (text.empty()) return std::nullopt;
    double value = 0.0;
    auto [p, ec] = std::from_chars(text.data(), text.data() + text.size(), value);
    if (ec != std::errc{} || p != text.data() + text.size() || !std::isfinite(value)) return std::nullopt;
    return value;
}

std::optional<double> parse_date(std::string_view text) {
    text = trim(text);
    if (text.size() < 8) return std::nullopt;

    // ISO-8601: YYYY-MM-DD with optional time part.
    if (text.size() >= 10 && text[4] == '-' && text[7] == '-') {
        int y = 0;
        int m = 0;
        int d = 0;
        if (!parse_int(text.substr(0, 4), y) || !parse_int(text.substr(5, 2), m) ||
            !parse_int(text.substr(8, 2), d)) {
            return std::nullopt;
        }
        auto days = days_from_civil(y, m, d);
        if (!days) return std::nullopt;
        if (text.size() == 10) return days;
        if (text[10] != 'T' && text[10] != ' ') return std::nullopt;
        auto fraction = parse_time_of_day(text.substr(11));
        if (!fraction) return std::nullopt;
        return *days + *fraction;
    }

    for (char sep : {'/', '.', '-'}) {
        const auto parts = split(text, sep);
        if (parts.size() != 3) continue;
        int a = 0;
        int b = 0;
        int c = 0;
        if (!parse_int(parts[0], a) || !parse_int(parts[1], b) || !parse_int(parts[2], c)) return std::nullopt;
        if (parts[0].size() == 4) {
            // YYYY/MM/DD
            return days_from_civil(a, b, c);
        }
        if (parts[2].size() != 4) return std::nullopt;
        // Day-first unless the first field cannot be a day-of-month pairing.
        if (a > 12) return days_from_civil(c, b, a);
        if (b > 12) return days_from_civil(c, a, b);
        return days_from_civil(c, b, a);
    }
    return std::nullopt;
}

std::string format_number(double value) {
    std::array<char, 64> buf{};
    auto [p, ec] = std::to_chars(buf.data(), buf.data() + buf.size(), value);
    return std::string(buf.data(), p);
}

std::string format_date(double days) {
    using namespace std::chrono;
    double whole = std::floor(days);
    long seconds = std::lround((days - whole) * 86400.0);
    if (seconds == 86400) {
        whole += 1.0;
        seconds = 0;
    }
    const year_month_day ymd{sys_days{std::chrono::days{static_cast<long>(whole)}}};
    char buf[48];
    if (seconds == 0) {
        std::snprintf(buf, sizeof buf, "%04d-%02u-%02u", static_cast<int>(ymd.year()),
                      static_cast<unsigned>(ymd.month()), static_cast<unsigned>(ymd.day()));
    } else {
        std::snprintf(buf, sizeof buf, "%04d-%02u-%02uT%02ld:%02ld:%02ld", static_cast<int>(ymd.year()),
                      static_cast<unsigned>(ymd.month()), static_cast<unsigned>(ymd.day()), seconds / 3600,
                      (seconds / 60) % 60, seconds % 60);
    }
    return buf;
}

ColumnKind infer_column_kind(std::span<const std::string> values, std::string_view name) {
    std::size_t present = 0;
    std::size_t numbers = 0;
    std::size_t dates = 0;
    std::unordered_set<std::string_view> distinct;
    for (const auto& v : values) {
        if (is_missing_token(v)) continue;
        ++present;
        const std::string_view t = trim(v);
        distinct.insert(t);
        if (parse_number(t)) {
            ++numbers;
        } else if (parse_date(t)) {
            ++dates;
        }
    }
    if (present == 0) return ColumnKind::categorical;

    const double n = static_cast<double>(present);
    const bool mostly_distinct = distinct.size() >= 20 && static_cast<double>(distinct.size()) / n >= 0.8;
    if (mostly_distinct && name_looks_like_identifier(name)) return ColumnKind::identifier;
    if (static_cast<double>(numbers) >= 0.95 * n) return ColumnKind::numerical;
    if (static_cast<double>(dates) >= 0.95 * n) return ColumnKind::date;
    if (mostly_distinct) return ColumnKind::identifier;
    return ColumnKind::categorical;
}

Table::Table(std::string name, std::vector<std::string> column_names,
             std::vector<std::vector<std::string>> raw_columns)
    : name_(std::move(name)) {
    if (column_names.size() != raw_columns.size()) {
        throw InvalidArgument("column name count does not match column count");
    }
    row_count_ = raw_columns.empty() ? 0 : raw_columns.front().size();
    std::set<std::string, std::less<>> seen;
    columns_.reserve(column_names.size());
    for (std::size_t c = 0; c < column_names.size(); ++c) {
        if (!seen.insert(column_names[c]).second) {
            throw LoadError("duplicate column name '" + column_names[c] + "'", 0, column_names[c]);
        }
        if (raw_columns[c].size() != row_count_) throw InvalidArgument("ragged columns");
        Column col;
        col.meta.name = std::move(column_names[c]);
        col.raw = std::move(raw_columns[c]);
        col.meta.kind = infer_column_kind(col.raw, col.meta.name);
        col.meta.included = col.meta.kind != ColumnKind::identifier;
        retype(col);
        columns_.push_back(std::move(col));
    }
}

std::vector<ColumnMeta> Table::columns() const {
    std::vector<ColumnMeta> out;
    out.reserve(columns_.size());
    for (const auto& c : columns_) out.push_back(c.meta);
    return out;
}

std::optional<std::size_t> Table::find(std::string_view column_name) const {
    for (std::size_t i = 0; i < columns_.size(); ++i) {
        if (columns_[i].meta.name == column_name) return i;
    }
    return std::nullopt;
}

std::size_t Table::index_of(std::string_view column_name) const {
    if (auto i = find(column_name)) return *i;
    throw NotFound("unknown column '" + std::string(column_name) + "'");
}

Cell Table::cell(std::size_t col, RowId row) const {
    const Column& c = columns_.at(col);
    if (c.missing.at(row)) return std::monostate{};
    switch (c.meta.kind) {
        case ColumnKind::numerical: return c.values[row];
        case ColumnKind::date: return DateValue{c.values[row]};
        case ColumnKind::categorical:
        case ColumnKind::identifier: return c.raw[row];
    }
    return std::monostate{};
}

void Table::set_kind(std::size_t col, ColumnKind kind) {
    Column& c = columns_.at(col);
    c.meta.kind = kind;
    if (kind == ColumnKind::identifier) c.meta.included = false;
    retype(c);
}

void Table::set_included(std::size_t col, bool included) {
    Column& c = columns_.at(col);
    if (included && c.meta.kind == ColumnKind::identifier) {
        throw InvalidArgument("identifier column '" + c.meta.name + "' cannot be included");
    }
    c.meta.included = included;
}

void Table::retype(Column& column) {
    const std::size_t n = column.raw.size();
    column.values.assign(n, kNaN);
    column.missing.assign(n, 0);
    for (std::size_t r = 0; r < n; ++r) {
        const std::string& raw = column.raw[r];
        if (is_missing_token(raw)) {
            column.missing[r] = 1;
            continue;
        }
        if (column.meta.kind == ColumnKind::numerical) {
            auto v = parse_number(raw);
            if (v) column.values[r] = *v; else column.missing[r] = 1;
        } else if (column.meta.kind == ColumnKind::date) {
            auto v = parse_date(raw);
            if (v) column.values[r] = *v; else column.missing[r] = 1;
        }
    }
    column.meta.stats = accumulate_stats(
        column.meta.kind, all_rows(n), [&](RowId r) { return column.missing[r] != 0; },
        [&](RowId r) { return column.values[r]; }, [&](RowId r) -> const std::string& { return column.raw[r]; });
}

ColumnStats column_stats(const Table& table, std::size_t column, std::span<const RowId> rows) {
    return accumulate_stats(
        table.column(column).kind, rows, [&](RowId r) { return table.is_missing(column, r); },
        [&](RowId r) { return table.number(column, r); },
        [&](RowId r) -> const std::string& { return table.text(column, r); });
}

ColumnStats column_stats(const Table& table, std::string_view column) {
    const std::size_t c = table.index_of(column);
    return column_stats(table, c, all_rows(table.row_count()));
}

Table load_table(std::string_view text, TableFormat format, const CsvOptions& options, std::string name) {
    if (text.starts_with("\xEF\xBB\xBF")) text.remove_prefix(3);
    if (trim(text).empty()) throw LoadError("empty input: a header row is required", 0);

    const char delim = options.delimiter.value_or(format == TableFormat::tsv ? '\t' : ',');
    auto records = split_records(text, delim, options.quote);
    if (records.empty()) throw LoadError("empty input: a header row is required", 0);

    std::vector<std::string> names;
    names.reserve(records[0].fields.size());
    for (std::size_t c = 0; c < records[0].fields.size(); ++c) {
        std::string n(options.trim ? trim(records[0].fields[c]) : std::string_view(records[0].fields[c]));
        if (n.empty()) n = "column_" + std::to_string(c + 1);
        names.push_back(std::move(n));
    }
    const std::size_t width = names.size();

    std::vector<std::vector<std::string>> columns(width);
    for (auto& col : columns) col.reserve(records.size() - 1);

    for (std::size_t r = 0; r < records.size(); ++r) {
        auto& fields = records[r].fields;
        const long data_row = static_cast<long>(r);
        for (std::size_t c = 0; c < fields.size(); ++c) {
            const std::size_t bad = find_invalid_utf8(fields[c]);
            if (bad != std::string_view::npos) {
                const std::string col = c < width ? names[c] : "#" + std::to_string(c + 1);
                throw LoadError("undecodable bytes (invalid UTF-8) in row " + std::to_string(data_row) +
                                    ", column '" + col + "'",
                                data_row, col);
            }
        }
        if (r == 0) continue;
        // Trailing empty fields beyond the header width are tolerated.
        while (fields.size() > width && trim(fields.back()).empty()) fields.pop_back();
        if (fields.size() > width) {
            throw LoadError("row " + std::to_string(data_row) + " (line " + std::to_string(records[r].line) +
                                ") has " + std::to_string(fields.size()) + " fields but the header has " +
                                std::to_string(width),
                            data_row);
        }
        for (std::size_t c = 0; c < width; ++c) {
            if (c < fields.size()) {
                columns[c].emplace_back(options.trim ? std::string(trim(fields[c])) : std::move(fields[c]));
            } else {
                columns[c].emplace_back();
            }
        }
    }
    return Table(std::move(name), std::move(names), std::move(columns));
}

Table load_table(std::istream& in, TableFormat format, const CsvOptions& options, std::string name) {
    const std::string text{std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
    return load_table(std::string_view(text), format, options, std::move(name));
}

Table load_table_file(const std::string& path, TableFormat format, const CsvOptions& options) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error(Error::Category::io, "cannot open '" + path + "'");
    std::string stem = path;
    if (auto slash = stem.find_last_of("/\\"); slash != std::string::npos) stem = stem.substr(slash + 1);
    if (auto dot = stem.find_last_of('.'); dot != std::string::npos && dot > 0) stem = stem.substr(0, dot);
    return load_table(in, format, options, stem);
}

void write_table(std::ostream& out, const Table& table, TableFormat format) {
    const char delim = format == TableFormat::tsv ? '\t' : ',';
    auto emit = [&](std::string_view s) {
        if (needs_quoting(s, delim, '"')) {
            out << '"';
            for (char c : s) {
                if (c == '"') out << '"';
                out << c;
            }
            out << '"';
        } else {
            out << s;
        }
    };
    for (std::size_t c = 0; c < table.column_count(); ++c) {
        if (c) out << delim;
        emit(table.column(c).name);
    }
    out << '\n';
    for (RowId r = 0; r < table.row_count(); ++r) {
        for (std::size_t c = 0; c < table.column_count(); ++c) {
            if (c) out << delim;
            const Cell cell = table.cell(c, r);
            if (std::holds_alternative<double>(cell)) {
                emit(format_number(std::get<double>(cell)));
            } else if (std::holds_alternative<DateValue>(cell)) {
                emit(format_date(std::get<DateValue>(cell).days));
            } else if (std::holds_alternative<std::string>(cell)) {
                emit(std::get<std::string>(cell));
            }
        }
        out << '\n';
    }
}

void apply_column_config(Table& table, const nlohmann::json& config) {
    if (!config.is_object()) throw InvalidArgument("column config must be an object keyed by column name");
    for (const auto& [name, entry] : config.items()) {
        const auto idx = table.find(name);
        if (!idx) throw NotFound("column config names unknown column '" + name + "'");
        if (!entry.is_object()) throw InvalidArgument("column config for '" + name + "' must be an object");
        if (entry.contains("kind")) table.set_kind(*idx, parse_column_kind(entry.at("kind").get<std::string>()));
        if (entry.contains("included")) table.set_included(*idx, entry.at("included").get<bool>());
    }
}

nlohmann::json column_to_json(const ColumnMeta& meta) {
    nlohmann::json j;
    j["name"] = meta.name;
    j["kind"] = std::string(to_string(meta.kind));
    j["included"] = meta.included;
    nlohmann::json s;
    s["count"] = meta.stats.count;
    s["missing_count"] = meta.stats.missing_count;
    if (is_ordered(meta.kind)) {
        auto opt = [](const std::optional<double>& v) { return v ? nlohmann::json(*v) : nlohmann::json(nullptr); };
        s["min"] = opt(meta.stats.min);
        s["max"] = opt(meta.stats.max);
        s["mean"] = opt(meta.stats.mean);
        s["std"] = opt(meta.stats.std);
    } else {
        s["distinct_count"] = meta.stats.distinct_count;
        // Large value maps (identifiers) are summarized by the top entries.
        std::vector<std::pair<std::string, std::size_t>> top(meta.stats.value_counts.begin(),
                                                             meta.stats.value_counts.end());
        std::stable_sort(top.begin(), top.end(), [](const auto& a, const auto& b) { return a.second > b.second; });
        if (top.size() > 50) top.resize(50);
        nlohmann::json counts = nlohmann::json::object();
        for (const auto& [value, count] : top) counts[value] = count;
        s["value_counts"] = std::move(counts);
    }
    j["stats"] = std::move(s);
    return j;
}

}  // namespace tabtax
