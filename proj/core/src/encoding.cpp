#include "tabtax/encoding.hpp"

#include <cmath>
#include <map>

#include "tabtax/error.hpp"

namespace tabtax {

std::vector<std::size_t> FeatureMatrix::columns() const {
    std::vector<std::size_t> out;
    for (const auto& f : features) {
        if (out.empty() || out.back() != f.column) out.push_back(f.column);
    }
    return out;
}

FeatureMatrix encode_for_clustering(const Table& table, std::span<const RowId> rows,
                                    const std::set<std::string, std::less<>>& exclude) {
    for (const auto& name : exclude) table.index_of(name);

    std::vector<std::size_t> used;
    for (std::size_t c = 0; c < table.column_count(); ++c) {
        const ColumnMeta& meta = table.column(c);
        if (meta.kind == ColumnKind::identifier || !meta.included || exclude.contains(meta.name)) continue;
        used.push_back(c);
    }
    if (used.empty()) throw InvalidArgument("no usable columns to encode");

    FeatureMatrix m;
    for (RowId r : rows) {
        if (r >= table.row_count()) throw InvalidArgument("row id " + std::to_string(r) + " out of range");
        bool complete = true;
        for (std::size_t c : used) {
            if (table.is_missing(c, r)) {
                complete = false;
                break;
            }
        }
        (complete ? m.rows : m.omitted).push_back(r);
    }
    if (m.rows.empty()) throw InvalidArgument("no usable rows to encode (all rows have missing values)");

    const double n = static_cast<double>(m.rows.size());
    for (std::size_t c : used) {
        const ColumnMeta& meta = table.column(c);
        if (is_ordered(meta.kind)) {
            double sum = 0.0;
            for (RowId r : m.rows) sum += table.number(c, r);
            const double mean = sum / n;
            double ss = 0.0;
            for (RowId r : m.rows) ss += (table.number(c, r) - mean) * (table.number(c, r) - mean);
            const double sd = std::sqrt(ss / n);
            Feature f;
            f.column = c;
            f.encoding = meta.kind == ColumnKind::date ? FeatureEncoding::zscore_epoch_days
                                                       : FeatureEncoding::zscore_numeric;
            f.center = mean;
            f.scale = sd > 0.0 ? sd : 1.0;
            m.features.push_back(std::move(f));
        } else {
            std::map<std::string, int> levels;
            for (RowId r : m.rows) levels.emplace(table.text(c, r), 0);
            for (const auto& [value, unused] : levels) {
                Feature f;
                f.column = c;
                f.encoding = FeatureEncoding::one_hot;
                f.category = value;
                m.features.push_back(std::move(f));
            }
        }
    }

    m.dims = m.features.size();
    m.values.assign(m.rows.size() * m.dims, 0.0);
    for (std::size_t i = 0; i < m.rows.size(); ++i) {
        auto out = m.row(i);
        const RowId r = m.rows[i];
        for (std::size_t j = 0; j < m.dims; ++j) {
            const Feature& f = m.features[j];
            if (f.encoding == FeatureEncoding::one_hot) {
                out[j] = table.text(f.column, r) == f.category ? 1.0 : 0.0;
            } else {
                out[j] = (table.number(f.column, r) - f.center) / f.scale;
            }
        }
    }
    return m;
}

FeatureMatrix make_feature_matrix(std::size_t dims, std::vector<double> values) {
    if (dims == 0 || values.size() % dims != 0) throw InvalidArgument("values do not form whole rows");
    FeatureMatrix m;
    m.dims = dims;
    m.values = std::move(values);
    m.rows = all_rows(m.values.size() / dims);
    for (std::size_t j = 0; j < dims; ++j) {
        Feature f;
        f.column = j;
        m.features.push_back(f);
    }
    return m;
}

}  // namespace tabtax
