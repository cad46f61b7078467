#pragma once

#include <cstddef>
#include <set>
#include <span>
#include <string>
#include <vector>

#include "tabtax/rowset.hpp"
#include "tabtax/table.hpp"

namespace tabtax {

enum class FeatureEncoding { zscore_numeric, one_hot, zscore_epoch_days };

struct Feature {
    std::size_t column = 0;
    FeatureEncoding encoding = FeatureEncoding::zscore_numeric;
    std::string category;  // one-hot only
    double center = 0.0;   // z-score only
    double scale = 1.0;    // z-score only; 1 for constant columns
};

/// Dense row-major matrix of encoded rows. Row i of the matrix is table row
/// `rows[i]`; rows with a missing value in any used column are listed in
/// `omitted` instead.
struct FeatureMatrix {
    std::size_t dims = 0;
    std::vector<double> values;
    RowSet rows;
    RowSet omitted;
    std::vector<Feature> features;

    std::size_t size() const noexcept { return rows.size(); }
    std::span<const double> row(std::size_t i) const { return {values.data() + i * dims, dims}; }
    std::span<double> row(std::size_t i) { return {values.data() + i * dims, dims}; }

    /// Distinct source columns in feature order.
    std::vector<std::size_t> columns() const;
};

/// Z-scores ordered columns (population std, constant columns divided by 1)
/// and one-hot encodes categorical columns over the given rows. Identifier
/// and non-included columns never participate.
FeatureMatrix encode_for_clustering(const Table& table, std::span<const RowId> rows,
                                    const std::set<std::string, std::less<>>& exclude = {});

/// Builds a matrix directly from values; used by tests and benchmarks that
/// train maps on synthetic data.
FeatureMatrix make_feature_matrix(std::size_t dims, std::vector<double> values);

}  // namespace tabtax
