#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <iosfwd>
#include <span>
#include <string_view>
#include <utility>
#include <vector>

#include "json.hpp"
#include "tabtax/encoding.hpp"

namespace tabtax {

enum class Distance { euclidean, cosine };

std::string_view to_string(Distance d);
Distance parse_distance(std::string_view text);

double distance(Distance kind, std::span<const double> a, std::span<const double> b);

struct TrainConfig {
    std::size_t side = 0;  // 0 selects clamp(ceil(n^(1/4)), 2, 10)
    std::size_t epochs = 20;
    double alpha0 = 0.5;  // decays linearly to alpha0 / 100
    double beta0 = 0.0;   // 0 selects side / 2; decays linearly to 0.5
    Distance distance = Distance::euclidean;
    double weight_lr = 0.05;
    double lambda = 1e-3;
    std::size_t batch_size = 32;
    std::uint64_t seed = 42;
};

std::size_t default_side(std::size_t rows);
void validate(const TrainConfig& config);
nlohmann::json to_json(const TrainConfig& config);
TrainConfig train_config_from_json(const nlohmann::json& j, TrainConfig defaults = {});

/// Square grid of unit vectors, stored in weighted feature space. Unit i sits
/// at grid row i / side, column i % side.
class SomMap {
public:
    SomMap() = default;
    SomMap(std::size_t side, std::size_t dims);

    std::size_t side() const noexcept { return side_; }
    std::size_t dims() const noexcept { return dims_; }
    std::size_t unit_count() const noexcept { return side_ * side_; }

    std::span<const double> unit(std::size_t i) const { return {units_.data() + i * dims_, dims_}; }
    std::span<double> unit(std::size_t i) { return {units_.data() + i * dims_, dims_}; }

    std::pair<std::size_t, std::size_t> coords(std::size_t i) const { return {i / side_, i % side_}; }
    /// Chebyshev distance on the grid.
    std::size_t grid_distance(std::size_t a, std::size_t b) const;

    const std::vector<double>& data() const noexcept { return units_; }

    friend bool operator==(const SomMap&, const SomMap&) = default;

private:
    std::size_t side_ = 0;
    std::size_t dims_ = 0;
    std::vector<double> units_;
};

/// Per-feature importance weights, kept nonnegative with mean 1.
struct FeatureWeights {
    std::vector<double> w;

    static FeatureWeights uniform(std::size_t dims) { return {std::vector<double>(dims, 1.0)}; }
    std::size_t size() const noexcept { return w.size(); }
    friend bool operator==(const FeatureWeights&, const FeatureWeights&) = default;
};

struct TrainTrace {
    double initial_quantization_error = 0.0;
    std::vector<double> quantization_error;  // per epoch, after the epoch
    std::vector<double> mean_loss;
    std::vector<std::vector<double>> weights;

    void write_csv(std::ostream& out) const;
};

struct TrainResult {
    SomMap map;
    FeatureWeights weights;
    TrainTrace trace;
};

/// Units copy distinct data rows chosen by a seeded shuffle, or rows drawn
/// with replacement when there are fewer rows than units.
SomMap init_map(const TrainConfig& config, const FeatureMatrix& data);

/// Unit closest to w * x; ties go to the lowest index.
std::size_t bmu(const SomMap& map, const FeatureWeights& weights, std::span<const double> x,
                Distance dist = Distance::euclidean);

/// Moves every unit towards w * x by theta * alpha, where theta is a Gaussian
/// of the grid distance to the BMU with radius beta.
void som_update(SomMap& map, const FeatureWeights& weights, std::span<const double> x, std::size_t bmu_index,
                double alpha, double beta);

double neighborhood(std::size_t grid_distance, double beta);

/// 1 - (distance to the BMU) / (mean distance to all units). Zero when every
/// distance is zero.
double wsom_loss(const SomMap& map, const FeatureWeights& weights, std::span<const double> x,
                 Distance dist = Distance::euclidean);

/// Objective minimized by the weight steps, averaged over the batch:
/// mean(1 - wsom_loss) + lambda * |w|^2.
double weight_objective(const FeatureWeights& weights, const SomMap& map, const FeatureMatrix& data,
                        std::span<const std::size_t> batch, double lambda, Distance dist = Distance::euclidean);

/// Analytic gradient of weight_objective. The min is resolved to the current
/// BMU (lowest index on ties) and units are held constant.
std::vector<double> weight_gradient(const FeatureWeights& weights, const SomMap& map, const FeatureMatrix& data,
                                    std::span<const std::size_t> batch, double lambda,
                                    Distance dist = Distance::euclidean);

/// One gradient step followed by clamping to >= 0 and rescaling to mean 1.
FeatureWeights weight_step(const FeatureWeights& weights, const SomMap& map, const FeatureMatrix& data,
                           std::span<const std::size_t> batch, double weight_lr, double lambda,
                           Distance dist = Distance::euclidean);

/// Mean distance from w * x to its BMU.
double quantization_error(const SomMap& map, const FeatureWeights& weights, const FeatureMatrix& data,
                          Distance dist = Distance::euclidean);

using ProgressFn = std::function<void(double)>;

TrainResult train(const FeatureMatrix& data, const TrainConfig& config, const ProgressFn& progress = {});

/// BMU of every row of `data`.
std::vector<std::size_t> assign_bmus(const SomMap& map, const FeatureWeights& weights, const FeatureMatrix& data,
                                     Distance dist = Distance::euclidean);

}  // namespace tabtax
