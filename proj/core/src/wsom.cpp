#include "tabtax/wsom.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <ostream>
#include <random>

#include "tabtax/error.hpp"

namespace tabtax {

namespace {

constexpr double kSnapToZero = 1e-150;

void require_finite(std::span<const double> x) {
    for (double v : x) {
        if (!std::isfinite(v)) throw InvalidArgument("input vector has non-finite components");
    }
}

void require_dims(const SomMap& map, const FeatureWeights& weights, std::span<const double> x) {
    if (x.size() != map.dims() || weights.size() != map.dims()) {
        throw InvalidArgument("dimension mismatch between input, weights and map");
    }
}

double dot(std::span<const double> a, std::span<const double> b) {
    return std::inner_product(a.begin(), a.end(), b.begin(), 0.0);
}

void weighted(const FeatureWeights& weights, std::span<const double> x, std::vector<double>& out) {
    out.resize(x.size());
    for (std::size_t j = 0; j < x.size(); ++j) out[j] = weights.w[j] * x[j];
}

// Distances from u to every unit; returns the index of the smallest.
std::size_t all_distances(const SomMap& map, std::span<const double> u, Distance dist, std::vector<double>& out) {
    const std::size_t k = map.unit_count();
    out.resize(k);
    std::size_t best = 0;
    for (std::size_t i = 0; i < k; ++i) {
        out[i] = distance(dist, u, map.unit(i));
        if (out[i] < out[best]) best = i;
    }
    return best;
}

// Accumulates d(1 - L)/dw for one input into `grad`.
void accumulate_ratio_gradient(const SomMap& map, const FeatureWeights& weights, std::span<const double> x,
                               Distance dist, std::vector<double>& u, std::vector<double>& d,
                               std::vector<double>& grad) {
    const std::size_t k = map.unit_count();
    const std::size_t n = x.size();
    weighted(weights, x, u);
    const std::size_t b = all_distances(map, u, dist, d);
    const double mean = std::accumulate(d.begin(), d.end(), 0.0) / static_cast<double>(k);
    if (mean <= 0.0) return;

    // ratio = d_b / mean, d ratio = (d_b' * mean - d_b * mean') / mean^2
    const double inv_mean = 1.0 / mean;
    const double coeff_b = inv_mean;
    const double coeff_mean = -d[b] * inv_mean * inv_mean / static_cast<double>(k);

    if (dist == Distance::euclidean) {
        for (std::size_t i = 0; i < k; ++i) {
            if (d[i] <= 0.0) continue;
            const double c = (coeff_mean + (i == b ? coeff_b : 0.0)) / d[i];
            const auto m = map.unit(i);
            for (std::size_t j = 0; j < n; ++j) grad[j] += c * (u[j] - m[j]) * x[j];
        }
        return;
    }

    const double nu = std::sqrt(dot(u, u));
    if (nu <= 0.0) return;
    for (std::size_t i = 0; i < k; ++i) {
        const auto m = map.unit(i);
        const double nm = std::sqrt(dot(m, m));
        if (nm <= 0.0) continue;
        const double c = coeff_mean + (i == b ? coeff_b : 0.0);
        const double um = dot(u, m);
        // d/du of 1 - u.m / (|u||m|)
        for (std::size_t j = 0; j < n; ++j) {
            const double dd = -(m[j] / (nu * nm) - um * u[j] / (nu * nu * nu * nm));
            grad[j] += c * dd * x[j];
        }
    }
}

}  // namespace

std::string_view to_string(Distance d) { return d == Distance::cosine ? "cosine" : "euclidean"; }

Distance parse_distance(std::string_view text) {
    if (text == "euclidean") return Distance::euclidean;
    if (text == "cosine") return Distance::cosine;
    throw InvalidArgument("unknown distance '" + std::string(text) + "'");
}

double distance(Distance kind, std::span<const double> a, std::span<const double> b) {
    if (kind == Distance::euclidean) {
        double s = 0.0;
        for (std::size_t j = 0; j < a.size(); ++j) {
            const double t = a[j] - b[j];
            s += t * t;
        }
        return std::sqrt(s);
    }
    const double na = std::sqrt(dot(a, a));
    const double nb = std::sqrt(dot(b, b));
    if (na <= 0.0 || nb <= 0.0) return 1.0;
    return 1.0 - dot(a, b) / (na * nb);
}

std::size_t default_side(std::size_t rows) {
    const double side = std::ceil(std::pow(static_cast<double>(rows), 0.25));
    return static_cast<std::size_t>(std::clamp(side, 2.0, 10.0));
}

void validate(const TrainConfig& c) {
    if (c.epochs < 1) throw InvalidArgument("epochs must be at least 1");
    if (c.side == 1) throw InvalidArgument("map side must be at least 2");
    if (!(c.alpha0 > 0.0 && c.alpha0 <= 1.0)) throw InvalidArgument("alpha0 must lie in (0, 1]");
    if (!(c.beta0 >= 0.0) || !std::isfinite(c.beta0)) throw InvalidArgument("beta0 must be positive (or 0 for auto)");
    if (!(c.weight_lr >= 0.0) || !std::isfinite(c.weight_lr)) throw InvalidArgument("weight_lr must be >= 0");
    if (!(c.lambda >= 0.0) || !std::isfinite(c.lambda)) throw InvalidArgument("lambda must be >= 0");
    if (c.batch_size < 1) throw InvalidArgument("batch_size must be at least 1");
}

nlohmann::json to_json(const TrainConfig& c) {
    return {{"side", c.side},
            {"epochs", c.epochs},
            {"alpha0", c.alpha0},
            {"beta0", c.beta0},
            {"distance", std::string(to_string(c.distance))},
            {"weight_lr", c.weight_lr},
            {"lambda", c.lambda},
            {"batch_size", c.batch_size},
            {"seed", c.seed}};
}

TrainConfig train_config_from_json(const nlohmann::json& j, TrainConfig c) {
    if (!j.is_object()) throw InvalidArgument("train config must be an object");
    try {
        if (j.contains("side")) c.side = j.at("side").get<std::size_t>();
        if (j.contains("epochs")) c.epochs = j.at("epochs").get<std::size_t>();
        if (j.contains("alpha0")) c.alpha0 = j.at("alpha0").get<double>();
        if (j.contains("beta0")) c.beta0 = j.at("beta0").get<double>();
        if (j.contains("distance")) c.distance = parse_distance(j.at("distance").get<std::string>());
        if (j.contains("weight_lr")) c.weight_lr = j.at("weight_lr").get<double>();
        if (j.contains("lambda")) c.lambda = j.at("lambda").get<double>();
        if (j.contains("batch_size")) c.batch_size = j.at("batch_size").get<std::size_t>();
        if (j.contains("seed")) c.seed = j.at("seed").get<std::uint64_t>();
    } catch (const nlohmann::json::exception& e) {
        throw InvalidArgument(std::string("bad train config: ") + e.what());
    }
    validate(c);
    return c;
}

SomMap::SomMap(std::size_t side, std::size_t dims) : side_(side), dims_(dims), units_(side * side * dims, 0.0) {
    if (side < 1 || dims < 1) throw InvalidArgument("map needs a positive side and dimension");
}

std::size_t SomMap::grid_distance(std::size_t a, std::size_t b) const {
    const auto [ra, ca] = coords(a);
    const auto [rb, cb] = coords(b);
    const std::size_t dr = ra > rb ? ra - rb : rb - ra;
    const std::size_t dc = ca > cb ? ca - cb : cb - ca;
    return std::max(dr, dc);
}

void TrainTrace::write_csv(std::ostream& out) const {
    out << "epoch,quantization_error,mean_loss";
    const std::size_t d = weights.empty() ? 0 : weights.front().size();
    for (std::size_t j = 0; j < d; ++j) out << ",w" << j;
    out << '\n';
    for (std::size_t e = 0; e < quantization_error.size(); ++e) {
        out << e + 1 << ',' << quantization_error[e] << ',' << mean_loss[e];
        for (double v : weights[e]) out << ',' << v;
        out << '\n';
    }
}

SomMap init_map(const TrainConfig& config, const FeatureMatrix& data) {
    if (data.size() == 0) throw InvalidArgument("cannot initialize a map from empty data");
    const std::size_t side = config.side ? config.side : default_side(data.size());
    SomMap map(side, data.dims);
    std::mt19937_64 rng(config.seed);
    const std::size_t k = map.unit_count();
    std::vector<std::size_t> picks;
    if (data.size() >= k) {
        std::vector<std::size_t> idx(data.size());
        std::iota(idx.begin(), idx.end(), std::size_t{0});
        // Partial Fisher-Yates: the first k entries are a uniform sample.
        for (std::size_t i = 0; i < k; ++i) {
            std::uniform_int_distribution<std::size_t> pick(i, idx.size() - 1);
            std::swap(idx[i], idx[pick(rng)]);
        }
        picks.assign(idx.begin(), idx.begin() + static_cast<std::ptrdiff_t>(k));
    } else {
        std::uniform_int_distribution<std::size_t> pick(0, data.size() - 1);
        for (std::size_t i = 0; i < k; ++i) picks.push_back(pick(rng));
    }
    for (std::size_t i = 0; i < k; ++i) {
        const auto src = data.row(picks[i]);
        std::copy(src.begin(), src.end(), map.unit(i).begin());
    }
    return map;
}

std::size_t bmu(const SomMap& map, const FeatureWeights& weights, std::span<const double> x, Distance dist) {
    require_dims(map, weights, x);
    require_finite(x);
    std::vector<double> u;
    weighted(weights, x, u);
    std::size_t best = 0;
    double best_d = std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < map.unit_count(); ++i) {
        const double d = distance(dist, u, map.unit(i));
        if (d < best_d) {
            best_d = d;
            best = i;
        }
    }
    return best;
}

double neighborhood(std::size_t grid_distance, double beta) {
    const double g = static_cast<double>(grid_distance);
    return std::exp(-(g * g) / (2.0 * beta * beta));
}

void som_update(SomMap& map, const FeatureWeights& weights, std::span<const double> x, std::size_t bmu_index,
                double alpha, double beta) {
    require_dims(map, weights, x);
    if (!(alpha >= 0.0 && alpha <= 1.0)) throw InvalidArgument("alpha must lie in [0, 1]");
    if (!(beta > 0.0)) throw InvalidArgument("beta must be positive");
    if (bmu_index >= map.unit_count()) throw InvalidArgument("BMU index out of range");
    if (alpha == 0.0) return;
    std::vector<double> theta(map.side(), 0.0);
    for (std::size_t g = 0; g < theta.size(); ++g) theta[g] = neighborhood(g, beta) * alpha;
    for (std::size_t i = 0; i < map.unit_count(); ++i) {
        const double step = theta[map.grid_distance(bmu_index, i)];
        auto unit = map.unit(i);
        for (std::size_t j = 0; j < unit.size(); ++j) {
            const double v = unit[j] + step * (weights.w[j] * x[j] - unit[j]);
            // Components pulled towards a zero-weight input decay geometrically;
            // snap them before they turn subnormal and stall the FPU.
            unit[j] = std::abs(v) < kSnapToZero ? 0.0 : v;
        }
    }
}

double wsom_loss(const SomMap& map, const FeatureWeights& weights, std::span<const double> x, Distance dist) {
    require_dims(map, weights, x);
    if (map.unit_count() < 2) throw InvalidArgument("the loss needs at least two units");
    std::vector<double> u;
    std::vector<double> d;
    weighted(weights, x, u);
    const std::size_t b = all_distances(map, u, dist, d);
    const double mean = std::accumulate(d.begin(), d.end(), 0.0) / static_cast<double>(d.size());
    if (mean <= 0.0) return 0.0;
    return std::clamp(1.0 - d[b] / mean, 0.0, 1.0);
}

double weight_objective(const FeatureWeights& weights, const SomMap& map, const FeatureMatrix& data,
                        std::span<const std::size_t> batch, double lambda, Distance dist) {
    if (batch.empty()) throw InvalidArgument("empty batch");
    double acc = 0.0;
    for (std::size_t i : batch) acc += 1.0 - wsom_loss(map, weights, data.row(i), dist);
    double norm2 = 0.0;
    for (double v : weights.w) norm2 += v * v;
    return acc / static_cast<double>(batch.size()) + lambda * norm2;
}

std::vector<double> weight_gradient(const FeatureWeights& weights, const SomMap& map, const FeatureMatrix& data,
                                    std::span<const std::size_t> batch, double lambda, Distance dist) {
    if (batch.empty()) throw InvalidArgument("empty batch");
    if (weights.size() != map.dims() || data.dims != map.dims()) throw InvalidArgument("dimension mismatch");
    std::vector<double> grad(map.dims(), 0.0);
    std::vector<double> u;
    std::vector<double> d;
    for (std::size_t i : batch) accumulate_ratio_gradient(map, weights, data.row(i), dist, u, d, grad);
    const double inv = 1.0 / static_cast<double>(batch.size());
    for (std::size_t j = 0; j < grad.size(); ++j) grad[j] = grad[j] * inv + 2.0 * lambda * weights.w[j];
    return grad;
}

FeatureWeights weight_step(const FeatureWeights& weights, const SomMap& map, const FeatureMatrix& data,
                           std::span<const std::size_t> batch, double weight_lr, double lambda, Distance dist) {
    if (weight_lr == 0.0) return weights;
    const auto grad = weight_gradient(weights, map, data, batch, lambda, dist);
    FeatureWeights next = weights;
    double sum = 0.0;
    for (std::size_t j = 0; j < grad.size(); ++j) {
        next.w[j] = std::max(0.0, next.w[j] - weight_lr * grad[j]);
        if (next.w[j] < kSnapToZero) next.w[j] = 0.0;
        sum += next.w[j];
    }
    const double mean = sum / static_cast<double>(next.w.size());
    if (!(mean > 0.0) || !std::isfinite(mean)) return FeatureWeights::uniform(next.size());
    for (double& v : next.w) v /= mean;
    return next;
}

double quantization_error(const SomMap& map, const FeatureWeights& weights, const FeatureMatrix& data,
                          Distance dist) {
    if (data.size() == 0) throw InvalidArgument("quantization error of empty data");
    std::vector<double> u;
    std::vector<double> d;
    double acc = 0.0;
    for (std::size_t i = 0; i < data.size(); ++i) {
        weighted(weights, data.row(i), u);
        acc += d[all_distances(map, u, dist, d)];
    }
    return acc / static_cast<double>(data.size());
}

std::vector<std::size_t> assign_bmus(const SomMap& map, const FeatureWeights& weights, const FeatureMatrix& data,
                                     Distance dist) {
    std::vector<std::size_t> out(data.size());
    std::vector<double> u;
    std::vector<double> d;
    for (std::size_t i = 0; i < data.size(); ++i) {
        weighted(weights, data.row(i), u);
        out[i] = all_distances(map, u, dist, d);
    }
    return out;
}

TrainResult train(const FeatureMatrix& data, const TrainConfig& config, const ProgressFn& progress) {
    validate(config);
    if (data.size() == 0) throw InvalidArgument("cannot train on empty data");

    TrainConfig cfg = config;
    if (cfg.side == 0) cfg.side = default_side(data.size());
    const double beta0 = cfg.beta0 > 0.0 ? cfg.beta0 : std::max(static_cast<double>(cfg.side) / 2.0, 0.5);
    const double alpha_end = cfg.alpha0 / 100.0;
    const double beta_end = 0.5;

    TrainResult result;
    result.map = init_map(cfg, data);
    result.weights = FeatureWeights::uniform(data.dims);
    result.trace.initial_quantization_error = quantization_error(result.map, result.weights, data, cfg.distance);

    // Separate stream from the one init_map draws from.
    std::mt19937_64 rng(cfg.seed ^ 0x9E3779B97F4A7C15ULL);
    std::vector<std::size_t> order(data.size());
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::vector<double> u;
    std::vector<double> d;

    for (std::size_t epoch = 0; epoch < cfg.epochs; ++epoch) {
        const double t = cfg.epochs > 1 ? static_cast<double>(epoch) / static_cast<double>(cfg.epochs - 1) : 0.0;
        const double alpha = cfg.alpha0 + (alpha_end - cfg.alpha0) * t;
        const double beta = beta0 + (beta_end - beta0) * t;

        for (std::size_t i = order.size(); i > 1; --i) {
            std::uniform_int_distribution<std::size_t> pick(0, i - 1);
            std::swap(order[i - 1], order[pick(rng)]);
        }
        for (std::size_t start = 0; start < order.size(); start += cfg.batch_size) {
            const std::size_t stop = std::min(order.size(), start + cfg.batch_size);
            const std::span<const std::size_t> batch(order.data() + start, stop - start);
            for (std::size_t i : batch) {
                const auto x = data.row(i);
                weighted(result.weights, x, u);
                const std::size_t b = all_distances(result.map, u, cfg.distance, d);
                som_update(result.map, result.weights, x, b, alpha, beta);
            }
            result.weights = weight_step(result.weights, result.map, data, batch, cfg.weight_lr, cfg.lambda,
                                         cfg.distance);
        }

        double qe = 0.0;
        double loss = 0.0;
        for (std::size_t i = 0; i < data.size(); ++i) {
            weighted(result.weights, data.row(i), u);
            const std::size_t b = all_distances(result.map, u, cfg.distance, d);
            qe += d[b];
            const double mean = std::accumulate(d.begin(), d.end(), 0.0) / static_cast<double>(d.size());
            loss += mean > 0.0 ? 1.0 - d[b] / mean : 0.0;
        }
        result.trace.quantization_error.push_back(qe / static_cast<double>(data.size()));
        result.trace.mean_loss.push_back(loss / static_cast<double>(data.size()));
        result.trace.weights.push_back(result.weights.w);
        if (progress) progress(static_cast<double>(epoch + 1) / static_cast<double>(cfg.epochs));
    }
    return result;
}

}  // namespace tabtax
