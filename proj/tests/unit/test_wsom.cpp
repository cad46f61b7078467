#include <cmath>
#include <random>

#include "doctest.h"
#include "tabtax/error.hpp"
#include "tabtax/wsom.hpp"

using namespace tabtax;

namespace {

SomMap random_map(std::size_t side, std::size_t dims, std::mt19937_64& rng) {
    SomMap m(side, dims);
    std::normal_distribution<double> n(0.0, 1.0);
    for (std::size_t u = 0; u < m.unit_count(); ++u) {
        for (auto& v : m.unit(u)) v = n(rng);
    }
    return m;
}

double euclid(std::span<const double> a, std::span<const double> b) {
    double s = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) s += (a[i] - b[i]) * (a[i] - b[i]);
    return std::sqrt(s);
}

}  // namespace

TEST_CASE("default side") {
    CHECK(default_side(1) == 2);
    CHECK(default_side(150) == 4);
    CHECK(default_side(10000) == 10);
    CHECK(default_side(100000000) == 10);
}

TEST_CASE("grid geometry") {
    SomMap m(3, 2);
    CHECK(m.coords(5) == std::pair<std::size_t, std::size_t>{1, 2});
    CHECK(m.grid_distance(0, 8) == 2);
    CHECK(m.grid_distance(0, 1) == 1);
    CHECK(m.grid_distance(4, 4) == 0);
    CHECK(neighborhood(0, 1.0) == 1.0);
    CHECK(neighborhood(2, 1.0) == doctest::Approx(std::exp(-2.0)));
}

TEST_CASE("bmu prefers the lowest index on ties") {
    SomMap m(2, 1);
    m.unit(0)[0] = 1.0;
    m.unit(1)[0] = -1.0;
    m.unit(2)[0] = 1.0;
    m.unit(3)[0] = 5.0;
    const std::vector<double> x{0.0};
    CHECK(bmu(m, FeatureWeights::uniform(1), x) == 0);
    const std::vector<double> y{0.9};
    CHECK(bmu(m, FeatureWeights::uniform(1), y) == 0);
    const std::vector<double> bad{std::nan("")};
    CHECK_THROWS_AS(bmu(m, FeatureWeights::uniform(1), bad), InvalidArgument);
}

TEST_CASE("bmu works in weighted space") {
    SomMap m(2, 2);
    m.unit(0)[0] = 2.0;  // (2, 0)
    m.unit(1)[1] = 2.0;  // (0, 2)
    m.unit(2)[0] = 10.0;
    m.unit(3)[1] = 10.0;
    const std::vector<double> x{1.0, 1.0};
    CHECK(bmu(m, FeatureWeights{{2.0, 0.0}}, x) == 0);
    CHECK(bmu(m, FeatureWeights{{0.0, 2.0}}, x) == 1);
}

TEST_CASE("update rule moves every unit by alpha * theta") {
    std::mt19937_64 rng(5);
    SomMap m = random_map(3, 2, rng);
    const SomMap before = m;
    const FeatureWeights w{{0.5, 1.5}};
    const std::vector<double> x{1.0, -2.0};
    const std::size_t b = bmu(m, w, x);
    som_update(m, w, x, b, 0.3, 1.2);
    for (std::size_t u = 0; u < m.unit_count(); ++u) {
        const double theta = std::exp(-double(m.grid_distance(u, b) * m.grid_distance(u, b)) / (2 * 1.2 * 1.2));
        for (std::size_t d = 0; d < 2; ++d) {
            const double target = w.w[d] * x[d];
            CHECK(m.unit(u)[d] == doctest::Approx(before.unit(u)[d] + 0.3 * theta * (target - before.unit(u)[d])));
        }
    }
}

TEST_CASE("loss matches its definition") {
    std::mt19937_64 rng(11);
    for (int trial = 0; trial < 50; ++trial) {
        SomMap m = random_map(3, 4, rng);
        std::uniform_real_distribution<double> u(0.1, 2.0);
        FeatureWeights w{{u(rng), u(rng), u(rng), u(rng)}};
        std::vector<double> x{u(rng), u(rng), u(rng), u(rng)};
        std::vector<double> wx(4);
        for (int d = 0; d < 4; ++d) wx[d] = w.w[d] * x[d];
        double mn = 1e300;
        double sum = 0.0;
        for (std::size_t k = 0; k < m.unit_count(); ++k) {
            const double dist = euclid(wx, m.unit(k));
            mn = std::min(mn, dist);
            sum += dist;
        }
        CHECK(wsom_loss(m, w, x) == doctest::Approx(1.0 - mn / (sum / m.unit_count())).epsilon(1e-12));
    }
}

TEST_CASE("loss edge cases") {
    SomMap m(2, 1);
    const std::vector<double> x{0.0};
    CHECK(wsom_loss(m, FeatureWeights::uniform(1), x) == 0.0);
    m.unit(0)[0] = 3.0;
    const std::vector<double> y{3.0};
    CHECK(wsom_loss(m, FeatureWeights::uniform(1), y) == doctest::Approx(1.0));
}

TEST_CASE("cosine distance") {
    const std::vector<double> a{1.0, 0.0};
    const std::vector<double> b{0.0, 2.0};
    const std::vector<double> z{0.0, 0.0};
    CHECK(distance(Distance::cosine, a, b) == doctest::Approx(1.0));
    CHECK(distance(Distance::cosine, a, a) == doctest::Approx(0.0));
    CHECK(distance(Distance::cosine, a, z) == 1.0);
    CHECK(distance(Distance::euclidean, a, b) == doctest::Approx(std::sqrt(5.0)));
}

TEST_CASE("weight gradient matches finite differences") {
    std::mt19937_64 rng(21);
    for (Distance dist : {Distance::euclidean, Distance::cosine}) {
        for (int trial = 0; trial < 10; ++trial) {
            SomMap m = random_map(3, 3, rng);
            std::normal_distribution<double> n(0.0, 1.0);
            std::vector<double> values(5 * 3);
            for (auto& v : values) v = n(rng);
            const auto data = make_feature_matrix(3, values);
            std::uniform_real_distribution<double> u(0.5, 1.5);
            FeatureWeights w{{u(rng), u(rng), u(rng)}};
            const std::vector<std::size_t> batch{0, 1, 2, 3, 4};
            const auto g = weight_gradient(w, m, data, batch, 0.01, dist);
            for (std::size_t j = 0; j < 3; ++j) {
                const double h = 1e-6;
                FeatureWeights wp = w;
                FeatureWeights wm = w;
                wp.w[j] += h;
                wm.w[j] -= h;
                const double fd = (weight_objective(wp, m, data, batch, 0.01, dist) -
                                   weight_objective(wm, m, data, batch, 0.01, dist)) /
                                  (2 * h);
                CHECK(g[j] == doctest::Approx(fd).epsilon(1e-4));
            }
        }
    }
}

TEST_CASE("weight step keeps weights nonnegative with mean one") {
    std::mt19937_64 rng(2);
    SomMap m = random_map(2, 4, rng);
    std::normal_distribution<double> n(0.0, 1.0);
    std::vector<double> values(8 * 4);
    for (auto& v : values) v = n(rng);
    const auto data = make_feature_matrix(4, values);
    const std::vector<std::size_t> batch{0, 1, 2, 3, 4, 5, 6, 7};
    const auto w = weight_step(FeatureWeights::uniform(4), m, data, batch, 5.0, 1e-3);
    double sum = 0.0;
    for (double v : w.w) {
        CHECK(v >= 0.0);
        sum += v;
    }
    CHECK(sum / 4 == doctest::Approx(1.0));
    CHECK(weight_step(FeatureWeights::uniform(4), m, data, batch, 0.0, 1e-3) == FeatureWeights::uniform(4));
}

TEST_CASE("training is deterministic per seed") {
    std::mt19937_64 rng(8);
    std::normal_distribution<double> n(0.0, 0.2);
    std::vector<double> values;
    for (int i = 0; i < 300; ++i) {
        const double cx = (i % 3) * 3.0;
        values.push_back(cx + n(rng));
        values.push_back(-cx + n(rng));
    }
    const auto data = make_feature_matrix(2, values);
    TrainConfig cfg;
    cfg.side = 4;
    cfg.epochs = 10;
    cfg.seed = 99;
    const auto a = train(data, cfg);
    const auto b = train(data, cfg);
    CHECK(a.map == b.map);
    CHECK(a.weights == b.weights);
    CHECK(a.trace.quantization_error.size() == 10);
    CHECK(a.trace.mean_loss.size() == 10);
    cfg.seed = 100;
    CHECK_FALSE(train(data, cfg).map == a.map);
}

TEST_CASE("config validation and json") {
    TrainConfig c;
    c.alpha0 = 0.0;
    CHECK_THROWS_AS(validate(c), InvalidArgument);
    c = train_config_from_json({{"side", 6}, {"distance", "cosine"}, {"seed", 5}});
    CHECK(c.side == 6);
    CHECK(c.distance == Distance::cosine);
    CHECK(train_config_from_json(to_json(c)).seed == 5);
    CHECK_THROWS_AS(train_config_from_json({{"epochs", 0}}), InvalidArgument);
    CHECK_THROWS_AS(train_config_from_json({{"distance", "manhattan"}}), InvalidArgument);
}

TEST_CASE("progress is monotone and reaches one") {
    const auto data = make_feature_matrix(1, {0.0, 1.0, 2.0, 3.0, 4.0});
    TrainConfig cfg;
    cfg.epochs = 5;
    std::vector<double> seen;
    train(data, cfg, [&](double f) { seen.push_back(f); });
    REQUIRE_FALSE(seen.empty());
    CHECK(std::is_sorted(seen.begin(), seen.end()));
    CHECK(seen.back() == doctest::Approx(1.0));
}
