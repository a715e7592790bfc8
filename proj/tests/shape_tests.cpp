#include <cmath>

#include "doctest.h"
#include "lobstat/errors.hpp"
#include "lobstat/rng.hpp"
#include "lobstat/shape.hpp"
#include "lobstat/synthgen.hpp"

using namespace lobstat;

namespace {

ShapeSnapshot snap_of(std::vector<Shares> volumes, Side side = Side::Buy) {
    ShapeSnapshot s;
    s.side = side;
    s.has_best = true;
    s.volumes = std::move(volumes);
    return s;
}

AveragedShape shape_of(std::vector<double> mean) {
    AveragedShape s;
    s.count = 1;
    s.mean = std::move(mean);
    s.stddev.assign(s.mean.size(), 0.0);
    return s;
}

}  // namespace

TEST_CASE("averaging identical snapshots reproduces the snapshot with zero spread") {
    std::vector<ShapeSnapshot> snaps(7, snap_of({5, 0, 3, 9}));
    const auto shape = average_shape(snaps);
    CHECK(shape.count == 7);
    CHECK(shape.mean == std::vector<double>{5, 0, 3, 9});
    for (const double s : shape.stddev) CHECK(s == 0.0);
}

TEST_CASE("two-point mean and population deviation") {
    const std::vector<ShapeSnapshot> snaps = {snap_of({0, 0}), snap_of({10, 0})};
    const auto shape = average_shape(snaps);
    CHECK(shape.mean_at(1) == 5.0);
    CHECK(shape.stddev_at(1) == 5.0);
    CHECK(shape.mean_at(2) == 0.0);
    CHECK(shape.stddev_at(2) == 0.0);
}

TEST_CASE("averaging an empty stream is an error") {
    CHECK_THROWS_AS(average_shape({}), DataError);
}

TEST_CASE("bulk averaging matches a two-pass long-double reference") {
    Rng rng(90901);
    const int depth = 30;
    std::vector<ShapeSnapshot> snaps;
    snaps.reserve(10000);
    for (int i = 0; i < 10000; ++i) {
        std::vector<Shares> v(depth);
        for (auto& x : v) x = rng.below(4) == 0 ? 0 : rng.uniform_int(0, 1'000'000);
        snaps.push_back(snap_of(std::move(v)));
    }
    const auto shape = average_shape(snaps);

    for (int d = 1; d <= depth; ++d) {
        long double mean = 0.0L;
        for (const auto& s : snaps) mean += static_cast<long double>(s.at_depth(d));
        mean /= static_cast<long double>(snaps.size());
        long double ss = 0.0L;
        for (const auto& s : snaps) {
            const long double dx = static_cast<long double>(s.at_depth(d)) - mean;
            ss += dx * dx;
        }
        const long double sd = std::sqrt(ss / static_cast<long double>(snaps.size()));
        CHECK(shape.mean_at(d) == doctest::Approx(static_cast<double>(mean)).epsilon(1e-12));
        CHECK(shape.stddev_at(d) == doctest::Approx(static_cast<double>(sd)).epsilon(1e-9));
    }
}

TEST_CASE("accumulator merge equals averaging the concatenation") {
    Rng rng(90902);
    const int depth = 10;
    std::vector<ShapeSnapshot> first, second;
    for (int i = 0; i < 113; ++i) {
        std::vector<Shares> v(depth);
        for (auto& x : v) x = rng.uniform_int(0, 5000);
        (i % 3 == 0 ? first : second).push_back(snap_of(std::move(v)));
    }
    ShapeAccumulator a(Side::Buy, depth), b(Side::Buy, depth);
    for (const auto& s : first) a.add(s);
    for (const auto& s : second) b.add(s);
    a.merge(b);
    const auto merged = a.finalize();

    auto all = first;
    all.insert(all.end(), second.begin(), second.end());
    const auto direct = average_shape(all);

    CHECK(merged.count == direct.count);
    for (int d = 1; d <= depth; ++d) {
        // the integer sums are identical, so the doubles are too
        CHECK(merged.mean_at(d) == direct.mean_at(d));
        CHECK(merged.stddev_at(d) == direct.stddev_at(d));
    }
}

TEST_CASE("the deviation vanishes exactly where all snapshots agree") {
    std::vector<ShapeSnapshot> snaps;
    for (int i = 0; i < 9; ++i) {
        // depth 1 constant, depth 2 varying
        snaps.push_back(snap_of({42, i}));
    }
    const auto shape = average_shape(snaps);
    CHECK(shape.stddev_at(1) == 0.0);
    CHECK(shape.stddev_at(2) > 0.0);
}

TEST_CASE("locate_maximum returns the smallest depth attaining the maximum") {
    CHECK(locate_maximum(shape_of({1, 3, 2})) == 2);
    CHECK(locate_maximum(shape_of({9, 7, 5, 3})) == 1);  // monotone: the best itself
    CHECK(locate_maximum(shape_of({1, 4, 4, 2})) == 2);  // tie broken toward the best
}

TEST_CASE("locate_maximum is invariant under positive scaling") {
    Rng rng(90903);
    std::vector<double> v(40);
    for (auto& x : v) x = rng.uniform() * 100.0;
    const int base = locate_maximum(shape_of(v));
    for (const double c : {0.001, 0.7, 13.0, 1e9}) {
        auto scaled = v;
        for (auto& x : scaled) x *= c;
        CHECK(locate_maximum(shape_of(scaled)) == base);
    }
}

TEST_CASE("a planted mode is located exactly") {
    PlantedShapeParams params;
    params.kind = PlantedShapeParams::Kind::Mode;
    params.mode_position = 4;
    CHECK(locate_maximum(generate_planted_shape(params)) == 4);
    params.mode_position = 11;
    CHECK(locate_maximum(generate_planted_shape(params)) == 11);
}

TEST_CASE("a noiseless exponential is recovered to machine precision") {
    for (const double beta : {0.044, 0.025}) {
        for (const double scale : {1.0, 350.0, 2.5e6}) {
            PlantedShapeParams params;
            params.kind = PlantedShapeParams::Kind::Exponential;
            params.beta = beta;
            params.scale = scale;
            params.depth = 300;
            const auto fit = fit_exponential_tail(generate_planted_shape(params), 10, 280);
            CHECK(std::abs(fit.beta - beta) / beta < 1e-10);
            CHECK(fit.r_squared == doctest::Approx(1.0));
        }
    }
}

TEST_CASE("a flat shape fits a zero decay rate") {
    const auto fit = fit_exponential_tail(shape_of(std::vector<double>(50, 123.0)), 1, 50);
    CHECK(fit.beta == doctest::Approx(0.0).epsilon(1e-12));
}

TEST_CASE("noisy exponentials are recovered within five percent on average") {
    const double beta = 0.025;
    double total_rel_err = 0.0;
    const int seeds = 120;
    for (int seed = 1; seed <= seeds; ++seed) {
        PlantedShapeParams params;
        params.kind = PlantedShapeParams::Kind::Exponential;
        params.beta = beta;
        params.scale = 5e5;
        params.depth = 400;
        params.noise_sigma = 0.05;
        params.seed = static_cast<std::uint64_t>(seed);
        const auto fit = fit_exponential_tail(generate_planted_shape(params), 20, 400);
        total_rel_err += std::abs(fit.beta - beta) / beta;
    }
    CHECK(total_rel_err / seeds < 0.05);
}

TEST_CASE("the fit refuses ranges with nonpositive volumes") {
    auto shape = shape_of({10, 5, 0, 2, 1});
    CHECK_THROWS_AS(fit_exponential_tail(shape, 1, 5), DataError);
    CHECK_THROWS_AS(fit_exponential_tail(shape, 1, 2), DataError);  // too short
    CHECK_THROWS_AS(fit_exponential_tail(shape, 3, 9), DataError);  // past the depth
}

TEST_CASE("a flat shape scores neighbor ratios of one and is not flagged") {
    const auto report = detect_periodic_peaks(shape_of(std::vector<double>(40, 7.0)));
    for (const double r : report.ratios) CHECK(r == doctest::Approx(1.0));
    CHECK(report.geometric_mean == doctest::Approx(1.0));
    CHECK(!report.flagged);
}

TEST_CASE("a thirty percent periodic boost is flagged") {
    PlantedShapeParams params;
    params.kind = PlantedShapeParams::Kind::Periodic;
    params.peak_boost = 1.3;
    params.beta = 0.02;
    params.depth = 100;
    const auto report = detect_periodic_peaks(generate_planted_shape(params));
    CHECK(report.flagged);
    // each scored depth is boosted by 1.3 against unboosted neighbors, damped
    // by the exponential curvature factor cosh(beta)
    CHECK(report.geometric_mean == doctest::Approx(1.3 / std::cosh(0.02)).epsilon(1e-6));
    REQUIRE(!report.positions.empty());
    CHECK(report.positions.front() == 6);
}

TEST_CASE("an unboosted exponential scores the analytic curvature ratio") {
    PlantedShapeParams params;
    params.kind = PlantedShapeParams::Kind::Exponential;
    params.beta = 0.03;
    params.depth = 80;
    const auto report = detect_periodic_peaks(generate_planted_shape(params));
    CHECK(report.geometric_mean == doctest::Approx(1.0 / std::cosh(0.03)).epsilon(1e-9));
    CHECK(!report.flagged);
}

TEST_CASE("peak detection needs at least two periods of depth") {
    CHECK_THROWS_AS(detect_periodic_peaks(shape_of(std::vector<double>(10, 1.0))), DataError);
}
