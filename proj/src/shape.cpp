#include "lobstat/shape.hpp"

#include <cmath>
#include <string>

#include "lobstat/errors.hpp"
#include "lobstat/regression.hpp"

namespace lobstat {

namespace {

double u128_to_double(unsigned __int128 v) {
    return static_cast<double>(static_cast<std::uint64_t>(v >> 64)) * 0x1.0p64 +
           static_cast<double>(static_cast<std::uint64_t>(v));
}

}  // namespace

ShapeAccumulator::ShapeAccumulator(Side side, int depth)
    : side_(side),
      sum_(static_cast<std::size_t>(depth), 0),
      sum_sq_(static_cast<std::size_t>(depth), 0) {
    if (depth < 1) throw DataError("shape depth must be at least 1");
}

void ShapeAccumulator::add_level(int depth, Shares volume) {
    const auto i = static_cast<std::size_t>(depth - 1);
    sum_[i] += volume;
    sum_sq_[i] += static_cast<unsigned __int128>(volume) * static_cast<unsigned __int128>(volume);
}

void ShapeAccumulator::add(const ShapeSnapshot& snapshot) {
    if (snapshot.side != side_ || snapshot.volumes.size() != sum_.size()) {
        throw DataError("snapshot side/depth does not match the accumulator");
    }
    begin_snapshot();
    for (std::size_t i = 0; i < snapshot.volumes.size(); ++i) {
        if (snapshot.volumes[i] != 0) add_level(static_cast<int>(i) + 1, snapshot.volumes[i]);
    }
}

void ShapeAccumulator::add_book(const LimitOrderBook& book, Side side) {
    if (side != side_) throw DataError("book side does not match the accumulator");
    begin_snapshot();
    const int d = depth();
    const ShapeSnapshot snap = book.snapshot_shape(side, d);
    for (int i = 0; i < d; ++i) {
        if (snap.volumes[static_cast<std::size_t>(i)] != 0) {
            add_level(i + 1, snap.volumes[static_cast<std::size_t>(i)]);
        }
    }
}

void ShapeAccumulator::merge(const ShapeAccumulator& other) {
    if (other.side_ != side_ || other.sum_.size() != sum_.size()) {
        throw DataError("cannot merge accumulators of different side or depth");
    }
    count_ += other.count_;
    for (std::size_t i = 0; i < sum_.size(); ++i) {
        sum_[i] += other.sum_[i];
        sum_sq_[i] += other.sum_sq_[i];
    }
}

AveragedShape ShapeAccumulator::finalize() const {
    if (count_ == 0) throw DataError("cannot average an empty snapshot stream");
    AveragedShape shape;
    shape.side = side_;
    shape.count = count_;
    shape.mean.resize(sum_.size());
    shape.stddev.resize(sum_.size());
    const auto m = static_cast<unsigned __int128>(count_);
    const double md = static_cast<double>(count_);
    for (std::size_t i = 0; i < sum_.size(); ++i) {
        shape.mean[i] = static_cast<double>(sum_[i]) / md;
        // population variance from exact integer sums: (M*S2 - S1^2) / M^2
        const auto s1 = static_cast<unsigned __int128>(sum_[i]);
        const unsigned __int128 numer = sum_sq_[i] * m - s1 * s1;
        shape.stddev[i] = std::sqrt(u128_to_double(numer)) / md;
    }
    return shape;
}

AveragedShape average_shape(std::span<const ShapeSnapshot> snapshots) {
    if (snapshots.empty()) throw DataError("cannot average an empty snapshot stream");
    ShapeAccumulator acc(snapshots.front().side,
                         static_cast<int>(snapshots.front().volumes.size()));
    for (const auto& s : snapshots) acc.add(s);
    return acc.finalize();
}

int locate_maximum(const AveragedShape& shape) {
    if (shape.mean.empty()) throw DataError("empty shape");
    std::size_t best = 0;
    for (std::size_t i = 1; i < shape.mean.size(); ++i) {
        if (shape.mean[i] > shape.mean[best]) best = i;
    }
    return static_cast<int>(best) + 1;
}

ExponentialFit fit_exponential_tail(const AveragedShape& shape, int range_lo, int range_hi) {
    if (range_lo < 1 || range_hi > shape.depth() || range_hi - range_lo + 1 < 3) {
        throw DataError("exponential fit range must cover at least 3 depths inside the shape");
    }
    std::vector<double> x, y;
    x.reserve(static_cast<std::size_t>(range_hi - range_lo + 1));
    y.reserve(x.capacity());
    for (int d = range_lo; d <= range_hi; ++d) {
        const double v = shape.mean_at(d);
        if (v <= 0.0) {
            throw DataError("mean volume at depth " + std::to_string(d) +
                            " is not positive; log fit undefined");
        }
        x.push_back(static_cast<double>(d));
        y.push_back(std::log(v));
    }
    const LinearFit fit = ols_fit(x, y);
    ExponentialFit out;
    out.beta = -fit.slope;
    out.beta_stderr = fit.slope_stderr;
    out.range_lo = range_lo;
    out.range_hi = range_hi;
    out.r_squared = fit.r_squared;
    return out;
}

PeakReport detect_periodic_peaks(const AveragedShape& shape, int period, double threshold) {
    if (period < 2) throw DataError("peak period must be at least 2");
    if (shape.depth() < 2 * period + 1) {
        throw DataError("shape too shallow for peak detection");
    }
    PeakReport report;
    report.period = period;
    report.threshold = threshold;

    double log_sum = 0.0;
    for (int n = 1; period * n + 1 < shape.depth(); ++n) {
        const int d = period * n + 1;
        const double center = shape.mean_at(d);
        const double neighbors = 0.5 * (shape.mean_at(d - 1) + shape.mean_at(d + 1));
        if (center <= 0.0 || neighbors <= 0.0) continue;  // band-edge plateau of zeros
        report.positions.push_back(d);
        report.ratios.push_back(center / neighbors);
        log_sum += std::log(center / neighbors);
    }
    if (!report.ratios.empty()) {
        report.geometric_mean = std::exp(log_sum / static_cast<double>(report.ratios.size()));
    }
    report.flagged = report.geometric_mean > threshold;
    return report;
}

}  // namespace lobstat
