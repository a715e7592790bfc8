#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "lobstat/book.hpp"

namespace lobstat {

// Event-time averaged volume profile of one side: per-depth mean and
// population standard deviation over M snapshots.
struct AveragedShape {
    Side side = Side::Buy;
    std::vector<double> mean;   // index 0 is depth 1
    std::vector<double> stddev;
    std::uint64_t count = 0;    // M

    int depth() const { return static_cast<int>(mean.size()); }
    double mean_at(int d) const { return mean[static_cast<std::size_t>(d - 1)]; }
    double stddev_at(int d) const { return stddev[static_cast<std::size_t>(d - 1)]; }
};

// Streaming aggregation of snapshots into an AveragedShape. Sums of volume
// and squared volume are kept as exact integers; share counts around 1e6
// squared across millions of events overflow anything narrower than 128 bits.
// Aggregation is a commutative monoid, so partial accumulators merge
// deterministically.
class ShapeAccumulator {
public:
    ShapeAccumulator(Side side, int depth);

    // Snapshot-at-a-time interface for sparse sources: one begin_snapshot per
    // event time, then the occupied depths.
    void begin_snapshot() { ++count_; }
    void add_level(int depth, Shares volume);

    // For sparse dumps where the snapshot count is known up front rather than
    // discovered row by row.
    void add_snapshot_count(std::uint64_t n) { count_ += n; }

    void add(const ShapeSnapshot& snapshot);
    void add_book(const LimitOrderBook& book, Side side);

    void merge(const ShapeAccumulator& other);

    std::uint64_t count() const { return count_; }
    int depth() const { return static_cast<int>(sum_.size()); }
    Side side() const { return side_; }

    AveragedShape finalize() const;

private:
    Side side_;
    std::vector<std::int64_t> sum_;
    std::vector<unsigned __int128> sum_sq_;
    std::uint64_t count_ = 0;
};

AveragedShape average_shape(std::span<const ShapeSnapshot> snapshots);

// Smallest depth attaining the maximum mean volume.
int locate_maximum(const AveragedShape& shape);

struct ExponentialFit {
    double beta = 0.0;          // decay rate per tick
    double beta_stderr = 0.0;
    int range_lo = 0;           // fitted depths, inclusive
    int range_hi = 0;
    double r_squared = 0.0;
};

// Least-squares fit of log mean volume against depth over [range_lo,
// range_hi]. Every mean in the range must be positive.
ExponentialFit fit_exponential_tail(const AveragedShape& shape, int range_lo, int range_hi);

struct PeakReport {
    int period = 5;
    double threshold = 1.1;
    std::vector<int> positions;    // depths period*n + 1 that were scored
    std::vector<double> ratios;    // volume over the mean of the two neighbors
    double geometric_mean = 1.0;
    bool flagged = false;
};

// Scores the depths period*n + 1 (n >= 1) by the ratio of their mean volume
// to the mean of the two immediate neighbors; the shape is flagged when the
// geometric mean of the ratios exceeds the threshold.
PeakReport detect_periodic_peaks(const AveragedShape& shape, int period = 5,
                                 double threshold = 1.1);

}  // namespace lobstat
