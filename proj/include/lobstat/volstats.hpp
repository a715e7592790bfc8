#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <utility>
#include <vector>

#include "lobstat/book.hpp"

namespace lobstat {

// Clock-time averaged per-depth volume series: one value per session
// interval of length dt seconds, averaged over the events inside the
// interval. Intervals with no events are gaps, not zeros.
struct VolumeSeries {
    int delta = 1;
    int dt_seconds = 60;
    std::vector<double> values;          // indexed by interval; NaN at gaps
    std::vector<std::uint64_t> gaps;     // interval indices with zero events

    bool is_gap(std::uint64_t idx) const;

    // Values with gaps skipped and, when drop_zeros is set, exact zeros
    // removed as well (their count is reported through dropped_zeros).
    std::vector<double> analysis_values(bool drop_zeros, std::uint64_t* dropped_zeros = nullptr) const;
};

// Incremental builder used by the streaming pipeline: feed (wall_time, value)
// pairs per event in wall-time order, then finish().
class VolumeSeriesBuilder {
public:
    VolumeSeriesBuilder(int delta, int dt_seconds, const SessionConfig& session);

    void add(WallTime wall_time, Shares value);
    VolumeSeries finish() const;

private:
    int delta_;
    int dt_seconds_;
    const SessionConfig& session_;
    std::vector<double> sums_;
    std::vector<std::uint64_t> counts_;
};

VolumeSeries minute_average_volumes(std::span<const ShapeSnapshot> snapshots, int delta,
                                    int dt_seconds, const SessionConfig& session);

// Histogram density of log values, equal-width bins, integrating to one.
struct LogPdf {
    std::vector<double> centers;    // bin centers in log of the value
    std::vector<double> densities;
    double bin_width = 0.0;
    std::uint64_t n_used = 0;
    std::uint64_t dropped_zeros = 0;
};

// bins == 0 selects the Freedman-Diaconis count.
LogPdf empirical_log_pdf(std::span<const double> values, std::size_t bins = 0);
LogPdf empirical_log_pdf(const VolumeSeries& series, std::size_t bins = 0);

struct LognormalFit {
    double mu = 0.0;        // mean of log values
    double sigma = 0.0;     // std of log values
    double ks_distance = 0.0;
    std::uint64_t n_used = 0;
    std::uint64_t dropped_zeros = 0;
};

LognormalFit fit_lognormal(std::span<const double> values);
LognormalFit fit_lognormal(const VolumeSeries& series);

struct PowerLawTailFit {
    double exponent = 0.0;  // slope of log density against log value
    double stderr_ = 0.0;
    double range_lo = 0.0;  // fit range in log10 of the value
    double range_hi = 0.0;
    double r_squared = 0.0;
    std::size_t n_bins = 0;
};

// Least-squares slope of log density against log value over the occupied
// histogram bins whose centers fall inside [lo, hi] in log10 of the value.
PowerLawTailFit fit_left_tail_powerlaw(const LogPdf& pdf, double log10_lo, double log10_hi);

// Biased sample autocorrelation, C(0) = 1.
std::vector<double> autocorrelation(std::span<const double> series, std::size_t max_lag);
std::vector<double> autocorrelation(const VolumeSeries& series, std::size_t max_lag);

struct DfaConfig {
    std::size_t min_box = 8;
    double ratio = 1.189207115002721;  // 2^(1/4)
    std::size_t max_box_divisor = 4;   // largest box is n / divisor
    int detrend_order = 1;
    // Fit window in box size; unset means the central decade of the grid.
    std::optional<std::pair<double, double>> fit_range;
};

struct DfaResult {
    std::vector<double> box_sizes;
    std::vector<double> fluctuation;    // F at each box size
    double hurst = 0.0;
    double hurst_stderr = 0.0;
    double gamma = 0.0;                 // 2 - 2H
    double fit_lo = 0.0;
    double fit_hi = 0.0;
    std::size_t n = 0;
};

// Detrended fluctuation analysis: profile of the demeaned series, polynomial
// detrending in non-overlapping boxes taken from both ends, F as the RMS
// residual per box size, and the Hurst index as the log-log slope over the
// fit window.
DfaResult dfa(std::span<const double> series, const DfaConfig& config = {});
DfaResult dfa(const VolumeSeries& series, const DfaConfig& config = {});

}  // namespace lobstat
