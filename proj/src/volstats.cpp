#include "lobstat/volstats.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>

#include "lobstat/errors.hpp"
#include "lobstat/regression.hpp"

namespace lobstat {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

double normal_cdf(double z) { return 0.5 * std::erfc(-z / std::sqrt(2.0)); }

std::pair<double, double> mean_and_population_std(std::span<const double> v) {
    double mean = 0.0;
    for (const double x : v) mean += x;
    mean /= static_cast<double>(v.size());
    double ss = 0.0;
    for (const double x : v) ss += (x - mean) * (x - mean);
    return {mean, std::sqrt(ss / static_cast<double>(v.size()))};
}

}  // namespace

bool VolumeSeries::is_gap(std::uint64_t idx) const {
    return std::binary_search(gaps.begin(), gaps.end(), idx);
}

std::vector<double> VolumeSeries::analysis_values(bool drop_zeros,
                                                  std::uint64_t* dropped_zeros) const {
    std::vector<double> out;
    out.reserve(values.size());
    std::uint64_t dropped = 0;
    for (const double v : values) {
        if (std::isnan(v)) continue;
        if (drop_zeros && v <= 0.0) {
            ++dropped;
            continue;
        }
        out.push_back(v);
    }
    if (dropped_zeros != nullptr) *dropped_zeros = dropped;
    return out;
}

VolumeSeriesBuilder::VolumeSeriesBuilder(int delta, int dt_seconds, const SessionConfig& session)
    : delta_(delta),
      dt_seconds_(dt_seconds),
      session_(session),
      sums_(session.interval_count(dt_seconds), 0.0),
      counts_(session.interval_count(dt_seconds), 0) {
    if (delta < 1) throw DataError("depth must be at least 1");
    if (dt_seconds <= 0) throw DataError("interval length must be positive");
    if (session.sessions.empty()) throw DataError("volume series need session windows");
}

void VolumeSeriesBuilder::add(WallTime wall_time, Shares value) {
    const auto idx = session_.interval_index(wall_time, dt_seconds_);
    if (!idx) throw DataError("event wall time outside session windows");
    sums_[*idx] += static_cast<double>(value);
    ++counts_[*idx];
}

VolumeSeries VolumeSeriesBuilder::finish() const {
    VolumeSeries series;
    series.delta = delta_;
    series.dt_seconds = dt_seconds_;
    series.values.resize(sums_.size(), kNaN);
    for (std::size_t i = 0; i < sums_.size(); ++i) {
        if (counts_[i] == 0) {
            series.gaps.push_back(i);
        } else {
            series.values[i] = sums_[i] / static_cast<double>(counts_[i]);
        }
    }
    return series;
}

VolumeSeries minute_average_volumes(std::span<const ShapeSnapshot> snapshots, int delta,
                                    int dt_seconds, const SessionConfig& session) {
    VolumeSeriesBuilder builder(delta, dt_seconds, session);
    for (const auto& snap : snapshots) {
        builder.add(snap.wall_time, snap.at_depth(delta));
    }
    return builder.finish();
}

LogPdf empirical_log_pdf(std::span<const double> values, std::size_t bins) {
    std::vector<double> logs;
    logs.reserve(values.size());
    std::uint64_t dropped = 0;
    for (const double v : values) {
        if (v > 0.0) {
            logs.push_back(std::log(v));
        } else {
            ++dropped;
        }
    }
    if (logs.size() < 2) throw DataError("need at least 2 positive values for a density");

    std::sort(logs.begin(), logs.end());
    const double lo = logs.front();
    const double hi = logs.back();
    if (hi == lo) {
        LogPdf pdf;
        pdf.bin_width = 1.0;
        pdf.centers = {lo};
        pdf.densities = {1.0};
        pdf.n_used = logs.size();
        pdf.dropped_zeros = dropped;
        return pdf;
    }

    if (bins == 0) {
        // Freedman-Diaconis on the log values
        const std::size_t n = logs.size();
        const double q1 = logs[n / 4];
        const double q3 = logs[(3 * n) / 4];
        const double iqr = q3 - q1;
        const double width = 2.0 * iqr / std::cbrt(static_cast<double>(n));
        bins = width > 0.0 ? static_cast<std::size_t>(std::ceil((hi - lo) / width)) : 0;
        bins = std::clamp<std::size_t>(bins, 8, 512);
    }

    LogPdf pdf;
    pdf.bin_width = (hi - lo) / static_cast<double>(bins);
    pdf.centers.resize(bins);
    pdf.densities.assign(bins, 0.0);
    pdf.n_used = logs.size();
    pdf.dropped_zeros = dropped;
    for (std::size_t b = 0; b < bins; ++b) {
        pdf.centers[b] = lo + (static_cast<double>(b) + 0.5) * pdf.bin_width;
    }
    for (const double x : logs) {
        auto b = static_cast<std::size_t>((x - lo) / pdf.bin_width);
        if (b >= bins) b = bins - 1;
        pdf.densities[b] += 1.0;
    }
    const double norm = 1.0 / (static_cast<double>(logs.size()) * pdf.bin_width);
    for (double& d : pdf.densities) d *= norm;
    return pdf;
}

LogPdf empirical_log_pdf(const VolumeSeries& series, std::size_t bins) {
    std::uint64_t dropped = 0;
    const auto vals = series.analysis_values(true, &dropped);
    LogPdf pdf = empirical_log_pdf(vals, bins);
    pdf.dropped_zeros += dropped;
    return pdf;
}

LognormalFit fit_lognormal(std::span<const double> values) {
    std::vector<double> logs;
    logs.reserve(values.size());
    std::uint64_t dropped = 0;
    for (const double v : values) {
        if (v > 0.0) {
            logs.push_back(std::log(v));
        } else {
            ++dropped;
        }
    }
    if (logs.size() < 30) throw DataError("need at least 30 positive values for a lognormal fit");

    const auto [mu, sigma] = mean_and_population_std(logs);
    if (sigma == 0.0) throw DataError("degenerate sample: all values equal");

    std::sort(logs.begin(), logs.end());
    double ks = 0.0;
    const double n = static_cast<double>(logs.size());
    for (std::size_t i = 0; i < logs.size(); ++i) {
        const double cdf = normal_cdf((logs[i] - mu) / sigma);
        const double hi = static_cast<double>(i + 1) / n - cdf;
        const double lo = cdf - static_cast<double>(i) / n;
        ks = std::max({ks, hi, lo});
    }

    LognormalFit fit;
    fit.mu = mu;
    fit.sigma = sigma;
    fit.ks_distance = ks;
    fit.n_used = logs.size();
    fit.dropped_zeros = dropped;
    return fit;
}

LognormalFit fit_lognormal(const VolumeSeries& series) {
    std::uint64_t dropped = 0;
    const auto vals = series.analysis_values(true, &dropped);
    LognormalFit fit = fit_lognormal(vals);
    fit.dropped_zeros += dropped;
    return fit;
}

PowerLawTailFit fit_left_tail_powerlaw(const LogPdf& pdf, double log10_lo, double log10_hi) {
    if (!(log10_lo < log10_hi)) throw DataError("power-law fit range is empty");
    const double ln10 = std::log(10.0);
    std::vector<double> x, y;
    for (std::size_t b = 0; b < pdf.centers.size(); ++b) {
        const double log10_center = pdf.centers[b] / ln10;
        if (log10_center < log10_lo || log10_center > log10_hi) continue;
        if (pdf.densities[b] <= 0.0) continue;
        x.push_back(pdf.centers[b]);
        y.push_back(std::log(pdf.densities[b]));
    }
    if (x.size() < 3) throw DataError("fewer than 3 occupied bins in the power-law fit range");
    const LinearFit fit = ols_fit(x, y);

    PowerLawTailFit out;
    out.exponent = fit.slope;
    out.stderr_ = fit.slope_stderr;
    out.range_lo = log10_lo;
    out.range_hi = log10_hi;
    out.r_squared = fit.r_squared;
    out.n_bins = x.size();
    return out;
}

std::vector<double> autocorrelation(std::span<const double> series, std::size_t max_lag) {
    const std::size_t n = series.size();
    if (n <= max_lag) throw DataError("series shorter than the requested maximum lag");

    double mean = 0.0;
    for (const double x : series) mean += x;
    mean /= static_cast<double>(n);

    double denom = 0.0;
    for (const double x : series) denom += (x - mean) * (x - mean);
    if (denom == 0.0) throw DataError("zero-variance series has no autocorrelation");

    std::vector<double> c(max_lag + 1, 0.0);
    c[0] = 1.0;
    for (std::size_t lag = 1; lag <= max_lag; ++lag) {
        double s = 0.0;
        for (std::size_t i = 0; i + lag < n; ++i) {
            s += (series[i] - mean) * (series[i + lag] - mean);
        }
        c[lag] = s / denom;
    }
    return c;
}

std::vector<double> autocorrelation(const VolumeSeries& series, std::size_t max_lag) {
    const auto vals = series.analysis_values(true);
    return autocorrelation(vals, max_lag);
}

namespace {

// Least-squares polynomial detrend of one box; returns the residual sum of
// squares. x runs 0..len-1 inside the box; the normal equations are solved
// with plain Gaussian elimination (order is small).
class BoxDetrender {
public:
    BoxDetrender(std::size_t len, int order)
        : len_(len), order_(order), dim_(static_cast<std::size_t>(order) + 1) {
        // power sums of x depend only on the box length
        std::vector<long double> pow_sums(2 * dim_ - 1, 0.0L);
        for (std::size_t i = 0; i < len; ++i) {
            long double p = 1.0L;
            for (std::size_t k = 0; k < pow_sums.size(); ++k) {
                pow_sums[k] += p;
                p *= static_cast<long double>(i);
            }
        }
        normal_.assign(dim_, std::vector<long double>(dim_, 0.0L));
        for (std::size_t r = 0; r < dim_; ++r) {
            for (std::size_t c = 0; c < dim_; ++c) normal_[r][c] = pow_sums[r + c];
        }
    }

    double residual_ss(std::span<const double> box) const {
        std::vector<long double> rhs(dim_, 0.0L);
        for (std::size_t i = 0; i < len_; ++i) {
            long double p = 1.0L;
            for (std::size_t k = 0; k < dim_; ++k) {
                rhs[k] += static_cast<long double>(box[i]) * p;
                p *= static_cast<long double>(i);
            }
        }
        // solve normal_ * coef = rhs
        auto a = normal_;
        auto b = rhs;
        for (std::size_t col = 0; col < dim_; ++col) {
            std::size_t pivot = col;
            for (std::size_t r = col + 1; r < dim_; ++r) {
                if (std::abs(static_cast<double>(a[r][col])) >
                    std::abs(static_cast<double>(a[pivot][col]))) {
                    pivot = r;
                }
            }
            std::swap(a[col], a[pivot]);
            std::swap(b[col], b[pivot]);
            for (std::size_t r = col + 1; r < dim_; ++r) {
                const long double f = a[r][col] / a[col][col];
                for (std::size_t c = col; c < dim_; ++c) a[r][c] -= f * a[col][c];
                b[r] -= f * b[col];
            }
        }
        std::vector<long double> coef(dim_, 0.0L);
        for (std::size_t r = dim_; r-- > 0;) {
            long double s = b[r];
            for (std::size_t c = r + 1; c < dim_; ++c) s -= a[r][c] * coef[c];
            coef[r] = s / a[r][r];
        }

        double ss = 0.0;
        for (std::size_t i = 0; i < len_; ++i) {
            long double fitv = 0.0L;
            long double p = 1.0L;
            for (std::size_t k = 0; k < dim_; ++k) {
                fitv += coef[k] * p;
                p *= static_cast<long double>(i);
            }
            const double r = box[i] - static_cast<double>(fitv);
            ss += r * r;
        }
        return ss;
    }

private:
    std::size_t len_;
    int order_;
    std::size_t dim_;
    std::vector<std::vector<long double>> normal_;
};

}  // namespace

DfaResult dfa(std::span<const double> series, const DfaConfig& config) {
    const std::size_t n = series.size();
    if (config.min_box < static_cast<std::size_t>(config.detrend_order) + 2) {
        throw DataError("minimum box size too small for the detrend order");
    }
    if (n < 4 * config.min_box) throw DataError("series too short for detrended analysis");
    if (config.detrend_order < 0 || config.detrend_order > 3) {
        throw DataError("detrend order must lie in [0, 3]");
    }

    double mean = 0.0;
    for (const double x : series) mean += x;
    mean /= static_cast<double>(n);

    std::vector<double> profile(n);
    double cum = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        cum += series[i] - mean;
        profile[i] = cum;
    }

    // geometric grid of box sizes
    std::vector<std::size_t> boxes;
    const std::size_t max_box = n / config.max_box_divisor;
    double l = static_cast<double>(config.min_box);
    while (static_cast<std::size_t>(l) <= max_box) {
        const auto li = static_cast<std::size_t>(l);
        if (boxes.empty() || boxes.back() != li) boxes.push_back(li);
        l = std::max(l * config.ratio, l + 1.0);
    }
    if (boxes.size() < 3) throw DataError("box grid too coarse; series too short");

    DfaResult result;
    result.n = n;
    result.box_sizes.reserve(boxes.size());
    result.fluctuation.reserve(boxes.size());

    for (const std::size_t box : boxes) {
        const std::size_t nb = n / box;
        const BoxDetrender detrender(box, config.detrend_order);
        double total_ss = 0.0;
        for (std::size_t b = 0; b < nb; ++b) {
            total_ss += detrender.residual_ss(
                std::span<const double>(profile.data() + b * box, box));
        }
        for (std::size_t b = 0; b < nb; ++b) {
            total_ss += detrender.residual_ss(
                std::span<const double>(profile.data() + n - (b + 1) * box, box));
        }
        const double f =
            std::sqrt(total_ss / (2.0 * static_cast<double>(nb) * static_cast<double>(box)));
        result.box_sizes.push_back(static_cast<double>(box));
        result.fluctuation.push_back(f);
    }

    double fit_lo, fit_hi;
    if (config.fit_range) {
        fit_lo = config.fit_range->first;
        fit_hi = config.fit_range->second;
    } else {
        // central decade of the grid in log10
        const double lo10 = std::log10(result.box_sizes.front());
        const double hi10 = std::log10(result.box_sizes.back());
        const double mid = 0.5 * (lo10 + hi10);
        fit_lo = std::pow(10.0, std::max(lo10, mid - 0.5));
        fit_hi = std::pow(10.0, std::min(hi10, mid + 0.5));
    }

    std::vector<double> x, y;
    for (std::size_t i = 0; i < result.box_sizes.size(); ++i) {
        if (result.box_sizes[i] < fit_lo || result.box_sizes[i] > fit_hi) continue;
        if (result.fluctuation[i] <= 0.0) continue;
        x.push_back(std::log10(result.box_sizes[i]));
        y.push_back(std::log10(result.fluctuation[i]));
    }
    if (x.size() < 3) throw DataError("fewer than 3 box sizes inside the Hurst fit window");
    const LinearFit fit = ols_fit(x, y);

    result.hurst = fit.slope;
    result.hurst_stderr = fit.slope_stderr;
    result.gamma = 2.0 - 2.0 * fit.slope;
    result.fit_lo = fit_lo;
    result.fit_hi = fit_hi;
    return result;
}

DfaResult dfa(const VolumeSeries& series, const DfaConfig& config) {
    const auto vals = series.analysis_values(true);
    return dfa(vals, config);
}

}  // namespace lobstat
