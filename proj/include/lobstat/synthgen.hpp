#pragma once

#include <cstdint>
#include <functional>
#include <map>
#include <vector>

#include "lobstat/book.hpp"
#include "lobstat/shape.hpp"

namespace lobstat {

// Parameters of the synthetic order-flow generator. Event kinds follow the
// requested mix, except that the cancel share is scaled by the ratio of the
// current resting-order population to target_population: each resting order
// then carries a roughly uniform cancel hazard and the book stays bounded
// instead of growing with the stream.
struct FlowParams {
    enum class PlacementLaw : std::uint8_t { Exponential, Uniform };

    std::uint64_t events = 100'000;
    double buy_fraction = 0.44;
    double sell_fraction = 0.41;
    double cancel_fraction = 0.15;

    PlacementLaw law = PlacementLaw::Exponential;
    double placement_beta = 0.044;  // exponential depth rate, per tick
    int uniform_depth = 50;         // uniform law support [1, uniform_depth]

    double size_mu = 6.2;           // lognormal of order size, in log shares
    double size_sigma = 1.0;
    Shares max_size = 100'000;

    double marketable_fraction = 0.10;  // orders priced at/through the opposite best
    double marketable_size_mult = 4.0;
    std::size_t target_population = 30'000;

    int ledger_dt_seconds = 60;
    int probe_delta = 1;            // depth whose buy-side volume the ledger tracks

    std::uint64_t seed = 1;

    void validate(const SessionConfig& config) const;
};

// Exact bookkeeping of what the generator emitted, for cross-checking stream
// reports and interval averages downstream.
struct GeneratorLedger {
    std::uint64_t events = 0;
    std::uint64_t buy_orders = 0;
    std::uint64_t sell_orders = 0;
    std::uint64_t cancels = 0;

    std::map<std::uint64_t, std::uint64_t> interval_events;
    std::map<std::uint64_t, Shares> interval_probe_sum;  // sum of buy V(probe_delta) per interval
    std::map<int, Shares> buy_placement_volume;          // drawn depth -> resting volume placed
    std::map<int, Shares> sell_placement_volume;

    Shares volume_placed = 0;
    Shares volume_traded = 0;
    Shares volume_cancelled = 0;
    std::size_t final_resting_orders = 0;
};

// Streams a deterministic, fully valid event sequence into the sink. Every
// emitted event parses and applies cleanly: prices stay on the grid inside
// the band, wall times are nondecreasing inside the session windows, and
// cancels always reference a live order.
GeneratorLedger generate_order_flow(const FlowParams& params, const SessionConfig& config,
                                    const EventSink& sink);

std::pair<std::vector<OrderEvent>, GeneratorLedger> generate_order_flow(
    const FlowParams& params, const SessionConfig& config);

struct FgnParams {
    double hurst = 0.5;     // in (0, 1)
    std::size_t length = 1 << 16;  // power of two
    std::uint64_t seed = 1;
};

// Exact autocovariance of fractional Gaussian noise at lag k for unit
// variance: 0.5 * (|k+1|^2H - 2|k|^2H + |k-1|^2H).
double fgn_autocovariance(double hurst, std::size_t lag);

// Stationary Gaussian series with the fGn autocovariance, generated by
// circulant spectral embedding; the covariance is exact in distribution.
std::vector<double> generate_fgn(const FgnParams& params);

// Deterministic averaged-shape fixtures for the shape estimators.
struct PlantedShapeParams {
    enum class Kind : std::uint8_t { Exponential, Mode, Periodic };

    Kind kind = Kind::Exponential;
    Side side = Side::Buy;
    int depth = 200;
    double scale = 1000.0;      // volume at the reference depth
    double beta = 0.025;        // exponential decay per tick
    int mode_position = 11;     // Kind::Mode maximum
    double peak_boost = 1.3;    // Kind::Periodic multiplier at period*n + 1
    int peak_period = 5;
    double noise_sigma = 0.0;   // multiplicative lognormal noise
    int truncate_at = 0;        // > 0: zero volume beyond this depth (price band edge)
    std::uint64_t seed = 1;
};

AveragedShape generate_planted_shape(const PlantedShapeParams& params);

}  // namespace lobstat
