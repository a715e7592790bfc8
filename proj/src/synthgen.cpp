#include "lobstat/synthgen.hpp"

#include <algorithm>
#include <cmath>
#include <complex>
#include <string>
#include <unordered_map>

#include "lobstat/errors.hpp"
#include "lobstat/fft.hpp"
#include "lobstat/rng.hpp"

namespace lobstat {

void FlowParams::validate(const SessionConfig& config) const {
    config.validate();
    if (std::abs(buy_fraction + sell_fraction + cancel_fraction - 1.0) > 1e-9) {
        throw DataError("event mix fractions must sum to 1");
    }
    if (buy_fraction < 0 || sell_fraction < 0 || cancel_fraction < 0) {
        throw DataError("event mix fractions must be nonnegative");
    }
    if (buy_fraction + sell_fraction <= 0.0) {
        throw DataError("placement fractions must not both be zero");
    }
    if (law == PlacementLaw::Exponential && placement_beta <= 0.0) {
        throw DataError("placement rate must be positive");
    }
    if (law == PlacementLaw::Uniform &&
        (uniform_depth < 1 || uniform_depth > config.band_width())) {
        throw DataError("uniform placement depth exceeds the price band");
    }
    if (size_mu <= 0.0 || size_sigma < 0.0) throw DataError("bad order-size law");
    if (marketable_fraction < 0.0 || marketable_fraction >= 1.0) {
        throw DataError("marketable fraction must lie in [0, 1)");
    }
    if (marketable_size_mult < 1.0) throw DataError("marketable size multiplier must be >= 1");
    if (target_population == 0) throw DataError("target population must be positive");
    if (probe_delta < 1) throw DataError("probe depth must be at least 1");
    if (config.sessions.empty()) throw DataError("flow generation needs session windows");
}

namespace {

// Indexable set of live order refs with lazy purging of refs that left the
// book through execution.
class LiveRefs {
public:
    void insert(OrderRef ref) { refs_.push_back(ref); }

    // Picks a uniformly random resting order; stale refs found on the way
    // are discarded. Returns 0 when the book is empty.
    OrderRef pick(Rng& rng, const LimitOrderBook& book) {
        while (!refs_.empty()) {
            const std::size_t i = static_cast<std::size_t>(rng.below(refs_.size()));
            const OrderRef ref = refs_[i];
            if (book.contains(ref)) return ref;
            refs_[i] = refs_.back();
            refs_.pop_back();
        }
        return 0;
    }

private:
    std::vector<OrderRef> refs_;
};

}  // namespace

GeneratorLedger generate_order_flow(const FlowParams& params, const SessionConfig& config,
                                    const EventSink& sink) {
    params.validate(config);

    Rng rng(params.seed);
    LimitOrderBook book(config);
    LiveRefs live;
    GeneratorLedger ledger;

    const Ticks band_lo = config.band_lo();
    const Ticks band_hi = config.band_hi();
    const WallTime session_total = config.session_length();
    WallTime pos = 0;  // position on the concatenated session timeline
    OrderRef next_ref = 1;

    const auto draw_size = [&]() -> Shares {
        const double s = rng.lognormal(params.size_mu, params.size_sigma);
        return std::clamp<Shares>(static_cast<Shares>(std::llround(s)), 1, params.max_size);
    };

    const auto draw_depth = [&]() -> Ticks {
        if (params.law == FlowParams::PlacementLaw::Uniform) {
            return rng.uniform_int(1, params.uniform_depth);
        }
        const double d = rng.exponential(params.placement_beta);
        return std::clamp<Ticks>(1 + static_cast<Ticks>(d), 1, config.band_width());
    };

    for (std::uint64_t i = 0; i < params.events; ++i) {
        // spread the remaining events over the remaining session time
        const std::uint64_t remaining = params.events - i;
        const double mean_gap =
            static_cast<double>(session_total - 1 - pos) / static_cast<double>(remaining + 1);
        const WallTime gap = static_cast<WallTime>(mean_gap * rng.exponential(1.0));
        pos = std::min<WallTime>(pos + gap, session_total - 1);
        const WallTime wall = config.wall_at_position(pos);

        // event kind: cancel share scales with the resting population
        const std::size_t population = book.resting_order_count();
        const double cancel_scale =
            std::min(4.0, static_cast<double>(population) /
                              static_cast<double>(params.target_population));
        const double p_cancel = std::min(0.95, params.cancel_fraction * cancel_scale);

        const double u = rng.uniform();
        OrderEvent ev;
        ev.seq = i + 1;
        ev.wall_time = wall;

        if (u < p_cancel && population > 0) {
            const OrderRef victim = live.pick(rng, book);
            if (victim != 0) {
                ev.kind = EventKind::Cancel;
                ev.order_ref = victim;
                ev.size = 0;
                ev.price = 0;
                sink(ev);
                const BookDelta delta = book.apply_event(ev);
                ++ledger.cancels;
                ledger.volume_cancelled += delta.cancelled;
                ++ledger.events;
                if (const auto idx = config.interval_index(wall, params.ledger_dt_seconds)) {
                    ++ledger.interval_events[*idx];
                    ledger.interval_probe_sum[*idx] +=
                        book.volume_at_depth(Side::Buy, params.probe_delta);
                }
                continue;
            }
        }

        // placement (also the fallback when a cancel found an empty book)
        const double p_buy_given_placement =
            params.buy_fraction / (params.buy_fraction + params.sell_fraction);
        const Side side = rng.uniform() < p_buy_given_placement ? Side::Buy : Side::Sell;
        Shares size = draw_size();
        Ticks price;
        Ticks drawn_depth = 0;

        const auto same_best = side == Side::Buy ? book.best_bid() : book.best_ask();
        const auto opp_best = side == Side::Buy ? book.best_ask() : book.best_bid();

        const bool marketable = opp_best.has_value() && rng.uniform() < params.marketable_fraction;
        if (marketable) {
            const Ticks walk = rng.uniform_int(0, 3);
            price = side == Side::Buy ? *opp_best + walk : *opp_best - walk;
            size = std::clamp<Shares>(
                static_cast<Shares>(std::llround(static_cast<double>(size) *
                                                 params.marketable_size_mult)),
                1, params.max_size);
        } else {
            Ticks reference;
            if (same_best) {
                reference = *same_best;
            } else if (opp_best) {
                reference = side == Side::Buy ? *opp_best - 1 : *opp_best + 1;
            } else {
                reference = config.prev_close;
            }
            drawn_depth = draw_depth();
            price = side == Side::Buy ? reference - (drawn_depth - 1) : reference + (drawn_depth - 1);
        }
        price = std::clamp(price, band_lo, band_hi);

        ev.kind = side == Side::Buy ? EventKind::BuyLimit : EventKind::SellLimit;
        ev.order_ref = next_ref++;
        ev.size = size;
        ev.price = price;
        sink(ev);
        const BookDelta delta = book.apply_event(ev);
        if (delta.added > 0) live.insert(ev.order_ref);

        if (side == Side::Buy) {
            ++ledger.buy_orders;
        } else {
            ++ledger.sell_orders;
        }
        if (delta.added > 0 && !marketable) {
            auto& placements = side == Side::Buy ? ledger.buy_placement_volume
                                                 : ledger.sell_placement_volume;
            placements[static_cast<int>(drawn_depth)] += delta.added;
        }
        ledger.volume_placed += delta.added;
        ledger.volume_traded += delta.traded();
        ++ledger.events;
        if (const auto idx = config.interval_index(wall, params.ledger_dt_seconds)) {
            ++ledger.interval_events[*idx];
            ledger.interval_probe_sum[*idx] +=
                book.volume_at_depth(Side::Buy, params.probe_delta);
        }
    }

    ledger.final_resting_orders = book.resting_order_count();
    return ledger;
}

std::pair<std::vector<OrderEvent>, GeneratorLedger> generate_order_flow(
    const FlowParams& params, const SessionConfig& config) {
    std::vector<OrderEvent> events;
    events.reserve(params.events);
    GeneratorLedger ledger = generate_order_flow(params, config, [&](const OrderEvent& ev) {
        events.push_back(ev);
    });
    return {std::move(events), ledger};
}

double fgn_autocovariance(double hurst, std::size_t lag) {
    if (lag == 0) return 1.0;
    const double k = static_cast<double>(lag);
    const double h2 = 2.0 * hurst;
    return 0.5 * (std::pow(k + 1.0, h2) - 2.0 * std::pow(k, h2) + std::pow(k - 1.0, h2));
}

std::vector<double> generate_fgn(const FgnParams& params) {
    const std::size_t n = params.length;
    if (n < 2 || (n & (n - 1)) != 0) throw DataError("fGn length must be a power of two >= 2");
    if (params.hurst <= 0.0 || params.hurst >= 1.0) throw DataError("Hurst index must lie in (0, 1)");

    const std::size_t m = 2 * n;

    // first row of the circulant extension of the covariance
    std::vector<std::complex<double>> eig(m);
    for (std::size_t k = 0; k <= n; ++k) eig[k] = fgn_autocovariance(params.hurst, k);
    for (std::size_t k = n + 1; k < m; ++k) eig[k] = eig[m - k];
    fft_inplace(eig, false);

    double max_eig = 0.0;
    for (const auto& e : eig) max_eig = std::max(max_eig, e.real());
    for (auto& e : eig) {
        double v = e.real();
        if (v < 0.0) {
            if (v < -1e-8 * max_eig) {
                throw DataError("circulant embedding not positive semidefinite; use a larger length");
            }
            v = 0.0;
        }
        e = v;
    }

    Rng rng(params.seed);
    std::vector<std::complex<double>> freq(m);
    freq[0] = std::sqrt(eig[0].real()) * rng.normal();
    freq[n] = std::sqrt(eig[n].real()) * rng.normal();
    for (std::size_t k = 1; k < n; ++k) {
        const double scale = std::sqrt(0.5 * eig[k].real());
        const double a = rng.normal();
        const double b = rng.normal();
        freq[k] = std::complex<double>(scale * a, scale * b);
        freq[m - k] = std::conj(freq[k]);
    }

    fft_inplace(freq, false);
    const double norm = 1.0 / std::sqrt(static_cast<double>(m));
    std::vector<double> out(n);
    for (std::size_t i = 0; i < n; ++i) out[i] = freq[i].real() * norm;
    return out;
}

AveragedShape generate_planted_shape(const PlantedShapeParams& params) {
    if (params.depth < 1) throw DataError("planted shape depth must be positive");
    Rng rng(params.seed);

    AveragedShape shape;
    shape.side = params.side;
    shape.count = 1;
    shape.mean.resize(static_cast<std::size_t>(params.depth));
    shape.stddev.assign(static_cast<std::size_t>(params.depth), 0.0);

    for (int d = 1; d <= params.depth; ++d) {
        double v = 0.0;
        switch (params.kind) {
            case PlantedShapeParams::Kind::Exponential:
                v = params.scale * std::exp(-params.beta * static_cast<double>(d));
                break;
            case PlantedShapeParams::Kind::Mode:
                v = params.scale *
                    std::exp(-params.beta * std::abs(static_cast<double>(d - params.mode_position)));
                break;
            case PlantedShapeParams::Kind::Periodic:
                v = params.scale * std::exp(-params.beta * static_cast<double>(d));
                if (d % params.peak_period == 1 && d > 1) v *= params.peak_boost;
                break;
        }
        if (params.noise_sigma > 0.0) v *= std::exp(params.noise_sigma * rng.normal());
        if (params.truncate_at > 0 && d > params.truncate_at) v = 0.0;
        shape.mean[static_cast<std::size_t>(d - 1)] = v;
    }
    return shape;
}

}  // namespace lobstat
