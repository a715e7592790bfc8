#pragma once

#include <list>
#include <map>
#include <optional>
#include <unordered_map>
#include <vector>

#include "lobstat/orderflow.hpp"

namespace lobstat {

// One price level: a FIFO queue of resting orders. Queue order is arrival
// order, which is the time-priority order within the price.
struct PriceLevel {
    struct Entry {
        OrderRef ref;
        Shares remaining;
    };
    Ticks price = 0;
    std::list<Entry> queue;
    Shares total = 0;
};

struct Trade {
    Ticks price;
    Shares size;

    bool operator==(const Trade&) const = default;
};

// What one applied event did to the book. Conservation holds exactly:
// added - traded() - cancelled equals the change in total resting volume.
struct BookDelta {
    std::vector<Trade> trades;
    Shares added = 0;
    Shares cancelled = 0;

    Shares traded() const {
        Shares t = 0;
        for (const auto& tr : trades) t += tr.size;
        return t;
    }
};

// Instantaneous volume profile of one side, indexed by relative depth.
// volumes[0] is depth 1, the same-side best; depth d maps to the price
// d-1 ticks away from the best, toward the worse side.
struct ShapeSnapshot {
    std::uint64_t t = 0;        // event time
    WallTime wall_time = 0;
    Side side = Side::Buy;
    bool has_best = false;      // false: side empty, volumes all zero
    std::vector<Shares> volumes;

    Shares at_depth(int depth) const { return volumes[static_cast<std::size_t>(depth - 1)]; }
};

struct ImpactResult {
    Ticks ticks = 0;        // displacement in ticks; multiply by tick size for currency
    bool saturated = false; // the probe size exceeded the whole resting volume
};

// Two-sided limit order book under price-time priority. One instance is a
// strictly sequential state machine; snapshots are plain values and safe to
// hand elsewhere.
class LimitOrderBook {
public:
    explicit LimitOrderBook(SessionConfig config);

    // Applies one validated event. An incoming limit order that does not
    // reach the opposite best rests at its price; one that does executes
    // against opposite levels in price-then-time priority at the resting
    // orders' prices, and any unfilled remainder rests. A cancel removes the
    // referenced order's remaining size.
    BookDelta apply_event(const OrderEvent& event);

    std::optional<Ticks> best_bid() const;
    std::optional<Ticks> best_ask() const;

    ShapeSnapshot snapshot_shape(Side side, int depth, std::uint64_t t = 0,
                                 WallTime wall_time = 0) const;

    // Price displacement a hypothetical market order of size omega on the
    // given side would cause by walking the opposite book. omega below the
    // opposite best's volume yields 0; omega above the whole opposite volume
    // yields the deepest occupied depth, flagged saturated.
    ImpactResult virtual_price_impact(Side aggressor_side, Shares omega) const;

    Shares volume_at(Side side, Ticks price) const;
    Shares volume_at_depth(Side side, int depth) const;

    Shares side_volume(Side side) const { return side == Side::Buy ? bid_volume_ : ask_volume_; }
    Shares total_resting_volume() const { return bid_volume_ + ask_volume_; }
    std::size_t resting_order_count() const { return order_index_.size(); }
    std::size_t level_count(Side side) const {
        return side == Side::Buy ? bids_.size() : asks_.size();
    }

    bool contains(OrderRef ref) const { return order_index_.count(ref) != 0; }

    struct RestingOrder {
        OrderRef ref;
        Side side;
        Ticks price;
        Shares size;

        bool operator==(const RestingOrder&) const = default;
    };

    // Canonical dump: bids best-to-worse, then asks best-to-worse, FIFO order
    // within each price.
    std::vector<RestingOrder> resting_orders() const;

    const SessionConfig& config() const { return config_; }

    // Full structural audit (totals, index bijection, no empty levels, price
    // band). O(book); meant for tests, not the per-event path.
    void check_invariants() const;

private:
    using BidMap = std::map<Ticks, PriceLevel, std::greater<Ticks>>;
    using AskMap = std::map<Ticks, PriceLevel>;

    struct IndexEntry {
        Side side;
        Ticks price;
        std::list<PriceLevel::Entry>::iterator pos;
    };

    BookDelta apply_limit(const OrderEvent& event, Side side);
    BookDelta apply_cancel(const OrderEvent& event);
    void rest_order(Side side, Ticks price, OrderRef ref, Shares size);
    void assert_not_crossed() const;

    SessionConfig config_;
    BidMap bids_;
    AskMap asks_;
    std::unordered_map<OrderRef, IndexEntry> order_index_;
    Shares bid_volume_ = 0;
    Shares ask_volume_ = 0;
};

}  // namespace lobstat
