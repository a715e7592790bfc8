#include "lobstat/book.hpp"

#include <string>

#include "lobstat/errors.hpp"

namespace lobstat {

LimitOrderBook::LimitOrderBook(SessionConfig config) : config_(std::move(config)) {
    config_.validate();
}

std::optional<Ticks> LimitOrderBook::best_bid() const {
    if (bids_.empty()) return std::nullopt;
    return bids_.begin()->first;
}

std::optional<Ticks> LimitOrderBook::best_ask() const {
    if (asks_.empty()) return std::nullopt;
    return asks_.begin()->first;
}

BookDelta LimitOrderBook::apply_event(const OrderEvent& event) {
    BookDelta delta;
    switch (event.kind) {
        case EventKind::BuyLimit: delta = apply_limit(event, Side::Buy); break;
        case EventKind::SellLimit: delta = apply_limit(event, Side::Sell); break;
        case EventKind::Cancel: delta = apply_cancel(event); break;
    }
    assert_not_crossed();
    return delta;
}

BookDelta LimitOrderBook::apply_limit(const OrderEvent& event, Side side) {
    if (event.size <= 0) throw DataError("limit order with nonpositive size");
    if (event.price < config_.band_lo() || event.price > config_.band_hi()) {
        throw DataError("limit price outside the session band");
    }
    if (order_index_.count(event.order_ref) != 0) {
        throw DataError("order_ref " + std::to_string(event.order_ref) +
                        " already rests in the book");
    }

    BookDelta delta;
    Shares remaining = event.size;

    // Execute against the opposite side while the limit price reaches it.
    auto fill_level = [&](PriceLevel& level) {
        while (remaining > 0 && !level.queue.empty()) {
            auto& head = level.queue.front();
            const Shares fill = std::min(remaining, head.remaining);
            head.remaining -= fill;
            level.total -= fill;
            remaining -= fill;
            delta.trades.push_back({level.price, fill});
            if (head.remaining == 0) {
                order_index_.erase(head.ref);
                level.queue.pop_front();
            }
        }
    };

    if (side == Side::Buy) {
        while (remaining > 0 && !asks_.empty() && asks_.begin()->first <= event.price) {
            auto it = asks_.begin();
            fill_level(it->second);
            if (it->second.queue.empty()) asks_.erase(it);
        }
        ask_volume_ -= delta.traded();
    } else {
        while (remaining > 0 && !bids_.empty() && bids_.begin()->first >= event.price) {
            auto it = bids_.begin();
            fill_level(it->second);
            if (it->second.queue.empty()) bids_.erase(it);
        }
        bid_volume_ -= delta.traded();
    }

    if (remaining > 0) {
        rest_order(side, event.price, event.order_ref, remaining);
        delta.added = remaining;
    }
    return delta;
}

BookDelta LimitOrderBook::apply_cancel(const OrderEvent& event) {
    const auto it = order_index_.find(event.order_ref);
    if (it == order_index_.end()) {
        throw DataError("cancel of unknown order_ref " + std::to_string(event.order_ref));
    }
    const IndexEntry entry = it->second;

    BookDelta delta;
    delta.cancelled = entry.pos->remaining;

    if (entry.side == Side::Buy) {
        auto lvl = bids_.find(entry.price);
        lvl->second.total -= delta.cancelled;
        lvl->second.queue.erase(entry.pos);
        if (lvl->second.queue.empty()) bids_.erase(lvl);
        bid_volume_ -= delta.cancelled;
    } else {
        auto lvl = asks_.find(entry.price);
        lvl->second.total -= delta.cancelled;
        lvl->second.queue.erase(entry.pos);
        if (lvl->second.queue.empty()) asks_.erase(lvl);
        ask_volume_ -= delta.cancelled;
    }
    order_index_.erase(it);
    return delta;
}

void LimitOrderBook::rest_order(Side side, Ticks price, OrderRef ref, Shares size) {
    PriceLevel* level;
    if (side == Side::Buy) {
        auto [it, inserted] = bids_.try_emplace(price);
        level = &it->second;
        bid_volume_ += size;
    } else {
        auto [it, inserted] = asks_.try_emplace(price);
        level = &it->second;
        ask_volume_ += size;
    }
    level->price = price;
    level->queue.push_back({ref, size});
    level->total += size;
    order_index_.emplace(ref, IndexEntry{side, price, std::prev(level->queue.end())});
}

void LimitOrderBook::assert_not_crossed() const {
    if (!bids_.empty() && !asks_.empty() && bids_.begin()->first >= asks_.begin()->first) {
        throw InvariantError("book crossed: best bid " + std::to_string(bids_.begin()->first) +
                             " >= best ask " + std::to_string(asks_.begin()->first));
    }
}

ShapeSnapshot LimitOrderBook::snapshot_shape(Side side, int depth, std::uint64_t t,
                                             WallTime wall_time) const {
    ShapeSnapshot snap;
    snap.t = t;
    snap.wall_time = wall_time;
    snap.side = side;
    snap.volumes.assign(static_cast<std::size_t>(depth), 0);

    if (side == Side::Buy) {
        if (bids_.empty()) return snap;
        snap.has_best = true;
        const Ticks best = bids_.begin()->first;
        for (const auto& [price, level] : bids_) {
            const Ticks d = best - price + 1;
            if (d > depth) break;
            snap.volumes[static_cast<std::size_t>(d - 1)] = level.total;
        }
    } else {
        if (asks_.empty()) return snap;
        snap.has_best = true;
        const Ticks best = asks_.begin()->first;
        for (const auto& [price, level] : asks_) {
            const Ticks d = price - best + 1;
            if (d > depth) break;
            snap.volumes[static_cast<std::size_t>(d - 1)] = level.total;
        }
    }
    return snap;
}

ImpactResult LimitOrderBook::virtual_price_impact(Side aggressor_side, Shares omega) const {
    if (omega < 0) throw DataError("impact probe size must be nonnegative");
    const Side book_side = opposite(aggressor_side);

    const auto walk = [&](const auto& levels) -> ImpactResult {
        if (levels.empty()) throw DataError("no liquidity on the " +
                                            std::string(side_name(book_side)) + " side");
        const Ticks best = levels.begin()->first;
        const auto depth_of = [&](Ticks price) {
            return book_side == Side::Buy ? best - price + 1 : price - best + 1;
        };
        const Shares total = side_volume(book_side);
        if (total <= omega) {
            return {depth_of(levels.rbegin()->first), omega > total};
        }
        Shares cum = 0;
        for (const auto& [price, level] : levels) {
            if (cum + level.total > omega) {
                return {depth_of(price) - 1, false};
            }
            cum += level.total;
        }
        throw InvariantError("impact walk overran the book");
    };

    return book_side == Side::Buy ? walk(bids_) : walk(asks_);
}

Shares LimitOrderBook::volume_at(Side side, Ticks price) const {
    if (side == Side::Buy) {
        const auto it = bids_.find(price);
        return it == bids_.end() ? 0 : it->second.total;
    }
    const auto it = asks_.find(price);
    return it == asks_.end() ? 0 : it->second.total;
}

Shares LimitOrderBook::volume_at_depth(Side side, int depth) const {
    if (side == Side::Buy) {
        if (bids_.empty()) return 0;
        return volume_at(side, bids_.begin()->first - (depth - 1));
    }
    if (asks_.empty()) return 0;
    return volume_at(side, asks_.begin()->first + (depth - 1));
}

std::vector<LimitOrderBook::RestingOrder> LimitOrderBook::resting_orders() const {
    std::vector<RestingOrder> out;
    out.reserve(order_index_.size());
    for (const auto& [price, level] : bids_) {
        for (const auto& e : level.queue) out.push_back({e.ref, Side::Buy, price, e.remaining});
    }
    for (const auto& [price, level] : asks_) {
        for (const auto& e : level.queue) out.push_back({e.ref, Side::Sell, price, e.remaining});
    }
    return out;
}

void LimitOrderBook::check_invariants() const {
    assert_not_crossed();
    Shares bid_total = 0, ask_total = 0;
    std::size_t orders = 0;
    const auto audit_side = [&](const auto& levels, Side side, Shares& side_total) {
        for (const auto& [price, level] : levels) {
            if (level.queue.empty()) throw InvariantError("empty price level retained");
            if (price < config_.band_lo() || price > config_.band_hi()) {
                throw InvariantError("resting price outside the session band");
            }
            Shares level_total = 0;
            for (auto it = level.queue.begin(); it != level.queue.end(); ++it) {
                if (it->remaining <= 0) throw InvariantError("resting order with nonpositive size");
                const auto idx = order_index_.find(it->ref);
                if (idx == order_index_.end() || idx->second.side != side ||
                    idx->second.price != price || idx->second.pos != it) {
                    throw InvariantError("order_index out of sync with the side maps");
                }
                level_total += it->remaining;
                ++orders;
            }
            if (level_total != level.total) throw InvariantError("level total out of sync");
            side_total += level_total;
        }
    };
    audit_side(bids_, Side::Buy, bid_total);
    audit_side(asks_, Side::Sell, ask_total);
    if (bid_total != bid_volume_ || ask_total != ask_volume_) {
        throw InvariantError("side volume counters out of sync");
    }
    if (orders != order_index_.size()) {
        throw InvariantError("order_index holds entries not present in the book");
    }
}

}  // namespace lobstat
