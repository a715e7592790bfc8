#pragma once

// Test-only reference implementations. The matcher keeps a flat list of
// resting orders and rescans it for every event, so it shares no code or
// data-structure assumptions with the engine under test.

#include <algorithm>
#include <cstdint>
#include <optional>
#include <stdexcept>
#include <vector>

#include "lobstat/book.hpp"
#include "lobstat/orderflow.hpp"

namespace refmatch {

using lobstat::OrderEvent;
using lobstat::OrderRef;
using lobstat::Shares;
using lobstat::Side;
using lobstat::Ticks;

struct RestingOrder {
    OrderRef ref;
    Side side;
    Ticks price;
    Shares size;
    std::uint64_t arrival;
};

struct Fill {
    Ticks price;
    Shares size;
};

class NaiveMatcher {
public:
    // Applies one event by rescanning the whole book, returning the fills in
    // execution order plus the added/cancelled volume.
    struct Delta {
        std::vector<Fill> fills;
        Shares added = 0;
        Shares cancelled = 0;
    };

    Delta apply(const OrderEvent& event) {
        Delta delta;
        switch (event.kind) {
            case lobstat::EventKind::BuyLimit:
                delta = match_limit(event, Side::Buy);
                break;
            case lobstat::EventKind::SellLimit:
                delta = match_limit(event, Side::Sell);
                break;
            case lobstat::EventKind::Cancel: {
                const auto it = std::find_if(orders_.begin(), orders_.end(),
                                             [&](const RestingOrder& o) {
                                                 return o.ref == event.order_ref;
                                             });
                if (it == orders_.end()) throw std::runtime_error("reference: cancel of unknown ref");
                delta.cancelled = it->size;
                orders_.erase(it);
                break;
            }
        }
        return delta;
    }

    std::optional<Ticks> best(Side side) const {
        std::optional<Ticks> b;
        for (const auto& o : orders_) {
            if (o.side != side) continue;
            if (!b || (side == Side::Buy ? o.price > *b : o.price < *b)) b = o.price;
        }
        return b;
    }

    // Dense per-depth volume of one side, summed order by order.
    std::vector<Shares> shape(Side side, int depth) const {
        std::vector<Shares> v(static_cast<std::size_t>(depth), 0);
        const auto b = best(side);
        if (!b) return v;
        for (const auto& o : orders_) {
            if (o.side != side) continue;
            const Ticks d = side == Side::Buy ? *b - o.price + 1 : o.price - *b + 1;
            if (d >= 1 && d <= depth) v[static_cast<std::size_t>(d - 1)] += o.size;
        }
        return v;
    }

    // Literal cumulative walk of the formula over the dense shape.
    struct Impact {
        Ticks ticks = 0;
        bool saturated = false;
    };

    Impact impact(Side aggressor, Shares omega, int depth) const {
        const Side book_side = lobstat::opposite(aggressor);
        const auto v = shape(book_side, depth);
        Shares total = 0;
        Ticks deepest = 0;
        for (int d = 1; d <= depth; ++d) {
            total += v[static_cast<std::size_t>(d - 1)];
            if (v[static_cast<std::size_t>(d - 1)] > 0) deepest = d;
        }
        if (total <= omega) return {deepest, omega > total};
        Shares cum = 0;
        Ticks sup = 0;
        for (int d = 1; d <= depth; ++d) {
            cum += v[static_cast<std::size_t>(d - 1)];
            if (cum <= omega) {
                sup = d;
            } else {
                break;
            }
        }
        return {sup, false};
    }

    std::vector<RestingOrder> sorted_orders() const {
        auto out = orders_;
        std::sort(out.begin(), out.end(), [](const RestingOrder& a, const RestingOrder& b) {
            if (a.side != b.side) return a.side == Side::Buy;
            if (a.price != b.price) {
                return a.side == Side::Buy ? a.price > b.price : a.price < b.price;
            }
            return a.arrival < b.arrival;
        });
        return out;
    }

    std::size_t size() const { return orders_.size(); }

    const std::vector<RestingOrder>& orders() const { return orders_; }

    Shares total_volume() const {
        Shares t = 0;
        for (const auto& o : orders_) t += o.size;
        return t;
    }

private:
    Delta match_limit(const OrderEvent& event, Side side) {
        Delta delta;
        Shares remaining = event.size;
        const Side opp = lobstat::opposite(side);
        while (remaining > 0) {
            // full rescan: best opposite price, earliest arrival within it
            RestingOrder* best_order = nullptr;
            for (auto& o : orders_) {
                if (o.side != opp) continue;
                const bool crosses =
                    side == Side::Buy ? o.price <= event.price : o.price >= event.price;
                if (!crosses) continue;
                if (best_order == nullptr) {
                    best_order = &o;
                    continue;
                }
                const bool better_price = side == Side::Buy ? o.price < best_order->price
                                                            : o.price > best_order->price;
                const bool same_price = o.price == best_order->price;
                if (better_price || (same_price && o.arrival < best_order->arrival)) {
                    best_order = &o;
                }
            }
            if (best_order == nullptr) break;
            const Shares fill = std::min(remaining, best_order->size);
            delta.fills.push_back({best_order->price, fill});
            best_order->size -= fill;
            remaining -= fill;
            if (best_order->size == 0) {
                orders_.erase(orders_.begin() + (best_order - orders_.data()));
            }
        }
        if (remaining > 0) {
            orders_.push_back({event.order_ref, side, event.price, remaining, arrival_++});
            delta.added = remaining;
        }
        return delta;
    }

    std::vector<RestingOrder> orders_;
    std::uint64_t arrival_ = 0;
};

}  // namespace refmatch
