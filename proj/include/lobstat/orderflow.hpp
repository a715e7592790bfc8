#pragma once

#include <cstdint>
#include <functional>
#include <iosfwd>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <variant>
#include <vector>

namespace lobstat {

using Ticks = std::int64_t;      // prices as integer multiples of the tick size
using Shares = std::int64_t;     // order sizes
using OrderRef = std::uint64_t;  // identifier linking cancels to resting orders
using WallTime = std::int64_t;   // centiseconds since midnight

enum class EventKind : std::uint8_t { BuyLimit, SellLimit, Cancel };
enum class Side : std::uint8_t { Buy, Sell };

inline Side opposite(Side s) { return s == Side::Buy ? Side::Sell : Side::Buy; }
inline const char* side_name(Side s) { return s == Side::Buy ? "buy" : "sell"; }

struct SessionWindow {
    WallTime open = 0;   // inclusive
    WallTime close = 0;  // inclusive
};

// Trading-session parameters: tick size, previous close, daily price band,
// and the clock windows of continuous trading.
struct SessionConfig {
    double tick_size = 0.01;      // currency units per tick
    Ticks prev_close = 0;         // in ticks
    double limit_fraction = 0.10; // daily band, fraction of prev_close
    std::vector<SessionWindow> sessions;

    Ticks band_lo() const;
    Ticks band_hi() const;
    Ticks band_width() const { return band_hi() - band_lo() + 1; }

    bool in_session(WallTime t) const;

    // Index of the clock interval of length dt_seconds containing t, counted
    // over the concatenated session windows. Intervals are open at the left
    // edge and closed at the right; an event exactly at a window open is
    // assigned to the window's first interval. nullopt if t is out of session.
    std::optional<std::uint64_t> interval_index(WallTime t, int dt_seconds) const;
    std::uint64_t interval_count(int dt_seconds) const;

    // Total session length in centiseconds, and the mapping between wall time
    // and position on the concatenated session timeline.
    WallTime session_length() const;
    WallTime session_position(WallTime t) const;
    WallTime wall_at_position(WallTime pos) const;

    void validate() const;

    static SessionConfig defaults(Ticks prev_close_ticks);
    static SessionConfig from_file(const std::string& path);
    void write_file(const std::string& path) const;
};

// One validated order-flow record. Event time is the seq number: it advances
// by one per applied event. Cancels carry price = 0 and size = 0; the
// referenced resting order determines both.
struct OrderEvent {
    std::uint64_t seq = 0;
    WallTime wall_time = 0;
    EventKind kind = EventKind::BuyLimit;
    OrderRef order_ref = 0;
    Shares size = 0;
    Ticks price = 0;

    bool operator==(const OrderEvent&) const = default;
};

enum class RejectReason : std::uint8_t { Malformed, OffGrid, OutOfBand, OutOfSession };

const char* reject_reason_name(RejectReason r);

struct Rejection {
    RejectReason reason;
    std::string detail;
};

using ParseResult = std::variant<OrderEvent, Rejection>;

// Stream-level accounting: every record read lands either in a kind counter
// or in the reject histogram.
struct StreamReport {
    std::uint64_t records_read = 0;
    std::uint64_t buy_orders = 0;
    std::uint64_t sell_orders = 0;
    std::uint64_t cancels = 0;
    std::uint64_t invalid_count = 0;
    std::map<RejectReason, std::uint64_t> rejects;

    std::uint64_t emitted() const { return buy_orders + sell_orders + cancels; }
};

inline constexpr std::string_view kEventCsvHeader = "seq,wall_time,kind,order_ref,size,price";

// Wall times on the wire are HH:MM:SS.ss with 0.01 s resolution.
std::optional<WallTime> parse_wall_time(std::string_view text);
std::string format_wall_time(WallTime t);

// Prices on the wire are currency units with exactly two decimals.
std::string format_price(Ticks price, const SessionConfig& config);

ParseResult parse_event_record(std::string_view line, const SessionConfig& config);
std::string format_event_record(const OrderEvent& event, const SessionConfig& config);

using EventSink = std::function<void(const OrderEvent&)>;

// Single pass over a CSV stream: header is checked, every record is parsed
// and validated, valid events are renumbered with consecutive seq starting at
// 1 and handed to the sink in input order. Wall-time regression is a hard
// error; invalid records are counted, not emitted.
StreamReport for_each_event(std::istream& in, const SessionConfig& config, const EventSink& sink);

std::pair<std::vector<OrderEvent>, StreamReport> load_stream(std::istream& in,
                                                             const SessionConfig& config);

}  // namespace lobstat
