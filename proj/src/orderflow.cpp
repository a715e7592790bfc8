#include "lobstat/orderflow.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <istream>
#include <sstream>

#include "lobstat/errors.hpp"

namespace lobstat {

namespace {

constexpr WallTime kCsPerSecond = 100;
constexpr WallTime kCsPerMinute = 60 * kCsPerSecond;
constexpr WallTime kCsPerHour = 60 * kCsPerMinute;

// Tick size expressed in integer cents; the wire format carries two decimals.
std::int64_t tick_cents(const SessionConfig& config) {
    const std::int64_t cents = std::llround(config.tick_size * 100.0);
    if (cents <= 0 || std::abs(cents * 0.01 - config.tick_size) > 1e-9) {
        throw DataError("tick_size must be a positive multiple of 0.01");
    }
    return cents;
}

bool parse_u64(std::string_view s, std::uint64_t& out) {
    if (s.empty()) return false;
    const auto* end = s.data() + s.size();
    auto res = std::from_chars(s.data(), end, out);
    return res.ec == std::errc() && res.ptr == end;
}

bool parse_i64(std::string_view s, std::int64_t& out) {
    if (s.empty()) return false;
    const auto* end = s.data() + s.size();
    auto res = std::from_chars(s.data(), end, out);
    return res.ec == std::errc() && res.ptr == end;
}

bool all_digits(std::string_view s) {
    return !s.empty() && std::all_of(s.begin(), s.end(), [](char c) { return c >= '0' && c <= '9'; });
}

// "DD...D.dd" -> integer cents. Exactly two decimals required.
std::optional<std::int64_t> parse_price_cents(std::string_view s) {
    const auto dot = s.find('.');
    if (dot == std::string_view::npos || s.size() - dot != 3) return std::nullopt;
    const std::string_view whole = s.substr(0, dot);
    const std::string_view frac = s.substr(dot + 1);
    if (!all_digits(whole) || !all_digits(frac)) return std::nullopt;
    std::int64_t w = 0;
    if (!parse_i64(whole, w)) return std::nullopt;
    return w * 100 + (frac[0] - '0') * 10 + (frac[1] - '0');
}

std::vector<std::string_view> split_fields(std::string_view line) {
    std::vector<std::string_view> fields;
    std::size_t start = 0;
    while (true) {
        const std::size_t comma = line.find(',', start);
        if (comma == std::string_view::npos) {
            fields.push_back(line.substr(start));
            break;
        }
        fields.push_back(line.substr(start, comma - start));
        start = comma + 1;
    }
    return fields;
}

Rejection malformed(std::string detail) {
    return Rejection{RejectReason::Malformed, std::move(detail)};
}

}  // namespace

Ticks SessionConfig::band_lo() const {
    return std::llround(static_cast<double>(prev_close) * (1.0 - limit_fraction));
}

Ticks SessionConfig::band_hi() const {
    return std::llround(static_cast<double>(prev_close) * (1.0 + limit_fraction));
}

bool SessionConfig::in_session(WallTime t) const {
    if (sessions.empty()) return true;
    for (const auto& w : sessions) {
        if (t >= w.open && t <= w.close) return true;
    }
    return false;
}

std::optional<std::uint64_t> SessionConfig::interval_index(WallTime t, int dt_seconds) const {
    const WallTime dt_cs = static_cast<WallTime>(dt_seconds) * kCsPerSecond;
    std::uint64_t offset = 0;
    for (const auto& w : sessions) {
        if (t >= w.open && t <= w.close) {
            const WallTime pos = t - w.open;
            // intervals are (lo, hi]; the window open itself maps to interval 0
            const std::uint64_t k = pos == 0 ? 0 : static_cast<std::uint64_t>((pos - 1) / dt_cs);
            return offset + k;
        }
        const WallTime len = w.close - w.open;
        offset += static_cast<std::uint64_t>((len + dt_cs - 1) / dt_cs);
    }
    if (sessions.empty()) {
        return t <= 0 ? 0 : static_cast<std::uint64_t>((t - 1) / dt_cs);
    }
    return std::nullopt;
}

std::uint64_t SessionConfig::interval_count(int dt_seconds) const {
    const WallTime dt_cs = static_cast<WallTime>(dt_seconds) * kCsPerSecond;
    std::uint64_t n = 0;
    for (const auto& w : sessions) {
        const WallTime len = w.close - w.open;
        n += static_cast<std::uint64_t>((len + dt_cs - 1) / dt_cs);
    }
    return n;
}

WallTime SessionConfig::session_length() const {
    WallTime total = 0;
    for (const auto& w : sessions) total += w.close - w.open + 1;
    return total;
}

WallTime SessionConfig::session_position(WallTime t) const {
    WallTime offset = 0;
    for (const auto& w : sessions) {
        if (t >= w.open && t <= w.close) return offset + (t - w.open);
        offset += w.close - w.open + 1;
    }
    throw DataError("wall time outside session windows");
}

WallTime SessionConfig::wall_at_position(WallTime pos) const {
    WallTime offset = 0;
    for (const auto& w : sessions) {
        const WallTime len = w.close - w.open + 1;
        if (pos < offset + len) return w.open + (pos - offset);
        offset += len;
    }
    throw DataError("session position past end of trading day");
}

void SessionConfig::validate() const {
    if (tick_size <= 0.0) throw DataError("tick_size must be positive");
    tick_cents(*this);
    if (limit_fraction <= 0.0 || limit_fraction >= 1.0) {
        throw DataError("limit_fraction must lie in (0, 1)");
    }
    if (prev_close <= 0) throw DataError("prev_close must be positive");
    if (band_lo() < 1) throw DataError("price band extends below one tick");
    WallTime prev_close_time = -1;
    for (const auto& w : sessions) {
        if (w.open >= w.close) throw DataError("session window open must precede close");
        if (w.open <= prev_close_time) throw DataError("session windows must be disjoint and ordered");
        prev_close_time = w.close;
    }
}

SessionConfig SessionConfig::defaults(Ticks prev_close_ticks) {
    SessionConfig c;
    c.tick_size = 0.01;
    c.prev_close = prev_close_ticks;
    c.limit_fraction = 0.10;
    c.sessions = {
        {9 * kCsPerHour + 30 * kCsPerMinute, 11 * kCsPerHour + 30 * kCsPerMinute},
        {13 * kCsPerHour, 15 * kCsPerHour},
    };
    return c;
}

SessionConfig SessionConfig::from_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw DataError("cannot open config file: " + path);
    SessionConfig c;
    c.sessions.clear();
    bool have_prev_close = false;
    double prev_close_currency = 0.0;
    std::string line;
    while (std::getline(in, line)) {
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty() || line[0] == '#') continue;
        const auto eq = line.find('=');
        if (eq == std::string::npos) throw DataError("config line missing '=': " + line);
        const std::string key = line.substr(0, eq);
        const std::string value = line.substr(eq + 1);
        if (key == "tick_size") {
            c.tick_size = std::stod(value);
        } else if (key == "prev_close") {
            prev_close_currency = std::stod(value);
            have_prev_close = true;
        } else if (key == "limit_fraction") {
            c.limit_fraction = std::stod(value);
        } else if (key == "session") {
            const auto dash = value.find('-');
            if (dash == std::string::npos) throw DataError("bad session window: " + value);
            const auto open = parse_wall_time(value.substr(0, dash));
            const auto close = parse_wall_time(value.substr(dash + 1));
            if (!open || !close) throw DataError("bad session window: " + value);
            c.sessions.push_back({*open, *close});
        } else {
            throw DataError("unknown config key: " + key);
        }
    }
    if (!have_prev_close) throw DataError("config missing prev_close");
    const double ticks = prev_close_currency / c.tick_size;
    c.prev_close = std::llround(ticks);
    if (std::abs(ticks - static_cast<double>(c.prev_close)) > 1e-6) {
        throw DataError("prev_close is not on the tick grid");
    }
    c.validate();
    return c;
}

void SessionConfig::write_file(const std::string& path) const {
    std::ofstream out(path);
    if (!out) throw DataError("cannot write config file: " + path);
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.2f", tick_size);
    out << "tick_size=" << buf << "\n";
    std::snprintf(buf, sizeof(buf), "%.2f", static_cast<double>(prev_close) * tick_size);
    out << "prev_close=" << buf << "\n";
    std::snprintf(buf, sizeof(buf), "%.2f", limit_fraction);
    out << "limit_fraction=" << buf << "\n";
    for (const auto& w : sessions) {
        out << "session=" << format_wall_time(w.open).substr(0, 8) << "-"
            << format_wall_time(w.close).substr(0, 8) << "\n";
    }
}

const char* reject_reason_name(RejectReason r) {
    switch (r) {
        case RejectReason::Malformed: return "malformed";
        case RejectReason::OffGrid: return "off_grid";
        case RejectReason::OutOfBand: return "out_of_band";
        case RejectReason::OutOfSession: return "out_of_session";
    }
    return "unknown";
}

std::optional<WallTime> parse_wall_time(std::string_view text) {
    // HH:MM:SS or HH:MM:SS.ss
    if (text.size() != 8 && text.size() != 11) return std::nullopt;
    if (text[2] != ':' || text[5] != ':') return std::nullopt;
    if (text.size() == 11 && text[8] != '.') return std::nullopt;
    const auto digits2 = [&](std::size_t pos) -> int {
        const char a = text[pos], b = text[pos + 1];
        if (a < '0' || a > '9' || b < '0' || b > '9') return -1;
        return (a - '0') * 10 + (b - '0');
    };
    const int hh = digits2(0), mm = digits2(3), ss = digits2(6);
    const int cs = text.size() == 11 ? digits2(9) : 0;
    if (hh < 0 || mm < 0 || ss < 0 || cs < 0) return std::nullopt;
    if (hh > 23 || mm > 59 || ss > 59) return std::nullopt;
    return ((hh * 60 + mm) * 60 + ss) * kCsPerSecond + cs;
}

std::string format_wall_time(WallTime t) {
    const int cs = static_cast<int>(t % kCsPerSecond);
    const int total_s = static_cast<int>(t / kCsPerSecond);
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%02d:%02d:%02d.%02d", total_s / 3600, (total_s / 60) % 60,
                  total_s % 60, cs);
    return buf;
}

std::string format_price(Ticks price, const SessionConfig& config) {
    const std::int64_t cents = price * tick_cents(config);
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%lld.%02lld", static_cast<long long>(cents / 100),
                  static_cast<long long>(cents % 100));
    return buf;
}

ParseResult parse_event_record(std::string_view line, const SessionConfig& config) {
    const auto fields = split_fields(line);
    if (fields.size() != 6) return malformed("expected 6 fields");

    OrderEvent ev;
    if (!parse_u64(fields[0], ev.seq)) return malformed("bad seq");

    const auto wall = parse_wall_time(fields[1]);
    if (!wall) return malformed("bad wall_time");
    ev.wall_time = *wall;

    if (fields[2].size() != 1) return malformed("bad kind");
    switch (fields[2][0]) {
        case 'B': ev.kind = EventKind::BuyLimit; break;
        case 'S': ev.kind = EventKind::SellLimit; break;
        case 'C': ev.kind = EventKind::Cancel; break;
        default: return malformed("bad kind");
    }

    if (!parse_u64(fields[3], ev.order_ref)) return malformed("bad order_ref");
    if (ev.order_ref == 0) return malformed("order_ref must be nonzero");

    if (!parse_i64(fields[4], ev.size)) return malformed("bad size");

    const auto cents = parse_price_cents(fields[5]);
    if (!cents) return malformed("bad price");

    if (!config.in_session(ev.wall_time)) {
        return Rejection{RejectReason::OutOfSession, std::string(fields[1])};
    }

    if (ev.kind == EventKind::Cancel) {
        // price/size are unused for cancels; the resting order carries both
        ev.size = 0;
        ev.price = 0;
        return ev;
    }

    if (ev.size <= 0) return malformed("size must be positive");
    const std::int64_t tc = tick_cents(config);
    if (*cents <= 0) return malformed("price must be positive");
    if (*cents % tc != 0) return Rejection{RejectReason::OffGrid, std::string(fields[5])};
    ev.price = *cents / tc;
    if (ev.price < config.band_lo() || ev.price > config.band_hi()) {
        return Rejection{RejectReason::OutOfBand, std::string(fields[5])};
    }
    return ev;
}

std::string format_event_record(const OrderEvent& event, const SessionConfig& config) {
    std::string out;
    out.reserve(48);
    out += std::to_string(event.seq);
    out += ',';
    out += format_wall_time(event.wall_time);
    out += ',';
    switch (event.kind) {
        case EventKind::BuyLimit: out += 'B'; break;
        case EventKind::SellLimit: out += 'S'; break;
        case EventKind::Cancel: out += 'C'; break;
    }
    out += ',';
    out += std::to_string(event.order_ref);
    out += ',';
    out += std::to_string(event.size);
    out += ',';
    out += format_price(event.price, config);
    return out;
}

StreamReport for_each_event(std::istream& in, const SessionConfig& config, const EventSink& sink) {
    std::string line;
    if (!std::getline(in, line)) throw DataError("empty input: missing header row");
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line != kEventCsvHeader) throw DataError("unexpected CSV header: " + line);

    StreamReport report;
    std::uint64_t next_seq = 1;
    WallTime prev_wall = -1;
    while (std::getline(in, line)) {
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        ++report.records_read;
        ParseResult res = parse_event_record(line, config);
        if (std::holds_alternative<Rejection>(res)) {
            const auto& rej = std::get<Rejection>(res);
            ++report.invalid_count;
            ++report.rejects[rej.reason];
            continue;
        }
        OrderEvent ev = std::get<OrderEvent>(res);
        if (ev.wall_time < prev_wall) {
            throw DataError("wall_time regression at record " + std::to_string(report.records_read));
        }
        prev_wall = ev.wall_time;
        ev.seq = next_seq++;
        switch (ev.kind) {
            case EventKind::BuyLimit: ++report.buy_orders; break;
            case EventKind::SellLimit: ++report.sell_orders; break;
            case EventKind::Cancel: ++report.cancels; break;
        }
        sink(ev);
    }
    return report;
}

std::pair<std::vector<OrderEvent>, StreamReport> load_stream(std::istream& in,
                                                             const SessionConfig& config) {
    std::vector<OrderEvent> events;
    StreamReport report = for_each_event(in, config, [&](const OrderEvent& ev) {
        events.push_back(ev);
    });
    return {std::move(events), report};
}

}  // namespace lobstat
