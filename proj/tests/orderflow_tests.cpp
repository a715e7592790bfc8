#include <sstream>

#include "doctest.h"
#include "lobstat/errors.hpp"
#include "lobstat/orderflow.hpp"
#include "lobstat/rng.hpp"

using namespace lobstat;

namespace {

SessionConfig test_config() { return SessionConfig::defaults(1000); }  // 10.00, band [9.00, 11.00]

std::string with_header(const std::string& body) {
    return std::string(kEventCsvHeader) + "\n" + body;
}

}  // namespace

TEST_CASE("parse maps a buy record field by field") {
    const auto res = parse_event_record("1,09:30:00.01,B,7,1000,10.00", test_config());
    REQUIRE(std::holds_alternative<OrderEvent>(res));
    const auto& ev = std::get<OrderEvent>(res);
    CHECK(ev.seq == 1);
    CHECK(ev.wall_time == parse_wall_time("09:30:00.01"));
    CHECK(ev.kind == EventKind::BuyLimit);
    CHECK(ev.order_ref == 7);
    CHECK(ev.size == 1000);
    CHECK(ev.price == 1000);
}

TEST_CASE("parse rejects a zero size as malformed") {
    const auto res = parse_event_record("1,09:30:00.01,B,7,0,10.00", test_config());
    REQUIRE(std::holds_alternative<Rejection>(res));
    CHECK(std::get<Rejection>(res).reason == RejectReason::Malformed);
}

TEST_CASE("parse rejects a price above the daily band") {
    // prev close 10.00, 10% band: the cap is round-to-tick of 11.00
    const auto cfg = test_config();
    const Ticks expected_hi = std::llround(1000 * 1.1);
    CHECK(cfg.band_hi() == expected_hi);
    CHECK(cfg.band_lo() == std::llround(1000 * 0.9));

    const auto at_cap = parse_event_record("1,09:30:00.01,B,7,100,11.00", cfg);
    CHECK(std::holds_alternative<OrderEvent>(at_cap));

    const auto above = parse_event_record("1,09:30:00.01,B,7,100,11.01", cfg);
    REQUIRE(std::holds_alternative<Rejection>(above));
    CHECK(std::get<Rejection>(above).reason == RejectReason::OutOfBand);
}

TEST_CASE("parse rejects prices off the tick grid") {
    auto cfg = test_config();
    cfg.tick_size = 0.05;
    cfg.prev_close = 200;  // 10.00
    const auto res = parse_event_record("1,09:30:00.01,S,9,100,10.02", cfg);
    REQUIRE(std::holds_alternative<Rejection>(res));
    CHECK(std::get<Rejection>(res).reason == RejectReason::OffGrid);
}

TEST_CASE("parse rejects records outside the session windows") {
    const auto res = parse_event_record("1,12:00:00.00,B,7,100,10.00", test_config());
    REQUIRE(std::holds_alternative<Rejection>(res));
    CHECK(std::get<Rejection>(res).reason == RejectReason::OutOfSession);
}

TEST_CASE("parse flags malformed numeric fields and bad kinds") {
    const auto cfg = test_config();
    for (const char* line : {
             "x,09:30:00.01,B,7,100,10.00",   // bad seq
             "1,09:30:00,99,B,7,100,10.00",   // bad time / field count
             "1,09:30:00.01,Q,7,100,10.00",   // bad kind
             "1,09:30:00.01,B,0,100,10.00",   // missing ref
             "1,09:30:00.01,B,7,abc,10.00",   // bad size
             "1,09:30:00.01,B,7,100,10.0",    // one decimal
             "1,09:30:00.01,B,7,100",         // short record
         }) {
        const auto res = parse_event_record(line, cfg);
        REQUIRE_MESSAGE(std::holds_alternative<Rejection>(res), line);
        CHECK(std::get<Rejection>(res).reason == RejectReason::Malformed);
    }
}

TEST_CASE("cancel records ignore price and size fields") {
    const auto res = parse_event_record("3,09:31:00.00,C,42,0,0.00", test_config());
    REQUIRE(std::holds_alternative<OrderEvent>(res));
    const auto& ev = std::get<OrderEvent>(res);
    CHECK(ev.kind == EventKind::Cancel);
    CHECK(ev.order_ref == 42);
    CHECK(ev.size == 0);
    CHECK(ev.price == 0);
}

TEST_CASE("load_stream numbers valid events consecutively") {
    std::istringstream in(with_header("9,09:30:00.00,B,1,100,10.00\n"
                                      "9,09:30:00.10,S,2,100,10.10\n"
                                      "9,09:30:00.20,B,3,100,9.99\n"
                                      "9,09:30:00.30,C,1,0,0.00\n"
                                      "9,09:30:00.40,S,4,100,10.20\n"));
    const auto [events, report] = load_stream(in, test_config());
    REQUIRE(events.size() == 5);
    for (std::size_t i = 0; i < events.size(); ++i) CHECK(events[i].seq == i + 1);
    CHECK(report.records_read == 5);
    CHECK(report.buy_orders == 2);
    CHECK(report.sell_orders == 2);
    CHECK(report.cancels == 1);
    CHECK(report.invalid_count == 0);
}

TEST_CASE("load_stream counts invalid records without emitting them") {
    std::istringstream in(with_header("1,09:30:00.00,B,1,100,10.00\n"
                                      "2,09:30:00.10,B,2,0,10.00\n"
                                      "3,09:30:00.20,S,3,100,10.10\n"
                                      "4,09:30:00.30,S,4,100,10.20\n"
                                      "5,09:30:00.40,B,5,100,9.90\n"));
    const auto [events, report] = load_stream(in, test_config());
    CHECK(events.size() == 4);
    CHECK(report.invalid_count == 1);
    CHECK(report.rejects.at(RejectReason::Malformed) == 1);
    CHECK(events.back().seq == 4);
}

TEST_CASE("load_stream treats wall-time regression as a corrupt stream") {
    std::istringstream in(with_header("1,09:31:00.00,B,1,100,10.00\n"
                                      "2,09:30:59.99,S,2,100,10.10\n"));
    CHECK_THROWS_AS(load_stream(in, test_config()), DataError);
}

TEST_CASE("load_stream requires the header row") {
    std::istringstream in("1,09:30:00.00,B,1,100,10.00\n");
    CHECK_THROWS_AS(load_stream(in, test_config()), DataError);
}

TEST_CASE("serialize-parse round trip is the identity") {
    const auto cfg = test_config();
    Rng rng(20240601);
    for (int i = 0; i < 500; ++i) {
        OrderEvent ev;
        ev.seq = static_cast<std::uint64_t>(i) + 1;
        ev.wall_time = cfg.sessions[0].open + rng.uniform_int(0, 7000);
        const int k = static_cast<int>(rng.below(3));
        ev.kind = k == 0 ? EventKind::BuyLimit : k == 1 ? EventKind::SellLimit : EventKind::Cancel;
        ev.order_ref = rng.below(1 << 20) + 1;
        if (ev.kind != EventKind::Cancel) {
            ev.size = rng.uniform_int(1, 100000);
            ev.price = rng.uniform_int(cfg.band_lo(), cfg.band_hi());
        }
        const std::string line = format_event_record(ev, cfg);
        const auto res = parse_event_record(line, cfg);
        REQUIRE(std::holds_alternative<OrderEvent>(res));
        CHECK(std::get<OrderEvent>(res) == ev);
        CHECK(format_event_record(std::get<OrderEvent>(res), cfg) == line);
    }
}

TEST_CASE("emitted plus rejected always partitions the records read") {
    const auto cfg = test_config();
    Rng rng(77);
    // a soup of valid, out-of-band, out-of-session and junk records
    std::string body;
    std::uint64_t records = 0;
    for (int i = 0; i < 300; ++i) {
        const std::string t = "09:3" + std::to_string(i / 60) + ":0" +
                              std::to_string((i / 10) % 6) + ".0" + std::to_string(i % 10);
        switch (rng.below(5)) {
            case 0: body += "1," + t + ",B," + std::to_string(i + 1) + ",100,10.00\n"; break;
            case 1: body += "1," + t + ",S," + std::to_string(i + 1) + ",50,10.50\n"; break;
            case 2: body += "1," + t + ",B," + std::to_string(i + 1) + ",100,11.01\n"; break;
            case 3: body += "1,16:00:00.00,B," + std::to_string(i + 1) + ",100,10.00\n"; break;
            default: body += "garbage line\n"; break;
        }
        ++records;
    }
    std::istringstream in(with_header(body));
    const auto [events, report] = load_stream(in, cfg);
    CHECK(report.records_read == records);
    CHECK(report.emitted() == events.size());
    std::uint64_t rejected = 0;
    for (const auto& [reason, count] : report.rejects) rejected += count;
    CHECK(rejected == report.invalid_count);
    CHECK(report.emitted() + report.invalid_count == records);
}

TEST_CASE("session interval indexing is contiguous across windows") {
    const auto cfg = test_config();
    CHECK(cfg.interval_count(60) == 240);  // 120 morning + 120 afternoon minutes
    const WallTime morning_open = cfg.sessions[0].open;
    CHECK(cfg.interval_index(morning_open, 60) == 0);
    CHECK(cfg.interval_index(morning_open + 1, 60) == 0);
    CHECK(cfg.interval_index(morning_open + 6000, 60) == 0);  // (lo, hi] right edge
    CHECK(cfg.interval_index(morning_open + 6001, 60) == 1);
    const WallTime afternoon_open = cfg.sessions[1].open;
    CHECK(cfg.interval_index(afternoon_open + 1, 60) == 120);
    CHECK(!cfg.interval_index(12 * 360000, 60).has_value());
}

TEST_CASE("config files round trip") {
    const auto cfg = test_config();
    const std::string path = "/tmp/lobstat_test_config.kv";
    cfg.write_file(path);
    const auto loaded = SessionConfig::from_file(path);
    CHECK(loaded.tick_size == doctest::Approx(cfg.tick_size));
    CHECK(loaded.prev_close == cfg.prev_close);
    CHECK(loaded.limit_fraction == doctest::Approx(cfg.limit_fraction));
    REQUIRE(loaded.sessions.size() == cfg.sessions.size());
    for (std::size_t i = 0; i < cfg.sessions.size(); ++i) {
        CHECK(loaded.sessions[i].open == cfg.sessions[i].open);
        CHECK(loaded.sessions[i].close == cfg.sessions[i].close);
    }
}
