// lobstat: rebuild a limit order book from an order-flow CSV and compute
// book-shape and per-level volume statistics as plot-ready CSV/JSON.

#include <algorithm>
#include <charconv>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"
#include "lobstat/book.hpp"
#include "lobstat/errors.hpp"
#include "lobstat/orderflow.hpp"
#include "lobstat/shape.hpp"
#include "lobstat/synthgen.hpp"
#include "lobstat/volstats.hpp"

namespace fs = std::filesystem;
using json = nlohmann::json;
using namespace lobstat;

namespace {

constexpr const char* kVersion = "0.1.0";

std::string format_double(double v) {
    char buf[64];
    const auto res = std::to_chars(buf, buf + sizeof(buf), v);
    return std::string(buf, res.ptr);
}

std::string file_digest(const fs::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw DataError("cannot open " + path.string());
    std::uint64_t h = 0xcbf29ce484222325ULL;
    std::vector<char> chunk(1 << 20);
    while (in) {
        in.read(chunk.data(), static_cast<std::streamsize>(chunk.size()));
        const std::streamsize got = in.gcount();
        for (std::streamsize i = 0; i < got; ++i) {
            h ^= static_cast<unsigned char>(chunk[static_cast<std::size_t>(i)]);
            h *= 0x100000001b3ULL;
        }
    }
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(h));
    return buf;
}

// Reproducibility stamp embedded in every JSON report. No clocks, no host
// names: rerunning the same command on the same inputs must be byte-identical.
struct Manifest {
    std::string command;
    std::map<std::string, std::string> inputs;
    std::map<std::string, std::string> outputs;
    std::optional<std::uint64_t> seed;

    json to_json() const {
        json j;
        j["command"] = command;
        j["version"] = kVersion;
        j["inputs"] = inputs;
        j["outputs"] = outputs;
        if (seed) j["seed"] = *seed;
        return j;
    }
};

std::string join_args(int argc, char** argv) {
    std::string s;
    for (int i = 0; i < argc; ++i) {
        if (i) s += ' ';
        s += argv[i];
    }
    return s;
}

void ensure_dir(const fs::path& dir) {
    std::error_code ec;
    fs::create_directories(dir, ec);
    if (ec) throw DataError("cannot create output directory " + dir.string());
}

void write_text(const fs::path& path, const std::string& text) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw DataError("cannot write " + path.string());
    out << text;
}

void write_json(const fs::path& path, const json& j) { write_text(path, j.dump(2) + "\n"); }

std::pair<double, double> parse_range(const std::string& text) {
    const auto colon = text.find(':');
    if (colon == std::string::npos) throw UsageError("range must be lo:hi, got " + text);
    try {
        return {std::stod(text.substr(0, colon)), std::stod(text.substr(colon + 1))};
    } catch (const std::exception&) {
        throw UsageError("range must be lo:hi, got " + text);
    }
}

// ---------------------------------------------------------------------------
// CSV formats

void write_shape_csv(const fs::path& path, const AveragedShape* shape) {
    std::string out = "delta,mean_volume,std_volume\n";
    if (shape != nullptr) {
        for (int d = 1; d <= shape->depth(); ++d) {
            out += std::to_string(d);
            out += ',';
            out += format_double(shape->mean_at(d));
            out += ',';
            out += format_double(shape->stddev_at(d));
            out += '\n';
        }
    }
    write_text(path, out);
}

AveragedShape read_shape_csv(const fs::path& path) {
    std::ifstream in(path);
    if (!in) throw DataError("cannot open " + path.string());
    std::string line;
    if (!std::getline(in, line) || line.rfind("delta,", 0) != 0) {
        throw DataError("not a shape CSV: " + path.string());
    }
    AveragedShape shape;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        std::size_t p1 = line.find(','), p2 = line.find(',', p1 + 1);
        if (p1 == std::string::npos || p2 == std::string::npos) {
            throw DataError("bad shape row: " + line);
        }
        shape.mean.push_back(std::stod(line.substr(p1 + 1, p2 - p1 - 1)));
        shape.stddev.push_back(std::stod(line.substr(p2 + 1)));
    }
    shape.count = 1;
    if (shape.mean.empty()) throw DataError("shape CSV has no rows: " + path.string());
    return shape;
}

void write_series_csv(const fs::path& path, const VolumeSeries& series) {
    std::string out = "interval_index,value\n";
    for (std::size_t i = 0; i < series.values.size(); ++i) {
        if (std::isnan(series.values[i])) continue;
        out += std::to_string(i);
        out += ',';
        out += format_double(series.values[i]);
        out += '\n';
    }
    write_text(path, out);
}

// row order is interval order, so reading back yields the gap-free series
std::vector<double> read_series_csv(const fs::path& path) {
    std::ifstream in(path);
    if (!in) throw DataError("cannot open " + path.string());
    std::string line;
    if (!std::getline(in, line) || line.rfind("interval_index,", 0) != 0) {
        throw DataError("not a series CSV: " + path.string());
    }
    std::vector<double> values;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        const auto comma = line.find(',');
        if (comma == std::string::npos) throw DataError("bad series row: " + line);
        values.push_back(std::stod(line.substr(comma + 1)));
    }
    return values;
}

json report_to_json(const StreamReport& report) {
    json j;
    j["records_read"] = report.records_read;
    j["buy_orders"] = report.buy_orders;
    j["sell_orders"] = report.sell_orders;
    j["cancels"] = report.cancels;
    j["events"] = report.emitted();
    j["invalid_count"] = report.invalid_count;
    json rej = json::object();
    for (const auto& [reason, count] : report.rejects) rej[reject_reason_name(reason)] = count;
    j["rejects"] = rej;
    return j;
}

// ---------------------------------------------------------------------------
// gen flow

struct GenFlowOptions {
    std::string out;
    std::uint64_t events = 100000;
    std::uint64_t seed = 1;
    double tick = 0.01;
    double prev_close = 10.0;
    double limit_fraction = 0.10;
    std::vector<double> mix{0.44, 0.41, 0.15};
    std::string law = "exp";
    double beta = 0.044;
    int uniform_depth = 50;
    double size_mu = 6.2;
    double size_sigma = 1.0;
    double marketable = 0.10;
    std::uint64_t target_pop = 30000;
    std::uint64_t invalid_records = 0;  // malformed wire records sprinkled in
};

void run_gen_flow(const GenFlowOptions& opt, const std::string& command) {
    SessionConfig cfg = SessionConfig::defaults(std::llround(opt.prev_close / opt.tick));
    cfg.tick_size = opt.tick;
    cfg.limit_fraction = opt.limit_fraction;
    cfg.validate();

    FlowParams params;
    params.events = opt.events;
    params.seed = opt.seed;
    if (opt.mix.size() != 3) throw UsageError("--mix needs three values: buy,sell,cancel");
    params.buy_fraction = opt.mix[0];
    params.sell_fraction = opt.mix[1];
    params.cancel_fraction = opt.mix[2];
    if (opt.law == "exp") {
        params.law = FlowParams::PlacementLaw::Exponential;
    } else if (opt.law == "uniform") {
        params.law = FlowParams::PlacementLaw::Uniform;
    } else {
        throw UsageError("--law must be exp or uniform");
    }
    params.placement_beta = opt.beta;
    params.uniform_depth = opt.uniform_depth;
    params.size_mu = opt.size_mu;
    params.size_sigma = opt.size_sigma;
    params.marketable_fraction = opt.marketable;
    params.target_population = opt.target_pop;
    params.validate(cfg);

    const fs::path out(opt.out);
    ensure_dir(out);
    cfg.write_file((out / "config.kv").string());

    {
        std::ofstream events(out / "events.csv", std::ios::binary);
        if (!events) throw DataError("cannot write events.csv");
        events << kEventCsvHeader << '\n';
        const std::uint64_t stride =
            opt.invalid_records > 0 ? std::max<std::uint64_t>(1, opt.events / opt.invalid_records)
                                    : 0;
        std::uint64_t written = 0, injected = 0;
        const GeneratorLedger ledger =
            generate_order_flow(params, cfg, [&](const OrderEvent& ev) {
                events << format_event_record(ev, cfg) << '\n';
                ++written;
                if (stride > 0 && injected < opt.invalid_records && written % stride == 0) {
                    events << "0,not-a-time,X,0,0,junk\n";
                    ++injected;
                }
            });
        events.close();

        json lj;
        lj["events"] = ledger.events;
        lj["buy_orders"] = ledger.buy_orders;
        lj["sell_orders"] = ledger.sell_orders;
        lj["cancels"] = ledger.cancels;
        lj["volume_placed"] = ledger.volume_placed;
        lj["volume_traded"] = ledger.volume_traded;
        lj["volume_cancelled"] = ledger.volume_cancelled;
        lj["final_resting_orders"] = ledger.final_resting_orders;
        json intervals = json::object();
        for (const auto& [idx, n] : ledger.interval_events) {
            intervals[std::to_string(idx)] = {{"events", n},
                                              {"probe_sum", ledger.interval_probe_sum.at(idx)}};
        }
        lj["intervals"] = intervals;
        json buys = json::object(), sells = json::object();
        for (const auto& [d, v] : ledger.buy_placement_volume) buys[std::to_string(d)] = v;
        for (const auto& [d, v] : ledger.sell_placement_volume) sells[std::to_string(d)] = v;
        lj["buy_placement_volume"] = buys;
        lj["sell_placement_volume"] = sells;
        write_json(out / "ledger.json", lj);
    }

    Manifest m;
    m.command = command;
    m.seed = opt.seed;
    for (const char* f : {"config.kv", "events.csv", "ledger.json"}) {
        m.outputs[f] = file_digest(out / f);
    }
    write_json(out / "manifest.json", m.to_json());
}

// ---------------------------------------------------------------------------
// gen fgn / gen shape

void run_gen_fgn(const std::string& out_dir, double hurst, std::size_t length,
                 std::uint64_t seed, const std::string& command) {
    FgnParams params;
    params.hurst = hurst;
    params.length = length;
    params.seed = seed;
    const auto series = generate_fgn(params);

    const fs::path out(out_dir);
    ensure_dir(out);
    std::string csv = "interval_index,value\n";
    for (std::size_t i = 0; i < series.size(); ++i) {
        csv += std::to_string(i);
        csv += ',';
        csv += format_double(series[i]);
        csv += '\n';
    }
    write_text(out / "series.csv", csv);

    Manifest m;
    m.command = command;
    m.seed = seed;
    m.outputs["series.csv"] = file_digest(out / "series.csv");
    json j;
    j["hurst"] = hurst;
    j["length"] = length;
    j["seed"] = seed;
    j["manifest"] = m.to_json();
    write_json(out / "fgn.json", j);
}

struct GenShapeOptions {
    std::string out;
    std::string kind = "exp";
    int depth = 200;
    double scale = 1000.0;
    double beta = 0.025;
    int mode = 11;
    double boost = 1.3;
    int period = 5;
    double noise = 0.0;
    int truncate = 0;
    std::uint64_t seed = 1;
};

void run_gen_shape(const GenShapeOptions& opt, const std::string& command) {
    PlantedShapeParams params;
    if (opt.kind == "exp") {
        params.kind = PlantedShapeParams::Kind::Exponential;
    } else if (opt.kind == "mode") {
        params.kind = PlantedShapeParams::Kind::Mode;
    } else if (opt.kind == "periodic") {
        params.kind = PlantedShapeParams::Kind::Periodic;
    } else {
        throw UsageError("--kind must be exp, mode or periodic");
    }
    params.depth = opt.depth;
    params.scale = opt.scale;
    params.beta = opt.beta;
    params.mode_position = opt.mode;
    params.peak_boost = opt.boost;
    params.peak_period = opt.period;
    params.noise_sigma = opt.noise;
    params.truncate_at = opt.truncate;
    params.seed = opt.seed;

    const auto shape = generate_planted_shape(params);
    const fs::path out(opt.out);
    ensure_dir(out);
    write_shape_csv(out / "shape.csv", &shape);

    Manifest m;
    m.command = command;
    m.seed = opt.seed;
    m.outputs["shape.csv"] = file_digest(out / "shape.csv");
    json j;
    j["kind"] = opt.kind;
    j["depth"] = opt.depth;
    j["scale"] = opt.scale;
    j["beta"] = opt.beta;
    j["seed"] = opt.seed;
    j["manifest"] = m.to_json();
    write_json(out / "planted.json", j);
}

// ---------------------------------------------------------------------------
// build

struct BuildOptions {
    std::vector<std::string> inputs;
    std::string config;
    std::string out;
    int depth = 0;  // 0: full band width
    bool snapshots = false;
    unsigned jobs = 1;
};

void build_one(const fs::path& input, const SessionConfig& cfg, const fs::path& out,
               int depth, bool want_snapshots) {
    ensure_dir(out);
    std::ifstream in(input);
    if (!in) throw DataError("cannot open " + input.string());

    std::ofstream trades(out / "trades.csv", std::ios::binary);
    trades << "t,trade_price,trade_size\n";
    std::ofstream snaps;
    if (want_snapshots) {
        snaps.open(out / "snapshots.csv", std::ios::binary);
        snaps << "t,side,delta,volume\n";
    }

    LimitOrderBook book(cfg);
    ShapeAccumulator acc_buy(Side::Buy, depth);
    ShapeAccumulator acc_sell(Side::Sell, depth);

    const StreamReport report = for_each_event(in, cfg, [&](const OrderEvent& ev) {
        const BookDelta delta = book.apply_event(ev);
        for (const auto& tr : delta.trades) {
            trades << ev.seq << ',' << format_price(tr.price, cfg) << ',' << tr.size << '\n';
        }
        acc_buy.add_book(book, Side::Buy);
        acc_sell.add_book(book, Side::Sell);
        if (want_snapshots) {
            for (const Side side : {Side::Buy, Side::Sell}) {
                const auto snap = book.snapshot_shape(side, depth);
                const char tag = side == Side::Buy ? 'B' : 'S';
                for (int d = 1; d <= depth; ++d) {
                    const Shares v = snap.at_depth(d);
                    if (v != 0) {
                        snaps << ev.seq << ',' << tag << ',' << d << ',' << v << '\n';
                    }
                }
            }
        }
    });
    trades.close();
    if (want_snapshots) snaps.close();

    const bool have_events = report.emitted() > 0;
    const auto buy_shape = have_events ? acc_buy.finalize() : AveragedShape{};
    const auto sell_shape = have_events ? acc_sell.finalize() : AveragedShape{};
    write_shape_csv(out / "shape_buy.csv", have_events ? &buy_shape : nullptr);
    write_shape_csv(out / "shape_sell.csv", have_events ? &sell_shape : nullptr);

    json j = report_to_json(report);
    j["depth"] = depth;
    json final_state;
    final_state["resting_orders"] = book.resting_order_count();
    final_state["resting_volume"] = book.total_resting_volume();
    if (book.best_bid()) final_state["best_bid"] = *book.best_bid();
    if (book.best_ask()) final_state["best_ask"] = *book.best_ask();
    j["final_book"] = final_state;
    write_json(out / "stream_report.json", j);
}

void run_build(const BuildOptions& opt, const std::string& command) {
    if (opt.inputs.empty()) throw UsageError("build needs at least one --input");
    const SessionConfig cfg = SessionConfig::from_file(opt.config);
    const int depth = opt.depth > 0 ? opt.depth : static_cast<int>(cfg.band_width());
    const fs::path out(opt.out);
    ensure_dir(out);

    std::vector<fs::path> dirs;
    for (const auto& input : opt.inputs) {
        dirs.push_back(opt.inputs.size() == 1 ? out : out / fs::path(input).stem());
    }

    // --jobs parallelizes across input files only; one file is sequential
    std::vector<std::exception_ptr> errors(opt.inputs.size());
    const unsigned jobs = std::max(1u, std::min<unsigned>(opt.jobs, opt.inputs.size()));
    std::vector<std::thread> workers;
    std::atomic<std::size_t> next{0};
    for (unsigned w = 0; w < jobs; ++w) {
        workers.emplace_back([&] {
            while (true) {
                const std::size_t i = next.fetch_add(1);
                if (i >= opt.inputs.size()) break;
                try {
                    build_one(opt.inputs[i], cfg, dirs[i], depth, opt.snapshots);
                } catch (...) {
                    errors[i] = std::current_exception();
                }
            }
        });
    }
    for (auto& t : workers) t.join();
    for (const auto& e : errors) {
        if (e) std::rethrow_exception(e);
    }

    Manifest m;
    m.command = command;
    m.inputs["config"] = file_digest(opt.config);
    for (const auto& input : opt.inputs) m.inputs[input] = file_digest(input);
    for (std::size_t i = 0; i < dirs.size(); ++i) {
        for (const char* f : {"trades.csv", "shape_buy.csv", "shape_sell.csv",
                              "stream_report.json"}) {
            const fs::path p = dirs[i] / f;
            m.outputs[fs::relative(p, out).string()] = file_digest(p);
        }
        if (opt.snapshots) {
            const fs::path p = dirs[i] / "snapshots.csv";
            m.outputs[fs::relative(p, out).string()] = file_digest(p);
        }
    }
    write_json(out / "manifest.json", m.to_json());
}

// ---------------------------------------------------------------------------
// shape (re-aggregate a sparse snapshot dump)

struct ShapeCmdOptions {
    std::string input;
    std::string out;
    int depth = 0;
    std::uint64_t events = 0;  // 0: infer from the maximum event time
    bool peaks = false;
    int peak_period = 5;
    double peak_threshold = 1.1;
};

void run_shape(const ShapeCmdOptions& opt, const std::string& command) {
    if (opt.depth < 1) throw UsageError("shape needs --depth");
    std::ifstream in(opt.input);
    if (!in) throw DataError("cannot open " + opt.input);
    std::string line;
    if (!std::getline(in, line) || line.rfind("t,side,delta,volume", 0) != 0) {
        throw DataError("not a snapshot CSV: " + opt.input);
    }

    ShapeAccumulator acc_buy(Side::Buy, opt.depth);
    ShapeAccumulator acc_sell(Side::Sell, opt.depth);
    std::uint64_t max_t = 0;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        std::uint64_t t;
        char side_tag;
        long long delta, volume;
        if (std::sscanf(line.c_str(), "%llu,%c,%lld,%lld",
                        reinterpret_cast<unsigned long long*>(&t), &side_tag, &delta,
                        &volume) != 4) {
            throw DataError("bad snapshot row: " + line);
        }
        max_t = std::max(max_t, t);
        if (delta < 1 || delta > opt.depth) continue;
        (side_tag == 'B' ? acc_buy : acc_sell).add_level(static_cast<int>(delta), volume);
    }
    const std::uint64_t m_count = opt.events > 0 ? opt.events : max_t;
    acc_buy.add_snapshot_count(m_count);
    acc_sell.add_snapshot_count(m_count);

    const fs::path out(opt.out);
    ensure_dir(out);
    const bool have = m_count > 0;
    const auto buy_shape = have ? acc_buy.finalize() : AveragedShape{};
    const auto sell_shape = have ? acc_sell.finalize() : AveragedShape{};
    write_shape_csv(out / "shape_buy.csv", have ? &buy_shape : nullptr);
    write_shape_csv(out / "shape_sell.csv", have ? &sell_shape : nullptr);

    Manifest m;
    m.command = command;
    m.inputs[opt.input] = file_digest(opt.input);
    m.outputs["shape_buy.csv"] = file_digest(out / "shape_buy.csv");
    m.outputs["shape_sell.csv"] = file_digest(out / "shape_sell.csv");

    json j;
    j["snapshots"] = m_count;
    j["depth"] = opt.depth;
    if (opt.peaks && have) {
        json peaks;
        const auto report_side = [&](const char* name, const AveragedShape& s) {
            const auto rep = detect_periodic_peaks(s, opt.peak_period, opt.peak_threshold);
            json p;
            p["period"] = rep.period;
            p["threshold"] = rep.threshold;
            p["positions"] = rep.positions;
            p["ratios"] = rep.ratios;
            p["geometric_mean"] = rep.geometric_mean;
            p["flagged"] = rep.flagged;
            peaks[name] = p;
        };
        report_side("buy", buy_shape);
        report_side("sell", sell_shape);
        j["peaks"] = peaks;
    }
    j["manifest"] = m.to_json();
    write_json(out / "shape_report.json", j);
}

// ---------------------------------------------------------------------------
// impact

struct ImpactOptions {
    std::string input;
    std::string config;
    std::string out;
    std::string side = "buy";
    Shares omega_max = 0;
    int steps = 100;
    std::uint64_t at_seq = 0;  // 0: end of stream
};

void run_impact(const ImpactOptions& opt, const std::string& command) {
    if (opt.omega_max <= 0) throw UsageError("impact needs a positive --omega-max");
    if (opt.steps < 1) throw UsageError("--steps must be positive");
    const SessionConfig cfg = SessionConfig::from_file(opt.config);
    const Side aggressor = opt.side == "sell" ? Side::Sell : Side::Buy;
    if (opt.side != "buy" && opt.side != "sell") throw UsageError("--side must be buy or sell");

    std::ifstream in(opt.input);
    if (!in) throw DataError("cannot open " + opt.input);
    LimitOrderBook book(cfg);
    std::uint64_t applied = 0;
    for_each_event(in, cfg, [&](const OrderEvent& ev) {
        if (opt.at_seq != 0 && ev.seq > opt.at_seq) return;
        book.apply_event(ev);
        applied = ev.seq;
    });

    const fs::path out(opt.out);
    ensure_dir(out);
    std::string csv = "omega,impact_ticks,impact_price,saturated\n";
    for (int k = 0; k <= opt.steps; ++k) {
        const Shares omega = opt.omega_max * k / opt.steps;
        const ImpactResult r = book.virtual_price_impact(aggressor, omega);
        csv += std::to_string(omega);
        csv += ',';
        csv += std::to_string(r.ticks);
        csv += ',';
        csv += format_double(static_cast<double>(r.ticks) * cfg.tick_size);
        csv += ',';
        csv += r.saturated ? '1' : '0';
        csv += '\n';
    }
    write_text(out / "impact.csv", csv);

    Manifest m;
    m.command = command;
    m.inputs[opt.input] = file_digest(opt.input);
    m.inputs["config"] = file_digest(opt.config);
    m.outputs["impact.csv"] = file_digest(out / "impact.csv");
    json j;
    j["side"] = opt.side;
    j["events_applied"] = applied;
    if (book.best_bid()) j["best_bid"] = *book.best_bid();
    if (book.best_ask()) j["best_ask"] = *book.best_ask();
    j["manifest"] = m.to_json();
    write_json(out / "impact.json", j);
}

// ---------------------------------------------------------------------------
// volumes

struct VolumesOptions {
    std::string input;
    std::string config;
    std::string out;
    std::string side = "buy";
    int delta = 1;
    int dt = 60;
};

void run_volumes(const VolumesOptions& opt, const std::string& command) {
    const SessionConfig cfg = SessionConfig::from_file(opt.config);
    if (opt.side != "buy" && opt.side != "sell") throw UsageError("--side must be buy or sell");
    const Side side = opt.side == "sell" ? Side::Sell : Side::Buy;

    std::ifstream in(opt.input);
    if (!in) throw DataError("cannot open " + opt.input);
    LimitOrderBook book(cfg);
    VolumeSeriesBuilder builder(opt.delta, opt.dt, cfg);
    const StreamReport report = for_each_event(in, cfg, [&](const OrderEvent& ev) {
        book.apply_event(ev);
        builder.add(ev.wall_time, book.volume_at_depth(side, opt.delta));
    });
    const VolumeSeries series = builder.finish();

    const fs::path out(opt.out);
    ensure_dir(out);
    write_series_csv(out / "series.csv", series);

    Manifest m;
    m.command = command;
    m.inputs[opt.input] = file_digest(opt.input);
    m.inputs["config"] = file_digest(opt.config);
    m.outputs["series.csv"] = file_digest(out / "series.csv");
    json j;
    j["side"] = opt.side;
    j["delta"] = opt.delta;
    j["dt_seconds"] = opt.dt;
    j["intervals"] = series.values.size();
    j["gap_intervals"] = series.gaps.size();
    j["events"] = report.emitted();
    j["manifest"] = m.to_json();
    write_json(out / "volumes.json", j);
}

// ---------------------------------------------------------------------------
// dfa

struct DfaOptions {
    std::string input;
    std::string out;
    std::size_t min_box = 8;
    double ratio = 1.189207115002721;
    std::size_t max_div = 4;
    int order = 1;
    std::string fit_range;  // "lo:hi" in box size; empty: central decade
};

void run_dfa(const DfaOptions& opt, const std::string& command) {
    const auto raw = read_series_csv(opt.input);
    // volume series may hold exact zeros at deep levels; they carry no log
    // scale and are dropped with an audited count (negatives are real data)
    std::vector<double> values;
    values.reserve(raw.size());
    std::uint64_t dropped = 0;
    for (const double v : raw) {
        if (v == 0.0) {
            ++dropped;
        } else {
            values.push_back(v);
        }
    }

    DfaConfig cfg;
    cfg.min_box = opt.min_box;
    cfg.ratio = opt.ratio;
    cfg.max_box_divisor = opt.max_div;
    cfg.detrend_order = opt.order;
    if (!opt.fit_range.empty()) cfg.fit_range = parse_range(opt.fit_range);

    const DfaResult result = dfa(values, cfg);

    const fs::path out(opt.out);
    ensure_dir(out);
    std::string csv = "ell,F\n";
    for (std::size_t i = 0; i < result.box_sizes.size(); ++i) {
        csv += format_double(result.box_sizes[i]);
        csv += ',';
        csv += format_double(result.fluctuation[i]);
        csv += '\n';
    }
    write_text(out / "fluctuation.csv", csv);

    Manifest m;
    m.command = command;
    m.inputs[opt.input] = file_digest(opt.input);
    m.outputs["fluctuation.csv"] = file_digest(out / "fluctuation.csv");
    json j;
    j["H"] = result.hurst;
    j["stderr"] = result.hurst_stderr;
    j["gamma"] = result.gamma;
    j["fit_range"] = {result.fit_lo, result.fit_hi};
    j["n"] = result.n;
    j["box_count"] = result.box_sizes.size();
    j["dropped_zeros"] = dropped;
    j["manifest"] = m.to_json();
    write_json(out / "dfa.json", j);
}

// ---------------------------------------------------------------------------
// fit

struct FitOptions {
    std::string kind;
    std::string input;
    std::string out;
    std::string range;  // required for exp and powertail
    std::size_t bins = 0;
};

void run_fit(const FitOptions& opt, const std::string& command) {
    // no reported number without an explicit window
    if (opt.kind != "exp" && opt.kind != "lognormal" && opt.kind != "powertail") {
        throw UsageError("--kind must be exp, lognormal or powertail");
    }
    if (opt.kind != "lognormal" && opt.range.empty()) {
        throw UsageError("fit --kind " + opt.kind + " needs an explicit --range lo:hi");
    }

    const fs::path out(opt.out);
    ensure_dir(out);

    Manifest m;
    m.command = command;
    m.inputs[opt.input] = file_digest(opt.input);

    json j;
    j["kind"] = opt.kind;
    if (opt.kind == "exp") {
        const auto [lo, hi] = parse_range(opt.range);
        const auto shape = read_shape_csv(opt.input);
        const auto fit = fit_exponential_tail(shape, static_cast<int>(lo), static_cast<int>(hi));
        j["beta"] = fit.beta;
        j["stderr"] = fit.beta_stderr;
        j["r2"] = fit.r_squared;
        j["range"] = {fit.range_lo, fit.range_hi};
    } else if (opt.kind == "lognormal") {
        const auto values = read_series_csv(opt.input);
        const auto fit = fit_lognormal(values);
        j["mu"] = fit.mu;
        j["sigma_ln"] = fit.sigma;
        j["ks_distance"] = fit.ks_distance;
        j["n_used"] = fit.n_used;
        j["dropped_zeros"] = fit.dropped_zeros;
    } else if (opt.kind == "powertail") {
        const auto [lo, hi] = parse_range(opt.range);
        const auto values = read_series_csv(opt.input);
        const auto pdf = empirical_log_pdf(values, opt.bins);
        const auto fit = fit_left_tail_powerlaw(pdf, lo, hi);
        j["beta_delta"] = fit.exponent;
        j["stderr"] = fit.stderr_;
        j["r2"] = fit.r_squared;
        j["range"] = {fit.range_lo, fit.range_hi};
        j["n_bins"] = fit.n_bins;
        j["histogram_bins"] = pdf.centers.size();
        j["dropped_zeros"] = pdf.dropped_zeros;
    }
    j["manifest"] = m.to_json();
    write_json(out / "fit.json", j);
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"limit-order-book reconstruction and microstructure statistics"};
    app.require_subcommand(1);
    const std::string command = join_args(argc, argv);

    // gen
    auto* gen = app.add_subcommand("gen", "deterministic synthetic inputs");
    gen->require_subcommand(1);

    GenFlowOptions gf;
    auto* gen_flow = gen->add_subcommand("flow", "synthetic order-flow stream");
    gen_flow->add_option("--out", gf.out)->required();
    gen_flow->add_option("--events", gf.events);
    gen_flow->add_option("--seed", gf.seed);
    gen_flow->add_option("--tick", gf.tick);
    gen_flow->add_option("--prev-close", gf.prev_close);
    gen_flow->add_option("--limit-fraction", gf.limit_fraction);
    gen_flow->add_option("--mix", gf.mix)->expected(3);
    gen_flow->add_option("--law", gf.law);
    gen_flow->add_option("--beta", gf.beta);
    gen_flow->add_option("--uniform-depth", gf.uniform_depth);
    gen_flow->add_option("--size-mu", gf.size_mu);
    gen_flow->add_option("--size-sigma", gf.size_sigma);
    gen_flow->add_option("--marketable", gf.marketable);
    gen_flow->add_option("--target-pop", gf.target_pop);
    gen_flow->add_option("--invalid-records", gf.invalid_records,
                         "malformed records to sprinkle into the CSV");

    double fgn_hurst = 0.5;
    std::size_t fgn_length = 1 << 16;
    std::uint64_t fgn_seed = 1;
    std::string fgn_out;
    auto* gen_fgn = gen->add_subcommand("fgn", "fractional Gaussian noise series");
    gen_fgn->add_option("--out", fgn_out)->required();
    gen_fgn->add_option("--hurst", fgn_hurst);
    gen_fgn->add_option("--length", fgn_length);
    gen_fgn->add_option("--seed", fgn_seed);

    GenShapeOptions gs;
    auto* gen_shape = gen->add_subcommand("shape", "planted averaged-shape fixture");
    gen_shape->add_option("--out", gs.out)->required();
    gen_shape->add_option("--kind", gs.kind);
    gen_shape->add_option("--depth", gs.depth);
    gen_shape->add_option("--scale", gs.scale);
    gen_shape->add_option("--beta", gs.beta);
    gen_shape->add_option("--mode", gs.mode);
    gen_shape->add_option("--boost", gs.boost);
    gen_shape->add_option("--period", gs.period);
    gen_shape->add_option("--noise", gs.noise);
    gen_shape->add_option("--truncate", gs.truncate);
    gen_shape->add_option("--seed", gs.seed);

    // build
    BuildOptions bo;
    auto* build = app.add_subcommand("build", "rebuild the book from an event stream");
    build->add_option("--input", bo.inputs)->required();
    build->add_option("--config", bo.config)->required();
    build->add_option("--out", bo.out)->required();
    build->add_option("--depth", bo.depth);
    build->add_flag("--snapshots", bo.snapshots, "dump the sparse per-event snapshots");
    build->add_option("--jobs", bo.jobs);

    // shape
    ShapeCmdOptions so;
    auto* shape_cmd = app.add_subcommand("shape", "average a sparse snapshot dump");
    shape_cmd->add_option("--input", so.input)->required();
    shape_cmd->add_option("--out", so.out)->required();
    shape_cmd->add_option("--depth", so.depth)->required();
    shape_cmd->add_option("--events", so.events);
    shape_cmd->add_flag("--peaks", so.peaks);
    shape_cmd->add_option("--peak-period", so.peak_period);
    shape_cmd->add_option("--peak-threshold", so.peak_threshold);

    // impact
    ImpactOptions io;
    auto* impact = app.add_subcommand("impact", "virtual price impact of the rebuilt book");
    impact->add_option("--input", io.input)->required();
    impact->add_option("--config", io.config)->required();
    impact->add_option("--out", io.out)->required();
    impact->add_option("--side", io.side);
    impact->add_option("--omega-max", io.omega_max);
    impact->add_option("--steps", io.steps);
    impact->add_option("--at-seq", io.at_seq);

    // volumes
    VolumesOptions vo;
    auto* volumes = app.add_subcommand("volumes", "clock-averaged per-depth volume series");
    volumes->add_option("--input", vo.input)->required();
    volumes->add_option("--config", vo.config)->required();
    volumes->add_option("--out", vo.out)->required();
    volumes->add_option("--side", vo.side);
    volumes->add_option("--delta", vo.delta);
    volumes->add_option("--dt", vo.dt);

    // dfa
    DfaOptions dfo;
    auto* dfa_cmd = app.add_subcommand("dfa", "detrended fluctuation analysis of a series");
    dfa_cmd->add_option("--input", dfo.input)->required();
    dfa_cmd->add_option("--out", dfo.out)->required();
    dfa_cmd->add_option("--min-box", dfo.min_box);
    dfa_cmd->add_option("--ratio", dfo.ratio);
    dfa_cmd->add_option("--max-div", dfo.max_div);
    dfa_cmd->add_option("--order", dfo.order);
    dfa_cmd->add_option("--range,--fit", dfo.fit_range);

    // fit
    FitOptions fo;
    auto* fit = app.add_subcommand("fit", "parameter fits of shapes and series");
    fit->add_option("--kind", fo.kind)->required();
    fit->add_option("--input", fo.input)->required();
    fit->add_option("--out", fo.out)->required();
    fit->add_option("--range", fo.range);
    fit->add_option("--bins", fo.bins);

    try {
        app.parse(argc, argv);
        if (gen_flow->parsed()) run_gen_flow(gf, command);
        if (gen_fgn->parsed()) run_gen_fgn(fgn_out, fgn_hurst, fgn_length, fgn_seed, command);
        if (gen_shape->parsed()) run_gen_shape(gs, command);
        if (build->parsed()) run_build(bo, command);
        if (shape_cmd->parsed()) run_shape(so, command);
        if (impact->parsed()) run_impact(io, command);
        if (volumes->parsed()) run_volumes(vo, command);
        if (dfa_cmd->parsed()) run_dfa(dfo, command);
        if (fit->parsed()) run_fit(fo, command);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 1;
    } catch (const UsageError& e) {
        std::cerr << "usage error: " << e.what() << "\n";
        return 1;
    } catch (const DataError& e) {
        std::cerr << "data error: " << e.what() << "\n";
        return 2;
    } catch (const InvariantError& e) {
        std::cerr << "internal invariant violation: " << e.what() << "\n";
        return 3;
    } catch (const std::exception& e) {
        std::cerr << "internal error: " << e.what() << "\n";
        return 3;
    }
    return 0;
}
