#include "clockgen/cli.hpp"

#include "clockgen/config.hpp"
#include "clockgen/device_sim.hpp"
#include "clockgen/errors.hpp"
#include "clockgen/host_api.hpp"
#include "clockgen/sim_server.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <algorithm>
#include <atomic>
#include <csignal>
#include <iomanip>
#include <iostream>
#include <sstream>

namespace clockgen::cli {

namespace {

using nlohmann::json;

std::atomic<sim::TcpSimulatorServer*> g_server{nullptr};

extern "C" void on_signal(int)
{
    if (auto* s = g_server.load()) s->request_stop();
}

std::string hex_byte(unsigned v)
{
    std::ostringstream s;
    s << "0x" << std::uppercase << std::hex << std::setw(2) << std::setfill('0') << v;
    return s.str();
}

std::uint8_t parse_byte(const std::string& text, unsigned limit, const char* what)
{
    std::size_t used = 0;
    unsigned long v = 0;
    try {
        v = std::stoul(text, &used, 0);
    } catch (const std::exception&) {
        used = 0;
    }
    if (used != text.size() || text.empty() || v > limit) {
        throw CLI::ValidationError(what, "'" + text + "' is not a value in 0.." + std::to_string(limit));
    }
    return static_cast<std::uint8_t>(v);
}

Rational parse_number(const std::string& text, const char* what)
{
    try {
        return parse_rational(text);
    } catch (const Error&) {
        throw CLI::ValidationError(what, "'" + text + "' is not a number");
    }
}

transport::Endpoint parse_transport(const std::string& text, const BoardConfig& cfg)
{
    if (text == "sim") {
        return transport::InProcessEndpoint{std::make_shared<sim::SimulatorHost>(cfg)};
    }
    if (text.rfind("tcp:", 0) == 0) {
        const auto rest = text.substr(4);
        const auto colon = rest.rfind(':');
        if (colon == std::string::npos || colon == 0) throw CLI::ValidationError("--transport", "expected tcp:HOST:PORT");
        const auto port = parse_number(rest.substr(colon + 1), "--transport");
        if (port.get_den() != 1 || port < 1 || port > 65535) {
            throw CLI::ValidationError("--transport", "bad port");
        }
        return transport::TcpEndpoint{rest.substr(0, colon), static_cast<std::uint16_t>(port.get_num().get_ui())};
    }
    throw CLI::ValidationError("--transport", "expected sim or tcp:HOST:PORT");
}

json divider_json(const RationalDivider& d)
{
    return {{"a", d.a}, {"b", d.b}, {"c", d.c}};
}

json plan_json(const FrequencyPlan& p)
{
    return {{"channel", p.channel},
            {"f_in_hz", to_string(p.f_in)},
            {"f_target_hz", to_string(p.f_target)},
            {"f_achieved_hz", to_string(p.f_achieved)},
            {"f_vco_hz", to_string(p.f_vco)},
            {"feedback", divider_json(p.feedback)},
            {"output", divider_json(p.output)},
            {"rel_error", to_string(p.rel_error)},
            {"kind", to_string(p.kind)}};
}

json status_json(const host::BoardStatus& st)
{
    json channels = json::array();
    for (const auto& c : st.channels) {
        channels.push_back({{"channel", c.channel},
                            {"enabled", c.enabled},
                            {"valid", c.valid},
                            {"f_out_hz", c.f_out ? json(to_string(*c.f_out)) : json(nullptr)},
                            {"f_vco_hz", c.f_vco ? json(to_string(*c.f_vco)) : json(nullptr)},
                            {"phase_steps", c.phase_steps},
                            {"phase_offset_s", to_string(c.phase_offset)}});
    }
    json rails = json::array();
    for (const auto& r : st.rails) rails.push_back({{"rail", r.rail_id}, {"code", r.code}, {"volts", r.volts}});
    return {{"channels", channels}, {"rails", rails}};
}

std::string describe_hz(const Rational& f)
{
    std::ostringstream s;
    s << to_string(f) << " Hz";
    if (f.get_den() != 1) s << " (~" << std::setprecision(12) << to_double(f) << ")";
    return s.str();
}

void print_status(std::ostream& out, const host::BoardStatus& st)
{
    for (const auto& c : st.channels) {
        out << "channel " << c.channel << ": " << (c.enabled ? "enabled" : "disabled");
        if (!c.valid) {
            out << ", invalid configuration\n";
            continue;
        }
        out << ", f_out " << (c.f_out ? describe_hz(*c.f_out) : std::string("none")) << ", phase "
            << c.phase_steps << " steps (" << std::setprecision(6) << to_double(c.phase_offset) * 1e9 << " ns)\n";
    }
    for (const auto& r : st.rails) {
        out << "rail " << r.rail_id << ": code " << r.code << ", " << std::fixed << std::setprecision(4) << r.volts
            << " V\n"
            << std::defaultfloat;
    }
}

struct Options {
    std::string transport = "tcp:127.0.0.1:" + std::to_string(kDefaultTcpPort);
    std::string map_path;
    std::string config_path;
    bool json = false;

    int channel = 0;
    std::string hz;
    std::string seconds;
    std::string degrees;
    int rail = 0;
    double volts = 0.0;
    std::string reg_addr;
    std::string reg_value;
    std::string dev;
    int port = kDefaultTcpPort;
    std::string bind = "127.0.0.1";
    bool port_given = false;
};

BoardConfig load_board(const Options& o)
{
    BoardConfig cfg = o.config_path.empty() ? default_config() : load_config(o.config_path);
    if (!o.map_path.empty()) cfg.synth_map = load_register_map(o.map_path);
    return cfg;
}

int run_simulate(const Options& o, CLI::App* sub, std::ostream& out)
{
    BoardConfig cfg = load_board(o);
    const auto port = sub->count("--port") ? static_cast<std::uint16_t>(o.port) : cfg.tcp_port;
    auto host = std::make_shared<sim::SimulatorHost>(cfg);
    sim::TcpSimulatorServer server(host, port, o.bind);
    if (o.json) {
        out << json{{"listening", o.bind}, {"port", server.port()}}.dump() << std::endl;
    } else {
        out << "simulator listening on " << o.bind << ":" << server.port() << std::endl;
    }
    g_server = &server;
    std::signal(SIGINT, on_signal);
    std::signal(SIGTERM, on_signal);
    server.serve();
    g_server = nullptr;
    return kExitOk;
}

} // namespace

int run(const std::vector<std::string>& argv, std::ostream& out, std::ostream& err, const Environment& env)
{
    CLI::App app{"Control and simulate the four-output programmable clock generator", "clockgen"};
    app.require_subcommand(1, 1);
    Options o;
    app.add_option("--transport", o.transport, "sim | tcp:HOST:PORT")->capture_default_str();
    app.add_option("--map", o.map_path, "synthesizer register map file");
    app.add_option("--config", o.config_path, "board config file");
    app.add_flag("--json", o.json, "machine-readable output");

    auto* simulate = app.add_subcommand("simulate", "run the board simulator on TCP");
    simulate->add_option("--port", o.port, "listen port (0 = ephemeral; default from config)")
        ->check(CLI::Range(0, 65535));
    simulate->add_option("--bind", o.bind, "listen address")->capture_default_str();

    auto* set_freq = app.add_subcommand("set-freq", "program a channel's output frequency");
    set_freq->add_option("--channel", o.channel)->required()->check(CLI::Range(0, 3));
    set_freq->add_option("--hz", o.hz, "frequency: integer Hz, decimal, p/q, or k/M suffix")->required();

    auto* set_phase = app.add_subcommand("set-phase", "set a channel's phase offset");
    set_phase->add_option("--channel", o.channel)->required()->check(CLI::Range(0, 3));
    auto* offset = set_phase->add_option_group("offset", "exactly one of --seconds / --degrees");
    offset->add_option("--seconds", o.seconds, "offset in seconds (e.g. 1.25n)");
    offset->add_option("--degrees", o.degrees, "offset in degrees of the output period");
    offset->require_option(1);

    auto* enable = app.add_subcommand("enable", "enable a channel's output");
    enable->add_option("--channel", o.channel)->required()->check(CLI::Range(0, 3));
    auto* disable = app.add_subcommand("disable", "disable a channel's output");
    disable->add_option("--channel", o.channel)->required()->check(CLI::Range(0, 3));

    auto* set_rail = app.add_subcommand("set-rail", "set a supply rail voltage");
    set_rail->add_option("--rail", o.rail)->required()->check(CLI::Range(0, kRailCount - 1));
    set_rail->add_option("--volts", o.volts)->required();

    auto* reg = app.add_subcommand("reg", "raw register access");
    reg->require_subcommand(1, 1);
    auto* reg_read = reg->add_subcommand("read", "read one register");
    reg_read->add_option("ADDR", o.reg_addr)->required();
    reg_read->add_option("--dev", o.dev, "I2C address (default: synthesizer)");
    auto* reg_write = reg->add_subcommand("write", "write one register");
    reg_write->add_option("ADDR", o.reg_addr)->required();
    reg_write->add_option("VAL", o.reg_value)->required();
    reg_write->add_option("--dev", o.dev, "I2C address (default: synthesizer)");

    auto* status = app.add_subcommand("status", "show outputs and rails");

    std::vector<std::string> args(argv.size() > 1 ? argv.begin() + 1 : argv.end(), argv.end());
    std::reverse(args.begin(), args.end());
    try {
        app.parse(args);
    } catch (const CLI::CallForHelp&) {
        out << app.help();
        return kExitOk;
    } catch (const CLI::CallForAllHelp&) {
        out << app.help("", CLI::AppFormatMode::All);
        return kExitOk;
    } catch (const CLI::ParseError& e) {
        err << "usage error: " << e.what() << "\n" << "run with --help for usage\n";
        return kExitUsage;
    }

    try {
        if (simulate->parsed()) return run_simulate(o, simulate, out);

        // Validate arguments before touching the board.
        std::optional<Rational> hz;
        std::optional<PhaseRequest> phase;
        std::uint8_t reg_addr = 0;
        std::uint8_t reg_value = 0;
        std::optional<std::uint8_t> dev;
        if (set_freq->parsed()) hz = parse_number(o.hz, "--hz");
        if (set_phase->parsed()) {
            phase = o.seconds.empty() ? PhaseRequest::degrees(parse_number(o.degrees, "--degrees"))
                                      : PhaseRequest::seconds(parse_number(o.seconds, "--seconds"));
        }
        if (reg_read->parsed() || reg_write->parsed()) {
            reg_addr = parse_byte(o.reg_addr, 0xFF, "ADDR");
            if (reg_write->parsed()) reg_value = parse_byte(o.reg_value, 0xFF, "VAL");
            if (!o.dev.empty()) dev = parse_byte(o.dev, 0x7F, "--dev");
        }

        BoardConfig cfg = load_board(o);
        synth::validate_layout(cfg.synth_map);
        std::unique_ptr<transport::ByteChannel> channel;
        if (env.channel_factory) {
            channel = env.channel_factory();
        } else {
            const auto ep = parse_transport(o.transport, cfg);
            if (const auto* in = std::get_if<transport::InProcessEndpoint>(&ep)) {
                channel = transport::make_in_process_channel(in->simulator);
            } else {
                channel = transport::connect_tcp(std::get<transport::TcpEndpoint>(ep));
            }
        }
        const auto timeout = cfg.read_timeout;
        host::DeviceHandle handle(host::Bridge(transport::Session(std::move(channel), timeout)), std::move(cfg));

        if (set_freq->parsed()) {
            const auto plan = handle.set_frequency(o.channel, *hz);
            if (o.json) {
                out << plan_json(plan).dump() << "\n";
            } else {
                out << "channel " << plan.channel << ": " << describe_hz(plan.f_achieved) << ", feedback "
                    << to_string(plan.feedback.value()) << ", output " << to_string(plan.output.value())
                    << ", f_vco " << describe_hz(plan.f_vco) << ", rel_error " << to_string(plan.rel_error)
                    << " (" << to_string(plan.kind) << ")\n";
            }
        } else if (set_phase->parsed()) {
            const auto p = handle.set_phase(o.channel, *phase);
            if (o.json) {
                out << json{{"channel", o.channel},
                            {"steps", p.steps},
                            {"quantum_s", to_string(p.quantum)},
                            {"offset_requested_s", to_string(p.offset_requested)},
                            {"offset_achieved_s", to_string(p.offset_achieved)},
                            {"residual_s", to_string(p.residual)}}
                           .dump()
                    << "\n";
            } else {
                out << "channel " << o.channel << ": " << p.steps << " steps, achieved "
                    << to_double(p.offset_achieved) * 1e9 << " ns, residual " << to_double(p.residual) * 1e9
                    << " ns\n";
            }
        } else if (enable->parsed() || disable->parsed()) {
            const bool on = enable->parsed();
            handle.enable_output(o.channel, on);
            if (o.json) {
                out << json{{"channel", o.channel}, {"enabled", on}}.dump() << "\n";
            } else {
                out << "channel " << o.channel << ": " << (on ? "enabled" : "disabled") << "\n";
            }
        } else if (set_rail->parsed()) {
            const auto s = handle.set_rail_voltage(o.rail, o.volts);
            if (o.json) {
                out << json{{"rail", o.rail}, {"code", s.code}, {"v_predicted", s.v_predicted}, {"v_error", s.v_error}}
                           .dump()
                    << "\n";
            } else {
                out << "rail " << o.rail << ": code " << s.code << ", " << s.v_predicted << " V (error "
                    << s.v_error << " V)\n";
            }
        } else if (reg_read->parsed()) {
            const auto d = dev.value_or(handle.config().synth_address);
            const auto v = handle.bridge_read(d, reg_addr);
            if (o.json) {
                out << json{{"dev", hex_byte(d)}, {"addr", hex_byte(reg_addr)}, {"value", hex_byte(v)}}.dump()
                    << "\n";
            } else {
                out << hex_byte(v) << "\n";
            }
        } else if (reg_write->parsed()) {
            const auto d = dev.value_or(handle.config().synth_address);
            handle.bridge_write(d, reg_addr, reg_value);
            if (o.json) {
                out << json{{"dev", hex_byte(d)}, {"addr", hex_byte(reg_addr)}, {"value", hex_byte(reg_value)}}
                           .dump()
                    << "\n";
            }
        } else if (status->parsed()) {
            const auto st = handle.read_status();
            if (o.json) {
                out << status_json(st).dump() << "\n";
            } else {
                print_status(out, st);
            }
        }
        return kExitOk;
    } catch (const CLI::ValidationError& e) {
        err << "usage error: " << e.what() << "\n";
        return kExitUsage;
    } catch (const Error& e) {
        err << "error (" << to_string(e.code()) << "): " << e.what() << "\n";
        return kExitDomainError;
    }
}

} // namespace clockgen::cli
