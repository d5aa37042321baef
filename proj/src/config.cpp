#include "clockgen/config.hpp"

#include "clockgen/errors.hpp"
#include "clockgen/synth_layout.hpp"

#include <algorithm>
#include <charconv>
#include <filesystem>
#include <fstream>
#include <map>
#include <set>
#include <sstream>

namespace clockgen {

namespace {

std::string_view trim(std::string_view s)
{
    const auto ws = " \t\r\n";
    const auto b = s.find_first_not_of(ws);
    if (b == std::string_view::npos) return {};
    return s.substr(b, s.find_last_not_of(ws) - b + 1);
}

std::int64_t parse_int(std::string_view v, std::size_t line)
{
    int base = 10;
    if (v.size() > 2 && v[0] == '0' && (v[1] == 'x' || v[1] == 'X')) {
        v.remove_prefix(2);
        base = 16;
    }
    std::int64_t out = 0;
    auto [ptr, ec] = std::from_chars(v.data(), v.data() + v.size(), out, base);
    if (ec != std::errc() || ptr != v.data() + v.size()) throw ParseError(line, "expected an integer");
    return out;
}

double parse_double(std::string_view v, std::size_t line)
{
    try {
        return to_double(parse_rational(v));
    } catch (const Error&) {
        throw ParseError(line, "expected a number");
    }
}

Rational parse_hz(std::string_view v, std::size_t line)
{
    try {
        return parse_rational(v);
    } catch (const Error&) {
        throw ParseError(line, "expected a frequency");
    }
}

std::string read_file(const std::string& path, const char* what)
{
    std::ifstream in(path);
    if (!in) throw Error(Errc::Io, std::string("cannot open ") + what + " '" + path + "'");
    std::ostringstream buf;
    buf << in.rdbuf();
    return buf.str();
}

} // namespace

BoardConfig parse_config(std::string_view text, const std::string& base_dir)
{
    BoardConfig cfg;
    cfg.synth_map = parse_register_map(default_synth_map_text());
    cfg.pot_map = parse_register_map(default_pot_map_text());
    std::map<int, RailModel> rails;
    std::set<std::string> seen;

    std::size_t line_no = 0;
    std::size_t pos = 0;
    while (pos < text.size()) {
        auto nl = text.find('\n', pos);
        if (nl == std::string_view::npos) nl = text.size();
        std::string_view line = text.substr(pos, nl - pos);
        pos = nl + 1;
        ++line_no;
        if (auto h = line.find('#'); h != std::string_view::npos) line = line.substr(0, h);
        line = trim(line);
        if (line.empty()) continue;

        const auto eq = line.find('=');
        if (eq == std::string_view::npos) throw ParseError(line_no, "expected key = value");
        const std::string key(trim(line.substr(0, eq)));
        const std::string_view val = trim(line.substr(eq + 1));
        if (key.empty() || val.empty()) throw ParseError(line_no, "expected key = value");
        if (!seen.insert(key).second) throw ParseError(line_no, "duplicate key '" + key + "'");

        auto& c = cfg.constraints;
        if (key == "synth_address") {
            const auto a = parse_int(val, line_no);
            if (a < 0 || a > 0x7F) throw ParseError(line_no, "synth_address exceeds 7 bits");
            cfg.synth_address = static_cast<std::uint8_t>(a);
        } else if (key == "pot_map") {
            const std::filesystem::path p = std::filesystem::path(base_dir) / std::string(val);
            try {
                cfg.pot_map = parse_register_map(read_file(p.string(), "pot map"));
            } catch (const ParseError& e) {
                throw Error(Errc::Parse, p.string() + ": " + e.what());
            }
        } else if (key == "f_in_hz") {
            cfg.f_in = parse_hz(val, line_no);
        } else if (key == "vco_min_hz") {
            c.vco_min = parse_hz(val, line_no);
        } else if (key == "vco_max_hz") {
            c.vco_max = parse_hz(val, line_no);
        } else if (key == "band_min_hz") {
            c.band_min = parse_hz(val, line_no);
        } else if (key == "band_max_hz") {
            c.band_max = parse_hz(val, line_no);
        } else if (key == "feedback_int_min") {
            c.feedback.min = parse_int(val, line_no);
        } else if (key == "feedback_int_max") {
            c.feedback.max = parse_int(val, line_no);
        } else if (key == "output_int_min") {
            c.output.min = parse_int(val, line_no);
        } else if (key == "output_int_max") {
            c.output.max = parse_int(val, line_no);
        } else if (key == "denominator_max") {
            c.denominator_max = parse_int(val, line_no);
            if (c.denominator_max < 1 || c.denominator_max >= (std::int64_t{1} << kP3Bits)) {
                throw ParseError(line_no, "denominator_max must be in [1, 2^30 - 1]");
            }
        } else if (key == "phase_steps_max") {
            const auto v = parse_int(val, line_no);
            if (v < 0 || v > 127) throw ParseError(line_no, "phase_steps_max must be in [0, 127]");
            c.phase_steps_max = static_cast<int>(v);
        } else if (key == "read_timeout_ms") {
            const auto v = parse_int(val, line_no);
            if (v <= 0) throw ParseError(line_no, "read_timeout_ms must be positive");
            cfg.read_timeout = std::chrono::milliseconds(v);
        } else if (key == "tcp_port") {
            const auto v = parse_int(val, line_no);
            if (v < 0 || v > 65535) throw ParseError(line_no, "tcp_port out of range");
            cfg.tcp_port = static_cast<std::uint16_t>(v);
        } else if (key.rfind("rail.", 0) == 0) {
            const auto dot = key.find('.', 5);
            if (dot == std::string::npos) throw ParseError(line_no, "expected rail.<k>.<field>");
            const auto id = parse_int(std::string_view(key).substr(5, dot - 5), line_no);
            if (id < 0 || id >= kRailCount) throw ParseError(line_no, "rail index not in 0..4");
            auto& r = rails[static_cast<int>(id)];
            r.rail_id = static_cast<int>(id);
            const std::string field = key.substr(dot + 1);
            if (field == "pot_address") {
                const auto a = parse_int(val, line_no);
                if (a < 0 || a > 0x7F) throw ParseError(line_no, "pot_address exceeds 7 bits");
                r.pot_address = static_cast<std::uint8_t>(a);
            } else if (field == "pot_channel") {
                r.pot_channel = static_cast<int>(parse_int(val, line_no));
            } else if (field == "default_code") {
                const auto v = parse_int(val, line_no);
                if (v < 0 || v > 255) throw ParseError(line_no, "default_code not in 0..255");
                r.default_code = static_cast<std::uint8_t>(v);
            } else if (field == "v_ref") {
                r.v_ref = parse_double(val, line_no);
            } else if (field == "r_fixed") {
                r.r_fixed = parse_double(val, line_no);
            } else if (field == "r_ab") {
                r.r_ab = parse_double(val, line_no);
            } else if (field == "r_wiper") {
                r.r_wiper = parse_double(val, line_no);
            } else {
                throw ParseError(line_no, "unknown rail key '" + field + "'");
            }
        } else {
            throw ParseError(line_no, "unknown key '" + key + "'");
        }
    }

    for (auto& [id, r] : rails) {
        try {
            check_rail(r);
        } catch (const Error& e) {
            throw Error(Errc::Parse, e.what());
        }
        cfg.rails.push_back(r);
    }

    const auto& c = cfg.constraints;
    if (c.vco_min <= 0 || c.vco_max < c.vco_min || c.feedback.min < 1 || c.feedback.max < c.feedback.min ||
        c.output.min < 1 || c.output.max < c.output.min) {
        throw Error(Errc::Parse, "inconsistent planner constraints");
    }

    // Rails sharing a pot must use distinct channels.
    std::set<std::pair<int, int>> used;
    for (const auto& r : cfg.rails) {
        if (!used.insert({r.pot_address, r.pot_channel}).second) {
            throw Error(Errc::Parse, "rail " + std::to_string(r.rail_id) + " reuses a pot channel");
        }
        if (r.pot_address == cfg.synth_address) {
            throw Error(Errc::Parse, "rail " + std::to_string(r.rail_id) + " pot shares the synthesizer address");
        }
    }
    return cfg;
}

BoardConfig load_config(const std::string& path)
{
    const auto dir = std::filesystem::path(path).parent_path();
    return parse_config(read_file(path, "config"), dir.empty() ? "." : dir.string());
}

BoardConfig default_config()
{
    // The built-in config names pot_map = ad5263.map; resolve it to the
    // compiled-in copy rather than the filesystem.
    std::string text(default_config_text());
    std::string filtered;
    std::istringstream in(text);
    for (std::string line; std::getline(in, line);) {
        if (trim(line).rfind("pot_map", 0) == 0) line = "# " + line;
        filtered += line + '\n';
    }
    return parse_config(filtered);
}

std::vector<std::uint8_t> pot_addresses(const BoardConfig& config)
{
    std::vector<std::uint8_t> out;
    for (const auto& r : config.rails) out.push_back(r.pot_address);
    std::sort(out.begin(), out.end());
    out.erase(std::unique(out.begin(), out.end()), out.end());
    return out;
}

} // namespace clockgen
