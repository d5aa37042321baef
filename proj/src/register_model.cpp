#include "clockgen/register_model.hpp"

#include "clockgen/errors.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <fstream>
#include <set>
#include <sstream>

namespace clockgen {

RegisterFile RegisterFile::full_mask()
{
    std::array<std::uint8_t, 256> reset{};
    std::array<std::uint8_t, 256> masks{};
    masks.fill(0xFF);
    return RegisterFile(reset, masks);
}

unsigned FieldBinding::width() const
{
    unsigned w = 0;
    for (const auto& s : slices) w += s.width();
    return w;
}

const FieldBinding* RegisterMap::find_field(std::string_view name) const
{
    auto it = std::find_if(fields_.begin(), fields_.end(),
                           [&](const FieldBinding& f) { return f.name == name; });
    return it == fields_.end() ? nullptr : &*it;
}

const FieldBinding& RegisterMap::field(std::string_view name) const
{
    if (const auto* f = find_field(name)) return *f;
    throw Error(Errc::InvalidArgument, "register map has no field '" + std::string(name) + "'");
}

std::optional<RegisterEntry> RegisterMap::entry(std::uint8_t address) const
{
    for (const auto& e : entries_) {
        if (e.address == address) return e;
    }
    return std::nullopt;
}

RegisterFile RegisterMap::make_register_file() const
{
    std::array<std::uint8_t, 256> reset{};
    std::array<std::uint8_t, 256> masks{};
    for (const auto& e : entries_) {
        reset[e.address] = e.reset_value;
        masks[e.address] = e.write_mask;
    }
    return RegisterFile(reset, masks);
}

namespace {

std::string_view trim(std::string_view s)
{
    const auto ws = " \t\r\n";
    const auto b = s.find_first_not_of(ws);
    if (b == std::string_view::npos) return {};
    const auto e = s.find_last_not_of(ws);
    return s.substr(b, e - b + 1);
}

std::optional<unsigned long> parse_hex(std::string_view s)
{
    s = trim(s);
    if (s.size() > 2 && s[0] == '0' && (s[1] == 'x' || s[1] == 'X')) s.remove_prefix(2);
    if (s.empty()) return std::nullopt;
    unsigned long v = 0;
    auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v, 16);
    if (ec != std::errc() || ptr != s.data() + s.size()) return std::nullopt;
    return v;
}

std::optional<unsigned long> parse_dec(std::string_view s)
{
    s = trim(s);
    if (s.empty()) return std::nullopt;
    unsigned long v = 0;
    auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v, 10);
    if (ec != std::errc() || ptr != s.data() + s.size()) return std::nullopt;
    return v;
}

bool valid_field_name(std::string_view s)
{
    if (s.empty()) return false;
    return std::all_of(s.begin(), s.end(), [](char c) {
        return std::isalnum(static_cast<unsigned char>(c)) || c == '_' || c == '.';
    });
}

std::string hex2(unsigned v)
{
    static const char* digits = "0123456789ABCDEF";
    return std::string("0x") + digits[(v >> 4) & 0xF] + digits[v & 0xF];
}

} // namespace

RegisterMap parse_register_map(std::string_view text)
{
    RegisterMap map;
    std::set<unsigned> seen;
    // owner of each (address, bit), for overlap detection
    std::map<std::pair<unsigned, unsigned>, std::string> bit_owner;
    bool in_fields = false;

    std::size_t line_no = 0;
    std::size_t pos = 0;
    while (pos < text.size()) {
        auto nl = text.find('\n', pos);
        if (nl == std::string_view::npos) nl = text.size();
        std::string_view line = text.substr(pos, nl - pos);
        pos = nl + 1;
        ++line_no;

        if (auto hash = line.find('#'); hash != std::string_view::npos) line = line.substr(0, hash);
        line = trim(line);
        if (line.empty()) continue;

        if (auto eq = line.find('='); eq != std::string_view::npos) {
            in_fields = true;
            const auto name = trim(line.substr(0, eq));
            const auto rhs = trim(line.substr(eq + 1));
            if (!valid_field_name(name)) throw ParseError(line_no, "bad field name");
            const auto lb = rhs.find('[');
            const auto colon = rhs.find(':');
            const auto rb = rhs.find(']');
            if (lb == std::string_view::npos || colon == std::string_view::npos ||
                rb == std::string_view::npos || !(lb < colon && colon < rb) || rb + 1 != rhs.size()) {
                throw ParseError(line_no, "expected <addr>[<msb>:<lsb>]");
            }
            const auto addr = parse_hex(rhs.substr(0, lb));
            const auto msb = parse_dec(rhs.substr(lb + 1, colon - lb - 1));
            const auto lsb = parse_dec(rhs.substr(colon + 1, rb - colon - 1));
            if (!addr || !msb || !lsb) throw ParseError(line_no, "malformed field binding");
            if (*addr > 0xFF) throw ParseError(line_no, "address out of range", Errc::AddressRange);
            if (*msb > 7 || *lsb > *msb) throw ParseError(line_no, "bad bit range");
            if (!seen.count(static_cast<unsigned>(*addr))) {
                throw ParseError(line_no, "field on address " + hex2(static_cast<unsigned>(*addr)) +
                                              " that has no register entry");
            }
            for (unsigned bit = static_cast<unsigned>(*lsb); bit <= *msb; ++bit) {
                auto [it, inserted] =
                    bit_owner.emplace(std::pair{static_cast<unsigned>(*addr), bit}, std::string(name));
                if (!inserted) {
                    throw ParseError(line_no,
                                     "field '" + std::string(name) + "' overlaps '" + it->second + "'",
                                     Errc::FieldOverlap);
                }
            }
            FieldSlice slice{static_cast<std::uint8_t>(*addr), static_cast<std::uint8_t>(*msb),
                             static_cast<std::uint8_t>(*lsb)};
            auto it = std::find_if(map.fields_.begin(), map.fields_.end(),
                                   [&](const FieldBinding& f) { return f.name == name; });
            if (it == map.fields_.end()) {
                map.fields_.push_back({std::string(name), {slice}});
            } else {
                if (it->width() + slice.width() > 64) throw ParseError(line_no, "field wider than 64 bits");
                it->slices.push_back(slice);
            }
            continue;
        }

        if (in_fields) throw ParseError(line_no, "register entry after field section");

        std::string_view parts[3];
        std::size_t start = 0;
        for (int i = 0; i < 3; ++i) {
            const auto comma = line.find(',', start);
            if ((i < 2) == (comma == std::string_view::npos)) {
                throw ParseError(line_no, "expected <addr>, <value>, <mask>");
            }
            parts[i] = line.substr(start, i < 2 ? comma - start : std::string_view::npos);
            start = comma + 1;
        }
        const auto addr = parse_hex(parts[0]);
        const auto value = parse_hex(parts[1]);
        const auto mask = parse_hex(parts[2]);
        if (!addr || !value || !mask) throw ParseError(line_no, "malformed hex number");
        if (*addr > 0xFF) throw ParseError(line_no, "address out of range", Errc::AddressRange);
        if (*value > 0xFF || *mask > 0xFF) throw ParseError(line_no, "value or mask exceeds 8 bits");
        if (!seen.insert(static_cast<unsigned>(*addr)).second) {
            throw ParseError(line_no, "duplicate address " + hex2(static_cast<unsigned>(*addr)));
        }
        map.entries_.push_back({static_cast<std::uint8_t>(*addr), static_cast<std::uint8_t>(*value),
                                static_cast<std::uint8_t>(*mask)});
    }
    return map;
}

std::string serialize_register_map(const RegisterMap& map)
{
    std::ostringstream out;
    for (const auto& e : map.entries()) {
        out << hex2(e.address) << ", " << hex2(e.reset_value) << ", " << hex2(e.write_mask) << '\n';
    }
    for (const auto& f : map.fields()) {
        for (const auto& s : f.slices) {
            out << f.name << " = " << hex2(s.address) << '[' << unsigned(s.msb) << ':' << unsigned(s.lsb)
                << "]\n";
        }
    }
    return out.str();
}

RegisterMap load_register_map(const std::string& path)
{
    std::ifstream in(path);
    if (!in) throw Error(Errc::Io, "cannot open register map '" + path + "'");
    std::ostringstream buf;
    buf << in.rdbuf();
    return parse_register_map(buf.str());
}

FieldWriter& FieldWriter::set(std::string_view name, std::uint64_t value)
{
    const auto& f = map_.field(name);
    const unsigned w = f.width();
    if (w < 64 && (value >> w) != 0) {
        throw Error(Errc::FieldOverflow, "value " + std::to_string(value) + " does not fit field '" +
                                             std::string(name) + "' (" + std::to_string(w) + " bits)");
    }
    unsigned shift = 0;
    for (const auto& s : f.slices) {
        const auto part = static_cast<std::uint8_t>((value >> shift) & ((1u << s.width()) - 1u));
        auto& p = pending_[s.address];
        p.bits = static_cast<std::uint8_t>(p.bits | s.bit_mask());
        p.value = static_cast<std::uint8_t>((p.value & ~s.bit_mask()) | (part << s.lsb));
        shift += s.width();
    }
    return *this;
}

void FieldWriter::flush(RegisterBus& bus)
{
    for (const auto& [addr, p] : pending_) {
        const auto entry = map_.entry(addr);
        const std::uint8_t writable = entry ? entry->write_mask : 0x00;
        std::uint8_t out = p.value;
        if (static_cast<std::uint8_t>(p.bits | ~writable) != 0xFF) {
            const std::uint8_t current = bus.read(device_, addr);
            out = static_cast<std::uint8_t>((current & ~p.bits) | (p.value & p.bits));
        }
        bus.write(device_, addr, out);
    }
    pending_.clear();
}

std::uint64_t read_field(const FieldBinding& field, const std::array<std::uint8_t, 256>& regs)
{
    std::uint64_t v = 0;
    unsigned shift = 0;
    for (const auto& s : field.slices) {
        const std::uint64_t part = (regs[s.address] & s.bit_mask()) >> s.lsb;
        v |= part << shift;
        shift += s.width();
    }
    return v;
}

std::vector<std::uint8_t> field_addresses(const FieldBinding& field)
{
    std::vector<std::uint8_t> out;
    for (const auto& s : field.slices) out.push_back(s.address);
    std::sort(out.begin(), out.end());
    out.erase(std::unique(out.begin(), out.end()), out.end());
    return out;
}

} // namespace clockgen
