#pragma once

#include <array>
#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace clockgen {

// 256 x 8-bit register page of one I2C device. Bits with mask 0 are
// read-only; writes to them are silently dropped.
class RegisterFile {
public:
    RegisterFile() = default;
    RegisterFile(const std::array<std::uint8_t, 256>& reset_values,
                 const std::array<std::uint8_t, 256>& write_masks)
        : registers_(reset_values), reset_(reset_values), masks_(write_masks) {}

    std::uint8_t read(std::uint8_t addr) const { return registers_[addr]; }

    void write(std::uint8_t addr, std::uint8_t value)
    {
        const std::uint8_t m = masks_[addr];
        registers_[addr] = static_cast<std::uint8_t>((registers_[addr] & ~m) | (value & m));
    }

    std::uint8_t mask(std::uint8_t addr) const { return masks_[addr]; }
    void reset() { registers_ = reset_; }
    const std::array<std::uint8_t, 256>& snapshot() const { return registers_; }

    // Every address writable, reset 0x00.
    static RegisterFile full_mask();

private:
    std::array<std::uint8_t, 256> registers_{};
    std::array<std::uint8_t, 256> reset_{};
    std::array<std::uint8_t, 256> masks_{};
};

struct RegisterEntry {
    std::uint8_t address = 0;
    std::uint8_t reset_value = 0;
    std::uint8_t write_mask = 0;
    friend bool operator==(const RegisterEntry&, const RegisterEntry&) = default;
};

// Contiguous bit range [lsb, msb] inside one register.
struct FieldSlice {
    std::uint8_t address = 0;
    std::uint8_t msb = 7;
    std::uint8_t lsb = 0;

    unsigned width() const { return static_cast<unsigned>(msb - lsb + 1); }
    std::uint8_t bit_mask() const
    {
        return static_cast<std::uint8_t>(((1u << width()) - 1u) << lsb);
    }
    friend bool operator==(const FieldSlice&, const FieldSlice&) = default;
};

// A named field is one or more slices, least significant slice first.
struct FieldBinding {
    std::string name;
    std::vector<FieldSlice> slices;

    unsigned width() const;
    friend bool operator==(const FieldBinding&, const FieldBinding&) = default;
};

class RegisterMap {
public:
    const std::vector<RegisterEntry>& entries() const { return entries_; }
    const std::vector<FieldBinding>& fields() const { return fields_; }

    const FieldBinding* find_field(std::string_view name) const;
    const FieldBinding& field(std::string_view name) const; // throws InvalidArgument
    std::optional<RegisterEntry> entry(std::uint8_t address) const;

    RegisterFile make_register_file() const;

    friend bool operator==(const RegisterMap&, const RegisterMap&) = default;

private:
    friend RegisterMap parse_register_map(std::string_view text);

    std::vector<RegisterEntry> entries_;
    std::vector<FieldBinding> fields_;
};

// Line format:
//   <addr-hex>, <value-hex>, <mask-hex>        register entries
//   <field-name> = <addr-hex>[<msb>:<lsb>]     named-field slices (after entries)
// '#' starts a comment. Repeating a field name appends a more significant slice.
// Throws ParseError (with line number) on syntax errors, out-of-range values,
// duplicate addresses, overlapping fields and fields on unlisted addresses.
RegisterMap parse_register_map(std::string_view text);

std::string serialize_register_map(const RegisterMap& map);

RegisterMap load_register_map(const std::string& path);

// Byte-level access to addressed devices. The host bridge and the simulator
// both provide it, so field encode/decode code is shared.
class RegisterBus {
public:
    virtual ~RegisterBus() = default;
    virtual std::uint8_t read(std::uint8_t device, std::uint8_t reg) = 0;
    virtual void write(std::uint8_t device, std::uint8_t reg, std::uint8_t value) = 0;
};

// Collects field values for one device and flushes them as the minimum set of
// byte writes. A register whose written bits plus read-only bits do not cover
// the whole byte is read first and merged.
class FieldWriter {
public:
    FieldWriter(const RegisterMap& map, std::uint8_t device) : map_(map), device_(device) {}

    // Throws FieldOverflow if value does not fit the field width.
    FieldWriter& set(std::string_view field, std::uint64_t value);
    void flush(RegisterBus& bus);

private:
    struct Pending {
        std::uint8_t bits = 0;
        std::uint8_t value = 0;
    };
    const RegisterMap& map_;
    std::uint8_t device_;
    std::map<std::uint8_t, Pending> pending_;
};

// Reads a named field out of a register snapshot.
std::uint64_t read_field(const FieldBinding& field, const std::array<std::uint8_t, 256>& regs);

// Sorted set of register addresses a field touches.
std::vector<std::uint8_t> field_addresses(const FieldBinding& field);

} // namespace clockgen
