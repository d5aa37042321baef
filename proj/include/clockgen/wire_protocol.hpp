#pragma once

#include <array>
#include <cstdint>
#include <span>

namespace clockgen::wire {

inline constexpr std::uint8_t kOpWrite = 0xFF;
inline constexpr std::uint8_t kOpRead = 0x00;
inline constexpr std::size_t kCommandSize = 4;
inline constexpr std::size_t kResponseSize = 1;
inline constexpr std::uint8_t kMaxI2cAddress = 0x7F;

enum class Action : std::uint8_t { Write, Read };

// One bridge command. i2c_address is the unshifted 7-bit address; the
// firmware appends the R/W bit when it addresses the bus.
struct BridgeCommand {
    Action action = Action::Read;
    std::uint8_t i2c_address = 0;
    std::uint8_t register_address = 0;
    std::uint8_t payload = 0;

    static BridgeCommand write(std::uint8_t dev, std::uint8_t reg, std::uint8_t value)
    {
        return {Action::Write, dev, reg, value};
    }
    static BridgeCommand read(std::uint8_t dev, std::uint8_t reg)
    {
        return {Action::Read, dev, reg, 0x00};
    }

    friend bool operator==(const BridgeCommand&, const BridgeCommand&) = default;
};

struct ReadResponse {
    std::uint8_t value = 0;
    friend bool operator==(const ReadResponse&, const ReadResponse&) = default;
};

using CommandBytes = std::array<std::uint8_t, kCommandSize>;

// Throws Error(InvalidArgument) for an address above 0x7F. A Read always
// carries 0x00 in the payload byte.
CommandBytes encode_command(const BridgeCommand& cmd);

// Throws Error(Framing) unless bytes.size() == 4, Error(InvalidOpcode) for an
// opcode other than 0xFF/0x00 and Error(InvalidArgument) for an address byte
// above 0x7F. A Read's payload byte is ignored.
BridgeCommand decode_command(std::span<const std::uint8_t> bytes);

std::array<std::uint8_t, kResponseSize> encode_response(ReadResponse rsp);
ReadResponse decode_response(std::span<const std::uint8_t> bytes);

} // namespace clockgen::wire
