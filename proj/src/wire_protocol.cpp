#include "clockgen/wire_protocol.hpp"

#include "clockgen/errors.hpp"

#include <string>

namespace clockgen::wire {

CommandBytes encode_command(const BridgeCommand& cmd)
{
    if (cmd.i2c_address > kMaxI2cAddress) {
        throw Error(Errc::InvalidArgument,
                    "i2c address " + std::to_string(cmd.i2c_address) + " exceeds 7 bits");
    }
    const bool is_write = cmd.action == Action::Write;
    return {is_write ? kOpWrite : kOpRead, cmd.i2c_address, cmd.register_address,
            is_write ? cmd.payload : std::uint8_t{0x00}};
}

BridgeCommand decode_command(std::span<const std::uint8_t> bytes)
{
    if (bytes.size() != kCommandSize) {
        throw Error(Errc::Framing,
                    "command must be 4 bytes, got " + std::to_string(bytes.size()));
    }
    if (bytes[1] > kMaxI2cAddress) {
        throw Error(Errc::InvalidArgument, "address byte exceeds 7 bits");
    }
    switch (bytes[0]) {
    case kOpWrite: return BridgeCommand::write(bytes[1], bytes[2], bytes[3]);
    case kOpRead: return BridgeCommand::read(bytes[1], bytes[2]);
    default:
        throw Error(Errc::InvalidOpcode, "invalid opcode " + std::to_string(bytes[0]));
    }
}

std::array<std::uint8_t, kResponseSize> encode_response(ReadResponse rsp)
{
    return {rsp.value};
}

ReadResponse decode_response(std::span<const std::uint8_t> bytes)
{
    if (bytes.size() != kResponseSize) {
        throw Error(Errc::Framing,
                    "response must be 1 byte, got " + std::to_string(bytes.size()));
    }
    return {bytes[0]};
}

} // namespace clockgen::wire
