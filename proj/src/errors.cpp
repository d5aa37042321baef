#include "clockgen/errors.hpp"

namespace clockgen {

const char* to_string(Errc code) noexcept
{
    switch (code) {
    case Errc::InvalidArgument: return "invalid-argument";
    case Errc::Framing: return "framing";
    case Errc::InvalidOpcode: return "invalid-opcode";
    case Errc::Parse: return "parse";
    case Errc::FieldOverlap: return "field-overlap";
    case Errc::AddressRange: return "address-out-of-range";
    case Errc::ConnectionRefused: return "connection-refused";
    case Errc::AlreadyOpen: return "already-open";
    case Errc::SessionClosed: return "session-closed";
    case Errc::Timeout: return "timeout";
    case Errc::ConcurrentUse: return "concurrent-use";
    case Errc::Unsatisfiable: return "unsatisfiable";
    case Errc::OutOfRange: return "out-of-range";
    case Errc::FieldOverflow: return "field-overflow";
    case Errc::InconsistentEncoding: return "inconsistent-encoding";
    case Errc::Infeasible: return "infeasible";
    case Errc::NoPlan: return "no-plan";
    case Errc::Io: return "io";
    }
    return "unknown";
}

} // namespace clockgen
