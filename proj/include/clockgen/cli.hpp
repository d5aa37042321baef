#pragma once

#include "clockgen/transport.hpp"

#include <functional>
#include <iosfwd>
#include <memory>
#include <string>
#include <vector>

namespace clockgen::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitDomainError = 1;
inline constexpr int kExitUsage = 2;

// Test hook: when set, replaces the channel the --transport flag would open.
struct Environment {
    std::function<std::unique_ptr<transport::ByteChannel>()> channel_factory;
};

// argv[0] is the program name. Writes results to out and diagnostics to err.
int run(const std::vector<std::string>& argv, std::ostream& out, std::ostream& err,
        const Environment& env = {});

} // namespace clockgen::cli
