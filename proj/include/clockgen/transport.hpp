#pragma once

#include <atomic>
#include <chrono>
#include <cstdint>
#include <memory>
#include <span>
#include <string>
#include <variant>
#include <vector>

namespace clockgen::sim {
class SimulatorHost;
}

namespace clockgen::transport {

struct InProcessEndpoint {
    std::shared_ptr<sim::SimulatorHost> simulator;
};

struct TcpEndpoint {
    std::string host = "127.0.0.1";
    std::uint16_t port = 53380;
};

using Endpoint = std::variant<InProcessEndpoint, TcpEndpoint>;

struct SessionConfig {
    Endpoint endpoint;
    std::chrono::milliseconds read_timeout{1000};
};

// Raw ordered byte stream to a device or simulator.
class ByteChannel {
public:
    virtual ~ByteChannel() = default;
    virtual void write(std::span<const std::uint8_t> bytes) = 0;
    // Exactly n bytes or Error(Timeout); nothing is consumed on timeout.
    virtual std::vector<std::uint8_t> read(std::size_t n, std::chrono::milliseconds timeout) = 0;
    virtual void close() noexcept = 0;
};

std::unique_ptr<ByteChannel> make_in_process_channel(std::shared_ptr<sim::SimulatorHost> simulator);
std::unique_ptr<ByteChannel> connect_tcp(const TcpEndpoint& endpoint);

// Exclusive byte session. A session has one logical owner; overlapping calls
// from two threads raise Error(ConcurrentUse).
class Session {
public:
    Session(std::unique_ptr<ByteChannel> channel, std::chrono::milliseconds read_timeout);
    ~Session();
    Session(Session&&) noexcept = default;
    Session& operator=(Session&&) noexcept = default;

    // Throws ConnectionRefused, AlreadyOpen or InvalidArgument (bad timeout).
    static Session open(const SessionConfig& config);

    void write_bytes(std::span<const std::uint8_t> bytes);
    std::vector<std::uint8_t> read_bytes(std::size_t n);
    std::vector<std::uint8_t> read_bytes(std::size_t n, std::chrono::milliseconds timeout);

    // Idempotent.
    void close() noexcept;
    bool is_open() const { return channel_ != nullptr; }
    std::chrono::milliseconds read_timeout() const { return read_timeout_; }

private:
    class Guard;

    std::unique_ptr<ByteChannel> channel_;
    std::chrono::milliseconds read_timeout_;
    std::unique_ptr<std::atomic<bool>> busy_;
};

} // namespace clockgen::transport
