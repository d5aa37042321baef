#include "clockgen/transport.hpp"

#include "clockgen/device_sim.hpp"
#include "clockgen/errors.hpp"

#include <arpa/inet.h>
#include <netdb.h>
#include <netinet/in.h>
#include <netinet/tcp.h>
#include <poll.h>
#include <sys/socket.h>
#include <unistd.h>

#include <cerrno>
#include <cstring>

namespace clockgen::transport {

namespace {

class InProcessChannel final : public ByteChannel {
public:
    explicit InProcessChannel(std::shared_ptr<sim::SimulatorHost> simulator)
        : simulator_(std::move(simulator))
    {
        simulator_->open_session();
    }
    ~InProcessChannel() override { close(); }

    void write(std::span<const std::uint8_t> bytes) override { simulator_->deliver(bytes); }

    std::vector<std::uint8_t> read(std::size_t n, std::chrono::milliseconds timeout) override
    {
        return simulator_->take(n, timeout);
    }

    void close() noexcept override
    {
        if (open_) {
            open_ = false;
            simulator_->close_session();
        }
    }

private:
    std::shared_ptr<sim::SimulatorHost> simulator_;
    bool open_ = true;
};

class TcpChannel final : public ByteChannel {
public:
    explicit TcpChannel(int fd) : fd_(fd) {}
    ~TcpChannel() override { close(); }

    void write(std::span<const std::uint8_t> bytes) override
    {
        std::size_t sent = 0;
        while (sent < bytes.size()) {
            const auto n = ::send(fd_, bytes.data() + sent, bytes.size() - sent, MSG_NOSIGNAL);
            if (n < 0) {
                if (errno == EINTR) continue;
                throw Error(Errc::SessionClosed, std::string("send failed: ") + std::strerror(errno));
            }
            sent += static_cast<std::size_t>(n);
        }
    }

    std::vector<std::uint8_t> read(std::size_t n, std::chrono::milliseconds timeout) override
    {
        std::vector<std::uint8_t> buf(n);
        if (n == 0) return buf;
        const auto deadline = std::chrono::steady_clock::now() + timeout;
        for (;;) {
            // Peek so a timeout leaves the stream untouched.
            const auto got = ::recv(fd_, buf.data(), n, MSG_PEEK | MSG_DONTWAIT);
            if (got == 0) throw Error(Errc::SessionClosed, "peer closed the connection");
            if (got < 0 && errno != EAGAIN && errno != EWOULDBLOCK && errno != EINTR) {
                throw Error(Errc::SessionClosed, std::string("recv failed: ") + std::strerror(errno));
            }
            if (got == static_cast<ssize_t>(n)) {
                const auto taken = ::recv(fd_, buf.data(), n, MSG_WAITALL);
                if (taken != static_cast<ssize_t>(n)) throw Error(Errc::SessionClosed, "short read");
                return buf;
            }
            const auto left = std::chrono::duration_cast<std::chrono::milliseconds>(
                deadline - std::chrono::steady_clock::now());
            if (left.count() <= 0) {
                throw Error(Errc::Timeout, "no response within " + std::to_string(timeout.count()) + " ms");
            }
            // Wake on new data, or poll again shortly when a partial
            // message is already buffered.
            pollfd p{fd_, POLLIN, 0};
            const int wait_ms = got > 0 ? 1 : static_cast<int>(left.count());
            ::poll(&p, 1, wait_ms);
        }
    }

    void close() noexcept override
    {
        if (fd_ >= 0) {
            ::close(fd_);
            fd_ = -1;
        }
    }

private:
    int fd_;
};

} // namespace

std::unique_ptr<ByteChannel> make_in_process_channel(std::shared_ptr<sim::SimulatorHost> simulator)
{
    if (!simulator) throw Error(Errc::ConnectionRefused, "no simulator attached");
    return std::make_unique<InProcessChannel>(std::move(simulator));
}

std::unique_ptr<ByteChannel> connect_tcp(const TcpEndpoint& endpoint)
{
    addrinfo hints{};
    hints.ai_family = AF_UNSPEC;
    hints.ai_socktype = SOCK_STREAM;
    addrinfo* res = nullptr;
    const auto port = std::to_string(endpoint.port);
    if (const int rc = ::getaddrinfo(endpoint.host.c_str(), port.c_str(), &hints, &res); rc != 0) {
        throw Error(Errc::ConnectionRefused, "cannot resolve '" + endpoint.host + "': " + ::gai_strerror(rc));
    }
    std::string last_error = "no address";
    for (auto* ai = res; ai != nullptr; ai = ai->ai_next) {
        const int fd = ::socket(ai->ai_family, ai->ai_socktype, ai->ai_protocol);
        if (fd < 0) continue;
        if (::connect(fd, ai->ai_addr, ai->ai_addrlen) == 0) {
            ::freeaddrinfo(res);
            int one = 1;
            ::setsockopt(fd, IPPROTO_TCP, TCP_NODELAY, &one, sizeof one);
            return std::make_unique<TcpChannel>(fd);
        }
        last_error = std::strerror(errno);
        ::close(fd);
    }
    ::freeaddrinfo(res);
    throw Error(Errc::ConnectionRefused,
                "cannot connect to " + endpoint.host + ":" + port + ": " + last_error);
}

class Session::Guard {
public:
    explicit Guard(Session& s) : flag_(s.busy_.get())
    {
        if (flag_ != nullptr && flag_->exchange(true)) {
            flag_ = nullptr;
            throw Error(Errc::ConcurrentUse, "session used from two threads at once");
        }
    }
    ~Guard()
    {
        if (flag_ != nullptr) flag_->store(false);
    }
    Guard(const Guard&) = delete;
    Guard& operator=(const Guard&) = delete;

private:
    std::atomic<bool>* flag_;
};

Session::Session(std::unique_ptr<ByteChannel> channel, std::chrono::milliseconds read_timeout)
    : channel_(std::move(channel)), read_timeout_(read_timeout), busy_(std::make_unique<std::atomic<bool>>(false))
{
    if (read_timeout_.count() <= 0) throw Error(Errc::InvalidArgument, "read timeout must be positive");
}

Session::~Session() { close(); }

Session Session::open(const SessionConfig& config)
{
    if (config.read_timeout.count() <= 0) throw Error(Errc::InvalidArgument, "read timeout must be positive");
    if (const auto* in = std::get_if<InProcessEndpoint>(&config.endpoint)) {
        return Session(make_in_process_channel(in->simulator), config.read_timeout);
    }
    return Session(connect_tcp(std::get<TcpEndpoint>(config.endpoint)), config.read_timeout);
}

void Session::write_bytes(std::span<const std::uint8_t> bytes)
{
    Guard g(*this);
    if (!channel_) throw Error(Errc::SessionClosed, "session is closed");
    channel_->write(bytes);
}

std::vector<std::uint8_t> Session::read_bytes(std::size_t n) { return read_bytes(n, read_timeout_); }

std::vector<std::uint8_t> Session::read_bytes(std::size_t n, std::chrono::milliseconds timeout)
{
    Guard g(*this);
    if (!channel_) throw Error(Errc::SessionClosed, "session is closed");
    return channel_->read(n, timeout);
}

void Session::close() noexcept
{
    if (channel_) {
        channel_->close();
        channel_.reset();
    }
}

} // namespace clockgen::transport
