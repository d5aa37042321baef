#include "clockgen/device_sim.hpp"
#include "clockgen/errors.hpp"
#include "clockgen/sim_server.hpp"
#include "clockgen/transport.hpp"
#include "clockgen/wire_protocol.hpp"

#include <gtest/gtest.h>

#include <condition_variable>
#include <mutex>
#include <thread>

using namespace clockgen;
using namespace clockgen::transport;
using namespace std::chrono_literals;

namespace {

Errc error_of(const std::function<void()>& f)
{
    try {
        f();
    } catch (const Error& e) {
        return e.code();
    }
    ADD_FAILURE() << "expected an error";
    return Errc::Io;
}

std::shared_ptr<sim::SimulatorHost> make_sim() { return std::make_shared<sim::SimulatorHost>(default_config()); }

std::vector<std::uint8_t> bytes_of(const wire::BridgeCommand& c)
{
    const auto a = wire::encode_command(c);
    return {a.begin(), a.end()};
}

// A port nothing listens on: bind an ephemeral one, then release it.
std::uint16_t dead_port()
{
    sim::TcpSimulatorServer probe(make_sim(), 0);
    return probe.port();
}

class BlockingChannel : public ByteChannel {
public:
    void write(std::span<const std::uint8_t>) override {}
    std::vector<std::uint8_t> read(std::size_t n, std::chrono::milliseconds) override
    {
        std::unique_lock lock(m_);
        entered_ = true;
        cv_.notify_all();
        cv_.wait(lock, [&] { return released_; });
        return std::vector<std::uint8_t>(n, 0);
    }
    void close() noexcept override {}
    void wait_entered()
    {
        std::unique_lock lock(m_);
        cv_.wait(lock, [&] { return entered_; });
    }
    void release()
    {
        std::lock_guard lock(m_);
        released_ = true;
        cv_.notify_all();
    }

private:
    std::mutex m_;
    std::condition_variable cv_;
    bool entered_ = false;
    bool released_ = false;
};

} // namespace

TEST(InProcessTransport, OpenIsExclusive)
{
    auto sim = make_sim();
    auto s = Session::open({InProcessEndpoint{sim}, 200ms});
    EXPECT_TRUE(s.is_open());
    EXPECT_EQ(error_of([&] { Session::open({InProcessEndpoint{sim}, 200ms}); }), Errc::AlreadyOpen);
    s.close();
    s.close();
    EXPECT_FALSE(s.is_open());
    auto again = Session::open({InProcessEndpoint{sim}, 200ms});
    EXPECT_TRUE(again.is_open());
}

TEST(InProcessTransport, NoSimulatorIsRefused)
{
    EXPECT_EQ(error_of([] { Session::open({InProcessEndpoint{}, 200ms}); }), Errc::ConnectionRefused);
    EXPECT_EQ(error_of([] { Session::open({InProcessEndpoint{make_sim()}, 0ms}); }), Errc::InvalidArgument);
}

TEST(InProcessTransport, UseAfterClose)
{
    auto s = Session::open({InProcessEndpoint{make_sim()}, 200ms});
    s.close();
    EXPECT_EQ(error_of([&] { s.write_bytes(bytes_of(wire::BridgeCommand::read(0x70, 0))); }), Errc::SessionClosed);
    EXPECT_EQ(error_of([&] { s.read_bytes(1); }), Errc::SessionClosed);
}

TEST(InProcessTransport, TimeoutConsumesNothingAndOrderIsFifo)
{
    auto s = Session::open({InProcessEndpoint{make_sim()}, 200ms});
    EXPECT_EQ(error_of([&] { s.read_bytes(1, 20ms); }), Errc::Timeout);
    std::vector<std::uint8_t> stream;
    for (std::uint8_t v : {0x10, 0x20, 0x30}) {
        for (auto b : bytes_of(wire::BridgeCommand::write(0x70, 0x06, v))) stream.push_back(b);
        for (auto b : bytes_of(wire::BridgeCommand::read(0x70, 0x06))) stream.push_back(b);
    }
    s.write_bytes(stream);
    EXPECT_EQ(error_of([&] { s.read_bytes(4, 20ms); }), Errc::Timeout);
    EXPECT_EQ(s.read_bytes(2), (std::vector<std::uint8_t>{0x10, 0x20}));
    EXPECT_EQ(s.read_bytes(1), (std::vector<std::uint8_t>{0x30}));
}

TEST(InProcessTransport, CloseDiscardsQueuedResponses)
{
    auto sim = make_sim();
    {
        auto s = Session::open({InProcessEndpoint{sim}, 200ms});
        s.write_bytes(bytes_of(wire::BridgeCommand::read(0x70, 0x06)));
    }
    auto s = Session::open({InProcessEndpoint{sim}, 200ms});
    EXPECT_EQ(error_of([&] { s.read_bytes(1, 20ms); }), Errc::Timeout);
}

TEST(SessionGuard, OverlappingCallsAreRejected)
{
    auto owned = std::make_unique<BlockingChannel>();
    auto* chan = owned.get();
    Session s(std::move(owned), 1000ms);
    std::thread reader([&] { s.read_bytes(1); });
    chan->wait_entered();
    EXPECT_EQ(error_of([&] { s.write_bytes(std::vector<std::uint8_t>{0}); }), Errc::ConcurrentUse);
    chan->release();
    reader.join();
    EXPECT_NO_THROW(s.write_bytes(std::vector<std::uint8_t>{0}));
}

TEST(TcpTransport, RefusedWithoutListener)
{
    const auto port = dead_port();
    EXPECT_EQ(error_of([&] { Session::open({TcpEndpoint{"127.0.0.1", port}, 200ms}); }), Errc::ConnectionRefused);
}

TEST(TcpTransport, RoundTripThroughServer)
{
    auto sim = make_sim();
    sim::TcpSimulatorServer server(sim, 0);
    server.start();
    {
        auto s = Session::open({TcpEndpoint{"127.0.0.1", server.port()}, 2000ms});
        EXPECT_EQ(error_of([&] { s.read_bytes(1, 30ms); }), Errc::Timeout);
        s.write_bytes(bytes_of(wire::BridgeCommand::write(0x70, 0x06, 0x77)));
        s.write_bytes(bytes_of(wire::BridgeCommand::read(0x70, 0x06)));
        s.write_bytes(bytes_of(wire::BridgeCommand::read(0x2C, 0x03)));
        EXPECT_EQ(s.read_bytes(2), (std::vector<std::uint8_t>{0x77, 56}));

        // a second client is cut off while the first is attached
        auto intruder = Session::open({TcpEndpoint{"127.0.0.1", server.port()}, 500ms});
        EXPECT_EQ(error_of([&] { intruder.read_bytes(1); }), Errc::SessionClosed);

        s.write_bytes(bytes_of(wire::BridgeCommand::read(0x70, 0x06)));
        EXPECT_EQ(s.read_bytes(1), (std::vector<std::uint8_t>{0x77}));
    }
    // after the first client leaves, a new one is served and state persists
    for (int attempt = 0; attempt < 50; ++attempt) {
        if (!sim->session_open()) break;
        std::this_thread::sleep_for(10ms);
    }
    auto s = Session::open({TcpEndpoint{"127.0.0.1", server.port()}, 2000ms});
    s.write_bytes(bytes_of(wire::BridgeCommand::read(0x70, 0x06)));
    EXPECT_EQ(s.read_bytes(1), (std::vector<std::uint8_t>{0x77}));
    s.close();
    server.stop();
}
