#pragma once

#include "clockgen/device_sim.hpp"

#include <atomic>
#include <cstdint>
#include <memory>
#include <thread>

namespace clockgen::sim {

// Serves one SimulatorHost over TCP. Raw protocol bytes, no extra framing.
// While a client is connected, further connections are accepted and closed
// at once.
class TcpSimulatorServer {
public:
    // port 0 picks an ephemeral port; see port().
    TcpSimulatorServer(std::shared_ptr<SimulatorHost> simulator, std::uint16_t port,
                       const std::string& bind_address = "127.0.0.1");
    ~TcpSimulatorServer();

    TcpSimulatorServer(const TcpSimulatorServer&) = delete;
    TcpSimulatorServer& operator=(const TcpSimulatorServer&) = delete;

    std::uint16_t port() const { return port_; }

    // Runs the accept/serve loop on a background thread.
    void start();
    // Runs the loop on the calling thread until stop() is called.
    void serve();
    // Asks serve() to return; safe from a signal handler.
    void request_stop() noexcept { stopping_ = true; }
    void stop();

private:
    void serve_client(int fd);

    std::shared_ptr<SimulatorHost> simulator_;
    int listen_fd_ = -1;
    std::uint16_t port_ = 0;
    std::atomic<bool> stopping_{false};
    std::thread thread_;
};

} // namespace clockgen::sim
