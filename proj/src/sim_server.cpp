#include "clockgen/sim_server.hpp"

#include "clockgen/errors.hpp"

#include <arpa/inet.h>
#include <netinet/in.h>
#include <netinet/tcp.h>
#include <poll.h>
#include <sys/socket.h>
#include <unistd.h>

#include <array>
#include <cerrno>
#include <cstring>

namespace clockgen::sim {

namespace {

void send_all(int fd, const std::vector<std::uint8_t>& bytes)
{
    std::size_t sent = 0;
    while (sent < bytes.size()) {
        const auto n = ::send(fd, bytes.data() + sent, bytes.size() - sent, MSG_NOSIGNAL);
        if (n < 0) {
            if (errno == EINTR) continue;
            return;
        }
        sent += static_cast<std::size_t>(n);
    }
}

} // namespace

TcpSimulatorServer::TcpSimulatorServer(std::shared_ptr<SimulatorHost> simulator, std::uint16_t port,
                                       const std::string& bind_address)
    : simulator_(std::move(simulator))
{
    listen_fd_ = ::socket(AF_INET, SOCK_STREAM, 0);
    if (listen_fd_ < 0) throw Error(Errc::Io, std::string("socket: ") + std::strerror(errno));
    int one = 1;
    ::setsockopt(listen_fd_, SOL_SOCKET, SO_REUSEADDR, &one, sizeof one);

    sockaddr_in addr{};
    addr.sin_family = AF_INET;
    addr.sin_port = htons(port);
    if (::inet_pton(AF_INET, bind_address.c_str(), &addr.sin_addr) != 1) {
        ::close(listen_fd_);
        throw Error(Errc::InvalidArgument, "bad bind address '" + bind_address + "'");
    }
    if (::bind(listen_fd_, reinterpret_cast<sockaddr*>(&addr), sizeof addr) != 0 || ::listen(listen_fd_, 4) != 0) {
        const std::string err = std::strerror(errno);
        ::close(listen_fd_);
        throw Error(Errc::Io, "cannot listen on port " + std::to_string(port) + ": " + err);
    }
    socklen_t len = sizeof addr;
    ::getsockname(listen_fd_, reinterpret_cast<sockaddr*>(&addr), &len);
    port_ = ntohs(addr.sin_port);
}

TcpSimulatorServer::~TcpSimulatorServer()
{
    stop();
    if (listen_fd_ >= 0) ::close(listen_fd_);
}

void TcpSimulatorServer::start()
{
    thread_ = std::thread([this] { serve(); });
}

void TcpSimulatorServer::stop()
{
    stopping_ = true;
    if (thread_.joinable()) thread_.join();
}

void TcpSimulatorServer::serve()
{
    while (!stopping_) {
        pollfd p{listen_fd_, POLLIN, 0};
        if (::poll(&p, 1, 50) <= 0) continue;
        const int fd = ::accept(listen_fd_, nullptr, nullptr);
        if (fd < 0) continue;
        try {
            simulator_->open_session();
        } catch (const Error&) {
            ::close(fd);
            continue;
        }
        serve_client(fd);
        simulator_->close_session();
        ::close(fd);
    }
}

void TcpSimulatorServer::serve_client(int fd)
{
    int one = 1;
    ::setsockopt(fd, IPPROTO_TCP, TCP_NODELAY, &one, sizeof one);
    std::array<std::uint8_t, 512> buf{};
    while (!stopping_) {
        std::array<pollfd, 2> fds{pollfd{fd, POLLIN, 0}, pollfd{listen_fd_, POLLIN, 0}};
        if (::poll(fds.data(), fds.size(), 50) <= 0) continue;

        if (fds[1].revents & POLLIN) {
            // exclusive: refuse a second client while this one is attached
            const int extra = ::accept(listen_fd_, nullptr, nullptr);
            if (extra >= 0) ::close(extra);
        }
        if (fds[0].revents & (POLLIN | POLLHUP | POLLERR)) {
            const auto n = ::recv(fd, buf.data(), buf.size(), 0);
            if (n == 0) return;
            if (n < 0) {
                if (errno == EINTR || errno == EAGAIN) continue;
                return;
            }
            simulator_->deliver(std::span<const std::uint8_t>(buf.data(), static_cast<std::size_t>(n)));
            const auto out = simulator_->with_board([](Board& b) {
                std::vector<std::uint8_t> bytes;
                while (auto v = b.pop_response()) bytes.push_back(*v);
                return bytes;
            });
            send_all(fd, out);
        }
    }
}

} // namespace clockgen::sim
