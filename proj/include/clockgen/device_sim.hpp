#pragma once

#include "clockgen/config.hpp"
#include "clockgen/register_model.hpp"
#include "clockgen/synth_layout.hpp"
#include "clockgen/wire_protocol.hpp"

#include <chrono>
#include <condition_variable>
#include <cstdint>
#include <deque>
#include <map>
#include <mutex>
#include <optional>
#include <span>
#include <vector>

namespace clockgen::sim {

enum class FirmwarePhase { Startup, PowerInit, MainLoop };

// Stages of one SMBus transaction, one per main-loop step. A write finishes
// at DataWrite (4 steps including Stop); a read needs the repeated start
// (5 steps). A NACKed address skips straight to Stop.
enum class SmbusStage { Idle, Start, RegisterByte, RepeatedStart, DataRead, DataWrite, Stop };

struct FirmwareState {
    FirmwarePhase phase = FirmwarePhase::Startup;
    bool flag_write = false;
    bool flag_read = false;
    std::optional<wire::BridgeCommand> pending;
    std::vector<std::uint8_t> rx_buffer;     // < 4 bytes between commands
    std::deque<std::uint8_t> usb_fifo;       // endpoint bytes not yet taken by the ISR
    std::deque<std::uint8_t> tx_queue;       // responses awaiting the host
    std::uint64_t step_counter = 0;
};

// One completed dispatch, for latency and loss checks.
struct DispatchRecord {
    wire::BridgeCommand command;
    std::uint64_t flag_tick = 0;      // step_counter when the flag was set
    std::uint64_t eligible_tick = 0;  // max(flag_tick, MainLoop entry)
    std::uint64_t done_tick = 0;      // step_counter after the completing step
};

struct ExtraDevice {
    std::uint8_t address = 0;
    RegisterFile file;
};

struct RailReading {
    int rail_id = 0;
    int code = 0;
    double volts = 0.0;
};

// Behavioral model of the evaluation board: the bridge MCU's firmware,
// the synthesizer and the supply pots. Deterministic and single-threaded;
// callers decide how ingest and step interleave.
class Board {
public:
    explicit Board(BoardConfig config, std::vector<ExtraDevice> extra = {});

    // Reset registers and firmware, leave Startup and queue the power-up
    // writes. Returns with the firmware in PowerInit.
    void begin_boot();

    // begin_boot, then step until MainLoop.
    void boot();

    // USB receive interrupt analogue: the byte enters the endpoint FIFO and
    // the ISR takes bytes while no flag is pending. Requires phase past Startup.
    void ingest_byte(std::uint8_t byte);

    // One main-loop iteration (or one power-up iteration in PowerInit).
    void step();

    // No flag set, no transaction running, no buffered input, boot done.
    bool idle() const;

    // Steps until idle; returns the number of steps taken.
    std::size_t run_until_idle(std::size_t max_steps = 1u << 20);

    // Pops one response byte if present.
    std::optional<std::uint8_t> pop_response();
    std::size_t responses_pending() const { return fw_.tx_queue.size(); }

    // Drops the byte stream state (FIFO, partial command, flags, responses);
    // register contents persist.
    void reset_link();

    const FirmwareState& firmware() const { return fw_; }
    const std::vector<DispatchRecord>& dispatch_log() const { return log_; }
    void clear_dispatch_log() { log_.clear(); }
    const BoardConfig& config() const { return config_; }

    bool has_device(std::uint8_t address) const { return devices_.count(address) != 0; }
    const RegisterFile& device(std::uint8_t address) const;
    RegisterFile& device(std::uint8_t address);

    std::vector<synth::ChannelOutput> query_outputs() const;
    std::vector<RailReading> query_rails() const;

private:
    void service_usb();
    void start_transaction(const wire::BridgeCommand& cmd, bool from_host);
    void advance_transaction();
    void finish_transaction();

    BoardConfig config_;
    std::vector<ExtraDevice> extra_;
    std::map<std::uint8_t, RegisterFile> devices_;
    FirmwareState fw_;
    std::deque<wire::BridgeCommand> power_init_writes_;
    std::uint64_t mainloop_tick_ = 0;
    std::uint64_t flag_tick_ = 0;

    struct Transaction {
        wire::BridgeCommand command;
        SmbusStage stage = SmbusStage::Idle;
        bool from_host = false;
        bool acked = false;
        std::uint8_t data = 0xFF;
    };
    Transaction txn_;

    std::vector<DispatchRecord> log_;
};

// Thread-safe owner of a booted Board, shared by the in-process channel and
// the TCP server. At most one session may be open at a time.
class SimulatorHost {
public:
    explicit SimulatorHost(BoardConfig config, std::vector<ExtraDevice> extra = {});

    // Throws AlreadyOpen if a session is active.
    void open_session();
    // Idempotent; clears the link queues.
    void close_session();
    bool session_open() const;

    // Feeds bytes through the firmware and runs it to idle. Throws
    // SessionClosed when no session is open.
    void deliver(std::span<const std::uint8_t> bytes);

    // Exactly n response bytes, or Timeout with nothing consumed.
    std::vector<std::uint8_t> take(std::size_t n, std::chrono::milliseconds timeout);

    template <typename F>
    auto with_board(F&& f)
    {
        std::lock_guard lock(mutex_);
        return f(board_);
    }

private:
    mutable std::mutex mutex_;
    std::condition_variable ready_;
    Board board_;
    bool open_ = false;
};

} // namespace clockgen::sim
