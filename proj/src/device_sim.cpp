#include "clockgen/device_sim.hpp"

#include "clockgen/errors.hpp"
#include "clockgen/power_planner.hpp"

#include <stdexcept>

namespace clockgen::sim {

namespace {

std::uint8_t wiper_register(const RegisterMap& pot_map, int channel)
{
    const auto& f = pot_map.field(wiper_field(channel));
    if (f.slices.size() != 1 || f.width() != 8) {
        throw Error(Errc::InvalidArgument, "pot field '" + f.name + "' must be one full register");
    }
    return f.slices.front().address;
}

} // namespace

Board::Board(BoardConfig config, std::vector<ExtraDevice> extra)
    : config_(std::move(config)), extra_(std::move(extra))
{
    synth::validate_layout(config_.synth_map);
    devices_.emplace(config_.synth_address, config_.synth_map.make_register_file());
    for (auto addr : pot_addresses(config_)) {
        if (!devices_.emplace(addr, config_.pot_map.make_register_file()).second) {
            throw Error(Errc::InvalidArgument, "pot address collides with another device");
        }
    }
    for (const auto& r : config_.rails) (void)wiper_register(config_.pot_map, r.pot_channel);
    for (const auto& d : extra_) {
        if (d.address > wire::kMaxI2cAddress || !devices_.emplace(d.address, d.file).second) {
            throw Error(Errc::InvalidArgument, "extra device address invalid or taken");
        }
    }
}

const RegisterFile& Board::device(std::uint8_t address) const
{
    auto it = devices_.find(address);
    if (it == devices_.end()) throw Error(Errc::InvalidArgument, "no device at address " + std::to_string(address));
    return it->second;
}

RegisterFile& Board::device(std::uint8_t address)
{
    return const_cast<RegisterFile&>(static_cast<const Board&>(*this).device(address));
}

void Board::begin_boot()
{
    // Startup: clocks, interrupt vectors, USB and SMBus setup. None of it is
    // observable beyond the register and link reset.
    for (auto& [addr, file] : devices_) file.reset();
    reset_link();
    fw_.step_counter = 0;
    log_.clear();
    power_init_writes_.clear();
    for (const auto& r : config_.rails) {
        power_init_writes_.push_back(wire::BridgeCommand::write(
            r.pot_address, wiper_register(config_.pot_map, r.pot_channel), r.default_code));
    }
    fw_.phase = FirmwarePhase::PowerInit;
}

void Board::boot()
{
    begin_boot();
    while (fw_.phase != FirmwarePhase::MainLoop) step();
}

void Board::reset_link()
{
    fw_.flag_write = false;
    fw_.flag_read = false;
    fw_.pending.reset();
    fw_.rx_buffer.clear();
    fw_.usb_fifo.clear();
    fw_.tx_queue.clear();
    if (txn_.from_host) txn_ = Transaction{};
}

void Board::ingest_byte(std::uint8_t byte)
{
    if (fw_.phase == FirmwarePhase::Startup) {
        throw std::logic_error("ingest_byte before boot");
    }
    fw_.usb_fifo.push_back(byte);
    service_usb();
}

void Board::service_usb()
{
    while (!fw_.flag_write && !fw_.flag_read && !fw_.usb_fifo.empty()) {
        fw_.rx_buffer.push_back(fw_.usb_fifo.front());
        fw_.usb_fifo.pop_front();
        if (fw_.rx_buffer.size() < wire::kCommandSize) continue;

        try {
            const auto cmd = wire::decode_command(fw_.rx_buffer);
            fw_.pending = cmd;
            if (cmd.action == wire::Action::Write) {
                fw_.flag_write = true;
            } else {
                fw_.flag_read = true;
            }
            flag_tick_ = fw_.step_counter;
        } catch (const Error&) {
            // no error channel on the wire: drop the frame
        }
        fw_.rx_buffer.clear();
    }
}

void Board::step()
{
    if (fw_.phase == FirmwarePhase::Startup) throw std::logic_error("step before boot");
    ++fw_.step_counter;

    if (txn_.stage != SmbusStage::Idle) {
        advance_transaction();
    } else if (fw_.phase == FirmwarePhase::PowerInit) {
        if (!power_init_writes_.empty()) start_transaction(power_init_writes_.front(), false);
    } else if ((fw_.flag_write || fw_.flag_read) && fw_.pending) {
        start_transaction(*fw_.pending, true);
    }

    if (fw_.phase == FirmwarePhase::PowerInit && power_init_writes_.empty() &&
        txn_.stage == SmbusStage::Idle) {
        fw_.phase = FirmwarePhase::MainLoop;
        mainloop_tick_ = fw_.step_counter;
    }
    service_usb();
}

void Board::start_transaction(const wire::BridgeCommand& cmd, bool from_host)
{
    txn_ = Transaction{};
    txn_.command = cmd;
    txn_.from_host = from_host;
    txn_.stage = SmbusStage::Start;
    txn_.acked = devices_.count(cmd.i2c_address) != 0;
}

void Board::advance_transaction()
{
    const bool is_write = txn_.command.action == wire::Action::Write;
    switch (txn_.stage) {
    case SmbusStage::Start:
        if (!txn_.acked) {
            txn_.stage = SmbusStage::Stop;
            finish_transaction();
        } else {
            txn_.stage = SmbusStage::RegisterByte;
        }
        break;
    case SmbusStage::RegisterByte:
        if (is_write) {
            devices_.at(txn_.command.i2c_address).write(txn_.command.register_address, txn_.command.payload);
            txn_.stage = SmbusStage::DataWrite;
        } else {
            txn_.stage = SmbusStage::RepeatedStart;
        }
        break;
    case SmbusStage::RepeatedStart:
        txn_.data = devices_.at(txn_.command.i2c_address).read(txn_.command.register_address);
        txn_.stage = SmbusStage::DataRead;
        break;
    case SmbusStage::DataWrite:
    case SmbusStage::DataRead:
        txn_.stage = SmbusStage::Stop;
        finish_transaction();
        break;
    case SmbusStage::Stop:
    case SmbusStage::Idle:
        txn_ = Transaction{};
        break;
    }
}

void Board::finish_transaction()
{
    if (txn_.from_host) {
        if (txn_.command.action == wire::Action::Read) {
            fw_.tx_queue.push_back(txn_.acked ? txn_.data : std::uint8_t{0xFF});
        }
        log_.push_back({txn_.command, flag_tick_, std::max(flag_tick_, mainloop_tick_), fw_.step_counter});
        fw_.flag_write = false;
        fw_.flag_read = false;
        fw_.pending.reset();
    } else if (!power_init_writes_.empty()) {
        power_init_writes_.pop_front();
    }
    txn_ = Transaction{};
}

bool Board::idle() const
{
    return fw_.phase == FirmwarePhase::MainLoop && !fw_.flag_write && !fw_.flag_read &&
           txn_.stage == SmbusStage::Idle && fw_.usb_fifo.empty();
}

std::size_t Board::run_until_idle(std::size_t max_steps)
{
    if (fw_.phase == FirmwarePhase::Startup) return 0;
    std::size_t n = 0;
    while (!idle() && n < max_steps) {
        step();
        ++n;
    }
    return n;
}

std::optional<std::uint8_t> Board::pop_response()
{
    if (fw_.tx_queue.empty()) return std::nullopt;
    const auto v = fw_.tx_queue.front();
    fw_.tx_queue.pop_front();
    return v;
}

std::vector<synth::ChannelOutput> Board::query_outputs() const
{
    return synth::evaluate_outputs(device(config_.synth_address).snapshot(), config_.synth_map, config_.f_in,
                                   config_.constraints);
}

std::vector<RailReading> Board::query_rails() const
{
    std::vector<RailReading> out;
    for (const auto& r : config_.rails) {
        const int code = device(r.pot_address).read(wiper_register(config_.pot_map, r.pot_channel));
        out.push_back({r.rail_id, code, r.voltage(code)});
    }
    return out;
}

SimulatorHost::SimulatorHost(BoardConfig config, std::vector<ExtraDevice> extra)
    : board_(std::move(config), std::move(extra))
{
    board_.boot();
}

void SimulatorHost::open_session()
{
    std::lock_guard lock(mutex_);
    if (open_) throw Error(Errc::AlreadyOpen, "simulator already has an open session");
    open_ = true;
}

void SimulatorHost::close_session()
{
    std::lock_guard lock(mutex_);
    open_ = false;
    board_.reset_link();
    ready_.notify_all();
}

bool SimulatorHost::session_open() const
{
    std::lock_guard lock(mutex_);
    return open_;
}

void SimulatorHost::deliver(std::span<const std::uint8_t> bytes)
{
    {
        std::lock_guard lock(mutex_);
        if (!open_) throw Error(Errc::SessionClosed, "no open session");
        for (auto b : bytes) board_.ingest_byte(b);
        board_.run_until_idle();
    }
    ready_.notify_all();
}

std::vector<std::uint8_t> SimulatorHost::take(std::size_t n, std::chrono::milliseconds timeout)
{
    std::unique_lock lock(mutex_);
    const bool ready = ready_.wait_for(lock, timeout, [&] { return !open_ || board_.responses_pending() >= n; });
    if (!open_) throw Error(Errc::SessionClosed, "no open session");
    if (!ready) throw Error(Errc::Timeout, "no response within " + std::to_string(timeout.count()) + " ms");
    std::vector<std::uint8_t> out;
    out.reserve(n);
    for (std::size_t i = 0; i < n; ++i) out.push_back(*board_.pop_response());
    return out;
}

} // namespace clockgen::sim
