#pragma once

#include "clockgen/config.hpp"
#include "clockgen/freq_planner.hpp"
#include "clockgen/power_planner.hpp"
#include "clockgen/register_model.hpp"
#include "clockgen/synth_layout.hpp"
#include "clockgen/transport.hpp"

#include <array>
#include <optional>
#include <string>
#include <vector>

namespace clockgen::host {

// Bridge layer: one wire command per register access, nothing else.
class Bridge final : public RegisterBus {
public:
    explicit Bridge(transport::Session session) : session_(std::move(session)) {}

    std::uint8_t read(std::uint8_t device, std::uint8_t reg) override;
    void write(std::uint8_t device, std::uint8_t reg, std::uint8_t value) override;

    transport::Session& session() { return session_; }
    void close() noexcept { session_.close(); }

private:
    transport::Session session_;
};

struct InitOptions {
    transport::Endpoint endpoint;
    std::optional<std::string> map_path;     // synthesizer register map
    std::optional<std::string> config_path;  // board config
};

struct RailStatus {
    int rail_id = 0;
    int code = 0;
    double volts = 0.0;
};

struct BoardStatus {
    std::vector<synth::ChannelOutput> channels;
    std::vector<RailStatus> rails;
};

// Device layer. Owns the bridge; talks to the board only through
// bridge_read / bridge_write.
class DeviceHandle {
public:
    DeviceHandle(Bridge bridge, BoardConfig config);

    std::uint8_t bridge_read(std::uint8_t device, std::uint8_t reg);
    void bridge_write(std::uint8_t device, std::uint8_t reg, std::uint8_t value);

    // Plans, programs the channel (phase reset to 0 steps) and enables it.
    FrequencyPlan set_frequency(int channel, const Rational& f_target);

    // Requires a plan for the channel: the one set through this handle, or
    // one recovered from the divider registers. Throws NoPlan otherwise.
    PhasePlan set_phase(int channel, const PhaseRequest& request);

    void enable_output(int channel, bool on);

    SupplySetting set_rail_voltage(int rail_id, double v_target);

    // Register read-back of every named synthesizer field and rail wiper,
    // evaluated with the same model the simulator uses.
    BoardStatus read_status();

    const BoardConfig& config() const { return config_; }
    const std::optional<FrequencyPlan>& current_plan(int channel) const;
    Bridge& bridge() { return bridge_; }
    void close() noexcept { bridge_.close(); }

private:
    void check_channel(int channel) const;
    const RailModel& rail(int rail_id) const;
    std::optional<FrequencyPlan> recover_plan(int channel);

    Bridge bridge_;
    BoardConfig config_;
    std::array<std::optional<FrequencyPlan>, kChannelCount> plans_;
};

// Loads map and config (ParseError on bad input) and opens the session.
DeviceHandle bridge_init(const InitOptions& options);

} // namespace clockgen::host
