#include "clockgen/device_sim.hpp"
#include "clockgen/errors.hpp"
#include "clockgen/host_api.hpp"
#include "clockgen/wire_protocol.hpp"

#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>

using namespace clockgen;
using namespace clockgen::host;
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

const Rational kHundredMhz(BigInt(100000000));

// Forwards to the simulator and records every command that goes out.
class CountingChannel : public transport::ByteChannel {
public:
    CountingChannel(std::unique_ptr<ByteChannel> inner, std::vector<wire::BridgeCommand>* log)
        : inner_(std::move(inner)), log_(log) {}
    void write(std::span<const std::uint8_t> bytes) override
    {
        pending_.insert(pending_.end(), bytes.begin(), bytes.end());
        while (pending_.size() >= wire::kCommandSize) {
            log_->push_back(wire::decode_command(std::span(pending_).first(wire::kCommandSize)));
            pending_.erase(pending_.begin(), pending_.begin() + wire::kCommandSize);
        }
        inner_->write(bytes);
    }
    std::vector<std::uint8_t> read(std::size_t n, std::chrono::milliseconds t) override { return inner_->read(n, t); }
    void close() noexcept override { inner_->close(); }

private:
    std::unique_ptr<ByteChannel> inner_;
    std::vector<wire::BridgeCommand>* log_;
    std::vector<std::uint8_t> pending_;
};

struct Rig {
    std::shared_ptr<sim::SimulatorHost> sim = std::make_shared<sim::SimulatorHost>(default_config());
    std::vector<wire::BridgeCommand> sent;
    DeviceHandle handle{Bridge(transport::Session(
                            std::make_unique<CountingChannel>(transport::make_in_process_channel(sim), &sent), 1000ms)),
                        default_config()};

    std::array<std::uint8_t, 256> synth_regs()
    {
        return sim->with_board([](sim::Board& b) { return b.device(0x70).snapshot(); });
    }
    std::vector<synth::ChannelOutput> outputs()
    {
        return sim->with_board([](sim::Board& b) { return b.query_outputs(); });
    }
};

std::string data(const char* name) { return std::string(CLOCKGEN_DATA_DIR) + "/" + name; }

} // namespace

TEST(BridgeInit, InProcessWithShippedFiles)
{
    auto sim = std::make_shared<sim::SimulatorHost>(default_config());
    auto h = bridge_init({transport::InProcessEndpoint{sim}, data("synth.map"), data("board.conf")});
    EXPECT_EQ(h.config().synth_address, 0x70);
    EXPECT_TRUE(h.config().synth_map == default_config().synth_map);
    EXPECT_EQ(error_of([&] { bridge_init({transport::InProcessEndpoint{sim}, {}, {}}); }), Errc::AlreadyOpen);
    h.close();
    EXPECT_NO_THROW(bridge_init({transport::InProcessEndpoint{sim}, {}, {}}));
}

TEST(BridgeInit, MalformedMapReportsLine)
{
    const auto path = std::filesystem::temp_directory_path() / "clockgen_bad.map";
    std::ofstream(path) << "0x00, 0x00, 0xFF\n0x01, 0x00, 0xFF\nnot a register line\n";
    auto sim = std::make_shared<sim::SimulatorHost>(default_config());
    try {
        bridge_init({transport::InProcessEndpoint{sim}, path.string(), {}});
        FAIL();
    } catch (const ParseError& e) {
        EXPECT_EQ(e.line(), 3);
    }
    // nothing was opened
    EXPECT_FALSE(sim->session_open());
    std::filesystem::remove(path);
}

TEST(BridgeInit, MissingFilesAndRefusedTcp)
{
    auto sim = std::make_shared<sim::SimulatorHost>(default_config());
    EXPECT_EQ(error_of([&] { bridge_init({transport::InProcessEndpoint{sim}, std::string("/nonexistent.map"), {}}); }),
              Errc::Io);
    EXPECT_EQ(error_of([&] { bridge_init({transport::InProcessEndpoint{}, {}, {}}); }), Errc::ConnectionRefused);
}

TEST(DeviceHandle, RegisterEcho)
{
    Rig rig;
    rig.handle.bridge_write(0x70, 0x06, 0x5A);
    EXPECT_EQ(rig.handle.bridge_read(0x70, 0x06), 0x5A);
    EXPECT_EQ(rig.handle.bridge_read(0x41, 0x00), 0xFF);
    const auto rev = rig.handle.bridge_read(0x70, 0x00);
    rig.handle.bridge_write(0x70, 0x00, static_cast<std::uint8_t>(~rev));
    EXPECT_EQ(rig.handle.bridge_read(0x70, 0x00), rev);
    EXPECT_EQ(rig.sent.size(), 6u);
}

TEST(DeviceHandle, SetFrequencyProgramsAndEnables)
{
    Rig rig;
    const auto plan = rig.handle.set_frequency(0, kHundredMhz);
    EXPECT_EQ(plan.rel_error, 0);
    const auto outs = rig.outputs();
    EXPECT_TRUE(outs[0].enabled);
    ASSERT_TRUE(outs[0].f_out);
    EXPECT_EQ(*outs[0].f_out, kHundredMhz);
    EXPECT_EQ(outs[0].phase_steps, 0);
    for (int ch = 1; ch < 4; ++ch) EXPECT_FALSE(outs[ch].enabled);
    ASSERT_TRUE(rig.handle.current_plan(0));
    EXPECT_EQ(rig.handle.current_plan(0)->f_achieved, kHundredMhz);

    const auto st = rig.handle.read_status();
    ASSERT_EQ(st.channels.size(), 4u);
    EXPECT_EQ(st.channels[0].f_out, outs[0].f_out);
    EXPECT_EQ(st.channels[0].f_vco, outs[0].f_vco);
}

TEST(DeviceHandle, UnsatisfiableTargetSendsNothing)
{
    Rig rig;
    const auto before = rig.synth_regs();
    EXPECT_EQ(error_of([&] { rig.handle.set_frequency(0, Rational(BigInt(4000000))); }), Errc::Unsatisfiable);
    EXPECT_EQ(error_of([&] { rig.handle.set_frequency(7, kHundredMhz); }), Errc::InvalidArgument);
    EXPECT_TRUE(rig.sent.empty());
    EXPECT_EQ(rig.synth_regs(), before);
}

TEST(DeviceHandle, ChannelsAreIsolated)
{
    Rig rig;
    rig.handle.set_frequency(0, kHundredMhz);
    const auto before = rig.synth_regs();
    rig.handle.set_frequency(2, Rational(BigInt(50000000)));
    const auto after = rig.synth_regs();
    const auto& map = rig.handle.config().synth_map;
    auto allowed = synth::channel_addresses(map, 2);
    for (auto a : synth::feedback_addresses(map)) allowed.push_back(a);
    for (int a = 0; a < 256; ++a) {
        if (before[a] != after[a]) {
            EXPECT_NE(std::find(allowed.begin(), allowed.end(), a), allowed.end()) << "register " << a;
        }
    }
    // both plans share the 2.2 GHz VCO, so channel 0 still runs
    const auto outs = rig.outputs();
    ASSERT_TRUE(outs[0].f_out && outs[2].f_out);
    EXPECT_EQ(*outs[0].f_out, kHundredMhz);
    EXPECT_EQ(*outs[2].f_out, Rational(BigInt(50000000)));
}

TEST(DeviceHandle, SetFrequencyIsIdempotent)
{
    Rig rig;
    rig.handle.set_frequency(1, Rational(BigInt(122880000)));
    const auto first = rig.synth_regs();
    const auto n = rig.sent.size();
    rig.handle.set_frequency(1, Rational(BigInt(122880000)));
    EXPECT_EQ(rig.synth_regs(), first);
    EXPECT_EQ(rig.sent.size(), 2 * n);
}

TEST(DeviceHandle, PhaseNeedsPlan)
{
    Rig rig;
    EXPECT_EQ(error_of([&] { rig.handle.set_phase(3, PhaseRequest::degrees(Rational(45))); }), Errc::NoPlan);
}

TEST(DeviceHandle, PhaseInDegrees)
{
    auto cfg = default_config();
    cfg.constraints.vco_min = Rational(BigInt(2500000000));
    auto sim = std::make_shared<sim::SimulatorHost>(cfg);
    DeviceHandle h(Bridge(transport::Session(transport::make_in_process_channel(sim), 1000ms)), cfg);
    const auto plan = h.set_frequency(0, kHundredMhz);
    ASSERT_EQ(plan.f_vco, Rational(BigInt(2500000000)));
    const auto ph = h.set_phase(0, PhaseRequest::degrees(Rational(45)));
    EXPECT_EQ(ph.steps, 3);
    EXPECT_EQ(ph.offset_achieved, Rational(12, 10) / 1000000000);
    const auto outs = sim->with_board([](sim::Board& b) { return b.query_outputs(); });
    EXPECT_EQ(outs[0].phase_steps, 3);
    EXPECT_EQ(outs[0].phase_offset, ph.offset_achieved);
    EXPECT_EQ(error_of([&] { h.set_phase(0, PhaseRequest::seconds(Rational(60) / 1000000000)); }), Errc::OutOfRange);

    // negative offsets are stored as two's complement
    h.set_phase(0, PhaseRequest::seconds(Rational(-2) / plan.f_vco));
    EXPECT_EQ(sim->with_board([](sim::Board& b) { return b.query_outputs()[0].phase_steps; }), -2);
}

TEST(DeviceHandle, PhaseRecoversPlanFromRegisters)
{
    auto sim = std::make_shared<sim::SimulatorHost>(default_config());
    {
        auto h = bridge_init({transport::InProcessEndpoint{sim}, {}, {}});
        h.set_frequency(1, kHundredMhz);
    }
    auto h = bridge_init({transport::InProcessEndpoint{sim}, {}, {}});
    EXPECT_FALSE(h.current_plan(1));
    const auto ph = h.set_phase(1, PhaseRequest::seconds(Rational(1) / 1000000000));
    ASSERT_TRUE(h.current_plan(1));
    EXPECT_EQ(h.current_plan(1)->f_achieved, kHundredMhz);
    EXPECT_EQ(ph.quantum, Rational(1) / h.current_plan(1)->f_vco);
}

TEST(DeviceHandle, EnableDisable)
{
    Rig rig;
    rig.handle.set_frequency(3, kHundredMhz);
    rig.handle.enable_output(3, false);
    auto outs = rig.outputs();
    EXPECT_FALSE(outs[3].enabled);
    EXPECT_FALSE(outs[3].f_out);
    EXPECT_TRUE(outs[3].valid);
    rig.handle.enable_output(3, true);
    EXPECT_TRUE(rig.outputs()[3].enabled);
}

TEST(DeviceHandle, RailVoltage)
{
    Rig rig;
    const auto s = rig.handle.set_rail_voltage(2, 2.5);
    EXPECT_EQ(s.code, 127);
    ASSERT_EQ(rig.sent.size(), 1u);
    EXPECT_EQ(rig.sent[0], wire::BridgeCommand::write(0x2C, 0x02, 127));
    rig.handle.set_rail_voltage(4, 1.8);
    const auto rails = rig.sim->with_board([](sim::Board& b) { return b.query_rails(); });
    EXPECT_EQ(rails[4].code, 56);
    EXPECT_EQ(error_of([&] { rig.handle.set_rail_voltage(0, 0.5); }), Errc::Infeasible);
    EXPECT_EQ(error_of([&] { rig.handle.set_rail_voltage(9, 2.5); }), Errc::InvalidArgument);
    const auto st = rig.handle.read_status();
    ASSERT_EQ(st.rails.size(), 5u);
    EXPECT_EQ(st.rails[2].code, 127);
    EXPECT_EQ(st.rails[4].code, 56);
    EXPECT_NEAR(st.rails[2].volts, 2.497734375, 1e-12);
}

TEST(DeviceHandle, StatusIsReadOnly)
{
    Rig rig;
    rig.handle.set_frequency(0, kHundredMhz);
    rig.sent.clear();
    rig.handle.read_status();
    EXPECT_FALSE(rig.sent.empty());
    for (const auto& c : rig.sent) EXPECT_EQ(c.action, wire::Action::Read);
}
