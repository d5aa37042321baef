#include "clockgen/config.hpp"
#include "clockgen/errors.hpp"

#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>

using namespace clockgen;

namespace {

int parse_error_line(const std::string& text)
{
    try {
        parse_config(text, CLOCKGEN_DATA_DIR);
    } catch (const ParseError& e) {
        return e.line();
    }
    return -1;
}

} // namespace

TEST(Config, ShippedFileMatchesDefaults)
{
    const auto file = load_config(std::string(CLOCKGEN_DATA_DIR) + "/board.conf");
    const auto builtin = default_config();
    EXPECT_EQ(file.synth_address, 0x70);
    EXPECT_EQ(file.f_in, Rational(BigInt(25000000)));
    EXPECT_EQ(file.read_timeout.count(), 1000);
    EXPECT_EQ(file.tcp_port, 53380);
    EXPECT_EQ(file.constraints.feedback.min, 8);
    EXPECT_EQ(file.constraints.output.max, 2048);
    EXPECT_EQ(file.constraints.denominator_max, (1 << 30) - 1);
    EXPECT_TRUE(file.pot_map == builtin.pot_map);
    EXPECT_TRUE(file.synth_map == builtin.synth_map);
    ASSERT_EQ(file.rails.size(), 5u);
    ASSERT_EQ(builtin.rails.size(), 5u);
    const int codes[] = {209, 209, 127, 56, 209};
    for (int i = 0; i < 5; ++i) {
        EXPECT_EQ(file.rails[i].rail_id, i);
        EXPECT_EQ(file.rails[i].default_code, codes[i]);
        EXPECT_EQ(builtin.rails[i].default_code, codes[i]);
        EXPECT_EQ(builtin.rails[i].pot_address, file.rails[i].pot_address);
    }
    EXPECT_EQ(file.rails[4].pot_address, 0x2D);
    EXPECT_EQ(pot_addresses(file), (std::vector<std::uint8_t>{0x2C, 0x2D}));
}

TEST(Config, Overrides)
{
    const auto cfg = parse_config("f_in_hz = 27M\nvco_min_hz = 2.3G\nrail.0.pot_channel = 0\n"
                                  "rail.0.r_ab = 50000\nphase_steps_max = 64\n");
    EXPECT_EQ(cfg.f_in, Rational(BigInt(27000000)));
    EXPECT_EQ(cfg.constraints.vco_min, Rational(BigInt(2300000000)));
    EXPECT_EQ(cfg.constraints.phase_steps_max, 64);
    ASSERT_EQ(cfg.rails.size(), 1u);
    EXPECT_DOUBLE_EQ(cfg.rails[0].r_ab, 50000);
}

TEST(Config, ErrorsCarryLineNumbers)
{
    EXPECT_EQ(parse_error_line("synth_address = 0x70\nbogus = 1\n"), 2);
    EXPECT_EQ(parse_error_line("# c\n\nf_in_hz = fast\n"), 3);
    EXPECT_EQ(parse_error_line("tcp_port = 1\ntcp_port = 2\n"), 2);
    EXPECT_EQ(parse_error_line("synth_address = 0x80\n"), 1);
    EXPECT_EQ(parse_error_line("rail.7.pot_channel = 0\n"), 1);
    EXPECT_EQ(parse_error_line("phase_steps_max = 200\n"), 1);
    EXPECT_EQ(parse_error_line("no equals sign\n"), 1);
}

TEST(Config, RejectsSharedPotChannel)
{
    try {
        parse_config("rail.0.pot_channel = 1\nrail.1.pot_channel = 1\n");
        FAIL();
    } catch (const Error& e) {
        EXPECT_EQ(e.code(), Errc::Parse);
    }
}

TEST(Config, MissingPotMapFile)
{
    try {
        parse_config("pot_map = does-not-exist.map\n", CLOCKGEN_DATA_DIR);
        FAIL();
    } catch (const Error& e) {
        EXPECT_EQ(e.code(), Errc::Io);
    }
}

TEST(Config, RelativePotMapResolvesAgainstConfigDir)
{
    const auto dir = std::filesystem::temp_directory_path() / "clockgen_config_test";
    std::filesystem::create_directories(dir);
    {
        std::ofstream(dir / "pot.map") << "0x00, 0x10, 0xFF\nrdac0 = 0x00[7:0]\n";
        std::ofstream(dir / "b.conf") << "pot_map = pot.map\nrail.0.pot_channel = 0\n";
    }
    const auto cfg = load_config((dir / "b.conf").string());
    EXPECT_EQ(cfg.pot_map.entries().size(), 1u);
    std::filesystem::remove_all(dir);
}
