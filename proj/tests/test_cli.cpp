#include <gtest/gtest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "jdcompact/commands.hpp"
#include "jdcompact/config.hpp"

using namespace jdcompact;
namespace fs = std::filesystem;

namespace {

fs::path scratch(const std::string& name) {
    const auto dir = fs::temp_directory_path() / ("jdcompact_test_" + name);
    fs::remove_all(dir);
    fs::create_directories(dir);
    return dir;
}

std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

std::vector<std::string> lines(const std::string& s) {
    std::vector<std::string> out;
    std::istringstream in(s);
    for (std::string l; std::getline(in, l);) out.push_back(l);
    return out;
}

std::vector<std::string> split(const std::string& s) {
    std::vector<std::string> out;
    std::stringstream in(s);
    for (std::string cell; std::getline(in, cell, ',');) out.push_back(cell);
    if (!s.empty() && s.back() == ',') out.emplace_back();
    return out;
}

RunConfig quick(const fs::path& dir) {
    RunConfig c;
    c.output_dir = dir.string();
    c.grid.intervals = 128;
    return c;
}

int run_cli(const std::string& args) {
    const std::string cmd = std::string(JDCOMPACT_CLI_PATH) + " " + args + " > /dev/null 2>&1";
    const int status = std::system(cmd.c_str());
    return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

}  // namespace

TEST(Config, DefaultsMatchTheReferenceSetup) {
    const RunConfig c;
    const auto p = c.params();
    EXPECT_TRUE(p.is_merton());
    EXPECT_EQ(p.volatility(), 0.15);
    EXPECT_EQ(p.rate(), 0.05);
    EXPECT_EQ(p.intensity(), 0.10);
    EXPECT_EQ(c.model.merton.mean, -0.9);
    EXPECT_EQ(c.model.merton.stddev, 0.45);
    EXPECT_EQ(c.model.kou.up_rate, 3.0465);
    EXPECT_EQ(c.model.kou.down_rate, 3.0775);
    EXPECT_EQ(c.model.kou.up_probability, 0.3445);
    EXPECT_EQ(c.contract.strike, 100.0);
    EXPECT_EQ(c.contract.maturity, 0.25);
    EXPECT_EQ(c.grid.mesh_ratio, 0.4);
    EXPECT_EQ(c.grid.half_width, 2.0);
    EXPECT_EQ(c.options.epsilon, 1e-12);
    EXPECT_TRUE(c.options.smoothing);
    EXPECT_EQ(c.spots, (std::vector<double>{90.0, 100.0, 110.0}));
}

TEST(Config, EmptyObjectGivesDefaults) {
    EXPECT_EQ(serialize_config(parse_config("{}")), serialize_config(RunConfig{}));
}

TEST(Config, RoundTrip) {
    RunConfig c;
    c.model.type = "kou";
    c.model.kou.up_probability = 0.41;
    c.contract.side = OptionSide::Call;
    c.contract.strike = 97.5;
    c.grid.intervals = 200;
    c.grid.sequence = {50, 100, 200};
    c.grid.mesh_ratio = 0.37;
    c.options.smoothing = false;
    c.options.scheme = Scheme::SecondOrder;
    c.spots = {};
    c.stability.dtau = 0.125;
    c.efficiency.targets = {1e-2, 1e-4};
    const std::string text = serialize_config(c);
    const RunConfig back = parse_config(text);
    EXPECT_EQ(serialize_config(back), text);
    EXPECT_EQ(back.contract.strike, 97.5);
    EXPECT_EQ(*back.stability.dtau, 0.125);
    EXPECT_EQ(back.options.scheme, Scheme::SecondOrder);
}

TEST(Config, ErrorsNameTheLine) {
    const std::string bad_type = "{\n  \"model\": {\n    \"volatility\": \"high\"\n  }\n}\n";
    try {
        parse_config(bad_type);
        FAIL();
    } catch (const ConfigError& e) {
        EXPECT_NE(std::string(e.what()).find("line 3"), std::string::npos) << e.what();
        EXPECT_NE(std::string(e.what()).find("model.volatility"), std::string::npos) << e.what();
    }
    const std::string syntax = "{\n  \"grid\": {\n    \"intervals\": 64,\n  }\n}\n";
    try {
        parse_config(syntax);
        FAIL();
    } catch (const ConfigError& e) {
        EXPECT_NE(std::string(e.what()).find("line 4"), std::string::npos) << e.what();
    }
    const std::string unknown = "{\n  \"options\": {\n    \"smoothng\": true\n  }\n}\n";
    try {
        parse_config(unknown);
        FAIL();
    } catch (const ConfigError& e) {
        EXPECT_NE(std::string(e.what()).find("line 3"), std::string::npos) << e.what();
        EXPECT_NE(std::string(e.what()).find("unknown key"), std::string::npos) << e.what();
    }
    EXPECT_THROW(parse_config("{\"grid\": {\"intervals\": 63}}"), ConfigError);
    EXPECT_THROW(parse_config("{\"contract\": {\"side\": \"straddle\"}}"), ConfigError);
    EXPECT_THROW(parse_config("{\"options\": {\"scheme\": \"fd4\"}}"), ConfigError);
    EXPECT_THROW(parse_config("{\"model\": {\"type\": \"kou\", \"kou\": {\"up_rate\": 0.5}}}"), ConfigError);
}

TEST(Price, WritesReferenceColumns) {
    const auto dir = scratch("price");
    auto c = quick(dir);
    c.model.type = "kou";
    c.contract.side = OptionSide::Call;
    c.grid.intervals = 256;
    const auto out = cmd_price(c);
    ASSERT_EQ(out.rows.size(), 3u);
    EXPECT_EQ(*out.rows[2].reference, 11.794583);
    EXPECT_LE(*out.rows[2].abs_diff, 2e-3);
    const auto text = slurp(dir / "prices.csv");
    EXPECT_EQ(text.find('\r'), std::string::npos);
    const auto ls = lines(text);
    ASSERT_EQ(ls.size(), 4u);
    EXPECT_EQ(ls[0], "spot[currency],price[currency],reference[currency],abs_diff[currency]");
    const auto cells = split(ls[3]);
    ASSERT_EQ(cells.size(), 4u);
    EXPECT_EQ(cells[0], "110");
    EXPECT_EQ(cells[2], "11.794583");
    EXPECT_EQ(cells[1], format_number(out.rows[2].price));
}

TEST(Price, MertonUsesTheSeries) {
    const auto dir = scratch("price_merton");
    auto c = quick(dir);
    c.grid.intervals = 256;
    const auto out = cmd_price(c);
    for (const auto& r : out.rows) EXPECT_LE(*r.abs_diff, 2e-3);
}

TEST(Price, NoReferenceOffTable) {
    const auto dir = scratch("price_offtable");
    auto c = quick(dir);
    c.model.type = "kou";
    c.spots = {95.0};
    const auto out = cmd_price(c);
    EXPECT_FALSE(out.rows[0].reference.has_value());
    EXPECT_EQ(lines(slurp(dir / "prices.csv"))[1].back(), ',');
}

TEST(Price, EmptySpotListGivesHeaderOnly) {
    const auto dir = scratch("price_empty");
    auto c = quick(dir);
    c.spots = {};
    cmd_price(c);
    EXPECT_EQ(lines(slurp(dir / "prices.csv")).size(), 1u);
}

TEST(Price, OutputIsDeterministic) {
    const auto a = scratch("det_a");
    const auto b = scratch("det_b");
    cmd_price(quick(a));
    cmd_price(quick(b));
    EXPECT_EQ(slurp(a / "prices.csv"), slurp(b / "prices.csv"));
}

TEST(Converge, TwoGridSequence) {
    const auto dir = scratch("converge");
    auto c = quick(dir);
    c.grid.sequence = {32, 64};
    cmd_converge(c);
    const auto ls = lines(slurp(dir / "convergence.csv"));
    ASSERT_EQ(ls.size(), 2u);
    EXPECT_EQ(ls[0], "N[intervals],dx[log-price],dtau[years],l2_diff[currency],order[1]");
    const auto cells = split(ls[1]);
    ASSERT_EQ(cells.size(), 5u);
    EXPECT_EQ(cells[0], "32");
    EXPECT_TRUE(cells[4].empty());
}

TEST(Converge, KouCallIsFourthOrder) {
    const auto dir = scratch("converge_kou");
    auto c = quick(dir);
    c.model.type = "kou";
    c.contract.side = OptionSide::Call;
    c.grid.sequence = {64, 128, 256};
    const auto rep = cmd_converge(c);
    EXPECT_GE(*rep.final_order(), 3.5);
    EXPECT_LE(*rep.final_order(), 4.5);
}

TEST(Stability, StepLimitHasNoExcess) {
    const auto dir = scratch("stability");
    const auto sweep = cmd_stability(quick(dir));
    EXPECT_LE(sweep.max_excess, 1e-12);
    const auto ls = lines(slurp(dir / "stability.csv"));
    ASSERT_EQ(ls.size(), 1026u);
    EXPECT_EQ(ls[0], "theta[rad],abs_p1[1],abs_p2[1],bound[1]");
    EXPECT_EQ(ls.back().rfind("max_excess,", 0), 0u);
}

TEST(Stability, TinyStep) {
    const auto dir = scratch("stability_tiny");
    auto c = quick(dir);
    c.stability.dtau = 1e-9;
    const auto sweep = cmd_stability(c);
    for (const auto& s : sweep.samples) EXPECT_LE(s.max_modulus(), 1.0 + 1e-7);
}

TEST(Stability, NoRateNoJumps) {
    const auto dir = scratch("stability_zero");
    auto c = quick(dir);
    c.model.rate = 0.0;
    c.model.intensity = 0.0;
    EXPECT_THROW(cmd_stability(c), ConfigError);
    c.stability.dtau = 0.01;
    const auto sweep = cmd_stability(c);
    for (const auto& s : sweep.samples) {
        EXPECT_EQ(s.bound, 1.0);
        EXPECT_LE(s.max_modulus(), 1.0 + 1e-10);
    }
}

TEST(Wavenumber, QuarterPhaseRow) {
    const auto dir = scratch("wavenumber");
    auto c = quick(dir);
    c.wavenumber.points = 4;
    cmd_wavenumber(c);
    const auto ls = lines(slurp(dir / "wavenumber.csv"));
    ASSERT_EQ(ls.size(), 5u);
    const auto cells = split(ls[2]);
    EXPECT_EQ(cells[2], "1");
    EXPECT_EQ(cells[3], "1.5");
    c.wavenumber.points = 0;
    cmd_wavenumber(c);
    EXPECT_EQ(lines(slurp(dir / "wavenumber.csv")).size(), 1u);
}

TEST(Efficiency, TableIsMonotoneWithinScheme) {
    const auto dir = scratch("efficiency");
    auto c = quick(dir);
    c.efficiency.intervals = {32, 64, 128};
    c.efficiency.repeats = 1;
    const auto rep = cmd_efficiency(c);
    ASSERT_EQ(rep.rows.size(), 6u);
    for (std::size_t i = 1; i < rep.rows.size(); ++i)
        if (rep.rows[i].scheme == rep.rows[i - 1].scheme) {
            EXPECT_LT(rep.rows[i].error, rep.rows[i - 1].error);
        }
    EXPECT_EQ(lines(slurp(dir / "efficiency.csv")).size(), 7u);
}

TEST(Binary, ExitCodes) {
    const auto dir = scratch("binary");
    EXPECT_EQ(run_cli("wavenumber --out " + dir.string()), 0);
    EXPECT_TRUE(fs::exists(dir / "wavenumber.csv"));
    EXPECT_EQ(run_cli("price --N 64 --model kou --side call --smoothing off --scheme fd2 --out " + dir.string()), 0);
    EXPECT_EQ(run_cli("price --model heston"), 2);
    EXPECT_EQ(run_cli("price --N 63"), 2);
    EXPECT_EQ(run_cli("price --smoothing maybe"), 2);
    EXPECT_EQ(run_cli("frobnicate"), 2);
    const auto cfg = dir / "bad.json";
    std::ofstream(cfg) << "{\n \"options\": {\"max_iter\": 1}\n}\n";
    EXPECT_EQ(run_cli("price --N 32 --config " + cfg.string() + " --out " + dir.string()), 3);
}

TEST(Binary, ConfigFileWithFlagOverride) {
    const auto dir = scratch("binary_cfg");
    const auto cfg = dir / "run.json";
    std::ofstream(cfg) << "{\"model\": {\"type\": \"kou\"}, \"grid\": {\"intervals\": 32}, \"spots\": [100]}\n";
    ASSERT_EQ(run_cli("price --config " + cfg.string() + " --N 64 --out " + dir.string()), 0);
    const auto ls = lines(slurp(dir / "prices.csv"));
    ASSERT_EQ(ls.size(), 2u);
    EXPECT_EQ(split(ls[1])[2], "2.731259");
}
