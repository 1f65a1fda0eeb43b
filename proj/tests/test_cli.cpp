#include <gtest/gtest.h>

#include <fstream>
#include <sstream>

#include "../tools/cli.hpp"
#include "replicator/io.hpp"
#include "support/oracles.hpp"

using namespace replicator;
using namespace replicator::testing;

namespace {

struct Result {
    int code;
    std::string out;
    std::string err;
};

Result call(std::vector<std::string> args)
{
    std::ostringstream out, err;
    const int code = cli::run(args, out, err);
    return {code, out.str(), err.str()};
}

std::vector<std::string> lines(const std::string& s)
{
    std::vector<std::string> out;
    std::istringstream in(s);
    for (std::string l; std::getline(in, l);)
        out.push_back(l);
    return out;
}

std::size_t count(const std::string& s, const std::string& needle)
{
    std::size_t n = 0;
    for (auto p = s.find(needle); p != std::string::npos; p = s.find(needle, p + 1))
        ++n;
    return n;
}

std::string tmp(const std::string& name) { return std::string(REPLICATOR_TEST_TMP) + "/" + name; }

std::string slurp(const std::string& path)
{
    std::ifstream in(path);
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

} // namespace

TEST(Cli, TablesBsoe)
{
    const auto r = call({"tables", "--base", "bso", "--equivocator", "0.5"});
    ASSERT_EQ(r.code, 0) << r.err;
    const auto ls = lines(r.out);
    ASSERT_EQ(ls.size(), 7u);
    EXPECT_EQ(count(r.out, ",stable,"), 3u);
    EXPECT_EQ(count(r.out, ",unstable,"), 3u);
}

TEST(Cli, TablesBdoepStablePoint)
{
    const auto r = call({"tables", "--base", "bdo", "--equivocator", "0.5", "--prefer", "A", "--delta", "0.3"});
    ASSERT_EQ(r.code, 0) << r.err;
    EXPECT_EQ(lines(r.out).size(), 7u);
    EXPECT_NE(r.out.find(",0.65 0.35 0,"), std::string::npos);
    for (const auto& l : lines(r.out)) {
        if (l.find(",stable,") != std::string::npos) {
            EXPECT_NE(l.find("0.65 0.35 0"), std::string::npos) << l;
        }
    }
}

TEST(Cli, ParameterOutOfRange)
{
    const auto r = call({"tables", "--base", "bso", "--equivocator", "1.5"});
    EXPECT_EQ(r.code, 2);
    EXPECT_EQ(r.err.rfind("error: ParameterOutOfRange", 0), 0u) << r.err;
    EXPECT_EQ(lines(r.err).size(), 1u);
    EXPECT_TRUE(r.out.empty());
}

TEST(Cli, BadArguments)
{
    EXPECT_EQ(call({}).code, 2);
    EXPECT_EQ(call({"frobnicate"}).code, 2);
    EXPECT_EQ(call({"tables", "--base", "xyz"}).code, 2);
    EXPECT_EQ(call({"tables", "--base", "bso", "--format", "svg"}).code, 2);
    EXPECT_EQ(call({"tables", "--base", "bso", "--prefer", "E", "--delta", "0.2"}).code, 2);
    EXPECT_EQ(call({"tables", "--base", "bso", "--matrix", "m.txt"}).code, 2);
    EXPECT_EQ(call({"simulate", "--base", "bso", "--x0", "0.6,0.6"}).code, 2);
    EXPECT_EQ(call({"sweep", "--base", "bso", "--equivocator", "0.5:0.1:0.1"}).code, 2);
}

TEST(Cli, Simulate)
{
    const auto r = call({"simulate", "--base", "bso", "--x0", "0.6,0.4", "--t-end", "100"});
    ASSERT_EQ(r.code, 0) << r.err;
    const auto ls = lines(r.out);
    EXPECT_EQ(ls.front(), "t,x_0,x_1");
    double t, a, b;
    char c1, c2;
    std::istringstream last(ls.back());
    last >> t >> c1 >> a >> c2 >> b;
    EXPECT_EQ(t, 100.0);
    EXPECT_NEAR(a, 1.0, 1e-6);
    EXPECT_NEAR(b, 0.0, 1e-6);

    const auto j = call({"simulate", "--base", "bdo", "--equivocator", "0.5", "--prefer", "A", "--delta", "0.4",
                         "--tol", "1e-10", "--format", "json"});
    ASSERT_EQ(j.code, 0) << j.err;
    const auto doc = nlohmann::json::parse(j.out);
    EXPECT_TRUE(doc["converged"].get<bool>());
    EXPECT_NEAR(doc["states"].back()[0].get<double>(), 0.7, 1e-6);
}

TEST(Cli, PhasePortraitSvg)
{
    const auto r = call({"phase", "--base", "bdo", "--equivocator", "0.3", "--resolution", "0.05", "--format", "svg"});
    ASSERT_EQ(r.code, 0) << r.err;
    EXPECT_EQ(count(r.out, "<circle class=\"fixed-point\""), 6u);
    EXPECT_EQ(count(r.out, "fill=\"black\" stroke=\"black\" stroke-width=\"1.5\""), 1u);
    EXPECT_EQ(count(r.out, "fill=\"white\" stroke=\"black\" stroke-width=\"1.5\""), 5u);
}

TEST(Cli, SweepCountColumn)
{
    const auto r = call({"sweep", "--base", "bso", "--equivocator", "0.5", "--prefer", "A", "--delta", "0.1:0.9:0.1"});
    ASSERT_EQ(r.code, 0) << r.err;
    const auto ls = lines(r.out);
    ASSERT_EQ(ls.size(), 10u);
    const std::vector<std::string> want = {"7", "7", "7", "7", "5", "5", "5", "5", "5"};
    for (std::size_t i = 0; i < 9; ++i) {
        std::istringstream row(ls[i + 1]);
        std::string r_, d_, n_;
        std::getline(row, r_, ',');
        std::getline(row, d_, ',');
        std::getline(row, n_, ',');
        EXPECT_EQ(n_, want[i]) << ls[i + 1];
        EXPECT_EQ(d_, io::fmt((i + 1) / 10.0));
    }
}

TEST(Cli, Basins)
{
    const auto r = call({"basins", "--base", "bso", "--resolution", "0.1"});
    ASSERT_EQ(r.code, 0) << r.err;
    EXPECT_EQ(lines(r.out).front(), "index,x_0,x_1,attractor");
    EXPECT_EQ(lines(r.out).size(), 12u);

    std::ofstream(tmp("rps.txt")) << "R P S\n0 -2 1\n1 0 -2\n-2 1 0\n";
    const auto none = call({"basins", "--matrix", tmp("rps.txt"), "--resolution", "0.1", "--t-end", "50"});
    EXPECT_EQ(none.code, 3);
    EXPECT_EQ(none.err.rfind("error: NoAttractor", 0), 0u);
}

TEST(Cli, Abm)
{
    const auto r = call({"abm", "--base", "bso", "--x0", "0.6,0.4", "--pop", "100", "--steps", "1000", "--seed", "4"});
    ASSERT_EQ(r.code, 0) << r.err;
    const auto ls = lines(r.out);
    EXPECT_EQ(ls.front(), "step,x_0,x_1");
    EXPECT_EQ(ls[1], "0,0.6,0.4");
    EXPECT_EQ(ls.size(), 12u);
    EXPECT_EQ(call({"abm", "--base", "bso", "--pop", "1"}).code, 2);
}

TEST(Cli, RepeatedRunsAreByteIdentical)
{
    const std::vector<std::vector<std::string>> commands = {
        {"tables", "--base", "bdo", "--equivocator", "0.2", "--format", "json"},
        {"simulate", "--base", "bso", "--equivocator", "0.3", "--t-end", "20"},
        {"phase", "--base", "bso", "--equivocator", "0.3", "--resolution", "0.1", "--format", "svg"},
        {"basins", "--base", "bso", "--equivocator", "0.3", "--resolution", "0.1", "--format", "json"},
        {"sweep", "--base", "bdo", "--equivocator", "0.2:0.8:0.2", "--prefer", "A", "--delta", "0.3", "--format",
         "svg"},
        {"abm", "--base", "bdo", "--equivocator", "0.5", "--pop", "500", "--seed", "11", "--format", "json"},
    };
    for (const auto& c : commands) {
        const auto first = call(c);
        const auto second = call(c);
        ASSERT_EQ(first.code, 0) << c[0] << ": " << first.err;
        EXPECT_EQ(first.out, second.out) << c[0];
        EXPECT_FALSE(first.out.empty());
    }
    const auto s1 = call({"abm", "--base", "bso", "--x0", "0.6,0.4", "--pop", "100", "--seed", "1"});
    const auto s2 = call({"abm", "--base", "bso", "--x0", "0.6,0.4", "--pop", "100", "--seed", "2"});
    EXPECT_NE(s1.out, s2.out);
}

TEST(Cli, MatrixRoundTrip)
{
    const auto path = tmp("bdoep.txt");
    const auto out = tmp("bdoep_table.csv");
    const auto a = call({"tables", "--base", "bdo", "--equivocator", "0.3", "--prefer", "A", "--delta", "0.7",
                         "--save-matrix", path, "--out", out});
    ASSERT_EQ(a.code, 0) << a.err;
    EXPECT_TRUE(a.out.empty());
    std::ifstream in(path);
    EXPECT_EQ(read_matrix(in), build(bdoep(0.3, 0.7)));

    const auto b = call({"tables", "--matrix", path});
    ASSERT_EQ(b.code, 0) << b.err;
    EXPECT_EQ(b.out, slurp(out));
}

TEST(Cli, ConfigFile)
{
    const auto path = tmp("model.cfg");
    std::ofstream(path) << "base = bso\nr = 0.5\ndelta = 0.3\n";
    const auto a = call({"tables", "--config", path});
    const auto b = call({"tables", "--base", "bso", "--equivocator", "0.5", "--delta", "0.3"});
    ASSERT_EQ(a.code, 0) << a.err;
    EXPECT_EQ(a.out, b.out);
    EXPECT_EQ(call({"tables", "--config", path, "--base", "bso"}).code, 2);
}

TEST(Cli, ParseRange)
{
    EXPECT_EQ(cli::parse_range("0.1:0.3:0.1"), (std::vector<double>{0.1, 0.2, 0.3}));
    EXPECT_EQ(cli::parse_range("0.25"), (std::vector<double>{0.25}));
    EXPECT_THROW(cli::parse_range("0.1:0.3"), Error);
    EXPECT_THROW(cli::parse_range("0.1:0.3:0"), Error);
    EXPECT_THROW(cli::parse_range("a:b:c"), Error);
}
