#include <gtest/gtest.h>

#include <set>

#include "glzero/app.hpp"

using namespace glzero;
using namespace glzero::app;

TEST(ParseList, NumbersAndErrors) {
    EXPECT_EQ(parse_list("1, 2.5 ,-3e-1", "x"), (std::vector<double>{1.0, 2.5, -0.3}));
    EXPECT_THROW(parse_list("", "x"), ValidationError);
    EXPECT_THROW(parse_list(" , ", "x"), ValidationError);
    EXPECT_THROW(parse_list("1,abc", "x"), ValidationError);
    EXPECT_THROW(parse_list("1,inf", "x"), ValidationError);
    EXPECT_EQ(parse_range("0.1,0.9", "r"), std::make_pair(0.1, 0.9));
    EXPECT_THROW(parse_range("0.9,0.1", "r"), ValidationError);
    EXPECT_THROW(parse_range("1,2,3", "r"), ValidationError);
    EXPECT_EQ(linspace(0.0, 1.0, 5, "l"), (std::vector<double>{0.0, 0.25, 0.5, 0.75, 1.0}));
    EXPECT_THROW(linspace(0.0, 1.0, 0, "l"), ValidationError);
}

TEST(GridPoints, SortedUniqueProduct) {
    const auto pts = grid_points({{2.0, 1.0, 2.0}, {0.5, 0.25}});
    const std::vector<std::vector<double>> want{{1.0, 0.25}, {1.0, 0.5}, {2.0, 0.25}, {2.0, 0.5}};
    EXPECT_EQ(pts, want);
    EXPECT_THROW(grid_points({{1.0}, {}}), ValidationError);
}

TEST(RunSweep, KeyOrderSeedsAndFailures) {
    SweepSpec spec{"test", {"a", "b"}, {{3.0, 1.0, 2.0}, {0.0, 1.0}}, {"sum", "seed"}};
    auto job = [](const std::vector<double>& k, std::uint64_t seed) -> std::vector<std::string> {
        if (k[0] == 2.0 && k[1] == 1.0) throw SolverError("no convergence, at all");
        return {num(k[0] + k[1]), std::to_string(seed)};
    };
    std::size_t bad = 0;
    const io::Csv t = run_sweep(spec, 11, job, &bad);
    EXPECT_EQ(bad, 1u);
    EXPECT_EQ(t.header, (std::vector<std::string>{"a", "b", "sum", "seed", "status"}));
    ASSERT_EQ(t.rows.size(), 6u);
    EXPECT_EQ(t.numbers("a"), (std::vector<double>{1, 1, 2, 2, 3, 3}));
    EXPECT_EQ(t.numbers("b"), (std::vector<double>{0, 1, 0, 1, 0, 1}));
    const auto& failed = t.rows[3];
    EXPECT_EQ(failed[2], "");
    EXPECT_EQ(failed[4].rfind("error: ", 0), 0u);
    EXPECT_EQ(failed[4].find(','), std::string::npos);

    std::set<std::string> seeds;
    for (const auto& r : t.rows)
        if (r[4] == "ok") seeds.insert(r[3]);
    EXPECT_EQ(seeds.size(), 5u);
    EXPECT_EQ(io::to_string(run_sweep(spec, 11, job)), io::to_string(t));
    EXPECT_NE(io::to_string(run_sweep(spec, 12, job)), io::to_string(t));
}

TEST(Plot, SchemaChecked) {
    io::Csv t;
    t.header = {"b", "g"};
    t.add({"0.5", "-0.1"});
    EXPECT_THROW(plot(t, "gtable"), ValidationError);
    EXPECT_THROW(plot(t, "nope"), ValidationError);

    io::Csv g;
    g.header = gtable_columns();
    g.add({"0.5", "-0.1", "-0.1", "0"});
    g.add({"1.1", "0", "0", "0"});
    const std::string svg = plot(g, "gtable");
    EXPECT_EQ(svg, plot(g, "gtable"));
    EXPECT_NE(svg.find("g = -1/2"), std::string::npos);
}

TEST(Modes, ParseAndName) {
    EXPECT_EQ(parse_mode("full"), domain::Mode::Full);
    EXPECT_EQ(parse_mode("fixed"), domain::Mode::Fixed);
    EXPECT_THROW(parse_mode("half"), ValidationError);
    EXPECT_STREQ(mode_name(domain::Mode::Full), "full");
}

TEST(Verify, CsvColumns) {
    asym::VerificationReport r;
    r.kappa = 8.0;
    r.H = 32.0;
    r.regime = asym::regime_classify(8.0, 32.0);
    const io::Csv t = verify_csv({r});
    EXPECT_EQ(t.header, verify_columns());
    EXPECT_EQ(t.rows.at(0).at(t.column("regime")), asym::to_string(r.regime.tag));
}
