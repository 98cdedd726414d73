#include <cmath>
#include <sstream>
#include <string>

#include <gtest/gtest.h>

#include "gfm/report_io.hpp"
#include "support.hpp"

using namespace gfm;

namespace {

std::vector<std::string> lines(const std::string& s) {
    std::vector<std::string> out;
    std::istringstream in(s);
    for (std::string l; std::getline(in, l);) out.push_back(l);
    return out;
}

}  // namespace

TEST(Fmt, ShortestRoundTrip) {
    for (double x : {0.0, 0.1, -1.0 / 3.0, 1e-300, 314.1592653589793, 5e-5}) {
        EXPECT_EQ(std::stod(io::fmt(x)), x);
    }
    EXPECT_EQ(io::fmt(0.5), "0.5");
}

TEST(ReportJson, RoundTripsExactly) {
    SimReport r;
    r.pole_slips = 2;
    r.converged = true;
    r.delta_final = 12.566370614359172 + 0.1;
    r.verdict = Verdict::ReSyncAfterSlips;
    r.peak_event_power = 0.7712345678901234;
    r.mode_timeline = {{0.0, IvsMode::Slow}, {1.0001, IvsMode::Fast}, {1.4, IvsMode::Slow}};
    r.droop_power_ss = 1.0 / 3.0;
    r.inertia_power_peak = -2e-17;
    const std::string text = io::to_json(r).dump(2);
    EXPECT_EQ(io::report_from_json(nlohmann::json::parse(text)), r);
}

TEST(ReportJson, RoundTripsSimulatedReport) {
    const auto res = run(gfm::test::golden("fig16"), ControlVariant::Adaptive, ControlParams{});
    const auto back = io::report_from_json(nlohmann::json::parse(io::to_json(res.report).dump()));
    EXPECT_EQ(back, res.report);
}

TEST(ReportJson, RejectsUnknownVerdict) {
    auto j = io::to_json(SimReport{});
    j["verdict"] = "Wobbly";
    EXPECT_THROW(io::report_from_json(j), Error);
}

TEST(TraceCsv, RowCountAndFiniteValues) {
    const auto sc = gfm::test::golden("fig15");
    const auto res = run(sc, ControlVariant::Adaptive, ControlParams{});
    std::ostringstream os;
    io::write_trace_csv(os, res.trace);
    const auto ls = lines(os.str());
    ASSERT_EQ(ls.front(), io::kTraceHeader);
    EXPECT_EQ(ls.size() - 1, static_cast<std::size_t>(std::floor(sc.t_end / 100e-6)) + 1);
    for (std::size_t k = 1; k < ls.size(); k += 997) {
        std::istringstream row(ls[k]);
        std::string cell;
        int col = 0;
        while (std::getline(row, cell, ',')) {
            if (++col == 13) {
                EXPECT_TRUE(cell == "Slow" || cell == "Fast");
            } else {
                EXPECT_TRUE(std::isfinite(std::stod(cell))) << ls[k];
            }
        }
        EXPECT_EQ(col, 13);
    }
}

TEST(TraceCsv, Decimation) {
    SimTrace tr;
    tr.dt = 0.1;
    for (int k = 0; k < 10; ++k) tr.records.push_back(SimRecord{.t = k * 0.1});
    std::ostringstream os;
    io::write_trace_csv(os, tr, 4);
    const auto ls = lines(os.str());
    ASSERT_EQ(ls.size(), 4u);  // header + rows 0, 4, 8
    EXPECT_EQ(ls[2].substr(0, 4), "0.4,");
}

TEST(Svg, QuicklookIsWellFormedEnough) {
    const auto res = run(gfm::test::golden("empty"), ControlVariant::SlowIVS, ControlParams{});
    const std::string svg = io::quicklook_svg(res.trace);
    EXPECT_EQ(svg.rfind("<svg", 0), 0u);
    EXPECT_NE(svg.find("</svg>"), std::string::npos);
    std::size_t n = 0;
    for (std::size_t p = svg.find("<polyline"); p != std::string::npos; p = svg.find("<polyline", p + 1)) ++n;
    EXPECT_EQ(n, 4u);
    EXPECT_EQ(svg.find("nan"), std::string::npos);
}

TEST(CurveCsv, Columns) {
    const auto t = analysis::curve_table(analysis::CurveKind::IThMin, {}, analysis::uniform_grid(0, 180, 3));
    std::ostringstream os;
    io::write_curve_csv(os, analysis::CurveKind::IThMin, t);
    const auto ls = lines(os.str());
    ASSERT_EQ(ls.size(), 4u);
    EXPECT_EQ(ls[0], "delta_th_deg,i_th_min");
    EXPECT_EQ(ls[1], "0,0");
    EXPECT_EQ(ls[2], "90,1");
}

TEST(MatrixCsv, RowsInGivenOrder) {
    std::vector<io::MatrixRow> rows{{"a", "slow", Verdict::LOS, 3, 0.25, ""},
                                    {"b", "fast", Verdict::Stable, 0, 0.5, ""},
                                    {"c", "adaptive", Verdict::Stable, 0, 0.0, "boom"}};
    std::ostringstream os;
    io::write_matrix_csv(os, rows);
    const auto ls = lines(os.str());
    ASSERT_EQ(ls.size(), 4u);
    EXPECT_EQ(ls[0], "scenario,variant,verdict,pole_slips,peak_event_power");
    EXPECT_EQ(ls[1], "a,slow,LOS,3,0.25");
    EXPECT_EQ(ls[3], "c,adaptive,error,0,0");
    EXPECT_NE(io::matrix_table(rows).find("error: boom"), std::string::npos);
}

TEST(MatrixCsv, EmptyTable) {
    std::ostringstream os;
    io::write_matrix_csv(os, {});
    EXPECT_EQ(lines(os.str()).size(), 1u);
}
