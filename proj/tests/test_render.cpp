#include "profci/errors.hpp"
#include "profci/render.hpp"

#include "support.hpp"

#include <doctest.h>
#include <json.hpp>

#include <chrono>
#include <string>
#include <vector>

using namespace profci;
using namespace std::chrono;
using testsupport::at_minutes;

namespace {

// Shared with the golden generator: keep in sync with tests/golden/matrix.csv.
TimeMatrix sample_matrix() {
    TimeMatrix m;
    m.users = {"ada", "bob"};
    m.task_ids = {"task-1", "task-2", "task-3"};
    m.cells = {
        {{false, minutes{10}}, {true, seconds{0}}, {false, seconds{5430}}},
        {{false, seconds{0}}, {false, minutes{25}}, {true, seconds{0}}},
    };
    return m;
}

SeriesSet sample_series() {
    return {
        {"ada", {{at_minutes(0), 1}, {at_minutes(30), 2}}},
        {"bob", {{at_minutes(0), 0}}},
    };
}

// Every ampersand must belong to a named escape; tags must open and close.
void check_svg_shape(const std::string& svg) {
    REQUIRE(svg.rfind("<svg ", 0) == 0);
    REQUIRE(svg.find("xmlns=\"http://www.w3.org/2000/svg\"") != std::string::npos);
    REQUIRE(svg.substr(svg.size() - 7) == "</svg>\n");
    for (size_t i = svg.find('&'); i != std::string::npos; i = svg.find('&', i + 1)) {
        bool escaped = svg.compare(i, 5, "&amp;") == 0 || svg.compare(i, 4, "&lt;") == 0 ||
                       svg.compare(i, 4, "&gt;") == 0 || svg.compare(i, 6, "&quot;") == 0;
        REQUIRE(escaped);
    }
}

size_t count_occurrences(const std::string& text, const std::string& needle) {
    size_t n = 0;
    for (size_t pos = text.find(needle); pos != std::string::npos;
         pos = text.find(needle, pos + needle.size()))
        ++n;
    return n;
}

} // namespace

TEST_CASE("report formats parse from strings") {
    CHECK(report_format_from_string("csv") == ReportFormat::csv);
    CHECK(report_format_from_string("json") == ReportFormat::json);
    CHECK(report_format_from_string("svg") == ReportFormat::svg);
    CHECK_FALSE(report_format_from_string("pdf").has_value());
    CHECK_FALSE(report_format_from_string("CSV").has_value());
}

TEST_CASE("an empty matrix renders as a lone header row") {
    TimeMatrix empty;
    CHECK(render_report(empty, ReportFormat::csv) == "user\n");

    empty.task_ids = {"task-1", "task-2"};
    CHECK(render_report(empty, ReportFormat::csv) == "user,task-1,task-2\n");
}

TEST_CASE("matrix csv: blank cells stay empty, minutes render plainly") {
    auto csv = render_report(sample_matrix(), ReportFormat::csv);
    CHECK(csv ==
          "user,task-1,task-2,task-3\n"
          "ada,10,,90.50\n"
          "bob,0,25,\n");
    CHECK(csv == testsupport::read_file(testsupport::golden_dir() / "matrix.csv"));
}

TEST_CASE("csv fields with separators are quoted") {
    TimeMatrix m;
    m.users = {"o'hara, kim", "quote\"r"};
    m.task_ids = {"task,1"};
    m.cells = {{{false, minutes{1}}}, {{true, seconds{0}}}};
    auto csv = render_report(m, ReportFormat::csv);
    CHECK(csv ==
          "user,\"task,1\"\n"
          "\"o'hara, kim\",1\n"
          "\"quote\"\"r\",\n");
}

TEST_CASE("matrix json uses null for blank cells") {
    auto text = render_report(sample_matrix(), ReportFormat::json);
    auto doc = nlohmann::json::parse(text);
    CHECK(doc["users"] == nlohmann::json::array({"ada", "bob"}));
    CHECK(doc["tasks"] == nlohmann::json::array({"task-1", "task-2", "task-3"}));
    REQUIRE(doc["cells"].size() == 2);
    CHECK(doc["cells"][0][0] == 10.0);
    CHECK(doc["cells"][0][1].is_null());
    CHECK(doc["cells"][0][2] == 90.5);
    CHECK(doc["cells"][1][1] == 25.0);
    CHECK(doc["cells"][1][2].is_null());
}

TEST_CASE("matrix svg is a heat grid with one rect per cell") {
    auto matrix = sample_matrix();
    matrix.users[0] = "a<b&c\"d"; // must be escaped in labels and titles
    auto svg = render_report(matrix, ReportFormat::svg);
    check_svg_shape(svg);
    CHECK(count_occurrences(svg, "<rect ") == 6);
    CHECK(count_occurrences(svg, "fill=\"#f2f2f2\"") == 2); // the two blanks
    CHECK(svg.find("a&lt;b&amp;c&quot;d") != std::string::npos);
    CHECK(svg.find("a<b") == std::string::npos);
    // Hover titles only on filled cells.
    CHECK(count_occurrences(svg, "<title>") == 4);
}

TEST_CASE("series csv lists one row per point") {
    auto csv = render_report(sample_series(), ReportFormat::csv);
    CHECK(csv ==
          "user,timestamp,score\n"
          "ada,2016-03-07T09:00:00Z,1\n"
          "ada,2016-03-07T09:30:00Z,2\n"
          "bob,2016-03-07T09:00:00Z,0\n");
}

TEST_CASE("series json maps users to point arrays") {
    auto doc = nlohmann::json::parse(render_report(sample_series(), ReportFormat::json));
    REQUIRE(doc.contains("series"));
    REQUIRE(doc["series"]["ada"].size() == 2);
    CHECK(doc["series"]["ada"][0]["score"] == 1);
    CHECK(doc["series"]["ada"][1]["timestamp"] == "2016-03-07T09:30:00Z");
    CHECK(doc["series"]["bob"].size() == 1);
}

TEST_CASE("series svg draws one step polyline per user") {
    auto svg = render_report(sample_series(), ReportFormat::svg);
    check_svg_shape(svg);
    CHECK(count_occurrences(svg, "<polyline ") == 2);

    // Two points step-interpolate into three coordinate pairs.
    size_t poly = svg.find("points=\"");
    REQUIRE(poly != std::string::npos);
    size_t end = svg.find('"', poly + 8);
    std::string points = svg.substr(poly + 8, end - poly - 8);
    CHECK(count_occurrences(points, ",") == 3);

    // Legend carries both user names.
    CHECK(svg.find(">ada</text>") != std::string::npos);
    CHECK(svg.find(">bob</text>") != std::string::npos);
}

TEST_CASE("an empty series set still renders axes") {
    auto svg = render_report(SeriesSet{}, ReportFormat::svg);
    check_svg_shape(svg);
    CHECK(count_occurrences(svg, "<polyline ") == 0);
    CHECK(render_report(SeriesSet{}, ReportFormat::csv) == "user,timestamp,score\n");
}

TEST_CASE("punch card csv has a weekday row per line, sunday first") {
    PunchCard card;
    card.counts[2][14] = 3; // Tuesday 14:00
    auto csv = render_report(card, ReportFormat::csv);

    std::string header = "weekday";
    for (int h = 0; h < 24; ++h) {
        char buf[8];
        std::snprintf(buf, sizeof buf, ",%02d", h);
        header += buf;
    }
    CHECK(csv.substr(0, csv.find('\n')) == header);

    std::string zero_row;
    for (int h = 0; h < 24; ++h) zero_row += ",0";
    CHECK(csv.find("Sun" + zero_row + "\n") != std::string::npos);
    CHECK(csv.find("Sat" + zero_row + "\n") != std::string::npos);
    CHECK(csv.find("Tue,0,0,0,0,0,0,0,0,0,0,0,0,0,0,3,") != std::string::npos);

    // Row order is Sun..Sat.
    CHECK(csv.find("Sun") < csv.find("Mon"));
    CHECK(csv.find("Fri") < csv.find("Sat"));
}

TEST_CASE("punch card json carries the full grid") {
    PunchCard card;
    card.counts[0][0] = 7;
    auto doc = nlohmann::json::parse(render_report(card, ReportFormat::json));
    CHECK(doc["weekdays"][0] == "Sun");
    CHECK(doc["weekdays"][6] == "Sat");
    REQUIRE(doc["counts"].size() == 7);
    REQUIRE(doc["counts"][0].size() == 24);
    CHECK(doc["counts"][0][0] == 7);
    CHECK(doc["counts"][3][12] == 0);
}

TEST_CASE("punch card svg draws a circle per nonzero cell") {
    PunchCard card;
    auto empty_svg = render_report(card, ReportFormat::svg);
    check_svg_shape(empty_svg);
    CHECK(count_occurrences(empty_svg, "<circle ") == 0);

    card.counts[2][14] = 4; // the max: radius 12.0
    card.counts[5][8] = 1;
    auto svg = render_report(card, ReportFormat::svg);
    check_svg_shape(svg);
    CHECK(count_occurrences(svg, "<circle ") == 2);
    CHECK(svg.find("r=\"12.0\"") != std::string::npos);
    CHECK(svg.find("Tue 14:00 - 4 commits") != std::string::npos);
    CHECK(svg.find("Fri 8:00 - 1 commits") != std::string::npos);
}

TEST_CASE("stuck report renders csv and json but refuses svg") {
    std::vector<StuckUser> stuck{
        {"ada", "task-8", 7, 185.0, 12},
        {"bob, jr", "task-2", 1, 30.5, 0},
    };
    auto csv = render_report(stuck, ReportFormat::csv);
    CHECK(csv ==
          "user,task_id,task_index,stalled_minutes,solver_count\n"
          "ada,task-8,7,185,12\n"
          "\"bob, jr\",task-2,1,30.50,0\n");

    auto doc = nlohmann::json::parse(render_report(stuck, ReportFormat::json));
    REQUIRE(doc.size() == 2);
    CHECK(doc[0]["user"] == "ada");
    CHECK(doc[0]["solver_count"] == 12);
    CHECK(doc[1]["stalled_minutes"] == 30.5);

    CHECK_THROWS_AS(render_report(stuck, ReportFormat::svg), unsupported_combination);
    CHECK(render_report(std::vector<StuckUser>{}, ReportFormat::csv) ==
          "user,task_id,task_index,stalled_minutes,solver_count\n");
}

TEST_CASE("all renderers are byte-deterministic") {
    auto matrix = sample_matrix();
    auto series = sample_series();
    PunchCard card;
    card.counts[1][9] = 2;
    std::vector<StuckUser> stuck{{"ada", "task-1", 0, 45.0, 3}};

    for (auto format : {ReportFormat::csv, ReportFormat::json, ReportFormat::svg}) {
        CHECK(render_report(matrix, format) == render_report(matrix, format));
        CHECK(render_report(series, format) == render_report(series, format));
        CHECK(render_report(card, format) == render_report(card, format));
    }
    CHECK(render_report(stuck, ReportFormat::csv) == render_report(stuck, ReportFormat::csv));
    CHECK(render_report(stuck, ReportFormat::json) ==
          render_report(stuck, ReportFormat::json));
}
