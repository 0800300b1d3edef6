#include <doctest.h>

#include <cstdio>
#include <filesystem>
#include <fstream>

#include "ispval/io.hpp"

using namespace ispval;
namespace fs = std::filesystem;

namespace {

fs::path write_temp(const std::string& name, const std::string& content) {
    fs::path p = fs::temp_directory_path() / name;
    std::ofstream out(p, std::ios::binary);
    out << content;
    return p;
}

}  // namespace

TEST_SUITE("io") {

TEST_CASE("draw file round trip") {
    auto p = write_temp("ispval_draws.csv",
                        "stat,log_w\n"
                        "2.0,0.0\n"
                        "3.0,0.0\n"
                        "1.0,0.0\n");
    DrawFile f = read_draw_file(p);
    CHECK(f.normalized);
    CHECK(f.observed.stat == 2.0);
    CHECK(f.draws.size() == 2);
}

TEST_CASE("draw file honors the unnormalized marker") {
    auto p = write_temp("ispval_draws_un.csv",
                        "# unnormalized\n"
                        "stat,log_w\n"
                        "2.0,0.5\n"
                        "3.0,-0.5\n");
    DrawFile f = read_draw_file(p);
    CHECK_FALSE(f.normalized);
    CHECK_FALSE(f.observed.weight.normalized);
}

TEST_CASE("draw file parse errors carry line numbers") {
    auto p = write_temp("ispval_draws_bad.csv",
                        "stat,log_w\n"
                        "2.0,0.0\n"
                        "oops,0.0\n");
    try {
        read_draw_file(p);
        FAIL("expected ParseError");
    } catch (const ParseError& e) {
        CHECK(e.line() == 3);
    }
    auto p2 = write_temp("ispval_draws_bad2.csv", "wrong,header\n1,2\n");
    CHECK_THROWS_AS(read_draw_file(p2), ParseError);
}

TEST_CASE("margin fiber csv") {
    auto p = write_temp("ispval_margins.csv", "2,1,1\n2,1,1\n");
    MarginFiber f = read_margin_fiber_csv(p);
    CHECK(f.row_sums == std::vector<int>{2, 1, 1});
    CHECK(f.col_sums == std::vector<int>{2, 1, 1});
    auto bad = write_temp("ispval_margins_bad.csv", "2,2,0\n3,1,0\n");
    CHECK_THROWS_AS(read_margin_fiber_csv(bad), InfeasibleMargins);
}

TEST_CASE("binary matrix csv") {
    auto p = write_temp("ispval_mat.csv", "1,0\n0,1\n");
    BinaryMatrix m = read_binary_matrix_csv(p);
    CHECK(m.rows() == 2);
    CHECK(m(0, 0) == 1);
    CHECK(m(1, 0) == 0);
    auto bad = write_temp("ispval_mat_bad.csv", "1,0\n0,2\n");
    CHECK_THROWS_AS(read_binary_matrix_csv(bad), ParseError);
    auto ragged = write_temp("ispval_mat_rag.csv", "1,0\n0\n");
    CHECK_THROWS_AS(read_binary_matrix_csv(ragged), ParseError);
}

TEST_CASE("key-value config") {
    auto p = write_temp("ispval_cfg.txt",
                        "# a comment\n"
                        "n = 100\n"
                        "theta=3.0  # trailing comment\n"
                        "\n");
    auto cfg = read_key_value_config(p);
    CHECK(cfg.at("n") == "100");
    CHECK(cfg.at("theta") == "3.0");
    auto bad = write_temp("ispval_cfg_bad.txt", "just a line\n");
    CHECK_THROWS_AS(read_key_value_config(bad), ParseError);
}

TEST_CASE("csv writer is byte stable") {
    CsvWriter a({"x", "y"});
    CsvWriter b({"x", "y"});
    double row[2] = {1.0 / 3.0, 2e-17};
    a.add_row(row);
    b.add_row(row);
    CHECK(a.to_string() == b.to_string());
    CHECK(a.to_string() == "x,y\n0.333333333333,2e-17\n");
}

TEST_CASE("confidence set serialization") {
    ConfidenceSet cs;
    cs.grid = {0.0, 1.0};
    cs.pvalues = {0.5, 0.01};
    cs.alpha = 0.05;
    cs.retained = {true, false};
    cs.hull = std::make_pair(0.0, 0.0);
    cs.contiguous = true;
    std::string j = confidence_set_to_json(cs);
    CHECK(j.find("\"alpha\": 0.05") != std::string::npos);
    CHECK(j.find("\"hull\"") != std::string::npos);
    fs::path p = fs::temp_directory_path() / "ispval_cs.csv";
    write_confidence_set_csv(cs, p);
    std::ifstream in(p);
    std::string header;
    std::getline(in, header);
    CHECK(header == "theta,pvalue,retained");
}

TEST_CASE("svg writer produces a plausible document") {
    SvgSeries s;
    s.label = "series";
    s.color = "blue";
    s.x = {1, 10, 100};
    s.y = {0.1, 0.2, 0.3};
    fs::path p = fs::temp_directory_path() / "ispval_plot.svg";
    write_svg_lines(p, "demo", std::vector<SvgSeries>{s}, true, true);
    std::ifstream in(p);
    std::string content((std::istreambuf_iterator<char>(in)),
                        std::istreambuf_iterator<char>());
    CHECK(content.find("<svg") != std::string::npos);
    CHECK(content.find("polyline") != std::string::npos);
}

}  // TEST_SUITE
