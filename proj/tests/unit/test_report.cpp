#include <doctest.h>

#include <filesystem>
#include <fstream>

#include "currents/error.hpp"
#include "currents/report.hpp"

using namespace currents;
namespace fs = std::filesystem;

TEST_CASE("percent formatting") {
  CHECK(report::format_cv_error(30, 58) == "30 (51.72%)");
  CHECK(report::format_cv_error(0, 58) == "0 (0.00%)");
  CHECK(report::format_cv_error(6, 58) == "6 (10.34%)");
  CHECK(report::format_percent(1, 3) == "33.33%");
  CHECK(report::format_percent(0, 0) == "0.00%");
}

TEST_CASE("table csv: stable columns, error rows, round trip") {
  std::vector<report::TableRow> rows(3);
  rows[0].lambda = 1;
  rows[0].gamma = 1e-4;
  rows[0].rank_d = 3337;
  rows[0].r = 52;
  rows[0].epsilon = 1e-8;
  rows[0].errors = 30;
  rows[0].total = 58;
  rows[1] = rows[0];
  rows[1].lambda = 67.6;
  rows[1].lambda_mode = "auto";
  rows[1].errors = 0;
  rows[2] = rows[0];
  rows[2].status = "error: singular, \"bad\"";
  rows[2].errors = 0;

  const std::string csv = report::table_csv(rows, {{"seed", "42"}});
  CHECK(csv.rfind("# seed: 42\nlambda,gamma,rank_d,r,epsilon,errors,error_rate,total,cv_error,lambda_mode,status\n", 0) ==
        0);
  CHECK(csv.find("1,1e-04,3337,52,1e-08,30,51.72%,58,30 (51.72%),given,ok\n") != std::string::npos);
  CHECK(csv.find("67.6,1e-04,3337,52,1e-08,0,0.00%,58,0 (0.00%),auto,ok\n") != std::string::npos);

  const fs::path f = fs::temp_directory_path() / "currents_test_table.csv";
  std::ofstream(f) << csv;
  io::Metadata meta;
  const auto back = report::read_table_csv(f, &meta);
  REQUIRE(back.size() == 3);
  CHECK(back[0].errors == 30);
  CHECK(back[1].lambda_mode == "auto");
  CHECK(back[1].lambda == 67.6);
  CHECK(back[2].status == rows[2].status);
  CHECK_FALSE(back[2].ok());
  CHECK(io::find_meta(meta, "seed") == "42");
  CHECK(report::table_csv(back, meta) == csv);
}

TEST_CASE("table csv rejects foreign files") {
  const fs::path f = fs::temp_directory_path() / "currents_test_table_bad.csv";
  std::ofstream(f) << "a,b,c\n1,2,3\n";
  CHECK_THROWS_AS(report::read_table_csv(f), IoError);
}

TEST_CASE("svg chart has one bar per row") {
  std::vector<report::TableRow> rows(4);
  for (std::size_t i = 0; i < rows.size(); ++i) {
    rows[i].total = 58;
    rows[i].errors = i * 5;
  }
  const std::string svg = report::table_svg(rows, "title <x>");
  CHECK(svg.rfind("<svg", 0) == 0);
  std::size_t bars = 0;
  for (auto pos = svg.find("<rect"); pos != std::string::npos; pos = svg.find("<rect", pos + 1)) ++bars;
  CHECK(bars == 4);
  CHECK(svg.find("title &lt;x&gt;") != std::string::npos);
}
