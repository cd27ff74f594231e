#include <catch_amalgamated.hpp>

#include <cmath>
#include <limits>
#include <random>
#include <sstream>

#include "gradrec/csv_io.hpp"

using namespace gradrec;

TEST_CASE("masked signal parsing") {
  std::istringstream in("n,value\n0,1.5\n1,\n2, -2 \n\n3,4e-3\n");
  const auto ms = csv::read_masked_signal(in);
  CHECK(ms.values == std::vector<double>{1.5, 0.0, -2.0, 4e-3});
  CHECK(ms.samples.missing() == std::vector<std::size_t>{1});
}

TEST_CASE("rows may come in any order") {
  std::istringstream in("n,value\n2,3\n0,1\n1,\n");
  const auto ms = csv::read_masked_signal(in);
  CHECK(ms.values == std::vector<double>{1.0, 0.0, 3.0});
}

TEST_CASE("malformed signal files are rejected") {
  for (const char* text : {"", "idx,value\n0,1\n1,2\n", "n,value\n0,1\n", "n,value\n0,1\n2,2\n", "n,value\n0,1\n0,2\n",
                           "n,value\n0,1\n1,abc\n", "n,value\n0,1\n1,2,3\n", "n,value\n0,1\n1.5,2\n",
                           "n,value\n0,inf\n1,2\n", "n,value\n0,\n1,\n"}) {
    INFO(text);
    std::istringstream in(text);
    CHECK_THROWS_AS(csv::read_masked_signal(in), InputError);
  }
}

TEST_CASE("write_signal blanks missing samples") {
  std::ostringstream out;
  const std::vector<double> v{0.5, 2.0, -1.0};
  const auto mask = SampleSet::from_missing(3, {1});
  csv::write_signal(out, v, &mask);
  CHECK(out.str() == "n,value\n0,0.5\n1,\n2,-1\n");
  std::istringstream back(out.str());
  const auto ms = csv::read_masked_signal(back);
  CHECK(ms.samples == mask);
}

TEST_CASE("format_double round trips") {
  std::mt19937_64 rng(17);
  std::normal_distribution<double> g;
  for (int i = 0; i < 2000; ++i) {
    const double v = g(rng) * std::pow(10.0, static_cast<int>(rng() % 40) - 20);
    CHECK(std::strtod(csv::format_double(v).c_str(), nullptr) == v);
  }
  CHECK(csv::format_double(0.1) == "0.1");
  CHECK(csv::format_double(300.0) == "300");
  CHECK(csv::format_double(std::numeric_limits<double>::quiet_NaN()) == "nan");
  CHECK(csv::format_double(-std::numeric_limits<double>::infinity()) == "-inf");
}

TEST_CASE("nonuniform files and slot assignment") {
  std::istringstream in("t,value\n0.1,1\n2.6,2\n1.2,3\n");
  const auto samples = csv::read_nonuniform(in);
  REQUIRE(samples.size() == 3);
  const auto slots = csv::assign_slots(samples, 4, 1.0);
  CHECK(slots.at(0).value == 1.0);
  CHECK(slots.at(1).value == 3.0);
  CHECK(slots.at(3).value == 2.0);

  CHECK_THROWS_AS(csv::assign_slots({{0.1, 1}, {0.2, 2}}, 4, 1.0), InputError);
  CHECK_THROWS_AS(csv::assign_slots({{3.7, 1}}, 4, 1.0), InputError);
  CHECK_THROWS_AS(csv::assign_slots({{-0.6, 1}}, 4, 1.0), InputError);
  std::istringstream empty("t,value\n");
  CHECK_THROWS_AS(csv::read_nonuniform(empty), InputError);

  std::ostringstream out;
  csv::write_nonuniform(out, slots);
  CHECK(out.str() == "t,value\n0.1,1\n1.2,3\n2.6,2\n");
}

TEST_CASE("index lists") {
  CHECK(csv::parse_index_list("3, 5,9") == std::vector<std::size_t>{3, 5, 9});
  CHECK(csv::parse_index_list(" ").empty());
  CHECK_THROWS_AS(csv::parse_index_list("1,-2"), InputError);
  CHECK_THROWS_AS(csv::parse_index_list("1,,2"), InputError);
  CHECK_THROWS_AS(csv::parse_index_list("x"), InputError);
}

TEST_CASE("trace CSV header") {
  ReconResult r;
  r.trace.push_back({0, 1.0, std::numeric_limits<double>::quiet_NaN(), 12.5, std::numeric_limits<double>::quiet_NaN()});
  std::ostringstream out;
  csv::write_trace(out, r);
  CHECK(out.str().rfind("m,delta,beta_deg,measure,tr_db\n0,1,nan,12.5,nan\n", 0) == 0);
}
