#include <cstdio>
#include <fstream>
#include <sstream>

#include <doctest.h>

#include "oracles.hpp"
#include "thermies/errors.hpp"
#include "thermies/io.hpp"
#include "thermies/sampler.hpp"

#ifndef THERMIES_DATA_DIR
#define THERMIES_DATA_DIR "data"
#endif

using namespace thermies;

namespace {

std::string write_temp(const std::string& contents) {
  static int counter = 0;
  std::string path = "/tmp/thermies_io_test_" + std::to_string(counter++);
  std::ofstream out(path);
  out << contents;
  return path;
}

}  // namespace

TEST_SUITE_BEGIN("io");

TEST_CASE("matrix file round-trips bit-exactly") {
  CovMatrix finance =
      load_matrix(std::string(THERMIES_DATA_DIR) + "/matrices/finance5.mat");
  const std::string path = "/tmp/thermies_finance_rt.mat";
  store_matrix(path, finance.sym());
  CovMatrix back = load_matrix(path);
  CHECK(oracles::max_abs_diff(finance.sym(), back.sym()) == 0.0);
  CHECK(finance(0, 1) == 0.652132);
}

TEST_CASE("1x1 matrix file") {
  CovMatrix m = load_matrix(write_temp("1\n7.0\n"));
  CHECK(m.dim() == 1);
  CHECK(m(0, 0) == 7.0);
}

TEST_CASE("parse errors carry the problem") {
  CHECK_THROWS_AS(load_matrix("/tmp/definitely_missing_thermies.mat"), IoError);
  CHECK_THROWS_WITH_AS(load_matrix(write_temp("2\n1 2\n2.0001 1\n")),
                       doctest::Contains("not symmetric"), IoError);
  CHECK_THROWS_AS(load_matrix(write_temp("2\n1 2\n")), IoError);
  CHECK_THROWS_AS(load_matrix(write_temp("0\n")), IoError);
  // non-PSD content is rejected on load
  CHECK_THROWS_AS(load_matrix(write_temp("2\n1 2\n2 1\n")), IoError);
}

TEST_CASE("format_double keeps 17 significant digits") {
  CHECK(format_double(0.1) == "0.10000000000000001");
  CHECK(format_double(1.0) == "1");
  double v = 0.652132;
  CHECK(std::stod(format_double(v)) == v);
}

TEST_CASE("csv writer layout") {
  std::ostringstream os;
  CsvWriter w(os);
  w.comment("prov line");
  w.header({"a", "b"});
  w.row({"1", "2"});
  CHECK(os.str() == "# prov line\na,b\n1,2\n");
}

TEST_CASE("batch csv includes the neighbor index column") {
  SampleBatch b;
  b.dim = 2;
  b.count = 2;
  b.data = {1.0, 2.0, 3.0, 4.0};
  b.neighbor_index = {0, 5};
  std::ostringstream os;
  write_batch_csv(os, b, "p");
  CHECK(os.str() == "# p\nx0,x1,neighbor_index\n1,2,0\n3,4,5\n");

  SampleBatch untagged;
  untagged.dim = 1;
  untagged.count = 1;
  untagged.data = {0.5};
  std::ostringstream os2;
  write_batch_csv(os2, untagged, "p");
  CHECK(os2.str() == "# p\nx0,neighbor_index\n0.5,-1\n");
}

TEST_SUITE_END();
