#include <filesystem>
#include <fstream>

#include "doctest.h"
#include "stadloc/error.hpp"
#include "stadloc/io.hpp"

using namespace stadloc;

namespace {

fs::path scratch(const std::string& name) {
  const fs::path dir = fs::temp_directory_path() / "stadloc_io_test";
  fs::create_directories(dir);
  return dir / name;
}

}  // namespace

TEST_CASE("BNDF round trip") {
  std::vector<BoundaryFunction> states(2);
  states[0] = {101.25, {0.1, 0.2, 0.3}, {1.0, -2.0, 3.5}};
  states[1] = {102.5, {0.05}, {-0.25}};
  const fs::path p = scratch("a.bndf");
  write_bndf(p, states);
  const auto back = read_bndf(p);
  REQUIRE(back.size() == 2);
  CHECK(back[0].k == 101.25);
  CHECK(back[0].u == states[0].u);
  CHECK(back[1].s == states[1].s);
  CHECK(fs::file_size(p) == 4 + 4 + 4 + (8 + 4 + 6 * 8) + (8 + 4 + 2 * 8));
  std::ifstream in(p, std::ios::binary);
  char magic[4];
  in.read(magic, 4);
  CHECK(std::string(magic, 4) == "BNDF");
}

TEST_CASE("HUSG round trip") {
  HusimiGrid g;
  g.epsilon = 0.1;
  g.k = 100.5;
  g.nq = 2;
  g.np = 3;
  g.values = {0.1, 0.2, 0.3, 0.15, 0.15, 0.1};
  const fs::path p = scratch("a.husg");
  write_husg(p, g);
  const HusimiGrid back = read_husg(p);
  CHECK(back.values == g.values);
  CHECK(back.nq == 2);
  CHECK(back.np == 3);
  CHECK(back.k == 100.5);
  CHECK(fs::file_size(p) == 4 + 3 * 4 + 2 * 8 + 6 * 8);
  CHECK_THROWS_AS(read_bndf(p), Error);
}

TEST_CASE("level CSV round trip") {
  SpectrumWindow w;
  w.epsilon = 0.1;
  w.levels = {100.123456789012345, 100.5};
  w.window_id = {0, 1};
  const fs::path p = scratch("levels.csv");
  write_levels_csv(p, w);
  const SpectrumWindow back = read_levels_csv(p, 0.1);
  CHECK(back.levels == w.levels);
  CHECK(back.window_id == w.window_id);
  CHECK(back.method == SolverMethod::Scaling);
  CHECK(read_text(p).rfind("index,k,method,window_id\n", 0) == 0);
}

TEST_CASE("localization CSV round trip") {
  std::vector<LocalizationRecord> r(2);
  r[0] = {100.0, 0.3, 0.2, 10.5, 0};
  r[1] = {101.0, 0.4, 0.25, 11.0, 0};
  const fs::path p = scratch("loc.csv");
  write_localization_csv(p, r);
  const auto back = read_localization_csv(p);
  REQUIRE(back.size() == 2);
  CHECK(back[1].A == 0.4);
  CHECK(back[0].I == 10.5);
}

TEST_CASE("SHA-256") {
  const fs::path p = scratch("abc.txt");
  write_text_atomic(p, "abc");
  CHECK(sha256_file(p) == "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad");
  CHECK_FALSE(fs::exists(p.string() + ".tmp"));
  CHECK_THROWS_AS(sha256_file(scratch("missing")), Error);
  CHECK(sha256_hex("abc") == sha256_file(p));
  CHECK(sha256_hex("") == "e3b0c44298fc1c149afbf4c8996fb92427ae41e4649b934ca495991b7852b855");
}
