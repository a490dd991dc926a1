#include "doctest.h"
#include "stadloc/error.hpp"
#include "stadloc/io.hpp"
#include "stadloc/pipeline.hpp"

using namespace stadloc;

namespace {

json base() { return json::parse(R"({"epsilons": [0.1, 0.2], "k0": [100, 120], "k0_width": 10})"); }

ErrorCode code_of(const json& j) {
  try {
    parse_config(j);
  } catch (const Error& e) {
    return e.code();
  }
  return ErrorCode::InvalidArgument;
}

}  // namespace

TEST_CASE("config defaults and round trip") {
  const RunConfig cfg = parse_config(base());
  REQUIRE(cfg.windows.size() == 2);
  CHECK(cfg.windows[1].k_lo == 120.0);
  CHECK(cfg.windows[1].k_hi == 130.0);
  CHECK(cfg.nq == 400);
  CHECK(cfg.alpha_criterion == TransportCriterion::ExpModel);
  const RunConfig again = parse_config(to_json(cfg));
  CHECK(to_json(again) == to_json(cfg));
  CHECK(cfg.source == base());
  CHECK(cell_tag(0.1, 2) == "eps0.1_w2");
  CHECK(default_collisions(0.1) == 3000);
  CHECK(default_collisions(1.0) == 2000);
}

TEST_CASE("invalid configs are config errors") {
  json j = base();
  j["epsilons"] = json::array();
  CHECK(code_of(j) == ErrorCode::ConfigError);
  j = base();
  j["epsilons"] = {0.1, 0.1};
  CHECK(code_of(j) == ErrorCode::ConfigError);
  j = base();
  j["grid"] = {{"nq", -3}};
  CHECK(code_of(j) == ErrorCode::ConfigError);
  j = base();
  j["criteria"] = {"f60"};
  CHECK(code_of(j) == ErrorCode::ConfigError);
  j = base();
  j["windows"] = json::array();
  CHECK(code_of(j) == ErrorCode::ConfigError);
  j = base();
  j.erase("k0_width");
  CHECK(code_of(j) == ErrorCode::ConfigError);
  j = base();
  j["transport"] = {{"particles", 10}};
  CHECK(code_of(j) == ErrorCode::ConfigError);
  j = base();
  j["run_id"] = "../x";
  CHECK(code_of(j) == ErrorCode::ConfigError);
}

TEST_CASE("transport stage is reproducible across worker counts and resumable") {
  const fs::path root = fs::temp_directory_path() / "stadloc_pipeline_test";
  fs::remove_all(root);
  json j = base();
  j["transport"] = {{"particles", 1000}, {"collisions", 3000}};
  j["out"] = (root / "a").string();
  RunConfig a = parse_config(j);
  j["out"] = (root / "b").string();
  j["jobs"] = 3;
  RunConfig b = parse_config(j);
  RunOptions quiet;
  quiet.log = [](const std::string&) {};
  run_stages(a, {Stage::Transport}, quiet);
  run_stages(b, {Stage::Transport}, quiet);
  const auto rel = fs::path("run") / "transport" / "transport_estimates.csv";
  CHECK(sha256_file(root / "a" / rel) == sha256_file(root / "b" / rel));

  quiet.resume = true;
  const auto r = run_stages(a, {Stage::Transport}, quiet);
  CHECK(r.at(0).skipped);
  a.seed = 99;
  CHECK_FALSE(run_stages(a, {Stage::Transport}, quiet).at(0).skipped);

  // downstream stage without its inputs
  try {
    run_stages(a, {Stage::Fit}, quiet);
    FAIL("expected an error");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::ConfigError);
  }
  const json m = json::parse(read_text(root / "a" / "run" / "manifest.json"));
  CHECK(m.at("complete") == false);
  CHECK(m.at("stages").size() == 1);
}
