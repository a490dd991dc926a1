// Command-line driver: stadloc <transport|solve|husimi|localize|fit|pipeline> --config run.json
#include <iostream>

#include "CLI11.hpp"
#include "stadloc/error.hpp"
#include "stadloc/io.hpp"
#include "stadloc/pipeline.hpp"

using namespace stadloc;

namespace {

constexpr int kExitConfig = 2;
constexpr int kExitNumerical = 3;

struct Overrides {
  std::string config;
  std::string out;
  std::string run_id;
  int jobs = 0;
  std::uint64_t seed = 0;
  bool seed_set = false;
  bool resume = false;
  std::vector<double> epsilons;
  std::vector<double> k0;
  double k0_width = 0.0;
  std::vector<std::size_t> grid;
  double A0 = 0.0;
  std::string alpha_criterion;
  std::size_t particles = 0;
};

// Command-line values win over the config file.
json merged_config(const Overrides& o) {
  json j = json::object();
  if (!o.config.empty()) {
    try {
      j = json::parse(read_text(o.config));
    } catch (const json::exception& e) {
      throw Error(ErrorCode::ConfigError, "cannot parse " + o.config + ": " + e.what());
    } catch (const Error& e) {
      throw Error(ErrorCode::ConfigError, e.what());
    }
  }
  if (!j.is_object()) throw Error(ErrorCode::ConfigError, "config must be a JSON object");
  if (!o.out.empty()) j["out"] = o.out;
  if (!o.run_id.empty()) j["run_id"] = o.run_id;
  if (o.jobs > 0) j["jobs"] = o.jobs;
  if (o.seed_set) j["seed"] = o.seed;
  if (!o.epsilons.empty()) j["epsilons"] = o.epsilons;
  if (!o.k0.empty()) {
    j.erase("windows");
    j["k0"] = o.k0;
  }
  if (o.k0_width > 0.0) j["k0_width"] = o.k0_width;
  if (!o.grid.empty()) j["grid"] = {{"nq", o.grid[0]}, {"np", o.grid.size() > 1 ? o.grid[1] : o.grid[0]}};
  if (o.A0 > 0.0) j["A0"] = o.A0;
  if (!o.alpha_criterion.empty()) j["alpha_criterion"] = o.alpha_criterion;
  if (o.particles > 0) j["transport"]["particles"] = o.particles;
  return j;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Quantum localization measures for stadium billiard eigenstates"};
  app.require_subcommand(1);
  Overrides o;
  auto add_common = [&](CLI::App* sub) {
    sub->add_option("--config", o.config, "JSON run configuration");
    sub->add_option("--out", o.out, "output root directory");
    sub->add_option("--run-id", o.run_id, "run directory name under --out");
    sub->add_option("--jobs", o.jobs, "worker threads")->check(CLI::PositiveNumber);
    sub->add_option_function<std::uint64_t>(
        "--seed",
        [&](const std::uint64_t& s) {
          o.seed = s;
          o.seed_set = true;
        },
        "base random seed");
    sub->add_flag("--resume", o.resume, "skip stages whose outputs match the config");
    sub->add_option("--epsilon", o.epsilons, "straight-segment lengths")->expected(1, -1);
    sub->add_option("--k0", o.k0, "window starts (replaces config windows)")->expected(1, -1);
    sub->add_option("--k0-width", o.k0_width, "window width for --k0");
    sub->add_option("--grid", o.grid, "Husimi grid nq [np]")->expected(1, 2);
    sub->add_option("--A0", o.A0, "upper end of the A distribution");
    sub->add_option("--alpha-criterion", o.alpha_criterion, "N_T criterion used for alpha");
    sub->add_option("--particles", o.particles, "transport ensemble size");
  };
  const std::pair<const char*, std::vector<Stage>> commands[] = {
      {"transport", {Stage::Transport}},
      {"solve", {Stage::Solve}},
      {"husimi", {Stage::Husimi}},
      {"localize", {Stage::Localize}},
      {"fit", {Stage::Fit}},
      {"pipeline", {std::begin(kAllStages), std::end(kAllStages)}},
  };
  const char* help[] = {"diffusion curves and N_T estimates", "eigenvalues and boundary functions",
                        "Husimi grids and localization measures", "windowed statistics and P(A), W(A)",
                        "beta, Brody, rational and sigma(beta) fits", "all stages in order"};
  std::vector<CLI::App*> subs;
  for (std::size_t i = 0; i < std::size(commands); ++i) {
    subs.push_back(app.add_subcommand(commands[i].first, help[i]));
    add_common(subs.back());
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : kExitConfig;
  }

  try {
    const RunConfig cfg = parse_config(merged_config(o));
    std::vector<Stage> stages;
    for (std::size_t i = 0; i < subs.size(); ++i) {
      if (subs[i]->parsed()) stages = commands[i].second;
    }
    RunOptions ro;
    ro.resume = o.resume;
    run_stages(cfg, stages, ro);
    std::cerr << "wrote " << (run_directory(cfg) / "manifest.json").string() << "\n";
    return 0;
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return e.code() == ErrorCode::ConfigError ? kExitConfig : kExitNumerical;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitNumerical;
  }
}
