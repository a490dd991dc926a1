#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <functional>
#include <string>
#include <vector>

#include "json.hpp"
#include "stadloc/fitting.hpp"
#include "stadloc/transport.hpp"

namespace stadloc {

namespace fs = std::filesystem;
using json = nlohmann::json;

/// One k interval solved for every epsilon.
struct KWindow {
  double k_lo = 0.0;
  double k_hi = 0.0;
  double mid() const { return 0.5 * (k_lo + k_hi); }
};

struct RunConfig {
  std::string run_id = "run";
  std::vector<double> epsilons;
  std::vector<KWindow> windows;
  std::size_t nq = 400;
  std::size_t np = 400;
  double A0 = 0.7;
  A0Mode a0_mode = A0Mode::Fixed;
  std::vector<TransportCriterion> criteria{std::begin(kAllCriteria), std::end(kAllCriteria)};
  /// Criterion whose N_T defines alpha = 2 k / N_T.
  TransportCriterion alpha_criterion = TransportCriterion::ExpModel;
  std::uint64_t seed = 1;
  fs::path out = "out";
  int jobs = 1;

  std::size_t particles = 2000;
  /// 0: ceil(3000 (0.1/epsilon)^2.3), at least 2000.
  std::size_t collisions = 0;

  /// Block size for windowed <A> and sigma.
  std::size_t stat_window = 100;
  std::size_t nbins = 35;
  /// Every n-th state of a window gets its Husimi grid written (0: none).
  std::size_t husimi_save_every = 50;
  std::size_t beta_min_samples = 200;
  std::size_t beta_bootstrap = 0;
  std::size_t brody_min_spacings = 100;
  std::size_t brody_bootstrap = 200;

  /// The config as given, before defaults; copied into every manifest.
  json source = json::object();
};

/// Validates and fills defaults. Throws Error(ConfigError) naming the field.
RunConfig parse_config(const json& j);
json to_json(const RunConfig& cfg);
std::size_t default_collisions(double epsilon);

enum class Stage { Transport, Solve, Husimi, Localize, Fit };
inline constexpr Stage kAllStages[] = {Stage::Transport, Stage::Solve, Stage::Husimi, Stage::Localize, Stage::Fit};
std::string_view to_string(Stage s);

struct StageResult {
  Stage stage = Stage::Transport;
  bool skipped = false;
  double seconds = 0.0;
  /// Paths relative to the run directory.
  std::vector<std::string> files;
};

struct RunOptions {
  bool resume = false;
  /// Progress lines; defaults to stderr.
  std::function<void(const std::string&)> log;
};

fs::path run_directory(const RunConfig& cfg);

/// Runs the given stages in order. Inputs of a stage must already exist in the
/// run directory (from this call or an earlier one). With resume, a stage whose
/// stage.json records the same config hash and whose files still match their
/// checksums is skipped. The manifest is written last, atomically; on failure
/// a manifest with "complete": false is written and the error rethrown.
std::vector<StageResult> run_stages(const RunConfig& cfg, const std::vector<Stage>& stages,
                                    const RunOptions& opts = {});

/// File names of per-cell outputs, e.g. cell_tag(0.1, 2) == "eps0.1_w2".
std::string cell_tag(double epsilon, std::size_t window);

}  // namespace stadloc
