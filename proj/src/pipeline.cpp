#include "stadloc/pipeline.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <iostream>
#include <map>
#include <set>
#include <sstream>

#include "stadloc/eigensolver.hpp"
#include "stadloc/error.hpp"
#include "stadloc/husimi.hpp"
#include "stadloc/io.hpp"
#include "stadloc/localization.hpp"
#include "stadloc/parallel.hpp"
#include "stadloc/spectral.hpp"

#ifndef STADLOC_VERSION
#define STADLOC_VERSION "0.0.0"
#endif

namespace stadloc {

namespace {

[[noreturn]] void config_error(const std::string& what) { throw Error(ErrorCode::ConfigError, what); }

template <class T>
T get_as(const json& j, const std::string& key) {
  try {
    return j.get<T>();
  } catch (const json::exception&) {
    config_error("field '" + key + "' has the wrong type");
  }
}

double get_positive(const json& j, const std::string& key) {
  const double v = get_as<double>(j, key);
  if (!std::isfinite(v) || !(v > 0.0)) config_error("field '" + key + "' must be a positive number");
  return v;
}

std::size_t get_count(const json& j, const std::string& key, std::size_t min_value) {
  if (!j.is_number_integer() && !j.is_number_unsigned()) config_error("field '" + key + "' must be an integer");
  if (j.is_number_integer() && j.get<long long>() < 0) config_error("field '" + key + "' must be non-negative");
  const auto v = j.get<std::size_t>();
  if (v < min_value) config_error("field '" + key + "' must be at least " + std::to_string(min_value));
  return v;
}

void reject_unknown(const json& j, const std::set<std::string>& known, const std::string& where) {
  for (const auto& [key, value] : j.items()) {
    if (!known.count(key)) config_error("unknown field '" + where + key + "'");
  }
}

std::string tag(double v) { return format_double(v); }

struct Clock {
  std::chrono::steady_clock::time_point t0 = std::chrono::steady_clock::now();
  double seconds() const {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  }
};

// Keys whose values a stage's outputs depend on. Later stages include the
// keys of the stages they read from.
json stage_inputs(const RunConfig& cfg, Stage stage) {
  const json all = to_json(cfg);
  std::vector<std::string> keys;
  switch (stage) {
    case Stage::Fit:
      keys.insert(keys.end(), {"alpha_criterion", "beta", "brody", "A0", "a0_mode"});
      [[fallthrough]];
    case Stage::Localize:
      keys.insert(keys.end(), {"stat_window", "nbins", "A0", "a0_mode"});
      [[fallthrough]];
    case Stage::Husimi:
      keys.insert(keys.end(), {"grid", "husimi_save_every"});
      [[fallthrough]];
    case Stage::Solve:
      keys.insert(keys.end(), {"epsilons", "windows"});
      break;
    case Stage::Transport:
      keys.insert(keys.end(), {"epsilons", "transport", "criteria", "alpha_criterion", "seed"});
      break;
  }
  if (stage == Stage::Fit) keys.insert(keys.end(), {"transport", "criteria", "seed"});
  json out = json::object();
  out["stage"] = std::string(to_string(stage));
  for (const auto& k : keys) out[k] = all.at(k);
  return out;
}

std::string config_hash(const RunConfig& cfg, Stage stage) { return sha256_hex(stage_inputs(cfg, stage).dump()); }

json file_entry(const fs::path& run_dir, const std::string& rel) {
  const fs::path p = run_dir / rel;
  return {{"path", rel}, {"sha256", sha256_file(p)}, {"bytes", fs::file_size(p)}};
}

bool stage_is_current(const RunConfig& cfg, const fs::path& run_dir, Stage stage, StageResult& result) {
  const fs::path record = run_dir / std::string(to_string(stage)) / "stage.json";
  if (!fs::exists(record)) return false;
  json j;
  try {
    j = json::parse(read_text(record));
  } catch (const json::exception&) {
    return false;
  }
  if (j.value("config_hash", "") != config_hash(cfg, stage)) return false;
  std::vector<std::string> files;
  for (const auto& f : j.at("files")) {
    const std::string rel = f.at("path").get<std::string>();
    const fs::path p = run_dir / rel;
    if (!fs::exists(p) || sha256_file(p) != f.at("sha256").get<std::string>()) return false;
    files.push_back(rel);
  }
  result.files = std::move(files);
  return true;
}

// Collects files written by one stage and records them in stage.json.
class StageWriter {
 public:
  StageWriter(const fs::path& run_dir, Stage stage) : run_dir_(run_dir), stage_(stage) {
    dir_ = run_dir / std::string(to_string(stage));
    fs::remove_all(dir_);
    fs::create_directories(dir_);
  }
  fs::path path(const std::string& name) {
    names_.push_back(std::string(to_string(stage_)) + "/" + name);
    return dir_ / name;
  }
  fs::path input(Stage from, const std::string& name) const {
    const fs::path p = run_dir_ / std::string(to_string(from)) / name;
    if (!fs::exists(p)) {
      config_error("missing input " + p.string() + "; run the " + std::string(to_string(from)) + " stage first");
    }
    return p;
  }
  void text(const std::string& name, const std::string& content) { write_text_atomic(path(name), content); }
  std::vector<std::string> finish(const RunConfig& cfg, double seconds) {
    json files = json::array();
    for (const auto& rel : names_) files.push_back(file_entry(run_dir_, rel));
    const json record = {{"stage", std::string(to_string(stage_))},
                         {"config_hash", config_hash(cfg, stage_)},
                         {"seconds", seconds},
                         {"files", files}};
    write_text_atomic(dir_ / "stage.json", record.dump(2) + "\n");
    return names_;
  }

 private:
  fs::path run_dir_;
  fs::path dir_;
  Stage stage_;
  std::vector<std::string> names_;
};

using Logger = std::function<void(const std::string&)>;

// ---------------------------------------------------------------- transport

void stage_transport(const RunConfig& cfg, StageWriter& w, const Logger& log) {
  std::string table = "epsilon,criterion,N_T,fit_residual,status\n";
  std::map<TransportCriterion, std::vector<std::pair<double, double>>> scaling;
  for (std::size_t i = 0; i < cfg.epsilons.size(); ++i) {
    const double eps = cfg.epsilons[i];
    const std::size_t nc = cfg.collisions ? cfg.collisions : default_collisions(eps);
    log("transport: epsilon " + tag(eps) + ", " + std::to_string(cfg.particles) + " particles, " +
        std::to_string(nc) + " collisions");
    const DiffusionCurve curve = simulate_ensemble(StadiumShape(eps), cfg.particles, nc, cfg.seed + i, cfg.jobs);
    write_diffusion_csv(w.path("diffusion_eps" + tag(eps) + ".csv"), curve);
    json side = {{"epsilon", eps},
                 {"n_particles", curve.n_particles},
                 {"n_collisions", nc},
                 {"seed", curve.seed},
                 {"criteria", json::object()}};
    for (const TransportCriterion c : cfg.criteria) {
      const std::string name(to_string(c));
      try {
        const TransportEstimate est = estimate_NT(curve, c);
        side["criteria"][name] = {{"N_T", est.N_T}, {"fit_residual", est.fit_residual}, {"status", "ok"}};
        table += tag(eps) + "," + name + "," + format_double(est.N_T) + "," + format_double(est.fit_residual) + ",ok\n";
        scaling[c].emplace_back(std::log(eps), std::log(est.N_T));
      } catch (const Error& e) {
        const std::string status(to_string(e.code()));
        side["criteria"][name] = {{"status", status}};
        table += tag(eps) + "," + name + ",nan,nan," + status + "\n";
      }
    }
    w.text("diffusion_eps" + tag(eps) + ".json", side.dump(2) + "\n");
  }
  w.text("transport_estimates.csv", table);

  // N_T ~ epsilon^slope by least squares in log-log.
  std::string summary = "criterion,slope,intercept,n_points\n";
  for (const auto& [c, pts] : scaling) {
    if (pts.size() < 2) continue;
    double mx = 0, my = 0;
    for (const auto& [x, y] : pts) {
      mx += x;
      my += y;
    }
    mx /= static_cast<double>(pts.size());
    my /= static_cast<double>(pts.size());
    double sxx = 0, sxy = 0;
    for (const auto& [x, y] : pts) {
      sxx += (x - mx) * (x - mx);
      sxy += (x - mx) * (y - my);
    }
    if (sxx == 0.0) continue;
    const double slope = sxy / sxx;
    summary += std::string(to_string(c)) + "," + format_double(slope) + "," + format_double(my - slope * mx) + "," +
               std::to_string(pts.size()) + "\n";
  }
  w.text("transport_scaling.csv", summary);
}

// -------------------------------------------------------------------- solve

void stage_solve(const RunConfig& cfg, StageWriter& w, const Logger& log) {
  std::string audit = "epsilon,window,k_lo,k_hi,count,weyl,difference,max_tension\n";
  for (const double eps : cfg.epsilons) {
    const StadiumShape shape(eps);
    for (std::size_t wi = 0; wi < cfg.windows.size(); ++wi) {
      const KWindow& kw = cfg.windows[wi];
      const Clock clock;
      const WindowSolution sol = solve_range(shape, kw.k_lo, kw.k_hi, {}, cfg.jobs);
      const std::string t = cell_tag(eps, wi);
      write_levels_csv(w.path("levels_" + t + ".csv"), sol.spectrum);
      std::vector<BoundaryFunction> bfs;
      double worst = 0.0;
      for (const auto& st : sol.states) {
        bfs.push_back(st.boundary);
        worst = std::max(worst, st.tension);
      }
      write_bndf(w.path("states_" + t + ".bndf"), bfs);
      const double weyl = weyl_count(shape, kw.k_hi) - weyl_count(shape, kw.k_lo);
      const auto count = sol.spectrum.levels.size();
      audit += tag(eps) + "," + std::to_string(wi) + "," + tag(kw.k_lo) + "," + tag(kw.k_hi) + "," +
               std::to_string(count) + "," + format_double(weyl) + "," +
               format_double(static_cast<double>(count) - weyl) + "," + format_double(worst) + "\n";
      std::ostringstream msg;
      msg << "solve: " << t << " [" << kw.k_lo << ", " << kw.k_hi << "] " << count << " levels (Weyl " << weyl
          << ") in " << clock.seconds() << " s";
      log(msg.str());
    }
  }
  w.text("weyl_audit.csv", audit);
}

// ------------------------------------------------------------------- husimi

void stage_husimi(const RunConfig& cfg, StageWriter& w, const Logger& log) {
  for (const double eps : cfg.epsilons) {
    const StadiumShape shape(eps);
    for (std::size_t wi = 0; wi < cfg.windows.size(); ++wi) {
      const std::string t = cell_tag(eps, wi);
      const auto states = read_bndf(w.input(Stage::Solve, "states_" + t + ".bndf"));
      const Clock clock;
      std::vector<LocalizationRecord> records(states.size());
      std::vector<HusimiGrid> saved(states.size());
      const bool save = cfg.husimi_save_every > 0;
      parallel_for(states.size(), cfg.jobs, [&](std::size_t i) {
        HusimiGrid g = husimi_grid(shape, states[i], cfg.nq, cfg.np);
        records[i] = entropy_measure(g);
        if (save && i % cfg.husimi_save_every == 0) saved[i] = std::move(g);
      });
      for (std::size_t i = 0; save && i < states.size(); i += cfg.husimi_save_every) {
        write_husg(w.path("husimi_" + t + "_s" + std::to_string(i) + ".husg"), saved[i]);
      }
      write_localization_csv(w.path("measures_" + t + ".csv"), records);
      std::ostringstream msg;
      msg << "husimi: " << t << " " << states.size() << " states in " << clock.seconds() << " s";
      log(msg.str());
    }
  }
}

// ----------------------------------------------------------------- localize

double cell_A0(const RunConfig& cfg, const std::vector<LocalizationRecord>& recs) {
  if (cfg.a0_mode == A0Mode::Fixed) return cfg.A0;
  std::vector<double> a;
  for (const auto& r : recs) a.push_back(r.A);
  return max_sample_A0(a);
}

void stage_localize(const RunConfig& cfg, StageWriter& w, const Logger& log) {
  std::string blocks = "epsilon,window,k_mid,mean_A,mean_nIPR,sigma_A,count\n";
  std::string status = "cell,status,detail\n";
  for (const double eps : cfg.epsilons) {
    for (std::size_t wi = 0; wi < cfg.windows.size(); ++wi) {
      const std::string t = cell_tag(eps, wi);
      const auto recs = read_localization_csv(w.input(Stage::Husimi, "measures_" + t + ".csv"));
      std::string win = "k_mid,mean_A,sigma_A,mean_nIPR,count\n";
      if (recs.size() >= cfg.stat_window) {
        for (const WindowStat& s : windowed_stats(recs, cfg.stat_window)) {
          win += format_double(s.k_mid) + "," + format_double(s.mean) + "," + format_double(s.sigma) + "," +
                 format_double(s.mean_nipr) + "," + std::to_string(s.count) + "\n";
          blocks += tag(eps) + "," + std::to_string(wi) + "," + format_double(s.k_mid) + "," + format_double(s.mean) +
                    "," + format_double(s.mean_nipr) + "," + format_double(s.sigma) + "," + std::to_string(s.count) +
                    "\n";
        }
      } else {
        log("localize: " + t + " has " + std::to_string(recs.size()) + " states, fewer than one block");
      }
      w.text("windowed_" + t + ".csv", win);
      if (recs.size() < 100) {
        log("localize: " + t + " has too few states for P(A)");
        status += t + ",skipped,fewer than 100 states\n";
        continue;
      }
      MeasureDistribution d;
      try {
        d = distribution(recs, cell_A0(cfg, recs), cfg.nbins, eps, cfg.windows[wi].mid());
      } catch (const Error& e) {
        // A0 too small for this cell: report it, keep going with the others
        if (e.code() != ErrorCode::SampleExceedsA0) throw;
        log("localize: " + t + " " + e.what());
        status += t + "," + std::string(to_string(e.code())) + ",\"" + e.what() + "\"\n";
        continue;
      }
      status += t + ",ok,\n";
      std::string hist = "A_lo,A_hi,density\n";
      for (std::size_t b = 0; b < d.density.size(); ++b) {
        hist += format_double(d.edges[b]) + "," + format_double(d.edges[b + 1]) + "," + format_double(d.density[b]) +
                "\n";
      }
      w.text("pa_hist_" + t + ".csv", hist);
      std::string cum = "A,W\n";
      for (std::size_t i = 0; i < d.sorted.size(); ++i) {
        cum += format_double(d.sorted[i]) + "," + format_double(d.cumulative[i]) + "\n";
      }
      w.text("wa_cum_" + t + ".csv", cum);
      log("localize: " + t + " " + std::to_string(recs.size()) + " records");
    }
  }
  w.text("nipr_vs_A.csv", blocks);
  w.text("distribution_status.csv", status);
}

// ---------------------------------------------------------------------- fit

std::vector<std::vector<std::string>> read_csv_rows(const fs::path& p) {
  std::istringstream in(read_text(p));
  std::string line;
  std::vector<std::vector<std::string>> rows;
  std::getline(in, line);
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::vector<std::string> cells;
    std::istringstream ls(line);
    std::string c;
    while (std::getline(ls, c, ',')) cells.push_back(c);
    rows.push_back(cells);
  }
  return rows;
}

struct Cell {
  double epsilon = 0.0;
  std::size_t window = 0;
  double k_mid = 0.0;
  double alpha = 0.0;
  double mean_A = 0.0;
  double sigma_A = 0.0;
  bool beta_ok = false;
  bool brody_ok = false;
  double brody = 0.0;
};

void stage_fit(const RunConfig& cfg, StageWriter& w, const Logger& log) {
  const std::string crit(to_string(cfg.alpha_criterion));
  std::map<double, double> NT;
  for (const auto& row : read_csv_rows(w.input(Stage::Transport, "transport_estimates.csv"))) {
    if (row.size() == 5 && row[1] == crit && row[4] == "ok") NT[std::stod(row[0])] = std::stod(row[2]);
  }

  std::string table =
      "epsilon,k_lo,k_hi,k_mid,criterion,N_T,alpha,n,mean_A,sigma_A,a,b,A0,C,fit_mean_A,fit_sigma_A,ks_D,ks_pvalue,"
      "beta_status,brody_beta,brody_ci_lo,brody_ci_hi,brody_n,brody_status\n";
  std::string ab = "epsilon,k_mid,alpha,a,b\n";
  std::vector<Cell> cells;
  json summary = {{"alpha_criterion", crit}, {"cells", json::array()}};

  for (const double eps : cfg.epsilons) {
    double nt = std::numeric_limits<double>::quiet_NaN();
    for (const auto& [e, v] : NT) {
      if (std::abs(e - eps) <= 1e-12 * eps) nt = v;
    }
    if (!std::isfinite(nt)) {
      throw Error(ErrorCode::NotSaturated, "no " + crit + " transport estimate for epsilon " + tag(eps));
    }
    for (std::size_t wi = 0; wi < cfg.windows.size(); ++wi) {
      const KWindow& kw = cfg.windows[wi];
      const std::string t = cell_tag(eps, wi);
      const auto recs = read_localization_csv(w.input(Stage::Husimi, "measures_" + t + ".csv"));
      Cell cell;
      cell.epsilon = eps;
      cell.window = wi;
      cell.k_mid = kw.mid();
      cell.alpha = 2.0 * kw.mid() / nt;
      double s1 = 0, s2 = 0;
      for (const auto& r : recs) s1 += r.A;
      const double n = static_cast<double>(recs.size());
      cell.mean_A = recs.empty() ? 0.0 : s1 / n;
      for (const auto& r : recs) s2 += (r.A - cell.mean_A) * (r.A - cell.mean_A);
      cell.sigma_A = recs.empty() ? 0.0 : std::sqrt(s2 / n);

      std::string beta_cols = ",,,,,,,";
      std::string beta_status = "ok";
      try {
        if (recs.size() < 100) throw Error(ErrorCode::InvalidArgument, "fewer than 100 states");
        BetaFitOptions bo;
        bo.A0 = cell_A0(cfg, recs);
        bo.min_samples = cfg.beta_min_samples;
        bo.bootstrap = cfg.beta_bootstrap;
        bo.seed = cfg.seed;
        const BetaFit f = fit_beta(distribution(recs, bo.A0, cfg.nbins, eps, kw.mid()), bo);
        const BetaMoments m = beta_moments(f);
        beta_cols = format_double(f.a) + "," + format_double(f.b) + "," + format_double(f.A0) + "," +
                    format_double(f.C) + "," + format_double(m.mean) + "," + format_double(m.sigma) + "," +
                    format_double(f.gof) + "," + format_double(f.ks_pvalue);
        ab += tag(eps) + "," + format_double(kw.mid()) + "," + format_double(cell.alpha) + "," + format_double(f.a) +
              "," + format_double(f.b) + "\n";
        cell.beta_ok = true;
      } catch (const Error& e) {
        beta_status = std::string(to_string(e.code()));
        log("fit: " + t + " beta fit skipped: " + e.what());
      }

      std::string brody_cols = ",,,";
      std::string brody_status = "ok";
      try {
        const SpectrumWindow levels = read_levels_csv(w.input(Stage::Solve, "levels_" + t + ".csv"), eps);
        const UnfoldedSpectrum u = unfold(levels, static_cast<int>(wi));
        BrodyFitOptions bo;
        bo.min_spacings = cfg.brody_min_spacings;
        bo.bootstrap = cfg.brody_bootstrap;
        bo.seed = cfg.seed;
        const BrodyFit f = fit_brody(u.spacings, bo);
        brody_cols = format_double(f.beta) + "," + format_double(f.ci_lo) + "," + format_double(f.ci_hi) + "," +
                     std::to_string(f.n);
        cell.brody = f.beta;
        cell.brody_ok = true;
      } catch (const Error& e) {
        brody_status = std::string(to_string(e.code()));
        log("fit: " + t + " Brody fit skipped: " + e.what());
      }

      table += tag(eps) + "," + tag(kw.k_lo) + "," + tag(kw.k_hi) + "," + format_double(kw.mid()) + "," + crit + "," +
               format_double(nt) + "," + format_double(cell.alpha) + "," + std::to_string(recs.size()) + "," +
               format_double(cell.mean_A) + "," + format_double(cell.sigma_A) + "," + beta_cols + "," + beta_status +
               "," + brody_cols + "," + brody_status + "\n";
      summary["cells"].push_back({{"cell", t}, {"alpha", cell.alpha}, {"beta_status", beta_status},
                                  {"brody_status", brody_status}});
      cells.push_back(cell);
    }
  }
  w.text("table1.csv", table);
  w.text("ab_vs_alpha.csv", ab);

  // <A>(alpha) and beta(alpha) rational fits.
  std::string rational = "series,epsilon,k_mid,alpha,observed,fitted\n";
  auto rational_series = [&](const std::string& name, auto value, auto usable) {
    std::vector<std::pair<double, double>> pts;
    std::vector<const Cell*> used;
    for (const auto& c : cells) {
      if (!usable(c)) continue;
      pts.emplace_back(c.alpha, value(c));
      used.push_back(&c);
    }
    try {
      const RationalFit f = fit_rational(pts);
      summary[name] = {{"limit", f.limit}, {"s", f.s}, {"residual", f.residual}, {"n", f.n}};
      for (const Cell* c : used) {
        rational += name + "," + tag(c->epsilon) + "," + format_double(c->k_mid) + "," + format_double(c->alpha) +
                    "," + format_double(value(*c)) + "," + format_double(rational_model(c->alpha, f.limit, f.s)) +
                    "\n";
      }
    } catch (const Error& e) {
      summary[name] = {{"skipped", e.what()}};
      for (const Cell* c : used) {
        rational += name + "," + tag(c->epsilon) + "," + format_double(c->k_mid) + "," + format_double(c->alpha) +
                    "," + format_double(value(*c)) + ",\n";
      }
    }
  };
  rational_series("mean_A", [](const Cell& c) { return c.mean_A; }, [](const Cell& c) { return c.mean_A > 0.0; });
  rational_series("brody_beta", [](const Cell& c) { return c.brody; }, [](const Cell& c) { return c.brody_ok; });
  w.text("rational_fit.csv", rational);

  // sigma(beta), beta clipped into [0, 1].
  std::vector<std::pair<double, double>> sb;
  std::vector<const Cell*> used;
  for (const auto& c : cells) {
    if (!c.brody_ok) continue;
    sb.emplace_back(std::clamp(c.brody, 0.0, 1.0), c.sigma_A);
    used.push_back(&c);
  }
  std::string sigma = "epsilon,k_mid,beta,sigma_A,fitted\n";
  SigmaCurveFit sf;
  bool sf_ok = false;
  try {
    sf = fit_sigma_curve(sb);
    sf_ok = true;
    summary["sigma_beta"] = {{"C", sf.C}, {"a", sf.a}, {"b", sf.b}, {"residual", sf.residual}};
  } catch (const Error& e) {
    summary["sigma_beta"] = {{"skipped", e.what()}};
  }
  for (std::size_t i = 0; i < sb.size(); ++i) {
    sigma += tag(used[i]->epsilon) + "," + format_double(used[i]->k_mid) + "," + format_double(sb[i].first) + "," +
             format_double(sb[i].second) + "," + (sf_ok ? format_double(sigma_curve(sb[i].first, sf)) : "") + "\n";
  }
  w.text("sigma_beta.csv", sigma);
  w.text("fit_summary.json", summary.dump(2) + "\n");
  log("fit: " + std::to_string(cells.size()) + " cells");
}

void run_stage(const RunConfig& cfg, Stage stage, StageWriter& w, const Logger& log) {
  switch (stage) {
    case Stage::Transport:
      return stage_transport(cfg, w, log);
    case Stage::Solve:
      return stage_solve(cfg, w, log);
    case Stage::Husimi:
      return stage_husimi(cfg, w, log);
    case Stage::Localize:
      return stage_localize(cfg, w, log);
    case Stage::Fit:
      return stage_fit(cfg, w, log);
  }
}

void write_manifest(const RunConfig& cfg, const fs::path& run_dir, const std::vector<StageResult>& done,
                    bool complete, const std::string& failure) {
  json stages = json::array();
  for (const Stage s : kAllStages) {
    const fs::path record = run_dir / std::string(to_string(s)) / "stage.json";
    if (!fs::exists(record)) continue;
    json r = json::parse(read_text(record));
    json entry = {{"name", std::string(to_string(s))}, {"files", r.at("files")}, {"config_hash", r.at("config_hash")}};
    entry["seconds"] = r.at("seconds");
    entry["ran"] = false;
    for (const auto& d : done) {
      if (d.stage != s) continue;
      entry["ran"] = !d.skipped;
      entry["skipped"] = d.skipped;
      entry["seconds"] = d.seconds;
    }
    stages.push_back(entry);
  }
  json m = {{"tool", "stadloc"},
            {"version", STADLOC_VERSION},
            {"run_id", cfg.run_id},
            {"complete", complete},
            {"config", cfg.source},
            {"resolved_config", to_json(cfg)},
            {"stages", stages}};
  if (!failure.empty()) m["failure"] = failure;
  write_text_atomic(run_dir / "manifest.json", m.dump(2) + "\n");
}

}  // namespace

std::string_view to_string(Stage s) {
  switch (s) {
    case Stage::Transport:
      return "transport";
    case Stage::Solve:
      return "solve";
    case Stage::Husimi:
      return "husimi";
    case Stage::Localize:
      return "localize";
    case Stage::Fit:
      return "fit";
  }
  return "?";
}

std::string cell_tag(double epsilon, std::size_t window) { return "eps" + tag(epsilon) + "_w" + std::to_string(window); }

std::size_t default_collisions(double epsilon) {
  const double n = std::ceil(3000.0 * std::pow(0.1 / epsilon, 2.3));
  return static_cast<std::size_t>(std::max(2000.0, n));
}

RunConfig parse_config(const json& j) {
  if (!j.is_object()) config_error("config must be a JSON object");
  reject_unknown(j,
                 {"run_id", "epsilons", "windows", "k0", "k0_width", "grid", "A0", "a0_mode", "criteria",
                  "alpha_criterion", "seed", "out", "jobs", "transport", "stat_window", "nbins", "husimi_save_every",
                  "beta", "brody"},
                 "");
  RunConfig cfg;
  cfg.source = j;
  if (j.contains("run_id")) {
    cfg.run_id = get_as<std::string>(j["run_id"], "run_id");
    if (cfg.run_id.empty() || cfg.run_id.find_first_of("/\\") != std::string::npos || cfg.run_id == "." ||
        cfg.run_id == "..") {
      config_error("run_id must be a plain directory name");
    }
  }

  if (!j.contains("epsilons") || !j["epsilons"].is_array()) config_error("field 'epsilons' must be a list");
  for (const auto& e : j["epsilons"]) cfg.epsilons.push_back(get_positive(e, "epsilons"));
  if (cfg.epsilons.empty()) config_error("field 'epsilons' is empty");
  {
    auto sorted = cfg.epsilons;
    std::sort(sorted.begin(), sorted.end());
    if (std::adjacent_find(sorted.begin(), sorted.end()) != sorted.end()) config_error("duplicate epsilon");
  }

  if (j.contains("windows") && j.contains("k0")) config_error("give either 'windows' or 'k0', not both");
  if (j.contains("windows")) {
    if (!j["windows"].is_array()) config_error("field 'windows' must be a list");
    for (const auto& wj : j["windows"]) {
      if (!wj.is_object()) config_error("each window must be an object");
      reject_unknown(wj, {"center", "half_width", "k_lo", "k_hi"}, "windows.");
      KWindow kw;
      if (wj.contains("center")) {
        const double c = get_positive(wj["center"], "windows.center");
        if (!wj.contains("half_width")) config_error("window with 'center' needs 'half_width'");
        const double h = get_positive(wj["half_width"], "windows.half_width");
        kw = {c - h, c + h};
      } else if (wj.contains("k_lo") && wj.contains("k_hi")) {
        kw = {get_positive(wj["k_lo"], "windows.k_lo"), get_positive(wj["k_hi"], "windows.k_hi")};
      } else {
        config_error("window needs 'center'/'half_width' or 'k_lo'/'k_hi'");
      }
      if (!(kw.k_lo > 0.0) || !(kw.k_hi > kw.k_lo)) config_error("window must satisfy 0 < k_lo < k_hi");
      cfg.windows.push_back(kw);
    }
  } else if (j.contains("k0")) {
    if (!j["k0"].is_array()) config_error("field 'k0' must be a list");
    if (!j.contains("k0_width")) config_error("field 'k0' needs 'k0_width'");
    const double width = get_positive(j["k0_width"], "k0_width");
    for (const auto& k : j["k0"]) {
      const double k0 = get_positive(k, "k0");
      cfg.windows.push_back({k0, k0 + width});
    }
  }
  if (cfg.windows.empty()) config_error("no k windows given ('windows' or 'k0')");

  if (j.contains("grid")) {
    const json& g = j["grid"];
    if (!g.is_object()) config_error("field 'grid' must be an object");
    reject_unknown(g, {"nq", "np"}, "grid.");
    if (g.contains("nq")) cfg.nq = get_count(g["nq"], "grid.nq", 2);
    if (g.contains("np")) cfg.np = get_count(g["np"], "grid.np", 2);
  }
  if (j.contains("A0")) {
    cfg.A0 = get_positive(j["A0"], "A0");
    if (cfg.A0 > 1.0) config_error("A0 must lie in (0, 1]");
  }
  if (j.contains("a0_mode")) {
    const auto m = get_as<std::string>(j["a0_mode"], "a0_mode");
    if (m == "fixed") {
      cfg.a0_mode = A0Mode::Fixed;
    } else if (m == "max_sample") {
      cfg.a0_mode = A0Mode::MaxSample;
    } else {
      config_error("a0_mode must be 'fixed' or 'max_sample'");
    }
  }
  auto criterion = [](const json& c, const std::string& key) {
    try {
      return transport_criterion_from_string(get_as<std::string>(c, key));
    } catch (const Error&) {
      config_error("unknown transport criterion in '" + key + "'");
    }
  };
  if (j.contains("criteria")) {
    if (!j["criteria"].is_array()) config_error("field 'criteria' must be a list");
    cfg.criteria.clear();
    for (const auto& c : j["criteria"]) {
      const auto tc = criterion(c, "criteria");
      if (std::find(cfg.criteria.begin(), cfg.criteria.end(), tc) == cfg.criteria.end()) cfg.criteria.push_back(tc);
    }
    if (cfg.criteria.empty()) config_error("field 'criteria' is empty");
  }
  if (j.contains("alpha_criterion")) cfg.alpha_criterion = criterion(j["alpha_criterion"], "alpha_criterion");
  if (std::find(cfg.criteria.begin(), cfg.criteria.end(), cfg.alpha_criterion) == cfg.criteria.end()) {
    cfg.criteria.push_back(cfg.alpha_criterion);
  }
  if (j.contains("seed")) cfg.seed = get_count(j["seed"], "seed", 0);
  if (j.contains("out")) cfg.out = get_as<std::string>(j["out"], "out");
  if (j.contains("jobs")) cfg.jobs = static_cast<int>(get_count(j["jobs"], "jobs", 1));
  if (j.contains("transport")) {
    const json& t = j["transport"];
    if (!t.is_object()) config_error("field 'transport' must be an object");
    reject_unknown(t, {"particles", "collisions"}, "transport.");
    if (t.contains("particles")) cfg.particles = get_count(t["particles"], "transport.particles", 1000);
    if (t.contains("collisions")) cfg.collisions = get_count(t["collisions"], "transport.collisions", 0);
  }
  if (j.contains("stat_window")) cfg.stat_window = get_count(j["stat_window"], "stat_window", 1);
  if (j.contains("nbins")) cfg.nbins = get_count(j["nbins"], "nbins", 1);
  if (j.contains("husimi_save_every")) cfg.husimi_save_every = get_count(j["husimi_save_every"], "husimi_save_every", 0);
  if (j.contains("beta")) {
    const json& b = j["beta"];
    if (!b.is_object()) config_error("field 'beta' must be an object");
    reject_unknown(b, {"min_samples", "bootstrap"}, "beta.");
    if (b.contains("min_samples")) cfg.beta_min_samples = get_count(b["min_samples"], "beta.min_samples", 2);
    if (b.contains("bootstrap")) cfg.beta_bootstrap = get_count(b["bootstrap"], "beta.bootstrap", 0);
  }
  if (j.contains("brody")) {
    const json& b = j["brody"];
    if (!b.is_object()) config_error("field 'brody' must be an object");
    reject_unknown(b, {"min_spacings", "bootstrap"}, "brody.");
    if (b.contains("min_spacings")) cfg.brody_min_spacings = get_count(b["min_spacings"], "brody.min_spacings", 2);
    if (b.contains("bootstrap")) cfg.brody_bootstrap = get_count(b["bootstrap"], "brody.bootstrap", 0);
  }
  return cfg;
}

json to_json(const RunConfig& cfg) {
  json windows = json::array();
  for (const auto& w : cfg.windows) windows.push_back({{"k_lo", w.k_lo}, {"k_hi", w.k_hi}});
  json criteria = json::array();
  for (const auto c : cfg.criteria) criteria.push_back(std::string(to_string(c)));
  return {{"run_id", cfg.run_id},
          {"epsilons", cfg.epsilons},
          {"windows", windows},
          {"grid", {{"nq", cfg.nq}, {"np", cfg.np}}},
          {"A0", cfg.A0},
          {"a0_mode", cfg.a0_mode == A0Mode::Fixed ? "fixed" : "max_sample"},
          {"criteria", criteria},
          {"alpha_criterion", std::string(to_string(cfg.alpha_criterion))},
          {"seed", cfg.seed},
          {"out", cfg.out.string()},
          {"jobs", cfg.jobs},
          {"transport", {{"particles", cfg.particles}, {"collisions", cfg.collisions}}},
          {"stat_window", cfg.stat_window},
          {"nbins", cfg.nbins},
          {"husimi_save_every", cfg.husimi_save_every},
          {"beta", {{"min_samples", cfg.beta_min_samples}, {"bootstrap", cfg.beta_bootstrap}}},
          {"brody", {{"min_spacings", cfg.brody_min_spacings}, {"bootstrap", cfg.brody_bootstrap}}}};
}

fs::path run_directory(const RunConfig& cfg) { return cfg.out / cfg.run_id; }

std::vector<StageResult> run_stages(const RunConfig& cfg, const std::vector<Stage>& stages, const RunOptions& opts) {
  const Logger log = opts.log ? opts.log : Logger([](const std::string& s) { std::cerr << s << "\n"; });
  const fs::path run_dir = run_directory(cfg);
  fs::create_directories(run_dir);
  std::vector<StageResult> done;
  for (const Stage s : stages) {
    StageResult r;
    r.stage = s;
    if (opts.resume && stage_is_current(cfg, run_dir, s, r)) {
      r.skipped = true;
      log(std::string(to_string(s)) + ": up to date, skipped");
      done.push_back(r);
      continue;
    }
    const Clock clock;
    try {
      StageWriter w(run_dir, s);
      run_stage(cfg, s, w, log);
      r.seconds = clock.seconds();
      r.files = w.finish(cfg, r.seconds);
    } catch (const std::exception& e) {
      // drop the half-written stage so a resume cannot mistake it for complete
      fs::remove(run_dir / std::string(to_string(s)) / "stage.json");
      write_manifest(cfg, run_dir, done, false, std::string(to_string(s)) + ": " + e.what());
      throw;
    }
    done.push_back(r);
  }
  write_manifest(cfg, run_dir, done, true, "");
  return done;
}

}  // namespace stadloc
