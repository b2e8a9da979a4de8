// SPDX-License-Identifier: Apache-2.0
// nfsense: command-line driver for the near-field sensing toolkit.

#include <CLI11.hpp>

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <numbers>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "nfsense/bfi.hpp"
#include "nfsense/capacity.hpp"
#include "nfsense/coordinator.hpp"
#include "nfsense/experiments.hpp"
#include "nfsense/geometry.hpp"
#include "nfsense/metrics.hpp"
#include "nfsense/rng.hpp"
#include "nfsense/run_config.hpp"
#include "nfsense/scene.hpp"
#include "nfsense/sra.hpp"
#include "nfsense/tcn.hpp"
#include "nfsense/text_io.hpp"
#include "nfsense/traffic.hpp"

namespace fs = std::filesystem;
using namespace nfsense;

namespace {

/// One subcommand: every option is a string flag `--key` whose value
/// overrides the same key from --config.
struct Command {
  CLI::App* app = nullptr;
  std::set<std::string> keys{"seed", "out"};
  std::map<std::string, std::string> flags;
  std::string config_path;

  void opt(const std::string& key, const std::string& help) {
    keys.insert(key);
    std::string flag = key;
    std::replace(flag.begin(), flag.end(), '_', '-');
    app->add_option("--" + flag, flags[key], help);
  }

  RunConfig resolve() const {
    RunConfig cfg(keys);
    if (!config_path.empty()) cfg.load(config_path);
    for (const auto& [k, v] : flags)
      if (!v.empty()) cfg.set(k, v);
    return cfg;
  }
};

Command make_command(CLI::App& root, const std::string& name, const std::string& help) {
  Command c;
  c.app = root.add_subcommand(name, help);
  c.app->add_option("--config", c.config_path, "key=value settings file; flags override it");
  c.opt("seed", "RNG seed (default 1)");
  c.opt("out", "output directory (required)");
  return c;
}

fs::path out_dir(const RunConfig& cfg) {
  const auto out = cfg.get("out");
  if (!out || out->empty()) throw std::invalid_argument("--out is required");
  fs::create_directories(*out);
  return *out;
}

std::uint64_t seed_of(const RunConfig& cfg) { return cfg.get_u64("seed", 1); }

void require_file(const fs::path& p) {
  if (!fs::exists(p)) throw std::runtime_error("missing input file: " + p.string());
}

void write_file(const fs::path& p, const std::string& text) { write_text_file(p, text); }

void require_finite(double v, const std::string& what) {
  if (!std::isfinite(v)) throw std::runtime_error("non-finite result: " + what);
}

Point2D parse_point(const std::string& s) {
  const auto parts = split(s, ',');
  if (parts.size() != 2) throw std::invalid_argument("expected point 'x,y', got '" + s + "'");
  return {parse_double(parts[0]), parse_double(parts[1])};
}

/// `lo:hi:step`.
std::array<double, 3> parse_range(const std::string& s) {
  const auto parts = split(s, ':');
  if (parts.size() != 3) throw std::invalid_argument("expected range 'lo:hi:step', got '" + s + "'");
  return {parse_double(parts[0]), parse_double(parts[1]), parse_double(parts[2])};
}

RadioConfig radio_from(const RunConfig& cfg) {
  RadioConfig rc;
  rc.lambda = cfg.get_double("lambda", rc.lambda);
  rc.alpha = cfg.get_double("alpha", rc.alpha);
  rc.eta = cfg.get_double("eta", rc.eta);
  rc.b = cfg.get_double("b", rc.b);
  rc.g_tilde = cfg.get_double("g_tilde", rc.g_tilde);
  rc.validate();
  return rc;
}

void radio_options(Command& c) {
  c.opt("lambda", "wavelength in meters");
  c.opt("alpha", "path-loss exponent");
  c.opt("eta", "dynamic-channel power scale");
  c.opt("b", "dynamic-channel power floor");
  c.opt("g_tilde", "combined reflection gain");
}

SraConfig sra_for(const std::string& motion) {
  const MotionKind kind = parse_motion_kind(motion);
  return kind == MotionKind::gesture_like || kind == MotionKind::activity_like ? SraConfig::motion()
                                                                               : SraConfig::respiration();
}

Scene scene_from(const RunConfig& cfg, std::uint64_t seed) {
  if (const auto path = cfg.get("scene")) {
    require_file(*path);
    return parse_scene(read_text_file(*path));
  }
  FourUserOptions opt;
  opt.seed = seed;
  opt.duration_s = cfg.get_double("duration", opt.duration_s);
  opt.noise_std = cfg.get_double("noise_std", opt.noise_std);
  return four_user_scene(opt);
}

std::vector<double> sample_times(const RunConfig& cfg, double duration, std::uint64_t seed) {
  const std::string kind = cfg.get_string("traffic_kind", "dense");
  if (kind == "dense") return uniform_times(duration, cfg.get_double("rate", 100.0));
  TrafficModel m = TrafficModel::defaults(parse_traffic_kind(kind), seed);
  m.contention_users = static_cast<int>(cfg.get_int("contention_users", 1));
  return generate_arrivals(m, duration);
}

// feasible-map ---------------------------------------------------------------

int cmd_feasible_map(const RunConfig& cfg) {
  const fs::path out = out_dir(cfg);
  const RadioConfig rc = radio_from(cfg);
  const Point2D ap = parse_point(cfg.get_string("ap", "0,0"));
  const Point2D ue = parse_point(cfg.get_string("ue", "1,0"));
  const Point2D subject = parse_point(cfg.get_string("subject", "1.1,0"));
  const double beta = cfg.get_double("beta", 50.0);
  const auto xr = parse_range(cfg.get_string("x", "-2:2:0.05"));
  const auto yr = parse_range(cfg.get_string("y", "-2:2:0.05"));
  GridSpec grid;
  grid.x0 = xr[0];
  grid.y0 = yr[0];
  grid.dx = xr[2];
  grid.dy = yr[2];
  grid.nx = static_cast<std::size_t>(std::floor((xr[1] - xr[0]) / xr[2] + 1e-9)) + 1;
  grid.ny = static_cast<std::size_t>(std::floor((yr[1] - yr[0]) / yr[2] + 1e-9)) + 1;
  const VirMap map = vir_map(rc, ap, ue, Mover{subject, cfg.get_double("intensity", 1.0)},
                             cfg.get_double("interferer_intensity", 1.0), grid, beta);
  std::ostringstream a, b, f;
  write_raster(a, grid, map.vir_subject);
  write_raster(b, grid, map.vir_interferer);
  write_feasibility(f, grid, map.feasible);
  write_file(out / "vir_subject.txt", a.str());
  write_file(out / "vir_interferer.txt", b.str());
  write_file(out / "feasible.txt", f.str());
  const auto n = std::count(map.feasible.begin(), map.feasible.end(), true);
  std::cout << "feasible cells: " << n << " of " << map.feasible.size() << '\n';
  return 0;
}

// capacity -------------------------------------------------------------------

int cmd_capacity(const RunConfig& cfg) {
  const fs::path out = out_dir(cfg);
  CapacityQuery q;
  q.cfg = radio_from(cfg);
  q.beta = cfg.get_double("beta", q.beta);
  q.delta_r = cfg.get_double("delta_r", q.delta_r);
  q.K = static_cast<int>(cfg.get_int("k", q.K));
  const auto r = parse_range(cfg.get_string("r", "0.3:4.0:0.01"));
  const FitParams params = fit_params_for(q.cfg.alpha, q.K);
  const std::vector<CapacityRow> rows = capacity_curve(q, params, r[0], r[1], r[2]);
  std::ostringstream os;
  write_capacity_csv(os, rows);
  write_file(out / "capacity.csv", os.str());
  int best = 0;
  for (const CapacityRow& row : rows) best = std::max(best, row.n_max_fit);
  std::cout << "max n_max_fit: " << best << '\n';
  return 0;
}

// simulate -------------------------------------------------------------------

int cmd_simulate(const RunConfig& cfg) {
  const fs::path out = out_dir(cfg);
  const std::uint64_t seed = seed_of(cfg);
  const Scene scene = scene_from(cfg, seed);
  const double duration = cfg.get_double("duration", 120.0);
  write_file(out / "scene.txt", format_scene(scene));
  for (std::size_t u = 0; u < scene.users.size(); ++u) {
    const std::vector<double> times = sample_times(cfg, duration, derive_seed(seed, {0x7466, u}));
    std::ostringstream csi, ts;
    write_csi_csv(csi, render_csi(scene, u, times));
    write_sample_times(ts, times);
    write_file(out / ("link_" + std::to_string(u) + ".csv"), csi.str());
    write_file(out / ("times_" + std::to_string(u) + ".txt"), ts.str());
  }
  if (scene.baseline_observer) {
    const std::vector<double> times = sample_times(cfg, duration, derive_seed(seed, {0x7466, 0xba5e}));
    std::ostringstream csi;
    write_csi_csv(csi, render_baseline(scene, times));
    write_file(out / "baseline.csv", csi.str());
  }
  std::cout << "links: " << scene.users.size() << (scene.baseline_observer ? " + baseline" : "") << '\n';
  return 0;
}

// build-dataset --------------------------------------------------------------

int cmd_build_dataset(const RunConfig& cfg) {
  const fs::path out = out_dir(cfg);
  const std::uint64_t seed = seed_of(cfg);
  MaskParams mask;
  mask.fraction = cfg.get_double("mask_fraction", mask.fraction);
  mask.mean_run = cfg.get_double("mask_run", mask.mean_run);
  const auto chunk = static_cast<std::size_t>(cfg.get_int("chunk_frames", 32));
  const auto masks = static_cast<std::size_t>(cfg.get_int("masks_per_label", 8));
  const double split_fraction = cfg.get_double("split", 0.7);

  std::vector<Spectrogram> labels;
  if (const auto inputs = cfg.get("csi")) {
    const SraConfig sra = sra_for(cfg.get_string("motion", "respiration"));
    for (const std::string& path : split(*inputs, ',')) {
      require_file(path);
      const CsiSeries series = read_csi_csv(read_text_file(path), path);
      if (series.t.empty()) throw std::runtime_error("empty CSI file: " + path);
      const double duration = cfg.get_double("duration", series.t.back() + 1e-6);
      auto part = labels_from_series(series, duration, sra, chunk);
      labels.insert(labels.end(), part.begin(), part.end());
    }
  } else {
    RespirationDatasetOptions opt;
    opt.seed = seed;
    opt.n_subjects = static_cast<std::size_t>(cfg.get_int("subjects", static_cast<long long>(opt.n_subjects)));
    opt.total_s = cfg.get_double("total_s", opt.total_s);
    opt.noise_std = cfg.get_double("noise_std", opt.noise_std);
    opt.chunk_frames = chunk;
    labels = respiration_labels(opt);
  }
  const Dataset ds = build_dataset(labels, masks, mask, split_fraction, seed);
  write_dataset(out, ds);
  std::cout << "labels: " << labels.size() << ", train pairs: " << ds.train.size()
            << ", test pairs: " << ds.test.size() << '\n';
  return 0;
}

// train ----------------------------------------------------------------------

TcnConfig tcn_from(const RunConfig& cfg, std::uint64_t seed) {
  TcnConfig c;
  c.n_c = static_cast<std::size_t>(cfg.get_int("channels", static_cast<long long>(c.n_c)));
  c.bottleneck_dim = static_cast<std::size_t>(cfg.get_int("bottleneck", static_cast<long long>(c.bottleneck_dim)));
  c.seed = seed;
  return c;
}

int cmd_train(const RunConfig& cfg) {
  const fs::path out = out_dir(cfg);
  const std::uint64_t seed = seed_of(cfg);
  const std::string data = cfg.get_string("data", "");
  if (data.empty()) throw std::invalid_argument("--data is required");
  if (!fs::exists(data)) throw std::runtime_error("missing dataset directory: " + data);
  const Dataset ds = read_dataset(data);
  if (ds.train.empty()) throw std::runtime_error("dataset has no training pairs: " + data);

  TcnConfig tc = tcn_from(cfg, seed);
  tc.n_f = ds.train.front().x.n_f;
  TcnModel model = init_model(tc);
  save_model(model, out / "init.bin");

  TrainConfig t;
  t.seed = seed;
  t.epochs = static_cast<std::size_t>(cfg.get_int("epochs", 20));
  t.lr = cfg.get_double("lr", t.lr);
  t.batch_size = static_cast<std::size_t>(cfg.get_int("batch_size", static_cast<long long>(t.batch_size)));
  t.grad_clip = cfg.get_double("clip", t.grad_clip);
  t.masked_only = cfg.get_bool("masked_only", false);
  const auto history = train(model, ds, t, [](const EpochLoss& e) {
    std::cout << "epoch " << e.epoch << " train " << format_double(e.train_mse) << " test "
              << format_double(e.test_mse) << '\n';
  });
  save_model(model, out / "model.bin");
  std::ostringstream os;
  write_loss_csv(os, history);
  write_file(out / "loss.csv", os.str());
  return 0;
}

// recover --------------------------------------------------------------------

int cmd_recover(const RunConfig& cfg) {
  const fs::path out = out_dir(cfg);
  const std::string model_path = cfg.get_string("model", "");
  const std::string input = cfg.get_string("input", "");
  if (model_path.empty() || input.empty()) throw std::invalid_argument("--model and --input are required");
  require_file(model_path);
  require_file(input);
  const TcnModel model = load_model(model_path);
  const Spectrogram x = read_spectrogram(read_text_file(input));
  const Spectrogram y = recover(model, x);
  for (double v : y.data) require_finite(v, "recovered spectrogram");
  std::ostringstream os;
  write_spectrogram(os, y);
  write_file(out / "recovered.txt", os.str());
  return 0;
}

// eval -----------------------------------------------------------------------

int cmd_eval(const RunConfig& cfg) {
  const fs::path out = out_dir(cfg);
  const std::uint64_t seed = seed_of(cfg);
  std::vector<std::pair<std::string, double>> rows;

  if (const auto data = cfg.get("data")) {
    if (!fs::exists(*data)) throw std::runtime_error("missing dataset directory: " + *data);
    const Dataset ds = read_dataset(*data);
    if (ds.test.empty()) throw std::runtime_error("dataset has no test pairs: " + *data);
    double interp = 0.0, pass = 0.0, model_mse = 0.0;
    std::optional<TcnModel> model;
    if (const auto mp = cfg.get("model")) {
      require_file(*mp);
      model = load_model(*mp);
    }
    for (const TrainingPair& p : ds.test) {
      interp += recovery_mse(baseline_interpolation(p.x), p.y);
      pass += recovery_mse(baseline_passthrough(p.x), p.y);
      if (model) model_mse += recovery_mse(recover(*model, p.x), p.y);
    }
    const double n = static_cast<double>(ds.test.size());
    rows.emplace_back("test_pairs", n);
    if (model) rows.emplace_back("model_recovery_mse", model_mse / n);
    rows.emplace_back("interpolation_mse", interp / n);
    rows.emplace_back("passthrough_mse", pass / n);
  }

  FourUserOptions opt;
  opt.seed = seed;
  opt.duration_s = cfg.get_double("duration", opt.duration_s);
  opt.noise_std = cfg.get_double("noise_std", opt.noise_std);
  const SeparabilityReport rep = four_user_separability(opt);
  for (std::size_t i = 0; i < rep.near_field.size(); ++i) {
    const LinkReport& l = rep.near_field[i];
    const std::string p = "ue" + std::to_string(i) + "_";
    rows.emplace_back(p + "true_bpm", l.true_bpm);
    rows.emplace_back(p + "estimated_bpm", l.estimated_bpm);
    rows.emplace_back(p + "abs_error_bpm", l.abs_error_bpm);
    rows.emplace_back(p + "entropy_bits", l.entropy_bits);
    rows.emplace_back(p + "hold_drop_db", l.hold_drop_db);
  }
  rows.emplace_back("near_field_median_error_bpm", rep.near_field_median_error());
  rows.emplace_back("near_field_mean_entropy_bits", rep.near_field_mean_entropy());
  rows.emplace_back("baseline_estimated_bpm", rep.baseline_bpm);
  rows.emplace_back("baseline_median_error_bpm", rep.baseline_median_error());
  rows.emplace_back("baseline_entropy_bits", rep.baseline_entropy_bits);
  for (const auto& [k, v] : rows) require_finite(v, k);
  std::ostringstream os;
  write_metric_rows(os, rows);
  write_file(out / "metrics.csv", os.str());
  std::cout << os.str();
  return 0;
}

// bfi-demo -------------------------------------------------------------------

int cmd_bfi_demo(const RunConfig& cfg) {
  const fs::path out = out_dir(cfg);
  const std::uint64_t seed = seed_of(cfg);
  const auto n_tx = static_cast<std::size_t>(cfg.get_int("n_tx", 3));
  const auto n_rx = static_cast<std::size_t>(cfg.get_int("n_rx", 2));
  const double lambda = cfg.get_double("lambda", 0.06);
  const auto steps = static_cast<std::size_t>(cfg.get_int("steps", 200));
  const double span = cfg.get_double("span_wavelengths", 2.0);
  const double dtheta = cfg.get_double("delta_theta", 0.3);
  const double theta = cfg.get_double("theta", 0.3);
  const double duration = cfg.get_double("duration", 10.0);
  std::optional<Quantization> q;
  if (!cfg.get_bool("unquantized", false)) {
    q = Quantization{static_cast<int>(cfg.get_int("b_phi", 6)), static_cast<int>(cfg.get_int("b_psi", 4))};
  }
  if (steps < 2) throw std::invalid_argument("--steps must be >= 2");
  const ChannelMatrix h0 = random_channel(n_rx, n_tx, seed);
  std::vector<MotionStep> motion;
  for (std::size_t i = 0; i < steps; ++i) {
    const double frac = static_cast<double>(i) / static_cast<double>(steps - 1);
    MotionStep s;
    s.t = frac * duration;
    s.motion.delta_d_t = frac * span * lambda;
    s.motion.delta_d_r.assign(n_rx, frac * span * lambda);
    s.motion.rho.assign(n_rx, 1.0);
    s.motion.delta_theta = frac * dtheta;
    s.motion.theta = theta;
    motion.push_back(s);
  }
  const auto rows = bfi_sensitivity_demo(h0, motion, lambda, q);
  for (const SensitivityRow& r : rows) require_finite(r.bfi_variation + r.csi_phase_variation, "sensitivity row");
  std::ostringstream os;
  write_sensitivity_csv(os, rows);
  write_file(out / "sensitivity.csv", os.str());
  return 0;
}

// register-sim ---------------------------------------------------------------

/// Script lines: `register,id,ue_x,ue_y,subject_x,subject_y,motion,strategy`
/// or `deregister,id`. `#` comments and blank lines are skipped.
std::string default_script() {
  return "register,u0,1,1,1.106,1.106,respiration,ul-csi\n"
         "register,u1,-1,1,-1.106,1.106,respiration,ul-csi\n"
         "register,u2,-1,-1,-1.106,-1.106,respiration,dl-csi\n"
         "register,u3,1,-1,1.106,-1.106,gesture_like,ul-bfi\n"
         "register,intruder,1.01,1,1.2,1.1,activity_like,ul-csi\n"
         "deregister,u0\n"
         "register,intruder,1.01,1,1.2,1.1,activity_like,ul-csi\n";
}

int cmd_register_sim(const RunConfig& cfg) {
  const fs::path out = out_dir(cfg);
  std::string script = default_script();
  if (const auto path = cfg.get("script")) {
    require_file(*path);
    script = read_text_file(*path);
  }
  std::optional<CapacityQuery> cap;
  RadioConfig rc = radio_from(cfg);
  if (!cfg.has("b")) rc.b = 0.0;
  const double beta = cfg.get_double("beta", 50.0);
  if (cfg.has("envelope_r")) {
    CapacityQuery q;
    q.r = cfg.get_double("envelope_r", 1.0);
    q.cfg = rc;
    q.beta = beta;
    cap = q;
  }
  Registry reg(rc, parse_point(cfg.get_string("ap", "0,0")), beta, cap);
  std::ostringstream log;
  log << "step,action,user_id,decision,reason\n";
  std::istringstream in(script);
  std::string line;
  std::size_t step = 0;
  while (std::getline(in, line)) {
    const std::string_view body = trim(line);
    if (body.empty() || body.front() == '#') continue;
    const auto f = split(body, ',');
    if (f.size() == 2 && f[0] == "deregister") {
      reg.deregister(f[1]);
      log << step++ << ",deregister," << f[1] << ",removed,\n";
    } else if (f.size() == 8 && f[0] == "register") {
      Registration r;
      r.user_id = f[1];
      r.ue = {parse_double(f[2]), parse_double(f[3])};
      r.subject = {parse_double(f[4]), parse_double(f[5])};
      r.motion = parse_motion_kind(f[6]);
      r.strategy = parse_traffic_kind(f[7]);
      const Decision d = reg.register_user(r);
      std::string reason = d.reason;
      std::replace(reason.begin(), reason.end(), ',', ';');
      log << step++ << ",register," << r.user_id << ',' << (d.admitted ? "admitted" : "rejected") << ',' << reason
          << '\n';
    } else {
      throw std::invalid_argument("bad script line: " + std::string(body));
    }
  }
  write_file(out / "admission.csv", log.str());
  std::ostringstream dump;
  write_registry_csv(dump, reg);
  write_file(out / "registry.csv", dump.str());
  std::cout << log.str();
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"nfsense: near-field Wi-Fi sensing simulator and toolkit"};
  app.require_subcommand(1);

  Command feasible = make_command(app, "feasible-map", "VIR rasters and feasibility map around one UE");
  radio_options(feasible);
  feasible.opt("ap", "AP position x,y (default 0,0)");
  feasible.opt("ue", "UE position x,y (default 1,0)");
  feasible.opt("subject", "subject position x,y (default 1.1,0)");
  feasible.opt("beta", "VIR threshold (default 50)");
  feasible.opt("x", "interferer grid x range lo:hi:step (default -2:2:0.05)");
  feasible.opt("y", "interferer grid y range lo:hi:step (default -2:2:0.05)");
  feasible.opt("intensity", "subject motion intensity (default 1)");
  feasible.opt("interferer_intensity", "interferer motion intensity (default 1)");

  Command capacity = make_command(app, "capacity", "capacity bounds over a radius sweep");
  radio_options(capacity);
  capacity.opt("beta", "VIR threshold");
  capacity.opt("delta_r", "radial spacing in meters");
  capacity.opt("k", "mirror-case neighbour count");
  capacity.opt("r", "radius sweep lo:hi:step");

  Command simulate = make_command(app, "simulate", "render CSI series for a scene");
  simulate.opt("scene", "scene file (default: four-user layout)");
  simulate.opt("duration", "seconds to render (default 120)");
  simulate.opt("noise_std", "CSI noise std for the four-user layout (default 0.05)");
  simulate.opt("traffic_kind", "dense, ul-csi, dl-csi or ul-bfi (default dense)");
  simulate.opt("rate", "dense sampling rate in Hz (default 100)");
  simulate.opt("contention_users", "users sharing the channel (default 1)");

  Command dataset = make_command(app, "build-dataset", "masked spectrogram training pairs");
  dataset.opt("csi", "comma-separated CSI CSV files (default: synthetic breathing subjects)");
  dataset.opt("motion", "motion type of the CSV inputs (default respiration)");
  dataset.opt("duration", "seconds covered by each CSV (default: last timestamp)");
  dataset.opt("subjects", "synthetic subjects (default 8)");
  dataset.opt("total_s", "synthetic seconds over all subjects (default 1800)");
  dataset.opt("noise_std", "synthetic CSI noise std (default 0.05)");
  dataset.opt("chunk_frames", "spectrogram columns per label (default 32)");
  dataset.opt("masks_per_label", "masked copies per label (default 8)");
  dataset.opt("mask_fraction", "fraction of masked columns (default 0.3)");
  dataset.opt("mask_run", "mean masked run length in columns (default 8)");
  dataset.opt("split", "fraction of labels used for training (default 0.7)");

  Command trainc = make_command(app, "train", "train the TCN autoencoder");
  trainc.opt("data", "dataset directory (required)");
  trainc.opt("epochs", "training epochs (default 20)");
  trainc.opt("lr", "Adam learning rate (default 0.001)");
  trainc.opt("batch_size", "pairs per batch (default 16)");
  trainc.opt("clip", "gradient-norm clip (default 5)");
  trainc.opt("masked_only", "loss on masked columns only: true/false (default false)");
  trainc.opt("channels", "block channels (default 64)");
  trainc.opt("bottleneck", "bottleneck channels (default 16)");

  Command recoverc = make_command(app, "recover", "recover a masked spectrogram with a trained model");
  recoverc.opt("model", "weight file");
  recoverc.opt("input", "spectrogram file");

  Command evalc = make_command(app, "eval", "recovery and separability metrics");
  evalc.opt("data", "dataset directory for recovery metrics (optional)");
  evalc.opt("model", "weight file for recovery metrics (optional)");
  evalc.opt("duration", "four-user scene seconds (default 120)");
  evalc.opt("noise_std", "four-user scene CSI noise std (default 0.05)");

  Command bfi = make_command(app, "bfi-demo", "CSI phase vs BFI sensitivity under motion");
  bfi.opt("n_tx", "transmit antennas (default 3)");
  bfi.opt("n_rx", "receive antennas (default 2)");
  bfi.opt("lambda", "wavelength in meters (default 0.06)");
  bfi.opt("steps", "motion steps (default 200)");
  bfi.opt("span_wavelengths", "total radial displacement in wavelengths (default 2)");
  bfi.opt("delta_theta", "total angular change in radians (default 0.3)");
  bfi.opt("theta", "initial angle in radians (default 0.3)");
  bfi.opt("duration", "seconds spanned by the steps (default 10)");
  bfi.opt("unquantized", "use continuous angles: true/false (default false)");
  bfi.opt("b_phi", "phi bits (default 6)");
  bfi.opt("b_psi", "psi bits (default 4)");

  Command regc = make_command(app, "register-sim", "replay a registration script through the coordinator");
  radio_options(regc);
  regc.opt("script", "registration script (default: built-in four users plus an intruder)");
  regc.opt("ap", "AP position x,y (default 0,0)");
  regc.opt("beta", "VIR threshold (default 50)");
  regc.opt("envelope_r", "ring radius enabling the capacity cap (default: off)");

  CLI11_PARSE(app, argc, argv);

  const std::vector<std::pair<Command*, int (*)(const RunConfig&)>> table{
      {&feasible, cmd_feasible_map}, {&capacity, cmd_capacity}, {&simulate, cmd_simulate},
      {&dataset, cmd_build_dataset}, {&trainc, cmd_train},      {&recoverc, cmd_recover},
      {&evalc, cmd_eval},            {&bfi, cmd_bfi_demo},      {&regc, cmd_register_sim}};
  try {
    for (const auto& [cmd, fn] : table)
      if (cmd->app->parsed()) return fn(cmd->resolve());
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 1;
}
