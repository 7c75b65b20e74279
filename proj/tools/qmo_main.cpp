// Command-line front end: synthesize planted instances, run the denoising
// and inpainting solvers on PPM images, and verify stationarity certificates
// for saved problem/point bundles.

#include <chrono>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <optional>
#include <sstream>
#include <string>

#include "CLI11.hpp"
#include "json.hpp"
#include "qmo/qmo.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitError = 1;
constexpr int kExitStalled = 2;

struct SolveFlags {
  int max_iters = 5000;
  double tol = 1e-9;
  std::uint64_t seed = 0;
  int trace_cadence = 1;
  std::optional<double> beta;
  std::string config_path;
};

void add_solve_flags(CLI::App* cmd, SolveFlags& flags, bool with_beta) {
  cmd->add_option("--config", flags.config_path,
                  "plain key=value config file; explicit flags win");
  cmd->add_option("--max-iters", flags.max_iters, "iteration cap");
  cmd->add_option("--tol", flags.tol, "relative residual threshold");
  cmd->add_option("--seed", flags.seed, "RNG seed for synthetic inputs");
  cmd->add_option("--trace-cadence", flags.trace_cadence,
                  "log every k-th iteration");
  if (with_beta) {
    flags.beta.emplace(0.0);
    cmd->add_option("--beta", *flags.beta,
                    "fixed step size (default 0.4 / (2 ||L*L||))")
        ->expected(1);
  }
}

/// key=value lines; '#' starts a comment, blank lines are skipped.
std::map<std::string, std::string> load_config(const std::string& path) {
  std::ifstream is(path);
  if (!is) throw qmo::IoError("cannot open config file: " + path);
  std::map<std::string, std::string> kv;
  std::string line;
  while (std::getline(is, line)) {
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.resize(hash);
    const auto eq = line.find('=');
    if (eq == std::string::npos) continue;
    auto trim = [](std::string t) {
      const auto b = t.find_first_not_of(" \t");
      const auto e = t.find_last_not_of(" \t");
      return b == std::string::npos ? std::string() : t.substr(b, e - b + 1);
    };
    const std::string key = trim(line.substr(0, eq));
    const std::string value = trim(line.substr(eq + 1));
    if (!key.empty()) kv[key] = value;
  }
  return kv;
}

/// Applies config values to any option the command line left untouched.
template <typename T>
void merge_config_value(const CLI::App* cmd,
                        const std::map<std::string, std::string>& kv,
                        const std::string& key, T& target) {
  if (cmd->count("--" + key) > 0) return;  // explicit flag wins
  const auto it = kv.find(key);
  if (it == kv.end()) return;
  std::istringstream ss(it->second);
  ss >> target;
  if (ss.fail()) throw qmo::IoError("bad config value for " + key);
}

void merge_solve_config(const CLI::App* cmd, SolveFlags& flags,
                        bool& beta_set) {
  if (flags.config_path.empty()) return;
  const auto kv = load_config(flags.config_path);
  merge_config_value(cmd, kv, "max-iters", flags.max_iters);
  merge_config_value(cmd, kv, "tol", flags.tol);
  merge_config_value(cmd, kv, "seed", flags.seed);
  merge_config_value(cmd, kv, "trace-cadence", flags.trace_cadence);
  if (flags.beta && cmd->count("--beta") == 0 && kv.count("beta") > 0) {
    std::istringstream ss(kv.at("beta"));
    ss >> *flags.beta;
    if (ss.fail()) throw qmo::IoError("bad config value for beta");
    beta_set = true;
  }
}

qmo::SolverConfig to_config(const SolveFlags& flags, bool beta_set) {
  qmo::SolverConfig cfg;
  cfg.max_iters = flags.max_iters;
  cfg.tol = flags.tol;
  cfg.seed = flags.seed;
  cfg.trace_cadence = flags.trace_cadence;
  if (beta_set && flags.beta) cfg.beta = *flags.beta;
  return cfg;
}

void write_json_file(const fs::path& path, const json& j) {
  std::ofstream os(path);
  if (!os) throw qmo::IoError("cannot open for writing: " + path.string());
  os << j.dump(2) << "\n";
}

json read_json_file(const fs::path& path) {
  std::ifstream is(path);
  if (!is) throw qmo::IoError("cannot open for reading: " + path.string());
  return json::parse(is);
}

qmo::Image support_image(const qmo::QMatrix& z) {
  qmo::Image img;
  img.height = z.rows();
  img.width = z.cols();
  img.rgb.assign(img.width * img.height * 3, 0);
  for (std::size_t i = 0; i < z.rows(); ++i)
    for (std::size_t j = 0; j < z.cols(); ++j)
      if (qmo::modulus(z(i, j)) > 0.0) {
        const std::size_t o = (i * img.width + j) * 3;
        img.rgb[o] = img.rgb[o + 1] = img.rgb[o + 2] = 255;
      }
  return img;
}

double wall_secs(const std::chrono::steady_clock::time_point& start) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() -
                                       start)
      .count();
}

// --- synth ---------------------------------------------------------------

struct SynthArgs {
  std::size_t m = 0, n = 0, rank = 1;
  double sparsity = 0.0;
  double noise_mag = 5.0;
  std::uint64_t seed = 0;
  std::string out;
};

int run_synth(const SynthArgs& a) {
  const qmo::PlantedScid planted = qmo::make_planted_image(
      a.m, a.n, a.rank, a.sparsity, a.noise_mag, a.seed);
  fs::create_directories(a.out);
  const fs::path out(a.out);
  qmo::write_qmat((out / "y_true.qmat").string(), planted.y_true);
  qmo::write_qmat((out / "z_true.qmat").string(), planted.z_true);
  qmo::write_qmat((out / "d.qmat").string(), planted.d);
  qmo::write_ppm((out / "d.ppm").string(),
                 qmo::qmatrix_to_image(planted.d));
  json report{{"command", "synth"},
              {"m", a.m},
              {"n", a.n},
              {"rank", a.rank},
              {"sparsity", a.sparsity},
              {"noise_mag", a.noise_mag},
              {"seed", a.seed},
              {"l0_z_true", qmo::norm_l0(planted.z_true)}};
  write_json_file(out / "report.json", report);
  std::cout << report.dump(2) << "\n";
  return kExitOk;
}

// --- denoise ---------------------------------------------------------------

struct DenoiseArgs {
  std::string input, out;
  std::size_t rank = 1;
  double lambda = 0.0;
  std::string mask, ref;
  SolveFlags flags;
  bool beta_set = false;
};

int run_denoise(const DenoiseArgs& a) {
  const auto start = std::chrono::steady_clock::now();
  const qmo::Image img = qmo::read_ppm(a.input);
  const qmo::QMatrix d = qmo::image_to_qmatrix(img);

  qmo::LinearOp op = qmo::LinearOp::identity();
  std::optional<qmo::EntryMask> mask;
  if (!a.mask.empty()) {
    mask = qmo::read_mask(a.mask, d.rows(), d.cols());
    op = qmo::LinearOp::entry_mask(*mask);
  }
  const qmo::ScidProblem problem(d, op, a.lambda, a.rank);
  const qmo::SolverConfig cfg = to_config(a.flags, a.beta_set);
  const qmo::ScidResult res = qmo::scid_solve(problem, cfg);

  fs::create_directories(a.out);
  const fs::path out(a.out);
  qmo::write_ppm((out / "y.ppm").string(), qmo::qmatrix_to_image(res.y));
  qmo::write_ppm((out / "z_support.ppm").string(), support_image(res.z));
  qmo::write_qmat((out / "y.qmat").string(), res.y);
  qmo::write_qmat((out / "z.qmat").string(), res.z);
  qmo::write_qmat((out / "d.qmat").string(), d);
  qmo::write_trace_jsonl((out / "trace.jsonl").string(), res.trace);

  json problem_json{{"kind", "scid"},
                    {"d", "d.qmat"},
                    {"lambda", a.lambda},
                    {"rank", a.rank}};
  if (mask) {
    qmo::write_mask((out / "mask.txt").string(), *mask);
    problem_json["mask"] = "mask.txt";
  }
  write_json_file(out / "problem.json", problem_json);
  write_json_file(out / "point.json",
                  json{{"y", "y.qmat"}, {"z", "z.qmat"}});

  const auto [res_y, res_z] =
      qmo::beta_stationarity_residual(problem, res.y, res.z, res.beta);
  json report{
      {"command", "denoise"},
      {"config",
       {{"input", a.input},
        {"rank", a.rank},
        {"lambda", a.lambda},
        {"mask", a.mask},
        {"beta", res.beta},
        {"max_iters", cfg.max_iters},
        {"tol", cfg.tol},
        {"seed", cfg.seed}}},
      {"status",
       res.status == qmo::SolveStatus::converged ? "converged" : "stalled"},
      {"iterations", res.trace.empty() ? 0 : res.trace.back().iter},
      {"objective", problem.objective(res.y, res.z)},
      {"residuals", {{"res_y", res_y}, {"res_z", res_z}}},
      {"rank_y", qmo::rank(res.y)},
      {"l0_z", qmo::norm_l0(res.z)},
      {"op_norm", res.op_norm}};
  if (!a.ref.empty()) {
    report["psnr_db"] =
        qmo::psnr_db(qmo::qmatrix_to_image(res.y), qmo::read_ppm(a.ref));
  }
  report["timings"] = {{"total_secs", wall_secs(start)}};
  write_json_file(out / "report.json", report);
  std::cout << report.dump(2) << "\n";
  return res.status == qmo::SolveStatus::converged ? kExitOk : kExitStalled;
}

// --- inpaint ---------------------------------------------------------------

struct InpaintArgs {
  std::string input, mask, out, ref;
  std::size_t rank = 1;
  SolveFlags flags;
};

int run_inpaint(const InpaintArgs& a) {
  const auto start = std::chrono::steady_clock::now();
  const qmo::Image img = qmo::read_ppm(a.input);
  const qmo::QMatrix d = qmo::image_to_qmatrix(img);
  const qmo::EntryMask omega = qmo::read_mask(a.mask, d.rows(), d.cols());
  const qmo::SolverConfig cfg = to_config(a.flags, false);
  const qmo::LrqdResult res = qmo::lrqd_solve(d, omega, a.rank, cfg);

  fs::create_directories(a.out);
  const fs::path out(a.out);
  qmo::write_ppm((out / "w.ppm").string(), qmo::qmatrix_to_image(res.w));
  qmo::write_qmat((out / "w.qmat").string(), res.w);
  qmo::write_qmat((out / "y.qmat").string(), res.y);
  qmo::write_qmat((out / "z.qmat").string(), res.z);
  qmo::write_qmat((out / "d.qmat").string(), d);
  qmo::write_mask((out / "mask.txt").string(), omega);
  qmo::write_trace_jsonl((out / "trace.jsonl").string(), res.trace);
  write_json_file(out / "problem.json", json{{"kind", "lrqd"},
                                             {"d", "d.qmat"},
                                             {"mask", "mask.txt"},
                                             {"rank", a.rank}});
  write_json_file(
      out / "point.json",
      json{{"w", "w.qmat"}, {"y", "y.qmat"}, {"z", "z.qmat"}});

  const qmo::PrototypeResiduals sr =
      qmo::prototype_stationarity(res.w, res.y, res.z, d, omega);
  json report{
      {"command", "inpaint"},
      {"config",
       {{"input", a.input},
        {"mask", a.mask},
        {"rank", a.rank},
        {"max_iters", cfg.max_iters},
        {"tol", cfg.tol},
        {"seed", cfg.seed}}},
      {"status",
       res.status == qmo::SolveStatus::converged ? "converged" : "stalled"},
      {"iterations", res.trace.empty() ? 0 : res.trace.back().iter},
      {"objective", 0.5 * qmo::fro_norm_sq(qmo::matmul(res.y, res.z) - res.w)},
      {"residuals",
       {{"free_entries", sr.free_entries},
        {"left", sr.left},
        {"right", sr.right},
        {"data", sr.data}}},
      {"rank_y", qmo::rank(res.y)}};
  if (!a.ref.empty()) {
    report["psnr_db"] =
        qmo::psnr_db(qmo::qmatrix_to_image(res.w), qmo::read_ppm(a.ref));
  }
  report["timings"] = {{"total_secs", wall_secs(start)}};
  write_json_file(out / "report.json", report);
  std::cout << report.dump(2) << "\n";
  return res.status == qmo::SolveStatus::converged ? kExitOk : kExitStalled;
}

// --- check -----------------------------------------------------------------

struct CheckArgs {
  std::string problem, point, out = ".";
  double tol = 1e-7;
  SolveFlags flags;
  bool beta_set = false;
};

int run_check(const CheckArgs& a) {
  const json problem = read_json_file(a.problem);
  const json point = read_json_file(a.point);
  const fs::path problem_dir = fs::path(a.problem).parent_path();
  const fs::path point_dir = fs::path(a.point).parent_path();
  const auto problem_file = [&](const std::string& key) {
    return (problem_dir / problem.at(key).get<std::string>()).string();
  };
  const auto point_file = [&](const std::string& key) {
    return (point_dir / point.at(key).get<std::string>()).string();
  };

  const std::string kind = problem.at("kind").get<std::string>();
  json report{{"command", "check"}, {"kind", kind}, {"tol", a.tol}};
  bool ok = false;

  if (kind == "scid") {
    const qmo::QMatrix d = qmo::read_qmat(problem_file("d"));
    qmo::LinearOp op = qmo::LinearOp::identity();
    if (problem.contains("mask")) {
      op = qmo::LinearOp::entry_mask(
          qmo::read_mask(problem_file("mask"), d.rows(), d.cols()));
    }
    const qmo::ScidProblem prob(d, op, problem.at("lambda").get<double>(),
                                problem.at("rank").get<std::size_t>());
    const qmo::QMatrix y = qmo::read_qmat(point_file("y"));
    const qmo::QMatrix z = qmo::read_qmat(point_file("z"));
    const double op_norm =
        qmo::estimate_operator_norm(prob.op, d.rows(), d.cols());
    double beta = a.beta_set && a.flags.beta ? *a.flags.beta
                  : (op_norm > 0.0 ? 0.4 / (2.0 * op_norm) : 0.4);
    const auto [res_y, res_z] =
        qmo::beta_stationarity_residual(prob, y, z, beta);
    const qmo::ScidStationarity st = qmo::scid_stationarity(prob, y, z, a.tol);
    const double scale = 1.0 + qmo::fro_norm(d);
    ok = res_y <= a.tol * scale && res_z <= a.tol * scale && st.stationary;
    report["beta"] = beta;
    report["residuals"] = {{"res_y", res_y}, {"res_z", res_z}};
    report["stationarity"] = qmo::scid_stationarity_json(st);
    report["stationary"] = st.stationary;
  } else if (kind == "lrqd") {
    const qmo::QMatrix d = qmo::read_qmat(problem_file("d"));
    const std::size_t r = problem.at("rank").get<std::size_t>();
    const qmo::EntryMask omega =
        qmo::read_mask(problem_file("mask"), d.rows(), d.cols());
    const qmo::QMatrix w = qmo::read_qmat(point_file("w"));
    const qmo::QMatrix y = qmo::read_qmat(point_file("y"));
    const qmo::QMatrix z = qmo::read_qmat(point_file("z"));
    const qmo::PrototypeResiduals sr =
        qmo::prototype_stationarity(w, y, z, d, omega);
    const double scale = 1.0 + qmo::fro_norm(d);
    ok = sr.max() <= a.tol * scale;
    report["residuals"] = {{"free_entries", sr.free_entries},
                           {"left", sr.left},
                           {"right", sr.right},
                           {"data", sr.data}};
    // The generic first-order check is quadratic in the constraint count;
    // run it only on small instances.
    if (4 * omega.count() <= 256) {
      const qmo::ConstrainedProblem cp =
          qmo::make_lrqd_equality_problem(d, omega, r);
      const qmo::KktReport kkt =
          qmo::kkt_residual(cp, qmo::MatTuple{w, y, z});
      double max_eq = 0.0;
      for (double v : kkt.eq_violation) max_eq = std::max(max_eq, v);
      report["kkt"] = qmo::kkt_report_json(kkt);
      ok = ok && kkt.stationarity <= a.tol * scale && max_eq <= a.tol * scale;
    } else {
      report["kkt"] = "skipped (instance too large)";
    }
  } else {
    throw qmo::IoError("unknown problem kind: " + kind);
  }

  report["ok"] = ok;
  fs::create_directories(a.out);
  write_json_file(fs::path(a.out) / "report.json", report);
  std::cout << report.dump(2) << "\n";
  return ok ? kExitOk : kExitError;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"quaternion matrix optimization toolkit"};
  app.require_subcommand(1);

  SynthArgs synth;
  CLI::App* synth_cmd =
      app.add_subcommand("synth", "generate a planted ground-truth bundle");
  synth_cmd->add_option("--m", synth.m, "rows")->required();
  synth_cmd->add_option("--n", synth.n, "columns")->required();
  synth_cmd->add_option("--rank", synth.rank, "planted rank")->required();
  synth_cmd->add_option("--sparsity", synth.sparsity,
                        "fraction of corrupted entries");
  synth_cmd->add_option("--noise-mag", synth.noise_mag,
                        "modulus of corrupted entries");
  synth_cmd->add_option("--seed", synth.seed, "RNG seed");
  synth_cmd->add_option("--out", synth.out, "output directory")->required();

  DenoiseArgs denoise;
  CLI::App* denoise_cmd = app.add_subcommand(
      "denoise", "sparse low-rank color image denoising (rank-bounded)");
  denoise_cmd->add_option("--input", denoise.input, "input PPM image")
      ->required();
  denoise_cmd->add_option("--rank", denoise.rank, "rank bound")->required();
  denoise_cmd->add_option("--lambda", denoise.lambda, "sparsity weight")
      ->required();
  denoise_cmd->add_option("--mask", denoise.mask,
                          "observed-entry mask file (default: all observed)");
  denoise_cmd->add_option("--out", denoise.out, "output directory")
      ->required();
  denoise_cmd->add_option("--ref", denoise.ref, "reference image for PSNR");
  add_solve_flags(denoise_cmd, denoise.flags, true);

  InpaintArgs inpaint;
  CLI::App* inpaint_cmd = app.add_subcommand(
      "inpaint", "low-rank completion of the observed entries");
  inpaint_cmd->add_option("--input", inpaint.input, "input PPM image")
      ->required();
  inpaint_cmd->add_option("--mask", inpaint.mask, "observed-entry mask file")
      ->required();
  inpaint_cmd->add_option("--rank", inpaint.rank, "rank bound")->required();
  inpaint_cmd->add_option("--out", inpaint.out, "output directory")
      ->required();
  inpaint_cmd->add_option("--ref", inpaint.ref, "reference image for PSNR");
  add_solve_flags(inpaint_cmd, inpaint.flags, false);

  CheckArgs check;
  CLI::App* check_cmd = app.add_subcommand(
      "check", "verify stationarity certificates for a saved point");
  check_cmd->add_option("--problem", check.problem, "problem JSON file")
      ->required();
  check_cmd->add_option("--point", check.point, "point JSON file")->required();
  check_cmd->add_option("--config", check.flags.config_path,
                        "plain key=value config file; explicit flags win");
  check_cmd->add_option("--tol", check.tol, "residual tolerance");
  check_cmd->add_option("--out", check.out, "report directory");
  check.flags.beta.emplace(0.0);
  CLI::Option* beta_opt =
      check_cmd->add_option("--beta", *check.flags.beta, "step size");

  try {
    app.parse(argc, argv);
    if (synth_cmd->parsed()) return run_synth(synth);
    if (denoise_cmd->parsed()) {
      denoise.beta_set = denoise_cmd->count("--beta") > 0;
      merge_solve_config(denoise_cmd, denoise.flags, denoise.beta_set);
      return run_denoise(denoise);
    }
    if (inpaint_cmd->parsed()) {
      bool unused = false;
      merge_solve_config(inpaint_cmd, inpaint.flags, unused);
      return run_inpaint(inpaint);
    }
    if (check_cmd->parsed()) {
      check.beta_set = beta_opt->count() > 0;
      if (!check.flags.config_path.empty()) {
        const auto kv = load_config(check.flags.config_path);
        merge_config_value(check_cmd, kv, "tol", check.tol);
        if (beta_opt->count() == 0 && kv.count("beta") > 0) {
          std::istringstream ss(kv.at("beta"));
          ss >> *check.flags.beta;
          check.beta_set = true;
        }
      }
      return run_check(check);
    }
  } catch (const CLI::ParseError& e) {
    return app.exit(e);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitError;
  }
  return kExitError;
}
