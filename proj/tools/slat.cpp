// Command-line front end for the three-stage segmentation pipeline.

#include <CLI11.hpp>

#include <chrono>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>

#include "slat/degradations.hpp"
#include "slat/error.hpp"
#include "slat/io.hpp"
#include "slat/metrics.hpp"
#include "slat/pipeline.hpp"
#include "slat/synthetic.hpp"

namespace fs = std::filesystem;

namespace {

std::string read_text(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw slat::ValidationError("cannot read " + path.string());
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

std::optional<fs::path> optional_path(const std::string& s) {
  if (s.empty()) return std::nullopt;
  return fs::path(s);
}

// Stage-1 flags shared by smooth and pipeline.
struct SolverFlags {
  double lambda = 0.0;
  double mu = 1.0;
  std::string fidelity = "l2";
  double tol = 1e-4;
  int max_iter = 200;
  long blur = 0;

  void add(CLI::App* cmd) {
    cmd->add_option("--lambda", lambda, "fidelity weight (required)")->required();
    cmd->add_option("--mu", mu, "quadratic gradient weight")->capture_default_str();
    cmd->add_option("--fidelity", fidelity, "l2 or poisson")->capture_default_str();
    cmd->add_option("--tol", tol, "relative-change stop")->capture_default_str();
    cmd->add_option("--max-iter", max_iter, "iteration cap")->capture_default_str();
    cmd->add_option("--blur", blur, "length of the vertical motion blur to invert (0 = none)")
        ->capture_default_str();
  }
};

struct StageThreeFlags {
  int k = 0;
  int restarts = 10;
  std::uint64_t seed = 0;

  void add(CLI::App* cmd) {
    cmd->add_option("--k", k, "number of phases")->required();
    cmd->add_option("--restarts", restarts, "k-means restarts")->capture_default_str();
    cmd->add_option("--seed", seed, "RNG seed")->capture_default_str();
  }
};

void write_trace_csv(const slat::SmoothingOutput& out, const fs::path& path) {
  std::ostringstream csv;
  csv << "channel,iteration,energy,relative_change\n";
  for (std::size_t c = 0; c < out.channels.size(); ++c)
    for (const auto& t : out.channels[c].trace)
      csv << c << ',' << t.iteration << ',' << slat::format_double(t.energy) << ','
          << slat::format_double(t.relative_change) << '\n';
  slat::io::write_file_atomic(path, csv.str());
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"slat: smoothing, lifting and thresholding segmentation for color images"};
  app.require_subcommand(1);

  // degrade
  auto* degrade = app.add_subcommand("degrade", "apply blur, noise and pixel loss to an image");
  std::string dg_input, dg_output, dg_mask, dg_noise = "none", dg_blur = "none";
  double dg_mean = 0.0, dg_variance = 0.0, dg_peak = 255.0, dg_loss = 0.0;
  bool dg_per_channel = false;
  std::uint64_t dg_seed = 0;
  degrade->add_option("--input", dg_input, "input PGM/PPM")->required();
  degrade->add_option("--output", dg_output, "degraded PGM/PPM")->required();
  degrade->add_option("--mask-out", dg_mask, "write the known-pixel mask here");
  degrade->add_option("--noise", dg_noise, "none, gaussian or poisson")->capture_default_str();
  degrade->add_option("--mean", dg_mean, "Gaussian mean")->capture_default_str();
  degrade->add_option("--variance", dg_variance, "Gaussian variance")->capture_default_str();
  degrade->add_option("--peak", dg_peak, "Poisson peak count")->capture_default_str();
  degrade->add_option("--loss", dg_loss, "fraction of pixels removed")->capture_default_str();
  degrade->add_flag("--per-channel-loss", dg_per_channel, "draw a separate loss mask per channel");
  degrade->add_option("--blur", dg_blur, "none, vertical:N or kernel:R,C,AR,AC:taps")->capture_default_str();
  degrade->add_option("--seed", dg_seed, "RNG seed")->capture_default_str();

  // smooth
  auto* smooth = app.add_subcommand("smooth", "Stage 1: per-channel convex smoothing");
  std::string sm_input, sm_mask, sm_output, sm_trace;
  SolverFlags sm_flags;
  smooth->add_option("--input", sm_input, "input PGM/PPM")->required();
  smooth->add_option("--mask", sm_mask, "known-pixel mask (PGM shared, PPM per channel)");
  smooth->add_option("--output", sm_output, "smoothed PGM/PPM")->required();
  sm_flags.add(smooth);
  std::string sm_raw;
  double sm_rho = 0.0, sm_tau = 0.0, sm_sigma = 0.0;
  smooth->add_option("--rho", sm_rho, "split-Bregman penalty (0 = lambda)");
  smooth->add_option("--tau", sm_tau, "primal step (0 = automatic)");
  smooth->add_option("--sigma", sm_sigma, "dual step (0 = automatic)");
  smooth->add_option("--raw", sm_raw, "also write the smoothed image as a SLAT container");
  smooth->add_option("--trace", sm_trace, "write the solver trace as CSV");

  // lift
  auto* liftcmd = app.add_subcommand("lift", "Stage 2: stack RGB with a secondary color space");
  std::string lf_input, lf_output, lf_space = "lab";
  liftcmd->add_option("--input", lf_input, "smoothed PPM or SLAT container")->required();
  liftcmd->add_option("--output", lf_output, "SLAT cache to write")->required();
  liftcmd->add_option("--space", lf_space, "lab, hsv or none")->capture_default_str();

  // threshold
  auto* threshold = app.add_subcommand("threshold", "Stage 3: k-means on a lifted image");
  std::string th_input, th_out;
  StageThreeFlags th_flags;
  threshold->add_option("--input", th_input, "SLAT cache or PGM/PPM")->required();
  threshold->add_option("--out-dir", th_out, "output directory")->required();
  th_flags.add(threshold);

  // pipeline
  auto* pipeline = app.add_subcommand("pipeline", "run all three stages");
  std::string pl_input, pl_mask, pl_out, pl_cache, pl_space = "lab";
  SolverFlags pl_flags;
  StageThreeFlags pl_stage3;
  bool pl_serial = false;
  pipeline->add_option("--input", pl_input, "input PGM/PPM")->required();
  pipeline->add_option("--mask", pl_mask, "known-pixel mask");
  pipeline->add_option("--out-dir", pl_out, "output directory")->required();
  pipeline->add_option("--cache", pl_cache, "SLAT cache path (default <out-dir>/gstar.slat)");
  pipeline->add_option("--space", pl_space, "secondary color space: lab, hsv or none")->capture_default_str();
  pipeline->add_flag("--serial", pl_serial, "solve channels one after another");
  pl_flags.add(pipeline);
  pl_stage3.add(pipeline);

  // rethreshold
  auto* rethreshold = app.add_subcommand("rethreshold", "Stage 3 only, from a cache");
  std::string rt_cache, rt_out;
  StageThreeFlags rt_flags;
  rethreshold->add_option("--cache", rt_cache, "SLAT cache")->required();
  rethreshold->add_option("--out-dir", rt_out, "output directory")->required();
  rt_flags.add(rethreshold);

  // evaluate
  auto* evaluate = app.add_subcommand("evaluate", "score a label map against ground truth");
  std::string ev_pred, ev_truth, ev_image, ev_degradation = "unknown", ev_manifest;
  double ev_runtime = -1.0;
  bool ev_header = false;
  evaluate->add_option("--pred", ev_pred, "predicted label PGM")->required();
  evaluate->add_option("--truth", ev_truth, "ground-truth label PGM")->required();
  evaluate->add_option("--manifest", ev_manifest, "pipeline manifest.txt (fills image and runtime)");
  evaluate->add_option("--image", ev_image, "image name for the report");
  evaluate->add_option("--degradation", ev_degradation, "degradation label for the report");
  evaluate->add_option("--runtime", ev_runtime, "runtime in seconds for the report");
  evaluate->add_flag("--header", ev_header, "print the CSV header first");

  // experiment
  auto* experiment = app.add_subcommand("experiment", "run a manifest of degradation/pipeline rows");
  std::string ex_manifest, ex_output;
  int ex_workers = 1;
  bool ex_no_timing = false;
  experiment->add_option("--manifest", ex_manifest, "key=value manifest")->required();
  experiment->add_option("--output", ex_output, "CSV report (default stdout)");
  experiment->add_option("--workers", ex_workers, "rows run concurrently")->capture_default_str();
  experiment->add_flag("--no-timing", ex_no_timing, "leave the runtime column empty");

  // synth
  auto* synth = app.add_subcommand("synth", "write a built-in synthetic scene and its labels");
  std::string sy_name, sy_output, sy_truth;
  synth->add_option("--name", sy_name, "six_phase, four_phase or pyramid")->required();
  synth->add_option("--output", sy_output, "scene PPM")->required();
  synth->add_option("--truth", sy_truth, "ground-truth label PGM");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 1;
  }

  try {
    if (*degrade) {
      slat::KeyValues kv;
      kv.set("noise", dg_noise);
      kv.set("mean", slat::format_double(dg_mean));
      kv.set("variance", slat::format_double(dg_variance));
      kv.set("peak", slat::format_double(dg_peak));
      kv.set("loss", slat::format_double(dg_loss));
      kv.set("per_channel_loss", dg_per_channel ? "true" : "false");
      kv.set("blur", dg_blur);
      kv.set("seed", std::to_string(dg_seed));
      const auto spec = slat::DegradationSpec::from_key_values(kv);
      const auto out = slat::degrade(slat::io::load_image(dg_input), spec);
      slat::io::save_image(out.image, dg_output);
      if (!dg_mask.empty()) slat::io::save_mask(out.mask, dg_mask);
    } else if (*smooth) {
      const slat::Image f = slat::io::load_image(sm_input);
      const slat::Mask mask = sm_mask.empty() ? slat::Mask::full(f.height(), f.width(), f.channels())
                                              : slat::io::load_mask(sm_mask, f.channels());
      slat::PipelineConfig cfg;
      cfg.lambda = sm_flags.lambda;
      cfg.mu = sm_flags.mu;
      cfg.tol = sm_flags.tol;
      cfg.max_iter = sm_flags.max_iter;
      cfg.blur_length = sm_flags.blur;
      slat::SolverConfig solver = cfg.solver();
      solver.rho = sm_rho;
      solver.tau = sm_tau;
      solver.sigma = sm_sigma;
      const auto out = slat::smooth_all(f, mask, cfg.op(), slat::parse_fidelity(sm_flags.fidelity),
                                        cfg.lambda, cfg.mu, solver);
      slat::io::save_image(out.smoothed, sm_output);
      if (!sm_raw.empty()) slat::io::save_raw(out.smoothed, sm_raw);
      if (!sm_trace.empty()) write_trace_csv(out, sm_trace);
      for (std::size_t c = 0; c < out.channels.size(); ++c)
        std::cerr << "channel " << c << ": " << out.channels[c].iterations << " iterations"
                  << (out.channels[c].converged ? "" : " (not converged)") << "\n";
    } else if (*liftcmd) {
      const fs::path in(lf_input);
      const slat::Image g = in.extension() == ".slat" ? slat::io::load_raw(in) : slat::io::load_image(in);
      slat::io::save_raw(slat::lift(g, slat::parse_secondary_space(lf_space)), lf_output);
    } else if (*threshold) {
      const fs::path in(th_input);
      const slat::Image lifted = in.extension() == ".slat" ? slat::io::load_raw(in) : slat::io::load_image(in);
      const auto result = slat::threshold_cached(lifted, th_flags.k, th_flags.restarts, th_flags.seed);
      slat::write_segmentation(result, th_out);
    } else if (*pipeline) {
      slat::PipelineConfig cfg;
      cfg.lambda = pl_flags.lambda;
      cfg.mu = pl_flags.mu;
      cfg.fidelity = slat::parse_fidelity(pl_flags.fidelity);
      cfg.tol = pl_flags.tol;
      cfg.max_iter = pl_flags.max_iter;
      cfg.blur_length = pl_flags.blur;
      cfg.k = pl_stage3.k;
      cfg.restarts = pl_stage3.restarts;
      cfg.seed = pl_stage3.seed;
      cfg.secondary_space = slat::parse_secondary_space(pl_space);
      cfg.cache_path = pl_cache;
      cfg.parallel = !pl_serial;
      const auto result = slat::run_pipeline(pl_input, optional_path(pl_mask), cfg, pl_out);
      std::cerr << "stage seconds: smoothing " << result.seconds.smoothing << ", lifting "
                << result.seconds.lifting << ", thresholding " << result.seconds.thresholding << "\n";
    } else if (*rethreshold) {
      slat::rethreshold(rt_cache, rt_flags.k, rt_flags.restarts, rt_flags.seed, rt_out);
    } else if (*evaluate) {
      const slat::LabelMap truth = slat::io::load_labels(ev_truth);
      const slat::LabelMap pred = slat::io::load_labels(ev_pred);
      if (!ev_manifest.empty()) {
        const auto kv = slat::parse_key_values(read_text(ev_manifest));
        if (ev_image.empty()) ev_image = kv.get("input", "");
        if (ev_runtime < 0.0) ev_runtime = kv.get_double("seconds_total", -1.0);
      }
      if (ev_image.empty()) ev_image = ev_pred;
      const auto report = slat::accuracy(pred, truth);
      if (ev_header) std::cout << "image,degradation,k,accuracy,runtime_s\n";
      std::cout << ev_image << ',' << ev_degradation << ',' << pred.phases() << ','
                << slat::format_double(report.accuracy) << ','
                << (ev_runtime >= 0.0 ? slat::format_double(ev_runtime) : "") << "\n";
    } else if (*experiment) {
      slat::ExperimentOptions opts;
      opts.workers = ex_workers;
      opts.include_timing = !ex_no_timing;
      const fs::path manifest(ex_manifest);
      const auto rows = slat::run_experiment(read_text(manifest), manifest.parent_path(), opts);
      const std::string csv = slat::experiment_csv(rows, opts.include_timing);
      if (ex_output.empty())
        std::cout << csv;
      else
        slat::io::write_file_atomic(ex_output, csv);
    } else if (*synth) {
      const auto scene = slat::synthetic::by_name(sy_name);
      slat::io::save_image(scene.image, sy_output);
      if (!sy_truth.empty()) slat::io::save_labels(scene.truth, sy_truth);
    }
  } catch (const slat::NumericalError& e) {
    std::cerr << "slat: numerical failure: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "slat: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
