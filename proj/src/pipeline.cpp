#include "slat/pipeline.hpp"

#include <chrono>
#include <fstream>
#include <future>
#include <iterator>
#include <mutex>
#include <sstream>

#include "slat/degradations.hpp"
#include "slat/io.hpp"
#include "slat/metrics.hpp"
#include "slat/synthetic.hpp"

namespace slat {
namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point start) {
  return std::chrono::duration<double>(Clock::now() - start).count();
}

std::string raster_name(const std::string& stem, Index channels) {
  return stem + (channels == 3 ? ".ppm" : ".pgm");
}

std::string join_ints(const std::vector<int>& v, char sep) {
  std::string out;
  for (std::size_t i = 0; i < v.size(); ++i) out += (i ? std::string(1, sep) : "") + std::to_string(v[i]);
  return out;
}

std::string csv_field(const std::string& s) {
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string out = "\"";
  for (char c : s) out += c == '"' ? std::string("\"\"") : std::string(1, c);
  return out + "\"";
}

}  // namespace

Fidelity parse_fidelity(const std::string& name) {
  if (name == "l2") return Fidelity::kL2;
  if (name == "poisson") return Fidelity::kPoisson;
  throw ValidationError("fidelity must be l2 or poisson");
}

std::string to_string(Fidelity fidelity) { return fidelity == Fidelity::kL2 ? "l2" : "poisson"; }

void PipelineConfig::validate() const {
  if (!(lambda > 0.0)) throw ValidationError("lambda is required and must be > 0");
  if (!(mu > 0.0)) throw ValidationError("mu must be > 0");
  if (k < 1) throw ValidationError("k is required and must be >= 1");
  if (restarts < 1) throw ValidationError("restarts must be >= 1");
  if (blur_length < 0) throw ValidationError("blur length must be >= 0");
  solver().validate();
}

SolverConfig PipelineConfig::solver() const {
  SolverConfig s;
  s.tol = tol;
  s.max_iter = max_iter;
  return s;
}

LinearOperatorXd PipelineConfig::op() const {
  return blur_length > 0 ? LinearOperatorXd::vertical_motion_blur(blur_length) : LinearOperatorXd::identity();
}

KeyValues PipelineConfig::to_key_values() const {
  KeyValues kv;
  kv.set("lambda", format_double(lambda));
  kv.set("mu", format_double(mu));
  kv.set("fidelity", to_string(fidelity));
  kv.set("k", std::to_string(k));
  kv.set("tol", format_double(tol));
  kv.set("max_iter", std::to_string(max_iter));
  kv.set("restarts", std::to_string(restarts));
  kv.set("seed", std::to_string(seed));
  kv.set("secondary_space", to_string(secondary_space));
  kv.set("model_blur", std::to_string(blur_length));
  return kv;
}

PipelineConfig PipelineConfig::from_key_values(const KeyValues& kv) {
  PipelineConfig cfg;
  cfg.lambda = kv.require_double("lambda");
  cfg.mu = kv.get_double("mu", 1.0);
  cfg.fidelity = parse_fidelity(kv.get("fidelity", "l2"));
  cfg.k = static_cast<int>(kv.get_int("k", 0));
  cfg.tol = kv.get_double("tol", 1e-4);
  cfg.max_iter = static_cast<int>(kv.get_int("max_iter", 200));
  cfg.restarts = static_cast<int>(kv.get_int("restarts", 10));
  cfg.seed = kv.get_u64("seed", 0);
  cfg.secondary_space = parse_secondary_space(kv.get("secondary_space", "lab"));
  cfg.blur_length = kv.get_int("model_blur", 0);
  cfg.validate();
  return cfg;
}

ThresholdResult threshold_cached(const Image& lifted, int k, int restarts, std::uint64_t seed) {
  const auto start = Clock::now();
  ThresholdResult out;
  out.segmentation = segment(lifted, k, restarts, seed);
  const Index shown = lifted.channels() >= 3 ? 3 : lifted.channels();
  out.rendered = render_phases(out.segmentation.labels, lifted.slice(0, shown));
  out.seconds = seconds_since(start);
  return out;
}

namespace {

// Runs one stage, prefixing any error with the stage name. The error kind is
// kept so the CLI exit code still reflects it.
template <typename Fn>
auto in_stage(const char* stage, Fn&& fn) {
  try {
    return fn();
  } catch (const NumericalError& e) {
    throw NumericalError(std::string(stage) + ": " + e.what());
  } catch (const ValidationError& e) {
    throw ValidationError(std::string(stage) + ": " + e.what());
  }
}

}  // namespace

PipelineResult run_pipeline(const Image& f, const Mask& mask, const PipelineConfig& cfg) {
  cfg.validate();
  PipelineResult out;

  auto start = Clock::now();
  SmoothingOutput stage1 = in_stage("smoothing", [&] {
    return smooth_all(f, mask, cfg.op(), cfg.fidelity, cfg.lambda, cfg.mu, cfg.solver(), cfg.parallel);
  });
  out.smoothed = std::move(stage1.smoothed);
  for (const auto& ch : stage1.channels) {
    out.iterations.push_back(ch.iterations);
    out.converged.push_back(ch.converged);
  }
  out.seconds.smoothing = seconds_since(start);

  start = Clock::now();
  // Lifting needs an RGB image; other channel counts go straight to Stage 3.
  const bool rgb = out.smoothed.channels() == 3;
  out.lifted = in_stage("lifting", [&] { return rgb ? lift(out.smoothed, cfg.secondary_space) : out.smoothed; });
  out.seconds.lifting = seconds_since(start);

  ThresholdResult stage3 =
      in_stage("thresholding", [&] { return threshold_cached(out.lifted, cfg.k, cfg.restarts, cfg.seed); });
  out.segmentation = std::move(stage3.segmentation);
  out.rendered = std::move(stage3.rendered);
  out.seconds.thresholding = stage3.seconds;
  return out;
}

void write_segmentation(const ThresholdResult& result, const std::filesystem::path& out_dir) {
  std::filesystem::create_directories(out_dir);
  io::save_labels(result.segmentation.labels, out_dir / "labels.pgm");
  io::save_image(result.rendered, out_dir / raster_name("phases", result.rendered.channels()));
}

PipelineResult run_pipeline(const std::filesystem::path& input,
                            const std::optional<std::filesystem::path>& mask_path,
                            const PipelineConfig& cfg, const std::filesystem::path& out_dir) {
  const Image f = io::load_image(input);
  const Mask mask = mask_path ? io::load_mask(*mask_path, f.channels())
                              : Mask::full(f.height(), f.width(), f.channels());
  mask.check_matches(f.height(), f.width(), f.channels());
  PipelineResult result = run_pipeline(f, mask, cfg);

  std::filesystem::create_directories(out_dir);
  const auto cache = cfg.cache_path.empty() ? out_dir / "gstar.slat" : cfg.cache_path;
  io::save_image(result.smoothed, out_dir / raster_name("smoothed", result.smoothed.channels()));
  io::save_raw(result.lifted, cache);
  write_segmentation({result.segmentation, result.rendered, result.seconds.thresholding}, out_dir);

  KeyValues manifest = cfg.to_key_values();
  manifest.set("input", input.string());
  manifest.set("mask", mask_path ? mask_path->string() : "none");
  manifest.set("cache", cache.string());
  manifest.set("iterations", join_ints(result.iterations, ';'));
  std::vector<int> conv(result.converged.begin(), result.converged.end());
  manifest.set("converged", join_ints(conv, ';'));
  manifest.set("effective_k", std::to_string(result.segmentation.effective_k));
  manifest.set("objective", format_double(result.segmentation.objective));
  manifest.set("seconds_smoothing", format_double(result.seconds.smoothing));
  manifest.set("seconds_lifting", format_double(result.seconds.lifting));
  manifest.set("seconds_thresholding", format_double(result.seconds.thresholding));
  manifest.set("seconds_total", format_double(result.seconds.total()));
  io::write_file_atomic(out_dir / "manifest.txt", manifest.to_string());
  return result;
}

ThresholdResult rethreshold(const std::filesystem::path& cache, int k, int restarts,
                            std::uint64_t seed, const std::filesystem::path& out_dir) {
  const Image lifted = io::load_raw(cache);
  ThresholdResult result = threshold_cached(lifted, k, restarts, seed);
  write_segmentation(result, out_dir);
  KeyValues manifest;
  manifest.set("cache", cache.string());
  manifest.set("k", std::to_string(k));
  manifest.set("restarts", std::to_string(restarts));
  manifest.set("seed", std::to_string(seed));
  manifest.set("effective_k", std::to_string(result.segmentation.effective_k));
  manifest.set("objective", format_double(result.segmentation.objective));
  manifest.set("seconds_thresholding", format_double(result.seconds));
  manifest.set("seconds_total", format_double(result.seconds));
  io::write_file_atomic(out_dir / "manifest.txt", manifest.to_string());
  return result;
}

namespace {

ExperimentRow run_row(const KeyValues& kv, const std::filesystem::path& base_dir, std::size_t index) {
  ExperimentRow row;
  row.name = kv.get("name", "row" + std::to_string(index + 1));
  row.image = kv.get("image", "");
  try {
    Image clean;
    LabelMap truth;
    if (row.image.rfind("synthetic:", 0) == 0) {
      synthetic::Scene scene = synthetic::by_name(row.image.substr(10));
      clean = std::move(scene.image);
      truth = std::move(scene.truth);
    } else {
      if (row.image.empty()) throw ValidationError("row needs an image");
      clean = io::load_image(base_dir / row.image);
      truth = io::load_labels(base_dir / kv.get("truth"));
    }
    const DegradationSpec spec = DegradationSpec::from_key_values(kv);
    row.degradation = spec.label();

    KeyValues pipeline_kv = kv;
    if (!kv.has("model_blur") && spec.blur) {
      const auto& kern = spec.blur->kernel();
      if (kern.cols() != 1) throw ValidationError("set model_blur for non-vertical blur kernels");
      pipeline_kv.set("model_blur", std::to_string(kern.rows()));
    }
    PipelineConfig cfg = PipelineConfig::from_key_values(pipeline_kv);
    row.k = cfg.k;
    row.lambda = cfg.lambda;
    row.secondary_space = to_string(cfg.secondary_space);

    const Degraded degraded = degrade(clean, spec);
    const PipelineResult result = run_pipeline(degraded.image, degraded.mask, cfg);
    row.iterations = result.iterations;
    row.converged = std::all_of(result.converged.begin(), result.converged.end(), [](bool b) { return b; });
    row.runtime = result.seconds.total();
    row.accuracy = accuracy(result.segmentation.labels, truth).accuracy;
  } catch (const std::exception& e) {
    row.status = std::string("error: ") + e.what();
  }
  return row;
}

}  // namespace

std::vector<ExperimentRow> run_experiment(const std::string& manifest_text,
                                          const std::filesystem::path& base_dir,
                                          const ExperimentOptions& options) {
  const std::vector<KeyValues> blocks = parse_key_value_blocks(manifest_text);
  std::vector<ExperimentRow> rows(blocks.size());
  const std::size_t workers = static_cast<std::size_t>(std::max(1, options.workers));
  std::size_t next = 0;
  std::mutex lock;
  auto worker = [&] {
    for (;;) {
      std::size_t i;
      {
        std::lock_guard<std::mutex> guard(lock);
        if (next >= blocks.size()) return;
        i = next++;
      }
      rows[i] = run_row(blocks[i], base_dir, i);
    }
  };
  if (workers > 1 && blocks.size() > 1) {
    std::vector<std::future<void>> jobs;
    for (std::size_t w = 0; w < std::min(workers, blocks.size()); ++w)
      jobs.push_back(std::async(std::launch::async, worker));
    for (auto& j : jobs) j.get();
  } else {
    worker();
  }
  return rows;
}

std::string experiment_csv(const std::vector<ExperimentRow>& rows, bool include_timing) {
  std::ostringstream out;
  out << kExperimentHeader << "\n";
  for (const auto& r : rows) {
    const bool ok = r.status == "ok";
    out << csv_field(r.name) << ',' << csv_field(r.image) << ',' << csv_field(r.degradation) << ','
        << r.k << ',' << r.secondary_space << ',' << (ok ? format_double(r.lambda) : "") << ','
        << (ok ? format_double(r.accuracy) : "") << ',' << join_ints(r.iterations, ';') << ','
        << (ok ? (r.converged ? "true" : "false") : "") << ','
        << (ok && include_timing ? format_double(r.runtime) : "") << ',' << csv_field(r.status) << "\n";
  }
  return out.str();
}

}  // namespace slat
