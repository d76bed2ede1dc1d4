#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "slat/color.hpp"
#include "slat/image.hpp"
#include "slat/keyvalue.hpp"
#include "slat/smoothing.hpp"
#include "slat/thresholding.hpp"

namespace slat {

struct PipelineConfig {
  double lambda = 0.0;  // required; no default
  double mu = 1.0;
  Fidelity fidelity = Fidelity::kL2;
  int k = 0;            // required
  double tol = 1e-4;
  int max_iter = 200;
  int restarts = 10;
  std::uint64_t seed = 0;
  SecondarySpace secondary_space = SecondarySpace::kLab;
  Index blur_length = 0;  // vertical motion blur modeled inside the fidelity; 0 = none
  std::filesystem::path cache_path;  // where to write g*; empty = <out_dir>/gstar.slat
  bool parallel = true;

  void validate() const;
  SolverConfig solver() const;
  LinearOperatorXd op() const;

  KeyValues to_key_values() const;
  static PipelineConfig from_key_values(const KeyValues& kv);
};

Fidelity parse_fidelity(const std::string& name);
std::string to_string(Fidelity fidelity);

struct StageSeconds {
  double smoothing = 0.0;
  double lifting = 0.0;
  double thresholding = 0.0;
  double total() const { return smoothing + lifting + thresholding; }
};

struct PipelineResult {
  Image smoothed;  // g, per-channel rescaled Stage-1 output
  Image lifted;    // g*, the Stage-3 input
  Segmentation segmentation;
  Image rendered;  // phases painted with their mean color over g
  std::vector<int> iterations;
  std::vector<bool> converged;
  StageSeconds seconds;
};

/// Stages 1-3 in memory.
PipelineResult run_pipeline(const Image& f, const Mask& mask, const PipelineConfig& cfg);

/// Stage 3 only, on a cached g*. No Stage-1 work happens here.
struct ThresholdResult {
  Segmentation segmentation;
  Image rendered;
  double seconds = 0.0;
};
ThresholdResult threshold_cached(const Image& lifted, int k, int restarts, std::uint64_t seed);

/// File-level driver: reads the input (and optional mask), runs all stages
/// and writes smoothed.ppm|pgm, the g* cache, labels.pgm, phases.ppm|pgm and
/// manifest.txt into out_dir.
PipelineResult run_pipeline(const std::filesystem::path& input,
                            const std::optional<std::filesystem::path>& mask,
                            const PipelineConfig& cfg, const std::filesystem::path& out_dir);

/// Reads a g* cache and re-runs Stage 3, writing labels.pgm, phases.ppm|pgm
/// and manifest.txt into out_dir.
ThresholdResult rethreshold(const std::filesystem::path& cache, int k, int restarts,
                            std::uint64_t seed, const std::filesystem::path& out_dir);

/// Writes labels.pgm and the rendered phase image into out_dir.
void write_segmentation(const ThresholdResult& result, const std::filesystem::path& out_dir);

/// One row of the experiment report.
struct ExperimentRow {
  std::string name;
  std::string image;
  std::string degradation;
  int k = 0;
  std::string secondary_space;
  double lambda = 0.0;
  double accuracy = 0.0;
  std::vector<int> iterations;
  bool converged = false;
  double runtime = 0.0;
  std::string status = "ok";
};

struct ExperimentOptions {
  int workers = 1;
  bool include_timing = true;  // off makes reports byte-identical across runs
};

inline constexpr const char* kExperimentHeader =
    "name,image,degradation,k,secondary_space,lambda,accuracy,iterations,converged,runtime_s,status";

/// Runs every manifest row: generate or load the image, degrade it, run the
/// pipeline, score against ground truth. Failures are recorded per row.
std::vector<ExperimentRow> run_experiment(const std::string& manifest_text,
                                          const std::filesystem::path& base_dir,
                                          const ExperimentOptions& options);

std::string experiment_csv(const std::vector<ExperimentRow>& rows, bool include_timing = true);

}  // namespace slat
