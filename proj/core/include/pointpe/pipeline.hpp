#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "pointpe/errors.hpp"

namespace pointpe {

/// A persisted, reproducible run: subcommand plus its full parameter
/// document (canonical JSON, sorted keys). Re-running a saved RunConfig
/// reproduces output files byte for byte.
struct RunConfig {
  std::string subcommand;
  std::string params_json = "{}";

  std::string hash_hex() const;
  std::string to_json_string() const;
  static RunConfig from_json_string(const std::string& doc);
  void save(const std::filesystem::path& path) const;
  static RunConfig load(const std::filesystem::path& path);
};

struct RunResult {
  std::vector<std::filesystem::path> outputs;
  std::string summary;
};

struct DatasetParams {
  std::string out_dir;
  std::string synthetic = "6x200";  // CLASSESxPER_CLASS; ignored when off_dir set
  std::string off_dir;              // directory of OFF files; subdirs = classes
  int points = 1024;
  std::uint64_t seed = 7;

  std::string to_json_string() const;
  static DatasetParams from_json_string(const std::string& doc);
};

struct TrainParams {
  std::string manifest;
  std::string out_dir;
  std::string encoder = "rff";
  int dim = 1024;
  double scale = 0.09;
  std::string pool = "max";
  std::uint64_t encoder_seed = 1;
  int epochs = 60;
  int batch_size = 64;
  double learning_rate = 0.05;
  bool cosine_schedule = true;
  double momentum = 0.9;
  bool augment_scale = false;
  bool augment_translate = false;
  std::uint64_t seed = 3;

  std::string to_json_string() const;
  static TrainParams from_json_string(const std::string& doc);
};

struct EvalParams {
  std::string checkpoint;
  std::string manifest;
  std::string out_dir;
  std::string corruption = "none";  // corruption kind or "none"
  std::string levels = "all";       // "all" or comma-separated 1-based levels
  double parameter = 0.0;           // explicit severity (level 0)
  double ball_fraction = 0.1;
  std::uint64_t seed = 5;

  std::string to_json_string() const;
  static EvalParams from_json_string(const std::string& doc);
};

struct RegisterParams {
  std::string out_dir;
  std::string manifest;          // optional; default: random asymmetric clouds
  std::string noise = "gaussian";
  std::string sigmas = "0.01:0.1:0.01";  // lo:hi:step or comma list
  std::string pools = "mean,max";
  int trials = 50;
  int clouds = 8;
  int points = 200;
  int dim = 256;
  double encoder_scale = 0.5;
  std::uint64_t encoder_seed = 21;
  double max_angle_deg = 30.0;
  double max_translation = 0.3;
  int max_iters = 60;
  std::uint64_t seed = 11;
  int threads = 0;  // 0 = hardware concurrency

  std::string to_json_string() const;
  static RegisterParams from_json_string(const std::string& doc);
};

struct DiagnoseParams {
  std::string what = "distance-curve";  // distance-curve | frequency-law |
                                        // illustration | scale-sweep |
                                        // pooling-robustness
  std::string out_dir;
  bool svg = false;
  std::uint64_t seed = 13;

  // distance-curve
  std::string encoder = "rff";
  int dim = 512;
  double scale = 1.0;
  int draws = 50;
  std::string distances = "0:2:0.1";

  // frequency-law
  int law_dim = 3;
  int law_bandwidth = 8;
  int law_samples = 100000;

  // illustration
  std::string points = "0.3,0.55,0.72";
  std::string offsets = "0.01,0.05";
  int grid = 64;

  // scale-sweep / pooling-robustness
  std::string train_manifest;
  std::string test_manifest;
  std::string scales = "0.05,0.1,0.5,1,5,10";
  std::string pool = "mean";
  std::string pools = "max,mean,median";
  std::string corruptions = "background_outliers,gaussian_noise";
  int epochs = 40;

  std::string to_json_string() const;
  static DiagnoseParams from_json_string(const std::string& doc);
};

RunResult cmd_dataset(const DatasetParams& p);
RunResult cmd_train(const TrainParams& p);
RunResult cmd_eval(const EvalParams& p);
RunResult cmd_register(const RegisterParams& p);
RunResult cmd_diagnose(const DiagnoseParams& p);

/// Dispatch by subcommand name; the entry point for re-running a persisted
/// RunConfig.
RunResult run_subcommand(const RunConfig& config);

/// out_dir fallback: the POINTPE_OUT_DIR environment variable, else ".".
std::filesystem::path resolve_out_dir(const std::string& out_dir);

}  // namespace pointpe
