// pointpe command-line tool: dataset preparation, classifier training,
// corruption sweeps, registration sweeps, and diagnostics. Every run persists
// its full parameter document as run_config.json; re-running with
// `--config <that file>` reproduces the outputs byte for byte. Flags given on
// the command line override values from --config.

#include <cstdio>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "pointpe/errors.hpp"
#include "pointpe/pipeline.hpp"

namespace {

constexpr int kExitOk = 0;
constexpr int kExitConfig = 2;
constexpr int kExitData = 3;
constexpr int kExitNumerical = 4;

// Loads --config (if present) before the real parse so that command-line
// flags override the file's values.
template <typename Params>
Params preload_config(const std::string& subcommand, int argc, char** argv) {
  for (int i = 2; i + 1 < argc; ++i) {
    if (std::string(argv[i]) == "--config") {
      const pointpe::RunConfig config = pointpe::RunConfig::load(argv[i + 1]);
      if (config.subcommand != subcommand)
        throw pointpe::ConfigError("--config is for subcommand '" + config.subcommand +
                                   "', not '" + subcommand + "'");
      return Params::from_json_string(config.params_json);
    }
  }
  return Params{};
}

void report(const pointpe::RunResult& result) {
  std::cout << result.summary << "\n";
  for (const auto& path : result.outputs) std::cout << "  " << path.string() << "\n";
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"pointpe: analytical per-point embeddings for point-cloud robustness"};
  app.require_subcommand(1);
  std::string config_path;

  // ---- dataset ------------------------------------------------------------
  pointpe::DatasetParams dataset_params;
  if (argc > 1 && std::string(argv[1]) == "dataset") {
    try {
      dataset_params = preload_config<pointpe::DatasetParams>("dataset", argc, argv);
    } catch (const pointpe::ConfigError& e) {
      std::cerr << "error: " << e.what() << "\n";
      return kExitConfig;
    }
  }
  auto* dataset_cmd = app.add_subcommand(
      "dataset", "Generate a point-cloud dataset (XYZ files + JSON manifest)");
  dataset_cmd->add_option("--config", config_path, "JSON run config; flags override it");
  dataset_cmd->add_option("--out", dataset_params.out_dir,
                          "Output directory (default: $POINTPE_OUT_DIR or '.')");
  dataset_cmd
      ->add_option("--synthetic", dataset_params.synthetic,
                   "CLASSESxPER_CLASS synthetic shape suite, classes <= 6")
      ->capture_default_str();
  dataset_cmd->add_option("--off-dir", dataset_params.off_dir,
                          "Directory of OFF meshes; subdirectories become classes");
  dataset_cmd
      ->add_option("--points", dataset_params.points, "Points per cloud")
      ->capture_default_str();
  dataset_cmd->add_option("--seed", dataset_params.seed, "RNG seed")->capture_default_str();

  // ---- train ----------------------------------------------------------------
  pointpe::TrainParams train_params;
  if (argc > 1 && std::string(argv[1]) == "train") {
    try {
      train_params = preload_config<pointpe::TrainParams>("train", argc, argv);
    } catch (const pointpe::ConfigError& e) {
      std::cerr << "error: " << e.what() << "\n";
      return kExitConfig;
    }
  }
  auto* train_cmd =
      app.add_subcommand("train", "Train the classifier head on frozen encoder features");
  train_cmd->add_option("--config", config_path, "JSON run config; flags override it");
  train_cmd->add_option("--manifest", train_params.manifest, "Training dataset manifest");
  train_cmd->add_option("--out", train_params.out_dir,
                        "Output directory (default: $POINTPE_OUT_DIR or '.')");
  train_cmd
      ->add_option("--encoder", train_params.encoder,
                   "Encoder kind: rff | relu_mlp | rff_attention | gaussian_pe | sinusoid_grid")
      ->capture_default_str();
  train_cmd->add_option("--dim", train_params.dim, "Embedding dimension K")
      ->capture_default_str();
  train_cmd
      ->add_option("--scale", train_params.scale,
                   "Encoder scale (RFF weight stddev; 0.09 for max pooling, 0.9 otherwise)")
      ->capture_default_str();
  train_cmd->add_option("--pool", train_params.pool, "Pooling: max | mean | median | sum")
      ->capture_default_str();
  train_cmd->add_option("--encoder-seed", train_params.encoder_seed, "Encoder weight seed")
      ->capture_default_str();
  train_cmd->add_option("--epochs", train_params.epochs, "Training epochs")
      ->capture_default_str();
  train_cmd->add_option("--batch", train_params.batch_size, "Minibatch size")
      ->capture_default_str();
  train_cmd->add_option("--lr", train_params.learning_rate, "Initial learning rate")
      ->capture_default_str();
  train_cmd
      ->add_flag("--no-cosine{false}", train_params.cosine_schedule,
                 "Disable the cosine learning-rate schedule")
      ->capture_default_str();
  train_cmd->add_option("--momentum", train_params.momentum, "SGD momentum")
      ->capture_default_str();
  train_cmd->add_flag("--augment-scale", train_params.augment_scale,
                      "Random per-cloud scaling in [2/3, 3/2]");
  train_cmd->add_flag("--augment-translate", train_params.augment_translate,
                      "Random per-cloud translation in [-0.2, 0.2]^3");
  train_cmd->add_option("--seed", train_params.seed, "Training seed")->capture_default_str();

  // ---- eval -----------------------------------------------------------------
  pointpe::EvalParams eval_params;
  if (argc > 1 && std::string(argv[1]) == "eval") {
    try {
      eval_params = preload_config<pointpe::EvalParams>("eval", argc, argv);
    } catch (const pointpe::ConfigError& e) {
      std::cerr << "error: " << e.what() << "\n";
      return kExitConfig;
    }
  }
  auto* eval_cmd = app.add_subcommand("eval", "Evaluate a checkpoint under corruptions");
  eval_cmd->add_option("--config", config_path, "JSON run config; flags override it");
  eval_cmd->add_option("--checkpoint", eval_params.checkpoint, "checkpoint.json from train");
  eval_cmd->add_option("--manifest", eval_params.manifest, "Test dataset manifest");
  eval_cmd->add_option("--out", eval_params.out_dir,
                       "Output directory (default: $POINTPE_OUT_DIR or '.')");
  eval_cmd
      ->add_option("--corruption", eval_params.corruption,
                   "Corruption kind (uniform_noise, gaussian_noise, impulse_noise, "
                   "upsampling_outliers, background_outliers, ball_outliers, rotation, "
                   "shear, cutout, density_decrease) or 'none'")
      ->capture_default_str();
  eval_cmd
      ->add_option("--levels", eval_params.levels,
                   "'all' or comma-separated 1-based severity levels; 0 uses --parameter")
      ->capture_default_str();
  eval_cmd
      ->add_option("--parameter", eval_params.parameter,
                   "Explicit severity parameter used when a level is 0")
      ->capture_default_str();
  eval_cmd
      ->add_option("--ball-fraction", eval_params.ball_fraction,
                   "Outlier fraction for ball_outliers")
      ->capture_default_str();
  eval_cmd->add_option("--seed", eval_params.seed, "Corruption seed")->capture_default_str();

  // ---- register ---------------------------------------------------------------
  pointpe::RegisterParams register_params;
  if (argc > 1 && std::string(argv[1]) == "register") {
    try {
      register_params = preload_config<pointpe::RegisterParams>("register", argc, argv);
    } catch (const pointpe::ConfigError& e) {
      std::cerr << "error: " << e.what() << "\n";
      return kExitConfig;
    }
  }
  auto* register_cmd =
      app.add_subcommand("register", "Feature-space Gauss-Newton registration noise sweep");
  register_cmd->add_option("--config", config_path, "JSON run config; flags override it");
  register_cmd->add_option("--manifest", register_params.manifest,
                           "Optional dataset manifest; default: random asymmetric clouds");
  register_cmd->add_option("--out", register_params.out_dir,
                           "Output directory (default: $POINTPE_OUT_DIR or '.')");
  register_cmd->add_option("--noise", register_params.noise, "Noise kind (gaussian)")
      ->capture_default_str();
  register_cmd
      ->add_option("--sigmas", register_params.sigmas,
                   "Noise stddev sweep, lo:hi:step or comma list")
      ->capture_default_str();
  register_cmd
      ->add_option("--pool", register_params.pools, "Comma-separated pooling kinds")
      ->capture_default_str();
  register_cmd->add_option("--trials", register_params.trials, "Trials per (pool, sigma)")
      ->capture_default_str();
  register_cmd
      ->add_option("--clouds", register_params.clouds, "Random cloud count (no manifest)")
      ->capture_default_str();
  register_cmd->add_option("--points", register_params.points, "Points per random cloud")
      ->capture_default_str();
  register_cmd->add_option("--dim", register_params.dim, "RFF embedding dimension")
      ->capture_default_str();
  register_cmd
      ->add_option("--encoder-scale", register_params.encoder_scale, "RFF weight stddev")
      ->capture_default_str();
  register_cmd
      ->add_option("--encoder-seed", register_params.encoder_seed, "Encoder weight seed")
      ->capture_default_str();
  register_cmd
      ->add_option("--max-angle", register_params.max_angle_deg,
                   "Max perturbation angle, degrees")
      ->capture_default_str();
  register_cmd
      ->add_option("--max-translation", register_params.max_translation,
                   "Max per-axis perturbation translation")
      ->capture_default_str();
  register_cmd->add_option("--max-iters", register_params.max_iters, "Solver iteration cap")
      ->capture_default_str();
  register_cmd->add_option("--seed", register_params.seed, "Sweep seed")->capture_default_str();
  register_cmd
      ->add_option("--threads", register_params.threads,
                   "Worker threads (0 = hardware concurrency)")
      ->capture_default_str();

  // ---- diagnose ---------------------------------------------------------------
  pointpe::DiagnoseParams diagnose_params;
  if (argc > 1 && std::string(argv[1]) == "diagnose") {
    try {
      diagnose_params = preload_config<pointpe::DiagnoseParams>("diagnose", argc, argv);
    } catch (const pointpe::ConfigError& e) {
      std::cerr << "error: " << e.what() << "\n";
      return kExitConfig;
    }
  }
  auto* diagnose_cmd = app.add_subcommand("diagnose", "Analysis sweeps and illustrations");
  diagnose_cmd->add_option("--config", config_path, "JSON run config; flags override it");
  diagnose_cmd
      ->add_option("--what", diagnose_params.what,
                   "distance-curve | frequency-law | illustration | scale-sweep | "
                   "pooling-robustness")
      ->capture_default_str();
  diagnose_cmd->add_option("--out", diagnose_params.out_dir,
                           "Output directory (default: $POINTPE_OUT_DIR or '.')");
  diagnose_cmd->add_flag("--svg", diagnose_params.svg, "Also render an SVG plot");
  diagnose_cmd->add_option("--seed", diagnose_params.seed, "RNG seed")->capture_default_str();
  diagnose_cmd
      ->add_option("--encoder", diagnose_params.encoder, "Encoder kind for distance-curve")
      ->capture_default_str();
  diagnose_cmd->add_option("--dim", diagnose_params.dim, "Embedding dimension")
      ->capture_default_str();
  diagnose_cmd->add_option("--scale", diagnose_params.scale, "Encoder scale")
      ->capture_default_str();
  diagnose_cmd->add_option("--draws", diagnose_params.draws, "Encoder redraws per distance")
      ->capture_default_str();
  diagnose_cmd
      ->add_option("--distances", diagnose_params.distances,
                   "Displacements, lo:hi:step or comma list")
      ->capture_default_str();
  diagnose_cmd->add_option("--law-dim", diagnose_params.law_dim, "Frequency-law dimension D")
      ->capture_default_str();
  diagnose_cmd
      ->add_option("--law-bandwidth", diagnose_params.law_bandwidth, "Frequency-law bandwidth B")
      ->capture_default_str();
  diagnose_cmd
      ->add_option("--law-samples", diagnose_params.law_samples, "Monte-Carlo sample count")
      ->capture_default_str();
  diagnose_cmd
      ->add_option("--points", diagnose_params.points, "1-D cloud for illustration, comma list")
      ->capture_default_str();
  diagnose_cmd
      ->add_option("--offsets", diagnose_params.offsets, "Noise offsets for illustration")
      ->capture_default_str();
  diagnose_cmd
      ->add_option("--grid", diagnose_params.grid, "Impulse bins / sinc bandwidth")
      ->capture_default_str();
  diagnose_cmd->add_option("--train-manifest", diagnose_params.train_manifest,
                           "Training manifest for sweep diagnostics");
  diagnose_cmd->add_option("--test-manifest", diagnose_params.test_manifest,
                           "Test manifest for sweep diagnostics");
  diagnose_cmd->add_option("--scales", diagnose_params.scales, "RFF scales for scale-sweep")
      ->capture_default_str();
  diagnose_cmd->add_option("--pool", diagnose_params.pool, "Pooling for scale-sweep")
      ->capture_default_str();
  diagnose_cmd
      ->add_option("--pools", diagnose_params.pools, "Pooling kinds for pooling-robustness")
      ->capture_default_str();
  diagnose_cmd
      ->add_option("--corruptions", diagnose_params.corruptions,
                   "Corruption kinds for pooling-robustness")
      ->capture_default_str();
  diagnose_cmd->add_option("--epochs", diagnose_params.epochs, "Head training epochs")
      ->capture_default_str();

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kExitConfig;
  }

  try {
    if (dataset_cmd->parsed()) {
      report(pointpe::cmd_dataset(dataset_params));
    } else if (train_cmd->parsed()) {
      report(pointpe::cmd_train(train_params));
    } else if (eval_cmd->parsed()) {
      report(pointpe::cmd_eval(eval_params));
    } else if (register_cmd->parsed()) {
      report(pointpe::cmd_register(register_params));
    } else if (diagnose_cmd->parsed()) {
      report(pointpe::cmd_diagnose(diagnose_params));
    }
  } catch (const pointpe::ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return kExitConfig;
  } catch (const std::invalid_argument& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return kExitConfig;
  } catch (const pointpe::DataError& e) {
    std::cerr << "data error: " << e.what() << "\n";
    return kExitData;
  } catch (const pointpe::NumericalError& e) {
    std::cerr << "numerical error: " << e.what() << "\n";
    return kExitNumerical;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitNumerical;
  }
  return kExitOk;
}
