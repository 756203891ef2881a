#include "pointpe/pipeline.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <set>
#include <sstream>

#include <json.hpp>

#include "pointpe/classifier.hpp"
#include "pointpe/corruption.hpp"
#include "pointpe/diagnostics.hpp"
#include "pointpe/encoder.hpp"
#include "pointpe/parallel.hpp"
#include "pointpe/point_cloud.hpp"
#include "pointpe/registration.hpp"
#include "pointpe/report.hpp"

namespace pointpe {

using json = nlohmann::json;
namespace fs = std::filesystem;

namespace {

json parse_doc(const std::string& text, const char* what) {
  try {
    return json::parse(text);
  } catch (const json::exception& e) {
    throw ConfigError(std::string(what) + ": " + e.what());
  }
}

std::vector<std::string> split(const std::string& text, char sep) {
  std::vector<std::string> parts;
  std::string item;
  std::istringstream in(text);
  while (std::getline(in, item, sep))
    if (!item.empty()) parts.push_back(item);
  return parts;
}

// "lo:hi:step" inclusive range, or a comma-separated list.
std::vector<double> parse_values(const std::string& text) {
  const auto range = split(text, ':');
  std::vector<double> values;
  try {
    if (range.size() == 3) {
      const double lo = std::stod(range[0]);
      const double hi = std::stod(range[1]);
      const double step = std::stod(range[2]);
      if (!(step > 0.0)) throw ConfigError("range step must be > 0: " + text);
      for (double v = lo; v <= hi + step * 0.5; v += step) values.push_back(v);
      return values;
    }
    for (const auto& item : split(text, ',')) values.push_back(std::stod(item));
  } catch (const std::invalid_argument&) {
    throw ConfigError("cannot parse value list: " + text);
  }
  if (values.empty()) throw ConfigError("empty value list: " + text);
  return values;
}

}  // namespace

std::string RunConfig::hash_hex() const {
  return pointpe::hash_hex(fnv1a64(subcommand + "\n" + params_json));
}

std::string RunConfig::to_json_string() const {
  const json doc{{"subcommand", subcommand}, {"params", parse_doc(params_json, "params")}};
  return doc.dump(2) + "\n";
}

RunConfig RunConfig::from_json_string(const std::string& doc_str) {
  const json doc = parse_doc(doc_str, "run config");
  if (!doc.contains("subcommand") || !doc.contains("params"))
    throw ConfigError("run config: missing subcommand/params");
  return {doc["subcommand"].get<std::string>(), doc["params"].dump()};
}

void RunConfig::save(const fs::path& path) const { atomic_write(path, to_json_string()); }

RunConfig RunConfig::load(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config " + path.string());
  std::ostringstream buf;
  buf << in.rdbuf();
  return from_json_string(buf.str());
}

fs::path resolve_out_dir(const std::string& out_dir) {
  if (!out_dir.empty()) return out_dir;
  if (const char* env = std::getenv("POINTPE_OUT_DIR"); env && *env) return env;
  return ".";
}

// ---------------------------------------------------------------------------
// Param documents. Serialization keeps every field so a persisted RunConfig
// fully determines the run.

#define POINTPE_GET(doc, field) p.field = doc.value(#field, p.field)

std::string DatasetParams::to_json_string() const {
  const json doc{{"out_dir", out_dir}, {"synthetic", synthetic}, {"off_dir", off_dir},
                 {"points", points},   {"seed", seed}};
  return doc.dump();
}

DatasetParams DatasetParams::from_json_string(const std::string& text) {
  const json doc = parse_doc(text, "dataset params");
  DatasetParams p;
  POINTPE_GET(doc, out_dir);
  POINTPE_GET(doc, synthetic);
  POINTPE_GET(doc, off_dir);
  POINTPE_GET(doc, points);
  POINTPE_GET(doc, seed);
  return p;
}

std::string TrainParams::to_json_string() const {
  const json doc{{"manifest", manifest},
                 {"out_dir", out_dir},
                 {"encoder", encoder},
                 {"dim", dim},
                 {"scale", scale},
                 {"pool", pool},
                 {"encoder_seed", encoder_seed},
                 {"epochs", epochs},
                 {"batch_size", batch_size},
                 {"learning_rate", learning_rate},
                 {"cosine_schedule", cosine_schedule},
                 {"momentum", momentum},
                 {"augment_scale", augment_scale},
                 {"augment_translate", augment_translate},
                 {"seed", seed}};
  return doc.dump();
}

TrainParams TrainParams::from_json_string(const std::string& text) {
  const json doc = parse_doc(text, "train params");
  TrainParams p;
  POINTPE_GET(doc, manifest);
  POINTPE_GET(doc, out_dir);
  POINTPE_GET(doc, encoder);
  POINTPE_GET(doc, dim);
  POINTPE_GET(doc, scale);
  POINTPE_GET(doc, pool);
  POINTPE_GET(doc, encoder_seed);
  POINTPE_GET(doc, epochs);
  POINTPE_GET(doc, batch_size);
  POINTPE_GET(doc, learning_rate);
  POINTPE_GET(doc, cosine_schedule);
  POINTPE_GET(doc, momentum);
  POINTPE_GET(doc, augment_scale);
  POINTPE_GET(doc, augment_translate);
  POINTPE_GET(doc, seed);
  return p;
}

std::string EvalParams::to_json_string() const {
  const json doc{{"checkpoint", checkpoint}, {"manifest", manifest},
                 {"out_dir", out_dir},       {"corruption", corruption},
                 {"levels", levels},         {"parameter", parameter},
                 {"ball_fraction", ball_fraction}, {"seed", seed}};
  return doc.dump();
}

EvalParams EvalParams::from_json_string(const std::string& text) {
  const json doc = parse_doc(text, "eval params");
  EvalParams p;
  POINTPE_GET(doc, checkpoint);
  POINTPE_GET(doc, manifest);
  POINTPE_GET(doc, out_dir);
  POINTPE_GET(doc, corruption);
  POINTPE_GET(doc, levels);
  POINTPE_GET(doc, parameter);
  POINTPE_GET(doc, ball_fraction);
  POINTPE_GET(doc, seed);
  return p;
}

std::string RegisterParams::to_json_string() const {
  const json doc{{"out_dir", out_dir},
                 {"manifest", manifest},
                 {"noise", noise},
                 {"sigmas", sigmas},
                 {"pools", pools},
                 {"trials", trials},
                 {"clouds", clouds},
                 {"points", points},
                 {"dim", dim},
                 {"encoder_scale", encoder_scale},
                 {"encoder_seed", encoder_seed},
                 {"max_angle_deg", max_angle_deg},
                 {"max_translation", max_translation},
                 {"max_iters", max_iters},
                 {"seed", seed},
                 {"threads", threads}};
  return doc.dump();
}

RegisterParams RegisterParams::from_json_string(const std::string& text) {
  const json doc = parse_doc(text, "register params");
  RegisterParams p;
  POINTPE_GET(doc, out_dir);
  POINTPE_GET(doc, manifest);
  POINTPE_GET(doc, noise);
  POINTPE_GET(doc, sigmas);
  POINTPE_GET(doc, pools);
  POINTPE_GET(doc, trials);
  POINTPE_GET(doc, clouds);
  POINTPE_GET(doc, points);
  POINTPE_GET(doc, dim);
  POINTPE_GET(doc, encoder_scale);
  POINTPE_GET(doc, encoder_seed);
  POINTPE_GET(doc, max_angle_deg);
  POINTPE_GET(doc, max_translation);
  POINTPE_GET(doc, max_iters);
  POINTPE_GET(doc, seed);
  POINTPE_GET(doc, threads);
  return p;
}

std::string DiagnoseParams::to_json_string() const {
  const json doc{{"what", what},
                 {"out_dir", out_dir},
                 {"svg", svg},
                 {"seed", seed},
                 {"encoder", encoder},
                 {"dim", dim},
                 {"scale", scale},
                 {"draws", draws},
                 {"distances", distances},
                 {"law_dim", law_dim},
                 {"law_bandwidth", law_bandwidth},
                 {"law_samples", law_samples},
                 {"points", points},
                 {"offsets", offsets},
                 {"grid", grid},
                 {"train_manifest", train_manifest},
                 {"test_manifest", test_manifest},
                 {"scales", scales},
                 {"pool", pool},
                 {"pools", pools},
                 {"corruptions", corruptions},
                 {"epochs", epochs}};
  return doc.dump();
}

DiagnoseParams DiagnoseParams::from_json_string(const std::string& text) {
  const json doc = parse_doc(text, "diagnose params");
  DiagnoseParams p;
  POINTPE_GET(doc, what);
  POINTPE_GET(doc, out_dir);
  POINTPE_GET(doc, svg);
  POINTPE_GET(doc, seed);
  POINTPE_GET(doc, encoder);
  POINTPE_GET(doc, dim);
  POINTPE_GET(doc, scale);
  POINTPE_GET(doc, draws);
  POINTPE_GET(doc, distances);
  POINTPE_GET(doc, law_dim);
  POINTPE_GET(doc, law_bandwidth);
  POINTPE_GET(doc, law_samples);
  POINTPE_GET(doc, points);
  POINTPE_GET(doc, offsets);
  POINTPE_GET(doc, grid);
  POINTPE_GET(doc, train_manifest);
  POINTPE_GET(doc, test_manifest);
  POINTPE_GET(doc, scales);
  POINTPE_GET(doc, pool);
  POINTPE_GET(doc, pools);
  POINTPE_GET(doc, corruptions);
  POINTPE_GET(doc, epochs);
  return p;
}

#undef POINTPE_GET

// ---------------------------------------------------------------------------

RunResult cmd_dataset(const DatasetParams& p) {
  if (p.points < 1) throw ConfigError("dataset: --points must be >= 1");
  const fs::path out = resolve_out_dir(p.out_dir);
  fs::create_directories(out);

  std::vector<ManifestEntry> entries;
  std::size_t written = 0;
  int classes = 0;
  const SeededRng base(p.seed);

  const auto write_cloud = [&](const PointCloud& pc, int label) {
    char name[32];
    std::snprintf(name, sizeof(name), "cloud_%06zu.xyz", written);
    save_xyz(pc, out / name);
    entries.push_back({name, label});
    ++written;
  };

  if (!p.off_dir.empty()) {
    if (!fs::is_directory(p.off_dir)) throw DataError("dataset: no such directory " + p.off_dir);
    // Subdirectories become classes (sorted); bare OFF files map to class 0.
    std::vector<fs::path> class_dirs;
    for (const auto& e : fs::directory_iterator(p.off_dir))
      if (e.is_directory()) class_dirs.push_back(e.path());
    std::sort(class_dirs.begin(), class_dirs.end());
    if (class_dirs.empty()) class_dirs.push_back(p.off_dir);

    for (std::size_t c = 0; c < class_dirs.size(); ++c) {
      std::vector<fs::path> files;
      for (const auto& e : fs::directory_iterator(class_dirs[c]))
        if (e.path().extension() == ".off") files.push_back(e.path());
      std::sort(files.begin(), files.end());
      for (const auto& file : files) {
        SeededRng rng = base.fork(written);
        const TriangleMesh mesh = load_off(file);
        write_cloud(normalize(sample_surface(mesh, static_cast<std::size_t>(p.points), rng)),
                    static_cast<int>(c));
      }
    }
    if (written == 0) throw DataError("dataset: no OFF files under " + p.off_dir);
    classes = static_cast<int>(class_dirs.size());
  } else {
    const auto dims = split(p.synthetic, 'x');
    if (dims.size() != 2) throw ConfigError("dataset: --synthetic expects CLASSESxPER_CLASS");
    int n_classes = 0, per_class = 0;
    try {
      n_classes = std::stoi(dims[0]);
      per_class = std::stoi(dims[1]);
    } catch (const std::exception&) {
      throw ConfigError("dataset: cannot parse --synthetic " + p.synthetic);
    }
    if (n_classes < 1 || n_classes > kShapeClassCount)
      throw ConfigError("dataset: classes must be in [1, 6]");
    if (per_class < 1) throw ConfigError("dataset: per-class count must be >= 1");
    for (int c = 0; c < n_classes; ++c)
      for (int i = 0; i < per_class; ++i) {
        SeededRng rng = base.fork(static_cast<std::uint64_t>(c) * 100003 + i);
        write_cloud(make_shape(static_cast<ShapeKind>(c), static_cast<std::size_t>(p.points), rng),
                    c);
      }
    classes = n_classes;
  }

  save_manifest(entries, out / "manifest.json");
  RunConfig config{"dataset", p.to_json_string()};
  config.save(out / "run_config.json");

  RunResult result;
  result.outputs = {out / "manifest.json", out / "run_config.json"};
  result.summary = "wrote " + std::to_string(written) + " clouds in " +
                   std::to_string(classes) + " classes to " + out.string();
  return result;
}

RunResult cmd_train(const TrainParams& p) {
  // Validate everything before touching data or writing files.
  const EncoderKind kind = encoder_kind_from_string(p.encoder);
  const PoolKind pooling = pool_kind_from_string(p.pool);
  if (p.manifest.empty()) throw ConfigError("train: --manifest is required");
  if (p.dim < 1) throw ConfigError("train: --dim must be >= 1");
  if (!(p.scale > 0.0)) throw ConfigError("train: --scale must be > 0");
  if (p.epochs < 1 || p.batch_size < 1) throw ConfigError("train: bad epochs/batch");

  TrainConfig cfg;
  cfg.epochs = p.epochs;
  cfg.batch_size = p.batch_size;
  cfg.learning_rate = p.learning_rate;
  cfg.cosine_schedule = p.cosine_schedule;
  cfg.momentum = p.momentum;
  cfg.augment_scale = p.augment_scale;
  cfg.augment_translate = p.augment_translate;
  cfg.seed = p.seed;

  const Dataset dataset = load_dataset(p.manifest);
  const Encoder encoder = build_encoder(kind, 3, p.dim, p.scale, p.encoder_seed);
  const TrainResult trained = fit(dataset, encoder, pooling, cfg);

  const fs::path out = resolve_out_dir(p.out_dir);
  fs::create_directories(out);
  RunConfig config{"train", p.to_json_string()};

  Checkpoint ckpt{trained.model, encoder, pooling, cfg};
  save_checkpoint(ckpt, out / "checkpoint.json");

  CsvWriter curve;
  curve.comment("config_hash: " + config.hash_hex());
  curve.comment("schema: epoch (index), loss (mean cross-entropy)");
  curve.header({"epoch", "loss"});
  for (std::size_t e = 0; e < trained.epoch_loss.size(); ++e)
    curve.row({std::to_string(e), format_double(trained.epoch_loss[e])});
  curve.write(out / "training_curve.csv");

  config.save(out / "run_config.json");

  RunResult result;
  result.outputs = {out / "checkpoint.json", out / "training_curve.csv",
                    out / "run_config.json"};
  result.summary = "train accuracy " + format_fixed(trained.final_train_accuracy * 100, 2) +
                   "% after " + std::to_string(p.epochs) + " epochs";
  return result;
}

RunResult cmd_eval(const EvalParams& p) {
  if (p.checkpoint.empty()) throw ConfigError("eval: --checkpoint is required");
  if (p.manifest.empty()) throw ConfigError("eval: --manifest is required");

  const Checkpoint ckpt = load_checkpoint(p.checkpoint);
  const Dataset dataset = load_dataset(p.manifest);
  const RunConfig config{"eval", p.to_json_string()};

  struct Cell {
    std::string corruption;
    int level;
    EvalResult eval;
  };
  std::vector<Cell> cells;

  if (p.corruption == "none") {
    cells.push_back({"none", 0, evaluate(ckpt.model, ckpt.encoder, ckpt.pooling, dataset)});
  } else {
    const CorruptionKind kind = corruption_kind_from_string(p.corruption);
    std::vector<int> levels;
    if (p.levels == "all") {
      const auto ladder = severity_table(kind);  // validates the kind has one
      for (int l = 1; l <= static_cast<int>(ladder.size()); ++l) levels.push_back(l);
    } else {
      for (const auto& item : split(p.levels, ',')) {
        try {
          levels.push_back(std::stoi(item));
        } catch (const std::exception&) {
          throw ConfigError("eval: bad --levels entry '" + item + "'");
        }
      }
    }
    for (const int level : levels) {
      CorruptionSpec spec;
      spec.kind = kind;
      spec.level = level;
      spec.parameter = p.parameter;
      spec.seed = p.seed;
      if (kind == CorruptionKind::ball_outliers) spec.extra["fraction"] = p.ball_fraction;
      cells.push_back(
          {p.corruption, level, evaluate(ckpt.model, ckpt.encoder, ckpt.pooling, dataset, spec)});
    }
  }

  const fs::path out = resolve_out_dir(p.out_dir);
  fs::create_directories(out);

  CsvWriter csv;
  csv.comment("config_hash: " + config.hash_hex());
  csv.comment("schema: corruption (kind or none), level (1-based ladder index, 0 = clean/explicit),"
              " pooling, scale (encoder scale), error_rate (1 - accuracy)");
  csv.header({"corruption", "level", "pooling", "scale", "error_rate"});
  for (const auto& cell : cells)
    csv.row({cell.corruption, std::to_string(cell.level), to_string(ckpt.pooling),
             format_double(ckpt.encoder.scale()), format_double(cell.eval.error_rate)});
  csv.write(out / "eval_results.csv");

  CsvWriter confusion;
  confusion.comment("config_hash: " + config.hash_hex());
  confusion.comment("schema: per-class confusion counts for each evaluated cell");
  confusion.header({"corruption", "level", "true_class", "predicted_class", "count"});
  for (const auto& cell : cells)
    for (int t = 0; t < cell.eval.confusion.rows(); ++t)
      for (int q = 0; q < cell.eval.confusion.cols(); ++q)
        confusion.row({cell.corruption, std::to_string(cell.level), std::to_string(t),
                       std::to_string(q), std::to_string(cell.eval.confusion(t, q))});
  confusion.write(out / "eval_confusion.csv");

  config.save(out / "run_config.json");

  RunResult result;
  result.outputs = {out / "eval_results.csv", out / "eval_confusion.csv",
                    out / "run_config.json"};
  result.summary = std::to_string(cells.size()) + " evaluation rows written";
  return result;
}

RunResult cmd_register(const RegisterParams& p) {
  if (p.noise != "gaussian")
    throw ConfigError("register: only --noise gaussian is supported");
  if (p.trials < 1 || p.clouds < 1 || p.points < 1)
    throw ConfigError("register: trials/clouds/points must be >= 1");

  std::vector<PoolKind> pools;
  for (const auto& name : split(p.pools, ',')) pools.push_back(pool_kind_from_string(name));
  if (pools.empty()) throw ConfigError("register: no pooling kinds");
  const std::vector<double> sigmas = parse_values(p.sigmas);

  Dataset dataset;
  if (!p.manifest.empty()) {
    dataset = load_dataset(p.manifest);
  } else {
    // Blob-mixture clouds: the synthetic surfaces all carry rotational
    // symmetries that make a ground-truth pose ambiguous, which would poison
    // the success metric.
    const SeededRng base(p.seed);
    for (int c = 0; c < p.clouds; ++c) {
      SeededRng rng = base.fork(777000 + static_cast<std::uint64_t>(c));
      dataset.clouds.push_back(
          make_asymmetric_cloud(static_cast<std::size_t>(p.points), rng));
    }
    dataset.num_classes = 1;
  }

  const Encoder encoder =
      build_encoder(EncoderKind::rff, 3, p.dim, p.encoder_scale, p.encoder_seed);

  NoiseSweepOptions opts;
  opts.trials_per_level = p.trials;
  opts.max_angle_deg = p.max_angle_deg;
  opts.max_translation = p.max_translation;
  opts.seed = p.seed;
  opts.threads = p.threads > 0 ? p.threads : static_cast<int>(default_thread_count());
  opts.reg.max_iters = p.max_iters;

  const auto rows = noise_sweep(dataset, encoder, pools, sigmas, opts);

  const fs::path out = resolve_out_dir(p.out_dir);
  fs::create_directories(out);
  const RunConfig config{"register", p.to_json_string()};

  CsvWriter csv;
  csv.comment("config_hash: " + config.hash_hex());
  csv.comment("success criterion: rotation error < " + format_double(opts.success_rot_deg) +
              " deg AND translation error < " + format_double(opts.success_trans));
  csv.comment("schema: pooling, sigma (noise stddev), trials, successes,"
              " mean_rot_err_deg, mean_trans_err");
  csv.header({"pooling", "sigma", "trials", "successes", "mean_rot_err_deg",
              "mean_trans_err"});
  for (const auto& row : rows)
    csv.row({to_string(row.pooling), format_double(row.sigma), std::to_string(row.trials),
             std::to_string(row.successes), format_double(row.mean_rot_err_deg),
             format_double(row.mean_trans_err)});
  csv.write(out / "register_sweep.csv");

  config.save(out / "run_config.json");

  RunResult result;
  result.outputs = {out / "register_sweep.csv", out / "run_config.json"};
  result.summary = std::to_string(rows.size()) + " sweep rows written";
  return result;
}

namespace {

RunResult diagnose_distance_curve(const DiagnoseParams& p, const fs::path& out,
                                  const RunConfig& config) {
  const EncoderKind kind = encoder_kind_from_string(p.encoder);
  const std::vector<double> distances = parse_values(p.distances);
  const SeededRng rng(p.seed);
  const auto rows = distance_curve(kind, 3, p.dim, p.scale, distances, p.draws, rng);

  CsvWriter csv;
  csv.comment("config_hash: " + config.hash_hex());
  csv.comment("schema: d (point displacement), mean_sq (mean squared encoding distance),"
              " std_sq, mean_l2 (mean encoding distance)");
  csv.header({"d", "mean_sq", "std_sq", "mean_l2"});
  std::vector<double> xs, ys;
  for (const auto& row : rows) {
    csv.row({format_double(row.d), format_double(row.mean_sq), format_double(row.std_sq),
             format_double(row.mean_l2)});
    xs.push_back(row.d);
    ys.push_back(row.mean_sq);
  }
  csv.write(out / "distance_curve.csv");

  RunResult result;
  result.outputs = {out / "distance_curve.csv"};
  if (p.svg) {
    LinePlot plot("encoding distance vs point distance", "d", "mean squared distance");
    plot.add_series(p.encoder + " scale=" + format_double(p.scale), xs, ys);
    plot.write_svg(out / "distance_curve.svg");
    result.outputs.push_back(out / "distance_curve.svg");
  }
  result.summary = std::to_string(rows.size()) + " distance rows";
  return result;
}

RunResult diagnose_frequency_law(const DiagnoseParams& p, const fs::path& out,
                                 const RunConfig& config) {
  SeededRng rng(p.seed);
  const auto report = frequency_law_check(p.law_dim, p.law_bandwidth, p.law_samples, rng);
  CsvWriter csv;
  csv.comment("config_hash: " + config.hash_hex());
  csv.comment("schema: dim, bandwidth, samples, sample_variance,"
              " target_variance (D*B^2/3), ks_distance to N(0, target)");
  csv.header({"dim", "bandwidth", "samples", "sample_variance", "target_variance",
              "ks_distance"});
  csv.row({std::to_string(p.law_dim), std::to_string(p.law_bandwidth),
           std::to_string(p.law_samples), format_double(report.sample_variance),
           format_double(report.target_variance), format_double(report.ks_distance)});
  csv.write(out / "frequency_law.csv");
  RunResult result;
  result.outputs = {out / "frequency_law.csv"};
  result.summary = "sample variance " + format_fixed(report.sample_variance, 4) +
                   " vs target " + format_fixed(report.target_variance, 4);
  return result;
}

RunResult diagnose_illustration(const DiagnoseParams& p, const fs::path& out,
                                const RunConfig& config) {
  const auto curves = encoding_illustration(parse_values(p.points),
                                            p.offsets.empty() ? std::vector<double>{}
                                                              : parse_values(p.offsets),
                                            p.grid);
  CsvWriter csv;
  csv.comment("config_hash: " + config.hash_hex());
  csv.comment("schema: curve (name), t in (0,1), value phi(t)");
  csv.header({"curve", "t", "value"});
  for (const auto& curve : curves)
    for (std::size_t i = 0; i < curve.ts.size(); ++i)
      csv.row({curve.name, format_double(curve.ts[i]), format_double(curve.values[i])});
  csv.write(out / "encoding_illustration.csv");

  RunResult result;
  result.outputs = {out / "encoding_illustration.csv"};
  if (p.svg) {
    LinePlot plot("1-D encodings", "t", "phi(t)");
    for (const auto& curve : curves)
      if (curve.name.rfind("sinc", 0) == 0) plot.add_series(curve.name, curve.ts, curve.values);
    plot.write_svg(out / "encoding_illustration.svg");
    result.outputs.push_back(out / "encoding_illustration.svg");
  }
  result.summary = std::to_string(curves.size()) + " curves";
  return result;
}

RunResult diagnose_scale_sweep(const DiagnoseParams& p, const fs::path& out,
                               const RunConfig& config) {
  if (p.train_manifest.empty() || p.test_manifest.empty())
    throw ConfigError("diagnose scale-sweep: --train-manifest and --test-manifest required");
  const Dataset train_set = load_dataset(p.train_manifest);
  const Dataset test_set = load_dataset(p.test_manifest);
  TrainConfig cfg;
  cfg.epochs = p.epochs;
  cfg.seed = p.seed;
  const auto rows = scale_sweep(parse_values(p.scales), train_set, test_set,
                                pool_kind_from_string(p.pool), cfg, p.dim, p.seed + 1,
                                default_thread_count());

  CsvWriter csv;
  csv.comment("config_hash: " + config.hash_hex());
  csv.comment("schema: scale (RFF stddev), train_acc, test_acc (fractions)");
  csv.header({"scale", "train_acc", "test_acc"});
  std::vector<double> xs, train_ys, test_ys;
  for (const auto& row : rows) {
    csv.row({format_double(row.scale), format_double(row.train_acc),
             format_double(row.test_acc)});
    xs.push_back(std::log10(row.scale));
    train_ys.push_back(row.train_acc);
    test_ys.push_back(row.test_acc);
  }
  csv.write(out / "scale_sweep.csv");

  RunResult result;
  result.outputs = {out / "scale_sweep.csv"};
  if (p.svg) {
    LinePlot plot("accuracy vs RFF scale", "log10 scale", "accuracy");
    plot.add_series("train", xs, train_ys);
    plot.add_series("test", xs, test_ys);
    plot.write_svg(out / "scale_sweep.svg");
    result.outputs.push_back(out / "scale_sweep.svg");
  }
  result.summary = std::to_string(rows.size()) + " scale rows";
  return result;
}

RunResult diagnose_pooling_robustness(const DiagnoseParams& p, const fs::path& out,
                                      const RunConfig& config) {
  if (p.train_manifest.empty() || p.test_manifest.empty())
    throw ConfigError("diagnose pooling-robustness: --train-manifest and --test-manifest required");
  const Dataset train_set = load_dataset(p.train_manifest);
  const Dataset test_set = load_dataset(p.test_manifest);

  std::vector<PoolKind> pools;
  for (const auto& name : split(p.pools, ',')) pools.push_back(pool_kind_from_string(name));
  std::vector<CorruptionKind> kinds;
  for (const auto& name : split(p.corruptions, ','))
    kinds.push_back(corruption_kind_from_string(name));

  RobustnessSweepOptions opts;
  opts.dim_out = p.dim;
  opts.encoder_seed = p.seed + 1;
  opts.corruption_seed = p.seed + 2;
  opts.train.epochs = p.epochs;
  opts.train.seed = p.seed;
  opts.threads = default_thread_count();
  const auto cells = pooling_robustness_sweep(train_set, test_set, pools, kinds, opts);

  CsvWriter csv;
  csv.comment("config_hash: " + config.hash_hex());
  csv.comment("schema: pooling, corruption (kind or clean), level, severity, error_rate");
  csv.header({"pooling", "corruption", "level", "severity", "error_rate"});
  for (const auto& cell : cells)
    csv.row({to_string(cell.pooling), cell.corruption, std::to_string(cell.level),
             format_double(cell.severity), format_double(cell.error_rate)});
  csv.write(out / "pooling_robustness.csv");

  RunResult result;
  result.outputs = {out / "pooling_robustness.csv"};
  result.summary = std::to_string(cells.size()) + " grid cells";
  return result;
}

}  // namespace

RunResult cmd_diagnose(const DiagnoseParams& p) {
  const fs::path out = resolve_out_dir(p.out_dir);
  fs::create_directories(out);
  const RunConfig config{"diagnose", p.to_json_string()};

  RunResult result;
  if (p.what == "distance-curve") {
    result = diagnose_distance_curve(p, out, config);
  } else if (p.what == "frequency-law") {
    result = diagnose_frequency_law(p, out, config);
  } else if (p.what == "illustration") {
    result = diagnose_illustration(p, out, config);
  } else if (p.what == "scale-sweep") {
    result = diagnose_scale_sweep(p, out, config);
  } else if (p.what == "pooling-robustness") {
    result = diagnose_pooling_robustness(p, out, config);
  } else {
    throw ConfigError("diagnose: unknown --what '" + p.what + "'");
  }

  config.save(out / "run_config.json");
  result.outputs.push_back(out / "run_config.json");
  return result;
}

RunResult run_subcommand(const RunConfig& config) {
  if (config.subcommand == "dataset")
    return cmd_dataset(DatasetParams::from_json_string(config.params_json));
  if (config.subcommand == "train")
    return cmd_train(TrainParams::from_json_string(config.params_json));
  if (config.subcommand == "eval")
    return cmd_eval(EvalParams::from_json_string(config.params_json));
  if (config.subcommand == "register")
    return cmd_register(RegisterParams::from_json_string(config.params_json));
  if (config.subcommand == "diagnose")
    return cmd_diagnose(DiagnoseParams::from_json_string(config.params_json));
  throw ConfigError("unknown subcommand: " + config.subcommand);
}

}  // namespace pointpe
