#include "crackdet/cli.hpp"

#include <algorithm>
#include <atomic>
#include <fstream>
#include <iostream>
#include <map>
#include <sstream>
#include <thread>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "crackdet/image.hpp"
#include "crackdet/pipeline.hpp"
#include "crackdet/synth.hpp"

namespace crackdet {

namespace {

namespace fs = std::filesystem;

constexpr int kExitOk = 0;
constexpr int kExitPartialFailure = 2;
constexpr int kExitUsage = 64;
constexpr int kExitNoInput = 66;
constexpr int kExitIoError = 74;

void write_text_atomic(const fs::path& path, const std::string& text) {
  fs::path tmp = path;
  tmp += ".tmp";
  {
    std::ofstream f(tmp, std::ios::binary | std::ios::trunc);
    if (!f) throw IoError("cannot open " + tmp.string() + " for writing");
    f << text;
    f.flush();
    if (!f) throw IoError("write failure on " + tmp.string());
  }
  fs::rename(tmp, path);
}

bool has_image_extension(const fs::path& path) {
  std::string ext = path.extension().string();
  std::transform(ext.begin(), ext.end(), ext.begin(),
                 [](unsigned char c) { return std::tolower(c); });
  return ext == ".png" || ext == ".pgm" || ext == ".ppm";
}

// Directories expand to their image files, sorted for determinism. Mask
// outputs (*.mask.png, mask_*.png) are skipped so a corpus directory or a
// previous run's output can be fed back in without ingesting ground truth or
// predictions as photos; naming a mask file explicitly still works.
std::vector<fs::path> expand_inputs(const std::vector<std::string>& inputs) {
  const auto is_mask_name = [](const fs::path& p) {
    const std::string name = p.filename().string();
    return name.ends_with(".mask.png") || name.rfind("mask_", 0) == 0;
  };
  std::vector<fs::path> files;
  for (const std::string& input : inputs) {
    const fs::path p(input);
    std::error_code ec;
    if (fs::is_directory(p, ec)) {
      std::vector<fs::path> found;
      for (const auto& entry : fs::directory_iterator(p, ec)) {
        if (entry.is_regular_file() && has_image_extension(entry.path()) &&
            !is_mask_name(entry.path())) {
          found.push_back(entry.path());
        }
      }
      std::sort(found.begin(), found.end());
      files.insert(files.end(), found.begin(), found.end());
    } else {
      files.push_back(p);
    }
  }
  return files;
}

// Output stems: file basename, disambiguated when repeated.
std::vector<std::string> assign_stems(const std::vector<fs::path>& inputs) {
  std::vector<std::string> stems;
  std::map<std::string, int> used;
  for (const fs::path& p : inputs) {
    std::string stem = p.stem().string();
    if (stem.empty()) stem = "image";
    const int n = ++used[stem];
    if (n > 1) stem += "_" + std::to_string(n);
    stems.push_back(stem);
  }
  return stems;
}

struct PipelineFlags {
  std::string strategy = "otsu";
  int ittt_epsilon = 1;
  int ittt_max_iterations = 50;
  double stretch_low = 0.01;
  double stretch_high = 0.01;
  int filter_radius = 1;
  std::int64_t min_area = 20;
  int connectivity = 8;
  double min_length = 10.0;
  std::string stage_order = stage_order_to_string(default_stage_order());
};

void add_pipeline_flags(CLI::App& app, PipelineFlags& f) {
  app.add_option("--strategy", f.strategy, "Threshold strategy: fixed:<t>, otsu, or ittt");
  app.add_option("--ittt-epsilon", f.ittt_epsilon, "ITTT convergence epsilon (gray levels)");
  app.add_option("--ittt-max-iterations", f.ittt_max_iterations, "ITTT iteration cap");
  app.add_option("--stretch-low", f.stretch_low, "Lower saturation fraction");
  app.add_option("--stretch-high", f.stretch_high, "Upper saturation fraction");
  app.add_option("--filter-radius", f.filter_radius, "Median/majority window radius");
  app.add_option("--min-area", f.min_area, "Minimum component area kept by prune");
  app.add_option("--connectivity", f.connectivity, "Component connectivity (4 or 8)");
  app.add_option("--min-length", f.min_length, "Skeleton length needed to report a crack");
  app.add_option("--stage-order", f.stage_order, "Comma-separated stage list");
}

PipelineConfig build_config(const PipelineFlags& f) {
  PipelineConfig config;
  config.stage_order = stage_order_from_string(f.stage_order);
  config.stretch = {f.stretch_low, f.stretch_high};
  config.strategy = strategy_from_string(f.strategy);
  config.strategy.ittt_epsilon = f.ittt_epsilon;
  config.strategy.ittt_max_iterations = f.ittt_max_iterations;
  config.filter_radius = f.filter_radius;
  config.min_component_area = f.min_area;
  config.connectivity = f.connectivity;
  config.detection_min_length = f.min_length;
  validate(config);
  return config;
}

// One batch run: which images, how to process them, where results go.
struct RunManifest {
  std::vector<fs::path> inputs;
  PipelineConfig config;
  fs::path output_dir;
  bool save_stages = false;
  int parallelism = 1;
};

// Returns an exit code once parsing has decided one (help or usage error).
int parse_app(CLI::App& app, const std::vector<std::string>& args, std::ostream& out,
              std::ostream& err) {
  std::vector<const char*> argv;
  argv.push_back("crackdet");
  for (const std::string& a : args) argv.push_back(a.c_str());
  try {
    app.parse(static_cast<int>(argv.size()), argv.data());
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return kExitOk;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << "\n";
    return kExitUsage;
  }
  return -1;
}

int cmd_run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Run the crack-detection pipeline over images"};
  app.set_config("--config");
  std::vector<std::string> inputs;
  std::string output = ".";
  bool save_stages = false;
  int parallelism = 1;
  PipelineFlags flags;
  app.add_option("--input", inputs, "Input image files or directories");
  app.add_option("--output", output, "Report/mask output directory");
  app.add_flag("--save-stages", save_stages, "Save every stage image");
  app.add_option("--parallelism", parallelism, "Concurrent images");
  add_pipeline_flags(app, flags);
  if (const int code = parse_app(app, args, out, err); code >= 0) return code;

  RunManifest manifest;
  try {
    manifest.config = build_config(flags);
    manifest.save_stages = save_stages;
    manifest.parallelism = parallelism;
    manifest.output_dir = output;
    if (parallelism < 1) throw std::invalid_argument("parallelism must be >= 1");
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return kExitUsage;
  }

  manifest.inputs = expand_inputs(inputs);
  const std::vector<fs::path>& files = manifest.inputs;
  if (files.empty()) {
    err << "error: no input images given\n";
    return kExitUsage;
  }
  const std::vector<std::string> stems = assign_stems(files);

  const fs::path& out_dir = manifest.output_dir;
  std::error_code ec;
  fs::create_directories(out_dir, ec);
  try {
    write_text_atomic(out_dir / ".write_probe", "");
    fs::remove(out_dir / ".write_probe", ec);
  } catch (const std::exception& e) {
    err << "error: output directory not writable: " << e.what() << "\n";
    return kExitIoError;
  }

  struct ImageResult {
    bool ok = false;
    bool detected = false;
    std::string report_name;
    std::string error;
  };
  std::vector<ImageResult> results(files.size());

  std::atomic<std::size_t> next{0};
  const auto worker = [&] {
    for (;;) {
      const std::size_t i = next.fetch_add(1);
      if (i >= files.size()) break;
      ImageResult& r = results[i];
      try {
        const RasterImage raster = load_image(files[i]);
        const fs::path stage_dir =
            manifest.save_stages ? out_dir / (stems[i] + ".stages") : fs::path{};
        DetectionReport report =
            run_pipeline(raster, manifest.config, files[i].string(), stage_dir);
        const fs::path mask_path = out_dir / (stems[i] + ".mask.png");
        save_binary(report.mask, mask_path);
        report.stage_artifacts.emplace("mask", mask_path.string());
        // Artifact paths are recorded relative to the report's directory so
        // output trees stay comparable and movable.
        for (auto& [name, path] : report.stage_artifacts) {
          std::error_code rel_ec;
          const fs::path relative = fs::relative(path, out_dir, rel_ec);
          if (!rel_ec) path = relative.string();
        }
        r.report_name = stems[i] + ".report.json";
        write_text_atomic(out_dir / r.report_name, report_to_json(report));
        r.detected = report.metrics.crack_detected;
        r.ok = true;
      } catch (const std::exception& e) {
        r.error = e.what();
      }
    }
  };
  const std::size_t n_threads =
      std::min<std::size_t>(static_cast<std::size_t>(manifest.parallelism), files.size());
  if (n_threads <= 1) {
    worker();
  } else {
    std::vector<std::thread> threads;
    for (std::size_t i = 0; i < n_threads; ++i) threads.emplace_back(worker);
    for (std::thread& t : threads) t.join();
  }

  nlohmann::json failed = nlohmann::json::array();
  nlohmann::json reports = nlohmann::json::array();
  std::size_t succeeded = 0;
  std::size_t detected = 0;
  for (std::size_t i = 0; i < files.size(); ++i) {
    if (results[i].ok) {
      ++succeeded;
      if (results[i].detected) ++detected;
      reports.push_back(results[i].report_name);
    } else {
      failed.push_back({{"path", files[i].string()}, {"error", results[i].error}});
      err << "failed: " << files[i].string() << ": " << results[i].error << "\n";
    }
  }
  const nlohmann::json summary{
      {"images", files.size()},     {"succeeded", succeeded},
      {"failed", std::move(failed)}, {"detected_count", detected},
      {"reports", std::move(reports)},
  };
  try {
    write_text_atomic(out_dir / "summary.json", summary.dump(2) + "\n");
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return kExitIoError;
  }
  out << "processed " << succeeded << "/" << files.size() << " images, " << detected
      << " with cracks detected\n";
  return succeeded == files.size() ? kExitOk : kExitPartialFailure;
}

int cmd_synth(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Generate a synthetic crack corpus with ground truth"};
  app.set_config("--config");
  std::string output = "corpus";
  int count = 1;
  SynthParams params;
  std::string background = "speckle";
  app.add_option("--output", output, "Corpus output directory");
  app.add_option("--count", count, "Number of image/mask pairs");
  app.add_option("--seed", params.seed, "Base seed (image i uses seed + i)");
  app.add_option("--width", params.width, "Image width");
  app.add_option("--height", params.height, "Image height");
  app.add_option("--crack-width", params.crack_width, "Crack width in pixels");
  app.add_option("--crack-intensity", params.crack_intensity, "Crack gray level");
  app.add_option("--background", background, "Background texture: plain, speckle, brick");
  app.add_option("--background-mean", params.background_mean, "Background gray level");
  app.add_option("--noise-sigma", params.noise_sigma, "Gaussian noise std-dev");
  app.add_option("--impulse-rate", params.impulse_rate, "Salt-and-pepper fraction");
  app.add_option("--n-cracks", params.n_cracks, "Cracks per image");
  app.add_option("--wander", params.wander_degrees, "Heading perturbation bound (degrees)");
  app.add_option("--crack-length", params.crack_length, "Steps per crack (0 = auto)");
  if (const int code = parse_app(app, args, out, err); code >= 0) return code;

  try {
    params.background = background_from_string(background);
    if (count < 0) throw std::invalid_argument("count must be >= 0");
    validate(params);
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return kExitUsage;
  }
  try {
    const fs::path manifest = generate_corpus(params, count, output);
    out << "wrote " << count << " " << background_name(params.background)
        << " image/mask pairs, manifest " << manifest.string() << "\n";
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return kExitIoError;
  }
  return kExitOk;
}

struct ManifestRow {
  std::string image_path;
  std::string mask_path;
  std::uint64_t seed = 0;
  double truth_length = 0.0;
};

std::vector<ManifestRow> read_manifest(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open manifest " + path.string());
  std::vector<ManifestRow> rows;
  std::string line;
  bool first = true;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    if (first) {
      first = false;
      if (line.rfind("path,", 0) == 0) continue;  // header
    }
    std::stringstream ss(line);
    ManifestRow row;
    std::string seed_text, length_text;
    if (!std::getline(ss, row.image_path, ',') || !std::getline(ss, row.mask_path, ',') ||
        !std::getline(ss, seed_text, ',') || !std::getline(ss, length_text)) {
      throw DecodeError("malformed manifest row: " + line);
    }
    row.seed = std::stoull(seed_text);
    row.truth_length = std::stod(length_text);
    rows.push_back(std::move(row));
  }
  return rows;
}

BinaryImage mask_from_file(const fs::path& path) {
  const RasterImage raster = load_image(path);
  BinaryImage mask(raster.width(), raster.height());
  for (int y = 0; y < raster.height(); ++y) {
    for (int x = 0; x < raster.width(); ++x) {
      mask.set(x, y, raster(x, y).r >= 128);
    }
  }
  return mask;
}

int cmd_eval(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Score predicted masks against a corpus manifest"};
  app.set_config("--config");
  std::string manifest_arg;
  std::string predictions;
  std::string output = ".";
  int tolerance = 2;
  app.add_option("--manifest", manifest_arg, "Corpus manifest CSV")->required();
  app.add_option("--predictions", predictions, "Directory of predicted masks")->required();
  app.add_option("--output", output, "Directory for eval.csv and eval.json");
  app.add_option("--tolerance", tolerance, "Match radius in pixels (Chebyshev)");
  if (const int code = parse_app(app, args, out, err); code >= 0) return code;
  if (tolerance < 0) {
    err << "error: tolerance must be >= 0\n";
    return kExitUsage;
  }

  const fs::path manifest_path(manifest_arg);
  std::vector<ManifestRow> rows;
  try {
    rows = read_manifest(manifest_path);
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return kExitNoInput;
  }
  const fs::path base = manifest_path.parent_path();
  const fs::path pred_dir(predictions);

  std::ostringstream csv;
  csv << "path,tp,fp,fn,precision,recall,f1,missing_prediction\n";
  nlohmann::json images = nlohmann::json::array();
  std::int64_t tp = 0, fp = 0, fn = 0, truth_total = 0;
  for (const ManifestRow& row : rows) {
    BinaryImage truth;
    try {
      truth = mask_from_file(base / row.mask_path);
    } catch (const std::exception& e) {
      err << "error: " << e.what() << "\n";
      return kExitNoInput;
    }

    const std::string stem = fs::path(row.image_path).stem().string();
    BinaryImage predicted;
    bool missing = false;
    const fs::path candidates[] = {pred_dir / (stem + ".mask.png"),
                                   pred_dir / (stem + ".png")};
    const auto found = std::find_if(std::begin(candidates), std::end(candidates),
                                    [](const fs::path& p) { return fs::exists(p); });
    if (found != std::end(candidates)) {
      try {
        predicted = mask_from_file(*found);
      } catch (const std::exception& e) {
        err << "warning: unreadable prediction for " << row.image_path << ": " << e.what()
            << "\n";
        missing = true;
      }
    } else {
      missing = true;
    }
    if (missing || predicted.width() != truth.width() ||
        predicted.height() != truth.height()) {
      if (!missing) {
        err << "warning: prediction size mismatch for " << row.image_path << "\n";
        missing = true;
      }
      predicted = BinaryImage(truth.width(), truth.height());
    }

    const EvalScore score = evaluate(predicted, truth, tolerance);
    tp += score.true_positive;
    fp += score.false_positive;
    fn += score.false_negative;
    truth_total += static_cast<std::int64_t>(truth.foreground_count());
    csv << row.image_path << ',' << score.true_positive << ',' << score.false_positive
        << ',' << score.false_negative << ',' << score.precision << ',' << score.recall
        << ',' << score.f1 << ',' << (missing ? 1 : 0) << "\n";
    images.push_back({{"path", row.image_path},
                      {"tp", score.true_positive},
                      {"fp", score.false_positive},
                      {"fn", score.false_negative},
                      {"precision", score.precision},
                      {"recall", score.recall},
                      {"f1", score.f1},
                      {"missing_prediction", missing}});
  }

  const double micro_p = (tp + fp) == 0 ? 1.0 : static_cast<double>(tp) / (tp + fp);
  const double micro_r =
      truth_total == 0 ? 1.0 : static_cast<double>(truth_total - fn) / truth_total;
  const double micro_f1 =
      (micro_p + micro_r) == 0.0 ? 0.0 : 2.0 * micro_p * micro_r / (micro_p + micro_r);
  const nlohmann::json result{
      {"tolerance", tolerance},
      {"images", std::move(images)},
      {"micro",
       {{"tp", tp},
        {"fp", fp},
        {"fn", fn},
        {"precision", micro_p},
        {"recall", micro_r},
        {"f1", micro_f1}}},
  };
  try {
    const fs::path out_dir(output);
    std::error_code ec;
    fs::create_directories(out_dir, ec);
    write_text_atomic(out_dir / "eval.csv", csv.str());
    write_text_atomic(out_dir / "eval.json", result.dump(2) + "\n");
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return kExitIoError;
  }
  out << "micro precision " << micro_p << ", recall " << micro_r << ", f1 " << micro_f1
      << " over " << rows.size() << " images\n";
  return kExitOk;
}

int cmd_histogram(const std::vector<std::string>& args, std::ostream& out,
                  std::ostream& err) {
  CLI::App app{"Dump an image's intensity histogram and chosen threshold"};
  app.set_config("--config");
  std::string input;
  std::string output;
  PipelineFlags flags;
  app.add_option("--input", input, "Input image")->required();
  app.add_option("--output", output, "Write CSV here instead of stdout");
  app.add_option("--strategy", flags.strategy, "fixed:<t>, otsu, or ittt");
  app.add_option("--ittt-epsilon", flags.ittt_epsilon, "ITTT convergence epsilon");
  app.add_option("--ittt-max-iterations", flags.ittt_max_iterations, "ITTT iteration cap");
  if (const int code = parse_app(app, args, out, err); code >= 0) return code;

  ThresholdStrategy strategy;
  try {
    strategy = strategy_from_string(flags.strategy);
    strategy.ittt_epsilon = flags.ittt_epsilon;
    strategy.ittt_max_iterations = flags.ittt_max_iterations;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return kExitUsage;
  }

  GrayImage gray;
  try {
    gray = to_grayscale(load_image(input));
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return kExitNoInput;
  }
  const Histogram hist = histogram(gray);

  ThresholdOutcome outcome;
  std::vector<int> trace;
  switch (strategy.kind) {
    case ThresholdKind::Fixed:
      outcome = {strategy.fixed_threshold, 1, true};
      trace = {strategy.fixed_threshold};
      break;
    case ThresholdKind::Otsu:
      outcome = otsu_threshold(hist);
      trace = {outcome.threshold};
      break;
    case ThresholdKind::Ittt:
      outcome =
          ittt_threshold(gray, strategy.ittt_epsilon, strategy.ittt_max_iterations, &trace);
      break;
  }

  std::ostringstream text;
  text << "intensity,count\n";
  for (int v = 0; v < 256; ++v) text << v << ',' << hist.bins[v] << "\n";
  text << "# strategy=" << strategy_to_string(strategy) << "\n";
  text << "# threshold=" << outcome.threshold << "\n";
  text << "# iterations=" << outcome.iterations << "\n";
  text << "# converged=" << (outcome.converged ? "true" : "false") << "\n";
  text << "# trace=";
  for (std::size_t i = 0; i < trace.size(); ++i) {
    if (i > 0) text << ',';
    text << trace[i];
  }
  text << "\n";

  if (output.empty()) {
    out << text.str();
  } else {
    try {
      write_text_atomic(output, text.str());
    } catch (const std::exception& e) {
      err << "error: " << e.what() << "\n";
      return kExitIoError;
    }
  }
  return kExitOk;
}

}  // namespace

int cli_main(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  static const char* kUsage =
      "usage: crackdet <run|synth|eval|histogram> [options]\n"
      "  run        process images through the detection pipeline\n"
      "  synth      generate a synthetic corpus with ground truth\n"
      "  eval       score predictions against a corpus manifest\n"
      "  histogram  dump a histogram and threshold trace\n"
      "run '<command> --help' for command options\n";
  if (args.empty() || args[0] == "--help" || args[0] == "-h" || args[0] == "help") {
    (args.empty() ? err : out) << kUsage;
    return args.empty() ? kExitUsage : kExitOk;
  }
  const std::vector<std::string> rest(args.begin() + 1, args.end());
  if (args[0] == "run") return cmd_run(rest, out, err);
  if (args[0] == "synth") return cmd_synth(rest, out, err);
  if (args[0] == "eval") return cmd_eval(rest, out, err);
  if (args[0] == "histogram") return cmd_histogram(rest, out, err);
  err << "error: unknown command '" << args[0] << "'\n" << kUsage;
  return kExitUsage;
}

int cli_main(int argc, const char* const* argv) {
  std::vector<std::string> args;
  for (int i = 1; i < argc; ++i) args.emplace_back(argv[i]);
  return cli_main(args, std::cout, std::cerr);
}

}  // namespace crackdet
