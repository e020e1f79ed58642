#include "crackdet/pipeline.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <limits>
#include <queue>

#include <nlohmann/json.hpp>

#include "crackdet/morphology.hpp"

namespace crackdet {

namespace {

constexpr std::pair<Stage, std::string_view> kStageNames[] = {
    {Stage::Grayscale, "grayscale"},   {Stage::Stretch, "stretch"},
    {Stage::Median, "median"},         {Stage::Binarize, "binarize"},
    {Stage::MajorityFilter, "majority_filter"}, {Stage::Prune, "prune"},
    {Stage::FillHoles, "fill_holes"},  {Stage::Thin, "thin"},
};

bool is_gray_stage(Stage s) { return s == Stage::Stretch || s == Stage::Median; }

bool is_binary_stage(Stage s) {
  return s == Stage::MajorityFilter || s == Stage::Prune || s == Stage::FillHoles ||
         s == Stage::Thin;
}

}  // namespace

std::string_view stage_name(Stage stage) {
  for (const auto& [s, name] : kStageNames) {
    if (s == stage) return name;
  }
  throw std::invalid_argument("unknown stage value");
}

Stage stage_from_name(std::string_view name) {
  for (const auto& [s, n] : kStageNames) {
    if (n == name) return s;
  }
  throw std::invalid_argument("unknown stage name '" + std::string(name) + "'");
}

std::vector<Stage> default_stage_order() {
  return {Stage::Grayscale,      Stage::Stretch, Stage::Binarize,
          Stage::MajorityFilter, Stage::Prune,   Stage::FillHoles,
          Stage::Thin};
}

void validate(const PipelineConfig& config) {
  const auto& order = config.stage_order;
  const auto count = [&](Stage s) { return std::count(order.begin(), order.end(), s); };
  const auto position = [&](Stage s) {
    return std::find(order.begin(), order.end(), s) - order.begin();
  };

  if (count(Stage::Grayscale) != 1) {
    throw std::invalid_argument("stage order must contain 'grayscale' exactly once");
  }
  const auto gray_pos = position(Stage::Grayscale);
  for (std::size_t i = 0; i < order.size(); ++i) {
    if (is_gray_stage(order[i]) && static_cast<std::ptrdiff_t>(i) < gray_pos) {
      throw std::invalid_argument("'grayscale' must precede gray-domain stages");
    }
  }

  const bool any_binary = std::any_of(order.begin(), order.end(), is_binary_stage);
  const auto binarize_count = count(Stage::Binarize);
  if (binarize_count > 1) {
    throw std::invalid_argument("stage order may contain 'binarize' at most once");
  }
  if (any_binary && binarize_count == 0) {
    throw std::invalid_argument("binary stages require a preceding 'binarize'");
  }
  if (binarize_count == 1) {
    const auto bin_pos = position(Stage::Binarize);
    for (std::size_t i = 0; i < order.size(); ++i) {
      const auto pos = static_cast<std::ptrdiff_t>(i);
      if (is_binary_stage(order[i]) && pos < bin_pos) {
        throw std::invalid_argument("binary stage before 'binarize' in stage order");
      }
      if ((is_gray_stage(order[i]) || order[i] == Stage::Grayscale) && pos > bin_pos) {
        throw std::invalid_argument("gray stage after 'binarize' in stage order");
      }
    }
  }

  if (config.filter_radius < 1) throw std::invalid_argument("filter_radius must be >= 1");
  if (config.min_component_area < 0) {
    throw std::invalid_argument("min_component_area must be >= 0");
  }
  if (config.connectivity != 4 && config.connectivity != 8) {
    throw std::invalid_argument("connectivity must be 4 or 8");
  }
  if (config.detection_min_length < 0) {
    throw std::invalid_argument("detection_min_length must be >= 0");
  }
  if (config.strategy.kind == ThresholdKind::Fixed &&
      (config.strategy.fixed_threshold < 0 || config.strategy.fixed_threshold > 255)) {
    throw std::invalid_argument("fixed threshold must be in [0, 255]");
  }
  if (config.strategy.ittt_epsilon < 0 || config.strategy.ittt_max_iterations < 1) {
    throw std::invalid_argument("invalid ittt parameters");
  }
}

namespace {

struct ComponentLengths {
  double total = 0.0;
  double longest = 0.0;
};

// Minimum-spanning-tree length of each 8-connected skeleton component,
// axial edges weighing 1 and diagonal edges sqrt(2).
ComponentLengths skeleton_lengths(const BinaryImage& skeleton) {
  static const double kDiag = std::sqrt(2.0);
  const LabelImage labels = connected_components(skeleton, 8);
  ComponentLengths result;
  if (labels.component_count == 0) return result;

  const int w = skeleton.width();
  const int h = skeleton.height();
  std::vector<std::vector<std::int32_t>> members(labels.component_count + 1);
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      const std::int32_t l = labels.at(x, y);
      if (l != 0) members[l].push_back(y * w + x);
    }
  }

  std::vector<int> slot(static_cast<std::size_t>(w) * h, -1);
  for (int c = 1; c <= labels.component_count; ++c) {
    const std::vector<std::int32_t>& pixels = members[c];
    const int n = static_cast<int>(pixels.size());
    for (int i = 0; i < n; ++i) slot[pixels[i]] = i;

    // Prim's algorithm over the 8-adjacency graph of this component.
    std::vector<double> best(n, std::numeric_limits<double>::infinity());
    std::vector<std::uint8_t> done(n, 0);
    using Entry = std::pair<double, int>;
    std::priority_queue<Entry, std::vector<Entry>, std::greater<>> queue;
    best[0] = 0.0;
    queue.emplace(0.0, 0);
    double length = 0.0;
    while (!queue.empty()) {
      const auto [cost, i] = queue.top();
      queue.pop();
      if (done[i]) continue;
      done[i] = 1;
      length += cost;
      const int x = pixels[i] % w;
      const int y = pixels[i] / w;
      for (int dy = -1; dy <= 1; ++dy) {
        for (int dx = -1; dx <= 1; ++dx) {
          if (dx == 0 && dy == 0) continue;
          const int nx = x + dx;
          const int ny = y + dy;
          if (nx < 0 || ny < 0 || nx >= w || ny >= h) continue;
          const int j = slot[ny * w + nx];
          if (j < 0 || done[j] || labels.at(nx, ny) != c) continue;
          const double weight = (dx != 0 && dy != 0) ? kDiag : 1.0;
          if (weight < best[j]) {
            best[j] = weight;
            queue.emplace(weight, j);
          }
        }
      }
    }
    result.total += length;
    result.longest = std::max(result.longest, length);
    for (int i = 0; i < n; ++i) slot[pixels[i]] = -1;
  }
  return result;
}

}  // namespace

CrackMetrics crack_metrics(const BinaryImage& mask, const BinaryImage& skeleton,
                           double detection_min_length) {
  if (mask.width() != skeleton.width() || mask.height() != skeleton.height()) {
    throw std::domain_error("crack_metrics: mask and skeleton dimensions differ");
  }
  for (int y = 0; y < mask.height(); ++y) {
    for (int x = 0; x < mask.width(); ++x) {
      if (skeleton.get(x, y) && !mask.get(x, y)) {
        throw std::domain_error("crack_metrics: skeleton is not a subset of mask");
      }
    }
  }

  CrackMetrics m;
  m.crack_pixel_area = static_cast<std::int64_t>(mask.foreground_count());

  const LabelImage labels = connected_components(mask, 8);
  m.component_count = labels.component_count;
  if (labels.component_count > 0) {
    std::vector<std::int64_t> area(labels.component_count + 1, 0);
    for (const std::int32_t l : labels.labels) {
      if (l != 0) ++area[l];
    }
    const std::int64_t largest = *std::max_element(area.begin() + 1, area.end());
    m.largest_component_fraction =
        static_cast<double>(largest) / static_cast<double>(m.crack_pixel_area);
  }

  const ComponentLengths lengths = skeleton_lengths(skeleton);
  m.skeleton_length = lengths.total;
  m.mean_width = lengths.total > 0.0
                     ? static_cast<double>(m.crack_pixel_area) / lengths.total
                     : 0.0;
  m.crack_detected = lengths.longest >= detection_min_length;
  return m;
}

EvalScore evaluate(const BinaryImage& predicted, const BinaryImage& truth,
                   int tolerance_radius) {
  if (predicted.width() != truth.width() || predicted.height() != truth.height()) {
    throw std::domain_error("evaluate: dimension mismatch");
  }
  if (tolerance_radius < 0) throw std::invalid_argument("tolerance_radius must be >= 0");

  const BinaryImage truth_zone = box_dilate(truth, tolerance_radius);
  const BinaryImage predicted_zone = box_dilate(predicted, tolerance_radius);

  EvalScore score;
  score.tolerance_radius = tolerance_radius;
  std::int64_t truth_total = 0;
  for (int y = 0; y < predicted.height(); ++y) {
    for (int x = 0; x < predicted.width(); ++x) {
      if (predicted.get(x, y)) {
        truth_zone.get(x, y) ? ++score.true_positive : ++score.false_positive;
      }
      if (truth.get(x, y)) {
        ++truth_total;
        if (!predicted_zone.get(x, y)) ++score.false_negative;
      }
    }
  }
  const std::int64_t tp = score.true_positive;
  score.precision = (tp + score.false_positive) == 0
                        ? 1.0
                        : static_cast<double>(tp) / (tp + score.false_positive);
  // Recall is the matched fraction of truth pixels, which keeps the
  // predicted/truth swap symmetric with precision.
  score.recall = truth_total == 0
                     ? 1.0
                     : static_cast<double>(truth_total - score.false_negative) / truth_total;
  score.f1 = (score.precision + score.recall) == 0.0
                 ? 0.0
                 : 2.0 * score.precision * score.recall / (score.precision + score.recall);
  return score;
}

DetectionReport run_pipeline(const RasterImage& image, const PipelineConfig& config,
                             const std::string& source,
                             const std::filesystem::path& artifact_dir) {
  validate(config);
  if (image.empty()) throw std::domain_error("run_pipeline: empty image");

  DetectionReport report;
  report.source = source;
  report.config = config;

  const bool saving = !artifact_dir.empty();
  int stage_index = 0;
  const auto artifact_path = [&](std::string_view name) {
    char prefix[8];
    std::snprintf(prefix, sizeof prefix, "%02d_", stage_index);
    return artifact_dir / (std::string(prefix) + std::string(name) + ".png");
  };
  const auto save_gray_stage = [&](std::string_view name, const GrayImage& img) {
    if (!saving) return;
    const std::filesystem::path p = artifact_path(name);
    save_gray(img, p);
    report.stage_artifacts.emplace(name, p.string());
    ++stage_index;
  };
  const auto save_binary_stage = [&](std::string_view name, const BinaryImage& img) {
    if (!saving) return;
    const std::filesystem::path p = artifact_path(name);
    save_binary(img, p);
    report.stage_artifacts.emplace(name, p.string());
    ++stage_index;
  };

  if (saving) {
    std::filesystem::create_directories(artifact_dir);
    const std::filesystem::path p = artifact_path("original");
    save_raster(image, p);
    report.stage_artifacts.emplace("original", p.string());
    ++stage_index;
  }

  GrayImage gray;
  BinaryImage mask;
  bool have_mask = false;
  bool saw_thin = false;

  for (const Stage stage : config.stage_order) {
    try {
      switch (stage) {
        case Stage::Grayscale:
          gray = to_grayscale(image);
          save_gray_stage("grayscale", gray);
          break;
        case Stage::Stretch: {
          StretchResult stretched = stretch_contrast(gray, config.stretch);
          gray = std::move(stretched.image);
          if (stretched.degenerate) report.degenerate_flags.push_back("stretch_degenerate");
          save_gray_stage("stretch", gray);
          break;
        }
        case Stage::Median:
          gray = median_filter(gray, config.filter_radius);
          save_gray_stage("median", gray);
          break;
        case Stage::Binarize: {
          const bool degenerate_input =
              std::find(report.degenerate_flags.begin(), report.degenerate_flags.end(),
                        "stretch_degenerate") != report.degenerate_flags.end();
          if (degenerate_input) {
            // A degenerate (constant) frame has no dark class to isolate.
            mask = BinaryImage(gray.width(), gray.height());
            report.threshold_outcome = {0, 1, true};
          } else {
            auto [binary, outcome] = binarize(gray, config.strategy);
            mask = std::move(binary);
            report.threshold_outcome = outcome;
            if (!outcome.converged) {
              report.degenerate_flags.push_back("threshold_not_converged");
            }
          }
          have_mask = true;
          save_binary_stage("binarize", mask);
          break;
        }
        case Stage::MajorityFilter:
          mask = majority_filter(mask, config.filter_radius);
          save_binary_stage("majority_filter", mask);
          break;
        case Stage::Prune:
          mask = remove_small_components(mask, config.min_component_area, config.connectivity);
          save_binary_stage("prune", mask);
          break;
        case Stage::FillHoles:
          mask = fill_holes(mask);
          save_binary_stage("fill_holes", mask);
          break;
        case Stage::Thin: {
          if (!saw_thin) {
            report.mask = mask;  // pre-thinning state
            saw_thin = true;
          }
          mask = thin_to_convergence(mask).skeleton;
          save_binary_stage("thin", mask);
          break;
        }
      }
    } catch (const std::exception& e) {
      throw std::runtime_error("stage '" + std::string(stage_name(stage)) + "': " + e.what());
    }
  }

  if (!have_mask) {
    // Stage orders without binarize produce an empty mask and metrics.
    mask = BinaryImage(image.width(), image.height());
  }
  if (!saw_thin) report.mask = mask;
  report.skeleton = mask;
  report.metrics = crack_metrics(report.mask, report.skeleton, config.detection_min_length);
  if (saving) {
    const std::filesystem::path p = artifact_dir / "result.png";
    save_binary(report.skeleton, p);
    report.stage_artifacts.emplace("result", p.string());
  }
  return report;
}

std::string strategy_to_string(const ThresholdStrategy& strategy) {
  switch (strategy.kind) {
    case ThresholdKind::Fixed:
      return "fixed:" + std::to_string(strategy.fixed_threshold);
    case ThresholdKind::Otsu:
      return "otsu";
    case ThresholdKind::Ittt:
      return "ittt";
  }
  return "otsu";
}

ThresholdStrategy strategy_from_string(std::string_view text) {
  if (text == "otsu") return ThresholdStrategy::otsu();
  if (text == "ittt") return ThresholdStrategy::ittt();
  if (text.starts_with("fixed:")) {
    const std::string_view digits = text.substr(6);
    int t = -1;
    const auto [ptr, ec] = std::from_chars(digits.data(), digits.data() + digits.size(), t);
    if (ec != std::errc{} || ptr != digits.data() + digits.size() || t < 0 || t > 255) {
      throw std::invalid_argument("bad fixed threshold in '" + std::string(text) + "'");
    }
    return ThresholdStrategy::fixed(t);
  }
  throw std::invalid_argument("unknown strategy '" + std::string(text) +
                              "' (expected fixed:<t>, otsu, or ittt)");
}

std::string stage_order_to_string(const std::vector<Stage>& stages) {
  std::string out;
  for (const Stage s : stages) {
    if (!out.empty()) out += ',';
    out += stage_name(s);
  }
  return out;
}

std::vector<Stage> stage_order_from_string(std::string_view text) {
  std::vector<Stage> stages;
  std::size_t start = 0;
  while (start <= text.size()) {
    const std::size_t comma = text.find(',', start);
    std::string_view token =
        text.substr(start, comma == std::string_view::npos ? text.size() - start
                                                           : comma - start);
    while (!token.empty() && token.front() == ' ') token.remove_prefix(1);
    while (!token.empty() && token.back() == ' ') token.remove_suffix(1);
    if (!token.empty()) stages.push_back(stage_from_name(token));
    if (comma == std::string_view::npos) break;
    start = comma + 1;
  }
  return stages;
}

std::string report_to_json(const DetectionReport& report) {
  nlohmann::json config{
      {"stage_order", stage_order_to_string(report.config.stage_order)},
      {"stretch_low", report.config.stretch.low_saturation},
      {"stretch_high", report.config.stretch.high_saturation},
      {"strategy", strategy_to_string(report.config.strategy)},
      {"ittt_epsilon", report.config.strategy.ittt_epsilon},
      {"ittt_max_iterations", report.config.strategy.ittt_max_iterations},
      {"filter_radius", report.config.filter_radius},
      {"min_area", report.config.min_component_area},
      {"connectivity", report.config.connectivity},
      {"detection_min_length", report.config.detection_min_length},
  };
  nlohmann::json metrics{
      {"area", report.metrics.crack_pixel_area},
      {"skeleton_length", report.metrics.skeleton_length},
      {"mean_width", report.metrics.mean_width},
      {"components", report.metrics.component_count},
      {"largest_fraction", report.metrics.largest_component_fraction},
      {"detected", report.metrics.crack_detected},
  };
  nlohmann::json j{
      {"source", report.source},
      {"config", std::move(config)},
      {"threshold", report.threshold_outcome.threshold},
      {"iterations", report.threshold_outcome.iterations},
      {"converged", report.threshold_outcome.converged},
      {"metrics", std::move(metrics)},
      {"flags", report.degenerate_flags},
      {"artifacts", report.stage_artifacts},
  };
  return j.dump(2) + "\n";
}

}  // namespace crackdet
