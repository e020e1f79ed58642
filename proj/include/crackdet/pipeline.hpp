#pragma once

#include <filesystem>
#include <map>
#include <string>
#include <string_view>
#include <vector>

#include "crackdet/enhance.hpp"
#include "crackdet/image.hpp"
#include "crackdet/segment.hpp"

namespace crackdet {

enum class Stage {
  Grayscale,
  Stretch,
  Median,  // gray-domain median, off by default
  Binarize,
  MajorityFilter,
  Prune,
  FillHoles,
  Thin,
};

std::string_view stage_name(Stage stage);
Stage stage_from_name(std::string_view name);  // throws std::invalid_argument

std::vector<Stage> default_stage_order();

struct PipelineConfig {
  std::vector<Stage> stage_order = default_stage_order();
  StretchParams stretch;
  ThresholdStrategy strategy;  // default otsu
  int filter_radius = 1;
  std::int64_t min_component_area = 20;
  int connectivity = 8;
  double detection_min_length = 10.0;  // weighted pixels
};

/// Throws std::invalid_argument when the stage order breaks its invariants
/// (grayscale exactly once and before stretch; binarize exactly once when any
/// binary-only stage is present, after every gray stage and before every
/// binary stage) or a numeric field is out of range.
void validate(const PipelineConfig& config);

struct CrackMetrics {
  std::int64_t crack_pixel_area = 0;
  double skeleton_length = 0.0;  // axial step 1, diagonal sqrt(2)
  double mean_width = 0.0;       // area / skeleton_length, 0 when skeleton empty
  int component_count = 0;
  double largest_component_fraction = 0.0;
  bool crack_detected = false;
};

struct DetectionReport {
  std::string source;
  PipelineConfig config;
  ThresholdOutcome threshold_outcome;
  CrackMetrics metrics;
  std::map<std::string, std::string> stage_artifacts;
  std::vector<std::string> degenerate_flags;
  BinaryImage mask;      // binary state just before thinning
  BinaryImage skeleton;  // final binary state
};

struct EvalScore {
  std::int64_t true_positive = 0;
  std::int64_t false_positive = 0;
  std::int64_t false_negative = 0;
  double precision = 1.0;  // TP/(TP+FP), 0/0 -> 1
  double recall = 1.0;     // TP/(TP+FN), 0/0 -> 1
  double f1 = 0.0;         // harmonic mean, 0/0 -> 0
  int tolerance_radius = 2;
};

/// Runs the configured stages in order. When artifact_dir is non-empty the
/// input and every stage output are saved there as PNGs and recorded in
/// stage_artifacts.
DetectionReport run_pipeline(const RasterImage& image, const PipelineConfig& config,
                             const std::string& source = {},
                             const std::filesystem::path& artifact_dir = {});

/// Metrics over a crack mask and its skeleton; skeleton must be a subset of
/// mask. Skeleton length sums minimum-spanning-tree edge weights per
/// 8-connected component (1 per axial adjacency, sqrt(2) per diagonal).
CrackMetrics crack_metrics(const BinaryImage& mask, const BinaryImage& skeleton,
                           double detection_min_length = 10.0);

/// Buffered pixel scoring: a predicted pixel within tolerance_radius
/// (Chebyshev) of any truth pixel is a true positive; a truth pixel with no
/// prediction within the radius is a false negative.
EvalScore evaluate(const BinaryImage& predicted, const BinaryImage& truth,
                   int tolerance_radius = 2);

/// Stable report JSON (keys: source, config, threshold, iterations,
/// converged, metrics{...}, flags, artifacts), serialized with 2-space
/// indentation and a trailing newline.
std::string report_to_json(const DetectionReport& report);

std::string strategy_to_string(const ThresholdStrategy& strategy);
ThresholdStrategy strategy_from_string(std::string_view text);  // "fixed:<t>"|"otsu"|"ittt"

std::string stage_order_to_string(const std::vector<Stage>& stages);
std::vector<Stage> stage_order_from_string(std::string_view text);  // comma-separated

}  // namespace crackdet
