#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "gazekit/metrics.hpp"

namespace gazekit {

enum class GazeLabel {
  kInsideFrame,
  kOutsideFrame,
  kGazeShift,
  kOccluded,
  kEyesClosed,
  kUncertain,
  kNotAnnotated,
};

inline constexpr std::size_t kGazeLabelCount = 7;
inline constexpr std::array<std::string_view, kGazeLabelCount> kGazeLabelNames = {
    "inside-frame", "outside-frame", "gaze-shift", "occluded",
    "eyes-closed",  "uncertain",     "not-annotated"};

std::string_view to_string(GazeLabel label);
std::optional<GazeLabel> parse_gaze_label(std::string_view name);

/// One annotated person in one frame. Coordinates are normalised to [0,1].
struct AnnotationInstance {
  std::string video_id;
  std::string clip_id;
  std::int64_t frame = 0;
  std::string person_id;
  bool is_child = false;
  Box head_bbox;
  GazeLabel gaze_label = GazeLabel::kNotAnnotated;
  /// Present exactly when gaze_label is inside-frame.
  std::optional<Vec2> gaze_point;
  std::optional<std::string> annotator_id;

  bool operator==(const AnnotationInstance&) const = default;
};

/// Reads JSON Lines annotations. Blank lines are skipped; any schema
/// violation throws ParseError naming the line and field.
std::vector<AnnotationInstance> parse_annotations(std::istream& in,
                                                  const std::string& source = "<annotations>");
std::vector<AnnotationInstance> parse_annotations(const std::filesystem::path& path);

/// One JSON line (no trailing newline) with a fixed key order.
std::string serialize_annotation(const AnnotationInstance& instance);

/// Head boxes keyed by (video_id, frame).
using FrameKey = std::pair<std::string, std::int64_t>;
using HeadDetections = std::map<FrameKey, std::vector<Box>>;

HeadDetections parse_head_detections(std::istream& in, const std::string& source = "<detections>");
HeadDetections parse_head_detections(const std::filesystem::path& path);

struct Histogram {
  std::vector<double> edges;  // bins + 1 edges
  std::vector<std::size_t> counts;

  Histogram(double lo, double hi, int bins);
  /// Values outside [lo, hi] land in the nearest end bin.
  void add(double v);
  std::size_t total() const noexcept;
};

struct Histogram2D {
  int bins_x = 0;
  int bins_y = 0;
  std::vector<std::size_t> counts;  // row-major, y down

  Histogram2D(int bx, int by);
  void add(const Vec2& p);
  std::size_t total() const noexcept;
};

struct StatsConfig {
  int area_bins = 100;
  int angle_bins = 36;
  int distance_bins = 20;
  int gaze_grid = 10;
};

/// Per-instance geometry behind the histograms.
struct InstanceGeometry {
  std::string key;
  double head_area = 0.0;
  std::optional<double> gaze_angle_deg;
  std::optional<double> head_gaze_distance;
};

struct LookingAtHeadCell {
  std::size_t population = 0;
  std::size_t looking = 0;
  std::optional<double> percent;
};

struct LookingAtHead {
  LookingAtHeadCell all_child;
  LookingAtHeadCell all_adult;
  LookingAtHeadCell multi_child;
  LookingAtHeadCell multi_adult;
};

struct DatasetStats {
  std::size_t n_instances = 0;
  std::size_t n_with_gaze = 0;
  std::size_t n_without_gaze = 0;
  Histogram head_area{0.0, 1.0, 1};
  Histogram gaze_angle{-180.0, 180.0, 1};
  Histogram head_gaze_distance{0.0, 1.0, 1};
  Histogram2D gaze_points{1, 1};
  std::array<std::size_t, kGazeLabelCount> label_counts{};
  std::array<double, kGazeLabelCount> label_fractions{};
  double child_fraction = 0.0;
  LookingAtHead looking_at_head;
  /// "detections" or "annotations": where the head boxes came from.
  std::string head_box_source;
  /// Sorted by instance key so the result does not depend on input order.
  std::vector<InstanceGeometry> per_instance;
};

/// Gaze angle in degrees, (-180, 180], 0 pointing right, y down.
double gaze_angle_deg(const Vec2& head_center, const Vec2& gaze_point);

/// sqrt(dx^2 + dy^2) on normalised coordinates.
double head_gaze_distance(const Vec2& head_center, const Vec2& gaze_point);

/// When `detections` is absent, the annotated head boxes of every person in
/// the same frame serve as the candidate head set.
DatasetStats compute_stats(std::span<const AnnotationInstance> instances,
                           const std::optional<HeadDetections>& detections = std::nullopt,
                           const StatsConfig& config = {});

std::array<double, kGazeLabelCount> label_distribution(std::span<const AnnotationInstance> instances);

/// Pixel (x, y) is set when its centre ((x+0.5)/W, (y+0.5)/H) lies in the
/// closed box. A box that covers no pixel centre sets the single pixel that
/// contains its centre.
BinaryMask render_head_mask(const Box& box, int width, int height);

std::string instance_key(const AnnotationInstance& a);

struct DoubleCodedPair {
  AnnotationInstance prediction;  // annotator treated as the predictor
  AnnotationInstance reference;   // annotator treated as GT
};

struct PairingResult {
  std::vector<DoubleCodedPair> pairs;
  std::vector<std::string> unmatched;
};

/// Groups annotations by (video, clip, frame, person); groups with exactly
/// two distinct annotators become a pair ordered by annotator id.
PairingResult pair_double_coded(std::span<const AnnotationInstance> instances);

struct AgreementParams {
  EvalParams eval;
  int grid = 64;
};

/// Scores one annotator against the other with the dataset metrics. The
/// predicting annotator's point is rendered as a Gaussian heatmap for AUC.
/// In/out labels: inside-frame 1, outside-frame 0, other classes excluded.
EvalReport agreement_eval(std::span<const DoubleCodedPair> pairs, const AgreementParams& params = {});

}  // namespace gazekit
