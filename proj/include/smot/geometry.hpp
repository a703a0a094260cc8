#pragma once

#include <span>
#include <string_view>

namespace smot {

/// Axis-aligned box in continuous pixel coordinates.
struct BoundingBox {
  double left = 0.0;
  double top = 0.0;
  double width = 0.0;
  double height = 0.0;

  double center_x() const noexcept { return left + width / 2.0; }
  double center_y() const noexcept { return top + height / 2.0; }
  double right() const noexcept { return left + width; }
  double bottom() const noexcept { return top + height; }
  double area() const noexcept { return width * height; }

  static BoundingBox from_center(double cx, double cy, double w, double h) noexcept {
    return {cx - w / 2.0, cy - h / 2.0, w, h};
  }

  friend bool operator==(const BoundingBox&, const BoundingBox&) = default;
};

/// True when all fields are finite and both sides are strictly positive.
bool is_valid(const BoundingBox& box) noexcept;

/// Throws ValidationError naming `what` if the box is not valid.
void validate(const BoundingBox& box, std::string_view what = "box");

/// Dataset-wide mean object size in pixels; always finite and > 0.
class MeanObjectSize {
 public:
  explicit MeanObjectSize(double px);

  double value() const noexcept { return px_; }

  friend bool operator==(const MeanObjectSize&, const MeanObjectSize&) = default;

 private:
  double px_;
};

double center_distance(const BoundingBox& a, const BoundingBox& b) noexcept;

double iou(const BoundingBox& a, const BoundingBox& b) noexcept;

/// exp(-D / S) where D is the distance between the box centers.
double dotd(const BoundingBox& a, const BoundingBox& b, MeanObjectSize s) noexcept;

/// IoU minus the squared center distance over the squared diagonal of the
/// smallest enclosing box.
double diou(const BoundingBox& a, const BoundingBox& b) noexcept;

/// Grows both sides of the box by `ratio` of their length on each side,
/// keeping the center fixed.
BoundingBox expand(const BoundingBox& box, double ratio) noexcept;

/// IoU of the expanded boxes minus `penalty_weight * (1 - dotd(a, b, s))`.
double expanded_penalty_similarity(const BoundingBox& a, const BoundingBox& b, double expand_ratio,
                                   double penalty_weight, MeanObjectSize s) noexcept;

/// Root of the mean box area over every labeled box. Throws ValidationError on
/// an empty input.
MeanObjectSize mean_object_size(std::span<const BoundingBox> boxes);

enum class Measure { iou, dotd, diou, expanded_penalty };

std::string_view to_string(Measure m) noexcept;
Measure parse_measure(std::string_view name);

/// Everything needed to evaluate a `Measure` on a pair of boxes.
struct SimilarityConfig {
  Measure measure = Measure::dotd;
  MeanObjectSize s{1.0};
  double expand = 0.5;
  double penalty_weight = 0.25;
};

double similarity(const BoundingBox& a, const BoundingBox& b, const SimilarityConfig& cfg) noexcept;

}  // namespace smot
