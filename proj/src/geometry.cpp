#include "smot/geometry.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "smot/error.hpp"

namespace smot {

bool is_valid(const BoundingBox& box) noexcept {
  return std::isfinite(box.left) && std::isfinite(box.top) && std::isfinite(box.width) &&
         std::isfinite(box.height) && box.width > 0.0 && box.height > 0.0;
}

void validate(const BoundingBox& box, std::string_view what) {
  if (!std::isfinite(box.left) || !std::isfinite(box.top) || !std::isfinite(box.width) ||
      !std::isfinite(box.height)) {
    throw ValidationError("non-finite coordinate in " + std::string(what));
  }
  if (box.width <= 0.0 || box.height <= 0.0) {
    throw ValidationError("non-positive box dimension in " + std::string(what));
  }
}

MeanObjectSize::MeanObjectSize(double px) : px_(px) {
  if (!std::isfinite(px) || px <= 0.0) {
    throw ValidationError("mean object size must be finite and > 0, got " + std::to_string(px));
  }
}

double center_distance(const BoundingBox& a, const BoundingBox& b) noexcept {
  return std::hypot(a.center_x() - b.center_x(), a.center_y() - b.center_y());
}

namespace {

double intersection_area(const BoundingBox& a, const BoundingBox& b) noexcept {
  const double iw = std::min(a.right(), b.right()) - std::max(a.left, b.left);
  const double ih = std::min(a.bottom(), b.bottom()) - std::max(a.top, b.top);
  if (iw <= 0.0 || ih <= 0.0) return 0.0;
  return iw * ih;
}

}  // namespace

double iou(const BoundingBox& a, const BoundingBox& b) noexcept {
  const double inter = intersection_area(a, b);
  if (inter <= 0.0) return 0.0;
  const double uni = a.area() + b.area() - inter;
  return std::clamp(inter / uni, 0.0, 1.0);
}

double dotd(const BoundingBox& a, const BoundingBox& b, MeanObjectSize s) noexcept {
  return std::exp(-center_distance(a, b) / s.value());
}

double diou(const BoundingBox& a, const BoundingBox& b) noexcept {
  const double dx = a.center_x() - b.center_x();
  const double dy = a.center_y() - b.center_y();
  const double cw = std::max(a.right(), b.right()) - std::min(a.left, b.left);
  const double ch = std::max(a.bottom(), b.bottom()) - std::min(a.top, b.top);
  return iou(a, b) - (dx * dx + dy * dy) / (cw * cw + ch * ch);
}

BoundingBox expand(const BoundingBox& box, double ratio) noexcept {
  if (ratio == 0.0) return box;
  const double scale = 1.0 + 2.0 * ratio;
  return BoundingBox::from_center(box.center_x(), box.center_y(), box.width * scale,
                                  box.height * scale);
}

double expanded_penalty_similarity(const BoundingBox& a, const BoundingBox& b, double expand_ratio,
                                   double penalty_weight, MeanObjectSize s) noexcept {
  const double overlap = iou(expand(a, expand_ratio), expand(b, expand_ratio));
  if (penalty_weight == 0.0) return overlap;
  return overlap - penalty_weight * (1.0 - dotd(a, b, s));
}

MeanObjectSize mean_object_size(std::span<const BoundingBox> boxes) {
  if (boxes.empty()) throw ValidationError("mean size undefined; supply S override");
  double total = 0.0;
  for (const auto& box : boxes) total += box.area();
  return MeanObjectSize(std::sqrt(total / static_cast<double>(boxes.size())));
}

std::string_view to_string(Measure m) noexcept {
  switch (m) {
    case Measure::iou:
      return "iou";
    case Measure::dotd:
      return "dotd";
    case Measure::diou:
      return "diou";
    case Measure::expanded_penalty:
      return "expanded_penalty";
  }
  return "unknown";
}

Measure parse_measure(std::string_view name) {
  if (name == "iou") return Measure::iou;
  if (name == "dotd") return Measure::dotd;
  if (name == "diou") return Measure::diou;
  if (name == "expanded_penalty" || name == "expanded-penalty") return Measure::expanded_penalty;
  throw ValidationError("unknown similarity measure '" + std::string(name) + "'");
}

double similarity(const BoundingBox& a, const BoundingBox& b, const SimilarityConfig& cfg) noexcept {
  switch (cfg.measure) {
    case Measure::iou:
      return iou(a, b);
    case Measure::dotd:
      return dotd(a, b, cfg.s);
    case Measure::diou:
      return diou(a, b);
    case Measure::expanded_penalty:
      return expanded_penalty_similarity(a, b, cfg.expand, cfg.penalty_weight, cfg.s);
  }
  return 0.0;
}

}  // namespace smot
