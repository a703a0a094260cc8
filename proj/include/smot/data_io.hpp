#pragma once

#include <filesystem>
#include <iosfwd>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <json.hpp>

#include "smot/geometry.hpp"

namespace smot {

// Frame indices are 0-based in memory. Every reader and writer in this header
// converts from and to the 1-based indices used on disk.

struct Detection {
  int frame = 0;
  BoundingBox box;
  double confidence = 1.0;
  std::optional<int> track_id;
  int class_id = 1;

  friend bool operator==(const Detection&, const Detection&) = default;
};

/// Ground truth and predictions of one video.
struct SequencePair {
  std::string name;
  int frame_count = 0;
  std::vector<Detection> gt;
  std::vector<Detection> pred;
};

/// Maps (x, y) in the previous frame to (a*x + b*y + tx, c*x + d*y + ty) in
/// `frame`.
struct AffineTransform {
  int frame = 1;
  double a = 1.0, b = 0.0, tx = 0.0;
  double c = 0.0, d = 1.0, ty = 0.0;

  double determinant() const noexcept { return a * d - b * c; }
  bool is_identity() const noexcept {
    return a == 1.0 && b == 0.0 && tx == 0.0 && c == 0.0 && d == 1.0 && ty == 0.0;
  }
  AffineTransform inverse() const;

  friend bool operator==(const AffineTransform&, const AffineTransform&) = default;
};

enum class MotRole {
  // 7th column is a consider flag; 0 drops the row.
  ground_truth,
  // 7th column is the detection confidence; id -1 means "no identity".
  prediction,
};

/// Validates a single detection (box, confidence, frame, identity).
void validate(const Detection& det, std::string_view what = "detection");

/// Checks frame bounds and (frame, track_id) uniqueness on both sides.
/// `require_pred_ids` additionally demands an identity on every prediction.
void validate(const SequencePair& seq, bool require_pred_ids);

/// Sorts by (frame, track id, box, confidence) so that any permutation of the
/// same detections compares equal.
void canonicalize(std::vector<Detection>& detections);

std::vector<Detection> parse_mot(std::istream& in, MotRole role = MotRole::prediction);
std::vector<Detection> read_mot_file(const std::filesystem::path& path, MotRole role);

/// Writes `frame,id,left,top,width,height,conf,-1,-1,-1` lines ordered by
/// (frame, track_id). Missing identities are written as -1.
void write_mot(std::ostream& out, std::span<const Detection> detections);
void write_mot_file(const std::filesystem::path& path, std::span<const Detection> detections);

/// Sequence name -> file for a directory of MOT files. Accepts both flat
/// `<name>.txt` files and MOTChallenge `<name>/gt/gt.txt` trees.
std::map<std::string, std::filesystem::path> list_mot_sequences(const std::filesystem::path& dir);

/// Groups a COCO-video document into one SequencePair per video. Annotations
/// land in `gt`; their `score` (default 1) becomes the confidence.
std::vector<SequencePair> parse_coco_vid(const nlohmann::json& doc);
std::vector<SequencePair> read_coco_vid_file(const std::filesystem::path& path);

std::vector<AffineTransform> load_affines(std::istream& in);

/// Frame -> transform lookup that falls back to identity.
class AffineSchedule {
 public:
  AffineSchedule() = default;
  explicit AffineSchedule(std::span<const AffineTransform> transforms);

  AffineTransform at(int frame) const;
  bool empty() const noexcept { return by_frame_.empty(); }

 private:
  std::map<int, AffineTransform> by_frame_;
};

}  // namespace smot
