#include "smot/data_io.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <set>
#include <sstream>
#include <tuple>
#include <unordered_map>
#include <utility>

#include "smot/error.hpp"

namespace smot {

namespace {

std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t' || s.front() == '\r')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
  return s;
}

std::vector<std::string_view> split_fields(std::string_view line) {
  std::vector<std::string_view> fields;
  std::size_t start = 0;
  while (true) {
    const auto comma = line.find(',', start);
    if (comma == std::string_view::npos) {
      fields.push_back(trim(line.substr(start)));
      break;
    }
    fields.push_back(trim(line.substr(start, comma - start)));
    start = comma + 1;
  }
  return fields;
}

std::optional<double> to_double(std::string_view field) {
  if (!field.empty() && field.front() == '+') field.remove_prefix(1);
  double value = 0.0;
  const auto* end = field.data() + field.size();
  const auto [ptr, ec] = std::from_chars(field.data(), end, value);
  if (field.empty() || ec != std::errc() || ptr != end || !std::isfinite(value)) return std::nullopt;
  return value;
}

std::optional<int> to_int(std::string_view field) {
  const auto value = to_double(field);
  if (!value || *value != std::floor(*value) || std::abs(*value) > 1e9) return std::nullopt;
  return static_cast<int>(*value);
}

[[noreturn]] void malformed(std::size_t line_no, std::string_view line, std::string_view reason) {
  throw ParseError("malformed line " + std::to_string(line_no) + " (" + std::string(reason) +
                       "): '" + std::string(trim(line)) + "'",
                   line_no);
}

int id_or_minus_one(const Detection& d) { return d.track_id.value_or(-1); }

auto sort_key(const Detection& d) {
  return std::make_tuple(d.frame, id_or_minus_one(d), d.box.left, d.box.top, d.box.width,
                         d.box.height, d.confidence);
}

void check_unique_ids(std::span<const Detection> dets, const std::string& seq, const char* side) {
  std::set<std::pair<int, int>> seen;
  for (const auto& d : dets) {
    if (!d.track_id) continue;
    if (!seen.emplace(d.frame, *d.track_id).second) {
      throw ValidationError("duplicate " + std::string(side) + " track id " +
                            std::to_string(*d.track_id) + " in frame " +
                            std::to_string(d.frame + 1) + " of sequence '" + seq + "'");
    }
  }
}

}  // namespace

AffineTransform AffineTransform::inverse() const {
  const double det = determinant();
  if (det == 0.0 || !std::isfinite(det)) throw ValidationError("singular affine transform");
  AffineTransform inv;
  inv.frame = frame;
  inv.a = d / det;
  inv.b = -b / det;
  inv.c = -c / det;
  inv.d = a / det;
  inv.tx = -(inv.a * tx + inv.b * ty);
  inv.ty = -(inv.c * tx + inv.d * ty);
  return inv;
}

void canonicalize(std::vector<Detection>& detections) {
  std::stable_sort(detections.begin(), detections.end(),
                   [](const Detection& a, const Detection& b) { return sort_key(a) < sort_key(b); });
}

void validate(const Detection& det, std::string_view what) {
  validate(det.box, what);
  if (det.frame < 0) throw ValidationError("frame index below 1 in " + std::string(what));
  if (!(det.confidence >= 0.0 && det.confidence <= 1.0)) {
    throw ValidationError("confidence outside [0,1] in " + std::string(what));
  }
  if (det.track_id && *det.track_id < 1) {
    throw ValidationError("track id must be >= 1 in " + std::string(what));
  }
}

void validate(const SequencePair& seq, bool require_pred_ids) {
  if (seq.frame_count < 1) {
    throw ValidationError("sequence '" + seq.name + "' has no frames");
  }
  const auto check_side = [&](std::span<const Detection> dets, const char* side, bool need_ids) {
    for (const auto& d : dets) {
      validate(d, std::string(side) + " detection of sequence '" + seq.name + "'");
      if (d.frame >= seq.frame_count) {
        throw ValidationError(std::string(side) + " detection in frame " +
                              std::to_string(d.frame + 1) + " beyond frame count " +
                              std::to_string(seq.frame_count) + " of sequence '" + seq.name + "'");
      }
      if (need_ids && !d.track_id) {
        throw ValidationError(std::string(side) + " detection without track id in sequence '" +
                              seq.name + "'");
      }
    }
    check_unique_ids(dets, seq.name, side);
  };
  check_side(seq.gt, "gt", true);
  check_side(seq.pred, "pred", require_pred_ids);
}

std::vector<Detection> parse_mot(std::istream& in, MotRole role) {
  std::vector<Detection> out;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (trim(line).empty()) continue;
    const auto fields = split_fields(line);
    if (fields.size() < 7) malformed(line_no, line, "expected at least 7 fields");

    const auto frame = to_int(fields[0]);
    const auto id = to_int(fields[1]);
    if (!frame) malformed(line_no, line, "bad frame");
    if (!id) malformed(line_no, line, "bad id");
    double nums[5];
    for (int i = 0; i < 5; ++i) {
      const auto v = to_double(fields[2 + i]);
      if (!v) malformed(line_no, line, "bad number in column " + std::to_string(3 + i));
      nums[i] = *v;
    }
    if (*frame < 1) malformed(line_no, line, "frame index below 1");

    Detection det;
    det.frame = *frame - 1;
    det.box = {nums[0], nums[1], nums[2], nums[3]};
    if (det.box.width <= 0.0 || det.box.height <= 0.0) {
      throw ParseError("non-positive box dimension at line " + std::to_string(line_no), line_no);
    }

    if (role == MotRole::ground_truth) {
      if (nums[4] == 0.0) continue;
      if (*id < 1) malformed(line_no, line, "ground-truth id must be >= 1");
      det.track_id = *id;
      det.confidence = 1.0;
    } else {
      if (*id == -1) {
        det.track_id.reset();
      } else if (*id >= 1) {
        det.track_id = *id;
      } else {
        malformed(line_no, line, "id must be >= 1 or -1");
      }
      if (nums[4] < 0.0 || nums[4] > 1.0) malformed(line_no, line, "confidence outside [0,1]");
      det.confidence = nums[4];
    }
    out.push_back(det);
  }
  return out;
}

std::vector<Detection> read_mot_file(const std::filesystem::path& path, MotRole role) {
  std::ifstream in(path);
  if (!in) throw ValidationError("cannot open " + path.string());
  try {
    return parse_mot(in, role);
  } catch (const ParseError& e) {
    throw ParseError(path.string() + ": " + e.what(), e.line());
  }
}

void write_mot(std::ostream& out, std::span<const Detection> detections) {
  std::vector<const Detection*> order;
  order.reserve(detections.size());
  for (const auto& d : detections) order.push_back(&d);
  std::stable_sort(order.begin(), order.end(), [](const Detection* a, const Detection* b) {
    return std::make_pair(a->frame, id_or_minus_one(*a)) <
           std::make_pair(b->frame, id_or_minus_one(*b));
  });
  char buf[256];
  for (const auto* d : order) {
    const int n = std::snprintf(buf, sizeof(buf), "%d,%d,%.3f,%.3f,%.3f,%.3f,%.4f,-1,-1,-1\n",
                                d->frame + 1, id_or_minus_one(*d), d->box.left, d->box.top,
                                d->box.width, d->box.height, d->confidence);
    out.write(buf, n);
  }
}

void write_mot_file(const std::filesystem::path& path, std::span<const Detection> detections) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw ValidationError("cannot write " + path.string());
  write_mot(out, detections);
}

std::map<std::string, std::filesystem::path> list_mot_sequences(const std::filesystem::path& dir) {
  namespace fs = std::filesystem;
  std::map<std::string, fs::path> out;
  if (fs::is_regular_file(dir)) {
    out.emplace(dir.stem().string(), dir);
    return out;
  }
  if (!fs::is_directory(dir)) throw ValidationError("no such file or directory: " + dir.string());
  for (const auto& entry : fs::directory_iterator(dir)) {
    if (entry.is_regular_file() && entry.path().extension() == ".txt") {
      out.emplace(entry.path().stem().string(), entry.path());
    } else if (entry.is_directory()) {
      for (const char* nested : {"gt/gt.txt", "det/det.txt"}) {
        const auto candidate = entry.path() / nested;
        if (fs::is_regular_file(candidate)) {
          out.emplace(entry.path().filename().string(), candidate);
          break;
        }
      }
    }
  }
  return out;
}

std::vector<SequencePair> parse_coco_vid(const nlohmann::json& doc) {
  using nlohmann::json;
  try {
    for (const char* key : {"videos", "images", "annotations"}) {
      if (!doc.contains(key) || !doc.at(key).is_array()) {
        throw ValidationError(std::string("COCO document lacks array '") + key + "'");
      }
    }

    std::vector<SequencePair> seqs;
    std::unordered_map<long long, std::size_t> video_index;
    for (const auto& v : doc.at("videos")) {
      const auto id = v.at("id").get<long long>();
      SequencePair seq;
      seq.name = v.at("name").get<std::string>();
      seq.frame_count = v.at("frame_count").get<int>();
      if (seq.frame_count < 1) throw ValidationError("video '" + seq.name + "' has frame_count < 1");
      if (!video_index.emplace(id, seqs.size()).second) {
        throw ValidationError("duplicate video id " + std::to_string(id));
      }
      seqs.push_back(std::move(seq));
    }

    struct ImageRef {
      std::size_t seq;
      int frame;
    };
    std::unordered_map<long long, ImageRef> images;
    for (const auto& im : doc.at("images")) {
      const auto id = im.at("id").get<long long>();
      const auto vid = im.at("video_id").get<long long>();
      const auto it = video_index.find(vid);
      if (it == video_index.end()) {
        throw ValidationError("image " + std::to_string(id) + " references unknown video_id " +
                              std::to_string(vid));
      }
      const int frame_index = im.at("frame_index").get<int>();
      if (frame_index < 1 || frame_index > seqs[it->second].frame_count) {
        throw ValidationError("image " + std::to_string(id) + " has frame_index " +
                              std::to_string(frame_index) + " outside video '" +
                              seqs[it->second].name + "'");
      }
      if (!images.emplace(id, ImageRef{it->second, frame_index - 1}).second) {
        throw ValidationError("duplicate image id " + std::to_string(id));
      }
    }

    for (const auto& ann : doc.at("annotations")) {
      const auto image_id = ann.at("image_id").get<long long>();
      const auto it = images.find(image_id);
      if (it == images.end()) {
        throw ValidationError("annotation references unknown image_id " + std::to_string(image_id));
      }
      const auto& bbox = ann.at("bbox");
      if (!bbox.is_array() || bbox.size() != 4) throw ValidationError("bbox must be [x,y,w,h]");
      Detection det;
      det.frame = it->second.frame;
      det.box = {bbox[0].get<double>(), bbox[1].get<double>(), bbox[2].get<double>(),
                 bbox[3].get<double>()};
      det.track_id = ann.at("track_id").get<int>();
      det.class_id = ann.value("category_id", 1);
      det.confidence = ann.value("score", 1.0);
      validate(det, "annotation on image " + std::to_string(image_id));
      seqs[it->second.seq].gt.push_back(det);
    }

    for (auto& seq : seqs) {
      canonicalize(seq.gt);
      check_unique_ids(seq.gt, seq.name, "annotation");
    }
    return seqs;
  } catch (const json::exception& e) {
    throw ValidationError(std::string("COCO schema error: ") + e.what());
  }
}

std::vector<SequencePair> read_coco_vid_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ValidationError("cannot open " + path.string());
  nlohmann::json doc;
  try {
    in >> doc;
  } catch (const nlohmann::json::exception& e) {
    throw ValidationError(path.string() + ": invalid JSON: " + e.what());
  }
  return parse_coco_vid(doc);
}

std::vector<AffineTransform> load_affines(std::istream& in) {
  std::vector<AffineTransform> out;
  std::set<int> frames;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (trim(line).empty()) continue;
    const auto fields = split_fields(line);
    if (fields.size() != 7) malformed(line_no, line, "expected frame,a,b,tx,c,d,ty");
    const auto frame = to_int(fields[0]);
    if (!frame) malformed(line_no, line, "bad frame");
    if (*frame < 2) {
      throw ParseError("affine frame must be >= 2 at line " + std::to_string(line_no), line_no);
    }
    double v[6];
    for (int i = 0; i < 6; ++i) {
      const auto x = to_double(fields[1 + i]);
      if (!x) malformed(line_no, line, "bad matrix entry");
      v[i] = *x;
    }
    AffineTransform t{*frame - 1, v[0], v[1], v[2], v[3], v[4], v[5]};
    if (t.determinant() == 0.0) {
      throw ParseError("singular affine transform at line " + std::to_string(line_no), line_no);
    }
    if (!frames.insert(t.frame).second) {
      throw ParseError("duplicate affine frame at line " + std::to_string(line_no), line_no);
    }
    out.push_back(t);
  }
  return out;
}

AffineSchedule::AffineSchedule(std::span<const AffineTransform> transforms) {
  for (const auto& t : transforms) by_frame_[t.frame] = t;
}

AffineTransform AffineSchedule::at(int frame) const {
  const auto it = by_frame_.find(frame);
  if (it != by_frame_.end()) return it->second;
  AffineTransform identity;
  identity.frame = frame;
  return identity;
}

}  // namespace smot
