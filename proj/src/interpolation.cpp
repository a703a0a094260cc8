#include "smot/fusion.hpp"

#include <algorithm>
#include <map>

namespace smot {

std::vector<Detection> interpolate_tracks(std::span<const Detection> outputs, int max_gap) {
  std::map<int, std::vector<Detection>> by_id;
  std::vector<Detection> out;
  for (const auto& d : outputs) {
    if (d.track_id) {
      by_id[*d.track_id].push_back(d);
    } else {
      out.push_back(d);
    }
  }

  for (auto& [id, dets] : by_id) {
    std::stable_sort(dets.begin(), dets.end(),
                     [](const Detection& a, const Detection& b) { return a.frame < b.frame; });
    for (std::size_t k = 0; k < dets.size(); ++k) {
      out.push_back(dets[k]);
      if (k + 1 == dets.size()) break;
      const Detection& a = dets[k];
      const Detection& b = dets[k + 1];
      const int missing = b.frame - a.frame - 1;
      if (missing <= 0 || missing > max_gap) continue;
      const double span = static_cast<double>(b.frame - a.frame);
      for (int f = a.frame + 1; f < b.frame; ++f) {
        const double u = (f - a.frame) / span;
        Detection d = a;
        d.frame = f;
        d.box.left = a.box.left + u * (b.box.left - a.box.left);
        d.box.top = a.box.top + u * (b.box.top - a.box.top);
        d.box.width = a.box.width + u * (b.box.width - a.box.width);
        d.box.height = a.box.height + u * (b.box.height - a.box.height);
        d.confidence = a.confidence + u * (b.confidence - a.confidence);
        out.push_back(d);
      }
    }
  }

  std::stable_sort(out.begin(), out.end(), [](const Detection& a, const Detection& b) {
    return std::make_pair(a.frame, a.track_id.value_or(-1)) <
           std::make_pair(b.frame, b.track_id.value_or(-1));
  });
  return out;
}

}  // namespace smot
