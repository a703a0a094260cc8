#include "smot/report.hpp"

#include <cstdio>
#include <ostream>

namespace smot {

std::vector<std::string> metric_keys(const MetricSelection& sel) {
  std::vector<std::string> keys;
  if (sel.so_hota) keys.insert(keys.end(), {"so_hota", "so_deta", "so_assa", "so_detre", "so_detpr"});
  if (sel.hota) keys.insert(keys.end(), {"hota", "deta", "assa"});
  if (sel.clear) keys.insert(keys.end(), {"mota", "mt", "ml", "idsw", "fp", "fn"});
  if (sel.idf1) keys.emplace_back("idf1");
  return keys;
}

nlohmann::json to_json(const MetricValues& v, const MetricSelection& sel) {
  nlohmann::json j = nlohmann::json::object();
  if (sel.so_hota && v.so) {
    j["so_hota"] = v.so->mean_hota;
    j["so_deta"] = v.so->mean_deta;
    j["so_assa"] = v.so->mean_assa;
    j["so_detre"] = v.so->mean_detre;
    j["so_detpr"] = v.so->mean_detpr;
  }
  if (sel.hota && v.classic) {
    j["hota"] = v.classic->mean_hota;
    j["deta"] = v.classic->mean_deta;
    j["assa"] = v.classic->mean_assa;
  }
  if (sel.clear) {
    if (v.clear) {
      j["mota"] = v.clear->mota;
      j["mt"] = v.clear->mt;
      j["ml"] = v.clear->ml;
      j["idsw"] = v.clear->idsw;
      j["fp"] = v.clear->fp;
      j["fn"] = v.clear->fn;
    } else {
      for (const char* k : {"mota", "mt", "ml", "idsw", "fp", "fn"}) j[k] = nullptr;
    }
  }
  if (sel.idf1 && v.idf1) j["idf1"] = *v.idf1;
  j["vacuous"] = v.vacuous;
  return j;
}

nlohmann::json to_json(const MetricReport& r) {
  nlohmann::json j;
  j["pooled"] = to_json(r.pooled, r.metrics);
  j["per_sequence"] = nlohmann::json::object();
  for (const auto& [name, values] : r.per_sequence) j["per_sequence"][name] = to_json(values, r.metrics);
  auto& cfg = j["config"];
  cfg["measure"] = r.metrics.so_hota ? "dotd" : "iou";
  cfg["thresholds"] = r.thresholds;
  cfg["s_used"] = r.s_used;
  cfg["iou_threshold"] = r.iou_threshold;
  return j;
}

void write_csv(std::ostream& out, const MetricReport& r) {
  const auto keys = metric_keys(r.metrics);
  out << "sequence";
  for (const auto& k : keys) out << ',' << k;
  out << ",vacuous\n";
  const auto row = [&](const std::string& name, const MetricValues& v) {
    const auto j = to_json(v, r.metrics);
    out << name;
    char buf[64];
    for (const auto& k : keys) {
      out << ',';
      if (!j.contains(k) || j[k].is_null()) continue;
      if (j[k].is_number_integer()) {
        out << j[k].get<long long>();
      } else {
        std::snprintf(buf, sizeof(buf), "%.6f", j[k].get<double>());
        out << buf;
      }
    }
    out << ',' << (v.vacuous ? "true" : "false") << '\n';
  };
  for (const auto& [name, values] : r.per_sequence) row(name, values);
  row("__pooled__", r.pooled);
}

}  // namespace smot
