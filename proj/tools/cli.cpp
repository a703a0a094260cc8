#include "cli.hpp"

#include <algorithm>
#include <chrono>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <map>
#include <optional>
#include <set>
#include <sstream>

#include <CLI11.hpp>

#include "smot/data_io.hpp"
#include "smot/error.hpp"
#include "smot/fusion.hpp"
#include "smot/metrics.hpp"
#include "smot/parallel.hpp"
#include "smot/report.hpp"
#include "smot/synth.hpp"
#include "smot/tracker.hpp"

namespace smot::cli {

namespace {

namespace fs = std::filesystem;

int resolve_jobs(std::optional<int> flag) {
  if (flag) {
    if (*flag < 1) throw ValidationError("--jobs must be >= 1");
    return *flag;
  }
  if (const char* env = std::getenv("SMOT_EVAL_JOBS")) {
    try {
      const int jobs = std::stoi(env);
      if (jobs >= 1) return jobs;
    } catch (const std::exception&) {
    }
    throw ValidationError(std::string("SMOT_EVAL_JOBS must be a positive integer, got '") + env + "'");
  }
  return default_jobs();
}

MetricSelection parse_metrics(const std::vector<std::string>& names) {
  if (names.empty()) return {};
  MetricSelection sel{false, false, false, false};
  for (const auto& n : names) {
    if (n == "so-hota") sel.so_hota = true;
    else if (n == "hota") sel.hota = true;
    else if (n == "clear") sel.clear = true;
    else if (n == "idf1") sel.idf1 = true;
    else throw ValidationError("unknown metric '" + n + "' (expected so-hota, hota, clear, idf1)");
  }
  return sel;
}

// "a:b:step" (inclusive) or a comma-separated list.
std::vector<double> parse_shifts(const std::string& spec) {
  std::vector<double> out;
  if (spec.find(':') != std::string::npos) {
    double lo = 0, hi = 0, step = 0;
    char c1 = 0, c2 = 0;
    std::istringstream in(spec);
    if (!(in >> lo >> c1 >> hi >> c2 >> step) || c1 != ':' || c2 != ':' || !(step > 0) || hi < lo) {
      throw ValidationError("--shifts expects lo:hi:step with step > 0, got '" + spec + "'");
    }
    const auto n = static_cast<long>(std::floor((hi - lo) / step + 1e-9));
    for (long k = 0; k <= n; ++k) out.push_back(lo + static_cast<double>(k) * step);
    return out;
  }
  std::istringstream in(spec);
  std::string item;
  while (std::getline(in, item, ',')) {
    try {
      out.push_back(std::stod(item));
    } catch (const std::exception&) {
      throw ValidationError("bad shift value '" + item + "'");
    }
  }
  return out;
}

std::pair<double, double> parse_arena(const std::string& spec) {
  const auto x = spec.find('x');
  try {
    if (x == std::string::npos) throw std::invalid_argument(spec);
    return {std::stod(spec.substr(0, x)), std::stod(spec.substr(x + 1))};
  } catch (const std::exception&) {
    throw ValidationError("--arena expects WIDTHxHEIGHT, got '" + spec + "'");
  }
}

struct Output {
  std::ofstream file;
  std::ostream* stream = nullptr;

  Output(const std::string& path, std::ostream& fallback) {
    if (path.empty() || path == "-") {
      stream = &fallback;
      return;
    }
    file.open(path, std::ios::binary);
    if (!file) throw ValidationError("cannot write " + path);
    stream = &file;
  }
};

int frame_span(const SequencePair& seq) {
  int frames = 1;
  for (const auto& d : seq.gt) frames = std::max(frames, d.frame + 1);
  for (const auto& d : seq.pred) frames = std::max(frames, d.frame + 1);
  return frames;
}

std::vector<SequencePair> load_mot_pairs(const std::string& gt_path, const std::string& pred_path) {
  auto gt_files = list_mot_sequences(gt_path);
  auto pred_files = list_mot_sequences(pred_path);
  // Two plain files pair with each other whatever their names.
  if (fs::is_regular_file(gt_path) && fs::is_regular_file(pred_path) && gt_files.size() == 1 &&
      pred_files.size() == 1) {
    pred_files = {{gt_files.begin()->first, pred_files.begin()->second}};
  }
  for (const auto& [name, path] : gt_files) {
    if (!pred_files.contains(name)) {
      throw PairingError("prediction missing for sequence '" + name + "' (expected under " +
                         pred_path + ")");
    }
  }
  for (const auto& [name, path] : pred_files) {
    if (!gt_files.contains(name)) {
      throw PairingError("prediction for unknown sequence '" + name + "' (" + path.string() + ")");
    }
  }
  std::vector<SequencePair> seqs;
  for (const auto& [name, path] : gt_files) {
    SequencePair seq;
    seq.name = name;
    seq.gt = read_mot_file(path, MotRole::ground_truth);
    seq.pred = read_mot_file(pred_files.at(name), MotRole::prediction);
    canonicalize(seq.gt);
    canonicalize(seq.pred);
    seq.frame_count = frame_span(seq);
    seqs.push_back(std::move(seq));
  }
  return seqs;
}

std::vector<SequencePair> load_coco_pairs(const std::string& gt_path, const std::string& pred_path) {
  auto gt = read_coco_vid_file(gt_path);
  auto pred = read_coco_vid_file(pred_path);
  std::map<std::string, SequencePair*> pred_by_name;
  for (auto& p : pred) pred_by_name[p.name] = &p;
  for (auto& seq : gt) {
    const auto it = pred_by_name.find(seq.name);
    if (it == pred_by_name.end()) {
      throw PairingError("prediction missing for sequence '" + seq.name + "' in " + pred_path);
    }
    seq.pred = std::move(it->second->gt);
    pred_by_name.erase(it);
  }
  if (!pred_by_name.empty()) {
    throw PairingError("prediction for unknown sequence '" + pred_by_name.begin()->first + "' in " +
                       pred_path);
  }
  return gt;
}

void print_headline(std::ostream& out, const MetricValues& v) {
  char buf[256];
  if (v.so) {
    std::snprintf(buf, sizeof(buf), "SO-HOTA %.2f  SO-DetA %.2f  SO-AssA %.2f  SO-DetRe %.2f  SO-DetPr %.2f\n",
                  v.so->mean_hota, v.so->mean_deta, v.so->mean_assa, v.so->mean_detre,
                  v.so->mean_detpr);
    out << buf;
  }
  if (v.classic) {
    std::snprintf(buf, sizeof(buf), "HOTA %.2f  DetA %.2f  AssA %.2f\n", v.classic->mean_hota,
                  v.classic->mean_deta, v.classic->mean_assa);
    out << buf;
  }
  if (v.clear) {
    std::snprintf(buf, sizeof(buf), "MOTA %.2f  MT %.2f  ML %.2f  IDSW %lld  FP %lld  FN %lld\n",
                  v.clear->mota, v.clear->mt, v.clear->ml, static_cast<long long>(v.clear->idsw),
                  static_cast<long long>(v.clear->fp), static_cast<long long>(v.clear->fn));
    out << buf;
  }
  if (v.idf1) {
    std::snprintf(buf, sizeof(buf), "IDF1 %.2f\n", *v.idf1);
    out << buf;
  }
}

struct EvaluateArgs {
  std::string gt, pred, format = "mot", out, out_format;
  std::vector<std::string> metrics;
  std::optional<double> s_override;
  std::optional<int> jobs;
  double iou_threshold = 0.5;
  bool strict = false;
};

int cmd_evaluate(const EvaluateArgs& a, std::ostream& out, std::ostream& err) {
  EvalConfig cfg;
  cfg.metrics = parse_metrics(a.metrics);
  cfg.jobs = resolve_jobs(a.jobs);
  if (!(a.iou_threshold > 0.0 && a.iou_threshold <= 1.0)) {
    throw ValidationError("--iou-threshold must lie in (0,1]");
  }
  cfg.iou_threshold = a.iou_threshold;

  std::vector<SequencePair> seqs;
  if (a.format == "mot") {
    seqs = load_mot_pairs(a.gt, a.pred);
  } else if (a.format == "coco") {
    seqs = load_coco_pairs(a.gt, a.pred);
  } else {
    throw ValidationError("--format must be mot or coco");
  }
  if (seqs.empty()) throw PairingError("no sequences found under " + a.gt);

  std::vector<std::string> warnings;
  for (const auto& seq : seqs) {
    validate(seq, true);
    if (seq.gt.empty()) warnings.push_back("sequence '" + seq.name + "' has no ground truth");
    if (seq.pred.empty()) warnings.push_back("sequence '" + seq.name + "' has no predictions");
  }

  if (a.s_override) {
    cfg.s = MeanObjectSize(*a.s_override);
  } else {
    std::vector<BoundingBox> boxes;
    for (const auto& seq : seqs) {
      for (const auto& d : seq.gt) boxes.push_back(d.box);
    }
    cfg.s = mean_object_size(boxes);
  }

  const auto report = evaluate(seqs, cfg);
  for (const auto& [name, values] : report.per_sequence) {
    for (const auto& w : values.warnings) warnings.push_back("sequence '" + name + "': " + w);
  }
  for (const auto& w : warnings) err << "warning: " << w << '\n';
  if (a.strict && !warnings.empty()) {
    err << "error: --strict treats the warnings above as failures\n";
    return kValidation;
  }

  if (!a.out.empty()) {
    std::string fmt = a.out_format;
    if (fmt.empty()) fmt = fs::path(a.out).extension() == ".csv" ? "csv" : "json";
    Output o(a.out, out);
    if (fmt == "csv") {
      write_csv(*o.stream, report);
    } else if (fmt == "json") {
      *o.stream << to_json(report).dump(2) << '\n';
    } else {
      throw ValidationError("--out-format must be json or csv");
    }
  }
  char buf[96];
  std::snprintf(buf, sizeof(buf), "sequences %zu  S %.3f\n", seqs.size(), report.s_used);
  out << buf;
  print_headline(out, report.pooled);
  return kOk;
}

struct SynthArgs {
  double box_size = 16.0;
  std::string shifts = "0:64:1";
  int frames = 50;
  std::optional<double> s_override;
  std::string out;

  SceneConfig scene;
  std::string arena = "1920x1080";
  std::string motion = "linear";
  std::string pred_out;
  CorruptionConfig corruption;
  std::optional<std::uint64_t> corrupt_seed;
};

int cmd_synth_displacement(const SynthArgs& a, std::ostream& out) {
  DisplacementStudyConfig cfg;
  cfg.box_size = a.box_size;
  cfg.shifts = parse_shifts(a.shifts);
  cfg.frames = a.frames;
  cfg.s_override = a.s_override;
  const auto rows = displacement_study(cfg);
  Output o(a.out, out);
  write_curve_csv(*o.stream, rows);
  return kOk;
}

int cmd_synth_scene(const SynthArgs& a, std::ostream& out) {
  SceneConfig cfg = a.scene;
  std::tie(cfg.arena_width, cfg.arena_height) = parse_arena(a.arena);
  cfg.motion = parse_motion(a.motion);
  const auto seq = generate_scene(cfg);
  {
    Output o(a.out, out);
    write_mot(*o.stream, seq.gt);
  }
  if (!a.pred_out.empty()) {
    CorruptionConfig c = a.corruption;
    c.seed = a.corrupt_seed.value_or(cfg.seed + 1);
    const auto pred = corrupt(seq, c);
    Output o(a.pred_out, out);
    write_mot(*o.stream, pred);
  }
  return kOk;
}

struct TrackArgs {
  std::string detections, affine, out, similarity = "expanded_penalty";
  std::optional<double> object_size;
  TrackerConfig cfg;
};

int cmd_track(const TrackArgs& a, std::ostream& out, std::ostream& err) {
  TrackerConfig cfg = a.cfg;
  cfg.similarity = parse_measure(a.similarity);
  cfg.object_size = a.object_size;
  validate(cfg);

  const auto detections = read_mot_file(a.detections, MotRole::prediction);
  AffineSchedule schedule;
  if (!a.affine.empty()) {
    std::ifstream in(a.affine);
    if (!in) throw ValidationError("cannot open " + a.affine);
    try {
      const auto transforms = load_affines(in);
      schedule = AffineSchedule(transforms);
    } catch (const ParseError& e) {
      throw ParseError(a.affine + ": " + e.what(), e.line());
    }
  }

  const auto start = std::chrono::steady_clock::now();
  auto tracked = run_tracker(detections, cfg, schedule);
  if (cfg.interpolation_max_gap > 0) tracked = interpolate_tracks(tracked, cfg.interpolation_max_gap);
  const double seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();

  {
    Output o(a.out, out);
    write_mot(*o.stream, tracked);
  }
  std::set<int> ids;
  int frames = 0;
  for (const auto& d : detections) frames = std::max(frames, d.frame + 1);
  for (const auto& d : tracked) ids.insert(*d.track_id);
  std::ostream& summary = (a.out.empty() || a.out == "-") ? err : out;
  char buf[160];
  std::snprintf(buf, sizeof(buf), "tracks %zu  frames %d  throughput %.1f frames/s\n", ids.size(),
                frames, seconds > 0.0 ? frames / seconds : 0.0);
  summary << buf;
  return kOk;
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Small-object tracking evaluation, synthesis and reference tracking"};
  app.require_subcommand(1);

  EvaluateArgs ev;
  auto* evaluate_cmd = app.add_subcommand("evaluate", "Score predictions against ground truth");
  evaluate_cmd->add_option("--gt", ev.gt, "Ground truth: MOT file/directory or COCO-video JSON")->required();
  evaluate_cmd->add_option("--pred", ev.pred, "Predictions, same layout as --gt")->required();
  evaluate_cmd->add_option("--format", ev.format, "mot or coco")->check(CLI::IsMember({"mot", "coco"}));
  evaluate_cmd->add_option("--metrics", ev.metrics, "Subset of so-hota,hota,clear,idf1")->delimiter(',');
  evaluate_cmd->add_option("--s-override", ev.s_override, "Mean object size S in pixels");
  evaluate_cmd->add_option("--out", ev.out, "Report path (.json or .csv)");
  evaluate_cmd->add_option("--out-format", ev.out_format, "json or csv (default: from --out extension)");
  evaluate_cmd->add_option("--iou-threshold", ev.iou_threshold, "IoU threshold for CLEAR and IDF1");
  evaluate_cmd->add_option("--jobs", ev.jobs, "Worker threads (default: SMOT_EVAL_JOBS or all cores)");
  evaluate_cmd->add_flag("--strict", ev.strict, "Treat warnings as errors");

  SynthArgs sy;
  auto* synth_cmd = app.add_subcommand("synth", "Generate synthetic studies and scenes");
  synth_cmd->require_subcommand(1);
  auto* disp = synth_cmd->add_subcommand("displacement", "IoU/DotD/HOTA/SO-HOTA versus vertical shift");
  disp->add_option("--box-size", sy.box_size, "Box side d in pixels");
  disp->add_option("--shifts", sy.shifts, "lo:hi:step or comma list of shifts in pixels");
  disp->add_option("--frames", sy.frames, "Frames per scenario");
  disp->add_option("--s-override", sy.s_override, "Mean object size (default: box size)");
  disp->add_option("--out", sy.out, "CSV path (default: stdout)");
  auto* scene = synth_cmd->add_subcommand("scene", "Random multi-object scene in MOT format");
  scene->add_option("--objects", sy.scene.n_objects, "Number of objects");
  scene->add_option("--frames", sy.scene.frames, "Number of frames");
  scene->add_option("--arena", sy.arena, "WIDTHxHEIGHT in pixels");
  scene->add_option("--box-min", sy.scene.box_min, "Smallest box side");
  scene->add_option("--box-max", sy.scene.box_max, "Largest box side");
  scene->add_option("--motion", sy.motion, "linear, sinusoidal or flock");
  scene->add_option("--speed-min", sy.scene.speed_min, "Slowest speed, px/frame");
  scene->add_option("--speed-max", sy.scene.speed_max, "Fastest speed, px/frame");
  scene->add_option("--seed", sy.scene.seed, "Random seed");
  scene->add_option("--out", sy.out, "Ground-truth MOT path (default: stdout)");
  scene->add_option("--pred-out", sy.pred_out, "Also write corrupted predictions here");
  scene->add_option("--noise-sigma", sy.corruption.center_noise_sigma, "Center jitter sigma, px");
  scene->add_option("--miss-rate", sy.corruption.miss_rate, "Probability of dropping a detection");
  scene->add_option("--fp-rate", sy.corruption.fp_rate, "False positives per object per frame");
  scene->add_option("--id-switch-rate", sy.corruption.id_switch_rate, "Id swap probability per track per frame");
  scene->add_flag("--drop-ids", sy.corruption.drop_ids, "Strip identities (tracker input)");
  scene->add_option("--corrupt-seed", sy.corrupt_seed, "Corruption seed (default: seed + 1)");

  TrackArgs tr;
  auto* track_cmd = app.add_subcommand("track", "Run the reference tracker on raw detections");
  track_cmd->add_option("--detections", tr.detections, "MOT detections (id -1)")->required();
  track_cmd->add_option("--affine", tr.affine, "Per-frame affine CSV: frame,a,b,tx,c,d,ty");
  track_cmd->add_option("--out", tr.out, "Tracked MOT output (default: stdout)");
  track_cmd->add_option("--similarity", tr.similarity, "iou, dotd, diou or expanded_penalty");
  track_cmd->add_option("--assoc-threshold", tr.cfg.assoc_threshold, "Minimum similarity to associate");
  track_cmd->add_option("--ema-lambda", tr.cfg.ema_lambda, "EMA decay for the motion direction");
  track_cmd->add_option("--ocm-weight", tr.cfg.ocm_weight, "Weight of the direction-consistency cost");
  track_cmd->add_option("--expand", tr.cfg.expand, "Relative box expansion per side");
  track_cmd->add_option("--penalty-weight", tr.cfg.penalty_weight, "Distance penalty weight");
  track_cmd->add_option("--max-age", tr.cfg.max_age, "Frames a lost track survives");
  track_cmd->add_option("--min-hits", tr.cfg.min_hits, "Hits before a track is reported");
  track_cmd->add_option("--interp-max-gap", tr.cfg.interpolation_max_gap, "Largest gap to interpolate (0 = off)");
  track_cmd->add_option("--object-size", tr.object_size, "Fixed size normalizer S (default: running mean)");

  std::vector<std::string> rest(args.size() > 1 ? args.begin() + 1 : args.end(), args.end());
  std::reverse(rest.begin(), rest.end());
  try {
    app.parse(rest);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e, out, err);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e, out, err);
  } catch (const CLI::ParseError& e) {
    app.exit(e, out, err);
    return kValidation;
  }

  try {
    if (*evaluate_cmd) return cmd_evaluate(ev, out, err);
    if (*disp) return cmd_synth_displacement(sy, out);
    if (*scene) return cmd_synth_scene(sy, out);
    if (*track_cmd) return cmd_track(tr, out, err);
  } catch (const PairingError& e) {
    err << "error: " << e.what() << '\n';
    return kPairing;
  } catch (const ValidationError& e) {
    err << "error: " << e.what() << '\n';
    return kValidation;
  } catch (const std::exception& e) {
    err << "internal error: " << e.what() << '\n';
    return kInternal;
  }
  return kInternal;
}

}  // namespace smot::cli
