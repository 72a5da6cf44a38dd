// Copyright 2026 The relicforge Authors
// SPDX-License-Identifier: Apache-2.0

#include "relicforge/cli.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <algorithm>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <numbers>
#include <sstream>

#include "relicforge/action_codec.hpp"
#include "relicforge/curation.hpp"
#include "relicforge/distill_replay.hpp"
#include "relicforge/error.hpp"
#include "relicforge/kernels.hpp"
#include "relicforge/memory_cache.hpp"
#include "relicforge/traj_eval.hpp"
#include "relicforge/trajectory.hpp"

namespace relicforge::cli {

namespace {

namespace fs = std::filesystem;

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path);
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

void require_input(const std::string& path) {
  if (!fs::is_regular_file(path)) throw IoError("input not found: " + path);
}

void require_output(const std::string& path) {
  if (path.empty() || path == "-") return;
  const fs::path parent = fs::path(path).parent_path();
  if (!parent.empty() && !fs::is_directory(parent)) {
    throw IoError("output directory does not exist: " + parent.string());
  }
}

/// Writes to `path`, or to `out` when the path is empty or "-".
void emit(const std::string& path, const std::string& data, std::ostream& out) {
  if (path.empty() || path == "-") {
    out << data;
    return;
  }
  std::ofstream f(path, std::ios::binary);
  if (!f) throw IoError("cannot write " + path);
  f << data;
  if (!f) throw IoError("write failed for " + path);
}

std::string fmt(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

std::string fixed9(double v) {
  char buf[48];
  std::snprintf(buf, sizeof buf, "%.9f", v);
  return buf;
}

EulerConvention parse_convention(const std::string& name) {
  if (name == "left") return {Handedness::kLeft};
  if (name == "right") return {Handedness::kRight};
  throw ValidationError("convention must be 'left' or 'right'");
}

std::vector<std::size_t> parse_sizes(const std::string& csv) {
  std::vector<std::size_t> out;
  std::stringstream ss(csv);
  std::string item;
  while (std::getline(ss, item, ',')) {
    try {
      std::size_t used = 0;
      const long long v = std::stoll(item, &used);
      if (used != item.size() || v <= 0) throw std::invalid_argument(item);
      out.push_back(static_cast<std::size_t>(v));
    } catch (const std::logic_error&) {
      throw ValidationError("expected positive integers, got '" + item + "'");
    }
  }
  if (out.empty()) throw ValidationError("empty block list");
  return out;
}

std::array<double, kActionDims> parse_target(const std::string& spec) {
  std::array<double, kActionDims> t{};
  if (spec == "uniform") {
    t.fill(1.0 / kActionDims);
    return t;
  }
  std::stringstream ss(spec);
  std::string item;
  std::size_t i = 0;
  while (std::getline(ss, item, ',')) {
    if (i == kActionDims) throw ValidationError("target needs exactly 13 proportions");
    try {
      t[i++] = std::stod(item);
    } catch (const std::logic_error&) {
      throw ValidationError("bad target proportion '" + item + "'");
    }
  }
  if (i != kActionDims) throw ValidationError("target needs exactly 13 proportions");
  return t;
}

// ---- subcommands -----------------------------------------------------------

struct ExtractOpts {
  std::string in, out, convention = "left";
  double trans_threshold = StaticThresholds{}.translation;
  double rot_threshold_deg = 0.1;
  double gamma = 0.0;
};

void do_extract(const ExtractOpts& o, std::ostream& out, std::ostream& err) {
  require_input(o.in);
  require_output(o.out);
  const Trajectory traj = load_annotation(o.in, parse_convention(o.convention));
  const ActionSequence seq =
      extract_actions(traj, {o.trans_threshold, o.rot_threshold_deg * std::numbers::pi / 180.0});
  if (seq.degenerate) {
    err << "warning: clip '" << (traj.clip_id().empty() ? o.in : traj.clip_id())
        << "' never moves; mean displacement set to 1 and every frame is static\n";
  }
  emit(o.out, serialize_actions(seq, o.gamma > 0.0 ? o.gamma : seq.mean_displacement), out);
}

struct IntegrateOpts {
  std::string in, out;
  double gamma = 0.0;
  std::vector<double> start{0.0, 0.0, 0.0};
};

void do_integrate(const IntegrateOpts& o, std::ostream& out) {
  require_input(o.in);
  require_output(o.out);
  if (o.start.size() != 3) throw ValidationError("--start needs three coordinates");
  const ActionFile file = parse_actions(read_file(o.in));
  const double gamma = o.gamma > 0.0 ? o.gamma : file.gamma;
  const CameraPose initial(Vec3(o.start[0], o.start[1], o.start[2]), Quat::Identity(), 0.0);
  const Trajectory traj = integrate_poses(file.sequence, gamma, initial);
  emit(o.out, serialize_annotation(traj) + "\n", out);
}

struct AugmentOpts {
  std::size_t length = 0;
  std::uint64_t seed = 0;
  std::size_t count = 1;
  std::size_t pivot = 0;
  std::string out;
};

void do_augment(const AugmentOpts& o, std::ostream& out) {
  require_output(o.out);
  std::string data;
  for (std::size_t i = 0; i < o.count; ++i) {
    Augmentation aug;
    if (o.pivot != 0) {
      aug.pivot = o.pivot;
      aug.indices = palindrome_indices(o.length, o.pivot);
    } else {
      aug = time_reverse_augment(o.length, o.seed + i);
    }
    data += nlohmann::json{{"pivot", aug.pivot}, {"indices", aug.indices}}.dump() + "\n";
  }
  emit(o.out, data, out);
}

struct StatsOpts {
  std::string in, out, table = "actions", manifest_out;
  std::vector<std::string> trajectories;
  double bin_seconds = 10.0;
};

std::vector<ClipMetadata> metadata_from_trajectories(const std::vector<std::string>& paths) {
  for (const auto& p : paths) require_input(p);
  std::vector<ClipMetadata> clips(paths.size());
  std::vector<std::string> errors(paths.size());
#pragma omp parallel for schedule(dynamic)
  for (std::ptrdiff_t i = 0; i < static_cast<std::ptrdiff_t>(paths.size()); ++i) {
    const auto ui = static_cast<std::size_t>(i);
    try {
      Trajectory t = load_annotation(paths[ui]);
      if (t.clip_id().empty()) {
        t = Trajectory(t.poses(), t.frame_rate(), fs::path(paths[ui]).stem().string());
      }
      clips[ui] = clip_metadata(t, extract_actions(t));
    } catch (const std::exception& e) {
      errors[ui] = paths[ui] + ": " + e.what();
    }
  }
  for (const auto& e : errors) {
    if (!e.empty()) throw ValidationError(e);
  }
  std::stable_sort(clips.begin(), clips.end(),
                   [](const ClipMetadata& a, const ClipMetadata& b) { return a.clip_id < b.clip_id; });
  return clips;
}

void do_stats(const StatsOpts& o, std::ostream& out) {
  require_output(o.out);
  require_output(o.manifest_out);
  if (o.in.empty() == o.trajectories.empty()) {
    throw ValidationError("give exactly one of --in (manifest) or --traj (annotation files)");
  }
  if (o.table != "actions" && o.table != "durations") {
    throw ValidationError("--table must be 'actions' or 'durations'");
  }
  std::vector<ClipMetadata> clips;
  if (!o.in.empty()) {
    require_input(o.in);
    clips = parse_manifest(read_file(o.in));
  } else {
    clips = metadata_from_trajectories(o.trajectories);
  }
  if (!o.manifest_out.empty()) {
    std::string manifest;
    for (const auto& c : clips) manifest += serialize_clip(c) + "\n";
    emit(o.manifest_out, manifest, out);
  }
  const auto rows = o.table == "actions" ? action_histogram_table(clips)
                                         : duration_histogram_table(clips, o.bin_seconds);
  std::string csv = "bin,count\n";
  for (const auto& r : rows) csv += r.bin + "," + std::to_string(r.count) + "\n";
  emit(o.out, csv, out);
}

struct BalanceOpts {
  std::string in, out, target = "uniform";
  std::uint64_t seed = 0;
};

void do_balance(const BalanceOpts& o, std::ostream& out) {
  require_input(o.in);
  require_output(o.out);
  const auto clips = parse_manifest(read_file(o.in));
  const BalanceResult r = balance_sample(clips, parse_target(o.target), o.seed);
  std::vector<std::size_t> order = r.selected;
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return clips[a].clip_id < clips[b].clip_id; });
  std::string subset;
  for (const auto i : order) subset += serialize_clip(clips[i]) + "\n";
  emit(o.out, subset, out);
  out << nlohmann::json{{"selected", r.selected.size()},
                        {"pool", clips.size()},
                        {"achieved", r.achieved},
                        {"l1_distance", r.l1_distance}}
             .dump()
      << "\n";
}

struct CacheOpts {
  std::string config, out;
  std::size_t steps = 80;
};

void do_simulate_cache(const CacheOpts& o, std::ostream& out) {
  CacheConfig cfg;
  if (!o.config.empty()) {
    require_input(o.config);
    cfg = parse_cache_config(read_file(o.config));
  }
  require_output(o.out);
  StreamingCache cache(cfg.schedule, cfg.d_model, cfg.bytes_per_element);
  std::string csv = "step,tokens,bytes,flops,compressed_index,factor,uncompressed_tokens,token_ratio\n";
  for (std::size_t step = 0; step < o.steps; ++step) {
    const AdvanceReport rep = cache.advance(cfg.grid);
    const CacheAccount acc = account(cache);
    const std::uint64_t full = cache.uncompressed_tokens();
    csv += std::to_string(step) + "," + std::to_string(acc.tokens) + "," + std::to_string(acc.bytes) +
           "," + std::to_string(acc.attention_flops) + "," +
           (rep.compressed_index ? std::to_string(*rep.compressed_index) : std::string()) + "," +
           std::to_string(rep.factor) + "," + std::to_string(full) + "," +
           fmt(static_cast<double>(full) / static_cast<double>(acc.tokens)) + "\n";
  }
  cache.check_invariants();
  emit(o.out, csv, out);
}

struct MaskOpts {
  std::string kind = "block-causal", blocks, format = "text", out;
  std::size_t noisy = 0;
};

void do_masks(const MaskOpts& o, std::ostream& out) {
  require_output(o.out);
  const auto counts = parse_sizes(o.blocks);
  Mask m;
  if (o.kind == "block-causal") {
    m = build_block_causal_mask(counts);
  } else if (o.kind == "hybrid") {
    m = build_hybrid_forcing_mask(counts.size(), o.noisy, counts);
  } else {
    throw ValidationError("--kind must be 'block-causal' or 'hybrid'");
  }
  std::string data;
  if (o.format == "text") {
    for (std::size_t q = 0; q < m.size(); ++q) {
      for (std::size_t k = 0; k < m.size(); ++k) data += m(q, k) ? '#' : '.';
      data += '\n';
    }
  } else if (o.format == "csv") {
    for (std::size_t q = 0; q < m.size(); ++q) {
      for (std::size_t k = 0; k < m.size(); ++k) {
        if (k) data += ',';
        data += m(q, k) ? '1' : '0';
      }
      data += '\n';
    }
  } else {
    throw ValidationError("--format must be 'text' or 'csv'");
  }
  emit(o.out, data, out);
}

struct DistillOpts {
  DemoConfig cfg;
  std::string out;
};

void do_distill(const DistillOpts& o, std::ostream& out) {
  require_output(o.out);
  const auto history = dmd_fit_demo(o.cfg);
  std::string csv = "step,theta_c,sample_mean,grad_norm\n";
  for (const auto& h : history) {
    csv += std::to_string(h.step) + "," + fmt(h.theta_c) + "," + fmt(h.sample_mean) + "," +
           fmt(h.grad_norm) + "\n";
  }
  emit(o.out, csv, out);
}

struct EvalOpts {
  std::string reference, estimate;
  bool no_align = false;
};

void do_eval(const EvalOpts& o, std::ostream& out) {
  require_input(o.reference);
  require_input(o.estimate);
  const RpeReport r = rpe(load_annotation(o.reference), load_annotation(o.estimate), !o.no_align);
  out << fixed9(r.rpe_trans) << ' ' << fixed9(r.rpe_rot) << ' ' << fixed9(r.alignment.scale) << ' '
      << fixed9(r.alignment.residual_rms) << '\n';
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"relicforge: camera-action, streaming-cache and distillation toolkit", "relicforge"};
  app.require_subcommand(1);
  app.fallthrough(false);

  ExtractOpts ex;
  auto* extract = app.add_subcommand("extract-actions", "Label a camera trajectory with 13-slot actions");
  extract->add_option("--in", ex.in, "annotation document (JSON)")->required();
  extract->add_option("--out", ex.out, "action file (line-delimited JSON), '-' for stdout");
  extract->add_option("--trans-threshold", ex.trans_threshold, "static threshold, normalized units");
  extract->add_option("--rot-threshold-deg", ex.rot_threshold_deg, "static threshold, degrees per frame");
  extract->add_option("--gamma", ex.gamma, "gamma recorded in the header (default: mean displacement)");
  extract->add_option("--convention", ex.convention, "Euler handedness: left or right");

  IntegrateOpts in;
  auto* integrate = app.add_subcommand("integrate", "Integrate an action file into absolute poses");
  integrate->add_option("--in", in.in, "action file")->required();
  integrate->add_option("--out", in.out, "annotation document, '-' for stdout");
  integrate->add_option("--gamma", in.gamma, "scene units per normalized unit (default: header gamma)");
  integrate->add_option("--start", in.start, "initial position x y z")->expected(3);

  AugmentOpts au;
  auto* augment = app.add_subcommand("augment", "Sample palindrome (time-reverse) index sequences");
  augment->add_option("--length", au.length, "clip length T in frames")->required();
  augment->add_option("--seed", au.seed, "random seed");
  augment->add_option("--count", au.count, "number of samples (seeds seed..seed+count-1)");
  augment->add_option("--pivot", au.pivot, "force the pivot instead of sampling");
  augment->add_option("--out", au.out, "output file, '-' for stdout");

  StatsOpts st;
  auto* stats = app.add_subcommand("stats", "Dataset histograms as CSV (bin,count)");
  stats->add_option("--in", st.in, "clip manifest (line-delimited JSON)");
  stats->add_option("--traj", st.trajectories, "annotation documents to summarize");
  stats->add_option("--table", st.table, "actions or durations");
  stats->add_option("--bin-seconds", st.bin_seconds, "duration bin width");
  stats->add_option("--manifest-out", st.manifest_out, "also write the computed manifest here");
  stats->add_option("--out", st.out, "CSV output, '-' for stdout");

  BalanceOpts ba;
  auto* balance = app.add_subcommand("balance", "Select an action-balanced subset of a manifest");
  balance->add_option("--in", ba.in, "clip manifest")->required();
  balance->add_option("--target", ba.target, "'uniform' or 13 comma-separated proportions");
  balance->add_option("--seed", ba.seed, "tie-breaking seed");
  balance->add_option("--out", ba.out, "selected manifest, '-' for stdout");

  CacheOpts ca;
  auto* cache = app.add_subcommand("simulate-cache", "Per-step token/byte/FLOP accounting of the KV cache");
  cache->add_option("--config", ca.config, "schedule config (JSON); defaults to the built-in schedule");
  cache->add_option("--steps", ca.steps, "latents to stream");
  cache->add_option("--out", ca.out, "CSV output, '-' for stdout");

  MaskOpts ma;
  auto* masks = app.add_subcommand("masks", "Render attention masks");
  masks->add_option("--kind", ma.kind, "block-causal or hybrid");
  masks->add_option("--blocks", ma.blocks, "comma-separated token counts per block")->required();
  masks->add_option("--noisy", ma.noisy, "noisy suffix blocks K (hybrid)");
  masks->add_option("--format", ma.format, "text or csv");
  masks->add_option("--out", ma.out, "output file, '-' for stdout");

  DistillOpts di;
  auto* distill = app.add_subcommand("distill-demo", "Toy DMD fit with replayed back-propagation");
  distill->add_option("--target-mu", di.cfg.target_mu, "mean of the target Gaussian");
  distill->add_option("--steps", di.cfg.steps, "update steps");
  distill->add_option("--lr", di.cfg.lr, "learning rate");
  distill->add_option("--blocks", di.cfg.blocks, "rollout blocks L");
  distill->add_option("--dim", di.cfg.dim, "elements per block");
  distill->add_option("--seed", di.cfg.seed, "noise seed");
  distill->add_option("--out", di.out, "CSV output, '-' for stdout");

  EvalOpts ev;
  auto* eval = app.add_subcommand("eval-rpe", "Relative pose error of an estimate against a reference");
  eval->add_option("reference", ev.reference, "reference annotation document")->required();
  eval->add_option("estimate", ev.estimate, "estimated annotation document")->required();
  eval->add_flag("--no-align", ev.no_align, "skip Sim(3) alignment");

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    app.parse(reversed);
  } catch (const CLI::Success&) {
    out << (app.get_subcommands().empty() ? app.help() : app.get_subcommands().front()->help());
    return kExitOk;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << "\n\n" << app.help();
    return kExitUsage;
  }

  try {
    kernels::configure_threads_from_env();
    if (extract->parsed()) do_extract(ex, out, err);
    else if (integrate->parsed()) do_integrate(in, out);
    else if (augment->parsed()) do_augment(au, out);
    else if (stats->parsed()) do_stats(st, out);
    else if (balance->parsed()) do_balance(ba, out);
    else if (cache->parsed()) do_simulate_cache(ca, out);
    else if (masks->parsed()) do_masks(ma, out);
    else if (distill->parsed()) do_distill(di, out);
    else if (eval->parsed()) do_eval(ev, out);
  } catch (const IoError& e) {
    err << "error: " << e.what() << '\n';
    return kExitIo;
  } catch (const Error& e) {
    err << "error: " << e.what() << '\n';
    return kExitValidation;
  }
  return kExitOk;
}

}  // namespace relicforge::cli
