// Copyright 2026 The PatchDP Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     https://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.
#include "cli/commands.h"

#include <algorithm>
#include <array>
#include <atomic>
#include <chrono>
#include <cmath>
#include <fstream>
#include <map>
#include <memory>
#include <optional>
#include <thread>
#include <utility>

#include "CLI11.hpp"
#include "absl/status/status.h"
#include "absl/status/statusor.h"
#include "absl/strings/ascii.h"
#include "absl/strings/str_cat.h"
#include "absl/strings/str_format.h"
#include "absl/strings/str_join.h"
#include "absl/strings/string_view.h"
#include "absl/strings/strip.h"
#include "cli/geometry_args.h"
#include "cli/manifest.h"
#include "cli/svg.h"
#include "patchdp/geometry.h"
#include "patchdp/mechanisms.h"
#include "patchdp/oracle.h"
#include "patchdp/pld.h"

#ifndef PATCHDP_VERSION
#define PATCHDP_VERSION "unknown"
#endif

namespace patchdp::cli {
namespace {

using Clock = std::chrono::steady_clock;

// ---------------------------------------------------------------------------
// Flag groups.

struct GeometryFlags {
  std::string image = "1000x1000";
  std::string pad = "0,0";
  std::string crop = "100x100";
  std::string patch = "rect:10x10";
  std::string at;
  bool worst_case = false;
};

struct TrainingFlags {
  double sigma = 1.0;
  double sensitivity = 1.0;
  double clip_norm = 1.0;
  int64_t batch_size = 100;
  int64_t epoch_size = 3000;
  int64_t epochs = 100;
  // 0 selects 1 / epoch_size.
  double delta = 0.0;
  // 0 selects the sampling schedule.
  int64_t steps = 0;
  double grid_spacing = 1e-3;
  double tail_mass = 1e-15;
  std::string direction = "both";
  std::string convolution = "auto";
  bool fixed_grid = false;
};

struct GammaFlags {
  GeometryFlags geo;
  bool csv = false;
  bool enumerate = false;
  std::string stem = "gamma";
  std::string config;
};

struct ProfileFlags {
  GeometryFlags geo;
  TrainingFlags train;
  double sigma_data = 1000.0;
  bool data_noise_composed = false;
  double eps_min = 0.0;
  double eps_max = 10.0;
  int64_t eps_count = 201;
  bool svg = false;
  std::string stem = "profile";
  std::string config;
};

enum class SweepKind { kCrop, kPatch, kPadding, kResolution, kNoise };
constexpr std::array<SweepKind, 5> kSweepKinds = {
    SweepKind::kCrop, SweepKind::kPatch, SweepKind::kPadding,
    SweepKind::kResolution, SweepKind::kNoise};

const char* SweepName(SweepKind kind) {
  switch (kind) {
    case SweepKind::kCrop:
      return "crop";
    case SweepKind::kPatch:
      return "patch";
    case SweepKind::kPadding:
      return "padding";
    case SweepKind::kResolution:
      return "resolution";
    case SweepKind::kNoise:
      return "noise";
  }
  return "";
}

struct SweepFlags {
  SweepKind kind = SweepKind::kCrop;
  GeometryFlags geo;
  TrainingFlags train;
  double from = 0.0;
  double to = 0.0;
  double step = 1.0;
  std::vector<double> sigmas = {4.0, 4.5, 5.0};
  bool svg = false;
  std::string stem;
  std::string config;
};

struct CalibrateFlags {
  GeometryFlags geo;
  TrainingFlags train;
  std::vector<double> targets = {5.0, 10.0, 20.0, 50.0, 100.0};
  double tolerance = 1e-3;
  double sigma_start = 1.0;
  double sigma_min = 1e-3;
  double sigma_max = 1e3;
  std::string stem = "calibrate";
  std::string config;
};

struct Flags {
  std::string out_dir = ".";
  int threads = 0;
  GammaFlags gamma;
  ProfileFlags profile;
  std::array<SweepFlags, kSweepKinds.size()> sweeps;
  CalibrateFlags calibrate;
};

// Settings of the sweep experiments: delta 1e-5, 10^5 training images,
// batches of 100 and 100 epochs.
SweepFlags SweepDefaults(SweepKind kind) {
  SweepFlags s;
  s.kind = kind;
  s.stem = absl::StrCat("sweep_", SweepName(kind));
  s.train.epoch_size = 100000;
  s.train.batch_size = 100;
  s.train.epochs = 100;
  s.train.delta = 1e-5;
  s.geo.crop = "450x450";
  s.geo.patch = "rect:10x10";
  switch (kind) {
    case SweepKind::kCrop:
      s.from = 50, s.to = 700, s.step = 2;
      break;
    case SweepKind::kPatch:
      s.from = 1, s.to = 120, s.step = 1;
      break;
    case SweepKind::kPadding:
      s.from = 0, s.to = 200, s.step = 10;
      break;
    case SweepKind::kResolution:
      s.from = 500, s.to = 2000, s.step = 50;
      break;
    case SweepKind::kNoise:
      s.from = 1, s.to = 10, s.step = 0.5;
      break;
  }
  return s;
}

// ---------------------------------------------------------------------------
// App construction.

void AddGeometry(CLI::App* app, GeometryFlags* g, SweepKind* swept = nullptr) {
  const bool sweeps_image = swept && *swept == SweepKind::kResolution;
  const bool sweeps_pad = swept && *swept == SweepKind::kPadding;
  const bool sweeps_crop = swept && *swept == SweepKind::kCrop;
  const bool sweeps_patch = swept && *swept == SweepKind::kPatch;
  if (!sweeps_image) {
    app->add_option("--image", g->image, "Image size WxH");
  }
  if (!sweeps_pad) {
    app->add_option("--pad", g->pad, "Symmetric padding X,Y per side");
  }
  if (!sweeps_crop) app->add_option("--crop", g->crop, "Crop size WxH");
  if (!sweeps_patch) {
    app->add_option("--patch", g->patch,
                    "Private region: rect:WxH, mask:FILE, disk:R or "
                    "disks:R,GAP");
  }
  CLI::Option* at = app->add_option(
      "--at", g->at, "Patch placement X,Y (bottom-left, unpadded)");
  CLI::Option* worst =
      app->add_flag("--worst-case", g->worst_case,
                    "Use the worst-case placement (the default)");
  at->excludes(worst);
}

void AddTraining(CLI::App* app, TrainingFlags* t, bool with_sigma) {
  if (with_sigma) {
    app->add_option("--sigma", t->sigma, "Noise multiplier");
  }
  app->add_option("--sensitivity", t->sensitivity,
                  "Gradient sensitivity in clipping-norm units");
  app->add_option("--clip-norm", t->clip_norm, "Clipping norm");
  app->add_option("--batch-size", t->batch_size, "Minibatch size");
  app->add_option("--epoch-size", t->epoch_size, "Training images per epoch");
  app->add_option("--epochs", t->epochs, "Number of epochs");
  app->add_option("--delta", t->delta, "Target delta; 0 means 1/epoch-size");
  app->add_option("--steps", t->steps,
                  "Composed steps; 0 derives them from the schedule");
  app->add_option("--grid-spacing", t->grid_spacing,
                  "Privacy loss grid spacing");
  app->add_option("--tail-mass", t->tail_mass,
                  "Probability mass truncated from each tail");
  app->add_option("--direction", t->direction, "Mixture direction")
      ->check(CLI::IsMember({"both", "forward", "reverse"}));
  app->add_option("--convolution", t->convolution, "Convolution method")
      ->check(CLI::IsMember({"auto", "direct", "fft"}));
  app->add_flag("--fixed-grid", t->fixed_grid,
                "Compose on grid-spacing throughout");
}

void AddCommon(CLI::App* app, std::string* stem, std::string* config) {
  app->add_option("--stem", *stem, "Base name of the output files");
  app->add_option("--config", *config,
                  "key=value file of options; flags override it");
}

struct CliApp {
  std::unique_ptr<CLI::App> app;
  CLI::App* gamma = nullptr;
  CLI::App* profile = nullptr;
  std::array<CLI::App*, kSweepKinds.size()> sweeps{};
  CLI::App* calibrate = nullptr;
};

CliApp BuildApp(Flags* flags) {
  CliApp cli;
  cli.app = std::make_unique<CLI::App>(
      "Patch-level privacy accounting for DP-SGD with random cropping",
      "patchdp");
  CLI::App* app = cli.app.get();
  app->option_defaults()->always_capture_default();
  app->set_version_flag("--version", PATCHDP_VERSION);
  app->require_subcommand(1);
  app->add_option("--out", flags->out_dir, "Output directory")
      ->envname(kOutputDirEnv);
  app->add_option("--threads", flags->threads,
                  "Worker threads; 0 uses every core");

  cli.gamma = app->add_subcommand(
      "gamma", "Crop inclusion probability of a private region");
  AddGeometry(cli.gamma, &flags->gamma.geo);
  cli.gamma->add_flag("--csv", flags->gamma.csv, "Also write a CSV file");
  cli.gamma->add_flag("--enumerate", flags->gamma.enumerate,
                      "Cross-check by enumerating every crop origin");
  AddCommon(cli.gamma, &flags->gamma.stem, &flags->gamma.config);

  ProfileFlags& p = flags->profile;
  cli.profile = app->add_subcommand(
      "profile", "delta(epsilon) of the patch, minibatch and data-noise "
                 "mechanisms");
  AddGeometry(cli.profile, &p.geo);
  AddTraining(cli.profile, &p.train, /*with_sigma=*/true);
  cli.profile->add_option("--sigma-data", p.sigma_data,
                          "Noise of the data-noise mechanism");
  cli.profile->add_flag("--data-noise-composed", p.data_noise_composed,
                        "Compose the data-noise mechanism over all steps");
  cli.profile->add_option("--eps-min", p.eps_min, "First epsilon");
  cli.profile->add_option("--eps-max", p.eps_max, "Last epsilon");
  cli.profile->add_option("--eps-count", p.eps_count,
                          "Number of epsilon grid points");
  cli.profile->add_flag("--svg", p.svg, "Also write an SVG chart");
  AddCommon(cli.profile, &p.stem, &p.config);

  CLI::App* sweep = app->add_subcommand("sweep", "Epsilon across a parameter");
  sweep->require_subcommand(1);
  for (size_t i = 0; i < kSweepKinds.size(); ++i) {
    SweepFlags& s = flags->sweeps[i];
    s = SweepDefaults(kSweepKinds[i]);
    CLI::App* sub = sweep->add_subcommand(SweepName(s.kind));
    switch (s.kind) {
      case SweepKind::kCrop:
        sub->description("Square crop side");
        break;
      case SweepKind::kPatch:
        sub->description("Square patch side");
        break;
      case SweepKind::kPadding:
        sub->description("Padding per side on both axes");
        break;
      case SweepKind::kResolution:
        sub->description("Square image side");
        break;
      case SweepKind::kNoise:
        sub->description("Noise multiplier");
        break;
    }
    AddGeometry(sub, &s.geo, &s.kind);
    AddTraining(sub, &s.train, /*with_sigma=*/false);
    sub->add_option("--from", s.from, "First sweep value");
    sub->add_option("--to", s.to, "Last sweep value (inclusive)");
    sub->add_option("--step", s.step, "Sweep increment");
    if (s.kind != SweepKind::kNoise) {
      sub->add_option("--sigmas", s.sigmas, "Noise multipliers")
          ->delimiter(',');
    }
    sub->add_flag("--svg", s.svg, "Also write an SVG chart");
    AddCommon(sub, &s.stem, &s.config);
    cli.sweeps[i] = sub;
  }

  CalibrateFlags& c = flags->calibrate;
  cli.calibrate = app->add_subcommand(
      "calibrate", "Smallest noise multiplier meeting each target epsilon");
  AddGeometry(cli.calibrate, &c.geo);
  AddTraining(cli.calibrate, &c.train, /*with_sigma=*/false);
  cli.calibrate->add_option("--targets", c.targets, "Target epsilons")
      ->delimiter(',');
  cli.calibrate->add_option("--tolerance", c.tolerance,
                            "Relative tolerance on sigma and epsilon");
  cli.calibrate->add_option("--sigma-start", c.sigma_start,
                            "Initial bracketing sigma");
  cli.calibrate->add_option("--sigma-min", c.sigma_min, "Smallest sigma tried");
  cli.calibrate->add_option("--sigma-max", c.sigma_max, "Largest sigma tried");
  AddCommon(cli.calibrate, &c.stem, &c.config);
  return cli;
}

CLI::App* Leaf(CLI::App* app) {
  while (true) {
    std::vector<CLI::App*> parsed = app->get_subcommands();
    if (parsed.empty()) return app;
    app = parsed.front();
  }
}

std::string CommandPath(CLI::App* leaf) {
  std::vector<std::string> names;
  for (CLI::App* a = leaf; a != nullptr && a->get_parent() != nullptr;
       a = a->get_parent()) {
    names.insert(names.begin(), a->get_name());
  }
  return absl::StrJoin(names, " ");
}

// ---------------------------------------------------------------------------
// Config files.

std::string StripValue(absl::string_view value) {
  value = absl::StripAsciiWhitespace(value);
  if (value.size() >= 2 && (value.front() == '"' || value.front() == '\'') &&
      value.back() == value.front()) {
    value = value.substr(1, value.size() - 2);
  }
  if (value.size() >= 2 && value.front() == '[' && value.back() == ']') {
    value = value.substr(1, value.size() - 2);
  }
  return std::string(absl::StripAsciiWhitespace(value));
}

// Reads "key = value" lines. Blank lines, comments (# or ;) and section
// headers are skipped; later keys replace earlier ones.
absl::StatusOr<std::map<std::string, std::string>> ReadConfig(
    const std::string& path) {
  std::ifstream in(path);
  if (!in) return absl::NotFoundError(absl::StrCat("cannot read config ", path));
  std::map<std::string, std::string> entries;
  std::string line;
  int number = 0;
  while (std::getline(in, line)) {
    ++number;
    absl::string_view text = absl::StripAsciiWhitespace(line);
    if (text.empty() || text.front() == '#' || text.front() == ';' ||
        text.front() == '[') {
      continue;
    }
    const size_t eq = text.find('=');
    if (eq == absl::string_view::npos) {
      return absl::InvalidArgumentError(
          absl::StrFormat("%s:%d: expected key=value", path, number));
    }
    absl::string_view key_text = absl::StripAsciiWhitespace(text.substr(0, eq));
    absl::ConsumePrefix(&key_text, "--");
    const std::string key(key_text);
    if (key.empty()) {
      return absl::InvalidArgumentError(
          absl::StrFormat("%s:%d: empty key", path, number));
    }
    entries[key] = StripValue(text.substr(eq + 1));
  }
  return entries;
}

// Resolved options of a leaf command in the config file format.
std::string DumpConfig(const CLI::App& leaf) {
  std::string text;
  for (const CLI::Option* opt : leaf.get_options()) {
    if (opt->get_lnames().empty()) continue;
    const std::string& name = opt->get_lnames().front();
    if (name == "help" || name == "config" || name == "stem") continue;
    std::string value = opt->count() > 0 ? absl::StrJoin(opt->results(), ",")
                                         : StripValue(opt->get_default_str());
    if (value.empty()) continue;
    absl::StrAppend(&text, name, "=", value, "\n");
  }
  return text;
}

// ---------------------------------------------------------------------------
// Builders from flags.

absl::StatusOr<CropConfig> BuildCrop(const GeometryFlags& g) {
  absl::StatusOr<std::pair<int64_t, int64_t>> image = ParseSize(g.image);
  if (!image.ok()) return image.status();
  absl::StatusOr<std::pair<int64_t, int64_t>> pad = ParsePair(g.pad);
  if (!pad.ok()) return pad.status();
  absl::StatusOr<std::pair<int64_t, int64_t>> crop = ParseSize(g.crop);
  if (!crop.ok()) return crop.status();
  CropConfig config;
  config.image_width = image->first;
  config.image_height = image->second;
  config.pad_x = pad->first;
  config.pad_y = pad->second;
  config.crop_width = crop->first;
  config.crop_height = crop->second;
  if (absl::Status s = config.Validate(); !s.ok()) return s;
  return config;
}

absl::StatusOr<PatchSpec> BuildPatch(const GeometryFlags& g) {
  absl::StatusOr<PatchShape> shape = ParsePatchShape(g.patch);
  if (!shape.ok()) return shape.status();
  PatchSpec patch{*std::move(shape), std::nullopt};
  if (const Mask* mask = std::get_if<Mask>(&patch.shape);
      mask != nullptr && mask->count() == 0) {
    return absl::InvalidArgumentError("patch mask has no set pixels");
  }
  if (!g.at.empty()) {
    absl::StatusOr<std::pair<int64_t, int64_t>> at = ParsePair(g.at);
    if (!at.ok()) return at.status();
    patch.placement = Placement{at->first, at->second};
  }
  return patch;
}

SamplingConfig BuildSampling(const TrainingFlags& t) {
  SamplingConfig s;
  s.batch_size = t.batch_size;
  s.epoch_size = t.epoch_size;
  s.epochs = t.epochs;
  return s;
}

absl::StatusOr<AccountingConfig> BuildAccounting(const TrainingFlags& t) {
  AccountingConfig acct;
  if (t.steps < 0) {
    return absl::InvalidArgumentError(
        absl::StrFormat("steps must be non-negative, got %d", t.steps));
  }
  if (t.steps > 0) acct.steps = t.steps;
  acct.grid_spacing = t.grid_spacing;
  acct.tail_mass_truncation = t.tail_mass;
  acct.direction = t.direction == "forward"   ? DirectionMode::kForward
                   : t.direction == "reverse" ? DirectionMode::kReverse
                                              : DirectionMode::kBoth;
  acct.convolution = t.convolution == "direct" ? ConvolutionMethod::kDirect
                     : t.convolution == "fft"  ? ConvolutionMethod::kFft
                                               : ConvolutionMethod::kAuto;
  acct.adaptive_grid = !t.fixed_grid;
  if (absl::Status s = acct.Validate(); !s.ok()) return s;
  return acct;
}

absl::StatusOr<double> ResolveDelta(const TrainingFlags& t) {
  if (t.delta != 0.0) {
    if (!(t.delta > 0.0 && t.delta < 1.0)) {
      return absl::InvalidArgumentError(
          absl::StrFormat("delta must lie in (0, 1), got %g", t.delta));
    }
    return t.delta;
  }
  if (t.epoch_size <= 0) {
    return absl::InvalidArgumentError("epoch size must be positive");
  }
  return 1.0 / static_cast<double>(t.epoch_size);
}

MechanismSpec Spec(MechanismVariant variant, const TrainingFlags& t,
                   double sigma) {
  MechanismSpec spec;
  spec.variant = std::move(variant);
  spec.sigma = sigma;
  spec.sensitivity = t.sensitivity;
  spec.clipping_norm = t.clip_norm;
  spec.sampling = BuildSampling(t);
  return spec;
}

// ---------------------------------------------------------------------------
// Execution helpers.

std::string Real(double value) {
  if (std::isinf(value)) return value > 0 ? "inf" : "-inf";
  return absl::StrFormat("%.17g", value);
}

int ExitCodeFor(const absl::Status& status) {
  switch (status.code()) {
    case absl::StatusCode::kOk:
      return kExitOk;
    case absl::StatusCode::kOutOfRange:
      return kExitOutOfRange;
    case absl::StatusCode::kInvalidArgument:
    case absl::StatusCode::kFailedPrecondition:
    case absl::StatusCode::kNotFound:
    case absl::StatusCode::kResourceExhausted:
      return kExitUsage;
    default:
      return kExitInternal;
  }
}

template <typename Fn>
void ParallelFor(int64_t n, int threads, const Fn& fn) {
  const int64_t workers = std::clamp<int64_t>(threads, 1, std::max<int64_t>(n, 1));
  if (workers <= 1) {
    for (int64_t i = 0; i < n; ++i) fn(i);
    return;
  }
  std::atomic<int64_t> next{0};
  std::vector<std::thread> pool;
  pool.reserve(static_cast<size_t>(workers));
  for (int64_t w = 0; w < workers; ++w) {
    pool.emplace_back([&] {
      for (int64_t i = next++; i < n; i = next++) fn(i);
    });
  }
  for (std::thread& t : pool) t.join();
}

// Collects output files of one run and writes the manifest last.
class RunOutputs {
 public:
  RunOutputs(std::string dir, std::string stem, const CLI::App& leaf,
             std::vector<std::string> argv)
      : dir_(std::move(dir)), stem_(std::move(stem)), start_(Clock::now()) {
    manifest_.command = CommandPath(const_cast<CLI::App*>(&leaf));
    manifest_.argv = std::move(argv);
    manifest_.resolved_config = DumpConfig(leaf);
  }

  void Derive(std::string key, std::string value) {
    manifest_.derived.emplace_back(std::move(key), std::move(value));
  }

  absl::StatusOr<std::string> Write(absl::string_view extension,
                                    const std::string& contents) {
    const std::string path = Path(extension);
    if (absl::Status s = WriteTextFile(path, contents); !s.ok()) return s;
    manifest_.outputs.push_back(path);
    return path;
  }

  absl::Status Finish() {
    absl::StatusOr<std::string> cfg = Write("cfg", manifest_.resolved_config);
    if (!cfg.ok()) return cfg.status();
    manifest_.wall_seconds =
        std::chrono::duration<double>(Clock::now() - start_).count();
    return WriteTextFile(Path("manifest.json"), ManifestJson(manifest_));
  }

 private:
  std::string Path(absl::string_view extension) const {
    return absl::StrCat(dir_, "/", stem_, ".", extension);
  }

  std::string dir_;
  std::string stem_;
  Clock::time_point start_;
  RunManifest manifest_;
};

struct Context {
  const Flags& flags;
  CLI::App* leaf;
  std::vector<std::string> argv;
  std::ostream& out;
  int threads;
};

// ---------------------------------------------------------------------------
// Commands.

absl::Status RunGamma(const Context& ctx) {
  const GammaFlags& f = ctx.flags.gamma;
  absl::StatusOr<CropConfig> crop = BuildCrop(f.geo);
  if (!crop.ok()) return crop.status();
  absl::StatusOr<PatchSpec> patch = BuildPatch(f.geo);
  if (!patch.ok()) return patch.status();
  absl::StatusOr<WorstCaseInclusion> inclusion =
      ResolveInclusion(*crop, *patch);
  if (!inclusion.ok()) return inclusion.status();
  const InclusionProbability& p = inclusion->probability;

  ctx.out << "favorable: " << p.favorable << "\n"
          << "total: " << p.total << "\n"
          << "gamma_crop: " << p.favorable << "/" << p.total << " = "
          << Real(p.value()) << "\n"
          << "placement: " << inclusion->placement.x << ","
          << inclusion->placement.y
          << (patch->placement.has_value() ? "" : " (worst case)") << "\n";
  if (f.enumerate) {
    PatchSpec placed = *patch;
    placed.placement = inclusion->placement;
    absl::StatusOr<InclusionProbability> counted =
        EnumerateInclusion(*crop, placed);
    if (!counted.ok()) return counted.status();
    ctx.out << "enumerated: " << counted->favorable << "/" << counted->total
            << (*counted == p ? " (match)" : " (MISMATCH)") << "\n";
    if (!(*counted == p)) {
      return absl::InternalError("enumeration disagrees with the closed form");
    }
  }
  if (!f.csv) return absl::OkStatus();

  RunOutputs outputs(ctx.flags.out_dir, f.stem, *ctx.leaf, ctx.argv);
  const std::string csv = absl::StrCat(
      "favorable,total,gamma_crop,placement_x,placement_y\n", p.favorable, ",",
      p.total, ",", Real(p.value()), ",", inclusion->placement.x, ",",
      inclusion->placement.y, "\n");
  absl::StatusOr<std::string> path = outputs.Write("csv", csv);
  if (!path.ok()) return path.status();
  ctx.out << "wrote " << *path << "\n";
  return outputs.Finish();
}

// delta(eps) evaluator of one mechanism: the exact closed form for a single
// step, the composed PLD otherwise.
struct ProfileColumn {
  std::optional<PrivacyCurve> single;
  std::optional<ComposedProfile> composed;
  int64_t steps = 1;

  double At(double eps) const {
    return single ? single->Delta(eps) : composed->DeltaAt(eps);
  }
};

absl::Status RunProfile(const Context& ctx) {
  const ProfileFlags& f = ctx.flags.profile;
  absl::StatusOr<CropConfig> crop = BuildCrop(f.geo);
  if (!crop.ok()) return crop.status();
  absl::StatusOr<PatchSpec> patch = BuildPatch(f.geo);
  if (!patch.ok()) return patch.status();
  absl::StatusOr<AccountingConfig> acct = BuildAccounting(f.train);
  if (!acct.ok()) return acct.status();
  if (f.eps_count < 1) {
    return absl::InvalidArgumentError("eps-count must be at least 1");
  }
  if (!(f.eps_max >= f.eps_min)) {
    return absl::InvalidArgumentError("eps-max must not be below eps-min");
  }

  DataNoise data_noise;
  data_noise.pixel_count = patch->pixel_count();
  data_noise.sigma_data = f.sigma_data;
  data_noise.composed = f.data_noise_composed;
  const std::array<MechanismSpec, 3> specs = {
      Spec(PatchLevel{*crop, *patch}, f.train, f.train.sigma),
      Spec(MinibatchOnly{}, f.train, f.train.sigma),
      Spec(data_noise, f.train, f.train.sigma)};
  for (const MechanismSpec& spec : specs) {
    if (absl::Status s = spec.Validate(); !s.ok()) return s;
    if (StepsFor(spec, *acct) > 1 && f.eps_min < 0.0) {
      return absl::InvalidArgumentError(
          "composed profiles are reported for eps >= 0 only; set eps-min >= 0 "
          "or steps=1");
    }
  }
  absl::StatusOr<MechanismSummary> summary = Summarize(specs[0]);
  if (!summary.ok()) return summary.status();

  std::array<ProfileColumn, 3> columns;
  std::array<absl::Status, 3> errors;
  ParallelFor(3, ctx.threads, [&](int64_t i) {
    ProfileColumn& column = columns[i];
    column.steps = StepsFor(specs[i], *acct);
    if (column.steps == 1) {
      absl::StatusOr<PrivacyCurve> curve = PrivacyCurveFor(specs[i]);
      if (curve.ok()) column.single = *std::move(curve);
      errors[i] = curve.status();
    } else {
      absl::StatusOr<ComposedProfile> profile =
          ComposedProfileFor(specs[i], *acct);
      if (profile.ok()) column.composed = *std::move(profile);
      errors[i] = profile.status();
    }
  });
  for (const absl::Status& s : errors) {
    if (!s.ok()) return s;
  }

  std::string csv = "epsilon,delta_patch,delta_minibatch,delta_datanoise\n";
  std::array<Series, 3> series = {Series{"patch", {}, {}}, Series{"minibatch", {}, {}},
                                  Series{"data noise", {}, {}}};
  for (int64_t i = 0; i < f.eps_count; ++i) {
    const double eps =
        f.eps_count == 1
            ? f.eps_min
            : f.eps_min + (f.eps_max - f.eps_min) * static_cast<double>(i) /
                              static_cast<double>(f.eps_count - 1);
    absl::StrAppend(&csv, Real(eps));
    for (size_t k = 0; k < columns.size(); ++k) {
      const double delta = columns[k].At(eps);
      absl::StrAppend(&csv, ",", Real(delta));
      series[k].x.push_back(eps);
      series[k].y.push_back(delta);
    }
    csv += "\n";
  }

  RunOutputs outputs(ctx.flags.out_dir, f.stem, *ctx.leaf, ctx.argv);
  const InclusionProbability& p = summary->inclusion->probability;
  outputs.Derive("gamma_crop", absl::StrCat(p.favorable, "/", p.total));
  outputs.Derive("placement", absl::StrCat(summary->inclusion->placement.x, ",",
                                           summary->inclusion->placement.y));
  outputs.Derive("gamma_wo", Real(summary->gamma_wo));
  outputs.Derive("gamma_eff", Real(summary->gamma_eff));
  outputs.Derive("steps_patch", absl::StrCat(columns[0].steps));
  outputs.Derive("steps_datanoise", absl::StrCat(columns[2].steps));
  outputs.Derive("datanoise_sensitivity",
                 Real(DataNoiseSensitivity(data_noise.pixel_count)));
  absl::StatusOr<std::string> path = outputs.Write("csv", csv);
  if (!path.ok()) return path.status();
  ctx.out << "gamma_crop: " << p.favorable << "/" << p.total << "\n"
          << "gamma_eff: " << Real(summary->gamma_eff) << "\n"
          << "steps: " << columns[0].steps << "\n"
          << "wrote " << *path << "\n";
  if (f.svg) {
    ChartOptions chart{"Privacy profile", "epsilon", "delta", true};
    absl::StatusOr<std::string> svg = outputs.Write(
        "svg", RenderLineChart({series.begin(), series.end()}, chart));
    if (!svg.ok()) return svg.status();
    ctx.out << "wrote " << *svg << "\n";
  }
  return outputs.Finish();
}

struct SweepPoint {
  double x = 0.0;
  CropConfig crop;
  PatchSpec patch;
  InclusionProbability inclusion;
  double gamma_eff = 0.0;
};

absl::StatusOr<std::vector<double>> SweepValues(const SweepFlags& f) {
  if (!(f.step > 0.0) || !std::isfinite(f.step)) {
    return absl::InvalidArgumentError("sweep step must be positive");
  }
  if (!(f.to >= f.from)) {
    return absl::InvalidArgumentError("sweep end must not precede its start");
  }
  const bool integral = f.kind != SweepKind::kNoise;
  if (integral && (f.from != std::floor(f.from) || f.step != std::floor(f.step))) {
    return absl::InvalidArgumentError(absl::StrFormat(
        "%s sweep needs integer start and step", SweepName(f.kind)));
  }
  const auto count =
      static_cast<int64_t>(std::floor((f.to - f.from) / f.step + 1e-9)) + 1;
  if (count > 100000) {
    return absl::InvalidArgumentError(
        absl::StrFormat("sweep has %d points, more than 100000", count));
  }
  std::vector<double> values;
  values.reserve(static_cast<size_t>(count));
  for (int64_t i = 0; i < count; ++i) {
    values.push_back(f.from + f.step * static_cast<double>(i));
  }
  return values;
}

absl::StatusOr<SweepPoint> ResolvePoint(const SweepFlags& f, double x) {
  GeometryFlags geo = f.geo;
  const auto side = static_cast<int64_t>(x);
  switch (f.kind) {
    case SweepKind::kCrop:
      geo.crop = absl::StrCat(side, "x", side);
      break;
    case SweepKind::kPatch:
      geo.patch = absl::StrCat("rect:", side, "x", side);
      break;
    case SweepKind::kPadding:
      geo.pad = absl::StrCat(side, ",", side);
      break;
    case SweepKind::kResolution:
      geo.image = absl::StrCat(side, "x", side);
      break;
    case SweepKind::kNoise:
      break;
  }
  SweepPoint point;
  point.x = x;
  absl::StatusOr<CropConfig> crop = BuildCrop(geo);
  if (!crop.ok()) return crop.status();
  absl::StatusOr<PatchSpec> patch = BuildPatch(geo);
  if (!patch.ok()) return patch.status();
  point.crop = *crop;
  point.patch = *std::move(patch);
  absl::StatusOr<WorstCaseInclusion> inclusion =
      ResolveInclusion(point.crop, point.patch);
  if (!inclusion.ok()) return inclusion.status();
  point.inclusion = inclusion->probability;
  point.gamma_eff = BuildSampling(f.train).gamma_wo() * point.inclusion.value();
  return point;
}

absl::Status RunSweep(const Context& ctx, const SweepFlags& f) {
  absl::StatusOr<AccountingConfig> acct = BuildAccounting(f.train);
  if (!acct.ok()) return acct.status();
  absl::StatusOr<double> delta = ResolveDelta(f.train);
  if (!delta.ok()) return delta.status();
  absl::StatusOr<std::vector<double>> values = SweepValues(f);
  if (!values.ok()) return values.status();
  const bool noise = f.kind == SweepKind::kNoise;
  if (!noise && f.sigmas.empty()) {
    return absl::InvalidArgumentError("sigma list is empty");
  }

  std::vector<SweepPoint> points;
  for (double x : *values) {
    absl::StatusOr<SweepPoint> point = ResolvePoint(f, x);
    if (!point.ok()) {
      return absl::Status(point.status().code(),
                          absl::StrCat(SweepName(f.kind), " = ", Real(x), ": ",
                                       point.status().message()));
    }
    points.push_back(*std::move(point));
  }

  // Jobs: patch-level epsilon per (point, sigma), then the minibatch
  // reference per sigma (per point for the noise sweep).
  const std::vector<double> sigmas = noise ? std::vector<double>{0.0} : f.sigmas;
  const size_t n_points = points.size();
  const size_t n_sigmas = sigmas.size();
  const size_t n_patch = n_points * n_sigmas;
  const size_t n_minibatch = noise ? n_points : n_sigmas;
  std::vector<absl::StatusOr<double>> results(n_patch + n_minibatch,
                                              absl::UnknownError("not run"));
  ParallelFor(static_cast<int64_t>(results.size()), ctx.threads, [&](int64_t job) {
    const auto j = static_cast<size_t>(job);
    if (j < n_patch) {
      const SweepPoint& point = points[j / n_sigmas];
      const double sigma = noise ? point.x : sigmas[j % n_sigmas];
      results[j] = Account(Spec(PatchLevel{point.crop, point.patch}, f.train,
                                sigma),
                           *acct, *delta);
    } else {
      const size_t k = j - n_patch;
      const double sigma = noise ? points[k].x : sigmas[k];
      results[j] = Account(Spec(MinibatchOnly{}, f.train, sigma), *acct, *delta);
    }
  });
  for (const absl::StatusOr<double>& r : results) {
    if (!r.ok()) return r.status();
  }
  auto patch_eps = [&](size_t p, size_t s) { return *results[p * n_sigmas + s]; };
  auto minibatch_eps = [&](size_t p, size_t s) {
    return *results[n_patch + (noise ? p : s)];
  };

  std::string csv = "x,favorable,total,gamma_crop,gamma_eff";
  auto label = [&](size_t s) {
    return noise ? std::string() : absl::StrFormat("_sigma_%g", sigmas[s]);
  };
  for (size_t s = 0; s < n_sigmas; ++s) {
    absl::StrAppend(&csv, ",epsilon_patch", label(s));
  }
  for (size_t s = 0; s < n_sigmas; ++s) {
    absl::StrAppend(&csv, ",epsilon_minibatch", label(s));
  }
  csv += "\n";
  std::vector<Series> series;
  for (size_t s = 0; s < n_sigmas; ++s) {
    series.push_back(Series{absl::StrCat("patch", label(s)), {}, {}});
    series.push_back(Series{absl::StrCat("minibatch", label(s)), {}, {}});
  }
  for (size_t p = 0; p < n_points; ++p) {
    const SweepPoint& point = points[p];
    absl::StrAppend(&csv,
                    noise ? Real(point.x)
                          : absl::StrCat(static_cast<int64_t>(point.x)),
                    ",", point.inclusion.favorable, ",", point.inclusion.total,
                    ",", Real(point.inclusion.value()), ",",
                    Real(point.gamma_eff));
    for (size_t s = 0; s < n_sigmas; ++s) {
      absl::StrAppend(&csv, ",", Real(patch_eps(p, s)));
    }
    for (size_t s = 0; s < n_sigmas; ++s) {
      absl::StrAppend(&csv, ",", Real(minibatch_eps(p, s)));
    }
    csv += "\n";
    for (size_t s = 0; s < n_sigmas; ++s) {
      series[2 * s].x.push_back(point.x);
      series[2 * s].y.push_back(patch_eps(p, s));
      series[2 * s + 1].x.push_back(point.x);
      series[2 * s + 1].y.push_back(minibatch_eps(p, s));
    }
  }

  RunOutputs outputs(ctx.flags.out_dir, f.stem, *ctx.leaf, ctx.argv);
  outputs.Derive("delta", Real(*delta));
  outputs.Derive("gamma_wo", Real(BuildSampling(f.train).gamma_wo()));
  outputs.Derive("steps",
                 absl::StrCat(acct->steps.value_or(BuildSampling(f.train).steps())));
  outputs.Derive("points", absl::StrCat(n_points));
  absl::StatusOr<std::string> path = outputs.Write("csv", csv);
  if (!path.ok()) return path.status();
  ctx.out << "wrote " << *path << " (" << n_points << " points)\n";
  if (f.svg) {
    ChartOptions chart{absl::StrCat("Epsilon vs ", SweepName(f.kind)),
                       SweepName(f.kind), "epsilon", false};
    absl::StatusOr<std::string> svg =
        outputs.Write("svg", RenderLineChart(series, chart));
    if (!svg.ok()) return svg.status();
    ctx.out << "wrote " << *svg << "\n";
  }
  return outputs.Finish();
}

absl::Status RunCalibrate(const Context& ctx) {
  const CalibrateFlags& f = ctx.flags.calibrate;
  absl::StatusOr<CropConfig> crop = BuildCrop(f.geo);
  if (!crop.ok()) return crop.status();
  absl::StatusOr<PatchSpec> patch = BuildPatch(f.geo);
  if (!patch.ok()) return patch.status();
  absl::StatusOr<AccountingConfig> acct = BuildAccounting(f.train);
  if (!acct.ok()) return acct.status();
  absl::StatusOr<double> delta = ResolveDelta(f.train);
  if (!delta.ok()) return delta.status();
  if (f.targets.empty()) {
    return absl::InvalidArgumentError("target list is empty");
  }
  CalibrationOptions options;
  options.tolerance = f.tolerance;
  options.sigma_start = f.sigma_start;
  options.sigma_min = f.sigma_min;
  options.sigma_max = f.sigma_max;

  const std::array<MechanismSpec, 2> specs = {
      Spec(PatchLevel{*crop, *patch}, f.train, 1.0),
      Spec(MinibatchOnly{}, f.train, 1.0)};
  absl::StatusOr<MechanismSummary> summary = Summarize(specs[0]);
  if (!summary.ok()) return summary.status();

  const size_t n = f.targets.size();
  std::vector<absl::StatusOr<CalibrationResult>> results(
      2 * n, absl::UnknownError("not run"));
  ParallelFor(static_cast<int64_t>(2 * n), ctx.threads, [&](int64_t job) {
    const auto j = static_cast<size_t>(job);
    results[j] = CalibrateSigma(specs[j % 2], *acct, f.targets[j / 2], *delta,
                                options);
  });
  for (size_t j = 0; j < results.size(); ++j) {
    if (!results[j].ok()) {
      return absl::Status(
          results[j].status().code(),
          absl::StrFormat("%s target %g: %s",
                          j % 2 == 0 ? "patch" : "minibatch", f.targets[j / 2],
                          results[j].status().message()));
    }
  }

  std::string csv =
      "target_epsilon,sigma_patch,epsilon_patch,sigma_minibatch,"
      "epsilon_minibatch\n";
  ctx.out << absl::StrFormat("%10s %12s %12s %12s %12s\n", "target",
                             "sigma_patch", "eps_patch", "sigma_mb", "eps_mb");
  for (size_t t = 0; t < n; ++t) {
    const CalibrationResult& a = *results[2 * t];
    const CalibrationResult& b = *results[2 * t + 1];
    absl::StrAppend(&csv, Real(f.targets[t]), ",", Real(a.sigma), ",",
                    Real(a.epsilon), ",", Real(b.sigma), ",", Real(b.epsilon),
                    "\n");
    ctx.out << absl::StrFormat("%10g %12.6f %12.6f %12.6f %12.6f\n",
                               f.targets[t], a.sigma, a.epsilon, b.sigma,
                               b.epsilon);
  }

  RunOutputs outputs(ctx.flags.out_dir, f.stem, *ctx.leaf, ctx.argv);
  const InclusionProbability& p = summary->inclusion->probability;
  outputs.Derive("gamma_crop", absl::StrCat(p.favorable, "/", p.total));
  outputs.Derive("gamma_eff", Real(summary->gamma_eff));
  outputs.Derive("delta", Real(*delta));
  outputs.Derive("steps", absl::StrCat(StepsFor(specs[0], *acct)));
  absl::StatusOr<std::string> path = outputs.Write("csv", csv);
  if (!path.ok()) return path.status();
  ctx.out << "wrote " << *path << "\n";
  return outputs.Finish();
}

// Parses argv into a fresh app. Returns an exit code when parsing ends the run.
std::optional<int> Parse(CliApp& cli, const std::vector<std::string>& args,
                         std::ostream& out, std::ostream& err) {
  std::vector<std::string> storage = {"patchdp"};
  storage.insert(storage.end(), args.begin(), args.end());
  std::vector<char*> argv;
  for (std::string& s : storage) argv.push_back(s.data());
  try {
    cli.app->parse(static_cast<int>(argv.size()), argv.data());
  } catch (const CLI::ParseError& e) {
    const int code = cli.app->exit(e, out, err);
    return code == 0 ? kExitOk : kExitUsage;
  }
  return std::nullopt;
}

}  // namespace

int RunCli(const std::vector<std::string>& args, std::ostream& out,
           std::ostream& err) {
  // First pass: find the command and its config file.
  std::vector<std::string> full_args = args;
  {
    Flags probe;
    CliApp cli = BuildApp(&probe);
    if (std::optional<int> code = Parse(cli, args, out, err)) return *code;
    CLI::App* leaf = Leaf(cli.app.get());
    const CLI::Option* config = leaf->get_option_no_throw("--config");
    if (config != nullptr && config->count() > 0) {
      const std::string path = config->as<std::string>();
      absl::StatusOr<std::map<std::string, std::string>> entries =
          ReadConfig(path);
      if (!entries.ok()) {
        err << "error: " << entries.status().message() << "\n";
        return kExitUsage;
      }
      for (const auto& [key, value] : *entries) {
        const CLI::Option* opt = leaf->get_option_no_throw("--" + key);
        if (opt == nullptr || key == "config") {
          err << "error: " << path << ": unknown option '" << key << "' for "
              << CommandPath(leaf) << "\n";
          return kExitUsage;
        }
        // Flags on the command line win.
        if (opt->count() == 0) full_args.push_back("--" + key + "=" + value);
      }
    }
  }

  Flags flags;
  CliApp cli = BuildApp(&flags);
  if (std::optional<int> code = Parse(cli, full_args, out, err)) return *code;
  CLI::App* leaf = Leaf(cli.app.get());
  const int threads =
      flags.threads > 0
          ? flags.threads
          : static_cast<int>(std::max(1u, std::thread::hardware_concurrency()));
  std::vector<std::string> argv = {"patchdp"};
  argv.insert(argv.end(), args.begin(), args.end());
  const Context ctx{flags, leaf, argv, out, threads};

  absl::Status status;
  if (leaf == cli.gamma) {
    status = RunGamma(ctx);
  } else if (leaf == cli.profile) {
    status = RunProfile(ctx);
  } else if (leaf == cli.calibrate) {
    status = RunCalibrate(ctx);
  } else {
    status = absl::InvalidArgumentError("unknown command");
    for (size_t i = 0; i < cli.sweeps.size(); ++i) {
      if (leaf == cli.sweeps[i]) status = RunSweep(ctx, flags.sweeps[i]);
    }
  }
  if (!status.ok()) {
    err << "error: " << status.message() << "\n";
    return ExitCodeFor(status);
  }
  return kExitOk;
}

}  // namespace patchdp::cli
