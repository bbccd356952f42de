#include "gridfill/cli.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <chrono>
#include <cstdio>
#include <filesystem>
#include <memory>
#include <sstream>

#include "gridfill/dataset.hpp"
#include "gridfill/error.hpp"
#include "gridfill/evaluation.hpp"
#include "gridfill/gradcheck.hpp"
#include "gridfill/io.hpp"
#include "gridfill/kvconfig.hpp"
#include "gridfill/masks.hpp"
#include "gridfill/models.hpp"
#include "gridfill/rng.hpp"
#include "gridfill/synth.hpp"
#include "gridfill/training.hpp"

#ifndef GRIDFILL_VERSION
#define GRIDFILL_VERSION "dev"
#endif

namespace fs = std::filesystem;
using json = nlohmann::ordered_json;

namespace gridfill {

namespace {

// Options shared by every subcommand.
struct Common {
  std::uint64_t seed = 0;
  std::string config;
  std::string out;
};

struct SynthArgs {
  std::size_t sites = 10;
  std::size_t meters_per_site = 20;
  double noise_sigma = 0.02;
  std::size_t hours = kYearHours;
};

struct PrepareArgs {
  std::string input;
  bool force = false;
  double missing_threshold = 0.05;
};

struct TrainArgs {
  std::string model;
  std::size_t fold = 0;
  std::string store;
  long max_epochs = -1;
  bool no_augment = false;
  bool quiet = false;
};

struct ImputeArgs {
  std::string checkpoint;
  std::string model;
  std::string store;
  std::string meter_id;
  std::string mask_kind = "none";
  double rate = 0.1;
  std::string mask_file;
  bool denormalize = false;
};

struct EvaluateArgs {
  std::string store;
  std::string checkpoints;
  std::string models = "persistence,ae2d,pconv";
  std::string folds = "0,1,2,3,4";
  std::string kinds = "random_days,continuous";
  std::string rates = "0.05,0.10,0.20,0.30,0.40,0.50";
  bool denormalized = false;
  std::size_t examples = 2;
};

struct GradcheckArgs {
  std::size_t points = 100;
  double tolerance = 1e-4;
  bool corrupt = false;
};

struct Cli {
  CLI::App app{"Gap filling for hourly building-energy meter data", "gridfill"};
  Common common;
  bool seed_given = false;
  SynthArgs synth;
  PrepareArgs prepare;
  TrainArgs train;
  ImputeArgs impute;
  EvaluateArgs evaluate;
  GradcheckArgs gradcheck;
  std::vector<std::string> raw_args;

  Cli();
  CLI::App* add(const std::string& name, const std::string& about, bool out_required);
};

CLI::App* Cli::add(const std::string& name, const std::string& about, bool out_required) {
  auto* sub = app.add_subcommand(name, about);
  sub->add_option("--seed", common.seed, "Base random seed")->capture_default_str();
  sub->add_option("--config", common.config, "Key-value config file")->check(CLI::ExistingFile);
  auto* out = sub->add_option("--out", common.out, "Output directory");
  if (out_required) out->required();
  return sub;
}

Cli::Cli() {
  app.require_subcommand(1);
  app.set_version_flag("--version", GRIDFILL_VERSION);

  auto* s = add("synth", "Generate a synthetic meter fleet as CSV", true);
  s->add_option("--sites", synth.sites, "Number of sites")->capture_default_str();
  s->add_option("--meters-per-site", synth.meters_per_site, "Meters per site")->capture_default_str();
  s->add_option("--noise-sigma", synth.noise_sigma, "Multiplicative noise level")->capture_default_str();
  s->add_option("--hours", synth.hours, "Series length in hours")->capture_default_str();

  auto* p = add("prepare", "Clean, filter and grid a meter CSV into an image store", true);
  p->add_option("--input", prepare.input, "Long-format meter CSV (optionally .gz)")
      ->required()
      ->check(CLI::ExistingFile);
  p->add_flag("--force", prepare.force, "Overwrite an existing store");
  p->add_option("--missing-threshold", prepare.missing_threshold,
                "Exclude meters with at least this invalid fraction")
      ->capture_default_str();

  auto* t = add("train", "Train a network on one cross-validation fold", true);
  t->add_option("--model", train.model, "ae1d, ae2d or pconv")->required();
  t->add_option("--fold", train.fold, "Fold round 0-4")->capture_default_str();
  t->add_option("--store", train.store, "Image store from prepare")->required();
  t->add_option("--max-epochs", train.max_epochs, "Override the epoch cap");
  t->add_flag("--no-augment", train.no_augment, "Train on the original images only");
  t->add_flag("--quiet", train.quiet, "Do not print per-epoch progress");

  auto* i = add("impute", "Fill one meter's gaps and write the series as CSV", true);
  i->add_option("--checkpoint", impute.checkpoint, "Trained model file");
  i->add_option("--model", impute.model, "Use 'persistence' instead of a checkpoint");
  i->add_option("--store", impute.store, "Image store from prepare")->required();
  i->add_option("--meter-id", impute.meter_id, "Meter to impute")->required();
  i->add_option("--mask-kind", impute.mask_kind,
                "Synthetic holes: none, random_days, continuous or irregular")
      ->capture_default_str();
  i->add_option("--rate", impute.rate, "Missing rate for day-based masks")->capture_default_str();
  i->add_option("--mask-file", impute.mask_file, "Mask file to apply instead of generating one")
      ->check(CLI::ExistingFile);
  i->add_flag("--denormalize", impute.denormalize, "Write values in the original units");

  auto* e = add("evaluate", "Score imputers over the mask/rate/fold matrix", true);
  e->add_option("--store", evaluate.store, "Image store from prepare")->required();
  e->add_option("--checkpoints", evaluate.checkpoints,
                "Directory holding <model>_fold<k>.gfm files");
  e->add_option("--models", evaluate.models, "Comma-separated model ids")->capture_default_str();
  e->add_option("--folds", evaluate.folds, "Comma-separated fold rounds")->capture_default_str();
  e->add_option("--kinds", evaluate.kinds, "Comma-separated mask kinds")->capture_default_str();
  e->add_option("--rates", evaluate.rates, "Comma-separated missing rates")->capture_default_str();
  e->add_flag("--denormalized", evaluate.denormalized, "Score in original units");
  e->add_option("--examples", evaluate.examples, "Example traces per mask kind for plot data")
      ->capture_default_str();

  auto* g = add("gradcheck", "Finite-difference check of every layer gradient", false);
  g->add_option("--points", gradcheck.points, "Random points per layer")->capture_default_str();
  g->add_option("--tolerance", gradcheck.tolerance, "Maximum relative error")->capture_default_str();
  g->add_flag("--corrupt", gradcheck.corrupt, "Deliberately corrupt gradients (debugging)");
}

std::vector<std::string> split_list(const std::string& text) {
  std::vector<std::string> items;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    const auto b = item.find_first_not_of(" \t");
    if (b == std::string::npos) continue;
    items.push_back(item.substr(b, item.find_last_not_of(" \t") - b + 1));
  }
  return items;
}

double parse_number(const std::string& text) {
  std::size_t used = 0;
  double v = 0.0;
  try {
    v = std::stod(text, &used);
  } catch (const std::exception&) {
    used = 0;
  }
  if (used != text.size()) throw ValidationError("not a number: '" + text + "'");
  return v;
}

std::size_t parse_count(const std::string& text) {
  const double v = parse_number(text);
  if (v < 0 || v != static_cast<double>(static_cast<std::size_t>(v)))
    throw ValidationError("not a non-negative integer: '" + text + "'");
  return static_cast<std::size_t>(v);
}

KvConfig load_config(const Common& c) {
  if (c.config.empty()) return {};
  KvConfig cfg = KvConfig::load(c.config);
  std::vector<std::string> known = train_config_keys();
  for (const auto& k : model_config_keys()) known.push_back(k);
  const auto unknown = cfg.unknown_keys(known);
  if (!unknown.empty()) throw ValidationError("unknown config key: " + unknown.front());
  return cfg;
}

// Fingerprint of a store's index, folds and every listed image.
std::string store_fingerprint(const fs::path& root) {
  std::string combined = file_fingerprint(root / "index.csv") + file_fingerprint(root / "folds.csv");
  LineReader reader(root / "index.csv");
  std::string line;
  reader.next(line);
  while (reader.next(line))
    if (!line.empty()) combined += file_fingerprint(root / "images" / line.substr(0, line.find(',')));
  return hex64(hash_string(combined));
}

ImageStore open_store(const std::string& dir) {
  const fs::path root(dir);
  if (!fs::exists(root / "index.csv") || !fs::exists(root / "folds.csv"))
    throw ValidationError("not an image store: " + dir);
  return ImageStore{root};
}

class Manifest {
 public:
  Manifest(std::string command, const Cli& cli, const KvConfig& cfg)
      : start_(std::chrono::steady_clock::now()) {
    doc_["command"] = std::move(command);
    doc_["tool_version"] = GRIDFILL_VERSION;
    doc_["arguments"] = cli.raw_args;
    json config = json::object();
    for (const auto& [k, v] : cfg.entries()) config[k] = v;
    doc_["config"] = config;
    doc_["seeds"] = json::object();
    doc_["inputs"] = json::array();
    doc_["outputs"] = json::array();
  }

  void seed(const std::string& name, std::uint64_t value) { doc_["seeds"][name] = value; }
  void input(const std::string& path, const std::string& fingerprint) {
    doc_["inputs"].push_back({{"path", path}, {"fingerprint", fingerprint}});
  }
  void output(const fs::path& path) { doc_["outputs"].push_back(path.string()); }
  void note(const std::string& key, json value) { doc_[key] = std::move(value); }

  void write(const fs::path& path) {
    doc_["wall_seconds"] =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - start_).count();
    write_file_atomic(path, doc_.dump(2) + "\n");
  }

 private:
  json doc_;
  std::chrono::steady_clock::time_point start_;
};

std::string fmt(double v, const char* spec = "%.6g") {
  char buf[48];
  std::snprintf(buf, sizeof buf, spec, v);
  return buf;
}

// ---------------------------------------------------------------------------

int cmd_synth(const Cli& cli, std::ostream& out) {
  const KvConfig cfg = load_config(cli.common);
  SynthSpec spec;
  spec.sites = cli.synth.sites;
  spec.meters_per_site = cli.synth.meters_per_site;
  spec.noise_sigma = cli.synth.noise_sigma;
  spec.hours = cli.synth.hours;
  spec.seed = cli.common.seed;
  spec.validate();
  const auto fleet = generate_fleet(spec);

  const fs::path dir(cli.common.out);
  fs::create_directories(dir);
  std::ostringstream csv;
  write_csv(csv, fleet);
  write_file_atomic(dir / "fleet.csv", csv.str());

  Manifest m("synth", cli, cfg);
  m.seed("seed", spec.seed);
  m.output(dir / "fleet.csv");
  m.note("meters", fleet.size());
  m.write(dir / "manifest.json");
  out << "wrote " << fleet.size() << " meters to " << (dir / "fleet.csv").string() << "\n";
  return 0;
}

int cmd_prepare(const Cli& cli, std::ostream& out, std::ostream& err) {
  const KvConfig cfg = load_config(cli.common);
  const fs::path dir(cli.common.out);
  if (fs::exists(dir) && !fs::is_empty(dir)) {
    if (!cli.prepare.force)
      throw ValidationError("output directory " + dir.string() + " exists; use --force to replace it");
    for (const char* name : {"images", "index.csv", "folds.csv", "exclusions.log", "manifest.json"})
      fs::remove_all(dir / name);
  }
  if (!(cli.prepare.missing_threshold > 0.0 && cli.prepare.missing_threshold <= 1.0))
    throw ValidationError("--missing-threshold must lie in (0, 1]");

  auto ingested = ingest_csv(cli.prepare.input);
  for (const auto& w : ingested.warnings) err << "warning: " << w << "\n";
  for (auto& r : ingested.records) r = clean(std::move(r));
  auto filtered = filter_low_missing(std::move(ingested.records), cli.prepare.missing_threshold);

  std::vector<EnergyImage> images;
  images.reserve(filtered.kept.size());
  for (const auto& r : filtered.kept) images.push_back(make_image(r));
  const auto folds = assign_folds(images, derive_seed(cli.common.seed, "prepare.folds"));
  ImageStore::create(dir, images, folds, filtered.excluded);

  Manifest m("prepare", cli, cfg);
  m.seed("seed", cli.common.seed);
  m.input(cli.prepare.input, file_fingerprint(cli.prepare.input));
  for (const char* name : {"index.csv", "folds.csv", "exclusions.log"}) m.output(dir / name);
  m.output(dir / "images");
  m.note("images", images.size());
  m.note("excluded", filtered.excluded.size());
  m.write(dir / "manifest.json");
  out << "stored " << images.size() << " images, excluded " << filtered.excluded.size()
      << " meters\n";
  return 0;
}

int cmd_train(const Cli& cli, std::ostream& out, std::ostream& err) {
  const KvConfig cfg = load_config(cli.common);
  const Architecture arch = parse_architecture(cli.train.model);
  if (arch == Architecture::persistence)
    throw ValidationError("persistence needs no training");
  if (cli.train.fold >= kFoldCount) throw ValidationError("--fold must be 0-4");

  TrainConfig tc = TrainConfig::from(cfg);
  if (cli.seed_given || !cfg.has("seed")) tc.seed = cli.common.seed;
  if (cli.train.max_epochs >= 0) tc.max_epochs = static_cast<std::size_t>(cli.train.max_epochs);
  tc.validate();
  const ModelConfig mc = ModelConfig::from(cfg);

  const ImageStore store = open_store(cli.train.store);
  const auto images = store.load_all();
  const auto split = split_round(images, store.folds(), cli.train.fold);
  std::vector<EnergyImage> train_set, val_set;
  for (auto i : split.train) train_set.push_back(images[i]);
  for (auto i : split.val) val_set.push_back(images[i]);
  if (!cli.train.no_augment) train_set = augment(train_set, derive_seed(tc.seed, "train.augment"));

  const std::uint64_t init_seed = derive_seed(tc.seed, "model.init");
  ModelBundle model = build_model(arch, mc, init_seed);
  auto progress = [&](const EpochRecord& r) {
    if (!cli.train.quiet)
      err << "epoch " << r.epoch << "  train " << fmt(r.train_loss) << "  val " << fmt(r.val_loss)
          << "  (" << fmt(r.seconds, "%.1f") << " s)\n";
  };
  auto result = train(std::move(model), train_set, val_set, tc, progress);

  const fs::path dir(cli.common.out);
  fs::create_directories(dir);
  const std::string stem = std::string(to_string(arch)) + "_fold" + std::to_string(cli.train.fold);
  save_model(dir / (stem + ".gfm"), result.model);
  write_file_atomic(dir / (stem + "_log.csv"), result.log.csv());

  KvConfig snapshot;
  tc.write(snapshot);
  mc.write(snapshot);
  Manifest m("train", cli, snapshot);
  m.seed("seed", tc.seed);
  m.seed("model_init", init_seed);
  m.input(cli.train.store, store_fingerprint(store.root));
  m.output(dir / (stem + ".gfm"));
  m.output(dir / (stem + "_log.csv"));
  m.note("stop_reason", std::string(to_string(result.log.stop)));
  m.note("best_epoch", result.log.best_epoch);
  m.note("initial_val_loss", result.log.initial_val_loss);
  m.note("best_val_loss", result.log.best_val_loss());
  m.write(dir / (stem + ".manifest.json"));
  out << stem << ": " << result.log.epochs.size() << " epochs, stop " << to_string(result.log.stop)
      << ", best epoch " << result.log.best_epoch << ", val loss "
      << fmt(result.log.initial_val_loss) << " -> " << fmt(result.log.best_val_loss()) << "\n";
  return 0;
}

int cmd_impute(const Cli& cli, std::ostream& out) {
  const KvConfig cfg = load_config(cli.common);
  const auto& a = cli.impute;
  if (a.checkpoint.empty() == a.model.empty())
    throw ValidationError("give exactly one of --checkpoint or --model");
  if (!a.model.empty() && a.model != "persistence")
    throw ValidationError("--model only accepts 'persistence'; networks load from --checkpoint");

  const ImageStore store = open_store(a.store);
  const auto images = store.load_all();
  const EnergyImage* image = nullptr;
  for (const auto& img : images)
    if (img.meter_id == a.meter_id) image = &img;
  if (!image) throw ValidationError("meter not in store: " + a.meter_id);

  const ModelBundle model =
      a.checkpoint.empty() ? build_model(Architecture::persistence) : load_model(a.checkpoint);

  MaskGrid mask;
  std::uint64_t mask_seed = 0;
  if (!a.mask_file.empty()) {
    mask = read_mask(a.mask_file);
  } else if (a.mask_kind != "none") {
    mask_seed = derive_seed(cli.common.seed, "impute.mask", {hash_string(a.meter_id)});
    mask = make_mask(parse_mask_kind(a.mask_kind), a.rate, mask_seed);
  }
  const Imputation imp = impute(model, *image, mask);

  const fs::path dir(cli.common.out);
  fs::create_directories(dir);
  std::string csv = "timestamp,value,provenance\n";
  for (std::size_t t = 0; t < kYearHours; ++t) {
    const std::size_t g = grid_index(t);
    double v = imp.filled[g];
    if (a.denormalize) v = image->norm.denormalize(v);
    csv += format_timestamp(image->week0_start + static_cast<HourStamp>(t)) + ',' + fmt(v, "%.17g") +
           ',' + (imp.imputed[g] != 0.0 ? "imputed" : "observed") + '\n';
  }
  const fs::path file = dir / ("imputed_" + a.meter_id + ".csv");
  write_file_atomic(file, csv);
  write_mask(dir / ("mask_" + a.meter_id + ".txt"), mask);

  Manifest m("impute", cli, cfg);
  m.seed("seed", cli.common.seed);
  m.seed("mask", mask_seed);
  m.input(a.store, store_fingerprint(store.root));
  if (!a.checkpoint.empty()) m.input(a.checkpoint, file_fingerprint(a.checkpoint));
  if (!a.mask_file.empty()) m.input(a.mask_file, file_fingerprint(a.mask_file));
  m.output(file);
  m.output(dir / ("mask_" + a.meter_id + ".txt"));
  m.write(dir / "manifest.json");
  std::size_t filled = 0;
  for (double f : imp.imputed.values()) filled += f != 0.0;
  out << "imputed " << filled << " of " << kYearHours << " hours for " << a.meter_id << "\n";
  return 0;
}

int cmd_evaluate(const Cli& cli, std::ostream& out) {
  const KvConfig cfg = load_config(cli.common);
  const auto& a = cli.evaluate;
  ExperimentSpec spec;
  spec.seed = cli.common.seed;
  spec.denormalized = a.denormalized;
  spec.examples_per_kind = a.examples;
  spec.kinds.clear();
  for (const auto& k : split_list(a.kinds)) spec.kinds.push_back(parse_mask_kind(k));
  spec.rates.clear();
  for (const auto& r : split_list(a.rates)) {
    const double v = parse_number(r);
    if (!(v >= 0.0 && v <= 0.5)) throw ValidationError("rates must lie in [0, 0.5]");
    spec.rates.push_back(v);
  }
  spec.folds.clear();
  for (const auto& f : split_list(a.folds)) spec.folds.push_back(parse_count(f));
  const auto model_ids = split_list(a.models);

  const ImageStore store = open_store(a.store);
  const auto images = store.load_all();
  Manifest m("evaluate", cli, cfg);
  m.seed("seed", spec.seed);
  m.input(a.store, store_fingerprint(store.root));

  ModelSet models;
  for (const auto& id : model_ids) {
    if (parse_architecture(id) == Architecture::persistence) continue;
    if (a.checkpoints.empty()) throw ValidationError("--checkpoints is required for " + id);
    for (std::size_t f : spec.folds) {
      const fs::path path = fs::path(a.checkpoints) / (id + "_fold" + std::to_string(f) + ".gfm");
      if (!fs::exists(path))
        throw ValidationError("no trained " + id + " model for fold " + std::to_string(f) + " (" +
                              path.string() + ")");
      ModelBundle bundle = load_model(path);
      if (std::string(to_string(bundle.arch)) != id)
        throw ValidationError(path.string() + " holds a " + std::string(to_string(bundle.arch)) +
                              " model");
      m.input(path.string(), file_fingerprint(path));
      models.add(f, std::move(bundle));
    }
  }

  const EvalReport report = run_experiment(spec, images, store.folds(), model_ids, models);
  if (report.rows.empty()) throw ValidationError("evaluation produced no scorable rows");

  const fs::path dir(cli.common.out);
  fs::create_directories(dir);
  write_file_atomic(dir / "report.csv", report.csv());
  const auto by_rate = aggregate(report, {"model", "mask_kind", "rate"});
  const auto by_type = aggregate(report, {"model", "meter_type", "mask_kind"});
  write_file_atomic(dir / "summary_rate.csv", by_rate.csv());
  write_file_atomic(dir / "summary_meter_type.csv", by_type.csv());
  m.output(dir / "report.csv");
  m.output(dir / "summary_rate.csv");
  m.output(dir / "summary_meter_type.csv");
  for (const auto& p : emit_plots(report, dir / "plots")) m.output(p);
  m.note("rows", report.rows.size());
  m.note("degenerate_excluded", report.degenerate_excluded);
  m.write(dir / "manifest.json");

  out << "model        kind          rate   mean_mse     mean_r2\n";
  for (const auto& r : by_rate.rows) {
    char line[128];
    std::snprintf(line, sizeof line, "%-12s %-13s %-6s %-12.6f %.4f\n", r.key[0].c_str(),
                  r.key[1].c_str(), r.key[2].c_str(), r.mse.mean, r.r2.mean);
    out << line;
  }
  out << report.rows.size() << " rows, " << report.degenerate_excluded
      << " excluded as degenerate\n";
  return 0;
}

int cmd_gradcheck(const Cli& cli, std::ostream& out) {
  const KvConfig cfg = load_config(cli.common);
  const auto& a = cli.gradcheck;
  if (a.points == 0) throw ValidationError("--points must be at least 1");
  if (!(a.tolerance > 0.0)) throw ValidationError("--tolerance must be positive");
  const auto reports = run_grad_checks(a.points, cli.common.seed, a.tolerance, a.corrupt);
  bool ok = true;
  std::string table = "op,max_rel_error,tolerance,status\n";
  char line[128];
  std::snprintf(line, sizeof line, "%-20s %-14s %-10s %s\n", "op", "max_rel_error", "tolerance",
                "status");
  out << line;
  for (const auto& r : reports) {
    ok = ok && r.pass;
    std::snprintf(line, sizeof line, "%-20s %-14.3e %-10.1e %s\n", r.op.c_str(), r.max_rel_error,
                  r.tolerance, r.pass ? "PASS" : "FAIL");
    out << line;
    table += r.op + ',' + fmt(r.max_rel_error, "%.6e") + ',' + fmt(r.tolerance, "%.1e") + ',' +
             (r.pass ? "pass" : "fail") + '\n';
  }
  if (!cli.common.out.empty()) {
    const fs::path dir(cli.common.out);
    fs::create_directories(dir);
    write_file_atomic(dir / "gradcheck.csv", table);
    Manifest m("gradcheck", cli, cfg);
    m.seed("seed", cli.common.seed);
    m.output(dir / "gradcheck.csv");
    m.note("all_pass", ok);
    m.write(dir / "manifest.json");
  }
  return ok ? 0 : 1;
}

}  // namespace

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  Cli cli;
  cli.raw_args = args;
  std::vector<const char*> argv{"gridfill"};
  for (const auto& a : args) argv.push_back(a.c_str());
  try {
    cli.app.parse(static_cast<int>(argv.size()), argv.data());
  } catch (const CLI::Success& e) {
    return cli.app.exit(e, out, err);
  } catch (const CLI::ParseError& e) {
    cli.app.exit(e, out, err);
    return 2;
  }

  const auto* sub = cli.app.get_subcommands().front();
  cli.seed_given = sub->count("--seed") > 0;
  const std::string name = sub->get_name();
  try {
    if (name == "synth") return cmd_synth(cli, out);
    if (name == "prepare") return cmd_prepare(cli, out, err);
    if (name == "train") return cmd_train(cli, out, err);
    if (name == "impute") return cmd_impute(cli, out);
    if (name == "evaluate") return cmd_evaluate(cli, out);
    if (name == "gradcheck") return cmd_gradcheck(cli, out);
  } catch (const ValidationError& e) {
    err << "error: " << e.what() << "\n";
    return 2;
  } catch (const ParseError& e) {
    err << "error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return 1;
  }
  return 1;
}

std::vector<std::string> cli_subcommands() {
  Cli cli;
  std::vector<std::string> names;
  for (const auto* sub : cli.app.get_subcommands({})) names.push_back(sub->get_name());
  return names;
}

std::vector<std::string> cli_option_names(const std::string& subcommand) {
  Cli cli;
  std::vector<std::string> names;
  for (const auto* opt : cli.app.get_subcommand(subcommand)->get_options())
    for (const auto& ln : opt->get_lnames()) names.push_back("--" + ln);
  return names;
}

}  // namespace gridfill
