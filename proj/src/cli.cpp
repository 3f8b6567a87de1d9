#include "zspeedl/cli.hpp"

#include <algorithm>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <iomanip>
#include <map>
#include <optional>
#include <set>
#include <sstream>
#include <thread>

#include "CLI11.hpp"
#include "json.hpp"
#include "zspeedl/bench.hpp"
#include "zspeedl/errors.hpp"
#include "zspeedl/experiment.hpp"
#include "zspeedl/model_io.hpp"

namespace zspeedl::cli {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

void write_text(const fs::path& path, const std::string& text) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  std::ofstream f(path, std::ios::binary | std::ios::trunc);
  f << text;
  if (!f) throw DataError("cannot write " + path.string());
}

std::string read_text(const fs::path& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw DataError("cannot open " + path.string());
  std::ostringstream ss;
  ss << f.rdbuf();
  return ss.str();
}

json parse_json_file(const fs::path& path) {
  try {
    return json::parse(read_text(path));
  } catch (const json::parse_error& e) {
    throw DataError(path.string() + ": " + e.what());
  }
}

// "key=value" pairs; an optional "method." prefix scopes a pair to one method.
Hyperparameters parse_hp(const std::vector<std::string>& pairs, std::optional<Method> only = std::nullopt) {
  Hyperparameters hp;
  for (const auto& p : pairs) {
    const auto eq = p.find('=');
    if (eq == std::string::npos || eq == 0) throw UsageError("--hp expects key=value, got '" + p + "'");
    std::string key = p.substr(0, eq);
    if (const auto dot = key.find('.'); dot != std::string::npos) {
      const Method scoped = parse_method(key.substr(0, dot));
      if (only && scoped != *only) continue;
      key = key.substr(dot + 1);
    }
    hp[key] = p.substr(eq + 1);
  }
  return hp;
}

std::uint64_t header_seed(const json& header) {
  return header.contains("seed") && header["seed"].is_number_unsigned() ? header["seed"].get<std::uint64_t>() : 0;
}

void check_compatible(const Model& model, const DatasetBundle& bundle) {
  if (model_feature_dim(model) != bundle.feature_dim())
    throw DataError("model expects feature dim " + std::to_string(model_feature_dim(model)) + ", dataset has " +
                    std::to_string(bundle.feature_dim()));
}

void emit(const std::string& text, const std::string& out_path, std::ostream& out) {
  if (out_path.empty())
    out << text;
  else
    write_text(out_path, text);
}

// ---------------------------------------------------------------- train

struct TrainArgs {
  std::string method, dataset, out;
  std::vector<std::string> hp;
  std::uint64_t seed = 42;
};

int cmd_train(const TrainArgs& a, std::ostream& out) {
  const Method method = parse_method(a.method);
  const Hyperparameters hp = parse_hp(a.hp, method);
  validate_hyperparameters(method, hp);
  const DatasetBundle bundle = load_manifest(a.dataset);
  set_num_threads(threads_from_env(std::max(1u, std::thread::hardware_concurrency())));
  TrainResult r = train_method(method, bundle, hp, a.seed);
  json meta{{"seed", a.seed},
            {"train_manifest_hash", bundle.manifest_hash},
            {"dataset", bundle.name},
            {"backbone", bundle.backbone_tag},
            {"hyperparameters", r.hyperparameters}};
  if (r.validation_mca) meta["validation_mca"] = *r.validation_mca;
  save_model(a.out, r.model, meta);
  json summary{{"method", to_string(method)}, {"model", a.out}, {"hyperparameters", r.hyperparameters}};
  if (r.validation_mca) summary["validation_mca"] = round2(100.0 * *r.validation_mca);
  out << summary.dump(2) << '\n';
  return 0;
}

// ---------------------------------------------------------------- eval

struct EvalArgs {
  std::string model, dataset, setting = "zsl", out;
};

json eval_record(const ModelFile& mf, const DatasetBundle& bundle, Setting setting) {
  json r = evaluate(mf.model, bundle, setting);
  r["hyperparameters"] = mf.header.value("hyperparameters", json::object());
  r["seed"] = header_seed(mf.header);
  return r;
}

int cmd_eval(const EvalArgs& a, std::ostream& out) {
  const Setting setting = parse_setting(a.setting);
  const ModelFile mf = load_model(a.model);
  const DatasetBundle bundle = load_manifest(a.dataset);
  check_compatible(mf.model, bundle);
  emit(eval_record(mf, bundle, setting).dump(2) + "\n", a.out, out);
  return 0;
}

// ---------------------------------------------------------------- bench

struct BenchArgs {
  std::vector<std::string> models;
  std::string dataset, device = "unlabeled", out, csv;
  std::size_t warmup = kDefaultWarmup, repeats = kDefaultRepeats, batch = 1;
};

int cmd_bench(const BenchArgs& a, std::ostream& out) {
  if (a.batch == 0) throw UsageError("--batch must be at least 1");
  set_num_threads(threads_from_env(1));
  const DatasetBundle bundle = load_manifest(a.dataset);
  BenchReport report;
  report.created_at = utc_timestamp();
  report.device_label = a.device;
  for (const auto& path : a.models) {
    const ModelFile mf = load_model(path);
    check_compatible(mf.model, bundle);
    BenchEntry e;
    e.method = std::string(to_string(method_of(mf.model)));
    e.backbone_tag = bundle.backbone_tag;
    e.feature_dim = model_feature_dim(mf.model);
    if (a.batch == 1) {
      e.stats = bench_classification(mf.model, bundle, a.warmup, a.repeats, a.device);
    } else {
      e.method += "@batch" + std::to_string(a.batch);
      e.stats = bench_batch(mf.model, bundle, a.batch, a.warmup, a.repeats, a.device);
    }
    report.entries.push_back(std::move(e));
  }
  if (a.out.empty()) {
    out << report_to_json(report);
    if (!a.csv.empty()) write_text(a.csv, report_to_csv(report));
  } else {
    write_report(report, a.out, a.csv.empty() ? std::nullopt : std::optional<fs::path>(a.csv));
  }
  return 0;
}

// ---------------------------------------------------------------- sweep

struct SweepArgs {
  std::vector<std::string> methods, manifests, hp;
  std::string setting = "both", out, progress;
  std::uint64_t seed = 42;
};

std::string cell_key(const std::string& method, const std::string& manifest) { return method + "\t" + manifest; }

std::string fmt_cell(const json& v) {
  if (!v.is_number()) return "";
  std::ostringstream ss;
  ss << std::fixed << std::setprecision(2) << v.get<double>();
  return ss.str();
}

int cmd_sweep(const SweepArgs& a, std::ostream& out, std::ostream& err) {
  if (a.setting != "zsl" && a.setting != "gzsl" && a.setting != "both")
    throw UsageError("--setting must be zsl, gzsl or both");
  std::vector<Method> methods;
  for (const auto& m : a.methods) methods.push_back(parse_method(m));
  for (Method m : methods) validate_hyperparameters(m, parse_hp(a.hp, m));

  // Manifests must all load before any work starts.
  std::vector<DatasetBundle> bundles;
  for (const auto& m : a.manifests) bundles.push_back(load_manifest(m));

  const fs::path progress = a.progress.empty() ? fs::path(a.out + ".progress.jsonl") : fs::path(a.progress);
  std::map<std::string, json> done;
  if (fs::exists(progress)) {
    std::ifstream in(progress);
    std::string line;
    while (std::getline(in, line)) {
      if (line.empty()) continue;
      try {
        json j = json::parse(line);
        if (j.value("status", "") == "ok") done[cell_key(j.at("method"), j.at("manifest"))] = j;
      } catch (const json::exception&) {
        // A truncated trailing line from an interrupted run; the cell reruns.
      }
    }
  }

  set_num_threads(threads_from_env(std::max(1u, std::thread::hardware_concurrency())));
  const bool want_zsl = a.setting != "gzsl";
  const bool want_gzsl = a.setting != "zsl";
  std::size_t failures = 0;
  for (Method m : methods) {
    for (std::size_t b = 0; b < bundles.size(); ++b) {
      const std::string key = cell_key(std::string(to_string(m)), a.manifests[b]);
      if (done.contains(key)) continue;
      json cell{{"method", to_string(m)},
                {"manifest", a.manifests[b]},
                {"backbone", bundles[b].backbone_tag},
                {"dataset", bundles[b].name}};
      try {
        const TrainResult r = train_method(m, bundles[b], parse_hp(a.hp, m), a.seed);
        if (want_zsl) cell["mca"] = round2(100.0 * zsl_mca(r.model, bundles[b]));
        if (want_gzsl) {
          const GzslScores s = gzsl_scores(r.model, bundles[b]);
          cell["u"] = round2(100.0 * s.acc_unseen);
          cell["s"] = round2(100.0 * s.acc_seen);
          cell["h"] = round2(100.0 * s.harmonic_mean);
        }
        cell["hyperparameters"] = r.hyperparameters;
        cell["status"] = "ok";
      } catch (const Error& e) {
        cell["status"] = "failed";
        cell["error"] = e.what();
        ++failures;
        err << "sweep: " << to_string(m) << " on " << a.manifests[b] << " failed: " << e.what() << '\n';
      }
      {
        std::ofstream p(progress, std::ios::app);
        p << cell.dump() << '\n';
        if (!p) throw DataError("cannot append to " + progress.string());
      }
      done[key] = cell;
    }
  }

  // Rows: (method, backbone); column groups: one per dataset, in first-seen order.
  std::vector<std::string> datasets, backbones;
  for (const auto& b : bundles) {
    if (std::find(datasets.begin(), datasets.end(), b.name) == datasets.end()) datasets.push_back(b.name);
    if (std::find(backbones.begin(), backbones.end(), b.backbone_tag) == backbones.end())
      backbones.push_back(b.backbone_tag);
  }
  std::vector<std::string> fields;
  if (want_zsl) fields.push_back("mca");
  if (want_gzsl) fields.insert(fields.end(), {"u", "s", "h"});

  std::ostringstream csv;
  csv << "method,backbone";
  for (const auto& d : datasets)
    for (const auto& f : fields) csv << ',' << d << '_' << f;
  csv << '\n';
  for (Method m : methods) {
    for (const auto& bb : backbones) {
      csv << to_string(m) << ',' << bb;
      for (const auto& d : datasets) {
        const json* cell = nullptr;
        for (std::size_t b = 0; b < bundles.size(); ++b)
          if (bundles[b].name == d && bundles[b].backbone_tag == bb) {
            auto it = done.find(cell_key(std::string(to_string(m)), a.manifests[b]));
            if (it != done.end()) cell = &it->second;
          }
        for (const auto& f : fields) {
          csv << ',';
          if (cell && cell->contains(f)) csv << fmt_cell((*cell)[f]);
        }
      }
      csv << '\n';
    }
  }
  emit(csv.str(), a.out, out);
  if (failures) err << "sweep: " << failures << " cell(s) failed; see " << progress.string() << '\n';
  return 0;
}

// ---------------------------------------------------------------- fps

struct FpsArgs {
  std::string extract, classify, accuracy, out;
};

int cmd_fps(const FpsArgs& a, std::ostream& out, std::ostream& err) {
  const BenchReport ext = read_report(a.extract);
  const BenchReport cls = read_report(a.classify);
  std::vector<json> acc;
  if (!a.accuracy.empty()) {
    json j = parse_json_file(a.accuracy);
    if (j.is_array())
      acc.assign(j.begin(), j.end());
    else
      acc.push_back(std::move(j));
  }
  const FpsTable t = join_fps(ext, cls, acc);
  for (const auto& tag : t.skipped) err << "fps: skipped backbone '" << tag << "' (present in one report only)\n";
  emit(fps_to_csv(t), a.out, out);
  return 0;
}

// ---------------------------------------------------------------- validate

int cmd_validate(const std::string& dataset, std::ostream& out) {
  const DatasetBundle b = load_manifest(dataset);
  json summary{{"dataset", b.name},
               {"backbone", b.backbone_tag},
               {"instances", b.num_instances()},
               {"feature_dim", b.feature_dim()},
               {"attribute_dim", b.attribute_dim()},
               {"classes", b.num_classes()},
               {"seen_classes", b.split.seen_classes.size()},
               {"unseen_classes", b.split.unseen_classes.size()},
               {"manifest_hash", b.manifest_hash}};
  out << summary.dump(2) << '\n';
  return 0;
}

}  // namespace

unsigned threads_from_env(unsigned fallback) {
  const char* v = std::getenv("ZSPEEDL_THREADS");
  if (!v || !*v) return fallback;
  char* end = nullptr;
  const long n = std::strtol(v, &end, 10);
  if (*end != '\0' || n < 1) throw UsageError(std::string("ZSPEEDL_THREADS must be a positive integer, got '") + v + "'");
  return static_cast<unsigned>(n);
}

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Zero-shot classification inference and benchmarking toolkit", "zspeedl"};
  app.set_version_flag("--version", std::string(ZSPEEDL_VERSION));
  app.require_subcommand(1);

  TrainArgs ta;
  auto* train = app.add_subcommand("train", "Fit a method on a dataset and save the model");
  train->add_option("--method", ta.method, "dap|eszsl|sae|dem|gen-softmax|gen-decoder")->required();
  train->add_option("--dataset", ta.dataset, "Dataset manifest")->required();
  train->add_option("--out", ta.out, "Model file to write")->required();
  train->add_option("--seed", ta.seed, "Random seed")->capture_default_str();
  train->add_option("--hp", ta.hp, "Hyperparameter key=value (repeatable)");

  EvalArgs ea;
  auto* eval = app.add_subcommand("eval", "Evaluate a saved model");
  eval->add_option("--model", ea.model)->required();
  eval->add_option("--dataset", ea.dataset)->required();
  eval->add_option("--setting", ea.setting, "zsl|gzsl")->capture_default_str();
  eval->add_option("--out", ea.out, "Result JSON (stdout if omitted)");

  BenchArgs ba;
  auto* bench = app.add_subcommand("bench", "Time per-sample classification");
  bench->add_option("--model", ba.models, "Model file (repeatable)")->required();
  bench->add_option("--dataset", ba.dataset)->required();
  bench->add_option("--warmup", ba.warmup)->capture_default_str();
  bench->add_option("--repeats", ba.repeats)->capture_default_str();
  bench->add_option("--batch", ba.batch, "Rows per timed run; >1 is reported as a separate entry")
      ->capture_default_str();
  bench->add_option("--device", ba.device, "Device label recorded in the report")->capture_default_str();
  bench->add_option("--out", ba.out, "Report JSON (stdout if omitted)");
  bench->add_option("--csv", ba.csv, "Also write the table CSV");

  SweepArgs sa;
  auto* sweep = app.add_subcommand("sweep", "Train and evaluate every method on every manifest");
  sweep->add_option("--methods,--method", sa.methods)->required()->delimiter(',');
  sweep->add_option("--manifests,--dataset", sa.manifests)->required()->delimiter(',');
  sweep->add_option("--setting", sa.setting, "zsl|gzsl|both")->capture_default_str();
  sweep->add_option("--out", sa.out, "CSV to write")->required();
  sweep->add_option("--progress", sa.progress, "Progress file (default <out>.progress.jsonl)");
  sweep->add_option("--seed", sa.seed)->capture_default_str();
  sweep->add_option("--hp", sa.hp, "[method.]key=value (repeatable)");

  FpsArgs fa;
  auto* fps = app.add_subcommand("fps", "Compose extraction and classification timings into FPS");
  fps->add_option("--extract", fa.extract, "Extraction timing report")->required();
  fps->add_option("--classify", fa.classify, "Classification timing report")->required();
  fps->add_option("--accuracy", fa.accuracy, "Result JSON (object or array)");
  fps->add_option("--out", fa.out, "CSV to write (stdout if omitted)");

  std::string vdataset;
  auto* validate = app.add_subcommand("validate", "Load and validate a dataset manifest");
  validate->add_option("--dataset", vdataset)->required();

  std::vector<std::string> argv_rev(args.rbegin(), args.rend());
  try {
    app.parse(argv_rev);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? 0 : static_cast<int>(ExitCode::usage);
  }

  try {
    if (*train) return cmd_train(ta, out);
    if (*eval) return cmd_eval(ea, out);
    if (*bench) return cmd_bench(ba, out);
    if (*sweep) return cmd_sweep(sa, out, err);
    if (*fps) return cmd_fps(fa, out, err);
    if (*validate) return cmd_validate(vdataset, out);
  } catch (const Error& e) {
    err << "error: " << e.what() << '\n';
    return static_cast<int>(e.exit_code());
  } catch (const fs::filesystem_error& e) {
    err << "error: " << e.what() << '\n';
    return static_cast<int>(ExitCode::data);
  }
  return static_cast<int>(ExitCode::usage);
}

int run(int argc, char** argv) {
  std::vector<std::string> args;
  for (int i = 1; i < argc; ++i) args.emplace_back(argv[i]);
  return run(args, std::cout, std::cerr);
}

}  // namespace zspeedl::cli
