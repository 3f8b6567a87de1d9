#include "zspeedl/bench.hpp"

#include <algorithm>
#include <atomic>
#include <ctime>
#include <fstream>
#include <iomanip>
#include <limits>
#include <map>
#include <set>
#include <sstream>

#include "json.hpp"

namespace zspeedl {

using nlohmann::json;

namespace {

std::atomic<void (*)()> g_enter{nullptr};
std::atomic<void (*)()> g_leave{nullptr};

std::string fixed2(double v) {
  std::ostringstream ss;
  ss << std::fixed << std::setprecision(2) << v;
  return ss.str();
}

const std::vector<double>& row_of(const Matrix& m, std::size_t r, std::vector<double>& buf) {
  buf.assign(m.row(r).begin(), m.row(r).end());
  return buf;
}

}  // namespace

void set_timed_region_hooks(TimedRegionHooks hooks) noexcept {
  g_enter.store(hooks.enter);
  g_leave.store(hooks.leave);
}

TimedRegionHooks timed_region_hooks() noexcept { return {g_enter.load(), g_leave.load()}; }

TimingStats summarize_ns(const std::vector<std::int64_t>& samples_ns, std::size_t warmup, std::string device_label) {
  TimingStats s;
  s.repeats = samples_ns.size();
  s.warmup = warmup;
  s.device_label = std::move(device_label);
  if (samples_ns.empty()) return s;
  double sum = 0.0;
  double mn = std::numeric_limits<double>::infinity();
  for (auto ns : samples_ns) {
    const double ms = static_cast<double>(ns) / 1e6;
    sum += ms;
    mn = std::min(mn, ms);
  }
  s.avg_ms = sum / static_cast<double>(samples_ns.size());
  double var = 0.0;
  for (auto ns : samples_ns) {
    const double t = static_cast<double>(ns) / 1e6 - s.avg_ms;
    var += t * t;
  }
  s.std_ms = samples_ns.size() > 1 ? std::sqrt(var / static_cast<double>(samples_ns.size())) : 0.0;
  s.min_ms = std::min(mn, s.avg_ms);
  return s;
}

TimingStats bench_classification(const Model& model, const DatasetBundle& bundle, std::size_t warmup,
                                 std::size_t repeats, const std::string& device_label) {
  if (bundle.split.test_unseen_idx.empty()) throw DataError("bench: empty unseen test split");
  if (model_feature_dim(model) != bundle.feature_dim())
    throw DataError("bench: model and dataset feature dimensions differ");
  const Candidates cand = make_candidates(bundle, bundle.split.unseen_classes);
  auto predictor = make_predictor(model, cand);
  std::vector<double> buf;
  const std::vector<double>& x = row_of(bundle.features, bundle.split.test_unseen_idx.front(), buf);
  return time_closure([&] { return predictor->classify(x); }, warmup, repeats, device_label);
}

TimingStats bench_batch(const Model& model, const DatasetBundle& bundle, std::size_t batch, std::size_t warmup,
                        std::size_t repeats, const std::string& device_label) {
  if (bundle.split.test_unseen_idx.empty()) throw DataError("bench: empty unseen test split");
  if (batch == 0) throw UsageError("bench: batch must be positive");
  if (model_feature_dim(model) != bundle.feature_dim())
    throw DataError("bench: model and dataset feature dimensions differ");
  const Candidates cand = make_candidates(bundle, bundle.split.unseen_classes);
  auto predictor = make_predictor(model, cand);
  IndexList rows;
  for (std::size_t i = 0; i < batch; ++i)
    rows.push_back(bundle.split.test_unseen_idx[i % bundle.split.test_unseen_idx.size()]);
  const Matrix x = select_rows(bundle.features, rows);
  return time_closure(
      [&] {
        std::size_t acc = 0;
        for (std::size_t r = 0; r < x.rows(); ++r) acc += predictor->classify(x.row(r));
        return acc;
      },
      warmup, repeats, device_label);
}

double compose_fps(double t_extract_ms, double t_classify_ms) {
  if (!(t_extract_ms >= 0.0) || !(t_classify_ms >= 0.0)) throw DataError("compose_fps: negative time");
  const double total = t_extract_ms + t_classify_ms;
  if (!(total > 0.0)) throw DataError("compose_fps: total time is zero");
  return 1000.0 / total;
}

std::string utc_timestamp() {
  const std::time_t t = std::time(nullptr);
  std::tm tm{};
  gmtime_r(&t, &tm);
  std::ostringstream ss;
  ss << std::put_time(&tm, "%Y-%m-%dT%H:%M:%SZ");
  return ss.str();
}

std::string report_to_json(const BenchReport& r) {
  json entries = json::array();
  for (const auto& e : r.entries)
    entries.push_back({{"method", e.method},
                       {"backbone_tag", e.backbone_tag},
                       {"feature_dim", e.feature_dim},
                       {"avg_ms", e.stats.avg_ms},
                       {"std_ms", e.stats.std_ms},
                       {"min_ms", e.stats.min_ms},
                       {"repeats", e.stats.repeats},
                       {"warmup", e.stats.warmup}});
  json j{{"toolkit_version", r.toolkit_version},
         {"created_at", r.created_at},
         {"device_label", r.device_label},
         {"entries", entries}};
  return j.dump(2) + "\n";
}

BenchReport report_from_json(const std::string& text) {
  try {
    const json j = json::parse(text);
    BenchReport r;
    r.toolkit_version = j.at("toolkit_version").get<std::string>();
    r.created_at = j.at("created_at").get<std::string>();
    r.device_label = j.at("device_label").get<std::string>();
    for (const auto& e : j.at("entries")) {
      BenchEntry b;
      b.method = e.at("method").get<std::string>();
      b.backbone_tag = e.at("backbone_tag").get<std::string>();
      b.feature_dim = e.at("feature_dim").get<std::size_t>();
      b.stats.avg_ms = e.at("avg_ms").get<double>();
      b.stats.std_ms = e.at("std_ms").get<double>();
      b.stats.min_ms = e.at("min_ms").get<double>();
      b.stats.repeats = e.at("repeats").get<std::size_t>();
      b.stats.warmup = e.at("warmup").get<std::size_t>();
      b.stats.device_label = r.device_label;
      r.entries.push_back(std::move(b));
    }
    return r;
  } catch (const json::exception& e) {
    throw DataError(std::string("malformed bench report: ") + e.what());
  }
}

std::string report_to_csv(const BenchReport& r) {
  std::vector<std::string> methods;
  std::set<std::size_t> dims;
  std::map<std::pair<std::string, std::size_t>, const BenchEntry*> cell;
  for (const auto& e : r.entries) {
    if (std::find(methods.begin(), methods.end(), e.method) == methods.end()) methods.push_back(e.method);
    dims.insert(e.feature_dim);
    cell[{e.method, e.feature_dim}] = &e;
  }
  std::ostringstream out;
  out << "method";
  for (std::size_t d : dims) out << ',' << d;
  out << '\n';
  for (const auto& m : methods) {
    out << m;
    for (std::size_t d : dims) {
      out << ',';
      auto it = cell.find({m, d});
      if (it != cell.end()) out << fixed2(it->second->stats.avg_ms) << " ± " << fixed2(it->second->stats.std_ms);
    }
    out << '\n';
  }
  return out.str();
}

void write_report(const BenchReport& r, const std::filesystem::path& json_path,
                  const std::optional<std::filesystem::path>& csv_path) {
  if (r.entries.empty()) throw DataError("bench report has no entries");
  {
    std::ofstream out(json_path, std::ios::trunc);
    out << report_to_json(r);
    if (!out) throw DataError("cannot write " + json_path.string());
  }
  if (csv_path) {
    std::ofstream out(*csv_path, std::ios::trunc);
    out << report_to_csv(r);
    if (!out) throw DataError("cannot write " + csv_path->string());
  }
}

BenchReport read_report(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return report_from_json(ss.str());
}

FpsTable join_fps(const BenchReport& extract, const BenchReport& classify, const std::vector<json>& accuracy) {
  std::map<std::string, const BenchEntry*> ext;
  for (const auto& e : extract.entries) ext[e.backbone_tag] = &e;
  std::set<std::string> cls_tags;
  for (const auto& e : classify.entries) cls_tags.insert(e.backbone_tag);

  std::map<std::pair<std::string, std::string>, double> acc;
  for (const auto& a : accuracy) {
    try {
      const double v = a.contains("mca") ? a.at("mca").get<double>() : a.at("h").get<double>();
      acc[{a.at("method").get<std::string>(), a.at("backbone").get<std::string>()}] = v;
    } catch (const json::exception& e) {
      throw DataError(std::string("malformed accuracy record: ") + e.what());
    }
  }

  FpsTable t;
  std::set<std::string> skipped;
  for (const auto& e : classify.entries) {
    auto it = ext.find(e.backbone_tag);
    if (it == ext.end()) {
      skipped.insert(e.backbone_tag);
      continue;
    }
    FpsRow row;
    row.method = e.method;
    row.backbone_tag = e.backbone_tag;
    row.feature_dim = e.feature_dim;
    row.extract_ms = it->second->stats.avg_ms;
    row.classify_ms = e.stats.avg_ms;
    row.fps = compose_fps(row.extract_ms, row.classify_ms);
    if (auto a = acc.find({e.method, e.backbone_tag}); a != acc.end()) row.accuracy = a->second;
    t.rows.push_back(std::move(row));
  }
  for (const auto& [tag, _] : ext)
    if (!cls_tags.contains(tag)) skipped.insert(tag);
  t.skipped.assign(skipped.begin(), skipped.end());
  return t;
}

std::string fps_to_csv(const FpsTable& t) {
  std::ostringstream out;
  out << "method,backbone_tag,feature_dim,extract_ms,classify_ms,fps,accuracy\n";
  for (const auto& r : t.rows) {
    out << r.method << ',' << r.backbone_tag << ',' << r.feature_dim << ',' << fixed2(r.extract_ms) << ','
        << fixed2(r.classify_ms) << ',' << fixed2(r.fps) << ',';
    if (r.accuracy) out << fixed2(*r.accuracy);
    out << '\n';
  }
  return out.str();
}

}  // namespace zspeedl
