#include "zspeedl/dataset.hpp"

#include <algorithm>
#include <fstream>
#include <iomanip>
#include <map>
#include <random>
#include <set>
#include <sstream>

#include "json.hpp"
#include "zspeedl/array_io.hpp"
#include "zspeedl/errors.hpp"

namespace zspeedl {

using nlohmann::json;

namespace {

void check_indices(const IndexList& idx, std::size_t n, std::string_view what) {
  std::vector<std::size_t> sorted(idx);
  std::sort(sorted.begin(), sorted.end());
  if (std::adjacent_find(sorted.begin(), sorted.end()) != sorted.end())
    throw DataError("split: duplicate index in " + std::string(what));
  if (!sorted.empty() && sorted.back() >= n)
    throw DataError("split: index out of range in " + std::string(what));
}

void check_labels_in(const IndexList& idx, const Labels& labels, const std::set<ClassId>& allowed,
                     std::string_view what, std::string_view set_name) {
  for (std::size_t i : idx)
    if (!allowed.contains(labels[i]))
      throw DataError("split: instance " + std::to_string(i) + " in " + std::string(what) + " has label " +
                      std::to_string(labels[i]) + " outside " + std::string(set_name));
}

std::string read_text(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

json parse_json(const std::string& text, const std::filesystem::path& path) {
  try {
    return json::parse(text);
  } catch (const json::exception& e) {
    throw DataError("malformed JSON in " + path.string() + ": " + e.what());
  }
}

template <typename T>
std::vector<T> json_list(const json& j, const char* key, const std::filesystem::path& path) {
  if (!j.contains(key) || !j.at(key).is_array())
    throw DataError(path.string() + ": missing list '" + key + "'");
  try {
    return j.at(key).get<std::vector<T>>();
  } catch (const json::exception&) {
    throw DataError(path.string() + ": list '" + key + "' has wrong element type");
  }
}

std::string json_string(const json& j, const char* key, const std::filesystem::path& path) {
  if (!j.contains(key) || !j.at(key).is_string())
    throw DataError(path.string() + ": missing string field '" + key + "'");
  return j.at(key).get<std::string>();
}

std::filesystem::path resolve(const std::filesystem::path& base, const std::string& rel) {
  std::filesystem::path p(rel);
  if (p.is_relative()) p = base / p;
  if (!std::filesystem::exists(p)) throw DataError("missing file " + p.string());
  return p;
}

SplitSpec parse_split(const std::filesystem::path& path) {
  const json j = parse_json(read_text(path), path);
  SplitSpec s;
  s.train_idx = json_list<std::size_t>(j, "train_idx", path);
  s.test_unseen_idx = json_list<std::size_t>(j, "test_unseen_idx", path);
  s.test_seen_idx = json_list<std::size_t>(j, "test_seen_idx", path);
  s.val_idx = json_list<std::size_t>(j, "val_idx", path);
  s.seen_classes = json_list<ClassId>(j, "seen_classes", path);
  s.unseen_classes = json_list<ClassId>(j, "unseen_classes", path);
  return s;
}

}  // namespace

std::string_view to_string(SplitPart part) noexcept {
  switch (part) {
    case SplitPart::train: return "train";
    case SplitPart::test_unseen: return "test_unseen";
    case SplitPart::test_seen: return "test_seen";
    case SplitPart::val: return "val";
  }
  return "?";
}

void validate_split(const SplitSpec& split, const Labels& labels, std::size_t num_classes) {
  const std::size_t n = labels.size();
  check_indices(split.train_idx, n, "train_idx");
  check_indices(split.test_unseen_idx, n, "test_unseen_idx");
  check_indices(split.test_seen_idx, n, "test_seen_idx");
  check_indices(split.val_idx, n, "val_idx");

  std::set<ClassId> seen(split.seen_classes.begin(), split.seen_classes.end());
  std::set<ClassId> unseen(split.unseen_classes.begin(), split.unseen_classes.end());
  if (seen.size() != split.seen_classes.size() || unseen.size() != split.unseen_classes.size())
    throw DataError("split: duplicate class id in seen/unseen class lists");
  for (ClassId c : seen)
    if (unseen.contains(c)) throw DataError("split: class " + std::to_string(c) + " is both seen and unseen");
  for (const auto* s : {&seen, &unseen})
    for (ClassId c : *s)
      if (c < 0 || static_cast<std::size_t>(c) >= num_classes)
        throw DataError("split: class id " + std::to_string(c) + " out of range");

  check_labels_in(split.train_idx, labels, seen, "train_idx", "seen_classes");
  check_labels_in(split.test_seen_idx, labels, seen, "test_seen_idx", "seen_classes");
  check_labels_in(split.val_idx, labels, seen, "val_idx", "seen_classes");
  check_labels_in(split.test_unseen_idx, labels, unseen, "test_unseen_idx", "unseen_classes");

  // Seen-class test instances must not leak into fitting; val may be a subset of train.
  std::set<std::size_t> fit(split.train_idx.begin(), split.train_idx.end());
  fit.insert(split.val_idx.begin(), split.val_idx.end());
  for (std::size_t i : split.test_seen_idx)
    if (fit.contains(i))
      throw DataError("split: instance " + std::to_string(i) + " is in test_seen_idx and in train_idx or val_idx");
}

void validate(const DatasetBundle& b) {
  if (b.labels.size() != b.features.rows())
    throw DataError("bundle: label count " + std::to_string(b.labels.size()) + " != feature rows " +
                    std::to_string(b.features.rows()));
  if (!b.features.all_finite() || !b.attributes.all_finite()) throw DataError("bundle: non-finite values");
  const std::size_t c_total = b.attributes.rows();
  for (std::size_t i = 0; i < b.labels.size(); ++i)
    if (b.labels[i] < 0 || static_cast<std::size_t>(b.labels[i]) >= c_total)
      throw DataError("bundle: label " + std::to_string(b.labels[i]) + " of instance " + std::to_string(i) +
                      " outside [0, " + std::to_string(c_total) + ")");
  if (!b.class_names.empty() && b.class_names.size() != c_total)
    throw DataError("bundle: class_names length does not match attribute rows");
  validate_split(b.split, b.labels, c_total);
}

const IndexList& split_indices(const DatasetBundle& b, SplitPart part) {
  switch (part) {
    case SplitPart::train: return b.split.train_idx;
    case SplitPart::test_unseen: return b.split.test_unseen_idx;
    case SplitPart::test_seen: return b.split.test_seen_idx;
    case SplitPart::val: return b.split.val_idx;
  }
  throw UsageError("unknown split part");
}

SplitView view_rows(const DatasetBundle& b, std::span<const std::size_t> idx) {
  SplitView v{select_rows(b.features, idx), {}};
  v.labels.reserve(idx.size());
  for (std::size_t i : idx) v.labels.push_back(b.labels[i]);
  return v;
}

SplitView view_split(const DatasetBundle& b, SplitPart part, bool allow_empty) {
  const IndexList& idx = split_indices(b, part);
  if (idx.empty() && !allow_empty)
    throw DataError("split part '" + std::string(to_string(part)) + "' is empty");
  return view_rows(b, idx);
}

Matrix class_attributes(const DatasetBundle& b, std::span<const ClassId> classes) {
  Matrix out(classes.size(), b.attributes.cols());
  for (std::size_t r = 0; r < classes.size(); ++r) {
    const ClassId c = classes[r];
    if (c < 0 || static_cast<std::size_t>(c) >= b.attributes.rows())
      throw DataError("class id " + std::to_string(c) + " has no attribute row");
    std::copy_n(b.attributes.row(c).begin(), b.attributes.cols(), out.row(r).begin());
  }
  return out;
}

DatasetBundle load_manifest(const std::filesystem::path& manifest) {
  const std::string text = read_text(manifest);
  const json j = parse_json(text, manifest);
  const auto base = manifest.parent_path();

  DatasetBundle b;
  b.name = json_string(j, "name", manifest);
  b.backbone_tag = json_string(j, "backbone_tag", manifest);
  b.class_names = json_list<std::string>(j, "class_names", manifest);
  b.manifest_hash = fnv1a_hex(text);

  const auto features_path = resolve(base, json_string(j, "features", manifest));
  const auto labels_path = resolve(base, json_string(j, "labels", manifest));
  const auto attributes_path = resolve(base, json_string(j, "attributes", manifest));
  const auto split_path = resolve(base, json_string(j, "split", manifest));

  const ArrayHeader fh = read_array_header(features_path);
  const ArrayHeader ah = read_array_header(attributes_path);
  if (j.contains("feature_dim") && j.at("feature_dim").get<std::uint64_t>() != fh.cols)
    throw DataError("manifest feature_dim " + j.at("feature_dim").dump() + " != array cols " +
                    std::to_string(fh.cols) + " in " + features_path.string());
  if (j.contains("attribute_dim") && j.at("attribute_dim").get<std::uint64_t>() != ah.cols)
    throw DataError("manifest attribute_dim " + j.at("attribute_dim").dump() + " != array cols " +
                    std::to_string(ah.cols) + " in " + attributes_path.string());

  b.features = read_array(features_path);
  b.attributes = read_array(attributes_path);
  const IntArray labels = read_int_array(labels_path);
  if (labels.rows * labels.cols != labels.values.size() || (labels.cols != 1 && labels.rows != 1 && !labels.values.empty()))
    throw DataError("labels array must be a vector: " + labels_path.string());
  b.labels.assign(labels.values.begin(), labels.values.end());
  b.split = parse_split(split_path);
  validate(b);
  return b;
}

std::filesystem::path save_bundle(const DatasetBundle& b, const std::filesystem::path& dir,
                                  const std::string& stem) {
  validate(b);
  std::filesystem::create_directories(dir);
  write_array(b.features, dir / (stem + ".features.zspl"));
  write_array(b.attributes, dir / (stem + ".attributes.zspl"));
  IntArray labels{b.labels.size(), 1, std::vector<std::int32_t>(b.labels.begin(), b.labels.end())};
  write_int_array(labels, dir / (stem + ".labels.zspl"));

  json split{{"train_idx", b.split.train_idx},           {"test_unseen_idx", b.split.test_unseen_idx},
             {"test_seen_idx", b.split.test_seen_idx},   {"val_idx", b.split.val_idx},
             {"seen_classes", b.split.seen_classes},     {"unseen_classes", b.split.unseen_classes}};
  {
    std::ofstream out(dir / (stem + ".split.json"));
    out << split.dump() << '\n';
    if (!out) throw DataError("cannot write split for " + stem);
  }
  json manifest{{"name", b.name},
                {"features", stem + ".features.zspl"},
                {"labels", stem + ".labels.zspl"},
                {"attributes", stem + ".attributes.zspl"},
                {"split", stem + ".split.json"},
                {"class_names", b.class_names},
                {"backbone_tag", b.backbone_tag},
                {"feature_dim", b.feature_dim()},
                {"attribute_dim", b.attribute_dim()}};
  const auto path = dir / (stem + ".json");
  std::ofstream out(path);
  out << manifest.dump(2) << '\n';
  if (!out) throw DataError("cannot write manifest " + path.string());
  return path;
}

std::vector<ClassId> classes_present(const Labels& labels, std::span<const std::size_t> idx) {
  std::set<ClassId> s;
  for (std::size_t i : idx) s.insert(labels[i]);
  return {s.begin(), s.end()};
}

ValidationSplit validation_split(const DatasetBundle& b, double fraction, std::uint64_t seed) {
  ValidationSplit out;
  if (!b.split.val_idx.empty()) {
    std::set<std::size_t> val(b.split.val_idx.begin(), b.split.val_idx.end());
    for (std::size_t i : b.split.train_idx)
      if (!val.contains(i)) out.fit_idx.push_back(i);
    out.val_idx = b.split.val_idx;
    if (out.fit_idx.empty()) throw DataError("validation split leaves no training instances");
    return out;
  }
  std::map<ClassId, IndexList> per_class;
  for (std::size_t i : b.split.train_idx) per_class[b.labels[i]].push_back(i);
  std::mt19937_64 rng(seed);
  for (auto& [cls, idx] : per_class) {
    std::shuffle(idx.begin(), idx.end(), rng);
    std::size_t hold = static_cast<std::size_t>(fraction * static_cast<double>(idx.size()));
    if (idx.size() >= 2) hold = std::clamp<std::size_t>(hold, 1, idx.size() - 1);
    else hold = 0;
    out.val_idx.insert(out.val_idx.end(), idx.begin(), idx.begin() + static_cast<std::ptrdiff_t>(hold));
    out.fit_idx.insert(out.fit_idx.end(), idx.begin() + static_cast<std::ptrdiff_t>(hold), idx.end());
  }
  std::sort(out.fit_idx.begin(), out.fit_idx.end());
  std::sort(out.val_idx.begin(), out.val_idx.end());
  if (out.fit_idx.empty()) throw DataError("validation split leaves no training instances");
  return out;
}

std::string fnv1a_hex(std::string_view bytes) {
  std::uint64_t h = 0xcbf29ce484222325ull;
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 0x100000001b3ull;
  }
  std::ostringstream ss;
  ss << std::hex << std::setw(16) << std::setfill('0') << h;
  return ss.str();
}

}  // namespace zspeedl
