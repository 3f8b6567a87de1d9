#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "zspeedl/matrix.hpp"

namespace zspeedl {

// Dense 0-based class identifier. Original dataset ids are remapped at
// conversion time; class_names keeps the mapping.
using ClassId = std::int32_t;
using Labels = std::vector<ClassId>;
using IndexList = std::vector<std::size_t>;

struct SplitSpec {
  IndexList train_idx;
  IndexList test_unseen_idx;
  IndexList test_seen_idx;
  IndexList val_idx;
  std::vector<ClassId> seen_classes;
  std::vector<ClassId> unseen_classes;

  friend bool operator==(const SplitSpec&, const SplitSpec&) = default;
};

struct DatasetBundle {
  std::string name;
  Matrix features;      // N x d
  Labels labels;        // N
  Matrix attributes;    // C_total x a, class-level
  SplitSpec split;
  std::vector<std::string> class_names;
  std::string backbone_tag;
  std::string manifest_hash;  // FNV-1a of the manifest bytes, empty for in-memory bundles

  std::size_t num_instances() const noexcept { return features.rows(); }
  std::size_t feature_dim() const noexcept { return features.cols(); }
  std::size_t attribute_dim() const noexcept { return attributes.cols(); }
  std::size_t num_classes() const noexcept { return attributes.rows(); }

  friend bool operator==(const DatasetBundle&, const DatasetBundle&) = default;
};

enum class SplitPart { train, test_unseen, test_seen, val };

std::string_view to_string(SplitPart part) noexcept;

struct SplitView {
  Matrix features;
  Labels labels;
};

// Throws DataError naming the first violated invariant.
void validate_split(const SplitSpec& split, const Labels& labels, std::size_t num_classes);
void validate(const DatasetBundle& bundle);

const IndexList& split_indices(const DatasetBundle& bundle, SplitPart part);

// Row subset in index order. Empty parts are an error unless allowed.
SplitView view_split(const DatasetBundle& bundle, SplitPart part, bool allow_empty = false);
SplitView view_rows(const DatasetBundle& bundle, std::span<const std::size_t> idx);

// Rows of the class-attribute matrix for the given classes, in that order.
Matrix class_attributes(const DatasetBundle& bundle, std::span<const ClassId> classes);

// Parses and fully validates a manifest and the arrays it references.
DatasetBundle load_manifest(const std::filesystem::path& manifest);

// Writes arrays, split JSON, and manifest `<dir>/<stem>.json`. Returns the manifest path.
std::filesystem::path save_bundle(const DatasetBundle& bundle, const std::filesystem::path& dir,
                                  const std::string& stem);

// Instances used for fitting and for hyper-parameter validation. Uses the
// split's val_idx when present (fit = train minus val); otherwise holds out
// `fraction` of each seen class's training instances, seeded.
struct ValidationSplit {
  IndexList fit_idx;
  IndexList val_idx;
};
ValidationSplit validation_split(const DatasetBundle& bundle, double fraction, std::uint64_t seed);

// Sorted, duplicate-free classes occurring among the given instances.
std::vector<ClassId> classes_present(const Labels& labels, std::span<const std::size_t> idx);

std::string fnv1a_hex(std::string_view bytes);

}  // namespace zspeedl
