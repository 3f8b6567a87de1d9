#pragma once

#include <span>
#include <vector>

#include "zspeedl/dataset.hpp"
#include "zspeedl/matrix.hpp"

namespace zspeedl {

// Candidate classes at inference time: ids plus their class-level attribute rows.
// Predictions are indices into this list.
struct Candidates {
  std::vector<ClassId> class_ids;
  Matrix attributes;  // class_ids.size() x a

  std::size_t size() const noexcept { return class_ids.size(); }
};

Candidates make_candidates(const DatasetBundle& bundle, std::span<const ClassId> classes);

// Maps candidate indices back to class ids.
Labels to_class_ids(const Candidates& c, std::span<const std::size_t> indices);

// Index of the smallest / largest value; ties resolve to the lowest index.
std::size_t argmin(std::span<const double> v) noexcept;
std::size_t argmax(std::span<const double> v) noexcept;

}  // namespace zspeedl
