#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "json.hpp"
#include "zspeedl/dataset.hpp"
#include "zspeedl/eval.hpp"
#include "zspeedl/predictor.hpp"

namespace zspeedl {

using Hyperparameters = std::map<std::string, std::string>;

enum class Setting { zsl, gzsl };
std::string_view to_string(Setting s) noexcept;
Setting parse_setting(std::string_view name);

// Keys accepted by each method. Unknown keys or unparsable values raise UsageError.
const std::vector<std::string>& hyperparameter_keys(Method m);
void validate_hyperparameters(Method m, const Hyperparameters& hp);

// Search grids used when a closed-form method's regularizers are not given.
const std::vector<double>& eszsl_grid();
const std::vector<double>& sae_grid();

inline constexpr double kValidationFraction = 0.2;

struct TrainResult {
  Model model;
  nlohmann::json hyperparameters;           // values actually used
  std::optional<double> validation_mca;     // set when a grid search ran
};

// Fits `method` on the training split. Closed-form methods without explicit
// regularizers are grid-searched on a validation split, then refit on the
// whole training split.
TrainResult train_method(Method method, const DatasetBundle& bundle, const Hyperparameters& hp, std::uint64_t seed);

// Restricted setting: unseen test instances against unseen candidates.
double zsl_mca(const Model& model, const DatasetBundle& bundle);

// Generalized setting: seen and unseen test instances against all classes.
GzslScores gzsl_scores(const Model& model, const DatasetBundle& bundle);

// Result record; accuracies as percentages with two decimals.
nlohmann::json evaluate(const Model& model, const DatasetBundle& bundle, Setting setting);

double round2(double v);

}  // namespace zspeedl
