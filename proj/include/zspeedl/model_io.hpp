#pragma once

#include <filesystem>

#include "json.hpp"
#include "zspeedl/predictor.hpp"

namespace zspeedl {

// Model file layout: magic "ZSPM", u32 version, u64 header length, UTF-8 JSON
// header, then one native array record per parameter in the order listed
// under "params" in the header.
//
// The header carries {method, dims, hyperparameters, seed,
// train_manifest_hash, params} plus any extra fields supplied by the caller.
struct ModelFile {
  Model model;
  nlohmann::json header;
};

void save_model(const std::filesystem::path& path, const Model& model, const nlohmann::json& meta);
ModelFile load_model(const std::filesystem::path& path);

// Hyper-parameters stored inside the model itself (gamma/lambda, ...).
nlohmann::json model_hyperparameters(const Model& model);

}  // namespace zspeedl
