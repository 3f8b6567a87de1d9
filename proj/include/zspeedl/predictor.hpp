#pragma once

#include <memory>
#include <span>
#include <string_view>
#include <variant>
#include <vector>

#include "zspeedl/candidates.hpp"
#include "zspeedl/dap.hpp"
#include "zspeedl/dem.hpp"
#include "zspeedl/eszsl.hpp"
#include "zspeedl/generative.hpp"
#include "zspeedl/sae.hpp"

namespace zspeedl {

enum class Method { dap, eszsl, sae, dem, gen_softmax, gen_decoder };

std::string_view to_string(Method m) noexcept;
Method parse_method(std::string_view name);
const std::vector<Method>& all_methods();

using Model = std::variant<EszslModel, SaeModel, DapModel, DemModel, GenerativeModel>;

Method method_of(const Model& m) noexcept;
std::size_t model_feature_dim(const Model& m) noexcept;

// Single-sample classifier bound to a model and a candidate set. Everything
// that depends only on the model and the candidates is prepared in the
// constructor; classify() performs no heap allocation. The model must outlive
// the predictor. Not thread-safe: use one predictor per thread.
class Predictor {
 public:
  virtual ~Predictor() = default;
  // Index into the candidate list; ties resolve to the lowest index.
  virtual std::size_t classify(std::span<const double> x) = 0;
  virtual std::size_t feature_dim() const noexcept = 0;
};

std::unique_ptr<Predictor> make_predictor(const Model& model, const Candidates& candidates);

std::vector<std::size_t> predict(const Model& model, const Matrix& x, const Candidates& candidates);
std::size_t predict_single(const Model& model, std::span<const double> x, const Candidates& candidates);

}  // namespace zspeedl
