#include "zspeedl/model_io.hpp"

#include <array>
#include <cstring>
#include <fstream>
#include <map>
#include <string>

#include "zspeedl/array_io.hpp"
#include "zspeedl/errors.hpp"

namespace zspeedl {

using nlohmann::json;

namespace {

constexpr std::array<char, 4> kModelMagic{'Z', 'S', 'P', 'M'};
constexpr std::uint32_t kModelVersion = 1;

using Params = std::vector<std::pair<std::string, Matrix>>;

Matrix row_vector(const std::vector<double>& v) { return Matrix(1, v.size(), v); }

std::vector<double> as_vector(const Matrix& m) { return {m.values().begin(), m.values().end()}; }

struct Encoded {
  json dims;
  json hyper;
  json extra;
  Params params;
};

Encoded encode(const Model& model) {
  struct Visitor {
    Encoded operator()(const EszslModel& m) const {
      return {{{"feature_dim", m.v.rows()}, {"attribute_dim", m.v.cols()}},
              {{"gamma", m.gamma}, {"lambda", m.lambda}},
              json::object(),
              {{"V", m.v}}};
    }
    Encoded operator()(const SaeModel& m) const {
      return {{{"feature_dim", m.w.cols()}, {"attribute_dim", m.w.rows()}},
              {{"lambda", m.lambda}, {"direction", to_string(m.direction)}, {"metric", numerics::to_string(m.metric)}},
              {{"sylvester_residual", m.residual}},
              {{"W", m.w}}};
    }
    Encoded operator()(const DapModel& m) const {
      return {{{"feature_dim", m.feature_dim()}, {"attribute_dim", m.attribute_dim()}},
              json::object(),
              {{"excluded_attributes", m.excluded}},
              {{"weights", m.weights}, {"priors", row_vector(m.priors)}, {"thresholds", row_vector(m.thresholds)}}};
    }
    Encoded operator()(const DemModel& m) const {
      return {{{"feature_dim", m.feature_dim()}, {"attribute_dim", m.attribute_dim()}, {"hidden_dim", m.hidden_dim()}},
              {{"hidden", m.hidden_dim()}},
              json::object(),
              {{"W1", m.w1},
               {"b1", row_vector(m.b1)},
               {"W2", m.w2},
               {"b2", row_vector(m.b2)},
               {"loss_history", row_vector(m.loss_history)}}};
    }
    Encoded operator()(const GenerativeModel& g) const {
      Encoded e;
      e.dims = {{"classifier_input_dim", g.classifier.input_dim()}, {"num_classes", g.classifier.class_ids.size()}};
      e.hyper = json::object();
      e.extra = {{"class_ids", g.classifier.class_ids}};
      e.params = {{"clf_W", g.classifier.w}, {"clf_b", row_vector(g.classifier.b)}};
      if (g.decoder) {
        e.dims["feature_dim"] = g.decoder->feature_dim();
        e.dims["attribute_dim"] = g.decoder->attribute_dim();
        e.dims["decoder_hidden_dim"] = g.decoder->hidden_dim();
        e.params.emplace_back("dec_W1", g.decoder->w1);
        e.params.emplace_back("dec_b1", row_vector(g.decoder->b1));
        e.params.emplace_back("dec_W2", g.decoder->w2);
        e.params.emplace_back("dec_b2", row_vector(g.decoder->b2));
      } else {
        e.dims["feature_dim"] = g.classifier.input_dim();
      }
      return e;
    }
  };
  return std::visit(Visitor{}, model);
}

const Matrix& param(const std::map<std::string, Matrix>& p, const std::string& name) {
  auto it = p.find(name);
  if (it == p.end()) throw DataError("model file lacks parameter '" + name + "'");
  return it->second;
}

Model decode(Method method, const json& h, const std::map<std::string, Matrix>& p) {
  switch (method) {
    case Method::eszsl: {
      EszslModel m{param(p, "V"), h.at("hyperparameters").at("gamma").get<double>(),
                   h.at("hyperparameters").at("lambda").get<double>()};
      return m;
    }
    case Method::sae: {
      SaeModel m;
      m.w = param(p, "W");
      const json& hp = h.at("hyperparameters");
      m.lambda = hp.at("lambda").get<double>();
      m.direction = parse_sae_direction(hp.at("direction").get<std::string>());
      m.metric = numerics::parse_metric(hp.at("metric").get<std::string>());
      m.residual = h.value("sylvester_residual", 0.0);
      return m;
    }
    case Method::dap: {
      DapModel m;
      m.weights = param(p, "weights");
      m.priors = as_vector(param(p, "priors"));
      m.thresholds = as_vector(param(p, "thresholds"));
      m.excluded = h.at("excluded_attributes").get<std::vector<std::size_t>>();
      return m;
    }
    case Method::dem: {
      DemModel m;
      m.w1 = param(p, "W1");
      m.b1 = as_vector(param(p, "b1"));
      m.w2 = param(p, "W2");
      m.b2 = as_vector(param(p, "b2"));
      m.loss_history = as_vector(param(p, "loss_history"));
      return m;
    }
    case Method::gen_softmax:
    case Method::gen_decoder: {
      GenerativeModel g;
      g.classifier.w = param(p, "clf_W");
      g.classifier.b = as_vector(param(p, "clf_b"));
      g.classifier.class_ids = h.at("class_ids").get<std::vector<ClassId>>();
      if (method == Method::gen_decoder)
        g.decoder = DecoderModel{param(p, "dec_W1"), as_vector(param(p, "dec_b1")), param(p, "dec_W2"),
                                 as_vector(param(p, "dec_b2"))};
      return g;
    }
  }
  throw DataError("unsupported model method");
}

}  // namespace

json model_hyperparameters(const Model& model) { return encode(model).hyper; }

void save_model(const std::filesystem::path& path, const Model& model, const json& meta) {
  Encoded e = encode(model);
  json header = meta.is_object() ? meta : json::object();
  header["method"] = to_string(method_of(model));
  header["dims"] = e.dims;
  json hyper = header.value("hyperparameters", json::object());
  hyper.update(e.hyper);
  header["hyperparameters"] = hyper;
  header.update(e.extra);
  if (!header.contains("seed")) header["seed"] = nullptr;
  if (!header.contains("train_manifest_hash")) header["train_manifest_hash"] = nullptr;
  json names = json::array();
  for (const auto& [name, _] : e.params) names.push_back(name);
  header["params"] = names;

  const std::string text = header.dump();
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw DataError("cannot write model file " + path.string());
  out.write(kModelMagic.data(), 4);
  unsigned char buf[12];
  for (int i = 0; i < 4; ++i) buf[i] = static_cast<unsigned char>(kModelVersion >> (8 * i));
  const std::uint64_t len = text.size();
  for (int i = 0; i < 8; ++i) buf[4 + i] = static_cast<unsigned char>(len >> (8 * i));
  out.write(reinterpret_cast<const char*>(buf), sizeof buf);
  out.write(text.data(), static_cast<std::streamsize>(text.size()));
  for (const auto& [name, m] : e.params) write_array(m, out);
  out.flush();
  if (!out) throw DataError("cannot write model file " + path.string());
}

ModelFile load_model(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open model file " + path.string());
  char magic[4];
  unsigned char buf[12];
  in.read(magic, 4);
  in.read(reinterpret_cast<char*>(buf), sizeof buf);
  if (!in || std::memcmp(magic, kModelMagic.data(), 4) != 0)
    throw DataError("not a model file: " + path.string());
  std::uint32_t version = 0;
  for (int i = 0; i < 4; ++i) version |= static_cast<std::uint32_t>(buf[i]) << (8 * i);
  if (version != kModelVersion) throw DataError("unsupported model file version in " + path.string());
  std::uint64_t len = 0;
  for (int i = 0; i < 8; ++i) len |= static_cast<std::uint64_t>(buf[4 + i]) << (8 * i);
  if (len > (1u << 30)) throw DataError("model header too large in " + path.string());
  std::string text(len, '\0');
  in.read(text.data(), static_cast<std::streamsize>(len));
  if (!in) throw DataError("truncated model header in " + path.string());

  ModelFile f;
  try {
    f.header = json::parse(text);
    std::map<std::string, Matrix> params;
    for (const auto& name : f.header.at("params"))
      params[name.get<std::string>()] = read_array(in, path.string() + ":" + name.get<std::string>());
    f.model = decode(parse_method(f.header.at("method").get<std::string>()), f.header, params);
  } catch (const json::exception& e) {
    throw DataError("malformed model header in " + path.string() + ": " + e.what());
  }
  return f;
}

}  // namespace zspeedl
