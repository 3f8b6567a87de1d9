#include "zspeedl/experiment.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <set>

#include "zspeedl/errors.hpp"

namespace zspeedl {

using nlohmann::json;

namespace {

double get_real(const Hyperparameters& hp, const std::string& key, double fallback) {
  auto it = hp.find(key);
  if (it == hp.end()) return fallback;
  try {
    std::size_t used = 0;
    const double v = std::stod(it->second, &used);
    if (used != it->second.size() || !std::isfinite(v)) throw std::invalid_argument(key);
    return v;
  } catch (const std::exception&) {
    throw UsageError("hyperparameter '" + key + "' is not a number: '" + it->second + "'");
  }
}

std::size_t get_count(const Hyperparameters& hp, const std::string& key, std::size_t fallback) {
  auto it = hp.find(key);
  if (it == hp.end()) return fallback;
  std::size_t v = 0;
  const auto* end = it->second.data() + it->second.size();
  auto [ptr, ec] = std::from_chars(it->second.data(), end, v);
  if (ec != std::errc{} || ptr != end)
    throw UsageError("hyperparameter '" + key + "' is not a count: '" + it->second + "'");
  return v;
}

std::optional<double> get_optional(const Hyperparameters& hp, const std::string& key) {
  if (!hp.contains(key)) return std::nullopt;
  return get_real(hp, key, 0.0);
}

double validation_score(const Model& model, const DatasetBundle& bundle, const IndexList& val_idx) {
  const auto classes = classes_present(bundle.labels, val_idx);
  const Candidates cand = make_candidates(bundle, classes);
  const SplitView val = view_rows(bundle, val_idx);
  const Labels pred = to_class_ids(cand, predict(model, val.features, cand));
  return mca(pred, val.labels, classes);
}

std::vector<ClassId> all_classes(const DatasetBundle& b) {
  std::set<ClassId> s(b.split.seen_classes.begin(), b.split.seen_classes.end());
  s.insert(b.split.unseen_classes.begin(), b.split.unseen_classes.end());
  return {s.begin(), s.end()};
}

Labels classify(const Model& model, const DatasetBundle& bundle, SplitPart part, const Candidates& cand) {
  const SplitView v = view_split(bundle, part);
  return to_class_ids(cand, predict(model, v.features, cand));
}

SoftmaxOptions softmax_options(const Hyperparameters& hp, std::uint64_t seed) {
  SoftmaxOptions o;
  o.lr = get_real(hp, "lr", o.lr);
  o.l2 = get_real(hp, "l2", o.l2);
  o.epochs = get_count(hp, "epochs", o.epochs);
  o.batch = get_count(hp, "batch", o.batch);
  o.seed = seed;
  return o;
}

}  // namespace

std::string_view to_string(Setting s) noexcept { return s == Setting::zsl ? "zsl" : "gzsl"; }

Setting parse_setting(std::string_view name) {
  if (name == "zsl") return Setting::zsl;
  if (name == "gzsl") return Setting::gzsl;
  throw UsageError("unknown setting '" + std::string(name) + "' (expected zsl or gzsl)");
}

const std::vector<std::string>& hyperparameter_keys(Method m) {
  static const std::vector<std::string> eszsl{"gamma", "lambda"};
  static const std::vector<std::string> sae{"lambda", "direction", "metric"};
  static const std::vector<std::string> dap{"l2", "epochs", "lr"};
  static const std::vector<std::string> dem{"hidden", "lr", "l2", "epochs", "batch"};
  static const std::vector<std::string> gen{"ridge", "n_per_class", "lr", "l2", "epochs", "batch"};
  static const std::vector<std::string> gen_dec{"ridge",  "n_per_class", "lr",     "l2",        "epochs",
                                                "batch",  "dec_hidden",  "dec_lr", "dec_epochs"};
  switch (m) {
    case Method::eszsl: return eszsl;
    case Method::sae: return sae;
    case Method::dap: return dap;
    case Method::dem: return dem;
    case Method::gen_softmax: return gen;
    case Method::gen_decoder: return gen_dec;
  }
  return eszsl;
}

void validate_hyperparameters(Method m, const Hyperparameters& hp) {
  const auto& keys = hyperparameter_keys(m);
  for (const auto& [k, v] : hp) {
    if (std::find(keys.begin(), keys.end(), k) == keys.end())
      throw UsageError("hyperparameter '" + k + "' is not valid for method " + std::string(to_string(m)));
    if (k == "direction") {
      parse_sae_direction(v);
    } else if (k == "metric") {
      numerics::parse_metric(v);
    } else if (k == "epochs" || k == "batch" || k == "hidden" || k == "n_per_class" || k == "dec_hidden" ||
               k == "dec_epochs") {
      get_count(hp, k, 0);
    } else {
      const double x = get_real(hp, k, 0.0);
      if (x < 0.0) throw UsageError("hyperparameter '" + k + "' must be nonnegative");
    }
  }
}

const std::vector<double>& eszsl_grid() {
  static const std::vector<double> g{1e-3, 1e-2, 1e-1, 1e0, 1e1, 1e2, 1e3};
  return g;
}

const std::vector<double>& sae_grid() {
  // Half-decade steps from 0.05 to 500.
  static const std::vector<double> g = [] {
    std::vector<double> v;
    for (int i = 0; i <= 8; ++i) v.push_back(0.05 * std::pow(10.0, 0.5 * i));
    return v;
  }();
  return g;
}

TrainResult train_method(Method method, const DatasetBundle& bundle, const Hyperparameters& hp, std::uint64_t seed) {
  validate_hyperparameters(method, hp);
  if (bundle.split.train_idx.empty()) throw DataError("empty training split");
  const IndexList& train = bundle.split.train_idx;
  TrainResult out;

  switch (method) {
    case Method::eszsl: {
      auto gamma = get_optional(hp, "gamma");
      auto lambda = get_optional(hp, "lambda");
      if (!gamma || !lambda) {
        const ValidationSplit vs = validation_split(bundle, kValidationFraction, seed);
        const EszslSolver solver(bundle, vs.fit_idx);
        double best = -1.0;
        double best_g = 0.0, best_l = 0.0;
        for (double g : gamma ? std::vector<double>{*gamma} : eszsl_grid())
          for (double l : lambda ? std::vector<double>{*lambda} : eszsl_grid()) {
            const double score = validation_score(Model{solver.fit(g, l)}, bundle, vs.val_idx);
            if (score > best) {
              best = score;
              best_g = g;
              best_l = l;
            }
          }
        gamma = best_g;
        lambda = best_l;
        out.validation_mca = best;
      }
      out.model = EszslSolver(bundle, train).fit(*gamma, *lambda);
      out.hyperparameters = {{"gamma", *gamma}, {"lambda", *lambda}};
      break;
    }
    case Method::sae: {
      auto lambda = get_optional(hp, "lambda");
      const SaeDirection direction =
          hp.contains("direction") ? parse_sae_direction(hp.at("direction")) : SaeDirection::feature_to_semantic;
      const numerics::Metric metric =
          hp.contains("metric") ? numerics::parse_metric(hp.at("metric")) : numerics::Metric::cosine;
      auto configure = [&](SaeModel m) {
        m.direction = direction;
        m.metric = metric;
        return m;
      };
      if (!lambda) {
        const ValidationSplit vs = validation_split(bundle, kValidationFraction, seed);
        const SaeSolver solver(bundle, vs.fit_idx);
        double best = -1.0;
        for (double l : sae_grid()) {
          const double score = validation_score(Model{configure(solver.fit(l))}, bundle, vs.val_idx);
          if (score > best) {
            best = score;
            lambda = l;
          }
        }
        out.validation_mca = best;
      }
      SaeModel m = configure(SaeSolver(bundle, train).fit(*lambda));
      out.hyperparameters = {{"lambda", *lambda},
                             {"direction", to_string(direction)},
                             {"metric", numerics::to_string(metric)},
                             {"sylvester_residual", m.residual}};
      out.model = std::move(m);
      break;
    }
    case Method::dap: {
      const double l2 = get_real(hp, "l2", 1e-4);
      const std::size_t epochs = get_count(hp, "epochs", 20);
      const double lr = get_real(hp, "lr", 1e-3);
      out.model = dap_fit(bundle, l2, epochs, lr, seed);
      out.hyperparameters = {{"l2", l2}, {"epochs", epochs}, {"lr", lr}};
      break;
    }
    case Method::dem: {
      DemOptions o;
      o.hidden = get_count(hp, "hidden", o.hidden);
      o.lr = get_real(hp, "lr", o.lr);
      o.l2 = get_real(hp, "l2", o.l2);
      o.epochs = get_count(hp, "epochs", o.epochs);
      o.batch = get_count(hp, "batch", o.batch);
      o.seed = seed;
      out.model = dem_fit(bundle, o);
      out.hyperparameters = {{"hidden", o.hidden}, {"lr", o.lr}, {"l2", o.l2}, {"epochs", o.epochs}, {"batch", o.batch}};
      break;
    }
    case Method::gen_softmax:
    case Method::gen_decoder: {
      GenerativeOptions o;
      o.ridge = get_real(hp, "ridge", o.ridge);
      o.n_per_class = get_count(hp, "n_per_class", o.n_per_class);
      o.softmax = softmax_options(hp, seed);
      o.use_decoder = method == Method::gen_decoder;
      o.decoder.hidden = get_count(hp, "dec_hidden", o.decoder.hidden);
      o.decoder.lr = get_real(hp, "dec_lr", o.decoder.lr);
      o.decoder.epochs = get_count(hp, "dec_epochs", o.decoder.epochs);
      o.seed = seed;
      if (bundle.split.unseen_classes.empty()) throw DataError("generative methods need unseen classes");
      out.model = generative_fit(bundle, train, bundle.split.unseen_classes, o);
      out.hyperparameters = {{"ridge", o.ridge},
                             {"n_per_class", o.n_per_class},
                             {"lr", o.softmax.lr},
                             {"l2", o.softmax.l2},
                             {"epochs", o.softmax.epochs},
                             {"batch", o.softmax.batch}};
      if (o.use_decoder) {
        out.hyperparameters["dec_hidden"] = o.decoder.hidden;
        out.hyperparameters["dec_lr"] = o.decoder.lr;
        out.hyperparameters["dec_epochs"] = o.decoder.epochs;
      }
      break;
    }
  }
  return out;
}

double zsl_mca(const Model& model, const DatasetBundle& bundle) {
  const auto& unseen = bundle.split.unseen_classes;
  const Candidates cand = make_candidates(bundle, unseen);
  const Labels pred = classify(model, bundle, SplitPart::test_unseen, cand);
  return mca(pred, view_split(bundle, SplitPart::test_unseen).labels, unseen);
}

GzslScores gzsl_scores(const Model& model, const DatasetBundle& bundle) {
  if (bundle.split.test_seen_idx.empty()) throw DataError("gzsl: empty seen test split");
  if (bundle.split.test_unseen_idx.empty()) throw DataError("gzsl: empty unseen test split");
  const Candidates cand = make_candidates(bundle, all_classes(bundle));
  const Labels pred_seen = classify(model, bundle, SplitPart::test_seen, cand);
  const Labels pred_unseen = classify(model, bundle, SplitPart::test_unseen, cand);
  Labels lab_seen, lab_unseen;
  for (std::size_t i : bundle.split.test_seen_idx) lab_seen.push_back(bundle.labels[i]);
  for (std::size_t i : bundle.split.test_unseen_idx) lab_unseen.push_back(bundle.labels[i]);
  return gzsl_eval(pred_seen, lab_seen, pred_unseen, lab_unseen, bundle.split.seen_classes,
                   bundle.split.unseen_classes);
}

double round2(double v) { return std::round(v * 100.0) / 100.0; }

json evaluate(const Model& model, const DatasetBundle& bundle, Setting setting) {
  json r{{"method", to_string(method_of(model))},
         {"backbone", bundle.backbone_tag},
         {"dataset", bundle.name},
         {"setting", to_string(setting)}};
  if (setting == Setting::zsl) {
    r["mca"] = round2(100.0 * zsl_mca(model, bundle));
  } else {
    const GzslScores s = gzsl_scores(model, bundle);
    r["u"] = round2(100.0 * s.acc_unseen);
    r["s"] = round2(100.0 * s.acc_seen);
    r["h"] = round2(100.0 * s.harmonic_mean);
  }
  return r;
}

}  // namespace zspeedl
