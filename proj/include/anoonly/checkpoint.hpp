#pragma once

#include <fstream>
#include <string>

#include <nlohmann/json.hpp>

#include "anoonly/model.hpp"

namespace anoonly {

inline void to_json(nlohmann::json& j, const ModelRecipe& r) {
  j = {{"input_dim", r.input_dim},
       {"hidden_dims", r.hidden_dims},
       {"rep_dim", r.rep_dim},
       {"activation", to_string(r.activation)},
       {"activate_last", r.activate_last},
       {"normalizer", r.normalizer.name()},
       {"classifier_bias", r.classifier_bias},
       {"bn_eps", r.bn_eps},
       {"bn_momentum", r.bn_momentum},
       {"seed", r.seed}};
}

inline void from_json(const nlohmann::json& j, ModelRecipe& r) {
  r.input_dim = j.value("input_dim", r.input_dim);
  r.hidden_dims = j.value("hidden_dims", r.hidden_dims);
  r.rep_dim = j.value("rep_dim", r.rep_dim);
  if (j.contains("activation")) r.activation = parse_activation(j.at("activation").get<std::string>());
  if (j.contains("normalizer")) r.normalizer = NormalizerKind::parse(j.at("normalizer").get<std::string>());
  r.activate_last = j.value("activate_last", r.activate_last);
  r.classifier_bias = j.value("classifier_bias", r.classifier_bias);
  r.bn_eps = j.value("bn_eps", r.bn_eps);
  r.bn_momentum = j.value("bn_momentum", r.bn_momentum);
  r.seed = j.value("seed", r.seed);
}

inline constexpr int kCheckpointVersion = 1;

/// Versioned JSON checkpoint: recipe, then every tensor in construction
/// order, then batch norm running statistics. nlohmann writes doubles with
/// round-trip precision, so save/load is exact.
inline nlohmann::json checkpoint_json(SSADModel& model) {
  nlohmann::json params = nlohmann::json::array();
  for (const auto& p : model.parameters()) {
    params.push_back({{"name", p.name}, {"rows", p.value->rows()}, {"cols", p.value->cols()},
                      {"values", p.value->values()}});
  }
  nlohmann::json j = {{"format", "anoonly-checkpoint"},
                      {"version", kCheckpointVersion},
                      {"recipe", model.recipe()},
                      {"parameters", params}};
  if (const auto* bn = model.batch_norm()) {
    j["running_mean"] = bn->running_mean.values();
    j["running_var"] = bn->running_var.values();
  }
  return j;
}

inline SSADModel model_from_checkpoint(const nlohmann::json& j) {
  if (j.value("format", "") != "anoonly-checkpoint") throw ConfigError("not an anoonly checkpoint");
  if (j.value("version", 0) != kCheckpointVersion) {
    throw ConfigError("unsupported checkpoint version " + std::to_string(j.value("version", 0)));
  }
  SSADModel model(j.at("recipe").get<ModelRecipe>());
  auto params = model.parameters();
  const auto& saved = j.at("parameters");
  if (saved.size() != params.size()) throw ConfigError("checkpoint tensor count mismatch");
  for (std::size_t k = 0; k < params.size(); ++k) {
    const auto& s = saved[k];
    if (s.at("name").get<std::string>() != params[k].name) {
      throw ConfigError("checkpoint tensor " + std::to_string(k) + " is '" + s.at("name").get<std::string>() +
                        "', expected '" + params[k].name + "'");
    }
    *params[k].value = Matrix(s.at("rows").get<std::size_t>(), s.at("cols").get<std::size_t>(),
                              s.at("values").get<std::vector<double>>());
    Matrix::require_same_shape(*params[k].value, *params[k].grad, "checkpoint");
  }
  if (auto* bn = model.batch_norm()) {
    bn->running_mean = Matrix(1, bn->dim(), j.at("running_mean").get<std::vector<double>>());
    bn->running_var = Matrix(1, bn->dim(), j.at("running_var").get<std::vector<double>>());
  }
  model.eval();
  return model;
}

inline void save_checkpoint(const std::string& path, SSADModel& model) {
  std::ofstream os(path);
  if (!os) throw ConfigError("cannot write " + path);
  os << checkpoint_json(model).dump() << '\n';
}

inline SSADModel load_checkpoint(const std::string& path) {
  std::ifstream is(path);
  if (!is) throw ConfigError("cannot read " + path);
  return model_from_checkpoint(nlohmann::json::parse(is));
}

}  // namespace anoonly
