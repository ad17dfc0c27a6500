#include "sig/config.hpp"

#include <cstdio>
#include <set>

#include "sig/error.hpp"
#include "sig/rng.hpp"

namespace sig::train {

std::string to_string(Regime r) {
  switch (r) {
    case Regime::sig: return "sig";
    case Regime::gan: return "gan";
    case Regime::gan_si: return "gan-si";
  }
  return "sig";
}

Regime parse_regime(const std::string& name) {
  if (name == "sig") return Regime::sig;
  if (name == "gan") return Regime::gan;
  if (name == "gan-si") return Regime::gan_si;
  throw ConfigError("unknown regime '" + name + "' (expected sig, gan or gan-si)");
}

std::string to_string(EvalDraw d) {
  switch (d) {
    case EvalDraw::automatic: return "auto";
    case EvalDraw::theta: return "theta";
    case EvalDraw::x: return "x";
  }
  return "auto";
}

EvalDraw parse_eval_draw(const std::string& name) {
  if (name == "auto") return EvalDraw::automatic;
  if (name == "theta") return EvalDraw::theta;
  if (name == "x") return EvalDraw::x;
  throw ConfigError("unknown eval draw '" + name + "' (expected auto, theta or x)");
}

model::ObservationModel TrainConfig::observation_model() const {
  if (observation == "poisson") return model::ObservationModel::poisson();
  if (observation == "gaussian") return model::ObservationModel::gaussian(sigma_obs);
  throw ConfigError("unknown observation model '" + observation + "'");
}

model::GeneratorConfig TrainConfig::generator_config() const {
  model::GeneratorConfig g;
  g.noise_dim = noise_dim;
  g.hidden = generator_hidden;
  g.output_dim = dataset.dim();
  g.output = observation == "poisson" ? model::OutputTransform::softplus : model::OutputTransform::identity;
  return g;
}

model::DiscriminatorConfig TrainConfig::discriminator_config() const {
  model::DiscriminatorConfig d;
  d.input_dim = dataset.dim();
  d.hidden = discriminator_hidden;
  return d;
}

EvalDraw TrainConfig::resolved_eval_draw() const {
  if (eval_draw != EvalDraw::automatic) return eval_draw;
  if (regime == Regime::gan) return EvalDraw::theta;
  return dataset.discrete() ? EvalDraw::x : EvalDraw::theta;
}

void validate(const TrainConfig& c) {
  if (c.batch_n == 0 || c.batch_m == 0) throw ConfigError("batch sizes N and M must be at least 1");
  if (c.train_size == 0) throw ConfigError("train_size must be positive");
  if (c.noise_dim == 0) throw ConfigError("noise_dim must be positive");
  for (auto w : c.generator_hidden)
    if (w == 0) throw ConfigError("generator hidden widths must be positive");
  for (auto w : c.discriminator_hidden)
    if (w == 0) throw ConfigError("discriminator hidden widths must be positive");
  if (c.observation != "gaussian" && c.observation != "poisson") {
    throw ConfigError("observation must be 'gaussian' or 'poisson', got '" + c.observation + "'");
  }
  if (c.observation == "gaussian" && !(c.sigma_obs > 0)) throw ConfigError("sigma_obs must be positive");
  if (c.observation == "poisson" && !c.dataset.discrete() && c.uses_observation()) {
    throw ConfigError("poisson observations need a discrete dataset");
  }
  if (!c.lambda.automatic && !(c.lambda.value >= 0)) throw ConfigError("lambda must be >= 0");
  if (c.lambda.interval == 0) throw ConfigError("lambda interval must be positive");
  if (!(c.lambda.ema_decay >= 0 && c.lambda.ema_decay < 1)) throw ConfigError("lambda ema_decay must be in [0, 1)");
  if (!(c.gan_weight >= 0)) throw ConfigError("gan_weight must be >= 0");
  if (!(c.adam.learning_rate >= 0) || !(c.adam.beta1 >= 0 && c.adam.beta1 < 1) ||
      !(c.adam.beta2 >= 0 && c.adam.beta2 < 1) || !(c.adam.epsilon > 0)) {
    throw ConfigError("invalid Adam settings");
  }
  if (c.eval_interval == 0) throw ConfigError("eval_interval must be positive");
  if (c.checkpoint_interval == 0) throw ConfigError("checkpoint_interval must be positive");
}

TrainConfig default_config(data::DatasetKind kind, Regime regime) {
  TrainConfig c;
  c.regime = regime;
  c.dataset = data::make_spec(kind);
  if (c.dataset.discrete()) {
    c.observation = "poisson";
  }
  return c;
}

nlohmann::json to_json(const TrainConfig& c) {
  nlohmann::json j;
  j["regime"] = to_string(c.regime);
  j["dataset"] = data::to_json(c.dataset);
  j["train_size"] = c.train_size;
  j["generator"] = {{"noise_dim", c.noise_dim}, {"hidden", c.generator_hidden}};
  j["discriminator"] = {{"hidden", c.discriminator_hidden}};
  j["observation"] = {{"kind", c.observation}, {"sigma", c.sigma_obs}};
  j["batch_n"] = c.batch_n;
  j["batch_m"] = c.batch_m;
  j["steps"] = c.steps;
  j["lambda"] = {{"mode", c.lambda.automatic ? "auto" : "fixed"},
                 {"value", c.lambda.value},
                 {"ema_decay", c.lambda.ema_decay},
                 {"interval", c.lambda.interval}};
  j["gan_weight"] = c.gan_weight;
  j["adam"] = {{"learning_rate", c.adam.learning_rate},
               {"beta1", c.adam.beta1},
               {"beta2", c.adam.beta2},
               {"epsilon", c.adam.epsilon}};
  j["seed"] = c.seed;
  j["eval_interval"] = c.eval_interval;
  j["eval_samples"] = c.eval_samples;
  j["eval_draw"] = to_string(c.eval_draw);
  j["checkpoint_interval"] = c.checkpoint_interval;
  j["out_dir"] = c.out_dir;
  return j;
}

namespace {

void reject_unknown(const nlohmann::json& j, std::initializer_list<const char*> allowed, const std::string& where) {
  if (!j.is_object()) throw ConfigError(where + " must be an object");
  std::set<std::string> ok(allowed.begin(), allowed.end());
  for (const auto& [key, _] : j.items()) {
    if (!ok.count(key)) throw ConfigError("unknown config key '" + where + key + "'");
  }
}

}  // namespace

TrainConfig config_from_json(const nlohmann::json& j) {
  try {
    reject_unknown(j,
                   {"regime", "dataset", "train_size", "generator", "discriminator", "observation", "batch_n",
                    "batch_m", "steps", "lambda", "gan_weight", "adam", "seed", "eval_interval", "eval_samples",
                    "eval_draw", "checkpoint_interval", "out_dir"},
                   "");
    TrainConfig c;
    if (j.contains("dataset")) {
      c = default_config(data::parse_dataset_kind(j.at("dataset").at("kind").get<std::string>()), Regime::sig);
      c.dataset = data::spec_from_json(j.at("dataset"));
    }
    if (j.contains("regime")) c.regime = parse_regime(j.at("regime").get<std::string>());
    c.train_size = j.value("train_size", c.train_size);
    if (j.contains("generator")) {
      const auto& g = j.at("generator");
      reject_unknown(g, {"noise_dim", "hidden"}, "generator.");
      c.noise_dim = g.value("noise_dim", c.noise_dim);
      c.generator_hidden = g.value("hidden", c.generator_hidden);
    }
    if (j.contains("discriminator")) {
      const auto& d = j.at("discriminator");
      reject_unknown(d, {"hidden"}, "discriminator.");
      c.discriminator_hidden = d.value("hidden", c.discriminator_hidden);
    }
    if (j.contains("observation")) {
      const auto& o = j.at("observation");
      reject_unknown(o, {"kind", "sigma"}, "observation.");
      c.observation = o.value("kind", c.observation);
      c.sigma_obs = o.value("sigma", c.sigma_obs);
    }
    c.batch_n = j.value("batch_n", c.batch_n);
    c.batch_m = j.value("batch_m", c.batch_m);
    c.steps = j.value("steps", c.steps);
    if (j.contains("lambda")) {
      const auto& l = j.at("lambda");
      reject_unknown(l, {"mode", "value", "ema_decay", "interval"}, "lambda.");
      const std::string mode = l.value("mode", std::string(c.lambda.automatic ? "auto" : "fixed"));
      if (mode != "auto" && mode != "fixed") throw ConfigError("lambda.mode must be 'auto' or 'fixed'");
      c.lambda.automatic = mode == "auto";
      c.lambda.value = l.value("value", c.lambda.value);
      c.lambda.ema_decay = l.value("ema_decay", c.lambda.ema_decay);
      c.lambda.interval = l.value("interval", c.lambda.interval);
    }
    c.gan_weight = j.value("gan_weight", c.gan_weight);
    if (j.contains("adam")) {
      const auto& a = j.at("adam");
      reject_unknown(a, {"learning_rate", "beta1", "beta2", "epsilon"}, "adam.");
      c.adam.learning_rate = a.value("learning_rate", c.adam.learning_rate);
      c.adam.beta1 = a.value("beta1", c.adam.beta1);
      c.adam.beta2 = a.value("beta2", c.adam.beta2);
      c.adam.epsilon = a.value("epsilon", c.adam.epsilon);
    }
    c.seed = j.value("seed", c.seed);
    c.eval_interval = j.value("eval_interval", c.eval_interval);
    c.eval_samples = j.value("eval_samples", c.eval_samples);
    if (j.contains("eval_draw")) c.eval_draw = parse_eval_draw(j.at("eval_draw").get<std::string>());
    c.checkpoint_interval = j.value("checkpoint_interval", c.checkpoint_interval);
    c.out_dir = j.value("out_dir", c.out_dir);
    validate(c);
    return c;
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(std::string("config: ") + e.what());
  }
}

std::string config_hash(const TrainConfig& c) {
  auto j = to_json(c);
  j.erase("out_dir");
  char buf[17];
  std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(fnv1a(j.dump())));
  return buf;
}

}  // namespace sig::train
