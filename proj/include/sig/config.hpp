#pragma once

#include <cstdint>
#include <string>

#include <json.hpp>

#include "sig/adam.hpp"
#include "sig/datasets.hpp"
#include "sig/mlp.hpp"
#include "sig/observation.hpp"

namespace sig::train {

enum class Regime { sig, gan, gan_si };
std::string to_string(Regime r);
Regime parse_regime(const std::string& name);

// What evaluation draws from the trained model: the mixing variable theta,
// a full observation x ~ p(x | theta), or automatic (x for discrete data,
// theta for continuous data).
enum class EvalDraw { automatic, theta, x };
std::string to_string(EvalDraw d);
EvalDraw parse_eval_draw(const std::string& name);

struct LambdaConfig {
  bool automatic = true;
  double value = 1.0;  // used when !automatic
  double ema_decay = 0.99;
  std::uint64_t interval = 100;
};

// Every field of a training run. Loaded from / saved to JSON; see README for
// the schema.
struct TrainConfig {
  Regime regime = Regime::sig;
  data::DatasetSpec dataset = data::make_spec(data::DatasetKind::gmm_grid);
  std::size_t train_size = 100000;

  std::size_t noise_dim = 10;
  std::vector<std::size_t> generator_hidden = {100, 100};
  std::vector<std::size_t> discriminator_hidden = {100};

  std::string observation = "gaussian";  // gaussian | poisson
  double sigma_obs = 0.1;

  std::size_t batch_n = 64;
  std::size_t batch_m = 64;
  std::uint64_t steps = 20000;

  LambdaConfig lambda;
  double gan_weight = 1.0;
  ad::AdamConfig adam;

  std::uint64_t seed = 0;
  std::uint64_t eval_interval = 5000;
  std::size_t eval_samples = 50000;
  EvalDraw eval_draw = EvalDraw::automatic;
  std::uint64_t checkpoint_interval = 1000;
  std::string out_dir;

  bool uses_discriminator() const { return regime != Regime::sig; }
  bool uses_observation() const { return regime != Regime::gan; }
  model::ObservationModel observation_model() const;
  model::GeneratorConfig generator_config() const;
  model::DiscriminatorConfig discriminator_config() const;
  EvalDraw resolved_eval_draw() const;
};

// Throws ConfigError on an inconsistent configuration.
void validate(const TrainConfig& c);

// Defaults per dataset: Poisson observations (softplus generator output) for
// discrete data, Gaussian sigma_obs = 0.1 for continuous data.
TrainConfig default_config(data::DatasetKind kind, Regime regime);

nlohmann::json to_json(const TrainConfig& c);
// Unknown keys are rejected. Missing keys keep defaults.
TrainConfig config_from_json(const nlohmann::json& j);

// Stable fingerprint of everything but out_dir.
std::string config_hash(const TrainConfig& c);

}  // namespace sig::train
