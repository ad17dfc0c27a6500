#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>

#include "sig/adam.hpp"
#include "sig/checkpoint.hpp"
#include "sig/config.hpp"
#include "sig/losses.hpp"
#include "sig/mlp.hpp"
#include "sig/points.hpp"

namespace sig::train {

// Loss components of one step, all evaluated at the pre-update parameters.
struct StepRecord {
  std::uint64_t step = 0;
  double total = 0;      // generator objective
  double gan_term = 0;
  double sig_term = 0;
  double lambda = 0;
  double disc_loss = 0;  // 0 for the sig regime
};

struct Batch {
  Tensor x;  // [N x dx]
  Tensor z;  // [M x noise_dim]
};

// Owns the training set, networks and optimizer state of one run. Every step
// draws its minibatch from a stream derived from (seed, step index), so a run
// restored from a checkpoint continues bit-identically.
class Trainer {
 public:
  explicit Trainer(TrainConfig config);

  const TrainConfig& config() const { return config_; }
  std::uint64_t steps_done() const { return steps_done_; }
  const Points& training_set() const { return train_set_; }

  // One step of the configured regime.
  StepRecord step();

  // Discriminator gradient, then generator gradient, then both Adam updates.
  StepRecord train_step_gan_si();
  // train_step_gan_si without the SIG term.
  StepRecord train_step_gan();
  StepRecord train_step_sig();

  Batch draw_batch(std::uint64_t step) const;

  model::Mlp& generator() { return generator_; }
  model::Mlp& discriminator() { return discriminator_; }
  const model::Mlp& generator() const { return generator_; }
  const model::Mlp& discriminator() const { return discriminator_; }
  const loss::LambdaController& lambda_controller() const { return lambda_; }

  // `count` samples from the current model with a dedicated stream.
  Points generate(std::size_t count, std::uint64_t stream_key, EvalDraw draw);

  model::Checkpoint to_checkpoint() const;
  // Throws ShapeError naming both architectures when they differ.
  void restore(const model::Checkpoint& ckpt);

 private:
  StepRecord adversarial_step(bool with_sig);
  void guard(std::uint64_t step, const Batch& batch, const char* what, double value) const;

  TrainConfig config_;
  std::optional<model::ObservationModel> obs_;
  Points train_set_;
  model::Mlp generator_;
  model::Mlp discriminator_;
  ad::AdamState gen_adam_;
  ad::AdamState disc_adam_;
  loss::LambdaController lambda_;
  std::uint64_t steps_done_ = 0;
};

// Generator (and its observation model) rebuilt from a checkpoint directory,
// for sampling without the training set.
struct LoadedGenerator {
  TrainConfig config;
  model::Mlp generator;
  std::uint64_t step = 0;
};
LoadedGenerator load_generator(const std::filesystem::path& checkpoint_dir);

// Draws from a generator: theta rows, or x ~ p(x | theta) when draw == x.
Points sample_generator(model::Mlp& generator, const TrainConfig& config, std::size_t count, Rng rng,
                        EvalDraw draw);

}  // namespace sig::train
