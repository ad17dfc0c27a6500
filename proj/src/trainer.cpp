#include "sig/trainer.hpp"

#include <cmath>

#include "sig/datasets.hpp"
#include "sig/error.hpp"
#include "sig/io.hpp"

namespace sig::train {
namespace {

constexpr std::size_t kSampleChunk = 4096;

std::vector<ad::Parameter*> params_of(model::Mlp& net) { return net.parameters(); }

void append_adam(const std::string& prefix, const model::Mlp& net, const ad::AdamState& st, model::Checkpoint& c) {
  const auto params = net.parameters();
  for (std::size_t k = 0; k < params.size(); ++k) {
    c.tensors.push_back({prefix + ".m." + params[k]->name, st.first_moment[k]});
    c.tensors.push_back({prefix + ".v." + params[k]->name, st.second_moment[k]});
  }
}

void load_adam(const std::string& prefix, model::Mlp& net, ad::AdamState& st, const model::Checkpoint& c,
               std::uint64_t step) {
  const auto params = net.parameters();
  st = ad::make_adam_state(params);
  st.step = step;
  for (std::size_t k = 0; k < params.size(); ++k) {
    st.first_moment[k] = c.get(prefix + ".m." + params[k]->name);
    st.second_moment[k] = c.get(prefix + ".v." + params[k]->name);
    if (st.first_moment[k].shape() != params[k]->value.shape() ||
        st.second_moment[k].shape() != params[k]->value.shape()) {
      throw ShapeError("checkpoint optimizer state for '" + params[k]->name + "' has shape " +
                       shape_string(st.first_moment[k].shape()) + ", parameter has " +
                       shape_string(params[k]->value.shape()));
    }
  }
}

}  // namespace

Trainer::Trainer(TrainConfig config)
    : config_(std::move(config)),
      lambda_(config_.lambda.ema_decay, config_.lambda.interval) {
  validate(config_);
  if (config_.uses_observation()) obs_ = config_.observation_model();

  const Rng root(config_.seed);
  Rng data_rng = root.derive("train-set");
  train_set_ = data::sample_dataset(data_rng, config_.dataset, config_.train_size);
  if (obs_) obs_->validate_x(train_set_.coords);

  generator_ = model::make_generator(config_.generator_config());
  Rng gen_init = root.derive("generator-init");
  generator_.initialize(gen_init);
  gen_adam_ = ad::make_adam_state(params_of(generator_));

  if (config_.uses_discriminator()) {
    discriminator_ = model::make_discriminator(config_.discriminator_config());
    Rng disc_init = root.derive("discriminator-init");
    discriminator_.initialize(disc_init);
    disc_adam_ = ad::make_adam_state(params_of(discriminator_));
  }
}

Batch Trainer::draw_batch(std::uint64_t step) const {
  Rng rng = Rng(config_.seed).derive("step", step);
  const std::size_t dx = train_set_.dim;
  std::vector<double> x(config_.batch_n * dx);
  for (std::size_t i = 0; i < config_.batch_n; ++i) {
    const auto row = train_set_.row(rng.index(train_set_.size()));
    std::copy(row.begin(), row.end(), x.begin() + static_cast<std::ptrdiff_t>(i * dx));
  }
  Batch b;
  b.x = Tensor(Shape{config_.batch_n, dx}, std::move(x));
  b.z = data::sample_noise(rng, config_.batch_m, config_.noise_dim);
  return b;
}

void Trainer::guard(std::uint64_t step, const Batch& batch, const char* what, double value) const {
  if (std::isfinite(value)) return;
  std::string where;
  if (!config_.out_dir.empty()) {
    const auto dir = std::filesystem::path(config_.out_dir);
    const std::string tag = "failed_step_" + std::to_string(step);
    io::write_points_csv(dir / (tag + "_x.csv"), Points::from_tensor(batch.x));
    io::write_points_csv(dir / (tag + "_z.csv"), Points::from_tensor(batch.z));
    where = "; batch dumped to " + (dir / (tag + "_{x,z}.csv")).string();
  }
  throw NumericalError("step " + std::to_string(step) + ": non-finite " + what + where);
}

StepRecord Trainer::step() {
  switch (config_.regime) {
    case Regime::sig: return train_step_sig();
    case Regime::gan: return train_step_gan();
    case Regime::gan_si: return train_step_gan_si();
  }
  throw ConfigError("unknown regime");
}

StepRecord Trainer::train_step_sig() {
  if (!obs_) throw ConfigError("sig step needs an observation model");
  const std::uint64_t step = steps_done_;
  const Batch batch = draw_batch(step);
  StepRecord rec;
  rec.step = step;
  try {
    ad::Graph g;
    ad::Var theta = model::generate_theta(generator_, g, g.constant(batch.z));
    const loss::LossValue sig = loss::sig_loss_hm(*obs_, g.constant(batch.x), theta);
    guard(step, batch, "SIG loss", sig.total);
    g.backward(sig.value);
    rec.total = sig.total;
    rec.sig_term = sig.total;
    rec.lambda = 1.0;
    const auto gp = params_of(generator_);
    ad::adam_step(gp, gen_adam_, config_.adam);
  } catch (const NumericalError& e) {
    const std::string msg = e.what();
    if (msg.rfind("step ", 0) == 0) throw;
    guard(step, batch, msg.c_str(), std::nan(""));
  }
  ++steps_done_;
  return rec;
}

StepRecord Trainer::train_step_gan() { return adversarial_step(false); }
StepRecord Trainer::train_step_gan_si() { return adversarial_step(true); }

StepRecord Trainer::adversarial_step(bool with_sig) {
  if (!config_.uses_discriminator()) throw ConfigError("adversarial step needs a discriminator");
  if (with_sig && !obs_) throw ConfigError("gan-si step needs an observation model");
  const std::uint64_t step = steps_done_;
  const Batch batch = draw_batch(step);
  StepRecord rec;
  rec.step = step;
  try {
    // theta_j = g(z_j) at the current generator.
    ad::Graph gen_graph;
    ad::Var theta = model::generate_theta(generator_, gen_graph, gen_graph.constant(batch.z));

    // Discriminator gradient at the current parameters.
    {
      ad::Graph g;
      ad::Var real = model::discriminate(discriminator_, g, g.constant(batch.x));
      ad::Var fake = model::discriminate(discriminator_, g, g.constant(theta.value()));
      const loss::LossValue d = loss::gan_disc_loss(real, fake);
      guard(step, batch, "discriminator loss", d.total);
      g.backward(d.value);
      rec.disc_loss = d.total;
    }

    // Generator gradient, discriminator held fixed at the same parameters.
    ad::Var fake = model::discriminate(discriminator_, gen_graph, theta, false);
    const loss::LossValue gan = loss::gan_gen_loss(fake);
    loss::LossValue total = gan;
    if (with_sig) {
      const loss::LossValue sig = loss::sig_loss_hm(*obs_, gen_graph.constant(batch.x), theta);
      guard(step, batch, "SIG loss", sig.total);
      const double lambda = config_.lambda.automatic ? lambda_.update(gan.total, sig.total) : config_.lambda.value;
      total = loss::combine_gan_si(gan, sig, lambda, config_.gan_weight);
    }
    guard(step, batch, "generator loss", total.total);
    gen_graph.backward(total.value);
    rec.total = total.total;
    rec.gan_term = total.gan_term;
    rec.sig_term = total.sig_term;
    rec.lambda = total.lambda;

    const auto dp = params_of(discriminator_);
    const auto gp = params_of(generator_);
    ad::adam_step(dp, disc_adam_, config_.adam);
    ad::adam_step(gp, gen_adam_, config_.adam);
  } catch (const NumericalError& e) {
    const std::string msg = e.what();
    if (msg.rfind("step ", 0) == 0) throw;
    guard(step, batch, msg.c_str(), std::nan(""));
  }
  ++steps_done_;
  return rec;
}

Points sample_generator(model::Mlp& generator, const TrainConfig& config, std::size_t count, Rng rng,
                        EvalDraw draw) {
  if (draw == EvalDraw::automatic) draw = config.resolved_eval_draw();
  std::optional<model::ObservationModel> obs;
  if (draw == EvalDraw::x) {
    if (!config.uses_observation()) throw ConfigError("the gan regime has no observation model to draw x from");
    obs = config.observation_model();
  }
  Points out(generator.output_dim(), {});
  out.coords.reserve(count * generator.output_dim());
  for (std::size_t done = 0; done < count;) {
    const std::size_t n = std::min(kSampleChunk, count - done);
    const Tensor z = data::sample_noise(rng, n, generator.input_dim());
    const Tensor theta = model::generate_theta_values(generator, z);
    if (obs) {
      const Points x = obs->sample(theta, rng);
      out.coords.insert(out.coords.end(), x.coords.begin(), x.coords.end());
    } else {
      out.coords.insert(out.coords.end(), theta.data().begin(), theta.data().end());
    }
    done += n;
  }
  return out;
}

Points Trainer::generate(std::size_t count, std::uint64_t stream_key, EvalDraw draw) {
  return sample_generator(generator_, config_, count, Rng(config_.seed).derive("sample", stream_key), draw);
}

model::Checkpoint Trainer::to_checkpoint() const {
  model::Checkpoint c;
  c.manifest["step"] = steps_done_;
  c.manifest["seed"] = config_.seed;
  c.manifest["config"] = to_json(config_);
  c.manifest["config_hash"] = config_hash(config_);
  c.manifest["architecture"]["generator"] = model::architecture_json(generator_);
  if (config_.uses_discriminator()) c.manifest["architecture"]["discriminator"] = model::architecture_json(discriminator_);
  const auto ls = lambda_.state();
  c.manifest["lambda_state"] = {
      {"gan_ema", ls.gan_ema}, {"sig_ema", ls.sig_ema}, {"lambda", ls.lambda}, {"updates", ls.updates}};
  c.manifest["adam_steps"] = {{"generator", gen_adam_.step}, {"discriminator", disc_adam_.step}};

  model::append_parameters(generator_, c);
  if (config_.uses_discriminator()) model::append_parameters(discriminator_, c);
  append_adam("adam.generator", generator_, gen_adam_, c);
  if (config_.uses_discriminator()) append_adam("adam.discriminator", discriminator_, disc_adam_, c);
  return c;
}

void Trainer::restore(const model::Checkpoint& ckpt) {
  try {
    const auto& arch = ckpt.manifest.at("architecture");
    const auto mine = model::architecture_json(generator_);
    if (arch.at("generator") != mine) {
      throw ShapeError("checkpoint/architecture mismatch: checkpoint generator " + arch.at("generator").dump() +
                       " vs configured generator " + mine.dump());
    }
    model::load_parameters(generator_, ckpt);
    load_adam("adam.generator", generator_, gen_adam_, ckpt, ckpt.manifest.at("adam_steps").at("generator"));
    if (config_.uses_discriminator()) {
      const auto dmine = model::architecture_json(discriminator_);
      if (!arch.contains("discriminator") || arch.at("discriminator") != dmine) {
        throw ShapeError("checkpoint/architecture mismatch: checkpoint discriminator " +
                         (arch.contains("discriminator") ? arch.at("discriminator").dump() : std::string("none")) +
                         " vs configured discriminator " + dmine.dump());
      }
      model::load_parameters(discriminator_, ckpt);
      load_adam("adam.discriminator", discriminator_, disc_adam_, ckpt,
                ckpt.manifest.at("adam_steps").at("discriminator"));
    }
    const auto& ls = ckpt.manifest.at("lambda_state");
    lambda_.restore({ls.at("gan_ema").get<double>(), ls.at("sig_ema").get<double>(), ls.at("lambda").get<double>(),
                     ls.at("updates").get<std::uint64_t>()});
    steps_done_ = ckpt.manifest.at("step").get<std::uint64_t>();
  } catch (const nlohmann::json::exception& e) {
    throw IoError(std::string("malformed checkpoint manifest: ") + e.what());
  }
}

LoadedGenerator load_generator(const std::filesystem::path& checkpoint_dir) {
  const model::Checkpoint ckpt = model::read_checkpoint(checkpoint_dir);
  try {
    LoadedGenerator out;
    out.config = config_from_json(ckpt.manifest.at("config"));
    out.step = ckpt.manifest.at("step").get<std::uint64_t>();
    const auto expected = model::architecture_json(model::make_generator(out.config.generator_config()));
    const auto& arch = ckpt.manifest.at("architecture").at("generator");
    if (arch != expected) {
      throw ShapeError("checkpoint/architecture mismatch: checkpoint generator " + arch.dump() +
                       " vs config generator " + expected.dump());
    }
    out.generator = model::restore_mlp(arch, "generator", ckpt);
    return out;
  } catch (const nlohmann::json::exception& e) {
    throw IoError("malformed checkpoint manifest in '" + checkpoint_dir.string() + "': " + e.what());
  }
}

}  // namespace sig::train
