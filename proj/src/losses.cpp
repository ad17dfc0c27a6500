#include "sig/losses.hpp"

#include <algorithm>
#include <cmath>

#include "sig/error.hpp"

namespace sig::loss {
namespace {

void require_nonempty(ad::Var v, const char* what) {
  if (!v.valid() || v.value().size() == 0) throw ConfigError(std::string(what) + ": empty input");
}

}  // namespace

LossValue sig_loss_hm(const model::ObservationModel& obs, ad::Var x_batch, ad::Var theta_batch) {
  require_nonempty(x_batch, "sig_loss_hm");
  require_nonempty(theta_batch, "sig_loss_hm");
  ad::Graph& g = x_batch.graph();
  const double m = static_cast<double>(theta_batch.value().rows());
  ad::Var log_p = obs.log_density(g, x_batch, theta_batch);
  ad::Var log_mean = ad::add_scalar(ad::log_sum_exp(log_p, 1), -std::log(m));
  ad::Var loss = ad::neg(ad::mean(log_mean, 0));
  LossValue out;
  out.value = loss;
  out.total = loss.item();
  out.sig_term = out.total;
  out.lambda = 1.0;
  return out;
}

LossValue gan_disc_loss(ad::Var real_logits, ad::Var fake_logits) {
  require_nonempty(real_logits, "gan_disc_loss");
  require_nonempty(fake_logits, "gan_disc_loss");
  ad::Var loss = ad::add(ad::mean_all(ad::softplus(ad::neg(real_logits))), ad::mean_all(ad::softplus(fake_logits)));
  LossValue out;
  out.value = loss;
  out.total = loss.item();
  out.gan_term = out.total;
  return out;
}

LossValue gan_gen_loss(ad::Var fake_logits) {
  require_nonempty(fake_logits, "gan_gen_loss");
  ad::Var loss = ad::mean_all(ad::softplus(ad::neg(fake_logits)));
  LossValue out;
  out.value = loss;
  out.total = loss.item();
  out.gan_term = out.total;
  return out;
}

LossValue combine_gan_si(const LossValue& gan, const LossValue& sig, double lambda, double gan_weight) {
  if (!(lambda >= 0) || !std::isfinite(lambda)) {
    throw ConfigError("gan_si_gen_loss: lambda must be a finite value >= 0, got " + std::to_string(lambda));
  }
  ad::Var total = ad::add(ad::scale(gan.value, gan_weight), ad::scale(sig.value, lambda));
  LossValue out;
  out.value = total;
  out.total = total.item();
  out.gan_term = gan.total;
  out.sig_term = sig.total;
  out.lambda = lambda;
  return out;
}

LossValue gan_si_gen_loss(ad::Var fake_logits, const model::ObservationModel& obs, ad::Var x_batch,
                          ad::Var theta_batch, double lambda, double gan_weight) {
  if (!(lambda >= 0) || !std::isfinite(lambda)) {
    throw ConfigError("gan_si_gen_loss: lambda must be a finite value >= 0, got " + std::to_string(lambda));
  }
  return combine_gan_si(gan_gen_loss(fake_logits), sig_loss_hm(obs, x_batch, theta_batch), lambda, gan_weight);
}

LossValue exp_logit_gen_loss(ad::Var fake_logits) {
  require_nonempty(fake_logits, "exp_logit_gen_loss");
  ad::Var loss = ad::scale(ad::mean_all(ad::exp(fake_logits)), 0.5);
  LossValue out;
  out.value = loss;
  out.total = loss.item();
  out.gan_term = out.total;
  return out;
}

double auto_lambda(double gan_term_ema, double sig_term_ema, bool* clamped_from_zero) {
  const double gan = std::abs(gan_term_ema);
  const double sig = std::abs(sig_term_ema);
  if (clamped_from_zero) *clamped_from_zero = sig == 0.0;
  if (sig == 0.0) return kLambdaMax;
  return std::clamp(gan / sig, kLambdaMin, kLambdaMax);
}

LambdaController::LambdaController(double decay, std::uint64_t interval) : decay_(decay), interval_(interval) {
  if (!(decay >= 0 && decay < 1)) throw ConfigError("lambda EMA decay must lie in [0, 1)");
  if (interval == 0) throw ConfigError("lambda refresh interval must be positive");
}

double LambdaController::update(double gan_term, double sig_term) {
  gan_ema_ = decay_ * gan_ema_ + (1.0 - decay_) * gan_term;
  sig_ema_ = decay_ * sig_ema_ + (1.0 - decay_) * sig_term;
  if (updates_ % interval_ == 0) {
    bool zero = false;
    lambda_ = auto_lambda(gan_ema_, sig_ema_, &zero);
    if (zero) {
      warnings_.push_back("update " + std::to_string(updates_) + ": SIG term EMA is zero; lambda clamped to " +
                          std::to_string(kLambdaMax));
    }
  }
  ++updates_;
  return lambda_;
}

void LambdaController::restore(const State& s) {
  gan_ema_ = s.gan_ema;
  sig_ema_ = s.sig_ema;
  lambda_ = s.lambda;
  updates_ = s.updates;
}

}  // namespace sig::loss
