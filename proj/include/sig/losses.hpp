#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "sig/autodiff.hpp"
#include "sig/observation.hpp"

namespace sig::loss {

// Graph-attached scalar plus a detached breakdown for logging.
// total == gan_term + lambda * sig_term whenever both terms are present.
struct LossValue {
  ad::Var value;
  double total = 0.0;
  double gan_term = 0.0;
  double sig_term = 0.0;
  double lambda = 0.0;
};

// Monte-Carlo cross-entropy bound
//   -(1/N) sum_i [ logsumexp_j log p(x_i | theta_j) - log M ]
// pairing every x row with every theta row, evaluated in log space.
LossValue sig_loss_hm(const model::ObservationModel& obs, ad::Var x_batch, ad::Var theta_batch);

// -mean log sigma(real) - mean log(1 - sigma(fake)), via softplus identities.
LossValue gan_disc_loss(ad::Var real_logits, ad::Var fake_logits);

// Non-saturating generator loss -mean log sigma(fake).
LossValue gan_gen_loss(ad::Var fake_logits);

// gan_weight * gan_gen_loss + lambda * sig_loss_hm. gan_weight is 1 except in
// regime-reduction checks.
LossValue gan_si_gen_loss(ad::Var fake_logits, const model::ObservationModel& obs, ad::Var x_batch,
                          ad::Var theta_batch, double lambda, double gan_weight = 1.0);

// Same objective from terms already on one graph.
LossValue combine_gan_si(const LossValue& gan, const LossValue& sig, double lambda, double gan_weight = 1.0);

// Diagnostic variant 0.5 * mean exp(logit); not used for training.
LossValue exp_logit_gen_loss(ad::Var fake_logits);

inline constexpr double kLambdaMin = 1e-4;
inline constexpr double kLambdaMax = 1e4;

// lambda = |gan| / |sig| clamped to [kLambdaMin, kLambdaMax].
double auto_lambda(double gan_term_ema, double sig_term_ema, bool* clamped_from_zero = nullptr);

// Keeps exponential moving averages of both loss terms and refreshes lambda
// every `interval` updates (at update 0, interval, 2 interval, ...).
class LambdaController {
 public:
  LambdaController(double decay = 0.99, std::uint64_t interval = 100);

  // Feeds one step's detached terms and returns the lambda to use for it.
  double update(double gan_term, double sig_term);

  double lambda() const { return lambda_; }
  double gan_ema() const { return gan_ema_; }
  double sig_ema() const { return sig_ema_; }
  std::uint64_t updates() const { return updates_; }
  const std::vector<std::string>& warnings() const { return warnings_; }

  struct State {
    double gan_ema, sig_ema, lambda;
    std::uint64_t updates;
  };
  State state() const { return {gan_ema_, sig_ema_, lambda_, updates_}; }
  void restore(const State& s);

 private:
  double decay_;
  std::uint64_t interval_;
  double gan_ema_ = 0.0;
  double sig_ema_ = 0.0;
  double lambda_ = 1.0;
  std::uint64_t updates_ = 0;
  std::vector<std::string> warnings_;
};

}  // namespace sig::loss
