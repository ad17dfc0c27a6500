#pragma once

#include <string>
#include <vector>

#include "sig/autodiff.hpp"
#include "sig/rng.hpp"

namespace sig::model {

// identity: raw affine output. softplus: strictly positive output,
// softplus(h) + kPositiveFloor. logit: raw output read as a Bernoulli logit.
enum class OutputTransform { identity, softplus, logit };

inline constexpr double kPositiveFloor = 1e-6;

std::string to_string(OutputTransform t);
OutputTransform parse_output_transform(const std::string& name);

// Fully connected ReLU network. Layer l maps widths[l] -> widths[l + 1];
// ReLU follows every layer except the last.
class Mlp {
 public:
  Mlp() = default;
  Mlp(std::vector<std::size_t> widths, OutputTransform output, std::string name);

  // Zero biases; weights ~ N(0, 2 / fan_in) before a ReLU, N(0, 1 / fan_in)
  // on the output layer.
  void initialize(Rng& rng);

  // `trainable = false` feeds the parameters in as constants, so the graph
  // produces no gradient for them.
  ad::Var forward(ad::Graph& g, ad::Var input, bool trainable = true);

  std::vector<ad::Parameter*> parameters();
  std::vector<const ad::Parameter*> parameters() const;
  std::size_t parameter_count() const;

  const std::vector<std::size_t>& widths() const { return widths_; }
  OutputTransform output() const { return output_; }
  const std::string& name() const { return name_; }
  std::size_t input_dim() const { return widths_.front(); }
  std::size_t output_dim() const { return widths_.back(); }

 private:
  struct Layer {
    ad::Parameter weight;  // [in x out]
    ad::Parameter bias;    // [out]
  };

  std::vector<std::size_t> widths_;
  OutputTransform output_ = OutputTransform::identity;
  std::string name_;
  std::vector<Layer> layers_;
};

struct GeneratorConfig {
  std::size_t noise_dim = 10;
  std::vector<std::size_t> hidden = {100, 100};
  std::size_t output_dim = 2;
  OutputTransform output = OutputTransform::identity;
};

struct DiscriminatorConfig {
  std::size_t input_dim = 2;
  std::vector<std::size_t> hidden = {100};
};

Mlp make_generator(const GeneratorConfig& config);
Mlp make_discriminator(const DiscriminatorConfig& config);

// theta = g(z) for z[M x noise_dim].
ad::Var generate_theta(Mlp& generator, ad::Graph& g, ad::Var z, bool trainable = true);
// Raw logits, shape [N].
ad::Var discriminate(Mlp& discriminator, ad::Graph& g, ad::Var x, bool trainable = true);

// Evaluation helper: theta for a block of noise, without keeping a graph.
Tensor generate_theta_values(Mlp& generator, const Tensor& z);

}  // namespace sig::model
