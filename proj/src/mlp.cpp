#include "sig/mlp.hpp"

#include <cmath>

#include "sig/error.hpp"

namespace sig::model {

std::string to_string(OutputTransform t) {
  switch (t) {
    case OutputTransform::identity: return "identity";
    case OutputTransform::softplus: return "softplus";
    case OutputTransform::logit: return "logit";
  }
  return "identity";
}

OutputTransform parse_output_transform(const std::string& name) {
  if (name == "identity") return OutputTransform::identity;
  if (name == "softplus") return OutputTransform::softplus;
  if (name == "logit") return OutputTransform::logit;
  throw ConfigError("unknown output transform '" + name + "'");
}

Mlp::Mlp(std::vector<std::size_t> widths, OutputTransform output, std::string name)
    : widths_(std::move(widths)), output_(output), name_(std::move(name)) {
  if (widths_.size() < 2) throw ShapeError("mlp '" + name_ + "' needs at least input and output widths");
  for (auto w : widths_) {
    if (w == 0) throw ShapeError("mlp '" + name_ + "' has a zero width");
  }
  for (std::size_t l = 0; l + 1 < widths_.size(); ++l) {
    const std::string prefix = name_ + ".layer" + std::to_string(l);
    layers_.push_back({ad::Parameter(prefix + ".weight", Tensor(Shape{widths_[l], widths_[l + 1]}, 0.0)),
                       ad::Parameter(prefix + ".bias", Tensor(Shape{widths_[l + 1]}, 0.0))});
  }
}

void Mlp::initialize(Rng& rng) {
  for (std::size_t l = 0; l < layers_.size(); ++l) {
    const bool last = l + 1 == layers_.size();
    const double stddev = std::sqrt((last ? 1.0 : 2.0) / static_cast<double>(widths_[l]));
    for (double& w : layers_[l].weight.value.values()) w = stddev * rng.normal();
    for (double& b : layers_[l].bias.value.values()) b = 0.0;
  }
}

ad::Var Mlp::forward(ad::Graph& g, ad::Var input, bool trainable) {
  if (input.value().rank() != 2 || input.value().cols() != widths_.front()) {
    throw ShapeError("mlp '" + name_ + "': input " + shape_string(input.shape()) + " does not match width " +
                     std::to_string(widths_.front()));
  }
  ad::Var h = input;
  for (std::size_t l = 0; l < layers_.size(); ++l) {
    auto& layer = layers_[l];
    ad::Var w = trainable ? g.parameter(layer.weight) : g.constant(layer.weight.value);
    ad::Var b = trainable ? g.parameter(layer.bias) : g.constant(layer.bias.value);
    h = ad::add_row(ad::matmul(h, w), b);
    if (l + 1 < layers_.size()) h = ad::relu(h);
  }
  if (output_ == OutputTransform::softplus) h = ad::add_scalar(ad::softplus(h), kPositiveFloor);
  return h;
}

std::vector<ad::Parameter*> Mlp::parameters() {
  std::vector<ad::Parameter*> out;
  for (auto& l : layers_) {
    out.push_back(&l.weight);
    out.push_back(&l.bias);
  }
  return out;
}

std::vector<const ad::Parameter*> Mlp::parameters() const {
  std::vector<const ad::Parameter*> out;
  for (const auto& l : layers_) {
    out.push_back(&l.weight);
    out.push_back(&l.bias);
  }
  return out;
}

std::size_t Mlp::parameter_count() const {
  std::size_t n = 0;
  for (std::size_t l = 0; l + 1 < widths_.size(); ++l) n += widths_[l] * widths_[l + 1] + widths_[l + 1];
  return n;
}

Mlp make_generator(const GeneratorConfig& config) {
  std::vector<std::size_t> widths{config.noise_dim};
  widths.insert(widths.end(), config.hidden.begin(), config.hidden.end());
  widths.push_back(config.output_dim);
  return Mlp(std::move(widths), config.output, "generator");
}

Mlp make_discriminator(const DiscriminatorConfig& config) {
  std::vector<std::size_t> widths{config.input_dim};
  widths.insert(widths.end(), config.hidden.begin(), config.hidden.end());
  widths.push_back(1);
  return Mlp(std::move(widths), OutputTransform::logit, "discriminator");
}

ad::Var generate_theta(Mlp& generator, ad::Graph& g, ad::Var z, bool trainable) {
  return generator.forward(g, z, trainable);
}

ad::Var discriminate(Mlp& discriminator, ad::Graph& g, ad::Var x, bool trainable) {
  if (discriminator.output_dim() != 1) throw ShapeError("discriminator must have a single output");
  ad::Var logits = discriminator.forward(g, x, trainable);
  return ad::reshape(logits, Shape{logits.value().rows()});
}

Tensor generate_theta_values(Mlp& generator, const Tensor& z) {
  ad::Graph g;
  return generator.forward(g, g.constant(z), false).value();
}

}  // namespace sig::model
