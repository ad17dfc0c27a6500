#include "sig/checkpoint.hpp"

#include <bit>
#include <cstdint>
#include <cstring>

#include "sig/error.hpp"
#include "sig/io.hpp"

namespace sig::model {

const Tensor& Checkpoint::get(const std::string& name) const {
  for (const auto& t : tensors)
    if (t.name == name) return t.value;
  throw IoError("checkpoint has no tensor '" + name + "'");
}

bool Checkpoint::contains(const std::string& name) const {
  for (const auto& t : tensors)
    if (t.name == name) return true;
  return false;
}

std::vector<unsigned char> encode_le_f64(std::span<const double> values) {
  std::vector<unsigned char> out(values.size() * 8);
  for (std::size_t i = 0; i < values.size(); ++i) {
    const auto bits = std::bit_cast<std::uint64_t>(values[i]);
    for (int b = 0; b < 8; ++b) out[i * 8 + b] = static_cast<unsigned char>((bits >> (8 * b)) & 0xFF);
  }
  return out;
}

std::vector<double> decode_le_f64(std::span<const unsigned char> bytes) {
  if (bytes.size() % 8 != 0) throw IoError("checkpoint blob size is not a multiple of 8 bytes");
  std::vector<double> out(bytes.size() / 8);
  for (std::size_t i = 0; i < out.size(); ++i) {
    std::uint64_t bits = 0;
    for (int b = 0; b < 8; ++b) bits |= static_cast<std::uint64_t>(bytes[i * 8 + b]) << (8 * b);
    out[i] = std::bit_cast<double>(bits);
  }
  return out;
}

void write_checkpoint(const std::filesystem::path& dir, const Checkpoint& ckpt) {
  io::ensure_directory(dir);
  nlohmann::json manifest = ckpt.manifest;
  manifest["format"] = kCheckpointFormat;
  manifest["blob"] = "checkpoint.bin";
  manifest["tensors"] = nlohmann::json::array();
  std::vector<double> flat;
  for (const auto& t : ckpt.tensors) {
    manifest["tensors"].push_back({{"name", t.name}, {"shape", t.value.shape()}, {"offset", flat.size()}});
    flat.insert(flat.end(), t.value.data().begin(), t.value.data().end());
  }
  manifest["blob_values"] = flat.size();
  const auto bytes = encode_le_f64(flat);
  io::write_text(dir / "checkpoint.bin", std::string(bytes.begin(), bytes.end()));
  io::write_json(dir / "checkpoint.json", manifest);
}

bool checkpoint_exists(const std::filesystem::path& dir) {
  return std::filesystem::exists(dir / "checkpoint.json") && std::filesystem::exists(dir / "checkpoint.bin");
}

Checkpoint read_checkpoint(const std::filesystem::path& dir) {
  Checkpoint ckpt;
  ckpt.manifest = io::read_json(dir / "checkpoint.json");
  if (ckpt.manifest.value("format", std::string()) != kCheckpointFormat) {
    throw IoError("'" + (dir / "checkpoint.json").string() + "' is not a " + kCheckpointFormat + " manifest");
  }
  const std::string raw = io::read_text(dir / "checkpoint.bin");
  const auto values = decode_le_f64(std::span(reinterpret_cast<const unsigned char*>(raw.data()), raw.size()));
  try {
    if (values.size() != ckpt.manifest.at("blob_values").get<std::size_t>()) {
      throw IoError("checkpoint blob in '" + dir.string() + "' holds " + std::to_string(values.size()) +
                    " values, manifest declares " + ckpt.manifest.at("blob_values").dump());
    }
    for (const auto& entry : ckpt.manifest.at("tensors")) {
      const Shape shape = entry.at("shape").get<Shape>();
      const auto offset = entry.at("offset").get<std::size_t>();
      const auto n = shape_size(shape);
      if (offset + n > values.size()) throw IoError("checkpoint tensor '" + entry.at("name").get<std::string>() +
                                                    "' runs past the end of the blob");
      std::vector<double> v(values.begin() + static_cast<std::ptrdiff_t>(offset),
                            values.begin() + static_cast<std::ptrdiff_t>(offset + n));
      ckpt.tensors.push_back({entry.at("name").get<std::string>(), Tensor(shape, std::move(v))});
    }
  } catch (const nlohmann::json::exception& e) {
    throw IoError("malformed checkpoint manifest in '" + dir.string() + "': " + e.what());
  }
  ckpt.manifest.erase("tensors");
  ckpt.manifest.erase("blob");
  ckpt.manifest.erase("blob_values");
  ckpt.manifest.erase("format");
  return ckpt;
}

nlohmann::json architecture_json(const Mlp& net) {
  return {{"widths", net.widths()}, {"output", to_string(net.output())}};
}

void load_parameters(Mlp& net, const Checkpoint& ckpt) {
  for (ad::Parameter* p : net.parameters()) {
    if (!ckpt.contains(p->name)) throw ShapeError("checkpoint lacks parameter '" + p->name + "' of " + net.name());
    const Tensor& t = ckpt.get(p->name);
    if (t.shape() != p->value.shape()) {
      throw ShapeError("checkpoint/architecture mismatch for '" + p->name + "': checkpoint " +
                       shape_string(t.shape()) + " vs architecture " + shape_string(p->value.shape()));
    }
    p->value = t;
    p->grad = Tensor(t.shape(), 0.0);
  }
}

Mlp restore_mlp(const nlohmann::json& arch, const std::string& name, const Checkpoint& ckpt) {
  try {
    Mlp net(arch.at("widths").get<std::vector<std::size_t>>(),
            parse_output_transform(arch.at("output").get<std::string>()), name);
    load_parameters(net, ckpt);
    return net;
  } catch (const nlohmann::json::exception& e) {
    throw IoError("malformed architecture for '" + name + "': " + e.what());
  }
}

void append_parameters(const Mlp& net, Checkpoint& ckpt) {
  for (const ad::Parameter* p : net.parameters()) ckpt.tensors.push_back({p->name, p->value});
}

}  // namespace sig::model
