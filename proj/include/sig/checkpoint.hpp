#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include <json.hpp>

#include "sig/mlp.hpp"
#include "sig/tensor.hpp"

namespace sig::model {

struct NamedTensor {
  std::string name;
  Tensor value;
};

// On disk: <dir>/checkpoint.json (manifest) and <dir>/checkpoint.bin, a flat
// little-endian float64 blob of the tensors in declaration order. The
// manifest's "tensors" array lists name, shape and element offset of each.
struct Checkpoint {
  nlohmann::json manifest = nlohmann::json::object();
  std::vector<NamedTensor> tensors;

  const Tensor& get(const std::string& name) const;
  bool contains(const std::string& name) const;
};

inline constexpr const char* kCheckpointFormat = "sig-checkpoint-v1";

void write_checkpoint(const std::filesystem::path& dir, const Checkpoint& ckpt);
Checkpoint read_checkpoint(const std::filesystem::path& dir);
bool checkpoint_exists(const std::filesystem::path& dir);

std::vector<unsigned char> encode_le_f64(std::span<const double> values);
std::vector<double> decode_le_f64(std::span<const unsigned char> bytes);

// {"widths": [...], "output": "..."} for an MLP.
nlohmann::json architecture_json(const Mlp& net);
// Rebuilds the network described by `arch` and loads its parameters from
// `ckpt`. Throws ShapeError naming both shapes on any mismatch.
Mlp restore_mlp(const nlohmann::json& arch, const std::string& name, const Checkpoint& ckpt);
void load_parameters(Mlp& net, const Checkpoint& ckpt);
void append_parameters(const Mlp& net, Checkpoint& ckpt);

}  // namespace sig::model
