#pragma once

#include <cstdint>
#include <filesystem>
#include <vector>

#include "agrimeta/datagen/normalizer.hpp"
#include "agrimeta/tensornet/parameters.hpp"
#include "agrimeta/tensornet/spec.hpp"

namespace agrimeta::tensornet {

// Facts about how a model was trained, needed to reproduce its validation
// split and to guard against year leakage downstream.
struct Provenance {
  std::uint64_t seed = 0;
  double val_fraction = 0.2;
  std::vector<int> training_years;
  bool operator==(const Provenance&) const = default;
};

struct Model {
  NetworkSpec spec;
  Parameters params;
  datagen::Normalizer normalizer;
  Provenance provenance;
};

// "AGMM", u16 version, u32 block count, then blocks of
// (u32 tag, u32 length, payload, u32 CRC32 of payload):
// SPEC, NORM, one PARM per layer (weights, bias, freeze flag), PROV.
inline constexpr std::uint16_t kModelVersion = 1;

void save_model(const std::filesystem::path& path, const Model& model);
// Throws FileIntegrityError on bad magic, unsupported version, truncation or
// checksum mismatch; never returns a partial model.
Model load_model(const std::filesystem::path& path);

std::vector<unsigned char> serialize_model(const Model& model);
Model deserialize_model(const std::vector<unsigned char>& bytes);

}  // namespace agrimeta::tensornet
