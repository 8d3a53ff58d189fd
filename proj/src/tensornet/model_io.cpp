#include "agrimeta/tensornet/model_io.hpp"

#include <zlib.h>

#include <cstring>
#include <fstream>
#include <iterator>

#include "agrimeta/binary_io.hpp"
#include "agrimeta/error.hpp"

namespace agrimeta::tensornet {
namespace {

constexpr char kMagic[4] = {'A', 'G', 'M', 'M'};

constexpr std::uint32_t tag(const char (&s)[5]) {
  return static_cast<std::uint32_t>(static_cast<unsigned char>(s[0])) |
         static_cast<std::uint32_t>(static_cast<unsigned char>(s[1])) << 8 |
         static_cast<std::uint32_t>(static_cast<unsigned char>(s[2])) << 16 |
         static_cast<std::uint32_t>(static_cast<unsigned char>(s[3])) << 24;
}

constexpr std::uint32_t kSpecTag = tag("SPEC");
constexpr std::uint32_t kNormTag = tag("NORM");
constexpr std::uint32_t kParmTag = tag("PARM");
constexpr std::uint32_t kProvTag = tag("PROV");

std::uint32_t crc_of(const unsigned char* data, std::size_t size) {
  return static_cast<std::uint32_t>(::crc32(0L, data, static_cast<uInt>(size)));
}

void put_block(std::vector<unsigned char>& out, std::uint32_t t, const std::vector<unsigned char>& payload) {
  binary::put<std::uint32_t>(out, t);
  binary::put<std::uint32_t>(out, static_cast<std::uint32_t>(payload.size()));
  out.insert(out.end(), payload.begin(), payload.end());
  binary::put<std::uint32_t>(out, crc_of(payload.data(), payload.size()));
}

void put_shape(std::vector<unsigned char>& b, Shape s) {
  binary::put<std::uint32_t>(b, static_cast<std::uint32_t>(s.channels));
  binary::put<std::uint32_t>(b, static_cast<std::uint32_t>(s.length));
}

void put_layers(std::vector<unsigned char>& b, const std::vector<LayerSpec>& layers) {
  binary::put<std::uint32_t>(b, static_cast<std::uint32_t>(layers.size()));
  for (const auto& l : layers) {
    binary::put<std::uint8_t>(b, static_cast<std::uint8_t>(l.kind));
    binary::put<std::uint32_t>(b, static_cast<std::uint32_t>(l.units));
    binary::put<std::uint32_t>(b, static_cast<std::uint32_t>(l.kernel));
    binary::put<std::uint8_t>(b, l.relu ? 1 : 0);
  }
}

Shape get_shape(binary::Cursor& c) {
  Shape s;
  s.channels = c.get<std::uint32_t>();
  s.length = c.get<std::uint32_t>();
  return s;
}

std::vector<LayerSpec> get_layers(binary::Cursor& c) {
  const auto n = c.get<std::uint32_t>();
  if (n > 1024) throw FileIntegrityError("model: implausible layer count");
  std::vector<LayerSpec> layers(n);
  for (auto& l : layers) {
    const auto kind = c.get<std::uint8_t>();
    if (kind < 1 || kind > 3) throw FileIntegrityError("model: unknown layer kind");
    l.kind = static_cast<LayerKind>(kind);
    l.units = c.get<std::uint32_t>();
    l.kernel = c.get<std::uint32_t>();
    l.relu = c.get<std::uint8_t>() != 0;
  }
  return layers;
}

template <typename Array>
void put_array(std::vector<unsigned char>& b, const Array& a) {
  for (double v : a) binary::put<double>(b, v);
}

template <typename Array>
void get_array(binary::Cursor& c, Array& a) {
  for (double& v : a) v = c.get<double>();
}

std::vector<unsigned char> spec_payload(const NetworkSpec& spec) {
  std::vector<unsigned char> b;
  put_shape(b, spec.temporal_input);
  put_layers(b, spec.temporal);
  put_shape(b, spec.scalar_input);
  put_layers(b, spec.scalar);
  binary::put<std::uint8_t>(b, spec.use_soil ? 1 : 0);
  put_shape(b, spec.soil_input);
  put_layers(b, spec.soil);
  put_layers(b, spec.head);
  return b;
}

NetworkSpec parse_spec(binary::Cursor& c) {
  NetworkSpec spec;
  spec.temporal_input = get_shape(c);
  spec.temporal = get_layers(c);
  spec.scalar_input = get_shape(c);
  spec.scalar = get_layers(c);
  spec.use_soil = c.get<std::uint8_t>() != 0;
  spec.soil_input = get_shape(c);
  spec.soil = get_layers(c);
  spec.head = get_layers(c);
  return spec;
}

std::vector<unsigned char> norm_payload(const datagen::Normalizer& n) {
  std::vector<unsigned char> b;
  put_array(b, n.temporal_mean);
  put_array(b, n.temporal_std);
  put_array(b, n.scalar_mean);
  put_array(b, n.scalar_std);
  put_array(b, n.soil_mean);
  put_array(b, n.soil_std);
  binary::put<double>(b, n.target_mean);
  binary::put<double>(b, n.target_std);
  return b;
}

datagen::Normalizer parse_norm(binary::Cursor& c) {
  datagen::Normalizer n;
  get_array(c, n.temporal_mean);
  get_array(c, n.temporal_std);
  get_array(c, n.scalar_mean);
  get_array(c, n.scalar_std);
  get_array(c, n.soil_mean);
  get_array(c, n.soil_std);
  n.target_mean = c.get<double>();
  n.target_std = c.get<double>();
  return n;
}

std::vector<unsigned char> parm_payload(const Parameters& p, std::size_t layer) {
  std::vector<unsigned char> b;
  const auto& blk = p.block(layer);
  binary::put_string(b, blk.name);
  binary::put<std::uint8_t>(b, static_cast<std::uint8_t>(blk.kind));
  binary::put<std::uint32_t>(b, static_cast<std::uint32_t>(blk.out));
  binary::put<std::uint32_t>(b, static_cast<std::uint32_t>(blk.in));
  binary::put<std::uint32_t>(b, static_cast<std::uint32_t>(blk.kernel));
  for (double v : p.weight(layer)) binary::put<double>(b, v);
  for (double v : p.bias(layer)) binary::put<double>(b, v);
  binary::put<std::uint8_t>(b, p.frozen(layer) ? 1 : 0);
  return b;
}

void parse_parm(binary::Cursor& c, Parameters& p, std::size_t layer) {
  const auto& blk = p.block(layer);
  const std::string name = c.get_string();
  const auto kind = c.get<std::uint8_t>();
  const std::size_t out = c.get<std::uint32_t>();
  const std::size_t in = c.get<std::uint32_t>();
  const std::size_t kernel = c.get<std::uint32_t>();
  if (name != blk.name || kind != static_cast<std::uint8_t>(blk.kind) || out != blk.out || in != blk.in ||
      kernel != blk.kernel) {
    throw FileIntegrityError("model: parameter block '" + name + "' does not match the stored architecture");
  }
  for (double& v : p.weight(layer)) v = c.get<double>();
  for (double& v : p.bias(layer)) v = c.get<double>();
  p.set_frozen(layer, c.get<std::uint8_t>() != 0);
}

std::vector<unsigned char> prov_payload(const Provenance& pr) {
  std::vector<unsigned char> b;
  binary::put<std::uint64_t>(b, pr.seed);
  binary::put<double>(b, pr.val_fraction);
  binary::put<std::uint32_t>(b, static_cast<std::uint32_t>(pr.training_years.size()));
  for (int y : pr.training_years) binary::put<std::int32_t>(b, y);
  return b;
}

Provenance parse_prov(binary::Cursor& c) {
  Provenance pr;
  pr.seed = c.get<std::uint64_t>();
  pr.val_fraction = c.get<double>();
  const auto n = c.get<std::uint32_t>();
  if (n > c.remaining() / 4) throw FileIntegrityError("model: truncated provenance");
  pr.training_years.resize(n);
  for (int& y : pr.training_years) y = c.get<std::int32_t>();
  return pr;
}

void expect_consumed(const binary::Cursor& c, const char* what) {
  if (c.remaining() != 0) throw FileIntegrityError(std::string("model: trailing bytes in ") + what + " block");
}

}  // namespace

std::vector<unsigned char> serialize_model(const Model& model) {
  if (!model.params.same_layout(Parameters(model.spec))) {
    throw ValidationError("serialize_model: parameters do not match the network spec");
  }
  std::vector<unsigned char> out(kMagic, kMagic + 4);
  binary::put<std::uint16_t>(out, kModelVersion);
  binary::put<std::uint32_t>(out, static_cast<std::uint32_t>(3 + model.params.layer_count()));
  put_block(out, kSpecTag, spec_payload(model.spec));
  put_block(out, kNormTag, norm_payload(model.normalizer));
  for (std::size_t l = 0; l < model.params.layer_count(); ++l) put_block(out, kParmTag, parm_payload(model.params, l));
  put_block(out, kProvTag, prov_payload(model.provenance));
  return out;
}

Model deserialize_model(const std::vector<unsigned char>& bytes) {
  binary::Cursor c(bytes.data(), bytes.size());
  if (bytes.size() < 4 || std::memcmp(bytes.data(), kMagic, 4) != 0) {
    throw FileIntegrityError("model: bad magic, not a model file");
  }
  c.skip(4);
  const auto version = c.get<std::uint16_t>();
  if (version != kModelVersion) {
    throw FileIntegrityError("model: unsupported format version " + std::to_string(version) + " (expected " +
                             std::to_string(kModelVersion) + ")");
  }
  const auto count = c.get<std::uint32_t>();

  Model model;
  bool have_spec = false, have_norm = false, have_prov = false;
  std::size_t next_layer = 0;
  for (std::uint32_t i = 0; i < count; ++i) {
    const auto t = c.get<std::uint32_t>();
    const auto len = c.get<std::uint32_t>();
    const unsigned char* payload = c.here();
    c.skip(len);
    const auto stored = c.get<std::uint32_t>();
    if (crc_of(payload, len) != stored) {
      throw FileIntegrityError("model: checksum mismatch in block " + std::to_string(i));
    }
    binary::Cursor p(payload, len);
    if (t == kSpecTag) {
      if (have_spec) throw FileIntegrityError("model: duplicate SPEC block");
      model.spec = parse_spec(p);
      try {
        validate(model.spec);
      } catch (const ValidationError& e) {
        throw FileIntegrityError(std::string("model: invalid stored architecture: ") + e.what());
      }
      model.params = Parameters(model.spec);
      have_spec = true;
      expect_consumed(p, "SPEC");
    } else if (t == kNormTag) {
      model.normalizer = parse_norm(p);
      have_norm = true;
      expect_consumed(p, "NORM");
    } else if (t == kParmTag) {
      if (!have_spec) throw FileIntegrityError("model: PARM block before SPEC");
      if (next_layer >= model.params.layer_count()) throw FileIntegrityError("model: too many PARM blocks");
      parse_parm(p, model.params, next_layer++);
      expect_consumed(p, "PARM");
    } else if (t == kProvTag) {
      model.provenance = parse_prov(p);
      have_prov = true;
      expect_consumed(p, "PROV");
    } else {
      throw FileIntegrityError("model: unknown block tag");
    }
  }
  if (!have_spec || !have_norm || !have_prov || next_layer != model.params.layer_count()) {
    throw FileIntegrityError("model: missing blocks (truncated or incomplete file)");
  }
  if (c.remaining() != 0) throw FileIntegrityError("model: trailing bytes after last block");
  return model;
}

void save_model(const std::filesystem::path& path, const Model& model) {
  const auto bytes = serialize_model(model);
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw ValidationError("cannot write model " + path.string());
  out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
  out.close();
  if (!out) throw std::runtime_error("model write failed: " + path.string());
}

Model load_model(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ValidationError("cannot open model " + path.string());
  std::vector<unsigned char> bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  return deserialize_model(bytes);
}

}  // namespace agrimeta::tensornet
