#include "agrimeta/datagen/dataset_io.hpp"

#include <algorithm>
#include <iomanip>
#include <map>

#include "agrimeta/binary_io.hpp"
#include "agrimeta/error.hpp"

namespace agrimeta::datagen {
namespace {

constexpr char kMagic[4] = {'A', 'G', 'D', 'S'};
constexpr std::size_t kCountOffset = 4 + 2;
constexpr std::size_t kFloatsPerSample =
    3 + kTemporalChannels * kWindowDays + kScalarCount + kSoilChannels * kSoilLayers + 1;

}  // namespace

DatasetWriter::DatasetWriter(const std::filesystem::path& path, std::vector<std::string> locations)
    : out_(path, std::ios::binary | std::ios::trunc), locations_(std::move(locations)) {
  if (!out_) throw ValidationError("cannot write dataset " + path.string());
  out_.write(kMagic, 4);
  binary::write<std::uint16_t>(out_, kDatasetVersion);
  binary::write<std::uint32_t>(out_, 0);
  binary::write<std::uint32_t>(out_, kTemporalChannels);
  binary::write<std::uint32_t>(out_, kWindowDays);
  binary::write<std::int32_t>(out_, kWindowStartDoy);
  binary::write<std::uint32_t>(out_, kScalarCount);
  binary::write<std::uint32_t>(out_, kSoilChannels);
  binary::write<std::uint32_t>(out_, kSoilLayers);
  binary::write<std::uint32_t>(out_, static_cast<std::uint32_t>(locations_.size()));
  for (const auto& name : locations_) {
    binary::write<std::uint16_t>(out_, static_cast<std::uint16_t>(name.size()));
    out_.write(name.data(), static_cast<std::streamsize>(name.size()));
  }
}

DatasetWriter::~DatasetWriter() {
  if (!closed_) {
    try {
      close();
    } catch (...) {
    }
  }
}

void DatasetWriter::append(std::span<const Sample> samples) {
  std::vector<unsigned char> buf;
  buf.reserve(samples.size() * kFloatsPerSample * 4);
  for (const auto& s : samples) {
    const auto it = std::find(locations_.begin(), locations_.end(), s.meta.location_id);
    if (it == locations_.end()) {
      throw ValidationError("location " + s.meta.location_id + " missing from dataset header");
    }
    binary::put<float>(buf, static_cast<float>(it - locations_.begin()));
    binary::put<float>(buf, static_cast<float>(s.meta.year));
    binary::put<float>(buf, static_cast<float>(s.meta.soil_code));
    for (double v : s.temporal) binary::put<float>(buf, static_cast<float>(v));
    for (double v : s.scalars) binary::put<float>(buf, static_cast<float>(v));
    for (double v : s.soil) binary::put<float>(buf, static_cast<float>(v));
    binary::put<float>(buf, static_cast<float>(s.target));
  }
  out_.write(reinterpret_cast<const char*>(buf.data()), static_cast<std::streamsize>(buf.size()));
  count_ += static_cast<std::uint32_t>(samples.size());
}

void DatasetWriter::close() {
  out_.seekp(kCountOffset);
  binary::write<std::uint32_t>(out_, count_);
  out_.close();
  closed_ = true;
  if (!out_) throw std::runtime_error("dataset write failed");
}

void write_dataset(const std::filesystem::path& path, std::span<const Sample> samples) {
  std::vector<std::string> locations;
  for (const auto& s : samples) {
    if (std::find(locations.begin(), locations.end(), s.meta.location_id) == locations.end()) {
      locations.push_back(s.meta.location_id);
    }
  }
  std::sort(locations.begin(), locations.end());
  DatasetWriter writer(path, locations);
  writer.append(samples);
  writer.close();
}

std::vector<Sample> read_dataset(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ValidationError("cannot open dataset " + path.string());
  std::vector<unsigned char> bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  binary::Cursor cur(bytes.data(), bytes.size());
  char magic[4];
  for (auto& c : magic) c = static_cast<char>(cur.get<std::uint8_t>());
  if (!std::equal(magic, magic + 4, kMagic)) throw FileIntegrityError(path.string() + ": not a dataset file");
  const auto version = cur.get<std::uint16_t>();
  if (version != kDatasetVersion) {
    throw FileIntegrityError(path.string() + ": unsupported dataset version " + std::to_string(version));
  }
  const auto count = cur.get<std::uint32_t>();
  const auto tc = cur.get<std::uint32_t>();
  const auto wd = cur.get<std::uint32_t>();
  const auto ws = cur.get<std::int32_t>();
  const auto sc = cur.get<std::uint32_t>();
  const auto soc = cur.get<std::uint32_t>();
  const auto sl = cur.get<std::uint32_t>();
  if (tc != kTemporalChannels || wd != kWindowDays || ws != kWindowStartDoy || sc != kScalarCount ||
      soc != kSoilChannels || sl != kSoilLayers) {
    throw FileIntegrityError(path.string() + ": sample shapes differ from this build");
  }
  const auto n_locations = cur.get<std::uint32_t>();
  std::vector<std::string> locations;
  for (std::uint32_t i = 0; i < n_locations; ++i) locations.push_back(cur.get_string());
  if (cur.remaining() != static_cast<std::size_t>(count) * kFloatsPerSample * 4) {
    throw FileIntegrityError(path.string() + ": size does not match sample count (truncated?)");
  }

  std::vector<Sample> out(count);
  for (auto& s : out) {
    const auto loc = static_cast<std::size_t>(cur.get<float>());
    if (loc >= locations.size()) throw FileIntegrityError(path.string() + ": bad location index");
    s.meta.location_id = locations[loc];
    s.meta.year = static_cast<int>(cur.get<float>());
    s.meta.soil_code = static_cast<int>(cur.get<float>());
    s.temporal.resize(kTemporalChannels * kWindowDays);
    for (auto& v : s.temporal) v = cur.get<float>();
    for (auto& v : s.scalars) v = cur.get<float>();
    s.soil.resize(kSoilChannels * kSoilLayers);
    for (auto& v : s.soil) v = cur.get<float>();
    s.target = cur.get<float>();
  }
  return out;
}

void write_dataset_csv(const std::filesystem::path& path, std::span<const Sample> samples) {
  std::ofstream out(path);
  if (!out) throw ValidationError("cannot write " + path.string());
  out << "location,year,soil_code,max_rooting_depth,sowing_doy,earliness,target\n"
      << std::setprecision(9);
  for (const auto& s : samples) {
    out << s.meta.location_id << ',' << s.meta.year << ',' << s.meta.soil_code << ','
        << s.scalars[0] << ',' << s.scalars[1] << ',' << s.scalars[2] << ',' << s.target << '\n';
  }
}

}  // namespace agrimeta::datagen
