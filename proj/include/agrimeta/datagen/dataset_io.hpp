#pragma once

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <span>
#include <string>
#include <vector>

#include "agrimeta/datagen/sample.hpp"

namespace agrimeta::datagen {

// Binary layout (little-endian):
//   "AGDS" u16 version, u32 sample count, u32 temporal channels, u32 window
//   days, i32 window start doy, u32 scalar count, u32 soil channels, u32 soil
//   layers, u32 location count, then per location u16 length + bytes.
//   Each sample block is f32: location index, year, soil code,
//   temporal[C*L], scalars[S], soil[C*L], target.
inline constexpr std::uint16_t kDatasetVersion = 1;

class DatasetWriter {
 public:
  DatasetWriter(const std::filesystem::path& path, std::vector<std::string> locations);
  ~DatasetWriter();
  DatasetWriter(const DatasetWriter&) = delete;
  DatasetWriter& operator=(const DatasetWriter&) = delete;

  void append(std::span<const Sample> samples);
  // Patches the sample count; called by the destructor if omitted.
  void close();

 private:
  std::ofstream out_;
  std::vector<std::string> locations_;
  std::uint32_t count_ = 0;
  bool closed_ = false;
};

void write_dataset(const std::filesystem::path& path, std::span<const Sample> samples);
std::vector<Sample> read_dataset(const std::filesystem::path& path);

// meta + scalars + target, for inspection.
void write_dataset_csv(const std::filesystem::path& path, std::span<const Sample> samples);

}  // namespace agrimeta::datagen
