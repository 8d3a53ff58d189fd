#pragma once

#include <vector>

#include "agrimeta/cropsim/types.hpp"

namespace agrimeta::cropsim {

// 32 reference soils: codes 201-216 (peat) and 301-316 (sand), two horizons
// each down to 120 cm.
const std::vector<SoilType>& shipped_soil_library();

inline bool is_peat(int code) { return code >= 200 && code <= 299; }
inline bool is_sand(int code) { return code >= 300 && code <= 399; }

}  // namespace agrimeta::cropsim
