#pragma once

#include "rieszlab/sampler.hpp"

#include <iosfwd>
#include <string>

namespace riesz {

// Binary ensemble file, little-endian:
//   "RZENSMBL" | u32 version | u32 d | u64 N | u64 count | f64 beta | u64 seed
//   | u64 burn_in | u64 thinning | u32 chains | u32 len | model[len]
//   then per sample: i32 chain | f64 energy | f64 coords[N d]
inline constexpr std::uint32_t ensemble_format_version = 1;

void write_ensemble(std::ostream& out, const Ensemble& e);
void write_ensemble(const std::string& path, const Ensemble& e);
// Throws ValidationError on a bad header, version mismatch or truncation.
Ensemble read_ensemble(std::istream& in);
Ensemble read_ensemble(const std::string& path);

}  // namespace riesz
