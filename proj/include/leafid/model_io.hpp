#pragma once

#include "leafid/model.hpp"

#include <filesystem>
#include <string>

namespace leafid {

inline constexpr int kModelFormatVersion = 1;

/// One JSON header line (format version, scales, configuration, labels,
/// dimensions, payload size and CRC-32), then a binary block of
/// little-endian float64 values and uint64 indices.
std::string serialize_model(const OvoSvmModel& m);
/// Throws VersionMismatch for another format version and CorruptModel for a
/// damaged or truncated file.
OvoSvmModel deserialize_model(const std::string& bytes);

void save_model(const OvoSvmModel& m, const std::filesystem::path& path);
OvoSvmModel load_model(const std::filesystem::path& path);

}  // namespace leafid
