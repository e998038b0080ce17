#pragma once

#include "emleak/capture.hpp"

#include <filesystem>
#include <optional>

namespace emleak {

/// Sidecar path for a data file: `<path>.meta.json`.
std::filesystem::path sidecar_path(const std::filesystem::path& data_path);

nlohmann::json meta_to_json(const CaptureMeta& meta);
CaptureMeta meta_from_json(const nlohmann::json& j);

/// Writes interleaved little-endian binary32 I/Q pairs plus the JSON
/// sidecar. Concurrent writers to the same path are undefined.
void write_capture(const BasebandCapture& capture, const std::filesystem::path& path);

/// Inverse of write_capture. Without a sidecar, `sample_rate_override` must
/// be given; the meta is then marked with mode "unknown". An override also
/// replaces the sidecar's rate when both exist.
BasebandCapture read_capture(const std::filesystem::path& path,
                             std::optional<double> sample_rate_override = std::nullopt);

}  // namespace emleak
