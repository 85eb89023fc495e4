#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "strb/rbm.hpp"

namespace strb::rbm {

inline constexpr int kModelFormatVersion = 1;

/// Everything written by the offline phase.
struct ModelBundle {
  ReducedModel model;
  std::string config_text;       ///< configuration the model was trained with
  std::vector<double> knots;     ///< log-price knots of the Bernstein frame
  Vector init_eigenvalues;       ///< POD spectrum, may be empty
};

/// Layout: the line "STRB-MODEL", one line of JSON metadata (format version,
/// config and its FNV-1a hash, dimensions, theta identifiers, blob table),
/// then the blobs as raw little-endian doubles in column-major order.
void save_model(const std::filesystem::path& path, const ModelBundle& bundle);
/// Throws ModelError on a missing file, bad magic, version mismatch or truncation.
ModelBundle load_model(const std::filesystem::path& path);

std::uint64_t fnv1a(const std::string& text);

}  // namespace strb::rbm
