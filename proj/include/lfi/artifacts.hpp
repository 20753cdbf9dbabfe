#pragma once

// Plain-text numeric files: one '#' header line, then whitespace-separated
// rows. Used for pilot statistics, inputs and observations.

#include "lfi/core.hpp"

#include <filesystem>
#include <string>

namespace lfi {

struct Artifact {
  std::string header;
  Matrix data;
};

void write_artifact(const std::filesystem::path& path, const std::string& header, const Matrix& data);

/// Throws std::runtime_error for a missing file or ragged rows.
Artifact read_artifact(const std::filesystem::path& path);

}  // namespace lfi
