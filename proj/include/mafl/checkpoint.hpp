#pragma once

// Binary slice files: "MAFL", u32 version, u32 n, u32 N, f64 time, then
// N^{2n} f64 values row-major, all little-endian. A JSON sidecar
// (<file>.json) carries the scenario hash and free-form metadata.

#include <filesystem>
#include <string>

#include "json.hpp"
#include "mafl/torus.hpp"

namespace mafl {

inline constexpr std::uint32_t kCheckpointVersion = 1;

struct Checkpoint {
  double time = 0.0;
  ScalarField field;
};

void write_checkpoint(const std::filesystem::path& path, double time, const ScalarField& field);
Checkpoint read_checkpoint(const std::filesystem::path& path);

std::filesystem::path sidecar_path(const std::filesystem::path& checkpoint);
void write_sidecar(const std::filesystem::path& checkpoint, const nlohmann::json& meta);
nlohmann::json read_sidecar(const std::filesystem::path& checkpoint);

/// Writes `text` to `path` via a temporary file and rename.
void write_text_file(const std::filesystem::path& path, const std::string& text);
std::string read_text_file(const std::filesystem::path& path);

}  // namespace mafl
