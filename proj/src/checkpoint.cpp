#include "mafl/checkpoint.hpp"

#include <algorithm>
#include <bit>
#include <cstring>
#include <fstream>
#include <sstream>

namespace mafl {

namespace fs = std::filesystem;

namespace {

static_assert(std::endian::native == std::endian::little || std::endian::native == std::endian::big);

template <class T>
void put(std::string& out, T value) {
  unsigned char bytes[sizeof(T)];
  std::memcpy(bytes, &value, sizeof(T));
  if constexpr (std::endian::native == std::endian::big) std::reverse(bytes, bytes + sizeof(T));
  out.append(reinterpret_cast<const char*>(bytes), sizeof(T));
}

template <class T>
T take(const std::string& in, std::size_t& pos, const fs::path& path) {
  if (pos + sizeof(T) > in.size()) throw Error(ErrorKind::Io, "truncated checkpoint " + path.string());
  unsigned char bytes[sizeof(T)];
  std::memcpy(bytes, in.data() + pos, sizeof(T));
  if constexpr (std::endian::native == std::endian::big) std::reverse(bytes, bytes + sizeof(T));
  pos += sizeof(T);
  T value;
  std::memcpy(&value, bytes, sizeof(T));
  return value;
}

std::string read_binary(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorKind::Io, "cannot open " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

}  // namespace

void write_text_file(const fs::path& path, const std::string& text) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  fs::path tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw Error(ErrorKind::Io, "cannot write " + tmp.string());
    out.write(text.data(), static_cast<std::streamsize>(text.size()));
    if (!out) throw Error(ErrorKind::Io, "write failed for " + tmp.string());
  }
  std::error_code ec;
  fs::rename(tmp, path, ec);
  if (ec) throw Error(ErrorKind::Io, "cannot rename " + tmp.string() + " to " + path.string() + ": " + ec.message());
}

std::string read_text_file(const fs::path& path) { return read_binary(path); }

void write_checkpoint(const fs::path& path, double time, const ScalarField& field) {
  std::string buf = "MAFL";
  put<std::uint32_t>(buf, kCheckpointVersion);
  put<std::uint32_t>(buf, static_cast<std::uint32_t>(field.grid.dim()));
  put<std::uint32_t>(buf, static_cast<std::uint32_t>(field.grid.resolution()));
  put<double>(buf, time);
  buf.reserve(buf.size() + 8 * field.size());
  for (double v : field.values) put<double>(buf, v);
  write_text_file(path, buf);
}

Checkpoint read_checkpoint(const fs::path& path) {
  const std::string data = read_binary(path);
  if (data.size() < 4 || data.compare(0, 4, "MAFL") != 0)
    throw Error(ErrorKind::Io, "bad magic in " + path.string());
  std::size_t pos = 4;
  const auto version = take<std::uint32_t>(data, pos, path);
  if (version != kCheckpointVersion)
    throw Error(ErrorKind::Io, "unsupported checkpoint version " + std::to_string(version) + " in " + path.string());
  const auto n = take<std::uint32_t>(data, pos, path);
  const auto N = take<std::uint32_t>(data, pos, path);
  Checkpoint cp;
  cp.time = take<double>(data, pos, path);
  cp.field = ScalarField::constant(make_grid(static_cast<int>(n), static_cast<int>(N)), 0.0);
  if (data.size() != pos + 8 * cp.field.size())
    throw Error(ErrorKind::Io, "payload size mismatch in " + path.string());
  for (auto& v : cp.field.values) v = take<double>(data, pos, path);
  return cp;
}

fs::path sidecar_path(const fs::path& checkpoint) {
  fs::path p = checkpoint;
  p += ".json";
  return p;
}

void write_sidecar(const fs::path& checkpoint, const nlohmann::json& meta) {
  write_text_file(sidecar_path(checkpoint), meta.dump(2) + "\n");
}

nlohmann::json read_sidecar(const fs::path& checkpoint) {
  try {
    return nlohmann::json::parse(read_binary(sidecar_path(checkpoint)));
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorKind::Io, "malformed sidecar for " + checkpoint.string() + ": " + e.what());
  }
}

}  // namespace mafl
