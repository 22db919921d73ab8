#pragma once

#include <cstdint>
#include <fstream>
#include <string>
#include <string_view>
#include <vector>

namespace curator::shard {

inline constexpr std::uint64_t kTarBlock = 512;

/// Bytes a member with `payload` bytes occupies: header plus padded data.
constexpr std::uint64_t tar_member_size(std::uint64_t payload) {
  return kTarBlock + (payload + kTarBlock - 1) / kTarBlock * kTarBlock;
}

/// Size of the end-of-archive marker (two zero blocks).
inline constexpr std::uint64_t kTarTrailer = 2 * kTarBlock;

/// Minimal POSIX ustar writer: regular files only, names up to 100 bytes,
/// mtime 0 and fixed ownership so output is reproducible.
class TarWriter {
 public:
  explicit TarWriter(const std::string& path);
  ~TarWriter();
  TarWriter(const TarWriter&) = delete;
  TarWriter& operator=(const TarWriter&) = delete;

  /// Returns the byte offset of the member's header.
  std::uint64_t add(std::string_view name, std::string_view data);
  /// Writes the trailer and closes; returns the final file size.
  std::uint64_t close();
  std::uint64_t bytes_written() const { return offset_; }

 private:
  std::ofstream out_;
  std::string path_;
  std::uint64_t offset_ = 0;
  bool closed_ = false;
};

struct TarMember {
  std::string name;
  std::string data;
  std::uint64_t offset = 0;  // header offset
};

/// Reads every regular member. Throws std::runtime_error on a bad checksum
/// or truncated archive.
std::vector<TarMember> read_tar(const std::string& path);

}  // namespace curator::shard
