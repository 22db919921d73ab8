#include "curator/shard/tar.hpp"

#include <algorithm>
#include <array>
#include <cstdio>
#include <cstring>
#include <stdexcept>

namespace curator::shard {
namespace {

using Header = std::array<char, kTarBlock>;

void put_octal(char* field, std::size_t width, std::uint64_t value) {
  // width-1 digits plus NUL
  std::snprintf(field, width, "%0*llo", static_cast<int>(width - 1),
                static_cast<unsigned long long>(value));
}

std::uint64_t get_octal(const char* field, std::size_t width) {
  std::uint64_t v = 0;
  for (std::size_t i = 0; i < width && field[i] != '\0' && field[i] != ' '; ++i) {
    if (field[i] < '0' || field[i] > '7') throw std::runtime_error("tar: bad octal field");
    v = v * 8 + static_cast<std::uint64_t>(field[i] - '0');
  }
  return v;
}

unsigned checksum(const Header& h) {
  unsigned sum = 0;
  for (std::size_t i = 0; i < h.size(); ++i) {
    sum += (i >= 148 && i < 156) ? static_cast<unsigned>(' ') : static_cast<unsigned char>(h[i]);
  }
  return sum;
}

}  // namespace

TarWriter::TarWriter(const std::string& path)
    : out_(path, std::ios::binary | std::ios::trunc), path_(path) {
  if (!out_) throw std::runtime_error("cannot create tar " + path);
}

TarWriter::~TarWriter() {
  if (!closed_) {
    try {
      close();
    } catch (...) {
    }
  }
}

std::uint64_t TarWriter::add(std::string_view name, std::string_view data) {
  if (closed_) throw std::logic_error("tar: add after close");
  if (name.empty() || name.size() > 100) {
    throw std::invalid_argument("tar: member name must be 1..100 bytes: " + std::string(name));
  }
  Header h{};
  std::memcpy(h.data(), name.data(), name.size());
  put_octal(h.data() + 100, 8, 0644);
  put_octal(h.data() + 108, 8, 0);
  put_octal(h.data() + 116, 8, 0);
  put_octal(h.data() + 124, 12, data.size());
  put_octal(h.data() + 136, 12, 0);
  h[156] = '0';
  std::memcpy(h.data() + 257, "ustar", 6);
  std::memcpy(h.data() + 263, "00", 2);
  std::snprintf(h.data() + 148, 8, "%06o", checksum(h));
  h[155] = ' ';

  const std::uint64_t at = offset_;
  out_.write(h.data(), kTarBlock);
  out_.write(data.data(), static_cast<std::streamsize>(data.size()));
  const std::uint64_t pad = tar_member_size(data.size()) - kTarBlock - data.size();
  static const char zeros[kTarBlock] = {};
  out_.write(zeros, static_cast<std::streamsize>(pad));
  if (!out_) throw std::runtime_error("tar: write failed: " + path_);
  offset_ += tar_member_size(data.size());
  return at;
}

std::uint64_t TarWriter::close() {
  if (closed_) return offset_;
  static const char zeros[kTarTrailer] = {};
  out_.write(zeros, kTarTrailer);
  offset_ += kTarTrailer;
  out_.close();
  closed_ = true;
  if (!out_) throw std::runtime_error("tar: close failed: " + path_);
  return offset_;
}

std::vector<TarMember> read_tar(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open tar " + path);
  std::vector<TarMember> members;
  std::uint64_t offset = 0;
  Header h;
  while (in.read(h.data(), kTarBlock)) {
    if (std::all_of(h.begin(), h.end(), [](char c) { return c == '\0'; })) break;
    if (get_octal(h.data() + 148, 8) != checksum(h)) {
      throw std::runtime_error("tar: checksum mismatch at offset " + std::to_string(offset));
    }
    TarMember m;
    m.offset = offset;
    m.name.assign(h.data(), strnlen(h.data(), 100));
    const std::uint64_t size = get_octal(h.data() + 124, 12);
    m.data.resize(size);
    if (!in.read(m.data.data(), static_cast<std::streamsize>(size))) {
      throw std::runtime_error("tar: truncated member " + m.name);
    }
    in.ignore(static_cast<std::streamsize>(tar_member_size(size) - kTarBlock - size));
    offset += tar_member_size(size);
    if (h[156] == '0' || h[156] == '\0') members.push_back(std::move(m));
  }
  return members;
}

}  // namespace curator::shard
