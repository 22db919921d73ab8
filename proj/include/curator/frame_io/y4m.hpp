#pragma once

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <iterator>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace curator::frame_io {

enum class Chroma { C420, C444 };

class Y4mError : public std::runtime_error {
 public:
  enum class Kind { BadMagic, MissingField, UnsupportedChroma, InvalidHeader, TruncatedFrame };

  Y4mError(Kind kind, const std::string& what) : std::runtime_error(what), kind_(kind) {}
  Kind kind() const noexcept { return kind_; }

 private:
  Kind kind_;
};

struct StreamHeader {
  int width = 0;
  int height = 0;
  int fps_num = 0;
  int fps_den = 1;
  Chroma chroma = Chroma::C420;
  std::optional<std::int64_t> frame_count;

  // Preserved verbatim so a parsed stream re-serializes identically.
  std::string interlace = "p";
  std::string pixel_aspect = "1:1";
  std::string chroma_tag = "420jpeg";
  std::vector<std::string> extensions;  // X tokens other than XLENGTH, without the X

  /// Throws Y4mError(InvalidHeader) when the dimension/rate invariants fail.
  void validate() const;

  std::size_t luma_bytes() const { return static_cast<std::size_t>(width) * height; }
  std::size_t chroma_plane_bytes() const;
  std::size_t frame_bytes() const { return luma_bytes() + 2 * chroma_plane_bytes(); }
  int chroma_width() const { return chroma == Chroma::C420 ? width / 2 : width; }
  int chroma_height() const { return chroma == Chroma::C420 ? height / 2 : height; }

  double fps() const { return static_cast<double>(fps_num) / fps_den; }
  /// Seconds spanned by `frames` frames.
  double seconds(std::int64_t frames) const {
    return static_cast<double>(frames) * fps_den / fps_num;
  }

  /// Serialized header line including the trailing newline.
  std::string to_line() const;
};

/// One decoded picture. Planes are stored contiguously Y, then Cb, then Cr.
struct Frame {
  std::vector<std::uint8_t> data;
  std::int64_t pts_index = 0;

  std::span<const std::uint8_t> luma(const StreamHeader& h) const {
    return {data.data(), h.luma_bytes()};
  }
  std::span<const std::uint8_t> cb(const StreamHeader& h) const {
    return {data.data() + h.luma_bytes(), h.chroma_plane_bytes()};
  }
  std::span<const std::uint8_t> cr(const StreamHeader& h) const {
    return {data.data() + h.luma_bytes() + h.chroma_plane_bytes(), h.chroma_plane_bytes()};
  }
};

struct HeaderParse {
  StreamHeader header;
  std::size_t payload_offset = 0;  // byte offset of the first FRAME marker
};

/// Parses the YUV4MPEG2 header line at the start of `bytes`.
HeaderParse parse_y4m_header(std::string_view bytes);

/// Pull-based reader over a stream. The header is consumed on construction.
class Y4mReader {
 public:
  explicit Y4mReader(std::istream& in);

  const StreamHeader& header() const { return header_; }

  /// Next frame, or nullopt at a clean end of stream. Throws
  /// Y4mError(TruncatedFrame) when a payload is cut short.
  std::optional<Frame> next();

  class iterator {
   public:
    using iterator_category = std::input_iterator_tag;
    using value_type = Frame;
    using difference_type = std::ptrdiff_t;
    using pointer = const Frame*;
    using reference = const Frame&;

    iterator() = default;
    explicit iterator(Y4mReader* reader) : reader_(reader) { ++*this; }

    reference operator*() const { return *current_; }
    pointer operator->() const { return &*current_; }
    iterator& operator++() {
      current_ = reader_->next();
      if (!current_) reader_ = nullptr;
      return *this;
    }
    void operator++(int) { ++*this; }
    bool operator==(const iterator& other) const { return reader_ == other.reader_; }

   private:
    Y4mReader* reader_ = nullptr;
    std::optional<Frame> current_;
  };

  iterator begin() { return iterator(this); }
  iterator end() { return iterator(); }

 private:
  std::istream& in_;
  StreamHeader header_;
  std::int64_t next_index_ = 0;
};

class Y4mWriter {
 public:
  Y4mWriter(std::ostream& out, StreamHeader header);

  void write(std::span<const std::uint8_t> payload);
  void write(const Frame& frame) { write(frame.data); }
  std::int64_t frames_written() const { return written_; }

 private:
  std::ostream& out_;
  StreamHeader header_;
  std::int64_t written_ = 0;
};

std::string write_y4m(const StreamHeader& header, std::span<const Frame> frames);

/// Reads a whole file. Throws Y4mError or std::runtime_error on I/O failure.
struct Video {
  StreamHeader header;
  std::vector<Frame> frames;
};
Video read_y4m_file(const std::string& path);
void write_y4m_file(const std::string& path, const StreamHeader& header,
                    std::span<const Frame> frames);

/// Reads only the frames in [start, end) of a file.
Video read_y4m_range(const std::string& path, std::int64_t start, std::int64_t end);

}  // namespace curator::frame_io
