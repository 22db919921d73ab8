#include "curator/frame_io/y4m.hpp"

#include <charconv>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>

namespace curator::frame_io {
namespace {

constexpr std::string_view kMagic = "YUV4MPEG2";
constexpr std::string_view kFrameMarker = "FRAME";
constexpr std::size_t kMaxHeaderLine = 4096;

int parse_positive(std::string_view token, std::string_view field) {
  int value = 0;
  auto [ptr, ec] = std::from_chars(token.data(), token.data() + token.size(), value);
  if (ec != std::errc() || ptr != token.data() + token.size() || value <= 0) {
    throw Y4mError(Y4mError::Kind::InvalidHeader,
                   "y4m: bad " + std::string(field) + " value '" + std::string(token) + "'");
  }
  return value;
}

std::vector<std::string_view> split_tokens(std::string_view line) {
  std::vector<std::string_view> tokens;
  std::size_t pos = 0;
  while (pos < line.size()) {
    while (pos < line.size() && line[pos] == ' ') ++pos;
    const std::size_t start = pos;
    while (pos < line.size() && line[pos] != ' ') ++pos;
    if (pos > start) tokens.push_back(line.substr(start, pos - start));
  }
  return tokens;
}

StreamHeader parse_header_line(std::string_view line) {
  const auto tokens = split_tokens(line);
  if (tokens.empty() || tokens.front() != kMagic) {
    throw Y4mError(Y4mError::Kind::BadMagic, "y4m: missing YUV4MPEG2 magic");
  }
  StreamHeader h;
  bool has_w = false, has_h = false, has_f = false;
  for (std::size_t i = 1; i < tokens.size(); ++i) {
    const std::string_view tok = tokens[i];
    const std::string_view val = tok.substr(1);
    switch (tok.front()) {
      case 'W':
        h.width = parse_positive(val, "W");
        has_w = true;
        break;
      case 'H':
        h.height = parse_positive(val, "H");
        has_h = true;
        break;
      case 'F': {
        const auto colon = val.find(':');
        if (colon == std::string_view::npos) {
          throw Y4mError(Y4mError::Kind::InvalidHeader, "y4m: frame rate needs num:den");
        }
        h.fps_num = parse_positive(val.substr(0, colon), "F numerator");
        h.fps_den = parse_positive(val.substr(colon + 1), "F denominator");
        has_f = true;
        break;
      }
      case 'I':
        h.interlace = std::string(val);
        break;
      case 'A':
        h.pixel_aspect = std::string(val);
        break;
      case 'C':
        h.chroma_tag = std::string(val);
        if (val == "420jpeg" || val == "420" || val == "420paldv" || val == "420mpeg2") {
          h.chroma = Chroma::C420;
        } else if (val == "444") {
          h.chroma = Chroma::C444;
        } else {
          throw Y4mError(Y4mError::Kind::UnsupportedChroma,
                         "y4m: unsupported chroma '" + std::string(val) + "'");
        }
        break;
      case 'X':
        if (val.rfind("LENGTH=", 0) == 0) {
          std::int64_t n = 0;
          const auto digits = val.substr(7);
          auto [ptr, ec] = std::from_chars(digits.data(), digits.data() + digits.size(), n);
          if (ec != std::errc() || ptr != digits.data() + digits.size() || n < 0) {
            throw Y4mError(Y4mError::Kind::InvalidHeader, "y4m: bad XLENGTH");
          }
          h.frame_count = n;
        } else {
          h.extensions.emplace_back(val);
        }
        break;
      default:
        // Unknown tags are ignored, as the format allows.
        break;
    }
  }
  if (!has_w) throw Y4mError(Y4mError::Kind::MissingField, "y4m: missing W token");
  if (!has_h) throw Y4mError(Y4mError::Kind::MissingField, "y4m: missing H token");
  if (!has_f) throw Y4mError(Y4mError::Kind::MissingField, "y4m: missing F token");
  h.validate();
  return h;
}

}  // namespace

void StreamHeader::validate() const {
  if (width <= 0 || height <= 0) {
    throw Y4mError(Y4mError::Kind::InvalidHeader, "y4m: dimensions must be positive");
  }
  if (fps_num <= 0 || fps_den <= 0) {
    throw Y4mError(Y4mError::Kind::InvalidHeader, "y4m: frame rate must be positive");
  }
  if (chroma == Chroma::C420 && (width % 2 != 0 || height % 2 != 0)) {
    throw Y4mError(Y4mError::Kind::InvalidHeader, "y4m: 4:2:0 requires even dimensions");
  }
}

std::size_t StreamHeader::chroma_plane_bytes() const {
  return static_cast<std::size_t>(chroma_width()) * chroma_height();
}

std::string StreamHeader::to_line() const {
  std::ostringstream os;
  os << kMagic << " W" << width << " H" << height << " F" << fps_num << ':' << fps_den
     << " I" << interlace << " A" << pixel_aspect << " C" << chroma_tag;
  if (frame_count) os << " XLENGTH=" << *frame_count;
  for (const auto& x : extensions) os << " X" << x;
  os << '\n';
  return os.str();
}

HeaderParse parse_y4m_header(std::string_view bytes) {
  if (bytes.substr(0, kMagic.size()) != kMagic) {
    throw Y4mError(Y4mError::Kind::BadMagic, "y4m: missing YUV4MPEG2 magic");
  }
  const auto nl = bytes.find('\n');
  if (nl == std::string_view::npos) {
    throw Y4mError(Y4mError::Kind::InvalidHeader, "y4m: unterminated header line");
  }
  return {parse_header_line(bytes.substr(0, nl)), nl + 1};
}

Y4mReader::Y4mReader(std::istream& in) : in_(in) {
  std::string line;
  line.reserve(128);
  char c = 0;
  while (in_.get(c)) {
    if (c == '\n') break;
    line.push_back(c);
    if (line.size() == kMagic.size() && line != kMagic) {
      throw Y4mError(Y4mError::Kind::BadMagic, "y4m: missing YUV4MPEG2 magic");
    }
    if (line.size() > kMaxHeaderLine) {
      throw Y4mError(Y4mError::Kind::InvalidHeader, "y4m: header line too long");
    }
  }
  if (line.size() < kMagic.size()) {
    throw Y4mError(Y4mError::Kind::BadMagic, "y4m: missing YUV4MPEG2 magic");
  }
  if (c != '\n') throw Y4mError(Y4mError::Kind::InvalidHeader, "y4m: unterminated header line");
  header_ = parse_header_line(line);
}

std::optional<Frame> Y4mReader::next() {
  if (header_.frame_count && next_index_ >= *header_.frame_count) return std::nullopt;

  auto truncated = [&](const std::string& detail) {
    return Y4mError(Y4mError::Kind::TruncatedFrame,
                    "y4m: frame " + std::to_string(next_index_) + " truncated: " + detail);
  };

  std::string marker;
  char c = 0;
  while (in_.get(c) && c != '\n') {
    marker.push_back(c);
    if (marker.size() > kMaxHeaderLine) {
      throw Y4mError(Y4mError::Kind::InvalidHeader, "y4m: frame header too long");
    }
  }
  if (marker.empty() && in_.eof()) {
    if (header_.frame_count) {
      throw truncated("stream ended before declared frame count " +
                      std::to_string(*header_.frame_count));
    }
    return std::nullopt;
  }
  if (in_.eof()) throw truncated("incomplete FRAME marker");
  if (marker.compare(0, kFrameMarker.size(), kFrameMarker) != 0) {
    throw Y4mError(Y4mError::Kind::InvalidHeader, "y4m: expected FRAME marker");
  }

  Frame frame;
  frame.pts_index = next_index_;
  frame.data.resize(header_.frame_bytes());
  in_.read(reinterpret_cast<char*>(frame.data.data()),
           static_cast<std::streamsize>(frame.data.size()));
  if (static_cast<std::size_t>(in_.gcount()) != frame.data.size()) {
    throw truncated("got " + std::to_string(in_.gcount()) + " of " +
                    std::to_string(frame.data.size()) + " bytes");
  }
  ++next_index_;
  return frame;
}

Y4mWriter::Y4mWriter(std::ostream& out, StreamHeader header)
    : out_(out), header_(std::move(header)) {
  header_.validate();
  out_ << header_.to_line();
}

void Y4mWriter::write(std::span<const std::uint8_t> payload) {
  if (payload.size() != header_.frame_bytes()) {
    throw std::invalid_argument("y4m: frame payload is " + std::to_string(payload.size()) +
                                " bytes, header requires " +
                                std::to_string(header_.frame_bytes()));
  }
  out_ << kFrameMarker << '\n';
  out_.write(reinterpret_cast<const char*>(payload.data()),
             static_cast<std::streamsize>(payload.size()));
  ++written_;
}

std::string write_y4m(const StreamHeader& header, std::span<const Frame> frames) {
  std::ostringstream os;
  Y4mWriter writer(os, header);
  for (const auto& f : frames) writer.write(f);
  return os.str();
}

Video read_y4m_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open " + path);
  Y4mReader reader(in);
  Video video{reader.header(), {}};
  for (auto& frame : reader) video.frames.push_back(frame);
  return video;
}

Video read_y4m_range(const std::string& path, std::int64_t start, std::int64_t end) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open " + path);
  Y4mReader reader(in);
  Video video{reader.header(), {}};
  while (auto frame = reader.next()) {
    if (frame->pts_index >= end) break;
    if (frame->pts_index >= start) video.frames.push_back(std::move(*frame));
  }
  return video;
}

void write_y4m_file(const std::string& path, const StreamHeader& header,
                    std::span<const Frame> frames) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw std::runtime_error("cannot create " + path);
  Y4mWriter writer(out, header);
  for (const auto& f : frames) writer.write(f);
  if (!out.flush()) throw std::runtime_error("write failed: " + path);
}

}  // namespace curator::frame_io
