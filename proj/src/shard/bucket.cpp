#include "curator/shard/bucket.hpp"

#include <array>
#include <cmath>

namespace curator::shard {
namespace {

constexpr std::array kAspects = {Aspect::Portrait9x16, Aspect::Portrait3x4, Aspect::Square,
                                 Aspect::Landscape4x3, Aspect::Landscape16x9};
constexpr std::array kResolutions = {ResolutionTier::SD, ResolutionTier::HD, ResolutionTier::FHD};
constexpr std::array kLengths = {LengthTier::Short, LengthTier::Medium, LengthTier::Long};

}  // namespace

std::string_view to_string(Aspect a) {
  switch (a) {
    case Aspect::Portrait9x16: return "9x16";
    case Aspect::Portrait3x4: return "3x4";
    case Aspect::Square: return "1x1";
    case Aspect::Landscape4x3: return "4x3";
    case Aspect::Landscape16x9: return "16x9";
  }
  return "?";
}

std::string_view to_string(ResolutionTier r) {
  switch (r) {
    case ResolutionTier::SD: return "sd";
    case ResolutionTier::HD: return "hd";
    case ResolutionTier::FHD: return "fhd";
  }
  return "?";
}

std::string_view to_string(LengthTier l) {
  switch (l) {
    case LengthTier::Short: return "short";
    case LengthTier::Medium: return "medium";
    case LengthTier::Long: return "long";
  }
  return "?";
}

double aspect_ratio(Aspect a) {
  switch (a) {
    case Aspect::Portrait9x16: return 9.0 / 16.0;
    case Aspect::Portrait3x4: return 3.0 / 4.0;
    case Aspect::Square: return 1.0;
    case Aspect::Landscape4x3: return 4.0 / 3.0;
    case Aspect::Landscape16x9: return 16.0 / 9.0;
  }
  return 1.0;
}

std::string Bucket::name() const {
  std::string s(to_string(aspect));
  s += '_';
  s += to_string(resolution);
  s += '_';
  s += to_string(length);
  return s;
}

Bucket Bucket::parse(std::string_view name) {
  const auto a = name.find('_');
  const auto b = name.find('_', a == std::string_view::npos ? a : a + 1);
  if (a == std::string_view::npos || b == std::string_view::npos) {
    throw std::invalid_argument("bad bucket name: " + std::string(name));
  }
  Bucket out;
  bool ok_a = false, ok_r = false, ok_l = false;
  for (auto x : kAspects) {
    if (to_string(x) == name.substr(0, a)) out.aspect = x, ok_a = true;
  }
  for (auto x : kResolutions) {
    if (to_string(x) == name.substr(a + 1, b - a - 1)) out.resolution = x, ok_r = true;
  }
  for (auto x : kLengths) {
    if (to_string(x) == name.substr(b + 1)) out.length = x, ok_l = true;
  }
  if (!ok_a || !ok_r || !ok_l) throw std::invalid_argument("bad bucket name: " + std::string(name));
  return out;
}

Bucket assign_bucket(int width, int height, double duration_s) {
  if (width <= 0 || height <= 0) throw std::invalid_argument("assign_bucket: bad dimensions");
  if (!(duration_s >= 2.0 && duration_s <= 60.0)) {
    throw InvalidDuration("assign_bucket: duration " + std::to_string(duration_s) +
                          "s outside [2, 60]");
  }
  Bucket b;
  const double log_ar = std::log(static_cast<double>(width) / height);
  double best = INFINITY;
  for (auto a : kAspects) {  // ascending width, so ">=" within tolerance prefers wider
    const double d = std::abs(log_ar - std::log(aspect_ratio(a)));
    if (d <= best + 1e-12) {
      best = std::min(best, d);
      b.aspect = a;
    }
  }
  const int short_side = std::min(width, height);
  b.resolution = short_side < 720    ? ResolutionTier::SD
                 : short_side < 1080 ? ResolutionTier::HD
                                     : ResolutionTier::FHD;
  b.length = duration_s < 10.0   ? LengthTier::Short
             : duration_s < 30.0 ? LengthTier::Medium
                                 : LengthTier::Long;
  return b;
}

}  // namespace curator::shard
