#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace curator::shard {

enum class Aspect { Portrait9x16, Portrait3x4, Square, Landscape4x3, Landscape16x9 };
enum class ResolutionTier { SD, HD, FHD };
enum class LengthTier { Short, Medium, Long };

std::string_view to_string(Aspect a);          // "9x16", "3x4", "1x1", "4x3", "16x9"
std::string_view to_string(ResolutionTier r);  // "sd", "hd", "fhd"
std::string_view to_string(LengthTier l);      // "short", "medium", "long"
double aspect_ratio(Aspect a);                 // width / height

struct Bucket {
  Aspect aspect = Aspect::Landscape16x9;
  ResolutionTier resolution = ResolutionTier::FHD;
  LengthTier length = LengthTier::Short;

  /// "{aspect}_{resolution}_{length}", e.g. "16x9_fhd_medium".
  std::string name() const;
  static Bucket parse(std::string_view name);
  bool operator==(const Bucket&) const = default;
};

class InvalidDuration : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Closest of the five aspect ratios by |ln(w/h) - ln(ratio)|, ties to the
/// wider ratio. Resolution tier by the short side (<720 sd, <1080 hd, else
/// fhd); length tier [2,10) short, [10,30) medium, [30,60] long.
Bucket assign_bucket(int width, int height, double duration_s);

}  // namespace curator::shard
