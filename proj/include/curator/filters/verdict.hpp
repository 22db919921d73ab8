#pragma once

#include <map>
#include <set>
#include <string>
#include <string_view>

namespace curator::filters {

enum class RejectReason {
  None,
  Static,
  Shaky,
  LowQuality,
  LowAesthetic,
  TextOverlay,
  ExcludedType,
  Resampled,
};

std::string_view to_string(RejectReason reason);

struct FilterVerdict {
  std::string clip_id;
  bool pass = true;
  std::map<std::string, double> scores;
  std::set<std::string> tags;
  RejectReason reason = RejectReason::None;

  void reject(RejectReason why) {
    pass = false;
    reason = why;
  }
};

}  // namespace curator::filters
