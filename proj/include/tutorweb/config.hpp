#pragma once

#include "tutorweb/grading.hpp"
#include "tutorweb/pacing.hpp"

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>

namespace tutorweb {

/// Operator settings. File format: one `key = value` per line, `#` starts a
/// comment. Keys: port, data_dir, admin_token, log_level, allocation.max_count,
/// grade.{base_window,growth_threshold,growth_divisor,max_window,scale,
/// last_answer_weight}, timeout.{enabled,t_min,t_max,g_min,width}.
struct Config {
  std::filesystem::path data_dir = "tutorweb-data";
  std::uint16_t port = 8080;
  std::string admin_token;
  std::string log_level = "info";
  std::size_t max_allocation = 100;
  GradePolicy grade_policy;
  TimeoutPolicy timeout_policy;

  /// Throws std::invalid_argument for unknown keys or unparsable values.
  void set(std::string_view key, std::string_view value);
  void load_file(const std::filesystem::path& path);
  /// Checks the policy bundles against their invariants.
  void validate() const;
};

}  // namespace tutorweb
