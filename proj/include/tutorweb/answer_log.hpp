#pragma once

#include "json.hpp"

#include <cstdint>
#include <string>

namespace tutorweb {

/// One line of the raw answer export (newline-delimited JSON).
struct ExportRecord {
  std::string student;
  std::string lecture;
  std::int64_t seq = 0;
  std::string question;
  std::int64_t chosen = -1;  // -1 when the answer timed out without a choice
  bool correct = false;
  bool timed_out = false;
  double time_taken = 0.0;
  std::int64_t client_ts = 0;  // UTC milliseconds
  std::int64_t server_ts = 0;  // UTC milliseconds

  bool operator==(const ExportRecord&) const = default;
};

void to_json(nlohmann::json& j, const ExportRecord& r);
void from_json(const nlohmann::json& j, ExportRecord& r);

}  // namespace tutorweb
