#include "tutorweb/config.hpp"

#include <charconv>
#include <fstream>
#include <stdexcept>

namespace tutorweb {

namespace {

std::string_view trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r\n");
  return s.substr(b, e - b + 1);
}

template <typename T>
T parse_number(std::string_view key, std::string_view v) {
  T out{};
  const auto [ptr, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
  if (ec != std::errc{} || ptr != v.data() + v.size()) {
    throw std::invalid_argument("bad value for " + std::string(key) + ": '" + std::string(v) + "'");
  }
  return out;
}

bool parse_bool(std::string_view key, std::string_view v) {
  if (v == "true" || v == "on" || v == "1" || v == "yes") return true;
  if (v == "false" || v == "off" || v == "0" || v == "no") return false;
  throw std::invalid_argument("bad boolean for " + std::string(key) + ": '" + std::string(v) + "'");
}

}  // namespace

void Config::set(std::string_view key, std::string_view raw) {
  const auto v = trim(raw);
  if (key == "port") {
    port = parse_number<std::uint16_t>(key, v);
  } else if (key == "data_dir") {
    data_dir = std::string(v);
  } else if (key == "admin_token") {
    admin_token = std::string(v);
  } else if (key == "log_level") {
    log_level = std::string(v);
  } else if (key == "allocation.max_count") {
    max_allocation = parse_number<std::size_t>(key, v);
  } else if (key == "grade.base_window") {
    grade_policy.base_window = parse_number<std::size_t>(key, v);
  } else if (key == "grade.growth_threshold") {
    grade_policy.growth_threshold = parse_number<std::size_t>(key, v);
  } else if (key == "grade.growth_divisor") {
    grade_policy.growth_divisor = parse_number<double>(key, v);
  } else if (key == "grade.max_window") {
    grade_policy.max_window = parse_number<std::size_t>(key, v);
  } else if (key == "grade.scale") {
    grade_policy.scale = parse_number<double>(key, v);
  } else if (key == "grade.last_answer_weight") {
    grade_policy.last_answer_weight = parse_number<double>(key, v);
  } else if (key == "timeout.enabled") {
    timeout_policy.enabled = parse_bool(key, v);
  } else if (key == "timeout.t_min") {
    timeout_policy.t_min = parse_number<double>(key, v);
  } else if (key == "timeout.t_max") {
    timeout_policy.t_max = parse_number<double>(key, v);
  } else if (key == "timeout.g_min") {
    timeout_policy.g_min = parse_number<double>(key, v);
  } else if (key == "timeout.width") {
    timeout_policy.width = parse_number<double>(key, v);
  } else {
    throw std::invalid_argument("unknown config key '" + std::string(key) + "'");
  }
}

void Config::load_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open config file " + path.string());
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    std::string_view sv = line;
    if (const auto hash = sv.find('#'); hash != std::string_view::npos) sv = sv.substr(0, hash);
    sv = trim(sv);
    if (sv.empty()) continue;
    const auto eq = sv.find('=');
    if (eq == std::string_view::npos) {
      throw std::invalid_argument(path.string() + ":" + std::to_string(lineno) + ": expected key = value");
    }
    try {
      set(trim(sv.substr(0, eq)), sv.substr(eq + 1));
    } catch (const std::invalid_argument& e) {
      throw std::invalid_argument(path.string() + ":" + std::to_string(lineno) + ": " + e.what());
    }
  }
}

void Config::validate() const {
  grade_policy.validate();
  timeout_policy.validate();
  if (max_allocation == 0) throw std::invalid_argument("allocation.max_count must be >= 1");
}

}  // namespace tutorweb
