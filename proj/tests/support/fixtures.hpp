#pragma once

#include "tutorweb/content.hpp"
#include "tutorweb/store.hpp"
#include "tutorweb/sync_service.hpp"

#include <atomic>
#include <filesystem>
#include <memory>
#include <random>
#include <string>
#include <unistd.h>
#include <vector>

namespace tutorweb::testing {

class TempDir {
 public:
  TempDir() {
    static std::atomic<int> counter{0};
    path_ = std::filesystem::temp_directory_path() /
            ("tutorweb-test-" + std::to_string(::getpid()) + "-" + std::to_string(counter++));
    std::filesystem::remove_all(path_);
    std::filesystem::create_directories(path_);
  }
  ~TempDir() {
    std::error_code ec;
    std::filesystem::remove_all(path_, ec);
  }
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;

  const std::filesystem::path& path() const { return path_; }
  std::filesystem::path operator/(const std::string& name) const { return path_ / name; }

 private:
  std::filesystem::path path_;
};

/// Question number `i` with `k` choices; the correct one sits at i % k.
inline Question make_question(int i, std::size_t k = 4) {
  Question q;
  q.stem = "What is $" + std::to_string(i) + " + 1$?";
  for (std::size_t c = 0; c < k; ++c) {
    q.choices.push_back({"$" + std::to_string(i + 1 + static_cast<int>(c) - static_cast<int>(i % k)) + "$",
                         c == static_cast<std::size_t>(i) % k});
  }
  q.explanation = "Add one to " + std::to_string(i) + ".";
  q.id = question_id(q.stem, q.choices, q.explanation);
  return q;
}

inline std::vector<Question> make_questions(int n, int offset = 0, std::size_t k = 4) {
  std::vector<Question> out;
  for (int i = 0; i < n; ++i) out.push_back(make_question(i + offset, k));
  return out;
}

/// A file-backed store, a service over it, and one student-populated class.
struct ServiceFixture {
  TempDir dir;
  std::unique_ptr<Store> store;
  std::unique_ptr<SyncService> service;
  Principal admin{"admin", true};
  std::string lecture = "stats.intro.l1";

  explicit ServiceFixture(int questions = 10, ServiceSettings settings = {}) {
    store = open_sqlite_store(dir / "store.db");
    store->import_questions(LecturePath::parse("stats/intro/l1"), make_questions(questions));
    settings.admin_token = "admin-secret";
    service = std::make_unique<SyncService>(*store, settings);
  }

  void reopen(ServiceSettings settings = {}) {
    service.reset();
    store.reset();
    store = open_sqlite_store(dir / "store.db");
    settings.admin_token = "admin-secret";
    service = std::make_unique<SyncService>(*store, settings);
  }

  Principal student(const std::string& id, const std::string& cls = "class-a") {
    service->create_user(admin, id, false, {{cls, ClassRole::Student}});
    return {id, false};
  }

  /// Canonical index of the correct choice for a payload question.
  static std::int64_t correct_index(const nlohmann::json& q) {
    const auto& choices = q.at("choices");
    for (std::size_t i = 0; i < choices.size(); ++i) {
      if (choices[i].at("correct").get<bool>()) return static_cast<std::int64_t>(i);
    }
    return -1;
  }
};

}  // namespace tutorweb::testing
