#pragma once

#include "tutorweb/allocation.hpp"
#include "tutorweb/content.hpp"

#include <cstdint>
#include <filesystem>
#include <functional>
#include <map>
#include <memory>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace tutorweb {

class CorruptStore : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// One answer event as persisted in the append-only log.
struct StoredAnswer {
  std::int64_t log_id = 0;  // commit order
  std::string student;
  std::string lecture;
  std::int64_t seq = 0;
  std::string token;
  std::string question;
  std::int64_t chosen = -1;
  bool correct = false;
  bool timed_out = false;
  double time_taken = 0.0;
  std::int64_t client_ts = 0;
  std::int64_t server_ts = 0;
};

struct LecturePath {
  std::string course;
  std::string tutorial;
  std::string lecture;

  /// "course.tutorial.lecture"; the lecture id used on the wire.
  std::string key() const;
  /// Accepts "course/tutorial/lecture" or "course.tutorial.lecture". Segments
  /// are [A-Za-z0-9_-]+.
  static LecturePath parse(std::string_view text);
};

struct UserRecord {
  std::string id;
  bool admin = false;
};

enum class ClassRole { Student, Tutor };

struct ClassMember {
  std::string user;
  ClassRole role = ClassRole::Student;
};

/// Cached per-(student, lecture) summary; always rederivable from the log.
struct StateSummary {
  std::size_t answered = 0;
  double grade = 0.0;
  std::optional<std::string> last_question;
  std::optional<std::int64_t> last_activity;
};

struct ImportCounts {
  std::size_t added = 0;
  std::size_t skipped = 0;
};

/// Persistence boundary for the sync service. Every mutating call made inside
/// transaction() commits or rolls back as a unit.
class Store {
 public:
  virtual ~Store() = default;

  /// Runs `body` in a write transaction; rethrows after rollback.
  virtual void transaction(const std::function<void()>& body) = 0;

  virtual std::vector<Course> catalog() = 0;
  virtual std::optional<Lecture> lecture(const std::string& key) = 0;
  virtual std::optional<Question> question(const std::string& id) = 0;
  /// Creates the course/tutorial/lecture chain as needed and adds questions
  /// not already stored (by content-hash id). Atomic.
  virtual ImportCounts import_questions(const LecturePath& path, const std::vector<Question>& questions) = 0;

  virtual void put_user(const UserRecord& user, const std::string& token_hash) = 0;
  virtual std::optional<UserRecord> user_by_token_hash(const std::string& token_hash) = 0;
  virtual void add_class_member(const std::string& class_id, const ClassMember& member) = 0;
  virtual std::vector<ClassMember> class_members(const std::string& class_id) = 0;

  virtual std::vector<AllocatedQuestion> allocation(const std::string& student, const std::string& lecture) = 0;
  virtual void add_allocation(const std::vector<AllocatedQuestion>& entries) = 0;
  virtual std::optional<AllocatedQuestion> resolve_token(const std::string& token) = 0;

  /// Ordered by seq.
  virtual std::vector<StoredAnswer> answers(const std::string& student, const std::string& lecture) = 0;
  virtual void append_answers(const std::vector<StoredAnswer>& answers) = 0;
  /// Ordered by (student, lecture, seq); empty filters match everything.
  virtual std::vector<StoredAnswer> all_answers(const std::string& lecture_filter,
                                                const std::string& student_filter) = 0;

  virtual void add_difficulty(const std::string& question, std::uint64_t attempts, std::uint64_t incorrect) = 0;
  virtual std::map<std::string, DifficultyStats> difficulty_stats() = 0;

  virtual std::optional<StateSummary> state_summary(const std::string& student, const std::string& lecture) = 0;
  virtual void put_state_summary(const std::string& student, const std::string& lecture,
                                 const StateSummary& summary) = 0;
};

/// Single-file SQLite store (WAL journal, full sync). Opening runs an
/// integrity check and throws CorruptStore if it fails.
std::unique_ptr<Store> open_sqlite_store(const std::filesystem::path& db_file);

}  // namespace tutorweb
