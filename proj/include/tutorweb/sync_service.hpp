#pragma once

#include "tutorweb/answer_log.hpp"
#include "tutorweb/grading.hpp"
#include "tutorweb/pacing.hpp"
#include "tutorweb/store.hpp"

#include "json.hpp"

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace tutorweb {

/// Extra seconds a non-timed-out answer may exceed its time limit before the
/// server rejects it as implausible.
inline constexpr double kTimeoutToleranceSeconds = 2.0;

class ServiceError : public std::runtime_error {
 public:
  enum class Code { BadRequest, Unauthorized, Forbidden, UnknownLecture, UnknownToken, EmptyLecture };

  ServiceError(Code code, const std::string& message) : std::runtime_error(message), code_(code) {}
  Code code() const noexcept { return code_; }
  /// Stable wire name, e.g. "UnknownToken".
  const char* name() const noexcept;

 private:
  Code code_;
};

struct Principal {
  std::string user_id;
  bool admin = false;
};

struct AnswerRecord {
  std::string token;
  std::int64_t client_seq = 0;
  std::int64_t chosen_index = -1;
  double time_taken = 0.0;
  bool timed_out = false;
  std::int64_t client_timestamp = 0;
};

struct UploadBatch {
  std::string student_id;
  std::string lecture_id;
  std::vector<AnswerRecord> records;
};

enum class AckStatus { Accepted, Duplicate, Rejected };

struct RecordAck {
  std::int64_t client_seq = 0;
  AckStatus status = AckStatus::Accepted;
  std::string reason;  // set when rejected
};

struct Ack {
  std::vector<RecordAck> statuses;  // same order as the batch
  double grade = 0.0;
  std::size_t answered = 0;
};

struct ProgressRow {
  std::string student;
  std::string lecture;
  std::size_t answered = 0;
  double grade = 0.0;
  std::optional<std::int64_t> last_activity;
};

/// Grade state obtained by replaying a (student, lecture) log in seq order.
/// A non-timed-out answer slower than its limit plus tolerance is excluded.
struct ReplayedState {
  AnswerHistory history;
  Grade grade;
  std::vector<bool> included;  // parallel to the input
  std::optional<std::string> last_question;
};

ReplayedState replay_answers(const std::vector<StoredAnswer>& sorted_by_seq, const GradePolicy& grade_policy,
                             const TimeoutPolicy& timeout_policy);

struct ServiceSettings {
  GradePolicy grade_policy;
  TimeoutPolicy timeout_policy;
  std::size_t max_allocation = 100;
  std::string admin_token;  // bootstrap credential; empty disables it
};

class SyncService {
 public:
  SyncService(Store& store, ServiceSettings settings);

  /// Resolves a bearer token; nullopt when unknown.
  std::optional<Principal> authenticate(const std::string& bearer) const;

  /// Admin only. Creates or replaces a user and returns its fresh bearer token.
  std::string create_user(const Principal& caller, const std::string& user_id, bool admin,
                          const std::vector<std::pair<std::string, ClassRole>>& classes);

  nlohmann::json catalog() const;

  /// Creates or tops up the caller's allocation and returns the full payload.
  nlohmann::json get_allocation(const Principal& caller, const std::string& lecture_id,
                                std::optional<std::uint64_t> rng_seed = std::nullopt);

  /// Throws ServiceError(UnknownToken) without touching state when any token
  /// is not allocated to this student for this lecture.
  Ack ingest_batch(const Principal& caller, const UploadBatch& batch, std::int64_t server_now_ms);

  std::vector<ProgressRow> class_progress(const Principal& caller, const std::string& class_id);

  /// Newline-delimited JSON, ordered by (student, lecture, seq); only answers
  /// that enter the grade history.
  std::vector<ExportRecord> export_answers(const Principal& caller, const std::string& lecture_filter = {},
                                           const std::string& student_filter = {});

  const ServiceSettings& settings() const noexcept { return settings_; }

 private:
  Store& store_;
  ServiceSettings settings_;
};

std::string ack_status_name(AckStatus s);
nlohmann::json ack_to_json(const Ack& ack);
UploadBatch batch_from_json(const nlohmann::json& j);
nlohmann::json batch_to_json(const UploadBatch& batch);
nlohmann::json grade_policy_json(const GradePolicy& p);
nlohmann::json timeout_policy_json(const TimeoutPolicy& p);

std::string hash_bearer_token(const std::string& token);

}  // namespace tutorweb
