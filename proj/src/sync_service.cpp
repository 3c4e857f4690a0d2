#include "tutorweb/sync_service.hpp"

#include "tutorweb/allocation.hpp"
#include "tutorweb/crypto.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <map>
#include <numeric>
#include <set>

namespace tutorweb {

namespace {

using Code = ServiceError::Code;

void require_admin(const Principal& caller) {
  if (!caller.admin) throw ServiceError(Code::Forbidden, "admin role required");
}

std::uint64_t fresh_seed() {
  std::array<std::uint8_t, 8> b{};
  secure_random_bytes(b);
  std::uint64_t s = 0;
  for (auto x : b) s = (s << 8) | x;
  return s;
}

template <typename T>
T field(const nlohmann::json& j, const char* key) {
  const auto it = j.find(key);
  if (it == j.end()) throw ServiceError(Code::BadRequest, std::string("missing field '") + key + "'");
  try {
    return it->get<T>();
  } catch (const nlohmann::json::exception&) {
    throw ServiceError(Code::BadRequest, std::string("bad type for field '") + key + "'");
  }
}

}  // namespace

const char* ServiceError::name() const noexcept {
  switch (code_) {
    case Code::BadRequest:
      return "BadRequest";
    case Code::Unauthorized:
      return "Unauthorized";
    case Code::Forbidden:
      return "Forbidden";
    case Code::UnknownLecture:
      return "UnknownLecture";
    case Code::UnknownToken:
      return "UnknownToken";
    case Code::EmptyLecture:
      return "EmptyLecture";
  }
  return "Error";
}

std::string hash_bearer_token(const std::string& token) { return sha256_hex(token); }

ReplayedState replay_answers(const std::vector<StoredAnswer>& answers, const GradePolicy& gp,
                             const TimeoutPolicy& tp) {
  ReplayedState out;
  out.included.assign(answers.size(), false);
  GradeTracker tracker(gp);
  for (std::size_t i = 0; i < answers.size(); ++i) {
    const auto& a = answers[i];
    if (!a.timed_out) {
      const auto limit = timeout_seconds(tracker.grade().value, tp);
      if (limit && a.time_taken > *limit + kTimeoutToleranceSeconds) continue;
    }
    const AnswerOutcome outcome{a.correct && !a.timed_out, a.timed_out, a.time_taken};
    out.history.append(outcome);
    tracker.push(outcome);
    out.included[i] = true;
    out.last_question = a.question;
  }
  out.grade = tracker.grade();
  return out;
}

SyncService::SyncService(Store& store, ServiceSettings settings) : store_(store), settings_(std::move(settings)) {
  settings_.grade_policy.validate();
  settings_.timeout_policy.validate();
}

std::optional<Principal> SyncService::authenticate(const std::string& bearer) const {
  if (bearer.empty()) return std::nullopt;
  if (!settings_.admin_token.empty() && bearer == settings_.admin_token) return Principal{"admin", true};
  if (auto u = store_.user_by_token_hash(hash_bearer_token(bearer))) return Principal{u->id, u->admin};
  return std::nullopt;
}

std::string SyncService::create_user(const Principal& caller, const std::string& user_id, bool admin,
                                     const std::vector<std::pair<std::string, ClassRole>>& classes) {
  require_admin(caller);
  if (user_id.empty()) throw ServiceError(Code::BadRequest, "user id is empty");
  std::array<std::uint8_t, 32> raw{};
  secure_random_bytes(raw);
  const std::string token = base32_lower(raw);
  store_.transaction([&] {
    store_.put_user({user_id, admin}, hash_bearer_token(token));
    for (const auto& [cls, role] : classes) store_.add_class_member(cls, {user_id, role});
  });
  return token;
}

nlohmann::json SyncService::catalog() const {
  nlohmann::json courses = nlohmann::json::array();
  for (const auto& c : store_.catalog()) {
    nlohmann::json tutorials = nlohmann::json::array();
    for (const auto& t : c.tutorials) {
      nlohmann::json lectures = nlohmann::json::array();
      for (const auto& l : t.lectures) {
        lectures.push_back({{"id", l.id}, {"title", l.title}, {"questions", l.question_ids.size()}});
      }
      tutorials.push_back({{"id", t.id}, {"title", t.title}, {"lectures", lectures}});
    }
    courses.push_back({{"id", c.id}, {"title", c.title}, {"tutorials", tutorials}});
  }
  return {{"courses", courses}};
}

nlohmann::json SyncService::get_allocation(const Principal& caller, const std::string& lecture_id,
                                           std::optional<std::uint64_t> rng_seed) {
  const auto lecture = store_.lecture(lecture_id);
  if (!lecture) throw ServiceError(Code::UnknownLecture, "unknown lecture " + lecture_id);

  StudentLectureState state;
  state.student_id = caller.user_id;
  state.lecture_id = lecture_id;
  store_.transaction([&] {
    state.allocation = store_.allocation(caller.user_id, lecture_id);
    try {
      const auto added = allocate(state, *lecture, settings_.max_allocation, rng_seed ? *rng_seed : fresh_seed());
      if (!added.empty()) store_.add_allocation(added);
    } catch (const EmptyLecture& e) {
      throw ServiceError(Code::EmptyLecture, e.what());
    }
  });

  nlohmann::json questions = nlohmann::json::array();
  for (const auto& a : state.allocation) {
    const auto q = store_.question(a.question_id);
    if (!q) continue;
    nlohmann::json choices = nlohmann::json::array();
    for (const auto& c : q->choices) choices.push_back({{"text", c.text}, {"correct", c.correct}});
    nlohmann::json item = {{"token", a.token.str()},
                           {"stem", q->stem},
                           {"choices", choices},
                           {"explanation", q->explanation}};
    if (q->image_url) item["imageUrl"] = *q->image_url;
    questions.push_back(std::move(item));
  }
  const auto summary = store_.state_summary(caller.user_id, lecture_id).value_or(StateSummary{});
  return {{"lecture", lecture_id},
          {"questions", questions},
          {"gradePolicy", grade_policy_json(settings_.grade_policy)},
          {"timeoutPolicy", timeout_policy_json(settings_.timeout_policy)},
          {"grade", summary.grade},
          {"answered", summary.answered}};
}

Ack SyncService::ingest_batch(const Principal& caller, const UploadBatch& batch, std::int64_t now_ms) {
  if (caller.user_id != batch.student_id) {
    throw ServiceError(Code::Forbidden, "batch belongs to a different student");
  }
  if (!store_.lecture(batch.lecture_id)) throw ServiceError(Code::UnknownLecture, "unknown lecture " + batch.lecture_id);

  Ack ack;
  ack.statuses.resize(batch.records.size());
  store_.transaction([&] {
    std::vector<std::string> question_of(batch.records.size());
    for (std::size_t i = 0; i < batch.records.size(); ++i) {
      const auto resolved = store_.resolve_token(batch.records[i].token);
      if (!resolved || resolved->student_id != batch.student_id || resolved->lecture_id != batch.lecture_id) {
        throw ServiceError(Code::UnknownToken, "token not allocated to this student for this lecture");
      }
      question_of[i] = resolved->question_id;
    }

    std::set<std::int64_t> seen;
    for (const auto& a : store_.answers(batch.student_id, batch.lecture_id)) seen.insert(a.seq);

    std::vector<std::size_t> order(batch.records.size());
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
      return batch.records[a].client_seq < batch.records[b].client_seq;
    });

    std::map<std::string, Question> questions;
    std::vector<StoredAnswer> staged;
    std::vector<std::size_t> staged_index;
    for (const std::size_t i : order) {
      const auto& r = batch.records[i];
      auto& st = ack.statuses[i];
      st.client_seq = r.client_seq;
      if (r.client_seq < 1) {
        st = {r.client_seq, AckStatus::Rejected, "invalid_seq"};
        continue;
      }
      if (seen.contains(r.client_seq)) {
        st.status = AckStatus::Duplicate;
        continue;
      }
      auto qit = questions.find(question_of[i]);
      if (qit == questions.end()) {
        auto q = store_.question(question_of[i]);
        if (!q) throw ServiceError(Code::UnknownToken, "allocated question no longer exists");
        qit = questions.emplace(question_of[i], std::move(*q)).first;
      }
      const Question& q = qit->second;
      if (!std::isfinite(r.time_taken) || r.time_taken < 0.0) {
        st = {r.client_seq, AckStatus::Rejected, "invalid_time"};
        continue;
      }
      const auto k = static_cast<std::int64_t>(q.choices.size());
      if (!r.timed_out && (r.chosen_index < 0 || r.chosen_index >= k)) {
        st = {r.client_seq, AckStatus::Rejected, "invalid_choice"};
        continue;
      }
      StoredAnswer a;
      a.student = batch.student_id;
      a.lecture = batch.lecture_id;
      a.seq = r.client_seq;
      a.token = r.token;
      a.question = q.id;
      a.chosen = r.timed_out && (r.chosen_index < 0 || r.chosen_index >= k) ? -1 : r.chosen_index;
      a.correct = !r.timed_out && static_cast<std::size_t>(r.chosen_index) == q.correct_index();
      a.timed_out = r.timed_out;
      a.time_taken = r.time_taken;
      a.client_ts = r.client_timestamp;
      a.server_ts = now_ms;
      seen.insert(a.seq);
      staged.push_back(std::move(a));
      staged_index.push_back(i);
      st.status = AckStatus::Accepted;
    }

    if (!staged.empty()) {
      store_.append_answers(staged);
      std::map<std::string, std::pair<std::uint64_t, std::uint64_t>> diff;
      for (const auto& a : staged) {
        auto& [attempts, incorrect] = diff[a.question];
        ++attempts;
        incorrect += a.correct ? 0 : 1;
      }
      for (const auto& [q, d] : diff) store_.add_difficulty(q, d.first, d.second);
    }

    const auto all = store_.answers(batch.student_id, batch.lecture_id);
    const auto replayed = replay_answers(all, settings_.grade_policy, settings_.timeout_policy);
    for (std::size_t s = 0; s < staged.size(); ++s) {
      const auto pos = std::find_if(all.begin(), all.end(), [&](const StoredAnswer& a) { return a.seq == staged[s].seq; });
      if (!replayed.included[static_cast<std::size_t>(pos - all.begin())]) {
        ack.statuses[staged_index[s]] = {staged[s].seq, AckStatus::Rejected, "timeout_violation"};
      }
    }

    StateSummary summary;
    summary.answered = replayed.history.size();
    summary.grade = replayed.grade.value;
    summary.last_question = replayed.last_question;
    for (const auto& a : all) {
      summary.last_activity = std::max(summary.last_activity.value_or(a.server_ts), a.server_ts);
    }
    if (!staged.empty()) store_.put_state_summary(batch.student_id, batch.lecture_id, summary);
    ack.grade = summary.grade;
    ack.answered = summary.answered;
  });
  return ack;
}

std::vector<ProgressRow> SyncService::class_progress(const Principal& caller, const std::string& class_id) {
  const auto members = store_.class_members(class_id);
  if (!caller.admin) {
    const bool tutor = std::any_of(members.begin(), members.end(), [&](const ClassMember& m) {
      return m.user == caller.user_id && m.role == ClassRole::Tutor;
    });
    if (!tutor) throw ServiceError(Code::Forbidden, "tutor role required for class " + class_id);
  }
  std::vector<std::string> lectures;
  for (const auto& c : store_.catalog()) {
    for (const auto& t : c.tutorials) {
      for (const auto& l : t.lectures) lectures.push_back(l.id);
    }
  }
  std::vector<ProgressRow> rows;
  for (const auto& m : members) {
    if (m.role != ClassRole::Student) continue;
    for (const auto& lec : lectures) {
      const auto answers = store_.answers(m.user, lec);
      const auto replayed = replay_answers(answers, settings_.grade_policy, settings_.timeout_policy);
      ProgressRow row{m.user, lec, replayed.history.size(), replayed.grade.value, std::nullopt};
      for (const auto& a : answers) row.last_activity = std::max(row.last_activity.value_or(a.server_ts), a.server_ts);
      rows.push_back(std::move(row));
    }
  }
  return rows;
}

std::vector<ExportRecord> SyncService::export_answers(const Principal& caller, const std::string& lecture_filter,
                                                      const std::string& student_filter) {
  require_admin(caller);
  const auto all = store_.all_answers(lecture_filter, student_filter);
  std::vector<ExportRecord> out;
  out.reserve(all.size());
  for (std::size_t begin = 0; begin < all.size();) {
    std::size_t end = begin;
    while (end < all.size() && all[end].student == all[begin].student && all[end].lecture == all[begin].lecture) ++end;
    const std::vector<StoredAnswer> group(all.begin() + static_cast<std::ptrdiff_t>(begin),
                                          all.begin() + static_cast<std::ptrdiff_t>(end));
    const auto replayed = replay_answers(group, settings_.grade_policy, settings_.timeout_policy);
    for (std::size_t i = 0; i < group.size(); ++i) {
      if (!replayed.included[i]) continue;
      const auto& a = group[i];
      out.push_back({a.student, a.lecture, a.seq, a.question, a.chosen, a.correct, a.timed_out, a.time_taken,
                     a.client_ts, a.server_ts});
    }
    begin = end;
  }
  return out;
}

std::string ack_status_name(AckStatus s) {
  switch (s) {
    case AckStatus::Accepted:
      return "accepted";
    case AckStatus::Duplicate:
      return "duplicate";
    case AckStatus::Rejected:
      return "rejected";
  }
  return "rejected";
}

nlohmann::json ack_to_json(const Ack& ack) {
  nlohmann::json statuses = nlohmann::json::array();
  for (const auto& s : ack.statuses) {
    nlohmann::json item = {{"clientSeq", s.client_seq}, {"status", ack_status_name(s.status)}};
    if (s.status == AckStatus::Rejected) item["reason"] = s.reason;
    statuses.push_back(std::move(item));
  }
  return {{"statuses", statuses}, {"grade", ack.grade}, {"answered", ack.answered}};
}

UploadBatch batch_from_json(const nlohmann::json& j) {
  if (!j.is_object()) throw ServiceError(Code::BadRequest, "batch must be a JSON object");
  UploadBatch b;
  b.student_id = field<std::string>(j, "studentId");
  b.lecture_id = field<std::string>(j, "lectureId");
  const auto records = field<nlohmann::json>(j, "records");
  if (!records.is_array()) throw ServiceError(Code::BadRequest, "records must be an array");
  for (const auto& r : records) {
    AnswerRecord a;
    a.token = field<std::string>(r, "token");
    a.client_seq = field<std::int64_t>(r, "clientSeq");
    a.timed_out = r.value("timedOut", false);
    a.chosen_index = r.contains("chosenIndex") && !r["chosenIndex"].is_null() ? field<std::int64_t>(r, "chosenIndex") : -1;
    a.time_taken = field<double>(r, "timeTaken");
    a.client_timestamp = r.value("clientTimestamp", std::int64_t{0});
    b.records.push_back(std::move(a));
  }
  return b;
}

nlohmann::json batch_to_json(const UploadBatch& b) {
  nlohmann::json records = nlohmann::json::array();
  for (const auto& r : b.records) {
    records.push_back({{"token", r.token},
                       {"clientSeq", r.client_seq},
                       {"chosenIndex", r.chosen_index},
                       {"timeTaken", r.time_taken},
                       {"timedOut", r.timed_out},
                       {"clientTimestamp", r.client_timestamp}});
  }
  return {{"studentId", b.student_id}, {"lectureId", b.lecture_id}, {"records", records}};
}

nlohmann::json grade_policy_json(const GradePolicy& p) {
  return {{"baseWindow", p.base_window}, {"growthThreshold", p.growth_threshold},
          {"growthDivisor", p.growth_divisor}, {"maxWindow", p.max_window},
          {"scale", p.scale}, {"lastAnswerWeight", p.last_answer_weight}};
}

nlohmann::json timeout_policy_json(const TimeoutPolicy& p) {
  return {{"enabled", p.enabled}, {"tMin", p.t_min}, {"tMax", p.t_max}, {"gMin", p.g_min}, {"width", p.width}};
}

}  // namespace tutorweb
