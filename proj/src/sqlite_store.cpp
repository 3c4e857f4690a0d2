#include "tutorweb/store.hpp"

#include "json.hpp"

#include <sqlite3.h>

#include <algorithm>
#include <mutex>

namespace tutorweb {

namespace {

constexpr int kSchemaVersion = 1;

constexpr const char* kSchema = R"sql(
CREATE TABLE IF NOT EXISTS meta(key TEXT PRIMARY KEY, value TEXT NOT NULL);
CREATE TABLE IF NOT EXISTS courses(id TEXT PRIMARY KEY, title TEXT NOT NULL, ord INTEGER NOT NULL);
CREATE TABLE IF NOT EXISTS tutorials(
  course TEXT NOT NULL, id TEXT NOT NULL, title TEXT NOT NULL, ord INTEGER NOT NULL,
  PRIMARY KEY(course, id));
CREATE TABLE IF NOT EXISTS lectures(
  key TEXT PRIMARY KEY, course TEXT NOT NULL, tutorial TEXT NOT NULL, id TEXT NOT NULL,
  title TEXT NOT NULL, ord INTEGER NOT NULL);
CREATE TABLE IF NOT EXISTS questions(
  id TEXT PRIMARY KEY, lecture TEXT NOT NULL, ord INTEGER NOT NULL, stem TEXT NOT NULL,
  choices TEXT NOT NULL, explanation TEXT NOT NULL, image_url TEXT);
CREATE INDEX IF NOT EXISTS questions_by_lecture ON questions(lecture, ord);
CREATE TABLE IF NOT EXISTS users(id TEXT PRIMARY KEY, token_hash TEXT UNIQUE NOT NULL, admin INTEGER NOT NULL);
CREATE TABLE IF NOT EXISTS class_members(
  class_id TEXT NOT NULL, user_id TEXT NOT NULL, role TEXT NOT NULL, PRIMARY KEY(class_id, user_id));
CREATE TABLE IF NOT EXISTS allocations(
  seq INTEGER PRIMARY KEY AUTOINCREMENT, token TEXT UNIQUE NOT NULL, student TEXT NOT NULL,
  lecture TEXT NOT NULL, question TEXT NOT NULL);
CREATE INDEX IF NOT EXISTS allocations_by_state ON allocations(student, lecture);
CREATE TABLE IF NOT EXISTS answers(
  log_id INTEGER PRIMARY KEY AUTOINCREMENT, student TEXT NOT NULL, lecture TEXT NOT NULL,
  seq INTEGER NOT NULL, token TEXT NOT NULL, question TEXT NOT NULL, chosen INTEGER NOT NULL,
  correct INTEGER NOT NULL, timed_out INTEGER NOT NULL, time_taken REAL NOT NULL,
  client_ts INTEGER NOT NULL, server_ts INTEGER NOT NULL, UNIQUE(student, lecture, seq));
CREATE TRIGGER IF NOT EXISTS answers_no_update BEFORE UPDATE ON answers
  BEGIN SELECT RAISE(ABORT, 'answer log is append-only'); END;
CREATE TRIGGER IF NOT EXISTS answers_no_delete BEFORE DELETE ON answers
  BEGIN SELECT RAISE(ABORT, 'answer log is append-only'); END;
CREATE TABLE IF NOT EXISTS difficulty(
  question TEXT PRIMARY KEY, attempts INTEGER NOT NULL, incorrect INTEGER NOT NULL);
CREATE TABLE IF NOT EXISTS states(
  student TEXT NOT NULL, lecture TEXT NOT NULL, answered INTEGER NOT NULL, grade REAL NOT NULL,
  last_question TEXT, last_activity INTEGER, PRIMARY KEY(student, lecture));
)sql";

class Db {
 public:
  explicit Db(const std::filesystem::path& file) {
    if (sqlite3_open_v2(file.c_str(), &db_, SQLITE_OPEN_READWRITE | SQLITE_OPEN_CREATE | SQLITE_OPEN_FULLMUTEX,
                        nullptr) != SQLITE_OK) {
      std::string msg = db_ ? sqlite3_errmsg(db_) : "out of memory";
      sqlite3_close(db_);
      db_ = nullptr;
      throw CorruptStore("cannot open store " + file.string() + ": " + msg);
    }
    sqlite3_busy_timeout(db_, 5000);
  }
  ~Db() { sqlite3_close(db_); }
  Db(const Db&) = delete;
  Db& operator=(const Db&) = delete;

  sqlite3* get() const { return db_; }

  void exec(const char* sql) {
    char* err = nullptr;
    if (sqlite3_exec(db_, sql, nullptr, nullptr, &err) != SQLITE_OK) {
      std::string msg = err ? err : "unknown error";
      sqlite3_free(err);
      throw std::runtime_error("sqlite: " + msg);
    }
  }

 private:
  sqlite3* db_ = nullptr;
};

class Stmt {
 public:
  Stmt(const Db& db, const char* sql) : db_(db.get()) {
    if (sqlite3_prepare_v2(db_, sql, -1, &stmt_, nullptr) != SQLITE_OK) {
      throw std::runtime_error(std::string("sqlite prepare: ") + sqlite3_errmsg(db_));
    }
  }
  ~Stmt() { sqlite3_finalize(stmt_); }
  Stmt(const Stmt&) = delete;
  Stmt& operator=(const Stmt&) = delete;

  Stmt& bind(int i, const std::string& v) {
    check(sqlite3_bind_text(stmt_, i, v.data(), static_cast<int>(v.size()), SQLITE_TRANSIENT));
    return *this;
  }
  Stmt& bind(int i, std::int64_t v) {
    check(sqlite3_bind_int64(stmt_, i, v));
    return *this;
  }
  Stmt& bind(int i, double v) {
    check(sqlite3_bind_double(stmt_, i, v));
    return *this;
  }
  Stmt& bind(int i, const std::optional<std::string>& v) {
    if (v) return bind(i, *v);
    check(sqlite3_bind_null(stmt_, i));
    return *this;
  }
  Stmt& bind(int i, const std::optional<std::int64_t>& v) {
    if (v) return bind(i, *v);
    check(sqlite3_bind_null(stmt_, i));
    return *this;
  }

  /// True while a row is available.
  bool step() {
    const int rc = sqlite3_step(stmt_);
    if (rc == SQLITE_ROW) return true;
    if (rc == SQLITE_DONE) return false;
    throw std::runtime_error(std::string("sqlite step: ") + sqlite3_errmsg(db_));
  }
  void run() {
    while (step()) {
    }
  }

  std::string text(int col) const {
    const auto* p = sqlite3_column_text(stmt_, col);
    return p ? std::string(reinterpret_cast<const char*>(p), static_cast<std::size_t>(sqlite3_column_bytes(stmt_, col)))
             : std::string{};
  }
  std::optional<std::string> opt_text(int col) const {
    if (sqlite3_column_type(stmt_, col) == SQLITE_NULL) return std::nullopt;
    return text(col);
  }
  std::int64_t i64(int col) const { return sqlite3_column_int64(stmt_, col); }
  std::optional<std::int64_t> opt_i64(int col) const {
    if (sqlite3_column_type(stmt_, col) == SQLITE_NULL) return std::nullopt;
    return i64(col);
  }
  double f64(int col) const { return sqlite3_column_double(stmt_, col); }

 private:
  void check(int rc) {
    if (rc != SQLITE_OK) throw std::runtime_error(std::string("sqlite bind: ") + sqlite3_errmsg(db_));
  }
  sqlite3* db_;
  sqlite3_stmt* stmt_ = nullptr;
};

StoredAnswer read_answer(const Stmt& s) {
  StoredAnswer a;
  a.log_id = s.i64(0);
  a.student = s.text(1);
  a.lecture = s.text(2);
  a.seq = s.i64(3);
  a.token = s.text(4);
  a.question = s.text(5);
  a.chosen = s.i64(6);
  a.correct = s.i64(7) != 0;
  a.timed_out = s.i64(8) != 0;
  a.time_taken = s.f64(9);
  a.client_ts = s.i64(10);
  a.server_ts = s.i64(11);
  return a;
}

constexpr const char* kAnswerCols =
    "log_id, student, lecture, seq, token, question, chosen, correct, timed_out, time_taken, client_ts, server_ts";

class SqliteStore final : public Store {
 public:
  explicit SqliteStore(const std::filesystem::path& file) : db_(file) {
    try {
      Stmt check(db_, "PRAGMA quick_check");
      if (!check.step() || check.text(0) != "ok") throw CorruptStore("integrity check failed");
    } catch (const CorruptStore&) {
      throw;
    } catch (const std::exception& e) {
      throw CorruptStore(std::string("store unreadable: ") + e.what());
    }
    db_.exec("PRAGMA journal_mode=WAL; PRAGMA synchronous=FULL; PRAGMA foreign_keys=ON;");
    db_.exec(kSchema);
    Stmt ver(db_, "SELECT value FROM meta WHERE key = 'schema_version'");
    if (ver.step()) {
      if (ver.text(0) != std::to_string(kSchemaVersion)) {
        throw CorruptStore("unsupported schema version " + ver.text(0));
      }
    } else {
      Stmt put(db_, "INSERT INTO meta(key, value) VALUES('schema_version', ?)");
      put.bind(1, std::to_string(kSchemaVersion)).run();
    }
  }

  void transaction(const std::function<void()>& body) override {
    std::lock_guard lock(mu_);
    if (depth_ > 0) {
      ++depth_;
      try {
        body();
      } catch (...) {
        --depth_;
        throw;
      }
      --depth_;
      return;
    }
    db_.exec("BEGIN IMMEDIATE");
    depth_ = 1;
    try {
      body();
      db_.exec("COMMIT");
    } catch (...) {
      depth_ = 0;
      sqlite3_exec(db_.get(), "ROLLBACK", nullptr, nullptr, nullptr);
      throw;
    }
    depth_ = 0;
  }

  std::vector<Course> catalog() override {
    std::lock_guard lock(mu_);
    std::vector<Course> out;
    Stmt courses(db_, "SELECT id, title FROM courses ORDER BY ord");
    while (courses.step()) out.push_back({courses.text(0), courses.text(1), {}});
    for (auto& c : out) {
      Stmt tuts(db_, "SELECT id, title FROM tutorials WHERE course = ? ORDER BY ord");
      tuts.bind(1, c.id);
      while (tuts.step()) c.tutorials.push_back({tuts.text(0), tuts.text(1), {}});
      for (auto& t : c.tutorials) {
        Stmt lecs(db_, "SELECT key FROM lectures WHERE course = ? AND tutorial = ? ORDER BY ord");
        lecs.bind(1, c.id).bind(2, t.id);
        while (lecs.step()) {
          if (auto l = load_lecture(lecs.text(0))) t.lectures.push_back(std::move(*l));
        }
      }
    }
    return out;
  }

  std::optional<Lecture> lecture(const std::string& key) override {
    std::lock_guard lock(mu_);
    return load_lecture(key);
  }

  std::optional<Question> question(const std::string& id) override {
    std::lock_guard lock(mu_);
    Stmt s(db_, "SELECT id, stem, choices, explanation, image_url FROM questions WHERE id = ?");
    s.bind(1, id);
    if (!s.step()) return std::nullopt;
    Question q;
    q.id = s.text(0);
    q.stem = s.text(1);
    for (const auto& c : nlohmann::json::parse(s.text(2))) {
      q.choices.push_back({c.at("text").get<std::string>(), c.at("correct").get<bool>()});
    }
    q.explanation = s.text(3);
    q.image_url = s.opt_text(4);
    return q;
  }

  ImportCounts import_questions(const LecturePath& path, const std::vector<Question>& questions) override {
    ImportCounts counts;
    transaction([&] {
      ensure_lecture(path);
      const std::string key = path.key();
      Stmt next(db_, "SELECT COALESCE(MAX(ord) + 1, 0) FROM questions WHERE lecture = ?");
      next.bind(1, key);
      next.step();
      std::int64_t ord = next.i64(0);
      for (const auto& q : questions) {
        validate_question(q);
        Stmt exists(db_, "SELECT 1 FROM questions WHERE id = ?");
        exists.bind(1, q.id);
        if (exists.step()) {
          ++counts.skipped;
          continue;
        }
        nlohmann::json choices = nlohmann::json::array();
        for (const auto& c : q.choices) choices.push_back({{"text", c.text}, {"correct", c.correct}});
        Stmt ins(db_,
                 "INSERT INTO questions(id, lecture, ord, stem, choices, explanation, image_url) "
                 "VALUES(?, ?, ?, ?, ?, ?, ?)");
        ins.bind(1, q.id).bind(2, key).bind(3, ord++).bind(4, q.stem).bind(5, choices.dump());
        ins.bind(6, q.explanation).bind(7, q.image_url).run();
        ++counts.added;
      }
    });
    return counts;
  }

  void put_user(const UserRecord& user, const std::string& token_hash) override {
    std::lock_guard lock(mu_);
    Stmt s(db_,
           "INSERT INTO users(id, token_hash, admin) VALUES(?, ?, ?) "
           "ON CONFLICT(id) DO UPDATE SET token_hash = excluded.token_hash, admin = excluded.admin");
    s.bind(1, user.id).bind(2, token_hash).bind(3, std::int64_t{user.admin ? 1 : 0}).run();
  }

  std::optional<UserRecord> user_by_token_hash(const std::string& token_hash) override {
    std::lock_guard lock(mu_);
    Stmt s(db_, "SELECT id, admin FROM users WHERE token_hash = ?");
    s.bind(1, token_hash);
    if (!s.step()) return std::nullopt;
    return UserRecord{s.text(0), s.i64(1) != 0};
  }

  void add_class_member(const std::string& class_id, const ClassMember& m) override {
    std::lock_guard lock(mu_);
    Stmt s(db_,
           "INSERT INTO class_members(class_id, user_id, role) VALUES(?, ?, ?) "
           "ON CONFLICT(class_id, user_id) DO UPDATE SET role = excluded.role");
    s.bind(1, class_id).bind(2, m.user).bind(3, std::string(m.role == ClassRole::Tutor ? "tutor" : "student")).run();
  }

  std::vector<ClassMember> class_members(const std::string& class_id) override {
    std::lock_guard lock(mu_);
    Stmt s(db_, "SELECT user_id, role FROM class_members WHERE class_id = ? ORDER BY user_id");
    s.bind(1, class_id);
    std::vector<ClassMember> out;
    while (s.step()) out.push_back({s.text(0), s.text(1) == "tutor" ? ClassRole::Tutor : ClassRole::Student});
    return out;
  }

  std::vector<AllocatedQuestion> allocation(const std::string& student, const std::string& lecture) override {
    std::lock_guard lock(mu_);
    Stmt s(db_, "SELECT token, question FROM allocations WHERE student = ? AND lecture = ? ORDER BY seq");
    s.bind(1, student).bind(2, lecture);
    std::vector<AllocatedQuestion> out;
    while (s.step()) {
      auto token = AllocationToken::parse(s.text(0));
      if (!token) throw CorruptStore("malformed token in allocation table");
      out.push_back({*token, student, lecture, s.text(1)});
    }
    return out;
  }

  void add_allocation(const std::vector<AllocatedQuestion>& entries) override {
    transaction([&] {
      for (const auto& e : entries) {
        Stmt s(db_, "INSERT INTO allocations(token, student, lecture, question) VALUES(?, ?, ?, ?)");
        s.bind(1, e.token.str()).bind(2, e.student_id).bind(3, e.lecture_id).bind(4, e.question_id).run();
      }
    });
  }

  std::optional<AllocatedQuestion> resolve_token(const std::string& token) override {
    std::lock_guard lock(mu_);
    auto parsed = AllocationToken::parse(token);
    if (!parsed) return std::nullopt;
    Stmt s(db_, "SELECT student, lecture, question FROM allocations WHERE token = ?");
    s.bind(1, token);
    if (!s.step()) return std::nullopt;
    return AllocatedQuestion{*parsed, s.text(0), s.text(1), s.text(2)};
  }

  std::vector<StoredAnswer> answers(const std::string& student, const std::string& lecture) override {
    std::lock_guard lock(mu_);
    const std::string sql =
        std::string("SELECT ") + kAnswerCols + " FROM answers WHERE student = ? AND lecture = ? ORDER BY seq";
    Stmt s(db_, sql.c_str());
    s.bind(1, student).bind(2, lecture);
    std::vector<StoredAnswer> out;
    while (s.step()) out.push_back(read_answer(s));
    return out;
  }

  void append_answers(const std::vector<StoredAnswer>& answers) override {
    transaction([&] {
      for (const auto& a : answers) {
        Stmt s(db_,
               "INSERT INTO answers(student, lecture, seq, token, question, chosen, correct, timed_out, "
               "time_taken, client_ts, server_ts) VALUES(?, ?, ?, ?, ?, ?, ?, ?, ?, ?, ?)");
        s.bind(1, a.student).bind(2, a.lecture).bind(3, a.seq).bind(4, a.token).bind(5, a.question);
        s.bind(6, a.chosen).bind(7, std::int64_t{a.correct ? 1 : 0}).bind(8, std::int64_t{a.timed_out ? 1 : 0});
        s.bind(9, a.time_taken).bind(10, a.client_ts).bind(11, a.server_ts).run();
      }
    });
  }

  std::vector<StoredAnswer> all_answers(const std::string& lecture_filter, const std::string& student_filter) override {
    std::lock_guard lock(mu_);
    const std::string sql = std::string("SELECT ") + kAnswerCols +
                            " FROM answers WHERE (?1 = '' OR lecture = ?1) AND (?2 = '' OR student = ?2)"
                            " ORDER BY student, lecture, seq";
    Stmt s(db_, sql.c_str());
    s.bind(1, lecture_filter).bind(2, student_filter);
    std::vector<StoredAnswer> out;
    while (s.step()) out.push_back(read_answer(s));
    return out;
  }

  void add_difficulty(const std::string& question, std::uint64_t attempts, std::uint64_t incorrect) override {
    std::lock_guard lock(mu_);
    Stmt s(db_,
           "INSERT INTO difficulty(question, attempts, incorrect) VALUES(?1, ?2, ?3) "
           "ON CONFLICT(question) DO UPDATE SET attempts = attempts + ?2, incorrect = incorrect + ?3");
    s.bind(1, question).bind(2, static_cast<std::int64_t>(attempts)).bind(3, static_cast<std::int64_t>(incorrect)).run();
  }

  std::map<std::string, DifficultyStats> difficulty_stats() override {
    std::lock_guard lock(mu_);
    Stmt s(db_, "SELECT question, attempts, incorrect FROM difficulty");
    std::map<std::string, DifficultyStats> out;
    while (s.step()) {
      out[s.text(0)] = {static_cast<std::uint64_t>(s.i64(1)), static_cast<std::uint64_t>(s.i64(2))};
    }
    return out;
  }

  std::optional<StateSummary> state_summary(const std::string& student, const std::string& lecture) override {
    std::lock_guard lock(mu_);
    Stmt s(db_,
           "SELECT answered, grade, last_question, last_activity FROM states WHERE student = ? AND lecture = ?");
    s.bind(1, student).bind(2, lecture);
    if (!s.step()) return std::nullopt;
    return StateSummary{static_cast<std::size_t>(s.i64(0)), s.f64(1), s.opt_text(2), s.opt_i64(3)};
  }

  void put_state_summary(const std::string& student, const std::string& lecture, const StateSummary& st) override {
    std::lock_guard lock(mu_);
    Stmt s(db_,
           "INSERT INTO states(student, lecture, answered, grade, last_question, last_activity) "
           "VALUES(?, ?, ?, ?, ?, ?) ON CONFLICT(student, lecture) DO UPDATE SET answered = excluded.answered, "
           "grade = excluded.grade, last_question = excluded.last_question, last_activity = excluded.last_activity");
    s.bind(1, student).bind(2, lecture).bind(3, static_cast<std::int64_t>(st.answered)).bind(4, st.grade);
    s.bind(5, st.last_question).bind(6, st.last_activity).run();
  }

 private:
  std::optional<Lecture> load_lecture(const std::string& key) {
    Stmt s(db_, "SELECT id, title FROM lectures WHERE key = ?");
    s.bind(1, key);
    if (!s.step()) return std::nullopt;
    Lecture l{key, s.text(1), {}};
    Stmt qs(db_, "SELECT id FROM questions WHERE lecture = ? ORDER BY ord");
    qs.bind(1, key);
    while (qs.step()) l.question_ids.push_back(qs.text(0));
    return l;
  }

  void ensure_lecture(const LecturePath& p) {
    Stmt c(db_,
           "INSERT OR IGNORE INTO courses(id, title, ord) "
           "VALUES(?1, ?1, (SELECT COALESCE(MAX(ord) + 1, 0) FROM courses))");
    c.bind(1, p.course).run();
    Stmt t(db_,
           "INSERT OR IGNORE INTO tutorials(course, id, title, ord) "
           "VALUES(?1, ?2, ?2, (SELECT COALESCE(MAX(ord) + 1, 0) FROM tutorials WHERE course = ?1))");
    t.bind(1, p.course).bind(2, p.tutorial).run();
    Stmt l(db_,
           "INSERT OR IGNORE INTO lectures(key, course, tutorial, id, title, ord) VALUES(?1, ?2, ?3, ?4, ?4, "
           "(SELECT COALESCE(MAX(ord) + 1, 0) FROM lectures WHERE course = ?2 AND tutorial = ?3))");
    l.bind(1, p.key()).bind(2, p.course).bind(3, p.tutorial).bind(4, p.lecture).run();
  }

  Db db_;
  std::recursive_mutex mu_;
  int depth_ = 0;
};

bool valid_segment(std::string_view s) {
  return !s.empty() && std::all_of(s.begin(), s.end(), [](char c) {
    return (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z') || (c >= '0' && c <= '9') || c == '_' || c == '-';
  });
}

}  // namespace

std::string LecturePath::key() const { return course + "." + tutorial + "." + lecture; }

LecturePath LecturePath::parse(std::string_view text) {
  std::vector<std::string> parts;
  std::size_t start = 0;
  for (std::size_t i = 0; i <= text.size(); ++i) {
    if (i == text.size() || text[i] == '/' || text[i] == '.') {
      parts.emplace_back(text.substr(start, i - start));
      start = i + 1;
    }
  }
  if (parts.size() != 3 || !std::all_of(parts.begin(), parts.end(), [](const auto& p) { return valid_segment(p); })) {
    throw std::invalid_argument("lecture path must be course/tutorial/lecture with [A-Za-z0-9_-] segments: '" +
                                std::string(text) + "'");
  }
  return {parts[0], parts[1], parts[2]};
}

std::unique_ptr<Store> open_sqlite_store(const std::filesystem::path& db_file) {
  if (db_file.has_parent_path()) std::filesystem::create_directories(db_file.parent_path());
  return std::make_unique<SqliteStore>(db_file);
}

}  // namespace tutorweb
