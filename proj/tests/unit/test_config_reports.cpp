#include "tutorweb/config.hpp"
#include "tutorweb/reports.hpp"

#include "doctest.h"
#include "json.hpp"
#include "support/fixtures.hpp"

#include <fstream>
#include <sstream>

using namespace tutorweb;
using namespace tutorweb::analytics;

TEST_CASE("config keys") {
  Config c;
  c.set("port", "9000");
  c.set("data_dir", "/tmp/x");
  c.set("admin_token", "s3cret");
  c.set("grade.max_window", "40");
  c.set("grade.last_answer_weight", "2");
  c.set("timeout.enabled", "false");
  c.set("timeout.t_min", "20");
  c.set("allocation.max_count", "50");
  CHECK(c.port == 9000);
  CHECK(c.data_dir == "/tmp/x");
  CHECK(c.admin_token == "s3cret");
  CHECK(c.grade_policy.max_window == 40);
  CHECK(c.grade_policy.last_answer_weight == 2.0);
  CHECK_FALSE(c.timeout_policy.enabled);
  CHECK(c.timeout_policy.t_min == 20.0);
  CHECK(c.max_allocation == 50);
  CHECK_THROWS_AS(c.set("nope", "1"), std::invalid_argument);
  CHECK_THROWS_AS(c.set("port", "abc"), std::invalid_argument);
  CHECK_THROWS_AS(c.set("port", "70000"), std::invalid_argument);
}

TEST_CASE("config file and validation") {
  testing::TempDir dir;
  std::ofstream(dir / "a.conf") << "# settings\nport = 8123\n\ngrade.base_window = 10  # wider\n";
  Config c;
  c.load_file(dir / "a.conf");
  CHECK(c.port == 8123);
  CHECK(c.grade_policy.base_window == 10);
  CHECK_NOTHROW(c.validate());
  std::ofstream(dir / "b.conf") << "timeout.t_min = 500\n";
  Config bad;
  bad.load_file(dir / "b.conf");
  CHECK_THROWS_AS(bad.validate(), std::invalid_argument);
}

namespace {

// n answers for one student whose first k are correct and rest wrong, ordered
// so the whole history sits in the window.
std::string export_lines(const std::string& student, int n, int correct) {
  std::string out;
  for (int i = 0; i < n; ++i) {
    ExportRecord r;
    r.student = student;
    r.lecture = "c.t.l";
    r.seq = i + 1;
    r.question = "q" + std::to_string(i);
    r.chosen = 0;
    r.correct = i < correct;
    r.time_taken = 10;
    nlohmann::json j = r;
    out += j.dump() + "\n";
  }
  return out;
}

}  // namespace

TEST_CASE("exam csv parsing") {
  std::istringstream ok("studentId,examGrade,passed\ns1,7.5,true\ns2,3,0\n");
  const auto rows = parse_exam_csv(ok);
  REQUIRE(rows.size() == 2);
  CHECK(rows[0].student == "s1");
  CHECK(rows[0].exam_grade == 7.5);
  CHECK(rows[0].passed);
  CHECK_FALSE(rows[1].passed);
  std::istringstream dup("studentId,examGrade,passed\ns1,7.5,true\ns1,3,false\n");
  CHECK_THROWS_AS(parse_exam_csv(dup), ReportInputError);
  std::istringstream header("id,grade\n");
  CHECK_THROWS_AS(parse_exam_csv(header), ReportInputError);
}

TEST_CASE("export records round trip through json") {
  ExportRecord r{"s", "c.t.l", 3, "qx", 2, true, false, 12.5, 1000, 2000};
  nlohmann::json j = r;
  CHECK(j.at("timedOut") == false);
  CHECK(j.at("clientTs") == 1000);
  CHECK(j.get<ExportRecord>() == r);
}

TEST_CASE("drill grades from an export") {
  std::istringstream in(export_lines("a", 7, 7) + export_lines("b", 4, 1));
  const auto g = drill_grades_from_export(in, GradePolicy{});
  REQUIRE(g.size() == 2);
  CHECK(g.at("a") == 10.0);
  CHECK(g.at("b") == 2.5);
}

TEST_CASE("pass exactly above five puts the midpoint at five") {
  // 30 answers give a 15-answer window, so grades step by 2/3.
  std::string ndjson;
  std::string csv = "studentId,examGrade,passed\n";
  int id = 0;
  for (int k = 0; k <= 30; ++k) {
    for (int rep = 0; rep < 3; ++rep) {
      const std::string s = "s" + std::to_string(id++);
      // Correct answers at the end so they fall in the window.
      std::string lines;
      for (int i = 0; i < 30; ++i) {
        ExportRecord r{s, "c.t.l", i + 1, "q", 0, i >= 30 - (k / 2), false, 5, 0, 0};
        nlohmann::json j = r;
        lines += j.dump() + "\n";
      }
      ndjson += lines;
      const double grade = 10.0 * std::min(k / 2, 15) / 15.0;
      csv += s + ",0," + (grade > 5.0 ? "true" : "false") + "\n";
    }
  }
  std::istringstream answers(ndjson);
  std::istringstream exam(csv);
  const auto report = build_exam_report(drill_grades_from_export(answers, GradePolicy{}), parse_exam_csv(exam));
  CHECK(report.separated);
  CHECK(report.joined == 93);
  CHECK(std::abs(report.fit.midpoint() - 5.0) <= 0.2);
  std::ostringstream table;
  write_exam_report(report, table);
  CHECK(table.str().find("grade_lo,grade_hi") != std::string::npos);
  const auto j = nlohmann::json::parse(exam_report_json(report));
  CHECK(j.at("separated") == true);
}

TEST_CASE("empty join is degenerate") {
  std::istringstream exam("studentId,examGrade,passed\nx,1,true\n");
  CHECK_THROWS_AS(build_exam_report({{"y", 4.0}}, parse_exam_csv(exam)), DegenerateInput);
}

TEST_CASE("unmatched students are listed") {
  std::istringstream exam("studentId,examGrade,passed\na,1,true\nb,1,false\nc,1,true\n");
  const auto report = build_exam_report({{"a", 8.0}, {"b", 2.0}, {"c", 6.0}, {"d", 4.0}, {"e", 1.0}},
                                        parse_exam_csv(exam));
  CHECK(report.joined == 3);
  CHECK(report.unmatched == std::vector<std::string>{"d", "e"});
}
