#include "tutorweb/reports.hpp"

#include "tutorweb/answer_log.hpp"
#include "tutorweb/kernels.hpp"

#include "json.hpp"

#include <algorithm>
#include <cstdio>
#include <fstream>
#include <istream>
#include <ostream>
#include <set>
#include <sstream>

namespace tutorweb {

void to_json(nlohmann::json& j, const ExportRecord& r) {
  j = nlohmann::json{{"student", r.student},   {"lecture", r.lecture},     {"seq", r.seq},
                     {"question", r.question}, {"chosen", r.chosen},       {"correct", r.correct},
                     {"timedOut", r.timed_out}, {"timeTaken", r.time_taken}, {"clientTs", r.client_ts},
                     {"serverTs", r.server_ts}};
}

void from_json(const nlohmann::json& j, ExportRecord& r) {
  j.at("student").get_to(r.student);
  j.at("lecture").get_to(r.lecture);
  j.at("seq").get_to(r.seq);
  j.at("question").get_to(r.question);
  j.at("chosen").get_to(r.chosen);
  j.at("correct").get_to(r.correct);
  j.at("timedOut").get_to(r.timed_out);
  j.at("timeTaken").get_to(r.time_taken);
  j.at("clientTs").get_to(r.client_ts);
  j.at("serverTs").get_to(r.server_ts);
}

}  // namespace tutorweb

namespace tutorweb::analytics {

namespace {

std::string fixed(double v, int precision = 6) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*f", precision, v);
  return buf;
}

nlohmann::json fit_json(const std::vector<GradeOutcome>& points) {
  try {
    const auto fit = fit_pass_probability(points);
    return {{"beta0", fit.beta0}, {"beta1", fit.beta1}, {"converged", fit.converged},
            {"iterations", fit.iterations}, {"midpoint", fit.midpoint()}};
  } catch (const CompleteSeparation& e) {
    return {{"separated", true}, {"midpoint", e.last_iterate().midpoint()}};
  } catch (const DegenerateInput& e) {
    return {{"degenerate", e.what()}};
  }
}

std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> out;
  std::string cell;
  std::istringstream ss(line);
  while (std::getline(ss, cell, ',')) {
    const auto b = cell.find_first_not_of(" \t\r");
    const auto e = cell.find_last_not_of(" \t\r");
    out.push_back(b == std::string::npos ? std::string{} : cell.substr(b, e - b + 1));
  }
  return out;
}

}  // namespace

void write_simulation_report(const SchemeComparison& c, const PopulationSpec& pop,
                             const ComparisonOptions& opts, const std::filesystem::path& dir) {
  std::filesystem::create_directories(dir);

  std::ofstream grades(dir / "scheme_grades.csv");
  grades << "scheme,rep,student,guesser,theta0,learn_rate,final_theta,mastered,grade\n";
  for (std::size_t si = 0; si < c.schemes.size(); ++si) {
    for (const auto& s : c.students) {
      grades << c.schemes[si].name << ',' << s.rep << ',' << s.index << ',' << (s.persona.guesser ? 1 : 0)
             << ',' << fixed(s.persona.theta0) << ',' << fixed(s.persona.learn_rate) << ','
             << fixed(s.final_theta) << ',' << (s.mastered ? 1 : 0) << ',' << fixed(s.final_grades[si]) << '\n';
    }
  }

  std::ofstream curve(dir / "pass_curve.csv");
  curve << "scheme,grade_lo,grade_hi,students,mastered,rate\n";
  nlohmann::json schemes = nlohmann::json::array();
  for (std::size_t si = 0; si < c.schemes.size(); ++si) {
    const auto& summary = c.schemes[si];
    std::vector<GradeOutcome> points;
    points.reserve(c.students.size());
    for (const auto& s : c.students) points.push_back({s.final_grades[si], s.mastered});
    for (const auto& b : bin_pass_rates(points)) {
      curve << summary.name << ',' << fixed(b.lo, 1) << ',' << fixed(b.hi, 1) << ',' << b.count << ','
            << b.passed << ',' << fixed(b.rate()) << '\n';
    }
    schemes.push_back({{"name", summary.name},
                       {"auc_mean", summary.mean_auc},
                       {"auc_se", summary.standard_error},
                       {"auc_per_rep", summary.auc_per_rep},
                       {"mean_grade", summary.mean_grade},
                       {"mastery_fit", fit_json(points)}});
  }

  nlohmann::json summary = {
      {"students", pop.students},
      {"guesser_fraction", pop.guesser_fraction},
      {"mastery_threshold", pop.mastery_threshold},
      {"answers", opts.n_answers},
      {"reps", opts.reps},
      {"seed", opts.seed},
      {"schemes", schemes},
  };
  for (std::size_t a = 0; a < c.schemes.size(); ++a) {
    for (std::size_t b = a + 1; b < c.schemes.size(); ++b) {
      const auto& na = c.schemes[a].name;
      const auto& nb = c.schemes[b].name;
      summary["paired_differences"].push_back({{"a", na},
                                               {"b", nb},
                                               {"auc_diff", c.schemes[a].mean_auc - c.schemes[b].mean_auc},
                                               {"se", c.paired_difference_se(na, nb)}});
    }
  }
  std::ofstream(dir / "summary.json") << summary.dump(2) << '\n';
}

std::vector<ExamRow> parse_exam_csv(std::istream& in) {
  std::vector<ExamRow> rows;
  std::set<std::string> seen;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    const auto cells = split_csv_line(line);
    if (lineno == 1 && !cells.empty() && cells[0] == "studentId") continue;
    if (cells.size() != 3) {
      throw ReportInputError("exam csv line " + std::to_string(lineno) + ": expected 3 columns");
    }
    ExamRow row;
    row.student = cells[0];
    try {
      std::size_t used = 0;
      row.exam_grade = std::stod(cells[1], &used);
      if (used != cells[1].size()) throw std::invalid_argument("trailing characters");
    } catch (const std::exception&) {
      throw ReportInputError("exam csv line " + std::to_string(lineno) + ": bad examGrade");
    }
    if (cells[2] == "1" || cells[2] == "true") {
      row.passed = true;
    } else if (cells[2] == "0" || cells[2] == "false") {
      row.passed = false;
    } else {
      throw ReportInputError("exam csv line " + std::to_string(lineno) + ": bad passed flag");
    }
    if (!seen.insert(row.student).second) {
      throw ReportInputError("exam csv line " + std::to_string(lineno) + ": duplicate student " + row.student);
    }
    rows.push_back(std::move(row));
  }
  return rows;
}

std::map<std::string, double> drill_grades_from_export(std::istream& in, const GradePolicy& policy) {
  std::map<std::pair<std::string, std::string>, std::vector<ExportRecord>> by_state;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    try {
      auto rec = nlohmann::json::parse(line).get<ExportRecord>();
      by_state[{rec.student, rec.lecture}].push_back(std::move(rec));
    } catch (const nlohmann::json::exception& e) {
      throw ReportInputError("answer export line " + std::to_string(lineno) + ": " + e.what());
    }
  }

  std::map<std::string, std::pair<double, std::size_t>> sums;
  for (auto& [key, records] : by_state) {
    std::sort(records.begin(), records.end(),
              [](const ExportRecord& a, const ExportRecord& b) { return a.seq < b.seq; });
    std::vector<AnswerOutcome> outcomes;
    outcomes.reserve(records.size());
    for (const auto& r : records) outcomes.push_back({r.correct, r.timed_out, r.time_taken});
    auto& [sum, count] = sums[key.first];
    sum += compute_grade(outcomes, policy).value;
    ++count;
  }
  std::map<std::string, double> out;
  for (const auto& [student, sc] : sums) out[student] = sc.first / static_cast<double>(sc.second);
  return out;
}

ExamReport build_exam_report(const std::map<std::string, double>& drill, const std::vector<ExamRow>& exam) {
  ExamReport report;
  std::vector<GradeOutcome> points;
  std::set<std::string> in_exam;
  for (const auto& row : exam) {
    in_exam.insert(row.student);
    const auto it = drill.find(row.student);
    if (it == drill.end()) {
      report.unmatched.push_back(row.student);
      continue;
    }
    points.push_back({it->second, row.passed});
  }
  for (const auto& [student, grade] : drill) {
    (void)grade;
    if (!in_exam.contains(student)) report.unmatched.push_back(student);
  }
  std::sort(report.unmatched.begin(), report.unmatched.end());
  report.joined = points.size();
  if (points.empty()) throw DegenerateInput("no students present in both the answer export and the exam file");

  report.bins = bin_pass_rates(points);
  try {
    report.fit = fit_pass_probability(points);
  } catch (const CompleteSeparation& e) {
    report.fit = e.last_iterate();
    report.separated = true;
  }
  return report;
}

void write_exam_report(const ExamReport& r, std::ostream& out) {
  out << "grade_lo,grade_hi,students,passed,pass_rate,fitted\n";
  for (const auto& b : r.bins) {
    out << fixed(b.lo, 1) << ',' << fixed(b.hi, 1) << ',' << b.count << ',' << b.passed << ','
        << fixed(b.rate()) << ',' << fixed(r.fit.probability((b.lo + b.hi) / 2.0)) << '\n';
  }
}

std::string exam_report_json(const ExamReport& r) {
  nlohmann::json j = {{"joined", r.joined},
                      {"unmatched", r.unmatched},
                      {"beta0", r.fit.beta0},
                      {"beta1", r.fit.beta1},
                      {"converged", r.fit.converged},
                      {"separated", r.separated},
                      {"iterations", r.fit.iterations},
                      {"midpoint", r.fit.midpoint()},
                      {"kernel", std::string(kernels::isa_name(kernels::active_isa()))}};
  return j.dump(2);
}

}  // namespace tutorweb::analytics
