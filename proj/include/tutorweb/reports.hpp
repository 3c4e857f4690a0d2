#pragma once

#include "tutorweb/analytics.hpp"
#include "tutorweb/grading.hpp"
#include "tutorweb/simulation.hpp"

#include <filesystem>
#include <iosfwd>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace tutorweb::analytics {

/// Writes into `dir`: scheme_grades.csv (one row per simulated student and
/// scheme), pass_curve.csv (binned mastery rate per scheme) and summary.json
/// (AUCs and logistic fits). Output is byte-identical for identical inputs.
void write_simulation_report(const SchemeComparison& comparison, const PopulationSpec& population,
                             const ComparisonOptions& options, const std::filesystem::path& dir);

struct ExamRow {
  std::string student;
  double exam_grade = 0.0;
  bool passed = false;
};

class ReportInputError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// CSV with header `studentId,examGrade,passed`. Duplicate students are an
/// error.
std::vector<ExamRow> parse_exam_csv(std::istream& in);

/// Overall drill grade per student from an answer export: each lecture's
/// grade over its history (ordered by seq), averaged across lectures.
std::map<std::string, double> drill_grades_from_export(std::istream& ndjson, const GradePolicy& policy);

struct ExamReport {
  std::vector<PassRateBin> bins;
  LogisticFit fit;
  bool separated = false;  // fit holds the last iterate before divergence
  std::size_t joined = 0;
  std::vector<std::string> unmatched;  // present in only one input
};

/// Throws DegenerateInput when the join is empty or has a single outcome.
ExamReport build_exam_report(const std::map<std::string, double>& drill_grades,
                             const std::vector<ExamRow>& exam);

void write_exam_report(const ExamReport& report, std::ostream& table);
std::string exam_report_json(const ExamReport& report);

}  // namespace tutorweb::analytics
