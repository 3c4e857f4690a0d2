#include "tutorweb/config.hpp"
#include "tutorweb/content.hpp"
#include "tutorweb/http_server.hpp"
#include "tutorweb/kernels.hpp"
#include "tutorweb/reports.hpp"
#include "tutorweb/simulation.hpp"
#include "tutorweb/store.hpp"
#include "tutorweb/sync_service.hpp"

#include "CLI11.hpp"

#include <spdlog/spdlog.h>

#include <csignal>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <optional>
#include <pthread.h>
#include <sstream>
#include <thread>

namespace {

enum ExitCode : int {
  kOk = 0,
  kFailure = 1,
  kUsage = 2,
  kPortInUse = 3,
  kCorruptStore = 4,
};

struct GlobalOptions {
  std::string config_file;
  std::string data_dir;
  std::optional<std::uint64_t> seed;
  std::string log_level;
};

tutorweb::Config load_config(const GlobalOptions& g) {
  tutorweb::Config cfg;
  if (!g.config_file.empty()) cfg.load_file(g.config_file);
  if (!g.data_dir.empty()) cfg.data_dir = g.data_dir;
  if (!g.log_level.empty()) cfg.log_level = g.log_level;
  cfg.validate();
  spdlog::set_level(spdlog::level::from_str(cfg.log_level));
  return cfg;
}

std::filesystem::path store_file(const tutorweb::Config& cfg) { return cfg.data_dir / "tutorweb.db"; }

int cmd_serve(const GlobalOptions& g, std::optional<int> port_flag, const std::string& host,
              const std::string& admin_token_flag) {
  auto cfg = load_config(g);
  if (port_flag) cfg.port = static_cast<std::uint16_t>(*port_flag);
  if (!admin_token_flag.empty()) cfg.admin_token = admin_token_flag;

  // Handle termination signals on a dedicated thread; block them everywhere else.
  sigset_t signals;
  sigemptyset(&signals);
  sigaddset(&signals, SIGINT);
  sigaddset(&signals, SIGTERM);
  pthread_sigmask(SIG_BLOCK, &signals, nullptr);

  std::unique_ptr<tutorweb::Store> store;
  try {
    store = tutorweb::open_sqlite_store(store_file(cfg));
  } catch (const tutorweb::CorruptStore& e) {
    std::cerr << "error: CorruptStore: refusing to start: " << e.what() << '\n';
    return kCorruptStore;
  }
  tutorweb::SyncService service(*store, {cfg.grade_policy, cfg.timeout_policy, cfg.max_allocation, cfg.admin_token});
  tutorweb::HttpServer server(service);
  int port = 0;
  try {
    port = server.bind(host, cfg.port);
  } catch (const tutorweb::PortInUse& e) {
    std::cerr << "error: PortInUse: " << e.what() << '\n';
    return kPortInUse;
  }

  std::jthread waiter([&server, signals](std::stop_token) {
    int sig = 0;
    sigwait(&signals, &sig);
    spdlog::info("signal {} received, shutting down", sig);
    server.stop();
  });

  std::cout << "listening on " << host << ":" << port << std::endl;
  spdlog::info("data dir {}", cfg.data_dir.string());
  server.run();
  // Wake the waiter if the server stopped on its own.
  pthread_kill(waiter.native_handle(), SIGTERM);
  waiter.join();
  store.reset();
  spdlog::info("store closed");
  return kOk;
}

int cmd_import(const GlobalOptions& g, const std::string& file, const std::string& lecture_path) {
  auto cfg = load_config(g);
  const auto path = tutorweb::LecturePath::parse(lecture_path);
  std::ifstream in(file, std::ios::binary);
  if (!in) {
    std::cerr << "error: cannot read " << file << '\n';
    return kFailure;
  }
  std::stringstream buf;
  buf << in.rdbuf();
  std::vector<tutorweb::Question> questions;
  try {
    questions = tutorweb::parse_tex_questions(buf.str());
  } catch (const tutorweb::ParseError& e) {
    std::cerr << file << ":" << e.line() << ": "
              << (e.kind() == tutorweb::ParseError::Kind::MalformedBlock ? "MalformedBlock" : "ChoiceCountError")
              << ": " << e.what() << '\n';
    return kFailure;
  }
  auto store = tutorweb::open_sqlite_store(store_file(cfg));
  const auto counts = store->import_questions(path, questions);
  std::cout << "added " << counts.added << ", skipped " << counts.skipped << '\n';
  return kOk;
}

struct SimulateFlags {
  std::size_t students = 500;
  double guessers = 0.4;
  std::string scheme;
  std::string timeout;
  std::size_t answers = 200;
  std::size_t reps = 10;
  std::size_t threads = 1;
  std::string out_dir = "simulation-report";
};

std::vector<tutorweb::analytics::Scheme> select_schemes(const SimulateFlags& f) {
  using tutorweb::analytics::default_schemes;
  const auto all = default_schemes();
  if (f.scheme.empty() && f.timeout.empty()) return all;
  const std::string scheme = f.scheme.empty() ? "taper" : f.scheme;
  const std::string timeout = f.timeout.empty() ? (scheme == "taper" ? "on" : "off") : f.timeout;
  if (scheme == "fixed8" && timeout == "on") {
    throw CLI::ValidationError("--scheme fixed8 runs without a timeout; --timeout on is not a valid combination");
  }
  const std::string name = scheme == "fixed8" ? "fixed-8" : (timeout == "on" ? "taper+timeout" : "taper");
  for (const auto& s : all) {
    if (s.name == name) return {s};
  }
  throw CLI::ValidationError("unknown scheme");
}

int cmd_simulate(const GlobalOptions& g, const SimulateFlags& f) {
  using namespace tutorweb::analytics;
  auto cfg = load_config(g);
  PopulationSpec pop;
  pop.students = f.students;
  pop.guesser_fraction = f.guessers;
  ComparisonOptions opts;
  opts.n_answers = f.answers;
  opts.reps = f.reps;
  opts.seed = g.seed.value_or(1);
  opts.threads = f.threads;
  opts.schemes = select_schemes(f);
  // Config overrides apply to the taper schemes.
  for (auto& s : opts.schemes) {
    if (s.name != "fixed-8") s.grade_policy = cfg.grade_policy;
    if (s.name == "taper+timeout") s.timeout_policy = cfg.timeout_policy;
  }

  const auto result = compare_schemes(pop, LectureSpec{}, opts);
  write_simulation_report(result, pop, opts, f.out_dir);
  for (const auto& s : result.schemes) {
    std::printf("%-14s AUC %.4f (se %.4f)  mean grade %.3f\n", s.name.c_str(), s.mean_auc, s.standard_error,
                s.mean_grade);
  }
  std::printf("reports written to %s\n", f.out_dir.c_str());
  return kOk;
}

int cmd_report(const GlobalOptions& g, const std::string& answers_file, const std::string& exam_file,
               const std::string& out_dir) {
  using namespace tutorweb::analytics;
  auto cfg = load_config(g);
  std::ifstream answers(answers_file);
  if (!answers) {
    std::cerr << "error: cannot read " << answers_file << '\n';
    return kFailure;
  }
  std::ifstream exam(exam_file);
  if (!exam) {
    std::cerr << "error: cannot read " << exam_file << '\n';
    return kFailure;
  }
  const auto grades = drill_grades_from_export(answers, cfg.grade_policy);
  const auto rows = parse_exam_csv(exam);
  const auto report = build_exam_report(grades, rows);
  for (const auto& s : report.unmatched) std::cerr << "warning: UnmatchedStudent " << s << '\n';
  if (report.separated) {
    std::cerr << "warning: CompleteSeparation: grades split pass/fail perfectly; "
                 "reporting the last iterate before divergence\n";
  }
  write_exam_report(report, std::cout);
  std::cout << exam_report_json(report) << '\n';
  if (!out_dir.empty()) {
    std::filesystem::create_directories(out_dir);
    std::ofstream table(std::filesystem::path(out_dir) / "pass_curve.csv");
    write_exam_report(report, table);
    std::ofstream(std::filesystem::path(out_dir) / "summary.json") << exam_report_json(report) << '\n';
  }
  return kOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"tutorweb: adaptive drilling server and analytics"};
  app.require_subcommand(1);
  app.fallthrough();

  GlobalOptions g;
  app.add_option("--config", g.config_file, "Config file (key = value lines)")->check(CLI::ExistingFile);
  app.add_option("--data-dir", g.data_dir, "Directory holding the store");
  app.add_option("--seed", g.seed, "Master RNG seed");
  app.add_option("--log-level", g.log_level, "trace|debug|info|warn|error");

  auto* serve = app.add_subcommand("serve", "Run the sync server");
  std::optional<int> port;
  std::string host = "0.0.0.0";
  std::string admin_token;
  serve->add_option("--port", port, "Listen port (0 = any free port)")->check(CLI::Range(0, 65535));
  serve->add_option("--host", host, "Listen address");
  serve->add_option("--admin-token", admin_token, "Bootstrap admin bearer token");

  auto* import = app.add_subcommand("import", "Import a TeX question file into a lecture");
  std::string import_file;
  std::string lecture_path;
  import->add_option("file", import_file, "Question file")->required()->check(CLI::ExistingFile);
  import->add_option("lecture", lecture_path, "course/tutorial/lecture")->required();

  auto* simulate = app.add_subcommand("simulate", "Compare grading schemes on a simulated population");
  SimulateFlags sim;
  simulate->add_option("--students", sim.students, "Students per rep")->check(CLI::PositiveNumber);
  simulate->add_option("--guessers", sim.guessers, "Fraction of guessers")->check(CLI::Range(0.0, 1.0));
  simulate->add_option("--scheme", sim.scheme, "taper or fixed8")->check(CLI::IsMember({"taper", "fixed8"}));
  simulate->add_option("--timeout", sim.timeout, "on or off")->check(CLI::IsMember({"on", "off"}));
  simulate->add_option("--answers", sim.answers, "Answers per student")->check(CLI::PositiveNumber);
  simulate->add_option("--reps", sim.reps, "Repetitions")->check(CLI::PositiveNumber);
  simulate->add_option("--threads", sim.threads, "Worker threads")->check(CLI::PositiveNumber);
  simulate->add_option("--out", sim.out_dir, "Report directory");

  auto* report = app.add_subcommand("report", "Join an answer export with exam outcomes");
  std::string answers_file;
  std::string exam_file;
  std::string report_out;
  report->add_option("--answers", answers_file, "Answer export (NDJSON)")->required()->check(CLI::ExistingFile);
  report->add_option("--exam", exam_file, "Exam CSV: studentId,examGrade,passed")->required()->check(CLI::ExistingFile);
  report->add_option("--out", report_out, "Also write pass_curve.csv and summary.json here");

  try {
    app.parse(argc, argv);
    if (*simulate) (void)select_schemes(sim);
  } catch (const CLI::ParseError& e) {
    return app.exit(e) == 0 ? kOk : kUsage;
  }

  try {
    if (*serve) return cmd_serve(g, port, host, admin_token);
    if (*import) return cmd_import(g, import_file, lecture_path);
    if (*simulate) return cmd_simulate(g, sim);
    if (*report) return cmd_report(g, answers_file, exam_file, report_out);
  } catch (const tutorweb::CorruptStore& e) {
    std::cerr << "error: CorruptStore: " << e.what() << '\n';
    return kCorruptStore;
  } catch (const tutorweb::analytics::DegenerateInput& e) {
    std::cerr << "error: DegenerateInput: " << e.what() << '\n';
    return kFailure;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kFailure;
  }
  return kOk;
}
