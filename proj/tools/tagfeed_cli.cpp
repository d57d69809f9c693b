// tagfeed command-line entry point: ingest-check, tag, report, eval-stats, synth.

#include <cstdint>
#include <fstream>
#include <iostream>
#include <memory>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "tagfeed/http_backend.hpp"
#include "tagfeed/tagfeed.hpp"

namespace {

using namespace tagfeed;

enum ExitCode : int {
  kOk = 0,
  kUsage = 2,
  kFileError = 3,
  kConfigError = 4,
  kDataError = 5,
  kBackendError = 6,
  kPartialFailure = 7,
};

int exit_code_for(ErrorCode code) {
  switch (code) {
    case ErrorCode::MissingFile: return kFileError;
    case ErrorCode::InvalidConfig: return kConfigError;
    case ErrorCode::NetworkError:
    case ErrorCode::RateLimited:
    case ErrorCode::AuthError:
    case ErrorCode::BackendError: return kBackendError;
    default: return kDataError;
  }
}

void report_error(std::string_view kind, const std::string& message) {
  nlohmann::ordered_json j;
  j["error"] = kind;
  j["message"] = message;
  std::cerr << j.dump() << '\n';
}

struct CommonOptions {
  std::string config_path;
};

PipelineConfig load_pipeline_config(const std::string& path) {
  if (path.empty()) return {};
  auto validation = load_config(path);
  if (!validation.ok()) {
    std::string msg;
    for (const auto& issue : validation.issues) msg += (msg.empty() ? "" : "; ") + issue.message;
    throw Error(ErrorCode::InvalidConfig, msg);
  }
  return *validation.config;
}

struct MappingPaths {
  std::string knowledge;
  std::string ability;
};

CategoryMapping load_mapping(const MappingPaths& given, const PipelineConfig& cfg) {
  auto k = !given.knowledge.empty() ? given.knowledge : cfg.knowledge_mapping_path.value_or("");
  auto a = !given.ability.empty() ? given.ability : cfg.ability_mapping_path.value_or("");
  if (k.empty() || a.empty()) {
    throw Error(ErrorCode::InvalidConfig, "both --mapping-k and --mapping-a (or config keys) are required");
  }
  CategoryMapping mapping;
  auto log = load_mapping_files(k, a, mapping);
  for (const auto& w : log.warnings) std::cerr << "warning: " << w << '\n';
  return mapping;
}

TagPipelineResult tag_from_raw(const std::string& input, const MappingPaths& paths, const PipelineConfig& cfg) {
  auto ingest = load_attempts(input);
  if (ingest.report.rejected > 0) {
    std::cerr << "warning: " << ingest.report.rejected << " rows rejected while reading " << input << '\n';
  }
  auto mapping = load_mapping(paths, cfg);
  auto result = run_tag_pipeline(ingest.records, mapping, cfg);
  for (const auto& [label, n] : result.unmapped.knowledge) {
    std::cerr << "warning: unmapped knowledge label '" << label << "' (" << n << " records)\n";
  }
  for (const auto& [label, n] : result.unmapped.ability) {
    std::cerr << "warning: unmapped ability label '" << label << "' (" << n << " records)\n";
  }
  return result;
}

void write_file(const std::string& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error(ErrorCode::MissingFile, "cannot write " + path);
  out << content;
}

int run_ingest_check(const std::string& input, bool list) {
  auto result = load_attempts(input);
  std::cout << "accepted=" << result.report.accepted << " rejected=" << result.report.rejected << '\n';
  if (list) {
    for (const auto& r : result.report.rejections) std::cout << "line " << r.line << ": " << r.reason << '\n';
  }
  return kOk;
}

int run_tag(const std::string& input, const MappingPaths& paths, const std::string& out_path,
            const PipelineConfig& cfg) {
  auto result = tag_from_raw(input, paths, cfg);
  std::ostringstream out;
  write_student_tags(out, result.tags);
  write_file(out_path, out.str());
  std::cout << "students=" << result.tags.size() << " records=" << result.input_records
            << " retained=" << result.retained_records << " excluded_unmapped=" << result.unmapped.excluded_records
            << '\n';
  return kOk;
}

struct ReportOptions {
  std::string tags_path;
  std::string input;
  MappingPaths mapping;
  std::vector<std::string> students;
  bool all_students = false;
  std::string backend = "mock";
  std::string out_dir = "reports";
  std::string template_path;
  std::string model;
};

int run_report(const ReportOptions& opt, const PipelineConfig& cfg) {
  StudentTagTable dataset;
  if (!opt.tags_path.empty()) {
    std::istringstream in(text::read_file(opt.tags_path));
    dataset = read_student_tags(in);
  } else if (!opt.input.empty()) {
    dataset = tag_from_raw(opt.input, opt.mapping, cfg).tags;
  } else {
    throw Error(ErrorCode::InvalidConfig, "report needs --tags or --input");
  }
  auto tmpl = opt.template_path.empty() ? default_template() : load_template(opt.template_path);

  CompletionParams params;
  params.model = opt.model.empty() ? cfg.endpoint.model : opt.model;
  if (auto issues = validate_params(params); !issues.empty()) throw Error(ErrorCode::InvalidConfig, issues.front());

  std::unique_ptr<CompletionBackend> backend;
  if (opt.backend == "mock") {
    backend = std::make_unique<MockBackend>();
  } else if (opt.backend == "http") {
    backend = std::make_unique<HttpBackend>(cfg.endpoint);
  } else {
    throw Error(ErrorCode::InvalidConfig, "unknown backend: " + opt.backend);
  }

  std::vector<std::string> ids = opt.students;
  if (opt.all_students) {
    for (const auto& [id, tags] : dataset) ids.push_back(id);
  }
  BatchOptions batch;
  batch.out_dir = opt.out_dir;
  batch.max_concurrency = cfg.endpoint.max_concurrency;
  auto result = generate_batch(ids, dataset, tmpl, *backend, params, batch);
  for (const auto& r : result.reports) {
    std::cout << report_path(batch.out_dir, r.student_id).string() << (r.truncated() ? " (truncated)" : "") << '\n';
  }
  for (const auto& f : result.failures) {
    nlohmann::ordered_json j;
    j["error"] = to_string(f.code);
    j["student_id"] = f.student_id;
    j["message"] = f.message;
    std::cerr << j.dump() << '\n';
  }
  std::cout << "reports=" << result.reports.size() << " failures=" << result.failures.size() << '\n';
  if (result.failures.empty()) return kOk;
  // A batch where nothing succeeded because of the backend is a backend failure.
  if (result.reports.empty()) {
    bool all_backend = true;
    for (const auto& f : result.failures) all_backend = all_backend && exit_code_for(f.code) == kBackendError;
    if (all_backend) return kBackendError;
  }
  return kPartialFailure;
}

struct EvalOptions {
  std::string input;
  int low_threshold = survey::kDefaultLowTotalThreshold;
  std::string out;
  std::string plot;
  std::string discarded;
};

int run_eval_stats(const EvalOptions& opt) {
  std::istringstream in(text::read_file(opt.input));
  auto responses = survey::read_survey_csv(in);
  auto filtered = survey::filter_responses(responses, opt.low_threshold);
  std::cout << "valid=" << filtered.valid.size() << " low=" << filtered.discarded_low.size()
            << " perfect=" << filtered.discarded_perfect.size() << '\n';
  if (!opt.discarded.empty()) {
    std::ostringstream d;
    d << "reason,respondent_id,total\n";
    for (const auto& r : filtered.discarded_low) d << "low," << text::quote_field(r.respondent_id) << ',' << r.total() << '\n';
    for (const auto& r : filtered.discarded_perfect) d << "perfect," << text::quote_field(r.respondent_id) << ',' << r.total() << '\n';
    write_file(opt.discarded, d.str());
  }
  auto summaries = survey::summarize(filtered.valid);
  std::ostringstream table;
  survey::write_summary_csv(table, summaries);
  if (opt.out.empty()) {
    std::cout << table.str();
  } else {
    write_file(opt.out, table.str());
  }
  if (!opt.plot.empty()) write_file(opt.plot, survey::render_boxplot_svg(summaries));
  return kOk;
}

struct SynthOptions {
  std::string out;
  std::uint64_t seed = 1;
  std::string profile;
  std::optional<int> students;
  std::optional<int> attempts;
  std::string mode;
};

int run_synth(const SynthOptions& opt) {
  synth::CohortSpec spec;
  if (!opt.profile.empty()) spec = synth::parse_cohort_spec(text::read_file(opt.profile));
  if (opt.students) spec.students = *opt.students;
  if (opt.attempts) spec.attempts_per_dimension = *opt.attempts;
  if (!opt.mode.empty()) {
    auto mode = synth::parse_profile_mode(opt.mode);
    if (!mode) throw Error(ErrorCode::InvalidConfig, "unknown mode: " + opt.mode);
    spec.mode = *mode;
  }
  if (spec.students < 1 || spec.attempts_per_dimension < 1) {
    throw Error(ErrorCode::InvalidConfig, "students and attempts must be at least 1");
  }
  auto profiles = synth::make_profiles(spec, opt.seed);
  auto records = synth::generate_cohort(profiles, opt.seed, spec.noise);
  std::ostringstream out;
  write_attempts_csv(out, records);
  write_file(opt.out, out.str());
  std::cout << "students=" << profiles.size() << " records=" << records.size() << '\n';
  return kOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Turn question-attempt logs into learning tags and feedback reports"};
  app.fallthrough();
  app.require_subcommand(1, 1);
  CommonOptions common;
  app.add_option("--config", common.config_path, "Pipeline configuration file (key = value)")->check(CLI::ExistingFile);

  auto* ingest_cmd = app.add_subcommand("ingest-check", "Validate an attempt log and report rejected rows");
  std::string ingest_input;
  bool list_rejections = false;
  ingest_cmd->add_option("--input", ingest_input, "Attempt log (.csv, or .jsonl for JSON lines)")->required();
  ingest_cmd->add_flag("--list", list_rejections, "Print every rejected line with its reason");

  auto* tag_cmd = app.add_subcommand("tag", "Compute the 34-flag student_tag file from an attempt log");
  std::string tag_input, tag_out = "student_tag.csv";
  MappingPaths tag_mapping;
  tag_cmd->add_option("--input", tag_input, "Attempt log (.csv or .jsonl)")->required();
  tag_cmd->add_option("--mapping-k", tag_mapping.knowledge, "Knowledge label mapping (raw_label<TAB>area)");
  tag_cmd->add_option("--mapping-a", tag_mapping.ability, "Ability label mapping (raw_label<TAB>domain)");
  tag_cmd->add_option("--out", tag_out, "Output student_tag file")->capture_default_str();

  auto* report_cmd = app.add_subcommand("report", "Generate feedback reports for students");
  ReportOptions report;
  report_cmd->add_option("--tags", report.tags_path, "student_tag file");
  report_cmd->add_option("--input", report.input, "Attempt log; runs tagging first when --tags is absent");
  report_cmd->add_option("--mapping-k", report.mapping.knowledge, "Knowledge label mapping (with --input)");
  report_cmd->add_option("--mapping-a", report.mapping.ability, "Ability label mapping (with --input)");
  report_cmd->add_option("--students", report.students, "Student ids (comma separated)")->delimiter(',');
  report_cmd->add_flag("--all-students", report.all_students, "Report on every student in the dataset");
  report_cmd->add_option("--backend", report.backend, "mock or http")
      ->check(CLI::IsMember({"mock", "http"}))
      ->capture_default_str();
  report_cmd->add_option("--out-dir", report.out_dir, "Directory for report files")->capture_default_str();
  report_cmd->add_option("--template", report.template_path, "Prompt template file");
  report_cmd->add_option("--model", report.model, "Model name sent to the http backend");

  auto* eval_cmd = app.add_subcommand("eval-stats", "Filter survey responses and summarize each dimension");
  EvalOptions eval;
  eval_cmd->add_option("--input", eval.input, "Survey CSV: respondent_id,u,p,m,c,o,advice")->required();
  eval_cmd->add_option("--low-threshold", eval.low_threshold, "Discard totals at or below this value")
      ->capture_default_str();
  eval_cmd->add_option("--out", eval.out, "Write the summary table here instead of stdout");
  eval_cmd->add_option("--plot", eval.plot, "Write an SVG box plot here");
  eval_cmd->add_option("--discarded", eval.discarded, "Write discarded responses here for review");

  auto* synth_cmd = app.add_subcommand("synth", "Write a synthetic attempt log with planted profiles");
  SynthOptions synth_opt;
  synth_cmd->add_option("--out", synth_opt.out, "Output CSV")->required();
  synth_cmd->add_option("--seed", synth_opt.seed, "Random seed")->capture_default_str();
  synth_cmd->add_option("--profile", synth_opt.profile, "Cohort spec file (key = value)");
  synth_cmd->add_option("--students", synth_opt.students, "Number of students");
  synth_cmd->add_option("--attempts", synth_opt.attempts, "Attempts per knowledge area and ability domain");
  synth_cmd->add_option("--mode", synth_opt.mode, "uniform, extreme or fixed")
      ->check(CLI::IsMember({"uniform", "extreme", "fixed"}));

  try {
    app.parse(argc, argv);
  } catch (const CLI::Success& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    report_error("UsageError", e.what());
    return kUsage;
  }

  try {
    auto cfg = load_pipeline_config(common.config_path);
    if (*ingest_cmd) return run_ingest_check(ingest_input, list_rejections);
    if (*tag_cmd) return run_tag(tag_input, tag_mapping, tag_out, cfg);
    if (*report_cmd) return run_report(report, cfg);
    if (*eval_cmd) return run_eval_stats(eval);
    if (*synth_cmd) return run_synth(synth_opt);
  } catch (const Error& e) {
    report_error(to_string(e.code()), e.what());
    return exit_code_for(e.code());
  } catch (const std::exception& e) {
    report_error("InternalError", e.what());
    return 1;
  }
  return kUsage;
}
