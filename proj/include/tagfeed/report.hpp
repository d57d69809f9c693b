#pragma once

#include <algorithm>
#include <chrono>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <functional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "tagfeed/error.hpp"
#include "tagfeed/llm.hpp"
#include "tagfeed/prompt.hpp"
#include "tagfeed/tagger.hpp"

namespace tagfeed {

struct StudentReport {
  std::string student_id;
  TagSet tags;
  std::string prompt;
  std::string completion;
  std::string generated_at;
  std::string backend;
  CompletionParams params;
  FinishReason finish_reason = FinishReason::Stop;
  TokenUsage usage;
  int retries = 0;

  bool truncated() const { return finish_reason == FinishReason::Length; }
};

struct BatchFailure {
  std::string student_id;
  ErrorCode code;
  std::string message;
};

struct BatchResult {
  std::vector<StudentReport> reports;  // sorted by student id
  std::vector<BatchFailure> failures;  // sorted by student id
};

inline std::string utc_timestamp() {
  auto now = std::chrono::system_clock::now();
  std::time_t t = std::chrono::system_clock::to_time_t(now);
  std::tm tm{};
  gmtime_r(&t, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

struct BatchOptions {
  std::filesystem::path out_dir = "reports";
  int max_concurrency = 4;
  bool write_files = true;
  std::function<std::string()> clock = utc_timestamp;
};

/// Ids become file names, so path separators and dot-only names are refused.
inline bool safe_student_id(const std::string& id) {
  if (id.empty() || id == "." || id == "..") return false;
  return id.find_first_of("/\\\0:", 0, 4) == std::string::npos;
}

inline std::filesystem::path report_path(const std::filesystem::path& dir, const std::string& id) {
  return dir / ("report_" + id + ".md");
}

inline std::filesystem::path report_meta_path(const std::filesystem::path& dir, const std::string& id) {
  return dir / ("report_" + id + ".meta.json");
}

/// Markdown body. Contains nothing run-specific so reruns are byte-identical.
inline std::string render_report_markdown(const StudentReport& r) {
  std::string out = "# Learning Feedback Report: Student " + r.student_id + "\n\n";
  if (r.truncated()) {
    out += "> Note: generation stopped at the length limit; the end of this report may be missing.\n\n";
  }
  out += r.completion;
  if (out.empty() || out.back() != '\n') out += '\n';
  return out;
}

inline nlohmann::ordered_json report_metadata(const StudentReport& r) {
  nlohmann::ordered_json j;
  j["student_id"] = r.student_id;
  j["tags"] = r.tags.to_csv();
  auto names = nlohmann::ordered_json::array();
  for (auto id : r.tags.set_tags()) names.push_back(id.name());
  j["set_tags"] = names;
  j["prompt"] = r.prompt;
  j["prompt_digest"] = hex64(stable_digest(r.prompt));
  j["params"] = params_to_json(r.params);
  j["backend"] = r.backend;
  j["generated_at"] = r.generated_at;
  j["finish_reason"] = std::string(to_string(r.finish_reason));
  j["truncated"] = r.truncated();
  j["usage"] = {{"prompt_tokens", r.usage.prompt_tokens},
                {"completion_tokens", r.usage.completion_tokens},
                {"total_tokens", r.usage.total_tokens}};
  j["retries"] = r.retries;
  return j;
}

inline void write_text_file(const std::filesystem::path& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error(ErrorCode::MissingFile, "cannot write " + path.string());
  out << content;
  if (!out) throw Error(ErrorCode::MissingFile, "write failed: " + path.string());
}

/// Renders prompts, queries the backend with bounded concurrency and writes
/// report_<id>.md plus report_<id>.meta.json per student. Per-student problems
/// (unknown id, invalid tags, backend errors) become failure entries and do not
/// stop the batch.
inline BatchResult generate_batch(std::vector<std::string> student_ids, const StudentTagTable& dataset,
                                  const PromptTemplate& tmpl, CompletionBackend& backend,
                                  const CompletionParams& params, const BatchOptions& options = {}) {
  std::sort(student_ids.begin(), student_ids.end());
  student_ids.erase(std::unique(student_ids.begin(), student_ids.end()), student_ids.end());

  BatchResult result;
  std::vector<StudentReport> pending;
  std::vector<CompletionRequest> requests;
  for (const auto& id : student_ids) {
    if (!safe_student_id(id)) {
      result.failures.push_back({id, ErrorCode::UnknownStudent, "student id is not usable as a file name: " + id});
      continue;
    }
    try {
      StudentReport r;
      r.student_id = id;
      r.tags = get_student_tags(dataset, id);
      r.prompt = render_prompt(r.tags, tmpl);
      requests.push_back({pending.size(), r.prompt});
      pending.push_back(std::move(r));
    } catch (const Error& e) {
      result.failures.push_back({id, e.code(), e.what()});
    }
  }

  if (options.write_files && !pending.empty()) std::filesystem::create_directories(options.out_dir);

  auto outcomes = complete_all(backend, requests, params, options.max_concurrency);
  for (auto& o : outcomes) {
    auto& r = pending[o.id];
    if (!o.ok()) {
      result.failures.push_back({r.student_id, *o.error, o.error_message});
      continue;
    }
    if (o.result->finish_reason == FinishReason::Error || o.result->text.empty()) {
      result.failures.push_back({r.student_id, ErrorCode::BackendError, "backend returned no usable completion"});
      continue;
    }
    r.completion = std::move(o.result->text);
    r.finish_reason = o.result->finish_reason;
    r.usage = o.result->usage;
    r.retries = o.result->retries;
    r.backend = backend.id();
    r.params = params;
    r.generated_at = options.clock();
    if (options.write_files) {
      write_text_file(report_path(options.out_dir, r.student_id), render_report_markdown(r));
      write_text_file(report_meta_path(options.out_dir, r.student_id), report_metadata(r).dump(2) + "\n");
    }
    result.reports.push_back(std::move(r));
  }
  std::sort(result.failures.begin(), result.failures.end(),
            [](const BatchFailure& a, const BatchFailure& b) { return a.student_id < b.student_id; });
  return result;
}

/// Re-renders the stored tag vector with `tmpl` and compares it with the stored prompt.
inline bool audit_report_metadata(const nlohmann::json& meta, const PromptTemplate& tmpl) {
  if (!meta.contains("tags") || !meta.contains("prompt")) return false;
  auto flags = meta["tags"].get<std::string>();
  std::istringstream in("x," + flags + "\n");
  auto table = read_student_tags(in);
  return render_prompt(table.at("x"), tmpl) == meta["prompt"].get<std::string>();
}

}  // namespace tagfeed
