#pragma once

// Random raw attempt logs for property tests. Durations are drawn from a coarse grid
// so that duplicate maxima, zero durations and equal speed means all occur.

#include <map>
#include <random>
#include <string>
#include <vector>

#include "tagfeed/preprocess.hpp"

namespace testsupport {

struct CohortShape {
  int students = 60;
  int max_attempts = 60;
  int question_pool = 40;
  double unmapped_rate = 0.02;
};

inline std::vector<tagfeed::AttemptRecord> random_cohort(std::mt19937_64& gen, const CohortShape& shape,
                                                         const tagfeed::CategoryMapping& mapping) {
  std::vector<std::string> klabels, alabels;
  for (const auto& [raw, v] : mapping.knowledge) klabels.push_back(raw);
  for (const auto& [raw, v] : mapping.ability) alabels.push_back(raw);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  std::vector<tagfeed::AttemptRecord> out;
  for (int s = 0; s < shape.students; ++s) {
    const std::string id = "st" + std::to_string(s);
    const double skill = u(gen);
    const int n = std::uniform_int_distribution<int>(0, shape.max_attempts)(gen);
    for (int i = 0; i < n; ++i) {
      tagfeed::AttemptRecord r;
      r.student_id = id;
      const int q = std::uniform_int_distribution<int>(0, shape.question_pool - 1)(gen);
      r.question_id = "q" + std::to_string(q);
      // Difficulty and labels are a function of the question so duplicates agree.
      r.difficulty = q % 3 + 1;
      r.knowledge_raw = klabels[static_cast<std::size_t>(q) % klabels.size()];
      r.ability_raw = alabels[static_cast<std::size_t>(q * 7) % alabels.size()];
      if (u(gen) < shape.unmapped_rate) r.knowledge_raw = "unlisted";
      r.correct = u(gen) < skill;
      r.duration = std::uniform_int_distribution<int>(0, 12)(gen) * 2.5;
      out.push_back(std::move(r));
    }
  }
  return out;
}

inline std::map<std::string, int> knowledge_indices(const tagfeed::CategoryMapping& m) {
  std::map<std::string, int> out;
  for (const auto& [raw, v] : m.knowledge) out[raw] = static_cast<int>(v);
  return out;
}

inline std::map<std::string, int> ability_indices(const tagfeed::CategoryMapping& m) {
  std::map<std::string, int> out;
  for (const auto& [raw, v] : m.ability) out[raw] = static_cast<int>(v);
  return out;
}

}  // namespace testsupport
