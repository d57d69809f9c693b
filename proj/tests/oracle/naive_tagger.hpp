#pragma once

// Straightforward re-statement of the tagging rules, written without reusing the
// library's dedup, aggregation, ranking or tagging code. Slow on purpose.

#include <map>
#include <string>
#include <utility>
#include <vector>

#include "tagfeed/ingest.hpp"

namespace oracle {

struct Rules {
  // Accuracy bounds as percentages so comparisons stay in integers.
  int adequate_pct = 65;
  int struggling_pct = 55;
  int cutoff = 40;
  // Extreme fraction as a ratio.
  int frac_num = 1;
  int frac_den = 4;
  int min_attempts = 3;
};

struct Row {
  bool correct;
  int difficulty;
  int k;  // 0..4
  int a;  // 0..5
  double duration;
};

// Speed class codes: 'F', 'S', 'N'.
inline std::map<std::string, char> rank_speeds(const std::map<std::string, double>& means, const Rules& r) {
  std::map<std::string, char> out;
  const long n = static_cast<long>(means.size());
  for (const auto& [id, m] : means) {
    long rank = 1;
    for (const auto& [other, om] : means) {
      if (other == id) continue;
      if (om < m || (om == m && other < id)) ++rank;
    }
    char cls;
    if (n <= r.cutoff) {
      cls = 2 * rank <= n + 1 ? 'F' : 'S';
    } else {
      long k = 0;
      while (k * r.frac_den < n * r.frac_num) ++k;
      if (rank <= k) cls = 'F';
      else if (rank > n - k) cls = 'S';
      else cls = 'N';
    }
    out[id] = cls;
  }
  return out;
}

// 34 flags per student, rendered as "0,1,..." in tag order.
inline std::map<std::string, std::string> tag_records(const std::vector<tagfeed::AttemptRecord>& records,
                                                      const std::map<std::string, int>& kmap,
                                                      const std::map<std::string, int>& amap,
                                                      const Rules& r = {}) {
  // Dedup: longest positive duration per pair, then correct, then latest.
  std::map<std::pair<std::string, std::string>, std::vector<std::size_t>> groups;
  for (std::size_t i = 0; i < records.size(); ++i) {
    groups[{records[i].student_id, records[i].question_id}].push_back(i);
  }
  std::map<std::string, std::vector<Row>> rows;
  for (const auto& [key, idx] : groups) {
    long best = -1;
    for (auto i : idx) {
      const auto& c = records[i];
      if (c.duration <= 0) continue;
      if (best < 0) { best = static_cast<long>(i); continue; }
      const auto& b = records[static_cast<std::size_t>(best)];
      bool better = c.duration > b.duration ||
                    (c.duration == b.duration && c.correct >= b.correct);
      if (better) best = static_cast<long>(i);
    }
    if (best < 0) continue;
    const auto& w = records[static_cast<std::size_t>(best)];
    auto ki = kmap.find(w.knowledge_raw);
    auto ai = amap.find(w.ability_raw);
    if (ki == kmap.end() || ai == amap.end()) continue;
    rows[w.student_id].push_back({w.correct, w.difficulty, ki->second, ai->second, w.duration});
  }

  std::map<std::string, double> means[3];
  for (const auto& [id, list] : rows) {
    for (int d = 1; d <= 3; ++d) {
      long double sum = 0;
      int n = 0;
      for (const auto& x : list) {
        if (x.difficulty == d) { sum += x.duration; ++n; }
      }
      if (n > 0) means[d - 1][id] = static_cast<double>(sum / n);
    }
  }
  std::map<std::string, char> speed[3];
  for (int d = 0; d < 3; ++d) speed[d] = rank_speeds(means[d], r);

  auto band = [&](int correct, int n) -> char {
    if (n < r.min_attempts) return '-';
    if (correct * 100 > r.adequate_pct * n) return '+';
    if (correct * 100 < r.struggling_pct * n) return 'x';
    return '-';
  };

  std::map<std::string, std::string> out;
  for (const auto& [id, list] : rows) {
    int flags[34] = {};
    for (int d = 1; d <= 3; ++d) {
      int n = 0, c = 0;
      for (const auto& x : list) if (x.difficulty == d) { ++n; c += x.correct; }
      char b = band(c, n);
      if (b == '-') continue;
      char s = speed[d - 1].count(id) ? speed[d - 1].at(id) : 'N';
      if (s == 'N') continue;
      int tag;  // Tag_1_<tag>
      if (b == '+' && s == 'F') tag = d;
      else if (b == '+') tag = d + 3;
      else if (s == 'F') tag = d + 6;
      else tag = d + 9;
      flags[tag - 1] = 1;
    }
    for (int k = 0; k < 5; ++k) {
      int n = 0, c = 0;
      for (const auto& x : list) if (x.k == k) { ++n; c += x.correct; }
      char b = band(c, n);
      if (b == '+') flags[12 + k] = 1;
      if (b == 'x') flags[12 + k + 5] = 1;
    }
    for (int a = 0; a < 6; ++a) {
      int n = 0, c = 0;
      for (const auto& x : list) if (x.a == a) { ++n; c += x.correct; }
      char b = band(c, n);
      if (b == '+') flags[22 + a] = 1;
      if (b == 'x') flags[22 + a + 6] = 1;
    }
    std::string csv;
    for (int i = 0; i < 34; ++i) {
      if (i) csv += ',';
      csv += flags[i] ? '1' : '0';
    }
    out[id] = csv;
  }
  return out;
}

}  // namespace oracle
