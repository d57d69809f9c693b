#pragma once

// Synthetic cohorts with planted skill and speed profiles, used to exercise the
// tagging pipeline without real student data.

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <map>
#include <numbers>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include "tagfeed/error.hpp"
#include "tagfeed/ingest.hpp"
#include "tagfeed/preprocess.hpp"
#include "tagfeed/taxonomy.hpp"
#include "tagfeed/text.hpp"

namespace tagfeed::synth {

struct LatentProfile {
  std::string student_id;
  std::array<double, kKnowledgeAreaCount> knowledge_p{};
  std::array<double, kAbilityDomainCount> ability_p{};
  std::array<double, kDifficultyLevels> log_duration_mean{3.0, 3.4, 3.8};
  std::array<double, kDifficultyLevels> log_duration_sd{0.35, 0.35, 0.35};
  int attempts_per_dimension = 20;
};

/// Problems with a profile; empty when valid.
inline std::vector<std::string> validate_profile(const LatentProfile& p) {
  std::vector<std::string> out;
  auto prob_ok = [](double v) { return v >= 0.0 && v <= 1.0; };
  for (double v : p.knowledge_p) if (!prob_ok(v)) out.push_back(p.student_id + ": knowledge probability outside [0, 1]");
  for (double v : p.ability_p) if (!prob_ok(v)) out.push_back(p.student_id + ": ability probability outside [0, 1]");
  for (double v : p.log_duration_sd) if (!(v > 0.0)) out.push_back(p.student_id + ": duration spread must be positive");
  if (p.attempts_per_dimension < 1) out.push_back(p.student_id + ": attempts_per_dimension must be at least 1");
  if (p.student_id.empty()) out.emplace_back("empty student id");
  return out;
}

struct NoiseSettings {
  double duplicate_rate = 0.20;      // extra shorter attempt at an existing question
  double zero_duration_rate = 0.05;  // extra zero-duration attempt at an existing question
};

/// SplitMix64 step; used to derive independent per-student seeds.
inline std::uint64_t mix_seed(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

/// Draws built directly on the engine output; the std distributions are not
/// specified bit-for-bit across standard libraries.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  double uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }
  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }
  bool bernoulli(double p) { return uniform() < p; }

  double normal() {
    double u1 = 0.0;
    while (u1 <= 0.0) u1 = uniform();
    double u2 = uniform();
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
  }

  std::size_t index(std::size_t n) { return static_cast<std::size_t>(uniform() * static_cast<double>(n)) % n; }

 private:
  std::mt19937_64 engine_;
};

namespace detail {

template <typename Enum, std::size_t N>
std::array<std::vector<std::string>, N> labels_by_category(const std::map<std::string, Enum>& table) {
  std::array<std::vector<std::string>, N> out;
  for (const auto& [raw, value] : table) out[static_cast<std::size_t>(value)].push_back(raw);
  return out;
}

// Cross-dimension partners on the same side of 0.5 as `p`, so that the labels an
// attempt carries in its other dimension do not pull that dimension's accuracy
// toward the opposite band.
template <std::size_t N>
std::vector<std::size_t> aligned_partners(double p, const std::array<double, N>& other) {
  std::vector<std::size_t> same, all;
  for (std::size_t i = 0; i < N; ++i) {
    all.push_back(i);
    if ((other[i] >= 0.5) == (p >= 0.5)) same.push_back(i);
  }
  return same.empty() ? all : same;
}

}  // namespace detail

/// Attempts for every profile. Each knowledge area and each ability domain receives
/// `attempts_per_dimension` questions whose correctness is Bernoulli(planted p) and
/// whose duration is log-normal for the question's difficulty. Noise rows (shorter
/// duplicates, zero-duration duplicates) are mixed in and each student's rows are
/// shuffled. Raw labels are drawn from `labels`, so the output maps back through it.
inline std::vector<AttemptRecord> generate_cohort(const std::vector<LatentProfile>& profiles, std::uint64_t seed,
                                                  const NoiseSettings& noise = {},
                                                  const CategoryMapping& labels = default_mapping()) {
  if (profiles.empty()) throw Error(ErrorCode::EmptyInput, "no profiles to generate");
  for (const auto& p : profiles) {
    auto issues = validate_profile(p);
    if (!issues.empty()) throw Error(ErrorCode::InvalidConfig, issues.front());
  }
  auto k_labels = detail::labels_by_category<KnowledgeArea, kKnowledgeAreaCount>(labels.knowledge);
  auto a_labels = detail::labels_by_category<AbilityDomain, kAbilityDomainCount>(labels.ability);
  for (std::size_t i = 0; i < kKnowledgeAreaCount; ++i) {
    if (k_labels[i].empty()) throw Error(ErrorCode::EmptyMapping, "no raw label for " + std::string(to_string(kAllKnowledgeAreas[i])));
  }
  for (std::size_t i = 0; i < kAbilityDomainCount; ++i) {
    if (a_labels[i].empty()) throw Error(ErrorCode::EmptyMapping, "no raw label for " + std::string(to_string(kAllAbilityDomains[i])));
  }

  std::vector<AttemptRecord> out;
  for (std::size_t s = 0; s < profiles.size(); ++s) {
    const auto& p = profiles[s];
    Rng rng(mix_seed(seed ^ mix_seed(s + 1)));
    std::vector<AttemptRecord> rows;
    const int n = p.attempts_per_dimension;

    auto emit = [&](std::string qid, std::size_t k, std::size_t a, double prob, int j) {
      AttemptRecord r;
      r.student_id = p.student_id;
      r.question_id = std::move(qid);
      r.difficulty = j % 3 + 1;
      r.correct = rng.bernoulli(prob);
      r.knowledge_raw = k_labels[k][static_cast<std::size_t>(j) % k_labels[k].size()];
      r.ability_raw = a_labels[a][static_cast<std::size_t>(j) % a_labels[a].size()];
      const auto d = static_cast<std::size_t>(r.difficulty - 1);
      r.duration = std::exp(p.log_duration_mean[d] + p.log_duration_sd[d] * rng.normal());
      rows.push_back(r);
      if (rng.bernoulli(noise.duplicate_rate)) {
        AttemptRecord dup = r;
        dup.duration = r.duration * rng.uniform(0.05, 0.95);
        dup.correct = rng.bernoulli(0.5);
        rows.push_back(std::move(dup));
      }
      if (rng.bernoulli(noise.zero_duration_rate)) {
        AttemptRecord zero = r;
        zero.duration = 0.0;
        zero.correct = rng.bernoulli(0.5);
        rows.push_back(std::move(zero));
      }
    };

    for (std::size_t k = 0; k < kKnowledgeAreaCount; ++k) {
      auto partners = detail::aligned_partners(p.knowledge_p[k], p.ability_p);
      for (int j = 0; j < n; ++j) {
        emit("k" + std::to_string(k + 1) + "-" + std::to_string(j + 1), k,
             partners[static_cast<std::size_t>(j) % partners.size()], p.knowledge_p[k], j);
      }
    }
    for (std::size_t a = 0; a < kAbilityDomainCount; ++a) {
      auto partners = detail::aligned_partners(p.ability_p[a], p.knowledge_p);
      for (int j = 0; j < n; ++j) {
        emit("a" + std::to_string(a + 1) + "-" + std::to_string(j + 1),
             partners[static_cast<std::size_t>(j) % partners.size()], a, p.ability_p[a], j);
      }
    }
    for (std::size_t i = rows.size(); i > 1; --i) std::swap(rows[i - 1], rows[rng.index(i)]);
    out.insert(out.end(), std::make_move_iterator(rows.begin()), std::make_move_iterator(rows.end()));
  }
  return out;
}

enum class ProfileMode { Uniform, Extreme, Fixed };

inline std::optional<ProfileMode> parse_profile_mode(std::string_view text) {
  if (text == "uniform") return ProfileMode::Uniform;
  if (text == "extreme") return ProfileMode::Extreme;
  if (text == "fixed") return ProfileMode::Fixed;
  return std::nullopt;
}

/// Cohort description read from a flat key = value file.
struct CohortSpec {
  int students = 100;
  std::string id_prefix = "s";
  int attempts_per_dimension = 20;
  ProfileMode mode = ProfileMode::Uniform;
  std::array<double, kKnowledgeAreaCount> knowledge_p{0.5, 0.5, 0.5, 0.5, 0.5};
  std::array<double, kAbilityDomainCount> ability_p{0.5, 0.5, 0.5, 0.5, 0.5, 0.5};
  std::array<double, kDifficultyLevels> log_duration_mean{3.0, 3.4, 3.8};
  std::array<double, kDifficultyLevels> log_duration_sd{0.35, 0.35, 0.35};
  double speed_jitter = 0.3;  // per-student sd added to log_duration_mean
  NoiseSettings noise;
};

inline std::string student_id(const std::string& prefix, std::size_t index) {
  std::string digits = std::to_string(index + 1);
  if (digits.size() < 4) digits.insert(0, 4 - digits.size(), '0');
  return prefix + digits;
}

/// Profiles for a spec. Uniform draws each probability from U(0,1); Extreme draws from
/// U(0.9,1) or U(0,0.3) with equal chance; Fixed uses the spec's probabilities.
inline std::vector<LatentProfile> make_profiles(const CohortSpec& spec, std::uint64_t seed) {
  Rng rng(mix_seed(seed ^ 0x5eedULL));
  auto draw = [&](double fixed) {
    switch (spec.mode) {
      case ProfileMode::Uniform: return rng.uniform();
      case ProfileMode::Extreme: return rng.bernoulli(0.5) ? rng.uniform(0.9, 1.0) : rng.uniform(0.0, 0.3);
      case ProfileMode::Fixed: return fixed;
    }
    return fixed;
  };
  std::vector<LatentProfile> out;
  for (int i = 0; i < spec.students; ++i) {
    LatentProfile p;
    p.student_id = student_id(spec.id_prefix, static_cast<std::size_t>(i));
    for (std::size_t k = 0; k < kKnowledgeAreaCount; ++k) p.knowledge_p[k] = draw(spec.knowledge_p[k]);
    for (std::size_t a = 0; a < kAbilityDomainCount; ++a) p.ability_p[a] = draw(spec.ability_p[a]);
    const double shift = spec.speed_jitter * rng.normal();
    for (std::size_t d = 0; d < kDifficultyLevels; ++d) {
      p.log_duration_mean[d] = spec.log_duration_mean[d] + shift;
      p.log_duration_sd[d] = spec.log_duration_sd[d];
    }
    p.attempts_per_dimension = spec.attempts_per_dimension;
    out.push_back(std::move(p));
  }
  return out;
}

/// Parses a cohort spec; every key is optional. Throws Error(InvalidConfig).
inline CohortSpec parse_cohort_spec(std::string_view content) {
  auto kv = text::parse_key_values(content);
  if (!kv.errors.empty()) throw Error(ErrorCode::InvalidConfig, kv.errors.front());
  CohortSpec spec;
  auto fail = [](const std::string& key) { throw Error(ErrorCode::InvalidConfig, "bad value for " + key); };
  auto list = [&](const std::string& key, const std::string& value, auto& arr) {
    auto v = text::parse_double_list(value);
    if (v.size() != arr.size()) fail(key);
    std::copy(v.begin(), v.end(), arr.begin());
  };
  for (const auto& [key, value] : kv.entries) {
    if (key == "students") {
      auto v = text::parse_int(value);
      if (!v || *v < 1) fail(key);
      spec.students = static_cast<int>(*v);
    } else if (key == "id_prefix") {
      spec.id_prefix = value;
    } else if (key == "attempts_per_dimension") {
      auto v = text::parse_int(value);
      if (!v || *v < 1) fail(key);
      spec.attempts_per_dimension = static_cast<int>(*v);
    } else if (key == "mode") {
      auto mode = parse_profile_mode(value);
      if (!mode) fail(key);
      spec.mode = *mode;
    } else if (key == "knowledge_p") {
      list(key, value, spec.knowledge_p);
    } else if (key == "ability_p") {
      list(key, value, spec.ability_p);
    } else if (key == "log_duration_mean") {
      list(key, value, spec.log_duration_mean);
    } else if (key == "log_duration_sd") {
      list(key, value, spec.log_duration_sd);
    } else if (key == "speed_jitter") {
      auto v = text::parse_double(value);
      if (!v || *v < 0) fail(key);
      spec.speed_jitter = *v;
    } else if (key == "duplicate_rate") {
      auto v = text::parse_double(value);
      if (!v || *v < 0 || *v > 1) fail(key);
      spec.noise.duplicate_rate = *v;
    } else if (key == "zero_duration_rate") {
      auto v = text::parse_double(value);
      if (!v || *v < 0 || *v > 1) fail(key);
      spec.noise.zero_duration_rate = *v;
    } else {
      throw Error(ErrorCode::InvalidConfig, "unknown key: " + key);
    }
  }
  return spec;
}

}  // namespace tagfeed::synth
