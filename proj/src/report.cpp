#include "advtext/report.hpp"

#include <cstdio>

namespace advtext {

Json to_json(const AttackOutcome& o) {
  Json j;
  j["original_text"] = detokenize(o.original.document);
  j["adversarial_text"] = detokenize(o.adversarial);
  j["label"] = o.original.label;
  j["predicted_before"] = o.predicted_before;
  j["predicted_after"] = o.predicted_after;
  j["success"] = o.success;
  j["skipped"] = o.skipped;
  j["perturbed_indices"] = o.perturbed_indices;
  j["similarity"] = o.similarity;
  j["queries"] = o.queries;
  return j;
}

Json to_json(const AttackSummary& s) {
  Json j;
  j["requested"] = s.requested;
  j["sampled"] = s.sampled;
  j["correct"] = s.correct;
  j["skipped"] = s.skipped;
  j["attacked"] = s.attacked;
  j["successes"] = s.successes;
  j["failures"] = s.failures;
  j["total_queries"] = s.total_queries;
  j["total_perturbed_words"] = s.total_perturbed;
  j["clean_accuracy"] = s.clean_accuracy;
  j["robust_accuracy"] = s.robust_accuracy;
  j["robust_accuracy_overall"] = s.robust_accuracy_overall;
  j["attack_success_rate"] = s.success_rate;
  j["mean_queries"] = s.mean_queries;
  j["mean_perturbed_words"] = s.mean_perturbed_words;
  j["mean_similarity"] = s.mean_similarity;
  return j;
}

Json to_json(const RobustnessReport& r) {
  Json j;
  j["split"] = r.split;
  j["requested"] = r.requested;
  j["used"] = r.used;
  j["whole_split"] = r.whole_split;
  j["seed"] = r.seed;
  j["summary"] = to_json(r.summary);
  return j;
}

Json to_json(const LengthStats& s) {
  Json j;
  j["split"] = s.split;
  j["documents"] = s.documents;
  j["mean"] = s.mean;
  j["median"] = s.median;
  j["min"] = s.min;
  j["max"] = s.max;
  j["bucket_width"] = s.bucket_width;
  Json buckets = Json::array();
  for (const auto& [start, count] : s.buckets) buckets.push_back({{"start", start}, {"count", count}});
  j["buckets"] = buckets;
  return j;
}

Json to_json(const RunConfig& c) {
  Json j;
  for (const auto& [k, v] : to_key_values(c)) j[k] = v;
  return j;
}

Json to_json(const EpochLog& log, bool with_wall_time) {
  Json j;
  j["epoch"] = log.epoch;
  j["phase"] = phase_name(log.phase);
  j["mean_loss"] = log.mean_loss;
  j["train_size"] = log.train_size;
  j["adv_set_size"] = log.adv_set_size;
  j["adv_attempts"] = log.adv_attempts;
  j["adv_misclassified"] = log.adv_misclassified;
  if (with_wall_time) j["wall_seconds"] = log.wall_seconds;
  return j;
}

std::string hex64(std::uint64_t v) {
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(v));
  return buf;
}

}  // namespace advtext
