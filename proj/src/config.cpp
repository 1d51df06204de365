#include "advtext/config.hpp"

#include <charconv>
#include <istream>
#include <sstream>

#include "advtext/error.hpp"

namespace advtext {

namespace {

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

std::size_t to_count(const std::string& key, const std::string& v) {
  std::size_t out = 0;
  auto [ptr, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
  if (ec != std::errc() || ptr != v.data() + v.size()) {
    throw InvalidArgument("config key '" + key + "' expects a non-negative integer, got '" + v + "'");
  }
  return out;
}

double to_real(const std::string& key, const std::string& v) {
  double out = 0.0;
  auto [ptr, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
  if (ec != std::errc() || ptr != v.data() + v.size()) {
    throw InvalidArgument("config key '" + key + "' expects a number, got '" + v + "'");
  }
  return out;
}

std::string real_text(double v) {
  char buf[32];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, ptr);
}

}  // namespace

void RunConfig::validate() const {
  train.validate();
  if (eval_n == 0) throw InvalidArgument("eval_n must be positive");
  if (eval_split != "train" && eval_split != "dev" && eval_split != "test") {
    throw InvalidArgument("eval_split must be train, dev or test");
  }
  if (model.kind == ModelKind::ChunkedPooling) {
    plan_chunks(0, model.chunk_size, model.overlap);
    if (model.filters == 0 || model.width == 0) throw InvalidArgument("filters and width must be positive");
  }
}

const std::vector<std::string>& config_keys() {
  static const std::vector<std::string> keys = {
      "n_nat", "n_adv", "batch_size", "lr", "K", "gamma", "seed",
      "k", "m", "threshold", "min_word_cos", "policy",
      "augment_swaps", "threads",
      "model", "truncate_last", "chunk_size", "overlap", "filters", "width",
      "eval_n", "eval_split"};
  return keys;
}

KeyValues parse_key_values(std::istream& in, const std::string& source_name) {
  KeyValues kv;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) throw ParseError(source_name, line_no, "expected key = value");
    const std::string key = trim(line.substr(0, eq));
    const std::string value = trim(line.substr(eq + 1));
    if (key.empty()) throw ParseError(source_name, line_no, "empty key");
    kv[key] = value;
  }
  return kv;
}

void apply_key_values(RunConfig& c, const KeyValues& values) {
  for (const auto& [key, v] : values) {
    TrainConfig& t = c.train;
    if (key == "n_nat") t.n_nat = to_count(key, v);
    else if (key == "n_adv") t.n_adv = to_count(key, v);
    else if (key == "batch_size") t.batch_size = to_count(key, v);
    else if (key == "lr") t.lr = to_real(key, v);
    else if (key == "K") t.K = to_real(key, v);
    else if (key == "gamma") t.gamma = to_real(key, v);
    else if (key == "seed") t.seed = to_count(key, v);
    else if (key == "k") t.attack.k = to_count(key, v);
    else if (key == "m") t.attack.m = to_count(key, v);
    else if (key == "threshold") t.attack.threshold = to_real(key, v);
    else if (key == "min_word_cos") t.attack.min_word_cos = to_real(key, v);
    else if (key == "policy") {
      if (v == "min_true_class") t.attack.policy = CandidatePolicy::MinTrueClass;
      else if (v == "first_flip") t.attack.policy = CandidatePolicy::FirstFlip;
      else throw InvalidArgument("policy must be min_true_class or first_flip");
    } else if (key == "augment_swaps") t.augment_swaps = to_count(key, v);
    else if (key == "threads") t.threads = to_count(key, v);
    else if (key == "model") {
      if (v == "bag") c.model.kind = ModelKind::BagOfEmbeddings;
      else if (v == "chunked") c.model.kind = ModelKind::ChunkedPooling;
      else throw InvalidArgument("model must be bag or chunked");
    } else if (key == "truncate_last") c.model.truncate_last = to_count(key, v);
    else if (key == "chunk_size") c.model.chunk_size = to_count(key, v);
    else if (key == "overlap") c.model.overlap = to_count(key, v);
    else if (key == "filters") c.model.filters = to_count(key, v);
    else if (key == "width") c.model.width = to_count(key, v);
    else if (key == "eval_n") c.eval_n = to_count(key, v);
    else if (key == "eval_split") c.eval_split = v;
    else throw InvalidArgument("unknown config key '" + key + "'");
  }
}

KeyValues to_key_values(const RunConfig& c) {
  const TrainConfig& t = c.train;
  KeyValues kv;
  kv["n_nat"] = std::to_string(t.n_nat);
  kv["n_adv"] = std::to_string(t.n_adv);
  kv["batch_size"] = std::to_string(t.batch_size);
  kv["lr"] = real_text(t.lr);
  kv["K"] = real_text(t.K);
  kv["gamma"] = real_text(t.gamma);
  kv["seed"] = std::to_string(t.seed);
  kv["k"] = std::to_string(t.attack.k);
  kv["m"] = std::to_string(t.attack.m);
  kv["threshold"] = real_text(t.attack.threshold);
  kv["min_word_cos"] = real_text(t.attack.min_word_cos);
  kv["policy"] = t.attack.policy == CandidatePolicy::MinTrueClass ? "min_true_class" : "first_flip";
  kv["augment_swaps"] = std::to_string(t.augment_swaps);
  kv["threads"] = std::to_string(t.threads);
  kv["model"] = c.model.kind == ModelKind::BagOfEmbeddings ? "bag" : "chunked";
  kv["truncate_last"] = std::to_string(c.model.truncate_last);
  kv["chunk_size"] = std::to_string(c.model.chunk_size);
  kv["overlap"] = std::to_string(c.model.overlap);
  kv["filters"] = std::to_string(c.model.filters);
  kv["width"] = std::to_string(c.model.width);
  kv["eval_n"] = std::to_string(c.eval_n);
  kv["eval_split"] = c.eval_split;
  return kv;
}

std::string format_key_values(const KeyValues& values) {
  std::ostringstream out;
  for (const auto& [k, v] : values) out << k << " = " << v << '\n';
  return out.str();
}

}  // namespace advtext
