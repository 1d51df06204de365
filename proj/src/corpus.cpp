#include "advtext/corpus.hpp"

#include <algorithm>
#include <fstream>
#include <unordered_set>

#include <json.hpp>

#include "advtext/error.hpp"

namespace advtext {

using nlohmann::json;

const std::vector<LabeledExample>& Corpus::split(std::string_view which) const {
  if (which == "train") return train;
  if (which == "dev") return dev;
  if (which == "test") return test;
  throw InvalidArgument("unknown split '" + std::string(which) + "' (expected train, dev or test)");
}

std::vector<LabeledExample> read_jsonl(std::istream& in, const std::string& source_name) {
  std::vector<LabeledExample> out;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.find_first_not_of(" \t") == std::string::npos) continue;
    json obj;
    try {
      obj = json::parse(line);
    } catch (const json::parse_error& e) {
      throw ParseError(source_name, line_no, std::string("malformed JSON: ") + e.what());
    }
    if (!obj.is_object()) throw ParseError(source_name, line_no, "expected a JSON object");
    if (!obj.contains("text") || !obj["text"].is_string()) {
      throw ParseError(source_name, line_no, "missing string field \"text\"");
    }
    if (!obj.contains("label")) throw ParseError(source_name, line_no, "missing field \"label\"");
    const json& label = obj["label"];
    if (!label.is_number_integer()) throw ParseError(source_name, line_no, "\"label\" must be an integer");
    if (label.get<long long>() < 0) throw ParseError(source_name, line_no, "\"label\" must be >= 0");
    out.push_back({tokenize(obj["text"].get<std::string>()), label.get<std::size_t>()});
  }
  return out;
}

std::vector<LabeledExample> read_jsonl(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open " + path.string());
  return read_jsonl(in, path.string());
}

void write_jsonl(std::ostream& out, std::span<const LabeledExample> examples) {
  for (const auto& e : examples) {
    const std::string& raw = e.document.raw();
    json obj = {{"text", raw.empty() ? detokenize(e.document) : raw}, {"label", e.label}};
    out << obj.dump() << '\n';
  }
}

Corpus load_corpus(const std::filesystem::path& dir) {
  Corpus corpus;
  corpus.name = dir.filename().string();
  if (corpus.name.empty()) corpus.name = dir.parent_path().filename().string();
  for (const char* name : {"train", "dev", "test"}) {
    const auto path = dir / (std::string(name) + ".jsonl");
    if (!std::filesystem::exists(path)) throw DataError("missing split file " + path.string());
    auto examples = read_jsonl(path);
    if (std::string_view(name) == "train") corpus.train = std::move(examples);
    else if (std::string_view(name) == "dev") corpus.dev = std::move(examples);
    else corpus.test = std::move(examples);
  }

  std::vector<std::size_t> counts;
  for (const auto* split : {&corpus.train, &corpus.dev, &corpus.test}) {
    for (const auto& e : *split) {
      if (e.label >= counts.size()) counts.resize(e.label + 1, 0);
      ++counts[e.label];
    }
  }
  corpus.class_count = counts.size();
  for (std::size_t c = 0; c < counts.size(); ++c) {
    if (counts[c] == 0) corpus.warnings.push_back("class " + std::to_string(c) + " has no examples");
  }

  std::unordered_set<std::string> train_texts;
  for (const auto& e : corpus.train) train_texts.insert(detokenize(e.document));
  std::size_t shared = 0;
  for (const auto* split : {&corpus.dev, &corpus.test}) {
    for (const auto& e : *split) shared += train_texts.count(detokenize(e.document));
  }
  if (shared) corpus.warnings.push_back(std::to_string(shared) + " dev/test texts also appear in train");
  return corpus;
}

void write_corpus(const Corpus& corpus, const std::filesystem::path& dir) {
  std::filesystem::create_directories(dir);
  for (const char* name : {"train", "dev", "test"}) {
    const auto path = dir / (std::string(name) + ".jsonl");
    std::ofstream out(path, std::ios::binary);
    if (!out) throw DataError("cannot write " + path.string());
    write_jsonl(out, corpus.split(name));
  }
}

double evaluate_accuracy(const ClassifierModel& model, std::span<const LabeledExample> examples) {
  if (examples.empty()) throw InvalidArgument("evaluate_accuracy: no examples");
  std::size_t correct = 0;
  for (const auto& e : examples) correct += predict(model, e.document) == e.label;
  return static_cast<double>(correct) / static_cast<double>(examples.size());
}

RobustnessReport evaluate_robustness(const ClassifierModel& model, const Attacker& attacker,
                                     std::span<const LabeledExample> split, std::size_t n, std::uint64_t seed,
                                     std::size_t threads, std::vector<AttackOutcome>* outcomes) {
  if (split.empty()) throw InvalidArgument("evaluate_robustness: empty split");
  RobustnessReport report;
  report.requested = n;
  report.seed = seed;
  report.used = std::min(n, split.size());
  report.whole_split = n >= split.size();
  CorpusAttack run = attacker.attack_corpus(model, split, n, seed, threads);
  report.summary = run.summary;
  if (outcomes) *outcomes = std::move(run.outcomes);
  return report;
}

LengthStats length_stats(std::string_view split, std::span<const LabeledExample> examples,
                         std::size_t bucket_width) {
  if (bucket_width == 0) throw InvalidArgument("bucket width must be positive");
  LengthStats s;
  s.split = std::string(split);
  s.bucket_width = bucket_width;
  s.documents = examples.size();
  if (examples.empty()) return s;
  std::vector<std::size_t> lengths;
  lengths.reserve(examples.size());
  double total = 0.0;
  for (const auto& e : examples) {
    const std::size_t n = e.document.size();
    lengths.push_back(n);
    total += static_cast<double>(n);
    ++s.buckets[n / bucket_width * bucket_width];
  }
  std::sort(lengths.begin(), lengths.end());
  const std::size_t mid = lengths.size() / 2;
  s.median = lengths.size() % 2 ? static_cast<double>(lengths[mid])
                                : 0.5 * static_cast<double>(lengths[mid - 1] + lengths[mid]);
  s.mean = total / static_cast<double>(lengths.size());
  s.min = lengths.front();
  s.max = lengths.back();
  return s;
}

std::vector<LengthStats> length_stats(const Corpus& corpus, std::size_t bucket_width) {
  return {length_stats("train", corpus.train, bucket_width), length_stats("dev", corpus.dev, bucket_width),
          length_stats("test", corpus.test, bucket_width)};
}

}  // namespace advtext
