#include "advtext/cli.hpp"

#include <cstdlib>
#include <fstream>
#include <functional>
#include <iostream>
#include <memory>
#include <sstream>

#include <CLI11.hpp>

#include "advtext/attack.hpp"
#include "advtext/classifier.hpp"
#include "advtext/config.hpp"
#include "advtext/corpus.hpp"
#include "advtext/embedding.hpp"
#include "advtext/error.hpp"
#include "advtext/report.hpp"
#include "advtext/training.hpp"

namespace advtext::cli {

namespace {

namespace fs = std::filesystem;

constexpr const char* kDataEnv = "ADVTEXT_DATA_DIR";

const std::vector<std::string> kTrainKeys = {
    "n_nat", "n_adv", "batch_size", "lr", "K", "gamma", "seed", "k", "m", "threshold", "min_word_cos",
    "policy", "augment_swaps", "threads", "model", "truncate_last", "chunk_size", "overlap", "filters",
    "width", "eval_n", "eval_split"};
const std::vector<std::string> kAttackKeys = {"seed", "k", "m", "threshold", "min_word_cos", "policy",
                                              "threads", "eval_n", "eval_split"};

std::string flag_name(const std::string& key) {
  std::string f = "--" + key;
  for (char& c : f) {
    if (c == '_') c = '-';
  }
  return f;
}

struct Inputs {
  std::string data;
  std::string embeddings;
  std::string config_file;
  KeyValues overrides;
  std::map<std::string, CLI::Option*> override_options;
};

void add_inputs(CLI::App* sub, Inputs& in, bool need_embeddings) {
  sub->add_option("--data", in.data,
                  std::string("Corpus directory with train/dev/test.jsonl (default: $") + kDataEnv + ")");
  if (need_embeddings) {
    sub->add_option("--embeddings", in.embeddings, "Embedding file (default: <data>/embeddings.txt)");
  }
}

void add_overrides(CLI::App* sub, Inputs& in, const std::vector<std::string>& keys) {
  sub->add_option("--config", in.config_file, "Flat key = value config file; flags override it");
  for (const auto& key : keys) {
    in.override_options[key] = sub->add_option(flag_name(key), in.overrides[key], "Override config key " + key);
  }
}

std::string data_dir(const Inputs& in) {
  if (!in.data.empty()) return in.data;
  if (const char* env = std::getenv(kDataEnv); env && *env) return env;
  throw InvalidArgument(std::string("no data directory: pass --data or set ") + kDataEnv);
}

RunConfig resolve_config(const Inputs& in) {
  RunConfig config;
  if (!in.config_file.empty()) {
    std::ifstream f(in.config_file);
    if (!f) throw DataError("cannot open config file " + in.config_file);
    apply_key_values(config, parse_key_values(f, in.config_file));
  }
  KeyValues given;
  for (const auto& [key, option] : in.override_options) {
    if (option->count() > 0) given[key] = in.overrides.at(key);
  }
  apply_key_values(config, given);
  config.validate();
  return config;
}

std::shared_ptr<EmbeddingTable> open_embeddings(const Inputs& in, const std::string& dir) {
  const fs::path path = in.embeddings.empty() ? fs::path(dir) / "embeddings.txt" : fs::path(in.embeddings);
  if (!fs::exists(path)) throw DataError("embedding file not found: " + path.string());
  return std::make_shared<EmbeddingTable>(load_embeddings(path));
}

Corpus open_corpus(const std::string& dir) {
  if (!fs::is_directory(dir)) throw DataError("data directory not found: " + dir);
  Corpus corpus = load_corpus(dir);
  if (corpus.class_count < 2) throw DataError("corpus in " + dir + " needs at least 2 classes");
  if (corpus.train.empty()) throw DataError("train split in " + dir + " is empty");
  return corpus;
}

void write_file(const std::string& path, const std::string& content) {
  if (const fs::path parent = fs::path(path).parent_path(); !parent.empty()) fs::create_directories(parent);
  std::ofstream out(path, std::ios::binary);
  if (!out) throw DataError("cannot write " + path);
  out << content;
  if (!out) throw DataError("failed writing " + path);
}

Json inputs_json(const std::string& dir, const Corpus& corpus, const EmbeddingTable* table) {
  Json j;
  j["data_dir"] = dir;
  j["class_count"] = corpus.class_count;
  j["train_size"] = corpus.train.size();
  j["dev_size"] = corpus.dev.size();
  j["test_size"] = corpus.test.size();
  if (table) {
    j["embeddings_checksum"] = hex64(table->checksum());
    j["embedding_dimension"] = table->dimension();
    j["vocabulary_size"] = table->size();
  }
  j["warnings"] = corpus.warnings;
  return j;
}

void print_warnings(const Corpus& corpus, std::ostream& err) {
  for (const auto& w : corpus.warnings) err << "warning: " << w << '\n';
}

enum class TrainMode { Natural, Adversarial, Augmented };

struct TrainArgs {
  Inputs in;
  std::string model_out;
  std::string report;
  std::string train_log;
  std::string augment_file;
};

int train_command(const TrainArgs& a, TrainMode mode, const std::string& name, std::ostream& out,
                  std::ostream& err) {
  const RunConfig config = resolve_config(a.in);
  const std::string dir = data_dir(a.in);
  const Corpus corpus = open_corpus(dir);
  print_warnings(corpus, err);
  auto table = open_embeddings(a.in, dir);
  table->build_neighbor_cache(config.train.attack.m);
  const MeanEmbeddingEncoder encoder(*table);
  const Attacker attacker(*table, encoder, config.train.attack);

  auto model = make_model(table, corpus.class_count, config.train.seed, config.model);
  std::vector<EpochLog> logs;
  switch (mode) {
    case TrainMode::Natural: {
      // Natural baselines get the same epoch budget as the other arms.
      TrainConfig tc = config.train;
      tc.n_nat = config.train.n_nat + config.train.n_adv;
      logs = natural_train(*model, corpus.train, tc);
      break;
    }
    case TrainMode::Adversarial:
      logs = adversarial_train(*model, attacker, corpus.train, config.train);
      break;
    case TrainMode::Augmented: {
      std::vector<LabeledExample> extra;
      if (!a.augment_file.empty()) {
        extra = read_jsonl(fs::path(a.augment_file));
        for (const auto& e : extra) {
          if (e.label >= corpus.class_count) {
            throw DataError("augmentation label " + std::to_string(e.label) + " outside the corpus classes");
          }
        }
      }
      const SynonymSwapAugmenter augmenter(*table, config.train.augment_swaps);
      logs = augmented_train(*model, corpus.train, augmenter, config.train, extra);
      break;
    }
  }

  {
    std::ostringstream bytes;
    save_model(*model, bytes);
    write_file(a.model_out, bytes.str());
  }

  const auto& split = corpus.split(config.eval_split);
  Json report;
  report["command"] = name;
  report["config"] = to_json(config);
  report["inputs"] = inputs_json(dir, corpus, table.get());
  Json epochs = Json::array();
  for (const auto& log : logs) epochs.push_back(to_json(log));
  report["epochs"] = epochs;
  Json metrics;
  metrics["clean_accuracy_dev"] = corpus.dev.empty() ? Json() : Json(evaluate_accuracy(*model, corpus.dev));
  metrics["clean_accuracy_test"] = corpus.test.empty() ? Json() : Json(evaluate_accuracy(*model, corpus.test));
  if (!split.empty()) {
    RobustnessReport robust = evaluate_robustness(*model, attacker, split, config.eval_n, config.train.seed,
                                                  config.train.threads);
    robust.split = config.eval_split;
    metrics["robustness"] = to_json(robust);
  }
  report["metrics"] = metrics;

  if (!a.report.empty()) write_file(a.report, report.dump(2) + "\n");
  if (!a.train_log.empty()) {
    std::string lines;
    for (const auto& log : logs) lines += to_json(log, true).dump() + "\n";
    write_file(a.train_log, lines);
  }
  out << metrics.dump(2) << '\n';
  return kOk;
}

struct AttackArgs {
  Inputs in;
  std::string model;
  std::string out;
  std::string report;
};

std::unique_ptr<TrainableModel> open_model(const std::string& path, std::shared_ptr<const EmbeddingTable> table) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw DataError("cannot open model file " + path);
  return load_model(f, std::move(table));
}

int attack_command(const AttackArgs& a, std::ostream& out, std::ostream& err) {
  const RunConfig config = resolve_config(a.in);
  const std::string dir = data_dir(a.in);
  const Corpus corpus = open_corpus(dir);
  print_warnings(corpus, err);
  auto table = open_embeddings(a.in, dir);
  auto model = open_model(a.model, table);
  if (model->class_count() < corpus.class_count) throw DataError("model has fewer classes than the corpus");
  table->build_neighbor_cache(config.train.attack.m);
  const MeanEmbeddingEncoder encoder(*table);
  const Attacker attacker(*table, encoder, config.train.attack);

  const auto& split = corpus.split(config.eval_split);
  if (split.empty()) throw DataError("split " + config.eval_split + " is empty");
  std::vector<AttackOutcome> outcomes;
  RobustnessReport robust = evaluate_robustness(*model, attacker, split, config.eval_n, config.train.seed,
                                                config.train.threads, &outcomes);
  robust.split = config.eval_split;

  std::string lines;
  for (const auto& o : outcomes) lines += to_json(o).dump() + "\n";
  Json tail;
  tail["summary"] = to_json(robust);
  lines += tail.dump() + "\n";
  write_file(a.out, lines);

  if (!a.report.empty()) {
    Json report;
    report["command"] = "attack";
    report["config"] = to_json(config);
    report["inputs"] = inputs_json(dir, corpus, table.get());
    report["robustness"] = to_json(robust);
    write_file(a.report, report.dump(2) + "\n");
  }
  out << to_json(robust).dump(2) << '\n';
  return kOk;
}

int dispatch(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Adversarial attack and adversarial training toolkit for text classifiers", "advtext"};
  app.require_subcommand(1);

  TrainArgs train_args[3];
  const char* train_names[3] = {"train", "adv-train", "aug-train"};
  const char* train_help[3] = {
      "Natural training for n_nat + n_adv epochs; writes a model file and a report",
      "Adversarial training (natural epochs, then epochs on D_nat plus regenerated D_adv)",
      "Training on the synonym-swap augmented set for n_nat + n_adv epochs"};
  CLI::App* train_cmds[3];
  for (int i = 0; i < 3; ++i) {
    CLI::App* sub = app.add_subcommand(train_names[i], train_help[i]);
    add_inputs(sub, train_args[i].in, true);
    add_overrides(sub, train_args[i].in, kTrainKeys);
    sub->add_option("--model-out", train_args[i].model_out, "Where to write the trained model")->required();
    sub->add_option("--report", train_args[i].report, "Where to write the JSON run report");
    sub->add_option("--train-log", train_args[i].train_log, "Where to write per-epoch JSONL logs");
    if (i == 2) {
      sub->add_option("--augment-file", train_args[i].augment_file,
                      "Extra {\"text\",\"label\"} JSONL merged into the augmented set");
    }
    train_cmds[i] = sub;
  }

  AttackArgs attack_args;
  CLI::App* attack = app.add_subcommand("attack", "Attack a saved model on a corpus split");
  add_inputs(attack, attack_args.in, true);
  add_overrides(attack, attack_args.in, kAttackKeys);
  attack->add_option("--model", attack_args.model, "Saved model file")->required();
  attack->add_option("--out", attack_args.out, "Outcome JSONL destination")->required();
  attack->add_option("--report", attack_args.report, "Where to write the JSON summary report");

  Inputs eval_in;
  std::string eval_model;
  std::string eval_split = "test";
  CLI::App* eval = app.add_subcommand("eval", "Clean accuracy of a saved model on a split");
  add_inputs(eval, eval_in, true);
  eval->add_option("--model", eval_model, "Saved model file")->required();
  eval->add_option("--split", eval_split, "train, dev or test")->check(CLI::IsMember({"train", "dev", "test"}));

  SynthSpec spec;
  std::string synth_out;
  CLI::App* synth = app.add_subcommand("synth", "Generate the synthetic corpus and its embedding file");
  synth->add_option("--out", synth_out, "Output directory")->required();
  synth->add_option("--seed", spec.seed, "Generator seed");
  synth->add_option("--train", spec.train, "Train split size");
  synth->add_option("--dev", spec.dev, "Dev split size");
  synth->add_option("--test", spec.test, "Test split size");
  synth->add_option("--noise", spec.noise, "Label flip probability")->check(CLI::Range(0.0, 1.0));

  Inputs stats_in;
  std::size_t bucket_width = 100;
  std::string stats_report;
  CLI::App* stats = app.add_subcommand("stats", "Token length histogram and summary per split");
  add_inputs(stats, stats_in, false);
  stats->add_option("--bucket-width", bucket_width, "Histogram bucket width in tokens")->check(CLI::PositiveNumber);
  stats->add_option("--report", stats_report, "Where to write the JSON statistics");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kOk : kUsage;
  }

  for (int i = 0; i < 3; ++i) {
    if (train_cmds[i]->parsed()) {
      return train_command(train_args[i], static_cast<TrainMode>(i), train_names[i], out, err);
    }
  }
  if (attack->parsed()) return attack_command(attack_args, out, err);
  if (eval->parsed()) {
    const std::string dir = data_dir(eval_in);
    const Corpus corpus = open_corpus(dir);
    print_warnings(corpus, err);
    auto table = open_embeddings(eval_in, dir);
    auto model = open_model(eval_model, table);
    const auto& split = corpus.split(eval_split);
    if (split.empty()) throw DataError("split " + eval_split + " is empty");
    Json j;
    j["split"] = eval_split;
    j["examples"] = split.size();
    j["accuracy"] = evaluate_accuracy(*model, split);
    out << j.dump(2) << '\n';
    return kOk;
  }
  if (synth->parsed()) {
    const SyntheticCorpus generated = generate_synthetic_corpus(spec);
    write_corpus(generated.corpus, synth_out);
    write_file((fs::path(synth_out) / "embeddings.txt").string(), generated.embeddings);
    Json j;
    j["out"] = synth_out;
    j["train"] = generated.corpus.train.size();
    j["dev"] = generated.corpus.dev.size();
    j["test"] = generated.corpus.test.size();
    j["embeddings_checksum"] = hex64(fnv1a64(generated.embeddings));
    out << j.dump(2) << '\n';
    return kOk;
  }
  if (stats->parsed()) {
    const std::string dir = data_dir(stats_in);
    if (!fs::is_directory(dir)) throw DataError("data directory not found: " + dir);
    const Corpus corpus = load_corpus(dir);
    print_warnings(corpus, err);
    Json j = Json::array();
    for (const auto& s : length_stats(corpus, bucket_width)) j.push_back(to_json(s));
    if (!stats_report.empty()) write_file(stats_report, j.dump(2) + "\n");
    out << j.dump(2) << '\n';
    return kOk;
  }
  return kUsage;
}

}  // namespace

int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  try {
    return dispatch(argc, argv, out, err);
  } catch (const InvalidArgument& e) {
    err << "usage error: " << e.what() << '\n';
    return kUsage;
  } catch (const ParseError& e) {
    err << "format error: " << e.what() << '\n';
    return kDataError;
  } catch (const DataError& e) {
    err << "data error: " << e.what() << '\n';
    return kDataError;
  } catch (const std::filesystem::filesystem_error& e) {
    err << "data error: " << e.what() << '\n';
    return kDataError;
  } catch (const std::exception& e) {
    err << "internal error: " << e.what() << '\n';
    return kInvariant;
  }
}

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  std::vector<const char*> argv = {"advtext"};
  for (const auto& a : args) argv.push_back(a.c_str());
  return run(static_cast<int>(argv.size()), argv.data(), out, err);
}

}  // namespace advtext::cli
