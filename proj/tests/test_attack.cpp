#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <random>
#include <set>

#include "advtext/error.hpp"
#include "advtext/training.hpp"
#include "support.hpp"

using namespace advtext;
using testing_support::doc;
using testing_support::make_table;
using testing_support::probs;
using testing_support::ScriptedModel;

namespace {

// p(class 0) is high exactly when the trigger word is present.
class TriggerModel : public ClassifierModel {
 public:
  explicit TriggerModel(std::string trigger) : trigger_(std::move(trigger)) {}
  std::size_t class_count() const override { return 2; }
  ProbVector predict_proba(const Document& d) const override {
    for (const auto& w : d.words()) {
      if (w == trigger_) return probs({0.9, 0.1});
    }
    return probs({0.2, 0.8});
  }

 private:
  std::string trigger_;
};

// Six orthogonal tokens plus "culpable" at cosine 0.9 to "guilty".
std::shared_ptr<EmbeddingTable> courtroom_table() {
  const std::vector<std::string> words{"the", "accused", "was", "found", "guilty", "today"};
  std::vector<std::pair<std::string, std::vector<double>>> entries;
  for (std::size_t i = 0; i < words.size(); ++i) {
    std::vector<double> v(7, 0.0);
    v[i] = 1.0;
    entries.push_back({words[i], v});
  }
  std::vector<double> syn(7, 0.0);
  syn[4] = 0.9;
  syn[6] = std::sqrt(0.19);
  entries.push_back({"culpable", syn});
  return make_table(entries);
}

const BagOfEmbeddingsModel& trained_synthetic_model() {
  static const auto model = [] {
    const auto& s = testing_support::small_synthetic();
    auto m = std::make_unique<BagOfEmbeddingsModel>(testing_support::synthetic_table(s), 2, 0);
    TrainConfig cfg;
    cfg.n_nat = 4;
    natural_train(*m, s.corpus.train, cfg);
    return m;
  }();
  return *model;
}

}  // namespace

TEST_CASE("attack config validation") {
  AttackConfig c;
  CHECK_NOTHROW(c.validate());
  c.k = 0;
  CHECK_THROWS_AS(c.validate(), InvalidArgument);
  c = {};
  c.m = 0;
  CHECK_THROWS_AS(c.validate(), InvalidArgument);
  c = {};
  c.threshold = 0.0;
  CHECK_THROWS_AS(c.validate(), InvalidArgument);
  c = {};
  c.min_word_cos = 1.5;
  CHECK_THROWS_AS(c.validate(), InvalidArgument);
  c = {};
  c.threshold = 1.01;
  CHECK_NOTHROW(c.validate());
}

TEST_CASE("word importance examples") {
  CHECK(importance_score(probs({0.7, 0.3}), probs({0.7, 0.3}), 0) == 0.0);
  CHECK(importance_score(probs({0.8, 0.2}), probs({0.3, 0.7}), 0) == doctest::Approx(1.0).epsilon(1e-15));
  CHECK(importance_score(probs({0.9, 0.1}), probs({0.6, 0.4}), 0) == doctest::Approx(0.3).epsilon(1e-15));

  ScriptedModel s(probs({0.8, 0.2}));
  s.set(doc({"b"}), probs({0.3, 0.7}));
  s.set(doc({"a"}), probs({0.8, 0.2}));
  CHECK(word_importance(s, doc({"a", "b"}), 0, 0) == doctest::Approx(1.0));
  CHECK(word_importance(s, doc({"a", "b"}), 0, 1) == 0.0);
  CHECK_THROWS_AS(word_importance(s, doc({"a"}), 0, 0), InvalidArgument);
  CHECK_THROWS_AS(word_importance(s, doc({"a", "b"}), 0, 2), InvalidArgument);
}

TEST_CASE("rank_words examples") {
  ScriptedModel flat(probs({0.6, 0.4}));
  ImportanceRanking r = rank_words(flat, doc({"a", "b", "c", "d", "e"}), 0, 3);
  REQUIRE(r.size() == 3);
  for (std::size_t i = 0; i < 3; ++i) {
    CHECK(r[i].index == i);
    CHECK(r[i].score == 0.0);
  }

  // eleven classes keep the true class on top after every deletion
  auto after = [](double s) {
    ProbVector p = ProbVector::Constant(11, s / 10);
    p(0) = 1 - s;
    return p;
  };
  ProbVector base = ProbVector::Zero(11);
  base(0) = 1.0;
  ScriptedModel m(base);
  m.set(doc({"b", "c"}), after(0.1));
  m.set(doc({"a", "c"}), after(0.9));
  m.set(doc({"a", "b"}), after(0.5));
  r = rank_words(m, doc({"a", "b", "c"}), 0, 2);
  REQUIRE(r.size() == 2);
  CHECK(r[0].index == 1);
  CHECK(std::abs(r[0].score - 0.9) < 1e-12);
  CHECK(r[1].index == 2);
  CHECK(std::abs(r[1].score - 0.5) < 1e-12);

  CHECK(rank_words(m, doc({"a", "b", "c"}), 0, 10).size() == 3);
  CHECK_THROWS_AS(rank_words(m, doc({"a"}), 0, 2), InvalidArgument);
}

TEST_CASE("rank_words matches brute force on synthetic examples") {
  const auto& s = testing_support::small_synthetic();
  const auto& model = trained_synthetic_model();
  std::size_t checked = 0;
  for (const auto& ex : s.corpus.test) {
    if (predict(model, ex.document) != ex.label) continue;
    Document x = ex.document;
    if (checked == 0) {
      // one exactly 12-token example
      std::vector<std::string> w(x.words().begin(), x.words().begin() + 12);
      x = Document(w);
    }
    auto want = testing_support::brute_force_ranking(model, x, ex.label, 10);
    auto got = rank_words(model, x, ex.label, 10);
    REQUIRE(got.size() == want.size());
    for (std::size_t i = 0; i < got.size(); ++i) {
      CHECK(got[i].index == want[i].first);
      CHECK(std::abs(got[i].score - want[i].second) <= 1e-12);
    }
    if (++checked == 20) break;
  }
  CHECK(checked == 20);
}

TEST_CASE("perturb_word candidate choice") {
  auto t = make_table({{"w", {1, 0, 0}},
                       {"near", {0.9, std::sqrt(0.19), 0}},
                       {"nearer", {0.95, 0, std::sqrt(1 - 0.9025)}},
                       {"far", {0.1, -0.2, -0.97}}});
  MeanEmbeddingEncoder enc(*t);
  AttackConfig cfg;
  cfg.m = 3;
  Attacker attacker(*t, enc, cfg);

  ScriptedModel m(probs({0.9, 0.1}));
  m.set(doc({"x", "near"}), probs({0.4, 0.6}));
  m.set(doc({"x", "nearer"}), probs({0.6, 0.4}));
  auto r = attacker.perturb_word(m, doc({"x", "w"}), 1, 0);
  REQUIRE(r);
  CHECK(r->word == "near");
  CHECK(r->document == doc({"x", "near"}));
  CHECK(r->probabilities(0) == 0.4);
  CHECK(r->word_cosine == doctest::Approx(0.9));

  // equal true-class probability: higher cosine wins
  ScriptedModel tie(probs({0.5, 0.5}));
  r = attacker.perturb_word(tie, doc({"x", "w"}), 1, 0);
  REQUIRE(r);
  CHECK(r->word == "nearer");

  // OOV and empty-candidate cases
  CHECK_FALSE(attacker.perturb_word(m, doc({"x", "w"}), 0, 0));
  AttackConfig strict = cfg;
  strict.min_word_cos = 0.99;
  CHECK_FALSE(Attacker(*t, enc, strict).perturb_word(m, doc({"x", "w"}), 1, 0));

  // single candidate is taken regardless of its effect
  AttackConfig one = cfg;
  one.m = 1;
  ScriptedModel worse(probs({0.9, 0.1}));
  worse.set(doc({"x", "nearer"}), probs({0.99, 0.01}));
  r = Attacker(*t, enc, one).perturb_word(worse, doc({"x", "w"}), 1, 0);
  REQUIRE(r);
  CHECK(r->word == "nearer");
}

TEST_CASE("perturb_word ties on probability and cosine go lexicographic") {
  auto t = make_table({{"w", {1, 0, 0}}, {"beta", {0.8, 0.6, 0}}, {"alpha", {0.8, 0, 0.6}}});
  MeanEmbeddingEncoder enc(*t);
  Attacker attacker(*t, enc, AttackConfig{});
  ScriptedModel m(probs({0.5, 0.5}));
  auto r = attacker.perturb_word(m, doc({"w"}), 0, 0);
  REQUIRE(r);
  CHECK(r->word == "alpha");
}

TEST_CASE("first_flip policy takes the first flipping candidate in cosine order") {
  auto t = make_table({{"w", {1, 0, 0}},
                       {"near", {0.9, std::sqrt(0.19), 0}},
                       {"nearer", {0.95, 0, std::sqrt(1 - 0.9025)}}});
  MeanEmbeddingEncoder enc(*t);
  AttackConfig cfg;
  cfg.policy = CandidatePolicy::FirstFlip;
  ScriptedModel m(probs({0.9, 0.1}));
  m.set(doc({"x", "near"}), probs({0.1, 0.9}));
  m.set(doc({"x", "nearer"}), probs({0.45, 0.55}));
  auto r = Attacker(*t, enc, cfg).perturb_word(m, doc({"x", "w"}), 1, 0);
  REQUIRE(r);
  CHECK(r->word == "nearer");
}

TEST_CASE("generate on the constructed six-token instance") {
  auto t = courtroom_table();
  TriggerModel model("guilty");
  LabeledExample ex{doc({"the", "accused", "was", "found", "guilty", "today"}), 0};

  AttackOutcome o = generate_adversarial(model, *t, ex, AttackConfig{});
  CHECK(o.success);
  CHECK_FALSE(o.skipped);
  CHECK(o.perturbed_indices == std::vector<std::size_t>{4});
  CHECK(o.adversarial == doc({"the", "accused", "was", "found", "culpable", "today"}));
  CHECK(o.similarity == doctest::Approx(5.9 / 6.0).epsilon(1e-12));
  CHECK(o.similarity > 0.5);
  CHECK(predict(model, o.adversarial) == 1);
  CHECK(o.predicted_before == 0);
  CHECK(o.predicted_after == 1);
  CHECK(o.queries >= ex.document.size() + 1);

  AttackConfig tight;
  tight.threshold = 0.999;
  o = generate_adversarial(model, *t, ex, tight);
  CHECK_FALSE(o.success);
  CHECK(o.adversarial == ex.document);
  CHECK(o.perturbed_indices.empty());

  LabeledExample wrong{ex.document, 1};
  o = generate_adversarial(model, *t, wrong, AttackConfig{});
  CHECK(o.skipped);
  CHECK_FALSE(o.success);
  CHECK(o.adversarial == ex.document);
  CHECK(o.perturbed_indices.empty());
  CHECK(o.queries == 1);
}

TEST_CASE("single-token and all-OOV documents fail cleanly") {
  auto t = courtroom_table();
  TriggerModel model("guilty");
  AttackOutcome o = generate_adversarial(model, *t, {doc({"guilty"}), 0}, AttackConfig{});
  CHECK_FALSE(o.success);
  CHECK_FALSE(o.skipped);
  CHECK(o.adversarial == doc({"guilty"}));
  o = generate_adversarial(model, *t, {doc({"zz", "qq"}), 1}, AttackConfig{});
  CHECK_FALSE(o.success);
  CHECK(o.adversarial == doc({"zz", "qq"}));
}

TEST_CASE("generate matches the straight-line reference on small instances") {
  std::size_t successes = 0, skipped = 0, total = 0;
  for (std::uint64_t seed = 0; seed < 300; ++seed) {
    auto inst = testing_support::random_instance(seed, 8);
    AttackConfig cfg;
    cfg.k = 1 + seed % 3;
    cfg.m = 1 + seed % 2;
    cfg.threshold = seed % 4 == 0 ? 0.9 : 0.5;
    auto want = testing_support::reference_attack(*inst.model, *inst.table, inst.example.document,
                                                  inst.example.label, cfg);
    AttackOutcome got = generate_adversarial(*inst.model, *inst.table, inst.example, cfg);
    CHECK(got.skipped == want.skipped);
    CHECK(got.success == want.success);
    CHECK(std::vector<std::string>(got.adversarial.words().begin(), got.adversarial.words().end()) ==
          want.adversarial);
    CHECK(got.perturbed_indices == want.perturbed);
    CHECK(std::abs(got.similarity - want.similarity) < 1e-12);
    successes += got.success;
    skipped += got.skipped;
    ++total;
  }
  // the instance family must exercise every branch
  CHECK(successes > 30);
  CHECK(skipped > 10);
  CHECK(total - successes - skipped > 30);
}

TEST_CASE("outcome invariants on a trained synthetic model") {
  const auto& s = testing_support::small_synthetic();
  const auto& model = trained_synthetic_model();
  const auto& table = model.embeddings();
  MeanEmbeddingEncoder enc(table);
  for (double threshold : {0.5, 0.95}) {
    AttackConfig cfg;
    cfg.threshold = threshold;
    Attacker attacker(table, enc, cfg);
    for (std::size_t i = 0; i < 60; ++i) {
      const auto& ex = s.corpus.test[i];
      AttackOutcome o = attacker.generate(model, ex);
      AttackOutcome again = attacker.generate(model, ex);
      CHECK(o.adversarial == again.adversarial);
      CHECK(o.perturbed_indices == again.perturbed_indices);
      CHECK(o.queries == again.queries);
      if (o.skipped) continue;
      CHECK(o.queries >= ex.document.size() + 1);
      auto ranking = rank_words(model, ex.document, ex.label, cfg.k);
      std::set<std::size_t> ranked;
      for (const auto& r : ranking) ranked.insert(r.index);
      CHECK(o.perturbed_indices.size() <= cfg.k);
      CHECK(std::is_sorted(o.perturbed_indices.begin(), o.perturbed_indices.end()));
      for (std::size_t idx : o.perturbed_indices) CHECK(ranked.count(idx) == 1);
      if (o.success) {
        CHECK(sentence_similarity(table, o.adversarial, ex.document) > threshold);
        CHECK(predict(model, o.adversarial) != ex.label);
        CHECK_FALSE(o.perturbed_indices.empty());
      } else {
        CHECK(o.adversarial == ex.document);
      }
    }
  }
}

TEST_CASE("attack_corpus bookkeeping") {
  const auto& s = testing_support::small_synthetic();
  const auto& model = trained_synthetic_model();
  const auto& table = model.embeddings();
  MeanEmbeddingEncoder enc(table);

  AttackConfig closed;
  closed.threshold = 1.01;
  CorpusAttack r = Attacker(table, enc, closed).attack_corpus(model, s.corpus.test, 50, 3);
  CHECK(r.summary.sampled == 50);
  CHECK(r.summary.successes == 0);
  CHECK(r.summary.success_rate == 0.0);
  CHECK(r.summary.robust_accuracy == 1.0);
  CHECK(r.summary.robust_accuracy_overall == r.summary.clean_accuracy);

  BagOfEmbeddingsModel uniform(model.embeddings_ptr(), 2, 0);
  uniform.set_weights(Eigen::MatrixXd::Zero(2, table.dimension()), Eigen::VectorXd::Zero(2));
  r = Attacker(table, enc, AttackConfig{}).attack_corpus(uniform, s.corpus.test, 40, 1);
  CHECK(r.summary.skipped + r.summary.attacked == 40);
  for (const auto& o : r.outcomes) CHECK(o.skipped == (o.original.label != 0));
  CHECK(r.summary.correct == r.summary.attacked);

  CHECK(Attacker(table, enc, AttackConfig{}).attack_corpus(model, s.corpus.test, 5000, 1).summary.sampled ==
        s.corpus.test.size());
}

TEST_CASE("attack_corpus is deterministic and thread-independent") {
  const auto& s = testing_support::small_synthetic();
  const auto& model = trained_synthetic_model();
  MeanEmbeddingEncoder enc(model.embeddings());
  Attacker attacker(model.embeddings(), enc, AttackConfig{});
  CorpusAttack a = attacker.attack_corpus(model, s.corpus.test, 60, 9, 1);
  CorpusAttack b = attacker.attack_corpus(model, s.corpus.test, 60, 9, 1);
  CorpusAttack c = attacker.attack_corpus(model, s.corpus.test, 60, 9, 3);
  CHECK(a.summary.successes > 0);
  for (const CorpusAttack* other : {&b, &c}) {
    REQUIRE(other->outcomes.size() == a.outcomes.size());
    for (std::size_t i = 0; i < a.outcomes.size(); ++i) {
      CHECK(other->outcomes[i].original.document == a.outcomes[i].original.document);
      CHECK(other->outcomes[i].adversarial == a.outcomes[i].adversarial);
      CHECK(other->outcomes[i].similarity == a.outcomes[i].similarity);
      CHECK(other->outcomes[i].queries == a.outcomes[i].queries);
    }
    CHECK(other->summary.robust_accuracy == a.summary.robust_accuracy);
    CHECK(other->summary.mean_queries == a.summary.mean_queries);
  }
  CHECK(a.summary.robust_accuracy_overall <= a.summary.clean_accuracy);
}

TEST_CASE("summary arithmetic") {
  std::vector<AttackOutcome> os(4);
  os[0].skipped = true;
  os[0].queries = 1;
  os[1].success = true;
  os[1].perturbed_indices = {1, 2};
  os[1].similarity = 0.8;
  os[1].queries = 10;
  os[2].success = true;
  os[2].perturbed_indices = {0};
  os[2].similarity = 0.6;
  os[2].queries = 20;
  os[3].queries = 9;
  AttackSummary s = summarize(os, 7);
  CHECK(s.requested == 7);
  CHECK(s.sampled == 4);
  CHECK(s.correct == 3);
  CHECK(s.attacked == 3);
  CHECK(s.successes == 2);
  CHECK(s.failures == 1);
  CHECK(s.clean_accuracy == 0.75);
  CHECK(s.robust_accuracy == doctest::Approx(1.0 / 3));
  CHECK(s.robust_accuracy_overall == 0.25);
  CHECK(s.success_rate == doctest::Approx(2.0 / 3));
  CHECK(s.mean_queries == 10.0);
  CHECK(s.mean_perturbed_words == 1.5);
  CHECK(s.mean_similarity == doctest::Approx(0.7));
}

TEST_CASE("sample_indices") {
  auto a = sample_indices(100, 10, 4);
  CHECK(a == sample_indices(100, 10, 4));
  CHECK(a != sample_indices(100, 10, 5));
  CHECK(std::set<std::size_t>(a.begin(), a.end()).size() == 10);
  for (auto i : a) CHECK(i < 100);
  CHECK(sample_indices(5, 10, 1).size() == 5);
}
