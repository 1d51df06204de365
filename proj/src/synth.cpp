#include <charconv>
#include <cmath>
#include <random>
#include <unordered_set>

#include "advtext/corpus.hpp"
#include "advtext/error.hpp"
#include "advtext/seed.hpp"

// Embedding geometry. Coordinates are partitioned into orthogonal blocks:
//
//   [filler | keyword axes | class registers | private synonym axes]
//
// Filler words are random directions inside the filler block. Each keyword
// owns one axis. Each class c owns `register_dims` coordinates whose uniform
// spread is the register direction q_c; the first `close_register_dims` of
// them form the narrower q_c'. Per keyword a of class c, with private axis p:
//
//   close synonym:    close_cos * e_a + close_register * q_c' + r * p
//   drifted synonyms: drift_cos * e_a + drift_toward_other * g + s * (share * q_c + t * p)
//
// where g is the normalised sum of the other class's keyword axes and r, s, t
// complete unit length. Drifted synonyms carry evidence for the other class,
// which is what the attack exploits; the register coordinates give training a
// shared direction along which to unlearn it.

namespace advtext {

namespace {

std::string pseudo_word(std::mt19937_64& rng) {
  static constexpr std::string_view onset = "bdfgklmnprstvz";
  static constexpr std::string_view vowel = "aeiou";
  std::uniform_int_distribution<std::size_t> syllables(2, 4);
  std::uniform_int_distribution<std::size_t> pick_onset(0, onset.size() - 1);
  std::uniform_int_distribution<std::size_t> pick_vowel(0, vowel.size() - 1);
  std::string w;
  for (std::size_t s = syllables(rng); s > 0; --s) {
    w.push_back(onset[pick_onset(rng)]);
    w.push_back(vowel[pick_vowel(rng)]);
  }
  return w;
}

void append_number(std::string& out, double v) {
  char buf[32];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, v);
  out.append(buf, ptr);
}

}  // namespace

void SynthSpec::validate() const {
  if (!(noise >= 0.0 && noise <= 1.0)) throw InvalidArgument("noise must lie in [0, 1]");
  if (filler_words < 2 || filler_dim < 1 || keywords_per_class < 1) {
    throw InvalidArgument("synthetic vocabulary is too small");
  }
  if (synonyms_per_keyword < 4) throw InvalidArgument("each keyword needs at least 4 synonyms");
  if (min_filler > max_filler) throw InvalidArgument("min_filler exceeds max_filler");
  if (close_register_dims > register_dims || register_dims == 0) {
    throw InvalidArgument("register dimensions are inconsistent");
  }
  if (close_cos * close_cos + close_register * close_register > 1.0 ||
      drift_cos * drift_cos + drift_toward_other * drift_toward_other > 1.0 || register_share > 1.0) {
    throw InvalidArgument("synonym geometry coefficients exceed unit length");
  }
}

SyntheticCorpus generate_synthetic_corpus(const SynthSpec& spec) {
  spec.validate();
  SyntheticCorpus out;
  std::mt19937_64 vocab_rng(derive_seed(spec.seed, Stream::Vocabulary, 0));

  std::unordered_set<std::string> used;
  auto fresh_word = [&] {
    for (;;) {
      std::string w = pseudo_word(vocab_rng);
      if (used.insert(w).second) return w;
    }
  };

  const std::size_t classes = 2;
  const Eigen::Index nk = static_cast<Eigen::Index>(spec.keywords_per_class);
  const Eigen::Index ns = static_cast<Eigen::Index>(spec.synonyms_per_keyword);
  const Eigen::Index df = static_cast<Eigen::Index>(spec.filler_dim);
  const Eigen::Index m = static_cast<Eigen::Index>(spec.register_dims);
  const Eigen::Index mc = static_cast<Eigen::Index>(spec.close_register_dims);
  const Eigen::Index key_base = df;
  const Eigen::Index reg_base = key_base + 2 * nk;
  const Eigen::Index private_base = reg_base + 2 * m;
  const Eigen::Index dim = private_base + 2 * nk * ns;

  std::vector<std::string> words;
  std::vector<Eigen::VectorXd> vectors;

  std::normal_distribution<double> gauss(0.0, 1.0);
  for (std::size_t i = 0; i < spec.filler_words; ++i) {
    Eigen::VectorXd v = Eigen::VectorXd::Zero(dim);
    for (Eigen::Index j = 0; j < df; ++j) v(j) = gauss(vocab_rng);
    out.filler.push_back(fresh_word());
    words.push_back(out.filler.back());
    vectors.push_back(v.normalized());
  }

  out.keywords.resize(classes);
  for (std::size_t c = 0; c < classes; ++c) {
    for (Eigen::Index a = 0; a < nk; ++a) {
      Eigen::VectorXd v = Eigen::VectorXd::Zero(dim);
      v(key_base + static_cast<Eigen::Index>(c) * nk + a) = 1.0;
      out.keywords[c].push_back(fresh_word());
      words.push_back(out.keywords[c].back());
      vectors.push_back(v);
    }
  }

  const double r_close = std::sqrt(std::max(0.0, 1.0 - spec.close_cos * spec.close_cos -
                                                     spec.close_register * spec.close_register));
  const double s_drift = std::sqrt(std::max(0.0, 1.0 - spec.drift_cos * spec.drift_cos -
                                                     spec.drift_toward_other * spec.drift_toward_other));
  const double t_private = std::sqrt(std::max(0.0, 1.0 - spec.register_share * spec.register_share));
  Eigen::Index private_axis = private_base;
  for (std::size_t c = 0; c < classes; ++c) {
    const Eigen::Index own_reg = reg_base + static_cast<Eigen::Index>(c) * m;
    const Eigen::Index other_keys = key_base + static_cast<Eigen::Index>(1 - c) * nk;
    for (Eigen::Index a = 0; a < nk; ++a) {
      const Eigen::Index axis = key_base + static_cast<Eigen::Index>(c) * nk + a;
      for (Eigen::Index j = 0; j < ns; ++j, ++private_axis) {
        Eigen::VectorXd v = Eigen::VectorXd::Zero(dim);
        if (j == 0) {
          v(axis) = spec.close_cos;
          if (mc > 0) v.segment(own_reg, mc).setConstant(spec.close_register / std::sqrt(double(mc)));
          v(private_axis) = r_close;
        } else {
          v(axis) = spec.drift_cos;
          v.segment(other_keys, nk).setConstant(spec.drift_toward_other / std::sqrt(double(nk)));
          v.segment(own_reg, m).setConstant(s_drift * spec.register_share / std::sqrt(double(m)));
          v(private_axis) = s_drift * t_private;
        }
        words.push_back(fresh_word());
        vectors.push_back(v.normalized());
      }
    }
  }

  std::string& emb = out.embeddings;
  emb = std::to_string(words.size()) + " " + std::to_string(dim) + "\n";
  for (std::size_t i = 0; i < words.size(); ++i) {
    emb += words[i];
    for (Eigen::Index j = 0; j < dim; ++j) {
      emb.push_back(' ');
      append_number(emb, vectors[i](j));
    }
    emb.push_back('\n');
  }

  std::mt19937_64 doc_rng(derive_seed(spec.seed, Stream::Documents, 0));
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  std::uniform_int_distribution<std::size_t> filler_len(spec.min_filler, spec.max_filler);
  std::uniform_int_distribution<std::size_t> filler_pick(0, spec.filler_words - 1);
  std::uniform_int_distribution<std::size_t> keyword_pick(0, spec.keywords_per_class - 1);
  std::unordered_set<std::string> texts;

  auto make_split = [&](std::size_t n) {
    std::vector<Label> labels(n);
    for (std::size_t i = 0; i < n; ++i) labels[i] = i % 2;
    std::shuffle(labels.begin(), labels.end(), doc_rng);
    std::vector<LabeledExample> split;
    split.reserve(n);
    for (Label y : labels) {
      for (;;) {
        const double u = unit(doc_rng);
        const std::size_t keys = u < 0.6 ? 2 : (u < 0.85 ? 3 : 4);
        std::vector<std::string> tokens;
        for (std::size_t i = filler_len(doc_rng); i > 0; --i) tokens.push_back(out.filler[filler_pick(doc_rng)]);
        for (std::size_t k = 0; k < keys; ++k) {
          std::uniform_int_distribution<std::size_t> at(0, tokens.size());
          tokens.insert(tokens.begin() + static_cast<std::ptrdiff_t>(at(doc_rng)),
                        out.keywords[y][keyword_pick(doc_rng)]);
        }
        Document doc(std::move(tokens));
        if (!texts.insert(detokenize(doc)).second) continue;
        const Label label = unit(doc_rng) < spec.noise ? 1 - y : y;
        split.push_back({std::move(doc), label});
        break;
      }
    }
    return split;
  };

  out.corpus.name = "synthetic";
  out.corpus.class_count = classes;
  out.corpus.train = make_split(spec.train);
  out.corpus.dev = make_split(spec.dev);
  out.corpus.test = make_split(spec.test);
  return out;
}

}  // namespace advtext
