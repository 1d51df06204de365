#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include <Eigen/Dense>

#include "advtext/text.hpp"

namespace advtext {

struct SynonymCandidate {
  std::string word;
  double similarity = 0.0;
};

// Word vectors stored column-wise (d x V). Rows of the vocabulary are
// unit-normalized at load.
class EmbeddingTable {
 public:
  EmbeddingTable(std::vector<std::string> words, Eigen::MatrixXd vectors,
                 std::uint64_t checksum = 0);

  Eigen::Index dimension() const { return vectors_.rows(); }
  std::size_t size() const { return words_.size(); }
  bool unit_normalized() const { return true; }
  std::uint64_t checksum() const { return checksum_; }

  std::optional<Eigen::Index> find(std::string_view word) const;
  bool contains(std::string_view word) const { return find(word).has_value(); }
  const std::string& word(Eigen::Index id) const { return words_[static_cast<std::size_t>(id)]; }
  auto vector(Eigen::Index id) const { return vectors_.col(id); }
  const Eigen::MatrixXd& vectors() const { return vectors_; }

  // Top-m neighbours for every word, consulted by nearest_synonyms when
  // the cache depth covers the request. Call before sharing the table.
  void build_neighbor_cache(std::size_t m);
  std::size_t neighbor_cache_depth() const { return cache_depth_; }

  // Exact linear scan; ignores the cache.
  std::vector<SynonymCandidate> scan_neighbors(Eigen::Index id, std::size_t m) const;
  const std::vector<SynonymCandidate>* cached_neighbors(Eigen::Index id) const;

 private:
  std::vector<std::string> words_;
  Eigen::MatrixXd vectors_;
  std::unordered_map<std::string, Eigen::Index> index_;
  std::uint64_t checksum_;
  std::vector<std::vector<SynonymCandidate>> cache_;
  std::size_t cache_depth_ = 0;
};

std::uint64_t fnv1a64(std::string_view bytes, std::uint64_t seed = 14695981039346656037ull);

EmbeddingTable load_embeddings(std::istream& source, const std::string& source_name = "<stream>");
EmbeddingTable load_embeddings(const std::filesystem::path& path);

// nullopt signals an out-of-vocabulary query.
std::optional<std::vector<SynonymCandidate>> nearest_synonyms(const EmbeddingTable& table,
                                                              std::string_view word, std::size_t m);

Eigen::VectorXd encode_sentence(const EmbeddingTable& table, const Document& doc);
double sentence_similarity(const EmbeddingTable& table, const Document& a, const Document& b);

class SentenceEncoder {
 public:
  virtual ~SentenceEncoder() = default;
  virtual Eigen::VectorXd encode(const Document& doc) const = 0;
  // Cosine of the encodings, 0 when either is the zero vector.
  double similarity(const Document& a, const Document& b) const;
};

class MeanEmbeddingEncoder : public SentenceEncoder {
 public:
  explicit MeanEmbeddingEncoder(const EmbeddingTable& table) : table_(table) {}
  Eigen::VectorXd encode(const Document& doc) const override { return encode_sentence(table_, doc); }

 private:
  const EmbeddingTable& table_;
};

}  // namespace advtext
