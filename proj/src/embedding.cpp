#include "advtext/embedding.hpp"

#include <algorithm>
#include <charconv>
#include <cstring>
#include <fstream>
#include <iterator>
#include <numeric>
#include <sstream>

#include "advtext/error.hpp"
#include "advtext/math.hpp"

namespace advtext {

namespace {

std::vector<std::string_view> split_fields(std::string_view line) {
  std::vector<std::string_view> fields;
  std::size_t pos = 0;
  while (pos < line.size()) {
    while (pos < line.size() && (line[pos] == ' ' || line[pos] == '\t')) ++pos;
    std::size_t end = pos;
    while (end < line.size() && line[end] != ' ' && line[end] != '\t') ++end;
    if (end > pos) fields.push_back(line.substr(pos, end - pos));
    pos = end;
  }
  return fields;
}

bool parse_double(std::string_view s, double& out) {
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), out);
  return ec == std::errc() && ptr == s.data() + s.size() && std::isfinite(out);
}

bool parse_count(std::string_view s, std::size_t& out) {
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), out);
  return ec == std::errc() && ptr == s.data() + s.size();
}

std::uint64_t content_checksum(const std::vector<std::string>& words, const Eigen::MatrixXd& v) {
  std::uint64_t h = fnv1a64("");
  for (const auto& w : words) h = fnv1a64(w + '\n', h);
  h = fnv1a64(std::string_view(reinterpret_cast<const char*>(v.data()),
                               static_cast<std::size_t>(v.size()) * sizeof(double)),
              h);
  return h;
}

// Orders by descending score, then word.
struct CandidateOrder {
  const Eigen::VectorXd& scores;
  const std::vector<std::string>& words;
  bool operator()(Eigen::Index a, Eigen::Index b) const {
    if (scores(a) != scores(b)) return scores(a) > scores(b);
    return words[static_cast<std::size_t>(a)] < words[static_cast<std::size_t>(b)];
  }
};

}  // namespace

std::uint64_t fnv1a64(std::string_view bytes, std::uint64_t seed) {
  std::uint64_t h = seed;
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 1099511628211ull;
  }
  return h;
}

EmbeddingTable::EmbeddingTable(std::vector<std::string> words, Eigen::MatrixXd vectors,
                               std::uint64_t checksum)
    : words_(std::move(words)), vectors_(std::move(vectors)), checksum_(checksum) {
  if (words_.empty() || vectors_.rows() == 0) throw InvalidArgument("embedding table is empty");
  if (static_cast<Eigen::Index>(words_.size()) != vectors_.cols()) {
    throw InvalidArgument("embedding table: word count does not match vector count");
  }
  for (Eigen::Index j = 0; j < vectors_.cols(); ++j) {
    const double n = vectors_.col(j).norm();
    if (n == 0.0) throw InvalidArgument("embedding table: zero vector for '" + words_[j] + "'");
    vectors_.col(j) /= n;
    if (!index_.emplace(words_[j], j).second) {
      throw InvalidArgument("embedding table: duplicate word '" + words_[j] + "'");
    }
  }
  if (checksum_ == 0) checksum_ = content_checksum(words_, vectors_);
}

std::optional<Eigen::Index> EmbeddingTable::find(std::string_view word) const {
  auto it = index_.find(std::string(word));
  if (it == index_.end()) return std::nullopt;
  return it->second;
}

std::vector<SynonymCandidate> EmbeddingTable::scan_neighbors(Eigen::Index id, std::size_t m) const {
  Eigen::VectorXd scores = (vectors_.transpose() * vectors_.col(id)).cwiseMax(-1.0).cwiseMin(1.0);
  std::vector<Eigen::Index> order;
  order.reserve(words_.size());
  for (Eigen::Index j = 0; j < vectors_.cols(); ++j) {
    if (j != id) order.push_back(j);
  }
  const std::size_t take = std::min(m, order.size());
  std::partial_sort(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(take), order.end(),
                    CandidateOrder{scores, words_});
  std::vector<SynonymCandidate> out;
  out.reserve(take);
  for (std::size_t r = 0; r < take; ++r) out.push_back({words_[order[r]], scores(order[r])});
  return out;
}

void EmbeddingTable::build_neighbor_cache(std::size_t m) {
  cache_.assign(words_.size(), {});
  for (Eigen::Index j = 0; j < vectors_.cols(); ++j) cache_[j] = scan_neighbors(j, m);
  cache_depth_ = m;
}

const std::vector<SynonymCandidate>* EmbeddingTable::cached_neighbors(Eigen::Index id) const {
  if (cache_.empty()) return nullptr;
  return &cache_[static_cast<std::size_t>(id)];
}

EmbeddingTable load_embeddings(std::istream& source, const std::string& source_name) {
  const std::string bytes((std::istreambuf_iterator<char>(source)), std::istreambuf_iterator<char>());
  std::vector<std::string> words;
  std::vector<double> values;
  std::unordered_map<std::string, bool> seen;
  std::size_t dim = 0;
  std::size_t header_dim = 0;
  bool first_content = true;

  std::size_t line_no = 0;
  std::size_t pos = 0;
  while (pos < bytes.size()) {
    std::size_t end = bytes.find('\n', pos);
    if (end == std::string::npos) end = bytes.size();
    std::string_view line(bytes.data() + pos, end - pos);
    pos = end + 1;
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);

    const auto fields = split_fields(line);
    if (fields.empty()) continue;

    if (first_content) {
      first_content = false;
      std::size_t count = 0;
      if (fields.size() == 2 && parse_count(fields[0], count) && parse_count(fields[1], header_dim)) {
        if (header_dim == 0) throw ParseError(source_name, line_no, "header dimension must be positive");
        continue;
      }
    }

    if (fields.size() < 2) throw ParseError(source_name, line_no, "expected a word followed by components");
    const std::size_t n = fields.size() - 1;
    if (dim == 0) {
      dim = n;
      if (header_dim != 0 && header_dim != dim) {
        throw ParseError(source_name, line_no,
                         "header declares dimension " + std::to_string(header_dim) + " but line has " +
                             std::to_string(n) + " components");
      }
    } else if (n != dim) {
      throw ParseError(source_name, line_no,
                       "expected " + std::to_string(dim) + " components, found " + std::to_string(n));
    }

    std::vector<double> row(n);
    double sq = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      if (!parse_double(fields[i + 1], row[i])) {
        throw ParseError(source_name, line_no, "unparsable number '" + std::string(fields[i + 1]) + "'");
      }
      sq += row[i] * row[i];
    }
    if (sq == 0.0) throw ParseError(source_name, line_no, "zero vector cannot be normalized");

    std::string word(fields[0]);
    if (!seen.emplace(word, true).second) continue;
    words.push_back(std::move(word));
    values.insert(values.end(), row.begin(), row.end());
  }
  if (words.empty()) throw ParseError(source_name, line_no, "no embedding entries");

  Eigen::MatrixXd vectors = Eigen::Map<const Eigen::MatrixXd>(
      values.data(), static_cast<Eigen::Index>(dim), static_cast<Eigen::Index>(words.size()));
  return EmbeddingTable(std::move(words), std::move(vectors), fnv1a64(bytes));
}

EmbeddingTable load_embeddings(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open embedding file " + path.string());
  return load_embeddings(in, path.string());
}

std::optional<std::vector<SynonymCandidate>> nearest_synonyms(const EmbeddingTable& table,
                                                              std::string_view word, std::size_t m) {
  if (m == 0) throw InvalidArgument("nearest_synonyms: m must be at least 1");
  const auto id = table.find(word);
  if (!id) return std::nullopt;
  if (const auto* cached = table.cached_neighbors(*id); cached && table.neighbor_cache_depth() >= m) {
    return std::vector<SynonymCandidate>(cached->begin(),
                                         cached->begin() + std::min(m, cached->size()));
  }
  return table.scan_neighbors(*id, m);
}

Eigen::VectorXd encode_sentence(const EmbeddingTable& table, const Document& doc) {
  Eigen::VectorXd sum = Eigen::VectorXd::Zero(table.dimension());
  std::size_t hits = 0;
  for (const auto& w : doc.words()) {
    if (auto id = table.find(w)) {
      sum += table.vector(*id);
      ++hits;
    }
  }
  if (hits == 0) return sum;
  sum /= static_cast<double>(hits);
  const double n = sum.norm();
  if (n == 0.0) return Eigen::VectorXd::Zero(table.dimension());
  return sum / n;
}

double SentenceEncoder::similarity(const Document& a, const Document& b) const {
  const Eigen::VectorXd ea = encode(a);
  const Eigen::VectorXd eb = encode(b);
  if (ea.isZero(0.0) || eb.isZero(0.0)) return 0.0;
  return cosine_similarity(ea, eb);
}

double sentence_similarity(const EmbeddingTable& table, const Document& a, const Document& b) {
  return MeanEmbeddingEncoder(table).similarity(a, b);
}

}  // namespace advtext
