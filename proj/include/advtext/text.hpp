#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace advtext {

using Label = std::size_t;

struct Token {
  std::string surface;
  std::size_t position = 0;
};

// Immutable tokenized text. Edits return new documents.
class Document {
 public:
  Document() = default;
  explicit Document(std::vector<std::string> words, std::string raw = {});

  std::size_t size() const { return words_.size(); }
  bool empty() const { return words_.empty(); }

  const std::string& operator[](std::size_t i) const { return words_[i]; }
  const std::string& word(std::size_t i) const;
  Token token(std::size_t i) const;
  std::span<const std::string> words() const { return words_; }

  // Original text if the document came from tokenize, else empty.
  const std::string& raw() const { return raw_; }

  // Token equality; raw text is not compared.
  bool operator==(const Document& other) const { return words_ == other.words_; }

 private:
  std::vector<std::string> words_;
  std::string raw_;
};

struct LabeledExample {
  Document document;
  Label label = 0;
};

struct ChunkPlan {
  std::size_t chunk_size = 510;
  std::size_t overlap = 100;
  std::vector<std::size_t> starts;

  std::size_t stride() const { return chunk_size - overlap; }
  // Length of chunk j for a document of n tokens.
  std::size_t length(std::size_t j, std::size_t n) const;
};

Document tokenize(std::string_view text);
std::string detokenize(const Document& doc);

Document delete_word(const Document& doc, std::size_t i);
Document replace_word(const Document& doc, std::size_t i, std::string_view replacement);

ChunkPlan plan_chunks(std::size_t n, std::size_t chunk_size = 510, std::size_t overlap = 100);
std::vector<Document> chunk_document(const Document& doc, std::size_t chunk_size = 510,
                                     std::size_t overlap = 100);

}  // namespace advtext
