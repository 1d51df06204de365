#include "advtext/text.hpp"

#include <algorithm>
#include <cctype>

#include "advtext/error.hpp"

namespace advtext {

namespace {

bool is_space(char c) { return std::isspace(static_cast<unsigned char>(c)) != 0; }
bool is_punct(char c) { return std::ispunct(static_cast<unsigned char>(c)) != 0; }

bool valid_surface(std::string_view s) {
  return !s.empty() && std::none_of(s.begin(), s.end(), is_space);
}

std::string lower(std::string_view s) {
  std::string out(s);
  for (char& c : out) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  return out;
}

}  // namespace

Document::Document(std::vector<std::string> words, std::string raw)
    : words_(std::move(words)), raw_(std::move(raw)) {
  for (const auto& w : words_) {
    if (!valid_surface(w)) throw InvalidArgument("token surface must be non-empty without whitespace");
  }
}

const std::string& Document::word(std::size_t i) const {
  if (i >= words_.size()) {
    throw InvalidArgument("token index " + std::to_string(i) + " out of range for document of " +
                          std::to_string(words_.size()) + " tokens");
  }
  return words_[i];
}

Token Document::token(std::size_t i) const { return Token{word(i), i}; }

std::size_t ChunkPlan::length(std::size_t j, std::size_t n) const {
  return std::min(chunk_size, n - starts.at(j));
}

Document tokenize(std::string_view text) {
  std::vector<std::string> words;
  std::size_t pos = 0;
  while (pos < text.size()) {
    while (pos < text.size() && is_space(text[pos])) ++pos;
    std::size_t end = pos;
    while (end < text.size() && !is_space(text[end])) ++end;
    if (end == pos) break;

    std::string_view piece = text.substr(pos, end - pos);
    std::size_t lead = 0;
    while (lead < piece.size() && is_punct(piece[lead])) ++lead;
    std::size_t trail = piece.size();
    while (trail > lead && is_punct(piece[trail - 1])) --trail;

    for (std::size_t i = 0; i < lead; ++i) words.emplace_back(1, piece[i]);
    if (trail > lead) words.push_back(lower(piece.substr(lead, trail - lead)));
    for (std::size_t i = trail; i < piece.size(); ++i) words.emplace_back(1, piece[i]);
    pos = end;
  }
  return Document(std::move(words), std::string(text));
}

std::string detokenize(const Document& doc) {
  std::string out;
  for (std::size_t i = 0; i < doc.size(); ++i) {
    if (i) out.push_back(' ');
    out += doc[i];
  }
  return out;
}

Document delete_word(const Document& doc, std::size_t i) {
  doc.word(i);
  std::vector<std::string> words(doc.words().begin(), doc.words().end());
  words.erase(words.begin() + static_cast<std::ptrdiff_t>(i));
  return Document(std::move(words));
}

Document replace_word(const Document& doc, std::size_t i, std::string_view replacement) {
  doc.word(i);
  if (!valid_surface(replacement)) {
    throw InvalidArgument("replacement must be non-empty without whitespace");
  }
  std::vector<std::string> words(doc.words().begin(), doc.words().end());
  words[i] = std::string(replacement);
  return Document(std::move(words));
}

ChunkPlan plan_chunks(std::size_t n, std::size_t chunk_size, std::size_t overlap) {
  if (overlap == 0 || overlap >= chunk_size) {
    throw InvalidArgument("chunk parameters require 0 < overlap < chunk_size");
  }
  ChunkPlan plan{chunk_size, overlap, {0}};
  while (plan.starts.back() + chunk_size < n) plan.starts.push_back(plan.starts.back() + plan.stride());
  return plan;
}

std::vector<Document> chunk_document(const Document& doc, std::size_t chunk_size,
                                     std::size_t overlap) {
  const ChunkPlan plan = plan_chunks(doc.size(), chunk_size, overlap);
  std::vector<Document> chunks;
  chunks.reserve(plan.starts.size());
  auto words = doc.words();
  for (std::size_t j = 0; j < plan.starts.size(); ++j) {
    auto first = words.begin() + static_cast<std::ptrdiff_t>(plan.starts[j]);
    auto last = first + static_cast<std::ptrdiff_t>(plan.length(j, doc.size()));
    chunks.emplace_back(std::vector<std::string>(first, last));
  }
  return chunks;
}

}  // namespace advtext
