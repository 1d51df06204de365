#include <array>
#include <bit>
#include <cstring>
#include <istream>
#include <ostream>

#include "advtext/classifier.hpp"
#include "advtext/error.hpp"

namespace advtext {

namespace {

constexpr std::array<char, 8> kMagic = {'A', 'D', 'V', 'T', 'X', 'T', 'M', 'D'};

class Writer {
 public:
  explicit Writer(std::ostream& out) : out_(out) {}

  void bytes(const char* data, std::size_t n) {
    out_.write(data, static_cast<std::streamsize>(n));
    hash_ = fnv1a64(std::string_view(data, n), hash_);
  }
  void u64(std::uint64_t v) {
    char buf[8];
    for (int i = 0; i < 8; ++i) buf[i] = static_cast<char>((v >> (8 * i)) & 0xff);
    bytes(buf, 8);
  }
  void f64(double v) { u64(std::bit_cast<std::uint64_t>(v)); }
  std::uint64_t hash() const { return hash_; }

 private:
  std::ostream& out_;
  std::uint64_t hash_ = fnv1a64("");
};

class Reader {
 public:
  explicit Reader(std::istream& in) : in_(in) {}

  void bytes(char* data, std::size_t n) {
    in_.read(data, static_cast<std::streamsize>(n));
    if (static_cast<std::size_t>(in_.gcount()) != n) throw DataError("model stream is truncated or corrupted");
    hash_ = fnv1a64(std::string_view(data, n), hash_);
  }
  std::uint64_t u64() {
    unsigned char buf[8];
    bytes(reinterpret_cast<char*>(buf), 8);
    std::uint64_t v = 0;
    for (int i = 0; i < 8; ++i) v |= static_cast<std::uint64_t>(buf[i]) << (8 * i);
    return v;
  }
  double f64() { return std::bit_cast<double>(u64()); }
  std::uint64_t hash() const { return hash_; }

 private:
  std::istream& in_;
  std::uint64_t hash_ = fnv1a64("");
};

}  // namespace

// Layout: magic, version, kind, classes, dimension, truncate_last, chunk_size,
// overlap, filters, width, embedding checksum, parameter count, parameters,
// trailing FNV-1a of everything before it. All integers are u64 little-endian.
void save_model(const TrainableModel& model, std::ostream& out) {
  Writer w(out);
  const ModelOptions o = model.options();
  w.bytes(kMagic.data(), kMagic.size());
  w.u64(kModelFormatVersion);
  w.u64(static_cast<std::uint64_t>(model.kind()));
  w.u64(model.class_count());
  w.u64(static_cast<std::uint64_t>(model.embeddings().dimension()));
  w.u64(o.truncate_last);
  w.u64(o.chunk_size);
  w.u64(o.overlap);
  w.u64(o.filters);
  w.u64(o.width);
  w.u64(model.embeddings().checksum());
  w.u64(static_cast<std::uint64_t>(model.parameter_count()));
  for (Eigen::Index i = 0; i < model.parameter_count(); ++i) w.f64(model.parameters()(i));
  w.u64(w.hash());
  if (!out) throw DataError("failed to write model stream");
}

std::unique_ptr<TrainableModel> load_model(std::istream& in, std::shared_ptr<const EmbeddingTable> table) {
  if (!table) throw InvalidArgument("load_model requires an embedding table");
  Reader r(in);
  std::array<char, 8> magic{};
  r.bytes(magic.data(), magic.size());
  if (magic != kMagic) throw DataError("not a model file (bad magic)");
  const std::uint64_t version = r.u64();
  if (version != kModelFormatVersion) {
    throw DataError("model format version " + std::to_string(version) + " is not supported (expected " +
                    std::to_string(kModelFormatVersion) + ")");
  }
  ModelOptions o;
  const std::uint64_t kind = r.u64();
  if (kind != 1 && kind != 2) throw DataError("model stream has unknown model kind");
  o.kind = static_cast<ModelKind>(kind);
  const std::uint64_t classes = r.u64();
  const std::uint64_t dim = r.u64();
  o.truncate_last = r.u64();
  o.chunk_size = r.u64();
  o.overlap = r.u64();
  o.filters = r.u64();
  o.width = r.u64();
  const std::uint64_t checksum = r.u64();
  const std::uint64_t count = r.u64();

  if (checksum != table->checksum()) {
    throw DataError("model was trained against a different embedding file");
  }
  if (dim != static_cast<std::uint64_t>(table->dimension())) {
    throw DataError("model dimension does not match the embedding table");
  }
  if (classes < 2 || classes > (1u << 20) || o.filters > (1u << 20) || o.width > (1u << 10)) {
    throw DataError("model stream has implausible header values");
  }
  std::unique_ptr<TrainableModel> model;
  try {
    model = make_model(std::move(table), classes, 0, o);
  } catch (const InvalidArgument& e) {
    throw DataError(std::string("model stream has invalid shape: ") + e.what());
  }
  if (count != static_cast<std::uint64_t>(model->parameter_count())) {
    throw DataError("model parameter count does not match its declared shape");
  }
  Eigen::VectorXd theta(model->parameter_count());
  for (Eigen::Index i = 0; i < theta.size(); ++i) theta(i) = r.f64();
  const std::uint64_t expected = r.hash();
  if (r.u64() != expected) throw DataError("model stream checksum mismatch (corrupted)");
  model->set_parameters(theta);
  return model;
}

}  // namespace advtext
