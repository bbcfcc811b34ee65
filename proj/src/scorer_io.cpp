// Model file round-trip. Layout (all integers little-endian, floats IEEE-754
// 64-bit):
//
//   "FMLM" | u32 version | u8 family | vocab | config | tensors | u32 crc32
//
//   vocab   = u32 count, count x u32 catalog ids (ascending)
//   config  = attention: u32 layers,heads,dim,window,epochs,batch;
//                        f64 mask_prob,learning_rate; u64 seed
//             ngram:     u32 order; f64 smoothing
//   tensors = u32 count, each: u16 name length, name bytes,
//             u64 element count, elements as f64
//
// The trailing CRC covers every preceding byte. Wrong magic or version ->
// VersionMismatch; truncation, checksum failure, or malformed payload ->
// CorruptFile. Floats are stored bit-exactly, so a loaded scorer reproduces
// the saved scorer's outputs bit for bit.

#include <cstring>
#include <fstream>
#include <map>
#include <vector>

#include "flowmine/attention.hpp"
#include "flowmine/crc32.hpp"
#include "flowmine/errors.hpp"
#include "flowmine/seqmodel.hpp"

namespace flowmine {

namespace {

constexpr char kMagic[4] = {'F', 'M', 'L', 'M'};
constexpr std::uint32_t kVersion = 1;
constexpr std::uint8_t kFamilyAttention = 0;
constexpr std::uint8_t kFamilyNgram = 1;

class Writer {
 public:
  void u8(std::uint8_t v) { buf_.push_back(static_cast<char>(v)); }
  void u16(std::uint16_t v) { raw(&v, sizeof v); }
  void u32(std::uint32_t v) { raw(&v, sizeof v); }
  void u64(std::uint64_t v) { raw(&v, sizeof v); }
  void f64(double v) { raw(&v, sizeof v); }
  void raw(const void* p, std::size_t n) {
    buf_.append(static_cast<const char*>(p), n);
  }
  void name(const std::string& s) {
    u16(static_cast<std::uint16_t>(s.size()));
    raw(s.data(), s.size());
  }
  void tensor(const std::string& tensor_name, const double* data,
              std::size_t elems) {
    name(tensor_name);
    u64(elems);
    raw(data, elems * sizeof(double));
  }
  std::string& buffer() { return buf_; }

 private:
  std::string buf_;
};

class Reader {
 public:
  explicit Reader(const std::string& buf) : buf_(buf) {}

  std::uint8_t u8() { return static_cast<std::uint8_t>(take(1)[0]); }
  std::uint16_t u16() { return scalar<std::uint16_t>(); }
  std::uint32_t u32() { return scalar<std::uint32_t>(); }
  std::uint64_t u64() { return scalar<std::uint64_t>(); }
  double f64() { return scalar<double>(); }
  std::string name() {
    std::uint16_t len = u16();
    const char* p = take(len);
    return std::string(p, len);
  }
  void floats(double* out, std::size_t elems) {
    const char* p = take(elems * sizeof(double));
    std::memcpy(out, p, elems * sizeof(double));
  }
  std::size_t pos() const { return pos_; }
  bool at(std::size_t where) const { return pos_ == where; }

 private:
  template <typename T>
  T scalar() {
    T v;
    std::memcpy(&v, take(sizeof(T)), sizeof(T));
    return v;
  }
  const char* take(std::size_t n) {
    if (pos_ + n > buf_.size()) throw CorruptFile("model file truncated");
    const char* p = buf_.data() + pos_;
    pos_ += n;
    return p;
  }
  const std::string& buf_;
  std::size_t pos_ = 0;
};

void write_vocab(Writer& w, const Vocab& vocab) {
  const auto& ids = vocab.ids();
  w.u32(static_cast<std::uint32_t>(ids.size()));
  for (MessageId id : ids) w.u32(id);
}

Vocab read_vocab(Reader& r) {
  std::uint32_t n = r.u32();
  std::vector<MessageId> ids;
  ids.reserve(n);
  for (std::uint32_t i = 0; i < n; ++i) ids.push_back(r.u32());
  return Vocab(std::move(ids));
}

void write_sparse(Writer& w, const std::string& prefix,
                  const std::map<std::uint64_t, double>& table) {
  std::vector<double> keys, vals;
  keys.reserve(table.size());
  vals.reserve(table.size());
  for (const auto& [k, v] : table) {
    keys.push_back(static_cast<double>(k));  // keys are small: exact in f64
    vals.push_back(v);
  }
  w.tensor(prefix + "_keys", keys.data(), keys.size());
  w.tensor(prefix + "_vals", vals.data(), vals.size());
}

std::map<std::uint64_t, double> read_sparse(Reader& r,
                                            const std::string& prefix) {
  if (r.name() != prefix + "_keys") throw CorruptFile("tensor order mismatch");
  std::uint64_t n = r.u64();
  std::vector<double> keys(n);
  r.floats(keys.data(), n);
  if (r.name() != prefix + "_vals") throw CorruptFile("tensor order mismatch");
  std::uint64_t m = r.u64();
  if (m != n) throw CorruptFile("sparse tensor length mismatch");
  std::vector<double> vals(n);
  r.floats(vals.data(), n);
  std::map<std::uint64_t, double> out;
  for (std::uint64_t i = 0; i < n; ++i) {
    out[static_cast<std::uint64_t>(keys[i])] = vals[i];
  }
  return out;
}

}  // namespace

void save_scorer(const Scorer& scorer, const std::string& path) {
  Writer w;
  w.raw(kMagic, 4);
  w.u32(kVersion);

  if (scorer.family() == "attention") {
    const auto& att = dynamic_cast<const AttentionScorer&>(scorer);
    w.u8(kFamilyAttention);
    write_vocab(w, att.vocab());
    const ModelConfig& c = att.config();
    w.u32(static_cast<std::uint32_t>(c.layers));
    w.u32(static_cast<std::uint32_t>(c.heads));
    w.u32(static_cast<std::uint32_t>(c.dim));
    w.u32(static_cast<std::uint32_t>(c.window));
    w.u32(static_cast<std::uint32_t>(c.epochs));
    w.u32(static_cast<std::uint32_t>(c.batch));
    w.f64(c.mask_prob);
    w.f64(c.learning_rate);
    w.u64(c.seed);
    // parameters() is non-const (it hands out gradient slots); serialization
    // only reads the values.
    auto refs = const_cast<AttentionScorer&>(att).parameters();
    w.u32(static_cast<std::uint32_t>(refs.size()));
    for (const ParamRef& ref : refs) {
      w.tensor(ref.name, ref.value->data(),
               static_cast<std::size_t>(ref.value->size()));
    }
  } else if (scorer.family() == "ngram") {
    const auto& ng = dynamic_cast<const NgramScorer&>(scorer);
    w.u8(kFamilyNgram);
    write_vocab(w, ng.vocab());
    w.u32(static_cast<std::uint32_t>(ng.order()));
    w.f64(ng.smoothing());
    w.u32(5);  // uni, big_keys, big_vals, tri_keys, tri_vals
    w.tensor("uni", ng.unigram().data(), ng.unigram().size());
    write_sparse(w, "big", ng.bigram());
    write_sparse(w, "tri", ng.trigram());
  } else {
    throw InvariantViolation("save_scorer: unknown scorer family");
  }

  std::uint32_t crc = crc32(w.buffer().data(), w.buffer().size());
  w.u32(crc);

  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error("cannot write model file: " + path);
  out.write(w.buffer().data(), static_cast<std::streamsize>(w.buffer().size()));
  if (!out) throw Error("failed writing model file: " + path);
}

std::unique_ptr<Scorer> load_scorer(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot open model file: " + path);
  std::string buf((std::istreambuf_iterator<char>(in)),
                  std::istreambuf_iterator<char>());

  if (buf.size() < 4 || std::memcmp(buf.data(), kMagic, 4) != 0) {
    throw VersionMismatch("not a flowmine model file: " + path);
  }
  if (buf.size() < 8) throw CorruptFile("model file truncated");
  std::uint32_t stored_crc;
  std::memcpy(&stored_crc, buf.data() + buf.size() - 4, 4);
  if (crc32(buf.data(), buf.size() - 4) != stored_crc) {
    throw CorruptFile("model file checksum mismatch");
  }

  Reader body(buf);
  body.u32();  // magic, already validated
  std::uint32_t version = body.u32();
  if (version != kVersion) {
    throw VersionMismatch("unsupported model file version");
  }
  std::uint8_t family = body.u8();
  Vocab vocab = read_vocab(body);

  std::size_t payload_end = buf.size() - 4;
  if (family == kFamilyAttention) {
    ModelConfig c;
    c.layers = body.u32();
    c.heads = body.u32();
    c.dim = body.u32();
    c.window = body.u32();
    c.epochs = body.u32();
    c.batch = body.u32();
    c.mask_prob = body.f64();
    c.learning_rate = body.f64();
    c.seed = body.u64();
    auto scorer = std::make_unique<AttentionScorer>(vocab, c);
    auto refs = scorer->parameters();
    std::uint32_t count = body.u32();
    if (count != refs.size()) throw CorruptFile("tensor count mismatch");
    for (ParamRef& ref : refs) {
      if (body.name() != ref.name) throw CorruptFile("tensor order mismatch");
      std::uint64_t elems = body.u64();
      if (elems != static_cast<std::uint64_t>(ref.value->size())) {
        throw CorruptFile("tensor size mismatch: " + ref.name);
      }
      body.floats(ref.value->data(), elems);
    }
    if (!body.at(payload_end)) throw CorruptFile("trailing bytes in model file");
    return scorer;
  }
  if (family == kFamilyNgram) {
    int order = static_cast<int>(body.u32());
    double smoothing = body.f64();
    auto scorer = std::make_unique<NgramScorer>(vocab, order, smoothing);
    std::uint32_t count = body.u32();
    if (count != 5) throw CorruptFile("tensor count mismatch");
    if (body.name() != "uni") throw CorruptFile("tensor order mismatch");
    std::uint64_t elems = body.u64();
    std::vector<double> uni(elems);
    body.floats(uni.data(), elems);
    auto big = read_sparse(body, "big");
    auto tri = read_sparse(body, "tri");
    scorer->set_counts(std::move(uni), std::move(big), std::move(tri));
    if (!body.at(payload_end)) throw CorruptFile("trailing bytes in model file");
    return scorer;
  }
  throw CorruptFile("unknown scorer family tag");
}

}  // namespace flowmine
