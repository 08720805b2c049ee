#include "mcbits/io.hpp"

#include <fstream>
#include <iterator>

namespace mcbits {

namespace {

class Writer {
 public:
  void u32(std::uint32_t v) {
    for (int b = 0; b < 4; ++b) out_.push_back(static_cast<std::uint8_t>(v >> (8 * b)));
  }
  void pmf(const QuantizedPmf& p) {
    u32(static_cast<std::uint32_t>(p.size()));
    for (std::uint32_t c : p.counts()) u32(c);
  }
  Bytes take() { return std::move(out_); }

 private:
  Bytes out_;
};

class Reader {
 public:
  explicit Reader(std::span<const std::uint8_t> in) : in_(in) {}

  std::uint32_t u32() {
    if (pos_ + 4 > in_.size()) throw ParseError("truncated input at byte " + std::to_string(pos_), 1);
    std::uint32_t v = 0;
    for (int b = 0; b < 4; ++b) v |= std::uint32_t{in_[pos_ + b]} << (8 * b);
    pos_ += 4;
    return v;
  }
  // Length prefix bounded by what is left, so corrupt input cannot request a
  // huge allocation.
  std::uint32_t length() {
    const std::uint32_t n = u32();
    if (n > (in_.size() - pos_) / 4) throw ParseError("length prefix exceeds input", 1);
    return n;
  }
  QuantizedPmf pmf(int precision, std::size_t expected) {
    const std::uint32_t n = length();
    if (n != expected) throw ParseError("pmf has unexpected alphabet size", 1);
    std::vector<std::uint32_t> counts(n);
    for (auto& c : counts) c = u32();
    return QuantizedPmf(std::move(counts), precision);
  }
  void finish() const {
    if (pos_ != in_.size()) throw ParseError("trailing bytes after payload", 1);
  }

 private:
  std::span<const std::uint8_t> in_;
  std::size_t pos_ = 0;
};

void header(Writer& w, ModelKind kind, int r, std::size_t kx, std::size_t kz, std::size_t steps) {
  w.u32(static_cast<std::uint32_t>(kind));
  w.u32(static_cast<std::uint32_t>(r));
  w.u32(static_cast<std::uint32_t>(kx));
  w.u32(static_cast<std::uint32_t>(kz));
  w.u32(static_cast<std::uint32_t>(steps));
}

}  // namespace

Bytes serialize_model(const MixtureModel& model) {
  Writer w;
  header(w, ModelKind::mixture, model.prior.precision(), model.num_obs(), model.num_latent(), 1);
  w.pmf(model.prior);
  for (const auto& row : model.likelihood) w.pmf(row);
  return w.take();
}

Bytes serialize_model(const Hmm& model) {
  Writer w;
  header(w, ModelKind::hmm, model.initial.precision(), model.num_obs(), model.num_latent(), model.steps);
  w.pmf(model.initial);
  for (const auto& row : model.transition) w.pmf(row);
  for (const auto& row : model.emission) w.pmf(row);
  return w.take();
}

AnyModel deserialize_model(std::span<const std::uint8_t> bytes) {
  Reader in(bytes);
  const std::uint32_t kind = in.u32();
  const auto r = static_cast<int>(in.u32());
  const std::uint32_t kx = in.u32();
  const std::uint32_t kz = in.u32();
  const std::uint32_t steps = in.u32();
  if (r < 1 || r > AnsMessage::kPrecisionCap) throw ParseError("model precision out of range", 1);
  if (kx == 0 || kz == 0) throw ParseError("empty alphabet", 1);
  if (kind == static_cast<std::uint32_t>(ModelKind::mixture)) {
    MixtureModel m;
    m.prior = in.pmf(r, kz);
    for (std::uint32_t z = 0; z < kz; ++z) m.likelihood.push_back(in.pmf(r, kx));
    in.finish();
    return m;
  }
  if (kind == static_cast<std::uint32_t>(ModelKind::hmm)) {
    Hmm h;
    h.steps = steps;
    h.initial = in.pmf(r, kz);
    for (std::uint32_t z = 0; z < kz; ++z) h.transition.push_back(in.pmf(r, kz));
    for (std::uint32_t z = 0; z < kz; ++z) h.emission.push_back(in.pmf(r, kx));
    in.finish();
    return h;
  }
  throw ParseError("unknown model kind " + std::to_string(kind), 1);
}

Bytes serialize_dataset(const Dataset& data) {
  Writer w;
  w.u32(static_cast<std::uint32_t>(data.size()));
  for (const auto& item : data) {
    w.u32(static_cast<std::uint32_t>(item.size()));
    for (Symbol s : item) w.u32(s);
  }
  return w.take();
}

Dataset deserialize_dataset(std::span<const std::uint8_t> bytes) {
  Reader in(bytes);
  Dataset data(in.length());
  for (auto& item : data) {
    item.resize(in.length());
    for (auto& s : item) s = in.u32();
  }
  in.finish();
  return data;
}

Bytes read_file(const std::filesystem::path& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw std::runtime_error("cannot open " + path.string());
  return Bytes(std::istreambuf_iterator<char>(f), {});
}

void write_file(const std::filesystem::path& path, std::span<const std::uint8_t> bytes) {
  std::ofstream f(path, std::ios::binary);
  if (!f) throw std::runtime_error("cannot write " + path.string());
  f.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
  if (!f) throw std::runtime_error("write failed for " + path.string());
}

}  // namespace mcbits
