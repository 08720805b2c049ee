#include "mcbits/harness.hpp"

#include <fmt/core.h>

#include <atomic>
#include <charconv>
#include <chrono>
#include <exception>
#include <istream>
#include <ostream>
#include <thread>

namespace mcbits {

namespace {

struct CoderName {
  CoderId id;
  const char* name;
};

constexpr CoderName kCoderNames[] = {
    {CoderId::elbo, "bb-elbo"},       {CoderId::is, "bb-is"},
    {CoderId::cis, "bb-cis"},         {CoderId::cis_perm, "bb-cis-perm"},
    {CoderId::cis_exhaustive, "bb-cis-exhaustive"},
    {CoderId::ais, "bb-ais"},         {CoderId::ais_bitswap, "bb-ais-bitswap"},
    {CoderId::smc, "bb-smc"},         {CoderId::csmc, "bb-csmc"},
};

constexpr int kMicroPrecision = 8;

}  // namespace

CoderId coder_from_string(const std::string& name) {
  for (const auto& c : kCoderNames)
    if (name == c.name) return c.id;
  throw std::invalid_argument("unknown coder '" + name + "'");
}

const char* to_string(CoderId id) {
  for (const auto& c : kCoderNames)
    if (id == c.id) return c.name;
  return "?";
}

std::vector<CoderId> all_coders() {
  std::vector<CoderId> out;
  for (const auto& c : kCoderNames) out.push_back(c.id);
  return out;
}

bool runs_on_mixture(CoderId id) { return id != CoderId::smc && id != CoderId::csmc; }
bool runs_on_hmm(CoderId id) {
  return id == CoderId::elbo || id == CoderId::is || id == CoderId::smc || id == CoderId::csmc;
}

// ---------------------------------------------------------------------------
// CoderSession

CoderSession::CoderSession(AnyModel model, const CoderSpec& spec)
    : spec_(spec), model_(std::make_unique<AnyModel>(std::move(model))) {
  if (spec.particles == 0) throw ContractError("coder session: need at least one particle");
  if (const auto* mix = std::get_if<MixtureModel>(model_.get())) {
    if (!runs_on_mixture(spec.coder))
      throw std::invalid_argument(fmt::format("coder {} needs a sequence model", to_string(spec.coder)));
    const int r = mix->prior.precision();
    posterior_ = TabularPosterior::uniform(mix->num_obs(), mix->num_latent(), r);
    mixture_.emplace(*mix, posterior_);
    if (spec.coder == CoderId::cis) cis_.emplace(spec.coupling, spec.coupling_seed, spec.particles, r);
    if (spec.coder == CoderId::cis_perm)
      cis_.emplace(CouplingMode::permutation_shifts, spec.coupling_seed, spec.particles, r);
    if (spec.coder == CoderId::cis_exhaustive)
      cis_.emplace(CouplingMode::exhaustive, spec.coupling_seed, spec.particles, r);
  } else {
    const Hmm& h = std::get<Hmm>(*model_);
    if (!runs_on_hmm(spec.coder))
      throw std::invalid_argument(fmt::format("coder {} needs a mixture model", to_string(spec.coder)));
    const int r = h.initial.precision();
    posterior_ = TabularPosterior::uniform(h.num_obs(), h.num_latent(), r);
    hmm_.emplace(h, posterior_);
    if (spec.coder == CoderId::csmc)
      csmc_.emplace(spec.coupling_seed, spec.particles, h.steps, r, spec.index_precision);
  }
}

std::size_t CoderSession::symbols_per_item() const { return hmm_ ? hmm_->dimension() : 1; }

std::optional<CouplingMode> CoderSession::coupling_mode() const {
  if (cis_) return cis_->mode();
  if (csmc_) return CouplingMode::iid_shifts;
  return std::nullopt;
}

namespace {

template <typename Task>
CoderContext<Task> context(const Task& task, const CoderSpec& spec) {
  CoderContext<Task> ctx{&task};
  ctx.particles = spec.particles;
  ctx.index_precision = spec.index_precision;
  ctx.kernel_precision = spec.kernel_precision;
  return ctx;
}

Symbol single(const std::vector<Symbol>& item) {
  if (item.size() != 1) throw ContractError("mixture items hold exactly one symbol");
  return item[0];
}

}  // namespace

void CoderSession::encode(AnsMessage& m, const std::vector<Symbol>& item) const {
  if (hmm_) {
    if (item.size() != hmm_->dimension()) throw ContractError("sequence length differs from model horizon");
    for (Symbol s : item)
      if (s >= hmm_->model().num_obs()) throw ContractError("observation outside alphabet");
    const auto ctx = context(*hmm_, spec_);
    switch (spec_.coder) {
      case CoderId::elbo: return bb_elbo_encode(m, item, ctx);
      case CoderId::is: return bb_is_encode(m, item, ctx);
      case CoderId::smc: return bb_smc_encode(m, item, ctx);
      case CoderId::csmc: return bb_csmc_encode(m, item, ctx, *csmc_);
      default: break;
    }
    throw ContractError("coder not available for sequences");
  }
  const Symbol x = single(item);
  if (x >= mixture_->model().num_obs()) throw ContractError("observation outside alphabet");
  const auto ctx = context(*mixture_, spec_);
  switch (spec_.coder) {
    case CoderId::elbo: return bb_elbo_encode(m, x, ctx);
    case CoderId::is: return bb_is_encode(m, x, ctx);
    case CoderId::cis:
    case CoderId::cis_perm:
    case CoderId::cis_exhaustive: return bb_cis_encode(m, x, ctx, *cis_);
    case CoderId::ais: return bb_ais_encode(m, x, ctx);
    case CoderId::ais_bitswap: return bb_ais_bitswap_encode(m, x, ctx);
    default: break;
  }
  throw ContractError("coder not available for the mixture");
}

std::vector<Symbol> CoderSession::decode(AnsMessage& m) const {
  if (hmm_) {
    const auto ctx = context(*hmm_, spec_);
    switch (spec_.coder) {
      case CoderId::elbo: return bb_elbo_decode(m, ctx);
      case CoderId::is: return bb_is_decode(m, ctx);
      case CoderId::smc: return bb_smc_decode(m, ctx);
      case CoderId::csmc: return bb_csmc_decode(m, ctx, *csmc_);
      default: break;
    }
    throw ContractError("coder not available for sequences");
  }
  const auto ctx = context(*mixture_, spec_);
  switch (spec_.coder) {
    case CoderId::elbo: return {bb_elbo_decode(m, ctx)};
    case CoderId::is: return {bb_is_decode(m, ctx)};
    case CoderId::cis:
    case CoderId::cis_perm:
    case CoderId::cis_exhaustive: return {bb_cis_decode(m, ctx, *cis_)};
    case CoderId::ais: return {bb_ais_decode(m, ctx)};
    case CoderId::ais_bitswap: return {bb_ais_bitswap_decode(m, ctx)};
    default: break;
  }
  throw ContractError("coder not available for the mixture");
}

double CoderSession::ideal_bits(const std::vector<Symbol>& item, Rng& rng) const {
  if (hmm_) {
    const auto ctx = context(*hmm_, spec_);
    switch (spec_.coder) {
      case CoderId::elbo: return negative_elbo(ctx, item);
      case CoderId::is: return iwae_bound(ctx, item, rng);
      case CoderId::smc: return fivo_bound(ctx, item, rng);
      case CoderId::csmc: return csmc_bound(ctx, item, *csmc_, rng);
      default: break;
    }
    throw ContractError("coder not available for sequences");
  }
  const Symbol x = single(item);
  const auto ctx = context(*mixture_, spec_);
  switch (spec_.coder) {
    case CoderId::elbo: return negative_elbo(ctx, x);
    case CoderId::is: return iwae_bound(ctx, x, rng);
    case CoderId::cis:
    case CoderId::cis_perm:
    case CoderId::cis_exhaustive:
      return cis_estimator(ctx, x, *cis_, static_cast<std::uint32_t>(uniform_below(rng, mixture_->q(x).total())));
    case CoderId::ais:
    case CoderId::ais_bitswap: return ais_bound(ctx, x, rng);
    default: break;
  }
  throw ContractError("coder not available for the mixture");
}

double CoderSession::entropy(const Dataset& data) const {
  return std::visit([&](const auto& m) { return empirical_entropy(m, data); }, *model_);
}

// ---------------------------------------------------------------------------
// Experiments

namespace {

struct ExperimentName {
  Experiment id;
  const char* name;
};

constexpr ExperimentName kExperimentNames[] = {
    {Experiment::mixture_convergence, "mixture_convergence"},
    {Experiment::cleanliness, "cleanliness"},
    {Experiment::initial_bits, "initial_bits"},
    {Experiment::hmm_convergence, "hmm_convergence"},
    {Experiment::roundtrip_suite, "roundtrip_suite"},
};

std::vector<std::size_t> powers_of_two(std::size_t hi) {
  std::vector<std::size_t> out;
  for (std::size_t n = 1; n <= hi; n *= 2) out.push_back(n);
  return out;
}

}  // namespace

Experiment experiment_from_string(const std::string& name) {
  for (const auto& e : kExperimentNames)
    if (name == e.name) return e.id;
  throw std::invalid_argument("unknown experiment '" + name + "'");
}

const char* to_string(Experiment e) {
  for (const auto& x : kExperimentNames)
    if (e == x.id) return x.name;
  return "?";
}

RunConfig default_config(Experiment e) {
  RunConfig c;
  c.experiment = e;
  switch (e) {
    case Experiment::mixture_convergence:
      c.coders = {CoderId::is, CoderId::cis, CoderId::ais, CoderId::ais_bitswap};
      c.n_sweep = powers_of_two(1024);
      break;
    case Experiment::cleanliness:
      c.coders = {CoderId::elbo, CoderId::is, CoderId::cis, CoderId::ais, CoderId::ais_bitswap};
      c.n_sweep = powers_of_two(1024);
      break;
    case Experiment::initial_bits:
      c.coders = {CoderId::is, CoderId::cis, CoderId::ais, CoderId::ais_bitswap};
      c.n_sweep = powers_of_two(1024);
      c.n = 20;
      c.redraws = 10;
      break;
    case Experiment::hmm_convergence:
      c.coders = {CoderId::is, CoderId::smc, CoderId::csmc};
      c.n_sweep = powers_of_two(64);
      break;
    case Experiment::roundtrip_suite:
      c.coders = all_coders();
      c.n_sweep = {1, 4, 64};
      c.n = 200;
      c.redraws = 10;
      break;
  }
  return c;
}

AnyModel cell_model(const RunConfig& config, CoderId coder) {
  const bool hmm = !runs_on_mixture(coder) || (config.experiment == Experiment::hmm_convergence && runs_on_hmm(coder));
  if (hmm) {
    HmmShape shape;
    shape.precision = config.precision;
    return gen_hmm(config.seed, shape);
  }
  MixtureShape shape;
  if (coder == CoderId::cis_exhaustive) {
    shape.num_obs = 16;
    shape.num_latent = 16;
    shape.precision = kMicroPrecision;
  } else {
    shape.precision = config.precision;
  }
  return gen_mixture(config.seed, shape);
}

namespace {

struct Measurement {
  AnsMessage initial;
  AnsMessage final;
  std::size_t pad = 0;
  std::size_t low_first = 0;
  std::size_t low_all = 0;
  std::size_t bits_first = 0;
};

Measurement measure(const CoderSession& session, const Dataset& data, std::uint64_t seed) {
  constexpr std::size_t kMaxPad = std::size_t{1} << 26;
  for (std::size_t pad = 64;; pad *= 2) {
    Measurement out;
    out.pad = pad;
    out.initial = AnsMessage::random(seed, pad);
    AnsMessage m = out.initial;
    m.reset_low_water();
    try {
      for (std::size_t k = 0; k < data.size(); ++k) {
        session.encode(m, data[k]);
        if (k == 0) {
          out.low_first = m.low_water();
          out.bits_first = m.bit_length();
        }
      }
    } catch (const UnderflowError&) {
      if (pad >= kMaxPad) throw;
      continue;
    }
    out.low_all = m.low_water();
    out.final = std::move(m);
    return out;
  }
}

void verify_round_trip(const CoderSession& session, const Dataset& data, const Measurement& run) {
  const char* name = to_string(session.spec().coder);
  const std::size_t n = session.spec().particles;
  AnsMessage m = run.final;
  for (std::size_t k = data.size(); k-- > 0;) {
    std::vector<Symbol> got;
    try {
      got = session.decode(m);
    } catch (const UnderflowError& e) {
      throw RoundTripError(fmt::format("{} N={}: decode of item {} underflowed: {}", name, n, k, e.what()));
    }
    if (got != data[k]) {
      std::size_t pos = 0;
      while (pos < got.size() && pos < data[k].size() && got[pos] == data[k][pos]) ++pos;
      throw RoundTripError(fmt::format("{} N={}: item {} differs at symbol {} (expected {}, decoded {})", name, n, k,
                                       pos, pos < data[k].size() ? std::to_string(data[k][pos]) : "end",
                                       pos < got.size() ? std::to_string(got[pos]) : "end"));
    }
  }
  if (!(m == run.initial))
    throw RoundTripError(fmt::format("{} N={}: decode did not restore the initial message", name, n));
}

}  // namespace

CompressedData compress_dataset(const CoderSession& session, const Dataset& data, std::uint64_t seed) {
  Measurement run = measure(session, data, seed);
  // The bottom low_all words were never touched; dropping them gives the
  // message an encode from the minimal pad would have produced.
  const auto tail = run.final.tail();
  AnsMessage trimmed(run.final.head(), {tail.begin() + static_cast<std::ptrdiff_t>(run.low_all), tail.end()});
  return {std::move(trimmed), seed, run.pad - run.low_all, data.size()};
}

Dataset decompress_dataset(const CoderSession& session, const CompressedData& packed) {
  AnsMessage m = packed.message;
  Dataset data(packed.items);
  for (std::size_t k = packed.items; k-- > 0;) data[k] = session.decode(m);
  if (!(m == AnsMessage::random(packed.seed, packed.pad_words)))
    throw RoundTripError("decoded message does not end at the recorded initial message");
  return data;
}

BitrateReport run_cell(const RunConfig& config, CoderId coder, std::size_t particles) {
  if (config.n == 0) throw std::invalid_argument("dataset size must be at least 1");
  CoderSpec spec;
  spec.coder = coder;
  spec.particles = particles;
  spec.index_precision = config.index_precision;
  spec.kernel_precision = config.kernel_precision;
  spec.coupling = config.coupling;
  spec.coupling_seed = config.seed;
  const CoderSession session(cell_model(config, coder), spec);
  const Dataset data =
      std::visit([&](const auto& m) { return sample_dataset(m, config.n, config.seed); }, session.model());

  const Measurement run = measure(session, data, config.seed);
  verify_round_trip(session, data, run);

  const auto d = static_cast<double>(session.symbols_per_item());
  const double symbols = static_cast<double>(data.size()) * d;
  constexpr auto word = static_cast<std::size_t>(AnsMessage::kWordBits);
  BitrateReport r;
  r.coder = to_string(coder);
  r.particles = particles;
  r.net_bps = static_cast<double>(run.final.bit_length() - run.initial.bit_length()) / symbols;
  r.total_bps = static_cast<double>(run.final.bit_length() - word * run.low_all) / symbols;
  r.total_first = static_cast<double>(run.bits_first - word * run.low_first) / d;
  r.pad_words = run.pad - run.low_all;
  r.seed = config.seed;
  r.entropy = session.entropy(data);

  Rng rng = make_rng(config.seed, 0x1dea100 + 4096 * static_cast<std::uint64_t>(coder) + particles);
  const std::size_t redraws = coder == CoderId::elbo ? 1 : std::max<std::size_t>(config.redraws, 1);
  double acc = 0.0;
  for (std::size_t k = 0; k < redraws; ++k)
    for (const auto& item : data) acc += session.ideal_bits(item, rng);
  r.ideal_bps = acc / (static_cast<double>(redraws) * symbols);
  return r;
}

std::vector<BitrateReport> run_experiment(const RunConfig& config) {
  if (config.n == 0) throw std::invalid_argument("dataset size must be at least 1");
  struct Cell {
    CoderId coder;
    std::size_t particles;
  };
  std::vector<Cell> cells;
  for (CoderId c : config.coders) {
    if (c == CoderId::elbo) {
      cells.push_back({c, 1});
      continue;
    }
    if (c == CoderId::cis_exhaustive) {
      cells.push_back({c, std::size_t{1} << kMicroPrecision});
      continue;
    }
    for (std::size_t n : config.n_sweep) {
      if (n == 0) throw std::invalid_argument("particle counts must be positive");
      if ((c == CoderId::ais || c == CoderId::ais_bitswap) && n > config.max_ais_levels) continue;
      if ((c == CoderId::cis || c == CoderId::cis_perm || c == CoderId::csmc) &&
          n > (std::size_t{1} << config.precision))
        throw std::invalid_argument(fmt::format("{} needs N <= 2^r", to_string(c)));
      cells.push_back({c, n});
    }
  }

  std::vector<BitrateReport> rows(cells.size());
  std::vector<std::exception_ptr> errors(cells.size());
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t i; (i = next++) < cells.size();) {
      const auto t0 = std::chrono::steady_clock::now();
      try {
        rows[i] = run_cell(config, cells[i].coder, cells[i].particles);
      } catch (...) {
        errors[i] = std::current_exception();
        continue;
      }
      if (config.verbose) {
        const std::chrono::duration<double> dt = std::chrono::steady_clock::now() - t0;
        fmt::print(stderr, "{:<18} N={:<5} net={:.4f} ideal={:.4f} H={:.4f} first={:.1f} ({:.1f}s)\n", rows[i].coder,
                   rows[i].particles, rows[i].net_bps, rows[i].ideal_bps, rows[i].entropy, rows[i].total_first,
                   dt.count());
      }
    }
  };
  unsigned workers = config.workers ? config.workers : std::max(1u, std::thread::hardware_concurrency());
  workers = static_cast<unsigned>(std::min<std::size_t>(workers, std::max<std::size_t>(cells.size(), 1)));
  if (workers <= 1) {
    worker();
  } else {
    std::vector<std::jthread> pool;
    for (unsigned w = 0; w < workers; ++w) pool.emplace_back(worker);
  }
  for (const auto& e : errors)
    if (e) std::rethrow_exception(e);
  return rows;
}

// ---------------------------------------------------------------------------
// CSV

void write_csv(std::ostream& out, const std::vector<BitrateReport>& rows) {
  out << kCsvHeader << '\n';
  for (const auto& r : rows)
    out << fmt::format("{},{},{:.6f},{:.6f},{:.6f},{:.6f},{:.6f},{},{}\n", r.coder, r.particles, r.net_bps,
                       r.total_bps, r.total_first, r.ideal_bps, r.entropy, r.seed, r.pad_words);
}

namespace {

template <typename T>
T parse_field(std::string_view s, const char* what, std::size_t line) {
  T v{};
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || ptr != s.data() + s.size() || s.empty())
    throw ParseError(fmt::format("bad {} field '{}'", what, s), line);
  return v;
}

}  // namespace

std::vector<BitrateReport> read_csv(std::istream& in) {
  std::vector<BitrateReport> rows;
  std::string text;
  std::size_t line = 0;
  bool header = false;
  while (std::getline(in, text)) {
    ++line;
    if (!text.empty() && text.back() == '\r') text.pop_back();
    if (!header) {
      if (text != kCsvHeader) throw ParseError("expected header '" + std::string(kCsvHeader) + "'", line);
      header = true;
      continue;
    }
    if (text.empty()) continue;
    std::vector<std::string_view> f;
    std::string_view rest = text;
    for (;;) {
      const auto comma = rest.find(',');
      f.push_back(rest.substr(0, comma));
      if (comma == std::string_view::npos) break;
      rest.remove_prefix(comma + 1);
    }
    if (f.size() != 9) throw ParseError(fmt::format("expected 9 fields, found {}", f.size()), line);
    if (f[0].empty()) throw ParseError("empty coder field", line);
    BitrateReport r;
    r.coder = std::string(f[0]);
    r.particles = parse_field<std::size_t>(f[1], "N", line);
    r.net_bps = parse_field<double>(f[2], "net_bps", line);
    r.total_bps = parse_field<double>(f[3], "total_bps", line);
    r.total_first = parse_field<double>(f[4], "total_first", line);
    r.ideal_bps = parse_field<double>(f[5], "ideal_bps", line);
    r.entropy = parse_field<double>(f[6], "entropy", line);
    r.seed = parse_field<std::uint64_t>(f[7], "seed", line);
    r.pad_words = parse_field<std::size_t>(f[8], "pad_words", line);
    if (r.particles == 0) throw ParseError("N must be positive", line);
    rows.push_back(std::move(r));
  }
  if (!header) throw ParseError("missing header", line + 1);
  return rows;
}

}  // namespace mcbits
