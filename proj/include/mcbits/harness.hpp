#pragma once

#include <cstdint>
#include <iosfwd>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "mcbits/coder_ais.hpp"
#include "mcbits/coder_bb.hpp"
#include "mcbits/coder_is.hpp"
#include "mcbits/coder_smc.hpp"
#include "mcbits/io.hpp"

namespace mcbits {

enum class CoderId { elbo, is, cis, cis_perm, cis_exhaustive, ais, ais_bitswap, smc, csmc };

CoderId coder_from_string(const std::string& name);
const char* to_string(CoderId id);
std::vector<CoderId> all_coders();
bool runs_on_mixture(CoderId id);
bool runs_on_hmm(CoderId id);

struct CoderSpec {
  CoderId coder = CoderId::elbo;
  std::size_t particles = 1;
  int index_precision = 24;
  int kernel_precision = kModelPrecision;
  CouplingMode coupling = CouplingMode::iid_shifts;  // mode used by plain bb-cis
  std::uint64_t coupling_seed = 0;
};

// A model, the uniform approximate posterior at the model's precision and one
// configured coder. Pinned in memory: the tasks point into the owned model.
class CoderSession {
 public:
  CoderSession(AnyModel model, const CoderSpec& spec);
  CoderSession(const CoderSession&) = delete;
  CoderSession& operator=(const CoderSession&) = delete;

  const CoderSpec& spec() const noexcept { return spec_; }
  const AnyModel& model() const noexcept { return *model_; }
  bool is_hmm() const noexcept { return hmm_.has_value(); }
  std::size_t symbols_per_item() const;
  // Coupling actually used, for the run manifest.
  std::optional<CouplingMode> coupling_mode() const;

  void encode(AnsMessage& m, const std::vector<Symbol>& item) const;
  std::vector<Symbol> decode(AnsMessage& m) const;
  // One pseudorandom draw of the coder's variational bound, bits per item.
  double ideal_bits(const std::vector<Symbol>& item, Rng& rng) const;
  // Mean -log2 p(x) per observed symbol.
  double entropy(const Dataset& data) const;

 private:
  CoderSpec spec_;
  std::unique_ptr<AnyModel> model_;
  TabularPosterior posterior_;
  std::optional<MixtureTask> mixture_;
  std::optional<HmmTask> hmm_;
  std::optional<ShiftCoupling> cis_;
  std::optional<SmcCoupling> csmc_;
};

// A dataset encoded on top of AnsMessage::random(seed, pad_words), with the pad
// trimmed to the minimum the encode actually touched.
struct CompressedData {
  AnsMessage message;
  std::uint64_t seed = 0;
  std::size_t pad_words = 0;
  std::size_t items = 0;
};

CompressedData compress_dataset(const CoderSession& session, const Dataset& data, std::uint64_t seed);
// Decodes `items` items; throws RoundTripError unless exactly the initial
// message is left over.
Dataset decompress_dataset(const CoderSession& session, const CompressedData& packed);

enum class Experiment { mixture_convergence, cleanliness, initial_bits, hmm_convergence, roundtrip_suite };

Experiment experiment_from_string(const std::string& name);
const char* to_string(Experiment e);

struct RunConfig {
  Experiment experiment = Experiment::mixture_convergence;
  std::uint64_t seed = 0;
  std::size_t n = 5000;
  std::vector<CoderId> coders;
  std::vector<std::size_t> n_sweep;
  int precision = kModelPrecision;
  CouplingMode coupling = CouplingMode::iid_shifts;
  std::size_t redraws = 100;
  int index_precision = 24;
  int kernel_precision = kModelPrecision;
  std::size_t max_ais_levels = 512;
  unsigned workers = 0;  // 0: hardware concurrency
  bool verbose = false;
};

// Paper-scale defaults for each experiment id.
RunConfig default_config(Experiment e);

struct BitrateReport {
  std::string coder;
  std::size_t particles = 0;
  double net_bps = 0.0;
  double total_bps = 0.0;
  double total_first = 0.0;
  double ideal_bps = 0.0;
  double entropy = 0.0;
  std::uint64_t seed = 0;
  std::size_t pad_words = 0;
};

// The model a (config, coder) cell runs on: the HMM for SMC coders and the HMM
// experiment, the 16x16 r=8 micro-mixture for exhaustive CIS, else the
// mixture.
AnyModel cell_model(const RunConfig& config, CoderId coder);

// Encodes the dataset with the smallest initial pad that avoids underflow,
// verifies the decode restores every item and the initial message, and
// reports bitrates per observed symbol. Throws RoundTripError on mismatch.
BitrateReport run_cell(const RunConfig& config, CoderId coder, std::size_t particles);

// One row per (coder, N) in coder-major order.
std::vector<BitrateReport> run_experiment(const RunConfig& config);

inline constexpr const char* kCsvHeader = "coder,N,net_bps,total_bps,total_first,ideal_bps,entropy,seed,pad_words";

void write_csv(std::ostream& out, const std::vector<BitrateReport>& rows);
// Throws ParseError carrying the 1-based line number of the first bad line.
std::vector<BitrateReport> read_csv(std::istream& in);

struct PlotSpec {
  std::string column = "net_bps";
  std::string title;
  int width = 720;
  int height = 440;
};

// x = N on a log2 axis, y = the chosen column, one series per coder in order
// of first appearance, dashed entropy reference line(s).
std::string render_svg(const std::vector<BitrateReport>& rows, const PlotSpec& spec);

}  // namespace mcbits
