// mcbits: generate toy models, compress/decompress datasets with a bits-back
// coder, run the benchmark sweeps and plot their CSV output.

#include <fmt/core.h>

#include <CLI11.hpp>
#include <fstream>
#include <iostream>
#include <json.hpp>
#include <sstream>

#include "mcbits/harness.hpp"

using namespace mcbits;
using nlohmann::json;

namespace {

template <typename T>
std::vector<T> split_list(const std::string& text, T (*parse)(const std::string&)) {
  std::vector<T> out;
  std::stringstream in(text);
  for (std::string item; std::getline(in, item, ',');)
    if (!item.empty()) out.push_back(parse(item));
  return out;
}

std::size_t parse_count(const std::string& s) {
  std::size_t used = 0;
  const unsigned long long v = std::stoull(s, &used);
  if (used != s.size()) throw std::invalid_argument("bad count '" + s + "'");
  return static_cast<std::size_t>(v);
}

CoderId parse_coder(const std::string& s) { return coder_from_string(s); }

std::string manifest_path(const std::string& message_path) { return message_path + ".json"; }

struct GenModelArgs {
  std::string kind = "mixture";
  std::uint64_t seed = 0;
  int precision = kModelPrecision;
  std::string out = "model.bin";
  std::size_t samples = 0;
  std::string data_out = "data.bin";
};

int gen_model(const GenModelArgs& a) {
  AnyModel model;
  if (a.kind == "mixture") {
    MixtureShape shape;
    shape.precision = a.precision;
    model = gen_mixture(a.seed, shape);
  } else if (a.kind == "hmm") {
    HmmShape shape;
    shape.precision = a.precision;
    model = gen_hmm(a.seed, shape);
  } else {
    throw std::invalid_argument("--kind must be mixture or hmm");
  }
  write_file(a.out, std::visit([](const auto& m) { return serialize_model(m); }, model));
  if (a.samples > 0) {
    const Dataset data = std::visit([&](const auto& m) { return sample_dataset(m, a.samples, a.seed); }, model);
    write_file(a.data_out, serialize_dataset(data));
  }
  return 0;
}

struct CodecArgs {
  std::string model = "model.bin";
  std::string data = "data.bin";
  std::string message = "message.bin";
  std::string coder = "bb-is";
  std::size_t particles = 1;
  std::uint64_t seed = 0;
  std::string coupling = "iid";
  int index_precision = 24;
  int kernel_precision = kModelPrecision;
};

int compress(const CodecArgs& a) {
  CoderSpec spec;
  spec.coder = coder_from_string(a.coder);
  spec.particles = a.particles;
  spec.index_precision = a.index_precision;
  spec.kernel_precision = a.kernel_precision;
  spec.coupling = coupling_mode_from_string(a.coupling);
  spec.coupling_seed = a.seed;
  const CoderSession session(deserialize_model(read_file(a.model)), spec);
  const Dataset data = deserialize_dataset(read_file(a.data));
  const CompressedData packed = compress_dataset(session, data, a.seed);

  // Check before anything is written.
  if (decompress_dataset(session, packed) != data) throw RoundTripError("decoded dataset differs from input");
  write_file(a.message, packed.message.serialize());

  const int r = std::visit([](const auto& m) {
    if constexpr (std::is_same_v<std::decay_t<decltype(m)>, Hmm>) return m.initial.precision();
    else return m.prior.precision();
  }, session.model());
  json manifest = {
      {"coder", a.coder},
      {"N", a.particles},
      {"r", r},
      {"index_precision", a.index_precision},
      {"kernel_precision", a.kernel_precision},
      {"seed", packed.seed},
      {"pad_words", packed.pad_words},
      {"n", packed.items},
      {"resampling", session.is_hmm() ? "every_step" : "none"},
  };
  if (auto mode = session.coupling_mode())
    manifest["coupling"] = {{"mode", to_string(*mode)}, {"seed", a.seed}, {"N", a.particles}, {"r", r}};
  if (spec.coder == CoderId::ais || spec.coder == CoderId::ais_bitswap)
    manifest["path"] = {{"N", a.particles}, {"schedule", "linear"}};
  std::ofstream(manifest_path(a.message)) << manifest.dump(2) << '\n';

  const double symbols = static_cast<double>(data.size() * session.symbols_per_item());
  fmt::print("{} items, {} bits ({:.4f} bits/symbol incl. {} pad words)\n", data.size(),
             packed.message.bit_length(), static_cast<double>(packed.message.bit_length()) / symbols,
             packed.pad_words);
  return 0;
}

int decompress(const CodecArgs& a) {
  std::ifstream in(manifest_path(a.message));
  if (!in) throw std::runtime_error("missing run manifest " + manifest_path(a.message));
  const json manifest = json::parse(in);
  CoderSpec spec;
  spec.coder = coder_from_string(manifest.at("coder").get<std::string>());
  spec.particles = manifest.at("N").get<std::size_t>();
  spec.index_precision = manifest.at("index_precision").get<int>();
  spec.kernel_precision = manifest.at("kernel_precision").get<int>();
  spec.coupling_seed = manifest.at("seed").get<std::uint64_t>();
  if (manifest.contains("coupling")) {
    spec.coupling = coupling_mode_from_string(manifest["coupling"].at("mode").get<std::string>());
    spec.coupling_seed = manifest["coupling"].at("seed").get<std::uint64_t>();
  }
  const CoderSession session(deserialize_model(read_file(a.model)), spec);
  CompressedData packed;
  packed.message = AnsMessage::deserialize(read_file(a.message));
  packed.seed = manifest.at("seed").get<std::uint64_t>();
  packed.pad_words = manifest.at("pad_words").get<std::size_t>();
  packed.items = manifest.at("n").get<std::size_t>();
  write_file(a.data, serialize_dataset(decompress_dataset(session, packed)));
  return 0;
}

struct BenchArgs {
  std::string experiment = "mixture_convergence";
  std::uint64_t seed = 0;
  std::optional<std::string> coders;
  std::optional<std::string> sweep;
  int precision = kModelPrecision;
  std::string coupling = "iid";
  std::optional<std::size_t> redraws;
  std::optional<std::size_t> n;
  unsigned workers = 0;
  std::string out = "results.csv";
  std::string plot;
  bool quiet = false;
};

int bench(const BenchArgs& a) {
  RunConfig config = default_config(experiment_from_string(a.experiment));
  config.seed = a.seed;
  config.precision = a.precision;
  config.coupling = coupling_mode_from_string(a.coupling);
  config.workers = a.workers;
  config.verbose = !a.quiet;
  if (a.coders) config.coders = split_list(*a.coders, parse_coder);
  if (a.sweep) config.n_sweep = split_list(*a.sweep, parse_count);
  if (a.redraws) config.redraws = *a.redraws;
  if (a.n) config.n = *a.n;
  const auto rows = run_experiment(config);
  std::ofstream out(a.out);
  write_csv(out, rows);
  if (!a.plot.empty()) {
    PlotSpec spec;
    spec.title = a.experiment;
    std::ofstream(a.plot) << render_svg(rows, spec);
  }
  return 0;
}

struct PlotArgs {
  std::string csv = "results.csv";
  std::string out = "plot.svg";
  PlotSpec spec;
};

int plot(const PlotArgs& a) {
  std::ifstream in(a.csv);
  if (!in) throw std::runtime_error("cannot open " + a.csv);
  const auto rows = read_csv(in);
  std::ofstream(a.out) << render_svg(rows, a.spec);
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"McBits bits-back coders over exact rANS"};
  app.require_subcommand(1);

  GenModelArgs gm;
  auto* gen = app.add_subcommand("gen-model", "generate a seeded toy model (and optionally a dataset)");
  gen->add_option("--kind", gm.kind, "mixture or hmm")->capture_default_str();
  gen->add_option("--seed", gm.seed)->capture_default_str();
  gen->add_option("--precision", gm.precision, "PMF precision r")->capture_default_str();
  gen->add_option("--out", gm.out)->capture_default_str();
  gen->add_option("--samples", gm.samples, "also sample this many items")->capture_default_str();
  gen->add_option("--data-out", gm.data_out)->capture_default_str();

  CodecArgs ca;
  auto add_codec = [&](CLI::App* sub) {
    sub->add_option("--model", ca.model)->capture_default_str();
    sub->add_option("--data", ca.data)->capture_default_str();
    sub->add_option("--message", ca.message, "compressed message; the manifest sits next to it as .json")
        ->capture_default_str();
  };
  auto* comp = app.add_subcommand("compress", "encode a dataset");
  add_codec(comp);
  comp->add_option("--coder", ca.coder)->capture_default_str();
  comp->add_option("-N,--particles", ca.particles, "particles (annealing levels for AIS)")->capture_default_str();
  comp->add_option("--seed", ca.seed, "initial-message and coupling seed")->capture_default_str();
  comp->add_option("--coupling", ca.coupling, "iid, permutation or exhaustive (bb-cis)")->capture_default_str();
  comp->add_option("--index-precision", ca.index_precision)->capture_default_str();
  comp->add_option("--kernel-precision", ca.kernel_precision)->capture_default_str();
  auto* decomp = app.add_subcommand("decompress", "decode a message back to a dataset");
  add_codec(decomp);

  BenchArgs ba;
  auto* ben = app.add_subcommand("bench", "run an experiment sweep and write CSV");
  ben->add_option("--experiment", ba.experiment,
                  "mixture_convergence, cleanliness, initial_bits, hmm_convergence or roundtrip_suite")
      ->capture_default_str();
  ben->add_option("--seed", ba.seed)->capture_default_str();
  ben->add_option("--coders", ba.coders, "comma-separated coder ids (empty for none)");
  ben->add_option("--n-sweep", ba.sweep, "comma-separated particle counts");
  ben->add_option("--precision", ba.precision)->capture_default_str();
  ben->add_option("--coupling", ba.coupling)->capture_default_str();
  ben->add_option("--redraws", ba.redraws, "pseudorandom redraws for the ideal bitrate");
  ben->add_option("-n,--items", ba.n, "dataset size");
  ben->add_option("--workers", ba.workers, "worker threads (0: all cores)")->capture_default_str();
  ben->add_option("--out", ba.out)->capture_default_str();
  ben->add_option("--plot", ba.plot, "also render an SVG of net_bps");
  ben->add_flag("-q,--quiet", ba.quiet);

  PlotArgs pa;
  auto* plt = app.add_subcommand("plot", "render a results CSV as SVG");
  plt->add_option("--csv", pa.csv)->capture_default_str();
  plt->add_option("--out", pa.out)->capture_default_str();
  plt->add_option("--column", pa.spec.column, "net_bps, total_bps, total_first, ideal_bps, entropy or pad_words")
      ->capture_default_str();
  plt->add_option("--title", pa.spec.title);

  CLI11_PARSE(app, argc, argv);
  try {
    if (*gen) return gen_model(gm);
    if (*comp) return compress(ca);
    if (*decomp) return decompress(ca);
    if (*ben) return bench(ba);
    if (*plt) return plot(pa);
  } catch (const RoundTripError& e) {
    fmt::print(stderr, "round trip failed: {}\n", e.what());
    return 2;
  } catch (const std::exception& e) {
    fmt::print(stderr, "error: {}\n", e.what());
    return 1;
  }
  return 0;
}
