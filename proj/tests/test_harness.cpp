#include <doctest.h>

#include <cmath>
#include <sstream>

#include "mcbits/harness.hpp"
#include "mcbits/io.hpp"

using namespace mcbits;

namespace {

RunConfig small_config(Experiment e, std::vector<CoderId> coders, std::vector<std::size_t> sweep, std::size_t n) {
  RunConfig c = default_config(e);
  c.coders = std::move(coders);
  c.n_sweep = std::move(sweep);
  c.n = n;
  c.redraws = 2;
  c.seed = 5;
  c.workers = 1;
  return c;
}

std::string to_csv(const std::vector<BitrateReport>& rows) {
  std::ostringstream out;
  write_csv(out, rows);
  return out.str();
}

std::size_t count(const std::string& s, const std::string& needle) {
  std::size_t k = 0;
  for (auto p = s.find(needle); p != std::string::npos; p = s.find(needle, p + 1)) ++k;
  return k;
}

}  // namespace

TEST_CASE("names round-trip") {
  for (CoderId c : all_coders()) CHECK(coder_from_string(to_string(c)) == c);
  for (Experiment e : {Experiment::mixture_convergence, Experiment::cleanliness, Experiment::initial_bits,
                       Experiment::hmm_convergence, Experiment::roundtrip_suite})
    CHECK(experiment_from_string(to_string(e)) == e);
  CHECK_THROWS(coder_from_string("bb-nope"));
  CHECK_THROWS(experiment_from_string("nope"));
}

TEST_CASE("an empty coder list gives a header-only CSV") {
  const auto rows = run_experiment(small_config(Experiment::mixture_convergence, {}, {1, 2}, 10));
  CHECK(rows.empty());
  CHECK(to_csv(rows) == std::string(kCsvHeader) + "\n");
}

TEST_CASE("experiments are reproducible and rows follow coder-major order") {
  auto config = small_config(Experiment::mixture_convergence, {CoderId::is, CoderId::cis, CoderId::elbo}, {1, 4}, 40);
  const auto a = run_experiment(config);
  config.workers = 3;
  const auto b = run_experiment(config);
  CHECK(to_csv(a) == to_csv(b));
  REQUIRE(a.size() == 5);
  CHECK(a[0].coder == "bb-is");
  CHECK(a[1].particles == 4);
  CHECK(a[2].coder == "bb-cis");
  CHECK(a[4].coder == "bb-elbo");
  CHECK(a[4].particles == 1);
}

TEST_CASE("bitrate accounting") {
  const auto config = small_config(Experiment::roundtrip_suite,
                                   {CoderId::is, CoderId::ais_bitswap, CoderId::smc, CoderId::csmc}, {1, 8}, 30);
  for (const auto& r : run_experiment(config)) {
    CAPTURE(r.coder);
    CAPTURE(r.particles);
    const double symbols = 30.0 * (r.coder == "bb-smc" || r.coder == "bb-csmc" ? 10 : 1);
    const double gap = (r.total_bps - r.net_bps) * symbols;
    CHECK(gap >= 32.0 * static_cast<double>(r.pad_words) + 32.0 - 1e-6);
    CHECK(gap <= 32.0 * static_cast<double>(r.pad_words) + 63.0 + 1e-6);
    CHECK(r.total_bps >= r.net_bps);
    CHECK(r.total_first > 0);
  }
}

TEST_CASE("ELBO net rate matches the exact negative ELBO") {
  const auto rows = run_experiment(small_config(Experiment::cleanliness, {CoderId::elbo}, {1}, 3000));
  REQUIRE(rows.size() == 1);
  CHECK(std::abs(rows[0].net_bps - rows[0].ideal_bps) <= 0.01 * rows[0].ideal_bps);
}

TEST_CASE("IS initial bits grow linearly in N") {
  const auto rows = run_experiment(small_config(Experiment::initial_bits, {CoderId::is}, {64, 128}, 10));
  REQUIRE(rows.size() == 2);
  const double ratio = rows[1].total_first / rows[0].total_first;
  CHECK(ratio == doctest::Approx(2.0).epsilon(0.15));
}

TEST_CASE("CSV round trip and error lines") {
  BitrateReport r;
  r.coder = "bb-ais";
  r.particles = 32;
  r.net_bps = 6.25;
  r.total_bps = 7.5;
  r.total_first = 123.0;
  r.ideal_bps = 6.125;
  r.entropy = 5.999;
  r.seed = 17;
  r.pad_words = 3;
  std::istringstream in(to_csv({r, r}));
  const auto back = read_csv(in);
  REQUIRE(back.size() == 2);
  CHECK(back[1].coder == "bb-ais");
  CHECK(back[1].particles == 32);
  CHECK(back[1].net_bps == 6.25);
  CHECK(back[1].entropy == 5.999);
  CHECK(back[1].seed == 17);
  CHECK(back[1].pad_words == 3);

  std::istringstream bad(std::string(kCsvHeader) + "\n" + "bb-is,1,1,1,1,1,1,0,0\n" + "bb-is,1,1,x,1,1,1,0,0\n");
  try {
    read_csv(bad);
    FAIL("expected a parse error");
  } catch (const ParseError& e) {
    CHECK(e.line() == 3);
  }
  std::istringstream short_row(std::string(kCsvHeader) + "\nbb-is,1,1\n");
  CHECK_THROWS_AS(read_csv(short_row), ParseError);
  std::istringstream no_header("bb-is,1,1,1,1,1,1,0,0\n");
  CHECK_THROWS_AS(read_csv(no_header), ParseError);
}

TEST_CASE("SVG rendering") {
  std::vector<BitrateReport> rows;
  for (const char* name : {"bb-cis", "bb-is"})
    for (std::size_t n : {1u, 2u, 4u}) {
      BitrateReport r;
      r.coder = name;
      r.particles = n;
      r.net_bps = 7.0 - 0.1 * static_cast<double>(n);
      r.entropy = 6.0;
      rows.push_back(r);
    }
  BitrateReport lone;
  lone.coder = "bb-<elbo>";
  lone.particles = 1;
  lone.net_bps = 7.0;
  lone.entropy = 6.0;
  rows.push_back(lone);

  const PlotSpec spec{"net_bps", "a & b", 640, 400};
  const std::string svg = render_svg(rows, spec);
  CHECK(svg == render_svg(rows, spec));
  CHECK(count(svg, "class=\"series\"") == 3);
  CHECK(svg.find("data-coder=\"bb-cis\"") < svg.find("data-coder=\"bb-is\""));
  CHECK(svg.find("bb-&lt;elbo&gt;") != std::string::npos);
  CHECK(svg.find("a &amp; b") != std::string::npos);
  CHECK(svg.find("stroke-dasharray") != std::string::npos);
  CHECK_THROWS_AS(render_svg(rows, PlotSpec{"bogus", "", 640, 400}), std::invalid_argument);
}

TEST_CASE("compress and decompress a dataset") {
  CoderSpec spec;
  spec.coder = CoderId::cis;
  spec.particles = 8;
  spec.coupling_seed = 3;
  const CoderSession session(AnyModel(gen_mixture(3)), spec);
  const Dataset data = sample_dataset(gen_mixture(3), 100, 3);
  const auto packed = compress_dataset(session, data, 9);
  CHECK(decompress_dataset(session, packed) == data);
  CHECK(packed.items == 100);

  auto corrupt = packed;
  corrupt.pad_words += 1;
  CHECK_THROWS(decompress_dataset(session, corrupt));
}

TEST_CASE("model and dataset serialization") {
  const auto mix = gen_mixture(12);
  const auto hmm = gen_hmm(12);
  CHECK(std::get<MixtureModel>(deserialize_model(serialize_model(mix))) == mix);
  CHECK(std::get<Hmm>(deserialize_model(serialize_model(hmm))) == hmm);
  const Dataset data = sample_dataset(hmm, 7, 1);
  CHECK(deserialize_dataset(serialize_dataset(data)) == data);

  auto bytes = serialize_model(mix);
  bytes.pop_back();
  CHECK_THROWS_AS(deserialize_model(bytes), ParseError);
  bytes = serialize_model(hmm);
  bytes.push_back(0);
  CHECK_THROWS_AS(deserialize_model(bytes), ParseError);
  auto dbytes = serialize_dataset(data);
  dbytes.resize(dbytes.size() - 4);
  CHECK_THROWS_AS(deserialize_dataset(dbytes), ParseError);
  CHECK_THROWS_AS(deserialize_model(Bytes{1, 2, 3}), ParseError);
}
