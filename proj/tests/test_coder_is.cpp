#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <set>

#include "mcbits/coder_bb.hpp"
#include "mcbits/coder_is.hpp"
#include "support.hpp"

using namespace mcbits;
using test::moments;
using test::roundtrip;

namespace {

struct MicroMixture {
  MixtureModel model;
  TabularPosterior q;
  MixtureTask task;

  explicit MicroMixture(std::uint64_t seed, int q_precision = 8)
      : model(gen_mixture(seed, MixtureShape{16, 16, kModelPrecision})),
        q(TabularPosterior::uniform(16, 16, q_precision)),
        task(model, q) {}
};

struct Mixture {
  MixtureModel model = gen_mixture(21);
  TabularPosterior q = TabularPosterior::uniform(64, 256);
  MixtureTask task{model, q};
  std::vector<Symbol> data = test::flatten(sample_dataset(model, 300, 21));
};

struct Chain {
  Hmm model = gen_hmm(22);
  TabularPosterior q = TabularPosterior::uniform(16, 32);
  HmmTask task{model, q};
  Dataset data = sample_dataset(model, 30, 22);
};

}  // namespace

TEST_CASE("ELBO and IS round trips on the mixture") {
  const Mixture mx;
  for (std::size_t n : {1u, 2u, 7u, 64u}) {
    CAPTURE(n);
    const CoderContext<MixtureTask> ctx{&mx.task, n};
    roundtrip(
        mx.data, [&](AnsMessage& m, Symbol x) { bb_is_encode(m, x, ctx); },
        [&](AnsMessage& m) { return bb_is_decode(m, ctx); });
  }
  const CoderContext<MixtureTask> ctx{&mx.task};
  roundtrip(
      mx.data, [&](AnsMessage& m, Symbol x) { bb_elbo_encode(m, x, ctx); },
      [&](AnsMessage& m) { return bb_elbo_decode(m, ctx); });
}

TEST_CASE("ELBO and IS round trips on the HMM") {
  const Chain ch;
  for (std::size_t n : {1u, 5u, 16u}) {
    CAPTURE(n);
    const CoderContext<HmmTask> ctx{&ch.task, n};
    roundtrip(
        ch.data, [&](AnsMessage& m, const std::vector<Symbol>& x) { bb_is_encode(m, x, ctx); },
        [&](AnsMessage& m) { return bb_is_decode(m, ctx); });
  }
  const CoderContext<HmmTask> ctx{&ch.task};
  roundtrip(
      ch.data, [&](AnsMessage& m, const std::vector<Symbol>& x) { bb_elbo_encode(m, x, ctx); },
      [&](AnsMessage& m) { return bb_elbo_decode(m, ctx); });
}

TEST_CASE("IS with one particle produces the ELBO message") {
  const Mixture mx;
  const CoderContext<MixtureTask> ctx{&mx.task, 1};
  AnsMessage a = AnsMessage::random(3, 512), b = a;
  for (Symbol x : mx.data) {
    bb_is_encode(a, x, ctx);
    bb_elbo_encode(b, x, ctx);
  }
  CHECK(a == b);

  const Chain ch;
  const CoderContext<HmmTask> hctx{&ch.task, 1};
  AnsMessage c = AnsMessage::random(4, 512), d = c;
  for (const auto& x : ch.data) {
    bb_is_encode(c, x, hctx);
    bb_elbo_encode(d, x, hctx);
  }
  CHECK(c == d);
}

TEST_CASE("stratified particles give the exact marginal") {
  const Mixture mx;
  const CoderContext<MixtureTask> ctx{&mx.task, 256};
  std::vector<Symbol> all(256);
  for (Symbol z = 0; z < 256; ++z) all[z] = z;
  for (Symbol x : {0u, 17u, 63u})
    CHECK(iwae_bound_from_particles(ctx, x, all) == doctest::Approx(-exact_log2_marginal(mx.model, x)).epsilon(1e-12));
}

TEST_CASE("the IWAE bound tightens with more particles") {
  const Mixture mx;
  Rng rng = make_rng(23);
  std::vector<test::Moments> by_n;
  for (std::size_t n : {1u, 4u, 16u, 64u}) {
    const CoderContext<MixtureTask> ctx{&mx.task, n};
    std::vector<double> v;
    for (int rep = 0; rep < 4; ++rep)
      for (Symbol x : mx.data) v.push_back(iwae_bound(ctx, x, rng));
    by_n.push_back(moments(v));
  }
  double log_p = 0.0;
  for (Symbol x : mx.data) log_p -= exact_log2_marginal(mx.model, x);
  log_p /= static_cast<double>(mx.data.size());
  for (std::size_t i = 0; i + 1 < by_n.size(); ++i)
    CHECK(by_n[i + 1].mean <= by_n[i].mean + 3 * std::hypot(by_n[i].se, by_n[i + 1].se));
  CHECK(by_n.back().mean >= log_p - 3 * by_n.back().se);
}

TEST_CASE("IS extended-space identity") {
  const Mixture mx;
  Rng rng = make_rng(24);
  for (std::size_t n : {1u, 4u, 33u}) {
    const CoderContext<MixtureTask> ctx{&mx.task, n};
    for (int rep = 0; rep < 50; ++rep) {
      const Symbol x = mx.data[rep];
      std::vector<Symbol> zs(n);
      for (auto& z : zs) z = mx.task.sample_q(rng, x);
      const std::size_t j = uniform_below(rng, n);
      const auto [log_ratio, estimator] = extended_space_identity_is(ctx, x, zs, j);
      CHECK(log_ratio == doctest::Approx(estimator).epsilon(1e-9));
      // The estimator is symmetric in the particles.
      std::reverse(zs.begin(), zs.end());
      CHECK(extended_space_identity_is(ctx, x, zs, n - 1 - j).second == doctest::Approx(estimator).epsilon(1e-12));
    }
  }
}

TEST_CASE("shift coupling") {
  const ShiftCoupling iid(CouplingMode::iid_shifts, 5, 40, 8);
  CHECK(iid.shifts()[0] == 0);
  CHECK(iid.size() == 40);
  for (std::size_t i = 0; i < 40; ++i)
    for (std::uint32_t u : {0u, 1u, 200u, 255u}) CHECK(iid.inverse(i, iid.forward(i, u)) == u);
  CHECK(iid.shifts() == ShiftCoupling(CouplingMode::iid_shifts, 5, 40, 8).shifts());

  const ShiftCoupling perm(CouplingMode::permutation_shifts, 5, 256, 8);
  const std::set<std::uint32_t> distinct(perm.shifts().begin(), perm.shifts().end());
  CHECK(distinct.size() == 256);

  const ShiftCoupling wide(CouplingMode::permutation_shifts, 6, 1000, 30);
  const std::set<std::uint32_t> wide_distinct(wide.shifts().begin(), wide.shifts().end());
  CHECK(wide_distinct.size() == 1000);

  const ShiftCoupling ex(CouplingMode::exhaustive, 0, 16, 4);
  for (std::uint32_t i = 0; i < 16; ++i) CHECK(ex.shifts()[i] == i);

  CHECK_THROWS_AS(ShiftCoupling(CouplingMode::iid_shifts, 0, 17, 4), ContractError);
  CHECK_THROWS_AS(ShiftCoupling(CouplingMode::iid_shifts, 0, 0, 4), ContractError);
  CHECK_THROWS_AS(ShiftCoupling(CouplingMode::iid_shifts, 0, 1, 0), ContractError);
  CHECK_THROWS_AS(ShiftCoupling(CouplingMode::exhaustive, 0, 8, 4), ContractError);
  CHECK(coupling_mode_from_string(to_string(CouplingMode::permutation_shifts)) == CouplingMode::permutation_shifts);
  CHECK_THROWS(coupling_mode_from_string("bogus"));
}

TEST_CASE("CIS round trips in every coupling mode") {
  const MicroMixture mm(25);
  const auto data = test::flatten(sample_dataset(mm.model, 200, 25));
  for (CouplingMode mode : {CouplingMode::iid_shifts, CouplingMode::permutation_shifts, CouplingMode::exhaustive}) {
    for (std::size_t n : {1u, 8u, 256u}) {
      if (mode == CouplingMode::exhaustive && n != 256) continue;
      CAPTURE(n);
      const ShiftCoupling coupling(mode, 7, n, 8);
      const CoderContext<MixtureTask> ctx{&mm.task, n};
      roundtrip(
          data, [&](AnsMessage& m, Symbol x) { bb_cis_encode(m, x, ctx, coupling); },
          [&](AnsMessage& m) { return bb_cis_decode(m, ctx, coupling); });
    }
  }
  const ShiftCoupling wrong(CouplingMode::iid_shifts, 7, 4, 8);
  const CoderContext<MixtureTask> ctx{&mm.task, 8};
  AnsMessage m = AnsMessage::random(1, 64);
  CHECK_THROWS_AS(bb_cis_encode(m, 0, ctx, wrong), ContractError);
}

TEST_CASE("exhaustive coupling recovers the exact marginal for every base point") {
  const MicroMixture mm(26);
  const ShiftCoupling coupling(CouplingMode::exhaustive, 0, 256, 8);
  const CoderContext<MixtureTask> ctx{&mm.task, 256};
  for (Symbol x = 0; x < 16; ++x) {
    const double expect = -exact_log2_marginal(mm.model, x);
    double worst = 0.0;
    for (std::uint32_t u1 = 0; u1 < 256; ++u1) worst = std::max(worst, std::abs(cis_estimator(ctx, x, coupling, u1) - expect));
    CHECK(worst < 1e-12);
  }
}

TEST_CASE("the CIS estimator is unbiased over the base point") {
  const MicroMixture mm(27);
  for (CouplingMode mode : {CouplingMode::iid_shifts, CouplingMode::permutation_shifts}) {
    const ShiftCoupling coupling(mode, 9, 5, 8);
    const CoderContext<MixtureTask> ctx{&mm.task, 5};
    for (Symbol x = 0; x < 16; ++x) {
      double mean_estimate = 0.0, mean_bound = 0.0;
      for (std::uint32_t u1 = 0; u1 < 256; ++u1) {
        const double b = cis_estimator(ctx, x, coupling, u1);
        mean_bound += b / 256.0;
        mean_estimate += std::exp2(-b) / 256.0;
      }
      const double log_p = exact_log2_marginal(mm.model, x);
      CHECK(mean_estimate == doctest::Approx(std::exp2(log_p)).epsilon(1e-12));
      CHECK(mean_bound >= -log_p - 1e-12);
    }
  }
}

TEST_CASE("CIS extended-space identity") {
  const MicroMixture mm(28);
  Rng rng = make_rng(28);
  for (std::size_t n : {1u, 6u, 64u}) {
    const ShiftCoupling coupling(CouplingMode::permutation_shifts, 3, n, 8);
    const CoderContext<MixtureTask> ctx{&mm.task, n};
    for (int rep = 0; rep < 40; ++rep) {
      const auto x = static_cast<Symbol>(uniform_below(rng, 16));
      const auto u1 = static_cast<std::uint32_t>(uniform_below(rng, 256));
      const std::size_t j = uniform_below(rng, n);
      const auto [log_ratio, estimator] = extended_space_identity_cis(ctx, x, coupling, u1, j);
      CHECK(log_ratio == doctest::Approx(estimator).epsilon(1e-9));
      CHECK(estimator == doctest::Approx(-cis_estimator(ctx, x, coupling, u1)).epsilon(1e-12));
    }
  }
}

TEST_CASE("CIS with i.i.d. shifts codes at the IS rate") {
  const MixtureModel model = gen_mixture(29);
  const auto q = TabularPosterior::uniform(64, 256);
  const MixtureTask task(model, q);
  const auto data = test::flatten(sample_dataset(model, 5000, 29));
  const CoderContext<MixtureTask> ctx{&task, 64};
  const double is_net = roundtrip(
      data, [&](AnsMessage& m, Symbol x) { bb_is_encode(m, x, ctx); },
      [&](AnsMessage& m) { return bb_is_decode(m, ctx); }, 2, 1 << 14);
  const ShiftCoupling coupling(CouplingMode::iid_shifts, 11, 64, 16);
  const double cis_net = roundtrip(
      data, [&](AnsMessage& m, Symbol x) { bb_cis_encode(m, x, ctx, coupling); },
      [&](AnsMessage& m) { return bb_cis_decode(m, ctx, coupling); }, 2, 1 << 14);
  CHECK(std::abs(cis_net - is_net) <= 0.01 * is_net);
}
