// SPDX-License-Identifier: Apache-2.0
#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <future>

#include "remerge/entropy.hpp"
#include "remerge/random.hpp"
#include "remerge/statefile.hpp"

using namespace remerge;

namespace {

// Test-side oracle: marginal spectrum by direct construction from the
// amplitudes, independent of partial_trace / EntropyContext.
double brute_entropy(const PureState& psi, const std::vector<std::string>& keep) {
  const auto& lay = psi.layout();
  std::vector<std::size_t> kp, rp;
  for (std::size_t i = 0; i < lay.size(); ++i) {
    const bool kept = std::find(keep.begin(), keep.end(), lay.reg(i).name) != keep.end();
    (kept ? kp : rp).push_back(i);
  }
  std::int64_t dk = 1, dr = 1;
  for (auto p : kp) dk *= lay.reg(p).dim;
  for (auto p : rp) dr *= lay.reg(p).dim;
  Eigen::MatrixXcd rho = Eigen::MatrixXcd::Zero(dk, dk);
  auto decode = [&](std::int64_t flat, const std::vector<std::size_t>& ps) {
    std::int64_t idx = 0;
    for (auto p : ps) idx = idx * lay.reg(p).dim + (flat / lay.stride(p)) % lay.reg(p).dim;
    return idx;
  };
  for (std::int64_t i = 0; i < psi.dim(); ++i)
    for (std::int64_t j = 0; j < psi.dim(); ++j) {
      if (decode(i, rp) != decode(j, rp)) continue;
      rho(decode(i, kp), decode(j, kp)) +=
          psi.amplitudes()[i] * std::conj(psi.amplitudes()[j]);
    }
  (void)dr;
  const Eigen::VectorXd ev = hermitian_eigenvalues(rho);
  double s = 0.0;
  for (auto l : ev)
    if (l > 1e-12) s -= l * std::log2(l);
  return s;
}

EntropyContext ctx_of(const PureState& psi) { return EntropyContext::from_named(psi); }

PureState pairs_state() {
  return load_state_file(std::string(REMERGE_TEST_DATA_DIR) + "/pairs.json").state;
}

PureState ghz_abr() { return ghz_state(3, 2); }

PureState phi_with_nulls(const std::string& a, const std::string& b) {
  PureState p = maximally_entangled(2, a, b);
  for (char role : {'A', 'B', 'C', 'R'}) {
    const std::string name(1, role);
    if (!p.layout().has(name))
      p = tensor(p, PureState::basis(SystemLayout({Register{name, 1}}),
                                     std::vector<std::int64_t>{0}));
  }
  return p;
}

PureState random_abcr(RandomStream& rng) {
  return random_pure_state(SystemLayout({{"A", 2}, {"B", 2}, {"C", 2}, {"R", 2}}), rng);
}

double entry_rate(const RateReport& rep, Resource res, Party from, Party to) {
  return rep.total(res, from, to);
}

}  // namespace

TEST_CASE("von Neumann entropy") {
  SUBCASE("maximally mixed qubit") {
    const DensityOperator rho(SystemLayout({{"A", 2}}),
                              Eigen::MatrixXcd::Identity(2, 2) / 2.0);
    CHECK(von_neumann_entropy(rho) == doctest::Approx(1.0).epsilon(1e-12));
  }
  SUBCASE("pure state") {
    const PureState psi = maximally_entangled(2, "A", "B");
    CHECK(von_neumann_entropy(psi.density()) == doctest::Approx(0.0).epsilon(1e-9));
  }
  SUBCASE("binary spectrum (2/3, 1/3)") {
    Eigen::MatrixXcd m = Eigen::MatrixXcd::Zero(2, 2);
    m(0, 0) = 2.0 / 3.0;
    m(1, 1) = 1.0 / 3.0;
    CHECK(von_neumann_entropy(DensityOperator(SystemLayout({{"A", 2}}), m)) ==
          doctest::Approx(0.9182958340544896).epsilon(1e-12));
  }
}

TEST_CASE("conditional entropy and mutual information") {
  SUBCASE("GHZ: S(A|B) = 0 and I(A:R) = 1, against the brute-force oracle") {
    const PureState g = ghz_abr();
    const EntropyContext ctx = ctx_of(g);
    CHECK(ctx.conditional_entropy(kMaskA, kMaskB) == doctest::Approx(0.0).epsilon(1e-9));
    CHECK(ctx.mutual_info(kMaskA, kMaskR) == doctest::Approx(1.0).epsilon(1e-9));
    const double s_ab = brute_entropy(g, {"A", "B"});
    const double s_b = brute_entropy(g, {"B"});
    CHECK(ctx.conditional_entropy(kMaskA, kMaskB) ==
          doctest::Approx(s_ab - s_b).epsilon(1e-9));
  }
  SUBCASE("maximally entangled AR with null B, C") {
    const EntropyContext ctx = ctx_of(phi_with_nulls("A", "R"));
    CHECK(ctx.mutual_info(kMaskA, kMaskR) == doctest::Approx(2.0).epsilon(1e-9));
    CHECK(ctx.cond_mutual_info(kMaskA, kMaskR, kMaskB) ==
          doctest::Approx(2.0).epsilon(1e-9));
  }
  SUBCASE("purity makes I(A:R|B) = I(A:R|C)") {
    RandomStream rng(4);
    for (int i = 0; i < 10; ++i) {
      const EntropyContext ctx = ctx_of(random_abcr(rng));
      CHECK(std::abs(ctx.cond_mutual_info(kMaskA, kMaskR, kMaskB) -
                     ctx.cond_mutual_info(kMaskA, kMaskR, kMaskC)) <= 1e-9);
    }
  }
  SUBCASE("overlapping subsets are rejected") {
    const EntropyContext ctx = ctx_of(ghz_abr());
    CHECK_THROWS_AS(ctx.mutual_info(kMaskA, kMaskA | kMaskB), std::invalid_argument);
  }
}

TEST_CASE("merging rates") {
  SUBCASE("GHZ: no ebits, one classical bit") {
    const RateReport rep = merging_rates(ctx_of(ghz_abr()));
    CHECK(entry_rate(rep, Resource::Ebit, Party::Alice, Party::Bob) ==
          doctest::Approx(0.0).epsilon(1e-9));
    CHECK(entry_rate(rep, Resource::Cbit, Party::Alice, Party::Bob) ==
          doctest::Approx(1.0).epsilon(1e-9));
  }
  SUBCASE("entangled with bob: one ebit produced, nothing to say") {
    const RateReport rep = merging_rates(ctx_of(phi_with_nulls("A", "B")));
    CHECK(entry_rate(rep, Resource::Ebit, Party::Alice, Party::Bob) ==
          doctest::Approx(-1.0).epsilon(1e-9));
    CHECK(entry_rate(rep, Resource::Cbit, Party::Alice, Party::Bob) ==
          doctest::Approx(0.0).epsilon(1e-9));
  }
  SUBCASE("entangled with the reference: one ebit, two cbits") {
    const RateReport rep = merging_rates(ctx_of(phi_with_nulls("A", "R")));
    CHECK(entry_rate(rep, Resource::Ebit, Party::Alice, Party::Bob) ==
          doctest::Approx(1.0).epsilon(1e-9));
    CHECK(entry_rate(rep, Resource::Cbit, Party::Alice, Party::Bob) ==
          doctest::Approx(2.0).epsilon(1e-9));
  }
  SUBCASE("nontrivial C is rejected") {
    CHECK_THROWS_AS(merging_rates(ctx_of(pairs_state())), std::invalid_argument);
  }
}

TEST_CASE("coherent merging rates") {
  auto q = [](const RateReport& r) {
    return entry_rate(r, Resource::QubitChannel, Party::Alice, Party::Bob);
  };
  auto e = [](const RateReport& r) {
    return entry_rate(r, Resource::Ebit, Party::Alice, Party::Bob);
  };
  CHECK(q(coherent_merging_rates(ctx_of(phi_with_nulls("A", "R")))) ==
        doctest::Approx(1.0).epsilon(1e-9));
  CHECK(e(coherent_merging_rates(ctx_of(phi_with_nulls("A", "R")))) ==
        doctest::Approx(0.0).epsilon(1e-9));
  CHECK(q(coherent_merging_rates(ctx_of(phi_with_nulls("A", "B")))) ==
        doctest::Approx(0.0).epsilon(1e-9));
  CHECK(e(coherent_merging_rates(ctx_of(phi_with_nulls("A", "B")))) ==
        doctest::Approx(-1.0).epsilon(1e-9));
  CHECK(q(coherent_merging_rates(ctx_of(ghz_abr()))) ==
        doctest::Approx(0.5).epsilon(1e-9));
  CHECK(e(coherent_merging_rates(ctx_of(ghz_abr()))) ==
        doctest::Approx(-0.5).epsilon(1e-9));
}

TEST_CASE("redistribution and splitting rates") {
  auto q = [](const RateReport& r) {
    return entry_rate(r, Resource::QubitChannel, Party::Alice, Party::Bob);
  };
  auto e = [](const RateReport& r) {
    return entry_rate(r, Resource::Ebit, Party::Alice, Party::Bob);
  };
  SUBCASE("pre-shared entanglement with charlie does all the work") {
    const RateReport rep = redistribution_rates(ctx_of(phi_with_nulls("A", "C")));
    CHECK(q(rep) == doctest::Approx(0.0).epsilon(1e-9));
    CHECK(e(rep) == doctest::Approx(1.0).epsilon(1e-9));
  }
  SUBCASE("reference-entangled payload costs one qubit") {
    const RateReport rep = redistribution_rates(ctx_of(phi_with_nulls("A", "R")));
    CHECK(q(rep) == doctest::Approx(1.0).epsilon(1e-9));
    CHECK(e(rep) == doctest::Approx(0.0).epsilon(1e-9));
  }
  SUBCASE("two-pair payload: one qubit plus one ebit") {
    const RateReport rep = redistribution_rates(ctx_of(pairs_state()));
    CHECK(q(rep) == doctest::Approx(1.0).epsilon(1e-9));
    CHECK(e(rep) == doctest::Approx(1.0).epsilon(1e-9));
  }
  SUBCASE("splitting matches redistribution when B is null") {
    const RateReport rep = splitting_rates(ctx_of(pairs_state()));
    CHECK(q(rep) == doctest::Approx(1.0).epsilon(1e-9));
    CHECK(e(rep) == doctest::Approx(1.0).epsilon(1e-9));
    const RateReport ac = splitting_rates(ctx_of(phi_with_nulls("A", "C")));
    CHECK(q(ac) == doctest::Approx(0.0).epsilon(1e-9));
    CHECK(e(ac) == doctest::Approx(1.0).epsilon(1e-9));
  }
  SUBCASE("product payload is free") {
    PureState p = PureState::basis(SystemLayout({{"A", 2}, {"B", 1}, {"C", 1}, {"R", 1}}),
                                   std::vector<std::int64_t>{0, 0, 0, 0});
    const RateReport rep = splitting_rates(ctx_of(p));
    CHECK(q(rep) == doctest::Approx(0.0).epsilon(1e-9));
    CHECK(e(rep) == doctest::Approx(0.0).epsilon(1e-9));
  }
  SUBCASE("splitting rejects a nontrivial B") {
    CHECK_THROWS_AS(splitting_rates(ctx_of(ghz_abr())), std::invalid_argument);
  }
}

TEST_CASE("relay rate quadruple") {
  SUBCASE("two-pair payload gives (1, 1, 1, 1)") {
    const auto q = relay_quadruple(ctx_of(pairs_state()));
    for (double v : q) CHECK(v == doctest::Approx(1.0).epsilon(1e-9));
  }
  SUBCASE("reference pair gives (1, 0, 1, 0)") {
    const auto q = relay_quadruple(ctx_of(phi_with_nulls("A", "R")));
    CHECK(q[0] == doctest::Approx(1.0).epsilon(1e-9));
    CHECK(q[1] == doctest::Approx(0.0).epsilon(1e-9));
    CHECK(q[2] == doctest::Approx(1.0).epsilon(1e-9));
    CHECK(q[3] == doctest::Approx(0.0).epsilon(1e-9));
  }
  SUBCASE("charlie pair gives (0, 1, 0, 1)") {
    const auto q = relay_quadruple(ctx_of(phi_with_nulls("A", "C")));
    CHECK(q[0] == doctest::Approx(0.0).epsilon(1e-9));
    CHECK(q[1] == doctest::Approx(1.0).epsilon(1e-9));
    CHECK(q[2] == doctest::Approx(0.0).epsilon(1e-9));
    CHECK(q[3] == doctest::Approx(1.0).epsilon(1e-9));
  }
}

TEST_CASE("partial merge classical communication") {
  auto cbits = [](const RateReport& rep, const char* which) {
    for (const auto& e : rep.entries)
      if (e.resource == Resource::Cbit && e.note.find(which) != std::string::npos)
        return e.rate;
    FAIL("missing cbit entry");
    return 0.0;
  };
  SUBCASE("two-pair payload: 2 repackaged vs 4 naive") {
    const RateReport rep = partial_merge_cbits(ctx_of(pairs_state()));
    CHECK(cbits(rep, "repackaging") == doctest::Approx(2.0).epsilon(1e-9));
    CHECK(cbits(rep, "naive") == doctest::Approx(4.0).epsilon(1e-9));
  }
  SUBCASE("null C: both equal I(A:R)") {
    const RateReport rep = partial_merge_cbits(ctx_of(ghz_abr()));
    CHECK(cbits(rep, "repackaging") == doctest::Approx(1.0).epsilon(1e-9));
    CHECK(cbits(rep, "naive") == doctest::Approx(1.0).epsilon(1e-9));
  }
  SUBCASE("charlie pair only: 0 vs 2") {
    const RateReport rep = partial_merge_cbits(ctx_of(phi_with_nulls("A", "C")));
    CHECK(cbits(rep, "repackaging") == doctest::Approx(0.0).epsilon(1e-9));
    CHECK(cbits(rep, "naive") == doctest::Approx(2.0).epsilon(1e-9));
  }
}

TEST_CASE("time-reversed rates") {
  auto q = [](const RateReport& r) {
    return entry_rate(r, Resource::QubitChannel, Party::Bob, Party::Alice);
  };
  auto e = [](const RateReport& r) {
    return entry_rate(r, Resource::Ebit, Party::Bob, Party::Alice);
  };
  SUBCASE("qubit rate equals the forward redistribution rate on pure states") {
    RandomStream rng(8);
    for (int i = 0; i < 10; ++i) {
      const EntropyContext ctx = ctx_of(random_abcr(rng));
      CHECK(std::abs(q(reverse_shannon_rates(ctx)) -
                     redistribution_rates(ctx).total(Resource::QubitChannel,
                                                     Party::Alice, Party::Bob)) <= 1e-9);
    }
  }
  SUBCASE("charlie pair: free, one ebit produced") {
    const RateReport rep = reverse_shannon_rates(ctx_of(phi_with_nulls("A", "C")));
    CHECK(q(rep) == doctest::Approx(0.0).epsilon(1e-9));
    CHECK(e(rep) == doctest::Approx(-1.0).epsilon(1e-9));
  }
  SUBCASE("two-pair payload: one qubit, one ebit produced") {
    const RateReport rep = reverse_shannon_rates(ctx_of(pairs_state()));
    CHECK(q(rep) == doctest::Approx(1.0).epsilon(1e-9));
    CHECK(e(rep) == doctest::Approx(-1.0).epsilon(1e-9));
  }
}

TEST_CASE("entropic identities on random pure states") {
  RandomStream rng(123);
  for (int i = 0; i < 25; ++i) {
    const PureState psi = random_abcr(rng);
    const EntropyContext ctx = ctx_of(psi);
    // purity duality, both sides computed from honest marginals
    for (RoleMask m = 1; m < 15; ++m) {
      const RoleMask comp = 15u & ~m;
      CHECK(std::abs(ctx.entropy(m) - ctx.entropy(comp)) <= 1e-9);
      const std::vector<std::string> regs = ctx.registers_of(m);
      CHECK(std::abs(ctx.entropy(m) - brute_entropy(psi, regs)) <= 1e-9);
    }
    // chain rule behind the relay accounting
    CHECK(std::abs(ctx.mutual_info(kMaskA, kMaskR | kMaskC) -
                   ctx.mutual_info(kMaskA, kMaskC) -
                   ctx.cond_mutual_info(kMaskA, kMaskR, kMaskC)) <= 1e-9);
    // strong subadditivity, computed not assumed
    CHECK(ctx.cond_mutual_info(kMaskA, kMaskR, kMaskB) >= -1e-9);
    // relay consistency: Q_cb = I(A:RC)/2 - I(A:C)/2
    const auto quad = relay_quadruple(ctx);
    CHECK(std::abs(quad[2] - (0.5 * ctx.mutual_info(kMaskA, kMaskR | kMaskC) -
                              0.5 * ctx.mutual_info(kMaskA, kMaskC))) <= 1e-9);
  }
}

TEST_CASE("relay degenerates to coherent merging when C is null") {
  RandomStream rng(55);
  for (int i = 0; i < 10; ++i) {
    const PureState psi = tensor(
        random_pure_state(SystemLayout({{"A", 2}, {"B", 2}, {"R", 2}}), rng),
        PureState::basis(SystemLayout({{"C", 1}}), std::vector<std::int64_t>{0}));
    const EntropyContext ctx = ctx_of(psi);
    const auto quad = relay_quadruple(ctx);
    const RateReport cm = coherent_merging_rates(ctx);
    CHECK(std::abs(quad[2] - cm.total(Resource::QubitChannel, Party::Alice, Party::Bob)) <=
          1e-9);
    CHECK(std::abs(quad[3] - cm.total(Resource::Ebit, Party::Alice, Party::Bob)) <= 1e-9);
    CHECK(std::abs(quad[1]) <= 1e-9);
  }
}

TEST_CASE("redistribution with null B equals splitting") {
  RandomStream rng(56);
  for (int i = 0; i < 10; ++i) {
    const PureState psi = tensor(
        random_pure_state(SystemLayout({{"A", 2}, {"C", 2}, {"R", 2}}), rng),
        PureState::basis(SystemLayout({{"B", 1}}), std::vector<std::int64_t>{0}));
    const EntropyContext ctx = ctx_of(psi);
    const RateReport rd = redistribution_rates(ctx);
    const RateReport sp = splitting_rates(ctx);
    CHECK(std::abs(rd.total(Resource::QubitChannel, Party::Alice, Party::Bob) -
                   sp.total(Resource::QubitChannel, Party::Alice, Party::Bob)) <= 1e-9);
    CHECK(std::abs(rd.total(Resource::Ebit, Party::Alice, Party::Bob) -
                   sp.total(Resource::Ebit, Party::Alice, Party::Bob)) <= 1e-9);
  }
}

TEST_CASE("memo cache is stable under concurrent reads") {
  RandomStream rng(77);
  const EntropyContext ctx = ctx_of(random_abcr(rng));
  std::vector<std::future<double>> futs;
  for (int i = 0; i < 16; ++i)
    futs.push_back(std::async(std::launch::async,
                              [&ctx, i] { return ctx.entropy(static_cast<RoleMask>(i % 15 + 1)); }));
  std::vector<double> vals;
  for (auto& f : futs) vals.push_back(f.get());
  for (int i = 0; i < 16; ++i)
    CHECK(vals[static_cast<std::size_t>(i)] ==
          ctx.entropy(static_cast<RoleMask>(i % 15 + 1)));
}

TEST_CASE("missing role is reported by name") {
  const PureState p = maximally_entangled(2, "A", "B");
  CHECK_THROWS_WITH_AS(EntropyContext::from_named(p), doctest::Contains("missing register C"),
                       std::invalid_argument);
}
