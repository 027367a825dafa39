// SPDX-License-Identifier: Apache-2.0
#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "remerge/random.hpp"
#include "remerge/state.hpp"

using namespace remerge;

namespace {

PureState basis_state(const std::string& name, std::int64_t dim, std::int64_t value) {
  return PureState::basis(SystemLayout({Register{name, dim}}),
                          std::vector<std::int64_t>{value});
}

PureState ghz_abr() {
  SystemLayout layout({{"A", 2}, {"B", 2}, {"R", 2}});
  Eigen::VectorXcd amp = Eigen::VectorXcd::Zero(8);
  amp[0] = amp[7] = 1.0 / std::sqrt(2.0);
  return PureState(layout, amp);
}

int schmidt_rank(const PureState& psi, const std::vector<std::string>& left) {
  std::vector<std::string> right;
  for (const auto& r : psi.layout().registers())
    if (std::find(left.begin(), left.end(), r.name) == left.end())
      right.push_back(r.name);
  const Eigen::VectorXd sv = singular_values(state_matrix(psi, left, right));
  return static_cast<int>((sv.array() > 1e-9).count());
}

}  // namespace

TEST_CASE("tensor products") {
  SUBCASE("basis product lands on the row-major index") {
    const PureState p = tensor(basis_state("A", 2, 0), basis_state("B", 2, 1));
    REQUIRE(p.dim() == 4);
    CHECK(std::abs(p.amplitudes()[1] - 1.0) < 1e-12);
  }
  SUBCASE("pair of entangled pairs: Schmidt ranks across both cuts") {
    const PureState p = tensor(maximally_entangled(2, "A", "B"),
                               maximally_entangled(2, "C", "D"));
    CHECK(std::abs(p.amplitudes().norm() - 1.0) < 1e-12);
    CHECK(schmidt_rank(p, {"A", "C"}) == 4);
    CHECK(schmidt_rank(p, {"A", "B"}) == 1);
  }
  SUBCASE("dim-1 factor leaves amplitudes unchanged") {
    const PureState a = ghz_abr();
    const PureState p = tensor(a, basis_state("X", 1, 0));
    CHECK((p.amplitudes() - a.amplitudes()).norm() == 0.0);
  }
  SUBCASE("name collision names the register") {
    CHECK_THROWS_WITH_AS(tensor(basis_state("A", 2, 0), basis_state("A", 2, 0)),
                         doctest::Contains("'A'"), std::invalid_argument);
  }
}

TEST_CASE("partial trace") {
  SUBCASE("half of a maximally entangled pair is maximally mixed") {
    const DensityOperator rho =
        partial_trace(maximally_entangled(2, "A", "B"), std::vector<std::string>{"A"});
    CHECK((rho.matrix() - Eigen::MatrixXcd::Identity(2, 2) / 2.0).norm() < 1e-12);
  }
  SUBCASE("tracing R of a GHZ state leaves the classically correlated mixture") {
    const DensityOperator rho =
        partial_trace(ghz_abr(), std::vector<std::string>{"A", "B"});
    Eigen::MatrixXcd want = Eigen::MatrixXcd::Zero(4, 4);
    want(0, 0) = want(3, 3) = 0.5;
    CHECK((rho.matrix() - want).norm() < 1e-12);
  }
  SUBCASE("keeping everything reproduces the projector") {
    const PureState psi = ghz_abr();
    const DensityOperator rho = partial_trace(psi, psi.layout().names());
    CHECK((rho.matrix() - psi.density().matrix()).norm() < 1e-12);
  }
  SUBCASE("unknown register") {
    CHECK_THROWS_AS(partial_trace(ghz_abr(), std::vector<std::string>{"Q"}),
                    std::invalid_argument);
  }
  SUBCASE("marginal of a product recovers the factor") {
    RandomStream rng(7);
    for (int i = 0; i < 5; ++i) {
      const PureState a = random_pure_state(SystemLayout({{"A", 3}, {"B", 2}}), rng);
      const PureState b = random_pure_state(SystemLayout({{"X", 2}, {"Y", 2}}), rng);
      const DensityOperator got = partial_trace(tensor(a, b), a.layout().names());
      CHECK((got.matrix() - a.density().matrix()).norm() < 1e-9);
    }
  }
}

TEST_CASE("purification") {
  SUBCASE("maximally mixed qubit purifies to a maximally entangled pair") {
    const DensityOperator rho(SystemLayout({{"A", 2}}),
                              Eigen::MatrixXcd::Identity(2, 2) / 2.0);
    const PureState psi = purify(rho, "E");
    CHECK(psi.layout().dim_of("E") == 2);
    const DensityOperator back = partial_trace(psi, std::vector<std::string>{"A"});
    CHECK((back.matrix() - rho.matrix()).norm() < 1e-9);
    CHECK(schmidt_rank(psi, {"A"}) == 2);
  }
  SUBCASE("pure input gets a trivial ancilla") {
    const PureState psi = purify(basis_state("A", 2, 0).density(), "E");
    CHECK(psi.layout().dim_of("E") == 1);
    CHECK(std::abs(psi.amplitudes()[0] - 1.0) < 1e-12);
  }
  SUBCASE("spectral form with the phase convention") {
    Eigen::MatrixXcd m = Eigen::MatrixXcd::Zero(2, 2);
    m(0, 0) = 2.0 / 3.0;
    m(1, 1) = 1.0 / 3.0;
    const PureState psi = purify(DensityOperator(SystemLayout({{"A", 2}}), m), "E");
    Eigen::VectorXcd want(4);
    want << std::sqrt(2.0 / 3.0), 0.0, 0.0, std::sqrt(1.0 / 3.0);
    CHECK((psi.amplitudes() - want).norm() < 1e-9);
  }
  SUBCASE("round trip through a random marginal") {
    RandomStream rng(21);
    for (int i = 0; i < 5; ++i) {
      const PureState big =
          random_pure_state(SystemLayout({{"A", 2}, {"B", 3}, {"C", 2}}), rng);
      const DensityOperator rho = partial_trace(big, std::vector<std::string>{"A", "B"});
      const PureState psi = purify(rho, "E");
      const DensityOperator back = partial_trace(psi, std::vector<std::string>{"A", "B"});
      CHECK((back.matrix() - rho.matrix()).norm() < 1e-9);
    }
  }
  SUBCASE("rejects a non positive operator") {
    Eigen::MatrixXcd m(2, 2);
    m << 1.5, 0.0, 0.0, -0.5;
    CHECK_THROWS_AS(purify(DensityOperator(SystemLayout({{"A", 2}}), m), "E"),
                    std::invalid_argument);
  }
}

TEST_CASE("haar sampling") {
  SUBCASE("unitarity across dims") {
    for (std::int64_t d : {2, 4, 8}) {
      RandomStream rng(5);
      for (int i = 0; i < 100; ++i) {
        const Unitary u = haar_unitary(d, rng);
        CHECK((u.matrix().adjoint() * u.matrix() -
               Eigen::MatrixXcd::Identity(d, d)).norm() <= 1e-9);
      }
    }
  }
  SUBCASE("deterministic given the stream") {
    RandomStream a(99), b(99);
    CHECK((haar_unitary(4, a).matrix() - haar_unitary(4, b).matrix()).norm() == 0.0);
  }
  SUBCASE("mean |U_00|^2 is 1/d within 3 standard errors") {
    const int draws = 10000;
    RandomStream rng(12);
    double sum = 0.0, sumsq = 0.0;
    for (int i = 0; i < draws; ++i) {
      const double x = std::norm(haar_unitary(4, rng).matrix()(0, 0));
      sum += x;
      sumsq += x * x;
    }
    const double mean = sum / draws;
    const double se = std::sqrt((sumsq / draws - mean * mean) / (draws - 1));
    CHECK(std::abs(mean - 0.25) <= 3.0 * se);
  }
  SUBCASE("mean |U_ij|^2 over all entries is 1/d within 5 standard errors") {
    for (std::int64_t d : {2, 4, 8}) {
      RandomStream rng(31);
      double sum = 0.0, sumsq = 0.0;
      int count = 0;
      for (int i = 0; i < 100; ++i) {
        const Eigen::MatrixXcd u = haar_unitary(d, rng).matrix();
        for (std::int64_t r = 0; r < d; ++r)
          for (std::int64_t c = 0; c < d; ++c) {
            const double x = std::norm(u(r, c));
            sum += x;
            sumsq += x * x;
            ++count;
          }
      }
      const double mean = sum / count;
      const double se = std::sqrt((sumsq / count - mean * mean) / (count - 1));
      CHECK(std::abs(mean - 1.0 / static_cast<double>(d)) <= 5.0 * se);
    }
  }
}

TEST_CASE("fidelity and trace distance") {
  const PureState zero = basis_state("A", 2, 0);
  const PureState one = basis_state("A", 2, 1);
  Eigen::VectorXcd plus_amp(2);
  plus_amp << 1.0 / std::sqrt(2.0), 1.0 / std::sqrt(2.0);
  const PureState plus(SystemLayout({{"A", 2}}), plus_amp);

  SUBCASE("identical states") {
    CHECK(fidelity(zero.density(), zero.density()) == doctest::Approx(1.0).epsilon(1e-9));
    CHECK(trace_distance(zero.density(), zero.density()) ==
          doctest::Approx(0.0).epsilon(1e-9));
  }
  SUBCASE("orthogonal states") {
    CHECK(fidelity(zero.density(), one.density()) < 1e-9);
    CHECK(trace_distance(zero.density(), one.density()) ==
          doctest::Approx(1.0).epsilon(1e-9));
  }
  SUBCASE("overlap 1/sqrt(2)") {
    CHECK(fidelity(zero.density(), plus.density()) ==
          doctest::Approx(1.0 / std::sqrt(2.0)).epsilon(1e-9));
    CHECK(trace_distance(zero.density(), plus.density()) ==
          doctest::Approx(1.0 / std::sqrt(2.0)).epsilon(1e-9));
  }
  SUBCASE("layout mismatch") {
    CHECK_THROWS_AS(fidelity(zero.density(), basis_state("B", 2, 0).density()),
                    std::invalid_argument);
  }
  SUBCASE("Fuchs - van de Graaf sandwich on random pairs") {
    RandomStream rng(3);
    for (int i = 0; i < 20; ++i) {
      const SystemLayout lay({{"A", 2}, {"B", 2}});
      const DensityOperator rho = partial_trace(
          random_pure_state(SystemLayout({{"A", 2}, {"B", 2}, {"E", 4}}), rng),
          std::vector<std::string>{"A", "B"});
      const DensityOperator sig = partial_trace(
          random_pure_state(SystemLayout({{"A", 2}, {"B", 2}, {"E", 4}}), rng),
          std::vector<std::string>{"A", "B"});
      const double f = fidelity(rho, sig);
      const double t = trace_distance(rho, sig);
      CHECK(1.0 - f <= t + 1e-7);
      CHECK(t <= std::sqrt(std::max(0.0, 1.0 - f * f)) + 1e-7);
    }
  }
}

TEST_CASE("maximally entangled states") {
  SUBCASE("qubit pair amplitudes") {
    const PureState p = maximally_entangled(2, "A", "B");
    Eigen::VectorXcd want(4);
    const double s = 1.0 / std::sqrt(2.0);
    want << s, 0.0, 0.0, s;
    CHECK((p.amplitudes() - want).norm() < 1e-12);
  }
  SUBCASE("dim 1 is the trivial scalar state") {
    const PureState p = maximally_entangled(1, "A", "B");
    CHECK(p.dim() == 1);
    CHECK(std::abs(p.amplitudes()[0] - 1.0) < 1e-12);
  }
  SUBCASE("marginals are maximally mixed") {
    for (std::int64_t d : {2, 3}) {
      const PureState p = maximally_entangled(d, "A", "B");
      const DensityOperator rho = partial_trace(p, std::vector<std::string>{"B"});
      CHECK((rho.matrix() -
             Eigen::MatrixXcd::Identity(d, d) / static_cast<double>(d)).norm() < 1e-12);
    }
  }
}

TEST_CASE("layout surgery and data movement") {
  RandomStream rng(17);
  const PureState psi =
      random_pure_state(SystemLayout({{"A", 2}, {"B", 3}, {"C", 2}}), rng);

  SUBCASE("permutation round trip") {
    const PureState moved =
        permute_registers(psi, std::vector<std::string>{"C", "A", "B"});
    const PureState back =
        permute_registers(moved, std::vector<std::string>{"A", "B", "C"});
    CHECK((back.amplitudes() - psi.amplitudes()).norm() == 0.0);
  }
  SUBCASE("split then merge is the identity relabeling") {
    const PureState big =
        random_pure_state(SystemLayout({{"A", 6}, {"B", 2}}), rng);
    const PureState split = split_register(big, "A", {"A1", 2}, {"A2", 3});
    CHECK(split.layout().dim_of("A1") == 2);
    CHECK((split.amplitudes() - big.amplitudes()).norm() == 0.0);
    const PureState merged =
        merge_registers(split, std::vector<std::string>{"A1", "A2"}, "A");
    CHECK((merged.amplitudes() - big.amplitudes()).norm() == 0.0);
  }
  SUBCASE("swap is an involution and moves contents") {
    const PureState pair = tensor(basis_state("X", 2, 0), basis_state("Y", 2, 1));
    const PureState swapped = swap_contents(pair, "X", "Y");
    CHECK(std::abs(swapped.amplitudes()[2] - 1.0) < 1e-12);  // |1>_X |0>_Y
    const PureState again = swap_contents(swapped, "X", "Y");
    CHECK((again.amplitudes() - pair.amplitudes()).norm() == 0.0);
  }
  SUBCASE("apply_unitary on a non-leading register matches the dense product") {
    RandomStream r2(5);
    const Unitary u = haar_unitary(3, r2);
    const PureState got = apply_unitary(psi, u, std::vector<std::string>{"B"});
    // dense check: U acts in the middle of the 2x3x2 space
    Eigen::MatrixXcd full = Eigen::MatrixXcd::Zero(12, 12);
    for (int a = 0; a < 2; ++a)
      for (int b = 0; b < 3; ++b)
        for (int b2 = 0; b2 < 3; ++b2)
          for (int c = 0; c < 2; ++c)
            full(a * 6 + b * 2 + c, a * 6 + b2 * 2 + c) = u.matrix()(b, b2);
    const Eigen::VectorXcd want = full * psi.amplitudes();
    CHECK((got.amplitudes() - want).norm() < 1e-12);
  }
  SUBCASE("state invariants survive the operations") {
    const PureState moved =
        permute_registers(psi, std::vector<std::string>{"B", "C", "A"});
    CHECK(std::abs(moved.amplitudes().norm() - 1.0) <= 1e-9);
    const DensityOperator rho = partial_trace(moved, std::vector<std::string>{"B"});
    CHECK(std::abs(rho.matrix().trace().real() - 1.0) <= 1e-9);
    CHECK((rho.matrix() - rho.matrix().adjoint()).norm() <= 1e-9);
  }
}
