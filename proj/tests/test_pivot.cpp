#include "sawsle/pivot.hpp"
#include "sawsle/unfold.hpp"
#include "support.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <map>
#include <random>
#include <sstream>

using namespace sawsle;

TEST(SiteDistribution, PiecewiseN5) {
  SiteDistribution dist(5, SiteProfile::Piecewise);
  const std::uint64_t expected[] = {8, 4, 2, 1, 1};
  for (int i = 0; i < 5; ++i) EXPECT_EQ(dist.weight(i), expected[i]);
  EXPECT_DOUBLE_EQ(dist.unit(), 1.0 / 16.0);
  EXPECT_DOUBLE_EQ(dist.probability(0), 0.5);
}

TEST(SiteDistribution, PiecewiseNormalizationMatchesFormulaWhenFiveDividesN) {
  for (std::int64_t n : {5, 10, 100, 1000, 100000}) {
    SiteDistribution dist(n, SiteProfile::Piecewise);
    EXPECT_NEAR(dist.unit(), 5.0 / 16.0 / double(n), 1e-18);
    double total = 0.0;
    for (std::int64_t i = 0; i < n; ++i) total += dist.probability(i);
    EXPECT_NEAR(total, 1.0, 1e-10);  // summation rounding
  }
}

TEST(SiteDistribution, AllPositiveForAwkwardN) {
  for (std::int64_t n = 1; n <= 23; ++n) {
    SiteDistribution dist(n, SiteProfile::Piecewise);
    double total = 0.0;
    for (std::int64_t i = 0; i < n; ++i) {
      EXPECT_GT(dist.probability(i), 0.0);
      total += dist.probability(i);
      // Block boundaries at kN/5 as real numbers.
      const double r = double(i) * 5.0 / double(n);
      const std::uint64_t w = r < 1 ? 8 : r < 2 ? 4 : r < 3 ? 2 : 1;
      EXPECT_EQ(dist.weight(i), w) << "n=" << n << " i=" << i;
    }
    EXPECT_NEAR(total, 1.0, 1e-12);
  }
}

TEST(SiteDistribution, UniformN16) {
  SiteDistribution dist(16, SiteProfile::Uniform);
  for (int i = 0; i < 16; ++i) EXPECT_DOUBLE_EQ(dist.probability(i), 1.0 / 16.0);
}

TEST(SiteDistribution, DrawFrequenciesChiSquare) {
  const std::int64_t n = 40;
  SiteDistribution dist(n, SiteProfile::Piecewise);
  std::mt19937_64 rng(11);
  std::vector<double> counts(n, 0.0);
  const int draws = 1'000'000;
  for (int k = 0; k < draws; ++k) counts[static_cast<std::size_t>(dist.sample(rng))] += 1.0;
  double chi2 = 0.0;
  for (std::int64_t i = 0; i < n; ++i) {
    const double e = draws * dist.probability(i);
    chi2 += (counts[i] - e) * (counts[i] - e) / e;
    EXPECT_LT(std::abs(counts[i] - e), 4.0 * std::sqrt(e));
  }
  // 39 degrees of freedom: mean 39, sd sqrt(78).
  EXPECT_LT(chi2, 39.0 + 4.0 * std::sqrt(78.0));
}

TEST(SiteDistribution, ProposalSymmetriesUniform) {
  PivotChain chain(Domain::HalfPlane, 10, 3);
  std::map<std::string_view, int> counts;
  for (int k = 0; k < 70000; ++k) counts[chain.propose().g.name()]++;
  EXPECT_EQ(counts.size(), 7u);
  EXPECT_EQ(counts.count("identity"), 0u);
  for (const auto& [name, c] : counts) EXPECT_NEAR(c, 10000, 400) << name;
}

TEST(PivotChain, SiteExamples) {
  PivotChain chain(Domain::HalfPlane, 10, 1);
  EXPECT_EQ(chain.site(0), (Point{0, 0}));
  const std::int64_t k = 4;
  chain.apply({k, Symmetry::rot90()});
  ASSERT_EQ(chain.pending_count(), 1u);
  const Walk stored = chain.stored_walk();
  for (std::int64_t i = 0; i <= k; ++i) EXPECT_EQ(chain.site(i), stored[i]);
  for (std::int64_t i = k + 1; i <= 10; ++i) {
    EXPECT_EQ(chain.site(i), Symmetry::rot90().apply(stored[k], stored[i]));
  }
  EXPECT_THROW(chain.site(-1), std::out_of_range);
  EXPECT_THROW(chain.site(11), std::out_of_range);
}

TEST(PivotChain, AcceptTestExamples) {
  PivotChain chain(Domain::HalfPlane, 20, 1);
  EXPECT_FALSE(chain.accept_test({7, Symmetry::rot180()}));
  for (std::int64_t i = 0; i < 20; ++i) EXPECT_TRUE(chain.accept_test({i, Symmetry::reflect_x()}));
  EXPECT_THROW(chain.accept_test({20, Symmetry::rot90()}), std::out_of_range);
  EXPECT_THROW(chain.accept_test({-1, Symmetry::rot90()}), std::out_of_range);
}

TEST(PivotChain, ConstructionErrors) {
  EXPECT_THROW(PivotChain(Domain::HalfPlane, 0, 1), std::invalid_argument);
  EXPECT_THROW(PivotChain(Domain::HalfPlane, Walk::straight(5, {1, 0}), 1), std::invalid_argument);
  EXPECT_THROW(PivotChain(Domain::HalfPlane, 5, 1, ChainOptions{SiteProfile::Piecewise, 0}),
               std::invalid_argument);
}

class PrunedVsNaive : public ::testing::TestWithParam<std::tuple<Domain, std::int64_t>> {};

TEST_P(PrunedVsNaive, ZeroMismatches) {
  const auto [domain, n] = GetParam();
  const auto walks = oracle::sample_walks(domain, n, 100, 17 + static_cast<std::uint64_t>(n));
  std::mt19937_64 rng(99);
  std::uniform_int_distribution<std::int64_t> site(0, n - 1);
  std::uniform_int_distribution<int> sym(0, 6);
  int mismatches = 0, accepted = 0;
  for (const auto& w : walks) {
    PivotChain chain(domain, w, 1);
    for (int k = 0; k < 100; ++k) {
      const PivotProposal prop{site(rng), proposal_symmetries()[static_cast<std::size_t>(sym(rng))]};
      const bool fast = chain.accept_test(prop);
      accepted += fast;
      mismatches += fast != oracle::naive_accept(w, domain, prop);
    }
  }
  EXPECT_EQ(mismatches, 0);
  EXPECT_GT(accepted, 0);
}

INSTANTIATE_TEST_SUITE_P(Domains, PrunedVsNaive,
                         ::testing::Combine(::testing::Values(Domain::HalfPlane, Domain::CutPlane),
                                            ::testing::Values<std::int64_t>(50, 200)));

TEST(PivotChain, PrunedVsNaiveThroughPendingPivots) {
  // Proposals evaluated while pivots are still queued.
  for (Domain d : {Domain::HalfPlane, Domain::CutPlane}) {
    PivotChain chain(d, 120, 5, ChainOptions{SiteProfile::Uniform, 64});
    std::mt19937_64 rng(7);
    std::uniform_int_distribution<std::int64_t> site(0, 119);
    std::uniform_int_distribution<int> sym(0, 6);
    int mismatches = 0;
    for (int k = 0; k < 5000; ++k) {
      chain.step();
      const Walk w = chain.walk();
      const PivotProposal prop{site(rng), proposal_symmetries()[static_cast<std::size_t>(sym(rng))]};
      mismatches += chain.accept_test(prop) != oracle::naive_accept(w, d, prop);
    }
    EXPECT_EQ(mismatches, 0);
  }
}

TEST(PivotChain, RejectionLeavesWalkUnchanged) {
  PivotChain chain(Domain::CutPlane, 60, 8);
  for (int k = 0; k < 3000; ++k) {
    const Walk before = chain.walk();
    const auto acc_before = chain.accepted();
    const bool accepted = chain.step();
    EXPECT_EQ(chain.iterations(), static_cast<std::uint64_t>(k + 1));
    if (!accepted) {
      EXPECT_EQ(chain.walk(), before);
      EXPECT_EQ(chain.accepted(), acc_before);
    } else {
      EXPECT_EQ(chain.accepted(), acc_before + 1);
    }
  }
}

TEST(PivotChain, EveryHeldWalkIsValid) {
  for (Domain d : {Domain::HalfPlane, Domain::CutPlane}) {
    PivotChain chain(d, 300, 21, ChainOptions{SiteProfile::Piecewise, 5});
    for (int k = 0; k < 20000; ++k) {
      chain.step();
      EXPECT_LE(chain.pending_count(), 5u);
      if (k % 97 == 0) {
        ASSERT_FALSE(validate(chain.walk(), d).has_value());
      }
    }
  }
}

TEST(PivotChain, VisitsEveryWalkAtN4) {
  std::set<std::vector<std::pair<int, int>>> all;
  enumerate_walks(4, Domain::HalfPlane, [&](const Walk& w) {
    std::vector<std::pair<int, int>> key;
    for (Point p : w.sites()) key.emplace_back(p.x, p.y);
    all.insert(key);
  });
  // Breadth-first search over accepted pivot moves from the straight walk.
  std::set<std::vector<std::pair<int, int>>> seen;
  std::vector<Walk> frontier{Walk::straight(4)};
  auto key_of = [](const Walk& w) {
    std::vector<std::pair<int, int>> key;
    for (Point p : w.sites()) key.emplace_back(p.x, p.y);
    return key;
  };
  seen.insert(key_of(frontier.front()));
  while (!frontier.empty()) {
    std::vector<Walk> next;
    for (const auto& w : frontier) {
      for (std::int64_t i = 0; i < 4; ++i) {
        for (const auto& g : proposal_symmetries()) {
          if (!oracle::naive_accept(w, Domain::HalfPlane, {i, g})) continue;
          Walk v = w;
          v.pivot(static_cast<std::size_t>(i), g);
          if (seen.insert(key_of(v)).second) next.push_back(v);
        }
      }
    }
    frontier = std::move(next);
  }
  EXPECT_EQ(seen, all);

  // And the chain itself reaches all of them.
  PivotChain chain(Domain::HalfPlane, 4, 2);
  std::set<std::vector<std::pair<int, int>>> visited;
  for (int k = 0; k < 20000; ++k) {
    chain.step();
    visited.insert(key_of(chain.walk()));
  }
  EXPECT_EQ(visited, all);
}

TEST(PivotChain, FlushExamples) {
  PivotChain chain(Domain::HalfPlane, 30, 4);
  const Walk before = chain.walk();
  chain.flush();
  EXPECT_EQ(chain.stored_walk(), before);

  chain.apply({10, Symmetry::reflect_x()});
  Walk direct = before;
  direct.pivot(10, Symmetry::reflect_x());
  chain.flush();
  EXPECT_EQ(chain.pending_count(), 0u);
  EXPECT_EQ(chain.stored_walk(), direct);
}

TEST(PivotChain, FlushOf16PendingEqualsSequentialApplication) {
  for (Domain d : {Domain::HalfPlane, Domain::CutPlane}) {
    PivotChain chain(d, 200, 31, ChainOptions{SiteProfile::Piecewise, 16});
    for (int k = 0; k < 2000; ++k) chain.step();
    chain.flush();
    Walk sequential = chain.stored_walk();
    int queued = 0;
    while (queued < 16) {
      const PivotProposal prop = chain.propose();
      if (!chain.accept_test(prop)) continue;
      chain.apply(prop);
      sequential.pivot(static_cast<std::size_t>(prop.site), prop.g);
      ++queued;
      ASSERT_EQ(chain.pending_count(), static_cast<std::size_t>(queued));
      for (std::int64_t i = 0; i <= 200; ++i) ASSERT_EQ(chain.site(i), sequential[static_cast<std::size_t>(i)]);
    }
    const Walk via_sites = chain.walk();
    chain.flush();
    EXPECT_EQ(chain.pending_count(), 0u);
    EXPECT_EQ(chain.stored_walk(), sequential);
    EXPECT_EQ(via_sites, sequential);
  }
}

TEST(PivotChain, FlushThresholdDoesNotChangeTrajectory) {
  PivotChain a(Domain::HalfPlane, 150, 77, ChainOptions{SiteProfile::Piecewise, 1});
  PivotChain b(Domain::HalfPlane, 150, 77, ChainOptions{SiteProfile::Piecewise, 32});
  for (int k = 0; k < 5000; ++k) ASSERT_EQ(a.step(), b.step());
  EXPECT_EQ(a.walk(), b.walk());
}

TEST(PivotChain, SaveLoadContinuesIdentically) {
  PivotChain a(Domain::CutPlane, 100, 123);
  for (int k = 0; k < 1000; ++k) a.step();
  std::stringstream ss;
  a.save(ss);
  PivotChain b = PivotChain::load(ss, a.options());
  EXPECT_EQ(b.iterations(), a.iterations());
  EXPECT_EQ(b.accepted(), a.accepted());
  EXPECT_EQ(b.walk(), a.walk());
  for (int k = 0; k < 1000; ++k) ASSERT_EQ(a.step(), b.step());
  EXPECT_EQ(a.walk(), b.walk());
}

TEST(PivotChain, LoadRejectsCorruptCheckpoints) {
  std::istringstream bad("chain half-plane 3\niterations 1\n");
  EXPECT_THROW(PivotChain::load(bad, {}), std::runtime_error);
  std::istringstream mismatch("chain half-plane 3\niterations 1\naccepted 0\nrng 1 2 3\nN 3 half-plane\n");
  EXPECT_THROW(PivotChain::load(mismatch, {}), std::runtime_error);
}
