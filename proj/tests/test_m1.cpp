#include <cmath>
#include <random>
#include <stdexcept>

#include <doctest.h>

#include "bfbayes/m1.hpp"
#include "support/oracles.hpp"

using namespace bfbayes;

TEST_CASE("m1_init substitutes the first-step posterior hyperparameters") {
  const NigHyper h = m1_init(GroupSummary{10.0, 2.94, 4.5});
  CHECK(h.m == 2.94);
  CHECK(h.kappa == 10.0);
  CHECK(h.alpha == 5.0);
  CHECK(h.beta == 2.25);

  const NigHyper small = m1_init(GroupSummary{2.0, 0.0, 2.0});
  CHECK(small.m == 0.0);
  CHECK(small.kappa == 2.0);
  CHECK(small.alpha == 1.0);
  CHECK(small.beta == 1.0);

  const NigHyper weighted = m1_init(GroupSummary{5.0, 1.0, 8.0});
  CHECK(weighted.kappa == 5.0);
  CHECK(weighted.alpha == 2.5);
  CHECK(weighted.beta == 4.0);

  CHECK_THROWS_WITH_AS(m1_init(GroupSummary{10.0, 1.0, 0.0}),
                       "degenerate group variance", std::invalid_argument);
}

TEST_CASE("m1_update matches the displayed second-step posterior") {
  // beta' = (g1 + g2)/2 + n1 n2 (m1 - m2)^2 / (2 (n1 + n2))
  const GroupSummary s1{6.0, 1.5, 3.0};
  const GroupSummary s2{9.0, 2.5, 5.0};
  const NigHyper post = m1_update(m1_init(s1), s2);
  CHECK(post.kappa == 15.0);
  CHECK(post.alpha == 7.5);
  CHECK(post.m == doctest::Approx((6.0 * 1.5 + 9.0 * 2.5) / 15.0).epsilon(1e-15));
  const double expected_beta =
      (3.0 + 5.0) / 2.0 + 6.0 * 9.0 * (1.5 - 2.5) * (1.5 - 2.5) / (2.0 * 15.0);
  CHECK(post.beta == doctest::Approx(expected_beta).epsilon(1e-15));
}

TEST_CASE("m1_update with a vanishing summary is the identity in the limit") {
  const NigHyper h = m1_init(GroupSummary{8.0, 1.0, 6.0});
  const NigHyper post = m1_update(h, GroupSummary{1e-9, 123.0, 0.0});
  CHECK(post.m == doctest::Approx(h.m).epsilon(1e-6));
  CHECK(post.kappa == doctest::Approx(h.kappa).epsilon(1e-9));
  CHECK(post.alpha == doctest::Approx(h.alpha).epsilon(1e-9));
  CHECK(post.beta == doctest::Approx(h.beta).epsilon(1e-4));
}

TEST_CASE("pooling identity: sequential updates equal the one-shot posterior") {
  std::mt19937_64 gen(21);
  std::normal_distribution<double> nd(2.0, 1.3);
  for (int trial = 0; trial < 100; ++trial) {
    GroupSample a, b, pooled;
    const int na = 2 + static_cast<int>(gen() % 12);
    const int nb = 2 + static_cast<int>(gen() % 12);
    for (int i = 0; i < na; ++i) {
      a.values.push_back(nd(gen));
      pooled.values.push_back(a.values.back());
    }
    for (int i = 0; i < nb; ++i) {
      b.values.push_back(nd(gen));
      pooled.values.push_back(b.values.back());
    }
    const NigHyper sequential = m1_update(m1_init(summarize(a)), summarize(b));
    const NigHyper oneshot = m1_init(summarize(pooled));
    CHECK(sequential.m == doctest::Approx(oneshot.m).epsilon(1e-12));
    CHECK(sequential.kappa == doctest::Approx(oneshot.kappa).epsilon(1e-12));
    CHECK(sequential.alpha == doctest::Approx(oneshot.alpha).epsilon(1e-12));
    CHECK(sequential.beta == doctest::Approx(oneshot.beta).epsilon(1e-12));
  }
}

TEST_CASE("single-point predictive equals the Student-t density") {
  const NigHyper h{1.3, 6.0, 4.0, 5.0};
  for (double x : {-2.0, 0.5, 1.3, 3.7}) {
    const double impl = m1_log_marginal(h, GroupSummary{1.0, x, 0.0});
    const double scale = std::sqrt(h.beta * (h.kappa + 1.0) / (h.alpha * h.kappa));
    const double oracle = oracles::student_t_log_pdf(x, 2.0 * h.alpha, h.m, scale);
    CHECK(impl == doctest::Approx(oracle).epsilon(1e-12));
  }
}

TEST_CASE("chain rule of the predictive") {
  std::mt19937_64 gen(22);
  std::normal_distribution<double> nd(0.5, 2.0);
  for (int trial = 0; trial < 20; ++trial) {
    GroupSample a, b, all;
    for (int i = 0; i < 6; ++i) {
      a.values.push_back(nd(gen));
      all.values.push_back(a.values.back());
    }
    for (int i = 0; i < 9; ++i) {
      b.values.push_back(nd(gen));
      all.values.push_back(b.values.back());
    }
    const NigHyper h = m1_init(GroupSummary{7.0, 0.4, 11.0});
    const double joint = m1_log_marginal(h, summarize(all));
    const double chained = m1_log_marginal(h, summarize(a)) +
                           m1_log_marginal(m1_update(h, summarize(a)), summarize(b));
    CHECK(joint == doctest::Approx(chained).epsilon(1e-10));
  }
}

TEST_CASE("predictive matches deterministic quadrature per arm") {
  std::mt19937_64 gen(23);
  for (int trial = 0; trial < 3; ++trial) {
    const Experiment y1 =
        oracles::gaussian_experiment(gen, 6, 8, 2.9, 3.4, 0.6, 1.5, "y1");
    const Experiment y2 =
        oracles::gaussian_experiment(gen, 7, 5, 2.9, 3.4, 0.6, 1.5, "y2");
    const ExperimentSummary s1 = summarize(y1), s2 = summarize(y2);
    const double impl = m1_log_marginal(m1_init(s1), s2);
    const double oracle = oracles::m1_arm_marginal_quadrature(s1.control, s2.control) +
                          oracles::m1_arm_marginal_quadrature(s1.treated, s2.treated);
    CHECK(impl == doctest::Approx(oracle).epsilon(1e-8));
  }
}

TEST_CASE("shift invariance, scale equivariance, label-swap symmetry") {
  std::mt19937_64 gen(24);
  for (int trial = 0; trial < 10; ++trial) {
    Experiment y1 = oracles::gaussian_experiment(gen, 8, 9, 2.9, 3.9, 0.7, 1.2, "y1");
    Experiment y2 = oracles::gaussian_experiment(gen, 10, 6, 2.9, 3.9, 0.7, 1.2, "y2");
    const ExperimentSummary s1 = summarize(y1), s2 = summarize(y2);
    const double base = m1_log_marginal(m1_init(s1), s2);

    SUBCASE("") {}  // keep trial loop structure flat

    // shift all observations
    Experiment y1s = y1, y2s = y2;
    for (auto* e : {&y1s, &y2s})
      for (auto* arm : {&e->control, &e->treated})
        for (double& v : arm->values) v += 11.25;
    const double shifted = m1_log_marginal(m1_init(summarize(y1s)), summarize(y2s));
    CHECK(shifted == doctest::Approx(base).epsilon(1e-9));

    // scale all observations by s: log marginal changes by -n_new * log(s)
    const double scale = 3.5;
    Experiment y1m = y1, y2m = y2;
    for (auto* e : {&y1m, &y2m})
      for (auto* arm : {&e->control, &e->treated})
        for (double& v : arm->values) v *= scale;
    const double scaled = m1_log_marginal(m1_init(summarize(y1m)), summarize(y2m));
    const double n_new = summarize(y2).control.n + summarize(y2).treated.n;
    CHECK(scaled == doctest::Approx(base - n_new * std::log(scale)).epsilon(1e-9));

    // label swap leaves the sum over arms unchanged exactly
    const ExperimentSummary s1w{s1.treated, s1.control};
    const ExperimentSummary s2w{s2.treated, s2.control};
    const double swapped = m1_log_marginal(m1_init(s1w), s2w);
    CHECK(swapped == base);
  }
}
