#include <cmath>
#include <stdexcept>

#include <doctest.h>

#include "bfbayes/special_math.hpp"
#include "support/oracles.hpp"

using namespace bfbayes;

TEST_CASE("log_gamma known values") {
  CHECK(log_gamma(1.0) == doctest::Approx(0.0).epsilon(1e-14));
  CHECK(log_gamma(0.5) == doctest::Approx(0.5 * std::log(M_PI)).epsilon(1e-13));
  // Gamma(10) = 9!
  CHECK(log_gamma(10.0) == doctest::Approx(std::log(362880.0)).epsilon(1e-13));
  CHECK_THROWS_AS(log_gamma(0.0), std::domain_error);
  CHECK_THROWS_AS(log_gamma(-2.0), std::domain_error);
}

TEST_CASE("log_gamma recurrence on a grid") {
  for (double x = 0.5; x <= 100.0; x += 0.5) {
    const double resid = log_gamma(x + 1.0) - log_gamma(x) - std::log(x);
    CHECK(std::fabs(resid) < 1e-10);
  }
}

TEST_CASE("digamma known values and recurrence oracle") {
  const double euler = 0.57721566490153286;
  CHECK(digamma(1.0) == doctest::Approx(-euler).epsilon(1e-12));
  CHECK(digamma(2.0) == doctest::Approx(1.0 - euler).epsilon(1e-12));
  // psi(10) = psi(1) + sum_{k=1}^{9} 1/k
  double harmonic = 0.0;
  for (int k = 1; k <= 9; ++k) harmonic += 1.0 / k;
  CHECK(digamma(10.0) == doctest::Approx(-euler + harmonic).epsilon(1e-12));
  // recurrence at small x
  for (double x : {1e-3, 0.05, 0.3, 1.7, 42.0}) {
    CHECK(digamma(x + 1.0) - digamma(x) ==
          doctest::Approx(1.0 / x).epsilon(1e-10));
  }
  CHECK_THROWS_AS(digamma(0.0), std::domain_error);
}

TEST_CASE("trigamma values") {
  CHECK(trigamma(1.0) == doctest::Approx(M_PI * M_PI / 6.0).epsilon(1e-12));
  for (double x : {0.2, 1.0, 3.5, 20.0}) {
    CHECK(trigamma(x) - trigamma(x + 1.0) ==
          doctest::Approx(1.0 / (x * x)).epsilon(1e-10));
    // numerical derivative of digamma as an independent check
    const double h = 1e-5;
    const double num = (digamma(x + h) - digamma(x - h)) / (2.0 * h);
    CHECK(trigamma(x) == doctest::Approx(num).epsilon(1e-5));
  }
}

TEST_CASE("student_t_sf") {
  CHECK(student_t_sf(0.0, 3.0) == doctest::Approx(0.5).epsilon(1e-14));
  CHECK(student_t_sf(0.0, 7.7) == doctest::Approx(0.5).epsilon(1e-14));
  CHECK(student_t_sf(1e8, 5.0) < 1e-20);
  CHECK(student_t_sf(std::numeric_limits<double>::infinity(), 5.0) == 0.0);

  // numeric integration of the density as oracle
  for (double df : {1.0, 2.5, 5.8824, 10.0, 30.0}) {
    for (double t : {0.5, 1.0, 2.0, 3.5}) {
      auto pdf = [df](double x) {
        return std::exp(oracles::student_t_log_pdf(x, df, 0.0, 1.0));
      };
      // integrate the density from t out to a far cutoff
      const double cutoff = 1e6;
      auto transformed = [&](double u) {
        // x = t + u/(1-u) maps (0,1) to (t, inf)
        if (u >= 1.0) return 0.0;
        const double x = t + u / (1.0 - u);
        return pdf(x) / ((1.0 - u) * (1.0 - u));
      };
      (void)cutoff;
      const double oracle = oracles::integrate_1d(transformed, 0.0, 1.0, 1e-13);
      CHECK(student_t_sf(t, df) == doctest::Approx(oracle).epsilon(1e-9));
    }
  }
  // spot value: t = 2, df = 10
  CHECK(student_t_sf(2.0, 10.0) == doctest::Approx(0.03669).epsilon(2e-4));
  CHECK_THROWS_AS(student_t_sf(1.0, 0.0), std::domain_error);
}

TEST_CASE("student_t_sf symmetry") {
  for (double t : {0.3, 1.7, 4.0})
    CHECK(student_t_sf(t, 6.0) + student_t_sf(-t, 6.0) ==
          doctest::Approx(1.0).epsilon(1e-13));
}

TEST_CASE("inverse gamma log pdf") {
  CHECK(log_pdf_inverse_gamma(1.0, 1.0, 1.0) == doctest::Approx(-1.0).epsilon(1e-14));
  // mode at beta / (alpha + 1): numeric derivative changes sign
  const double alpha = 3.0, beta = 2.0;
  const double mode = beta / (alpha + 1.0);
  const double h = 1e-6;
  const double left = log_pdf_inverse_gamma(mode - h, alpha, beta);
  const double mid = log_pdf_inverse_gamma(mode, alpha, beta);
  const double right = log_pdf_inverse_gamma(mode + h, alpha, beta);
  CHECK(mid > left);
  CHECK(mid > right);
  // density integrates to one
  auto f = [&](double u) {
    if (u <= 0.0 || u >= 1.0) return 0.0;
    const double x = mode * u / (1.0 - u);
    return std::exp(log_pdf_inverse_gamma(x, alpha, beta)) * mode /
           ((1.0 - u) * (1.0 - u));
  };
  CHECK(oracles::integrate_1d(f, 0.0, 1.0, 1e-12) == doctest::Approx(1.0).epsilon(1e-9));
  CHECK_THROWS_AS(log_pdf_inverse_gamma(-1.0, 1.0, 1.0), std::domain_error);
  CHECK_THROWS_AS(log_pdf_inverse_gamma(1.0, 0.0, 1.0), std::domain_error);
}
