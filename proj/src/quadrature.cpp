#include "bfbayes/quadrature.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <vector>

namespace bfbayes {

QuadratureBudgetError::QuadratureBudgetError(CubatureResult b)
    : std::runtime_error("quadrature evaluation budget exhausted"), best(b) {}

namespace detail {

namespace {

// Genz-Malik degree-7 rule with embedded degree-5 estimate, dimension 2.
const double kLambda2 = std::sqrt(9.0 / 70.0);
const double kLambda3 = std::sqrt(9.0 / 10.0);  // also lambda4
const double kLambda5 = std::sqrt(9.0 / 19.0);
constexpr double kW1 = -15264.0 / 19683.0;
constexpr double kW2 = 3920.0 / 6561.0;
constexpr double kW3 = 1360.0 / 6561.0;
constexpr double kW4 = 800.0 / 19683.0;
constexpr double kW5 = 6859.0 / 19683.0;
constexpr double kW1e = -104868.0 / 19683.0;
constexpr double kW2e = 490.0 / 243.0;
constexpr double kW3e = 130.0 / 729.0;
constexpr double kW4e = 100.0 / 729.0;

constexpr int kPoints = 17;

void gm_points(double cx, double cy, double hx, double hy,
               double (&px)[kPoints], double (&py)[kPoints]) {
  const double l2x = kLambda2 * hx, l2y = kLambda2 * hy;
  const double l3x = kLambda3 * hx, l3y = kLambda3 * hy;
  const double l5x = kLambda5 * hx, l5y = kLambda5 * hy;
  int i = 0;
  px[i] = cx; py[i] = cy; ++i;                         // 0: center
  px[i] = cx + l2x; py[i] = cy; ++i;                   // 1..4: single-axis lambda2
  px[i] = cx - l2x; py[i] = cy; ++i;
  px[i] = cx; py[i] = cy + l2y; ++i;
  px[i] = cx; py[i] = cy - l2y; ++i;
  px[i] = cx + l3x; py[i] = cy; ++i;                   // 5..8: single-axis lambda3
  px[i] = cx - l3x; py[i] = cy; ++i;
  px[i] = cx; py[i] = cy + l3y; ++i;
  px[i] = cx; py[i] = cy - l3y; ++i;
  px[i] = cx + l3x; py[i] = cy + l3y; ++i;             // 9..12: (+-l4, +-l4)
  px[i] = cx + l3x; py[i] = cy - l3y; ++i;
  px[i] = cx - l3x; py[i] = cy + l3y; ++i;
  px[i] = cx - l3x; py[i] = cy - l3y; ++i;
  px[i] = cx + l5x; py[i] = cy + l5y; ++i;             // 13..16: corners
  px[i] = cx + l5x; py[i] = cy - l5y; ++i;
  px[i] = cx - l5x; py[i] = cy + l5y; ++i;
  px[i] = cx - l5x; py[i] = cy - l5y; ++i;
}

GmRule gm_combine(const double (&f)[kPoints], double hx, double hy) {
  const double s1 = f[0];
  const double s2 = f[1] + f[2] + f[3] + f[4];
  const double s3 = f[5] + f[6] + f[7] + f[8];
  const double s4 = f[9] + f[10] + f[11] + f[12];
  const double s5 = f[13] + f[14] + f[15] + f[16];
  const double area = hx * hy;
  GmRule r;
  r.value7 = area * (kW1 * s1 + kW2 * s2 + kW3 * s3 + kW4 * s4 + kW5 * s5);
  r.value5 = area * (kW1e * s1 + kW2e * s2 + kW3e * s3 + kW4e * s4);
  const double ratio = (kLambda2 * kLambda2) / (kLambda3 * kLambda3);
  r.diff_x = std::fabs(f[1] + f[2] - 2.0 * f[0] - ratio * (f[5] + f[6] - 2.0 * f[0]));
  r.diff_y = std::fabs(f[3] + f[4] - 2.0 * f[0] - ratio * (f[7] + f[8] - 2.0 * f[0]));
  return r;
}

}  // namespace

GmRule gm_evaluate(const std::function<double(double, double)>& f,
                   double cx, double cy, double hx, double hy) {
  double px[kPoints], py[kPoints], fv[kPoints];
  gm_points(cx, cy, hx, hy, px, py);
  for (int i = 0; i < kPoints; ++i) fv[i] = f(px[i], py[i]);
  return gm_combine(fv, hx, hy);
}

}  // namespace detail

namespace {

struct Region {
  double cx, cy, hx, hy;
  double value;    // degree-7 estimate of the shifted integrand
  double error;    // |value7 - value5|
  int split_axis;  // 0: x, 1: y
  long id;         // creation order, deterministic tie-break
};

struct RegionLess {
  bool operator()(const Region& a, const Region& b) const {
    if (a.error != b.error) return a.error < b.error;  // max-heap on error
    return a.id > b.id;
  }
};

constexpr std::size_t kMinRegions = 16;

}  // namespace

CubatureResult integrate_exp_unit_square(
    const std::function<double(double, double)>& log_f,
    double rel_tol, long max_evals) {
  if (!(rel_tol > 0.0)) throw std::invalid_argument("rel_tol must be positive");
  const double kNegInf = -std::numeric_limits<double>::infinity();

  double shift = kNegInf;
  long evals = 0;
  long next_id = 0;
  double total_value = 0.0;
  double total_error = 0.0;
  std::vector<Region> heap;

  auto recompute_totals = [&] {
    total_value = 0.0;
    total_error = 0.0;
    for (const Region& r : heap) {
      total_value += r.value;
      total_error += r.error;
    }
  };

  auto eval_region = [&](double cx, double cy, double hx, double hy) -> Region {
    double px[detail::kPoints], py[detail::kPoints];
    double logs[detail::kPoints];
    detail::gm_points(cx, cy, hx, hy, px, py);
    double local_max = kNegInf;
    for (int i = 0; i < detail::kPoints; ++i) {
      const double lv = log_f(px[i], py[i]);
      if (std::isnan(lv) || lv == std::numeric_limits<double>::infinity())
        throw std::runtime_error("integrand returned a non-finite positive value");
      logs[i] = lv;
      local_max = std::max(local_max, lv);
    }
    evals += detail::kPoints;
    if (local_max > shift) {
      if (shift != kNegInf) {
        const double factor = std::exp(shift - local_max);
        for (Region& r : heap) {
          r.value *= factor;
          r.error *= factor;
        }
        total_value *= factor;
        total_error *= factor;
      }
      shift = local_max;
    }
    double fv[detail::kPoints];
    for (int i = 0; i < detail::kPoints; ++i)
      fv[i] = std::isfinite(logs[i]) ? std::exp(logs[i] - shift) : 0.0;
    const detail::GmRule rule = detail::gm_combine(fv, hx, hy);
    return Region{cx, cy, hx, hy, rule.value7, std::fabs(rule.value7 - rule.value5),
                  rule.diff_x >= rule.diff_y ? 0 : 1, next_id++};
  };

  auto push = [&](const Region& r) {
    total_value += r.value;
    total_error += r.error;
    heap.push_back(r);
    std::push_heap(heap.begin(), heap.end(), RegionLess{});
  };

  // 2x2 seed so the opening scan already sees four panels.
  for (double cx : {0.25, 0.75})
    for (double cy : {0.25, 0.75})
      push(eval_region(cx, cy, 0.25, 0.25));

  long splits = 0;
  for (;;) {
    const bool refined = heap.size() >= kMinRegions;
    if (refined && shift != kNegInf && total_value > 0.0 &&
        total_error <= rel_tol * total_value)
      break;
    if (evals + 2 * detail::kPoints > max_evals) {
      recompute_totals();
      const double lv = (shift != kNegInf && total_value > 0.0)
                            ? shift + std::log(total_value)
                            : kNegInf;
      const double re = total_value > 0.0
                            ? total_error / total_value
                            : std::numeric_limits<double>::infinity();
      throw QuadratureBudgetError({lv, re, evals});
    }
    std::pop_heap(heap.begin(), heap.end(), RegionLess{});
    const Region worst = heap.back();
    heap.pop_back();
    total_value -= worst.value;
    total_error -= worst.error;
    if (worst.split_axis == 0) {
      const double h = 0.5 * worst.hx;
      push(eval_region(worst.cx - h, worst.cy, h, worst.hy));
      push(eval_region(worst.cx + h, worst.cy, h, worst.hy));
    } else {
      const double h = 0.5 * worst.hy;
      push(eval_region(worst.cx, worst.cy - h, worst.hx, h));
      push(eval_region(worst.cx, worst.cy + h, worst.hx, h));
    }
    if (++splits % 64 == 0) recompute_totals();  // keep running sums from drifting
  }

  recompute_totals();
  if (!(total_value > 0.0) || shift == kNegInf)
    throw std::runtime_error("integrand has no detectable mass on the unit square");
  return {shift + std::log(total_value), total_error / total_value, evals};
}

}  // namespace bfbayes
