#include <benchmark/benchmark.h>

#include <cmath>

#include "wkstab/invariants.hpp"
#include "wkstab/pbundle.hpp"
#include "wkstab/quad.hpp"
#include "wkstab/testconfig.hpp"

using namespace wkstab;

namespace {

Polytope unit_square() {
  return Polytope::from_halfspaces({AffineForm{{1, 0}, Rational(0)}, AffineForm{{0, 1}, Rational(0)},
                                    AffineForm{{-1, 0}, Rational(1)}, AffineForm{{0, -1}, Rational(1)}});
}

Polytope interval() {
  return Polytope::from_halfspaces({AffineForm{{1}, Rational(1)}, AffineForm{{-1}, Rational(1)}});
}

PLConvex abs_p() {
  return PLConvex::from_pieces({PLConvex::Piece{{Rational(1)}, Rational(0)},
                                PLConvex::Piece{{Rational(-1)}, Rational(0)}});
}

void BM_LatticePoints(benchmark::State& state) {
  Polytope sq = unit_square();
  int k = static_cast<int>(state.range(0));
  for (auto _ : state) {
    auto pts = sq.lattice_points(k);
    benchmark::DoNotOptimize(pts.points.size());
  }
}
BENCHMARK(BM_LatticePoints)->Arg(8)->Arg(32)->Arg(64);

void BM_WeightSumExact(benchmark::State& state) {
  Polytope seg = interval();
  WeightExpr v = WeightExpr::parse("p1^2+1/3", 1);
  PLConvex f = abs_p();
  int k = static_cast<int>(state.range(0));
  for (auto _ : state) {
    Scalar s = weight_sum(seg, f, Rational(1), v, k);
    benchmark::DoNotOptimize(s.value);
  }
}
BENCHMARK(BM_WeightSumExact)->Arg(8)->Arg(32);

void BM_FutakiSquarePL(benchmark::State& state) {
  Polytope sq = unit_square();
  WeightExpr v = WeightExpr::parse("p1+p2+1", 2);
  WeightExpr w = WeightExpr::parse("1", 2);
  PLConvex diag = PLConvex::from_pieces({PLConvex::Piece{{Rational(1), Rational(1)}, Rational(-1)},
                                         PLConvex::Piece{{Rational(0), Rational(0)}, Rational(0)}});
  Scalar c = slope(sq, v, w);
  for (auto _ : state) {
    Scalar value = futaki(sq, v, w, diag, c);
    benchmark::DoNotOptimize(value.value);
  }
}
BENCHMARK(BM_FutakiSquarePL);

void BM_GaussInterior(benchmark::State& state) {
  Polytope sq = unit_square();
  int order = static_cast<int>(state.range(0));
  for (auto _ : state) {
    double v = integrate_interior(
        sq, [](const std::vector<double>& p) { return std::exp(p[0] * p[1]); }, order);
    benchmark::DoNotOptimize(v);
  }
}
BENCHMARK(BM_GaussInterior)->Arg(8)->Arg(16)->Arg(32);

void BM_PBundleReport(benchmark::State& state) {
  AdmissibleData data = AdmissibleData::create(
      {BundleFactor::make(1, Rational(4), Rational(1), Rational(2))},
      WeightExpr::constant(1, Rational(1)), WeightExpr::constant(1, Rational(1)));
  for (auto _ : state) {
    StabilityReport report = stability_report(data);
    benchmark::DoNotOptimize(report.verdict.positive);
  }
}
BENCHMARK(BM_PBundleReport);

void BM_SturmCertificate(benchmark::State& state) {
  AdmissibleData data = AdmissibleData::create(
      {BundleFactor::make(1, Rational(4), Rational(1), Rational(2))},
      WeightExpr::constant(1, Rational(1)), WeightExpr::constant(1, Rational(1)));
  WExtCoefficients wext = solve_w_ext_ode(data);
  ThetaSolution sol = solve_theta(data, wext);
  for (auto _ : state) {
    PositivityVerdict verdict = check_positivity(data, sol);
    benchmark::DoNotOptimize(verdict.positive);
  }
}
BENCHMARK(BM_SturmCertificate);

}  // namespace

BENCHMARK_MAIN();
