#include <doctest.h>

#include <cmath>

#include "kawa/bourgain.hpp"
#include "kawa/error.hpp"
#include "support/oracles.hpp"

using namespace kawa;

namespace {

ProbeOptions small_probe() {
    ProbeOptions o;
    o.ensemble_size = 6;
    o.n_time = 32;
    o.n_space = 64;
    return o;
}

}  // namespace

TEST_CASE("Parseval at s = b = 0") {
    const SpaceTimeField f = probe_field(small_probe(), 3);
    const double l2 = oracle::rectangle_l2(f.values, f.dt, f.dx);
    for (int pad : {1, 2, 3}) {
        CHECK(weighted_spacetime_norm(f, SpaceTimeNorm::Xsb, 0.0, 0.0, pad) == doctest::Approx(l2).epsilon(1e-12));
    }
}

TEST_CASE("norms of the zero field vanish") {
    SpaceTimeField f;
    f.values = Field(8, 8);
    CHECK(weighted_spacetime_norm(f, SpaceTimeNorm::Ysb, 1.0, 0.3) == 0.0);
    CHECK(intersection_norm(f, 0.0, 0.45, 0.55) == 0.0);
}

TEST_CASE("weights at least one give norms at least L2") {
    const SpaceTimeField f = probe_field(small_probe(), 4);
    const double l2 = weighted_spacetime_norm(f, SpaceTimeNorm::Xsb, 0.0, 0.0);
    CHECK(weighted_spacetime_norm(f, SpaceTimeNorm::Xsb, 1.0, 0.45) >= l2);
    CHECK(weighted_spacetime_norm(f, SpaceTimeNorm::Ysb, 1.0, 0.45) >= l2);
    CHECK(intersection_norm(f, 0.0, 0.45, 0.55) >= weighted_spacetime_norm(f, SpaceTimeNorm::Dalpha, 0.0, 0.55));
}

TEST_CASE("bilinear ratio is symmetric and scale invariant") {
    const ProbeOptions o = small_probe();
    const SpaceTimeField u = probe_field(o, 1);
    SpaceTimeField v = probe_field(o, 2);
    const double r = bilinear_ratio(u, v, 0.0, 0.45, 0.55);
    CHECK(r == doctest::Approx(bilinear_ratio(v, u, 0.0, 0.45, 0.55)).epsilon(1e-12));
    for (std::size_t n = 0; n < v.values.rows(); ++n) {
        for (std::size_t j = 0; j < v.values.cols(); ++j) v.values(n, j) *= 7.0;
    }
    CHECK(r == doctest::Approx(bilinear_ratio(u, v, 0.0, 0.45, 0.55)).epsilon(1e-12));
}

TEST_CASE("bilinear factors must share a window") {
    const SpaceTimeField u = probe_field(small_probe(), 1);
    ProbeOptions other = small_probe();
    other.n_space = 32;
    CHECK_THROWS_AS(bilinear_ratio(u, probe_field(other, 1), 0.0, 0.45, 0.55), DimensionError);
}

TEST_CASE("probe parameter ranges") {
    ProbeOptions o = small_probe();
    o.b = 0.5;
    CHECK_THROWS_AS(bilinear_probe(o), DomainError);
    o = small_probe();
    o.alpha = 0.5;
    CHECK_THROWS_AS(bilinear_probe(o), DomainError);
    o = small_probe();
    o.s = -2.0;
    CHECK_THROWS_AS(bilinear_probe(o), DomainError);
}

TEST_CASE("probe is deterministic per seed") {
    const ProbeReport a = bilinear_probe(small_probe());
    const ProbeReport b = bilinear_probe(small_probe());
    CHECK(a.ratios == b.ratios);
    CHECK(a.empirical_only);
    CHECK(a.min <= a.median);
    CHECK(a.median <= a.max);
}

TEST_CASE("Z trace orders must lie in [0, 1]") {
    const SpaceTimeField f = probe_field(small_probe(), 5);
    CHECK_THROWS_AS(z_trace_diagnostics(f, 4.0), DomainError);
    const ZTraceReport z = z_trace_diagnostics(f, 0.0);
    CHECK(z.trace0 > 0.0);
    CHECK(z.trace1 > 0.0);
}
