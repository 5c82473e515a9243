#include <doctest.h>

#include <cmath>

#include "langsim/linalg.hpp"
#include "langsim/lyapunov.hpp"
#include "langsim/problems.hpp"
#include "langsim/rng.hpp"

using namespace langsim;

namespace {

SymMatrix random_spd(int d, RngStream& rng, double ridge = 0.0) {
    std::vector<double> b(static_cast<std::size_t>(d) * d);
    for (auto& v : b) v = rng.normal();
    SymMatrix s(d);
    for (int i = 0; i < d; ++i)
        for (int j = 0; j <= i; ++j) {
            double acc = 0.0;
            for (int k = 0; k < d; ++k)
                acc += b[static_cast<std::size_t>(i) * d + k] * b[static_cast<std::size_t>(j) * d + k];
            s.at(i, j) = acc + (i == j ? ridge : 0.0);
        }
    return s;
}

double frob(const SymMatrix& m) { return m.frob_norm(); }

}  // namespace

TEST_CASE("psd_sqrt of identity and diagonal") {
    SymMatrix i3 = SymMatrix::identity(3);
    SymMatrix r = psd_sqrt(i3, 1e-12);
    CHECK(frob(r - i3) < 1e-12);

    SymMatrix d = SymMatrix::diagonal({4.0, 9.0});
    SymMatrix rd = psd_sqrt(d, 1e-12);
    CHECK(rd.at(0, 0) == doctest::Approx(2.0).epsilon(1e-12));
    CHECK(rd.at(1, 1) == doctest::Approx(3.0).epsilon(1e-12));
    CHECK(std::abs(rd.at(0, 1)) < 1e-12);
}

TEST_CASE("psd_sqrt reconstructs random Gram matrices") {
    RngStream rng(2, 0, 0);
    for (int t = 0; t < 50; ++t) {
        SymMatrix g = random_spd(5, rng);
        SymMatrix a = psd_sqrt(g, default_psd_tol(g));
        CHECK(frob(a.square() - g) / frob(g) <= 1e-10);
    }
}

TEST_CASE("psd_sqrt rejects indefinite input and clamps slight negatives") {
    CHECK_THROWS_AS(psd_sqrt(SymMatrix::diagonal({1.0, -1.0}), 1e-10), NotPSD);
    SymMatrix nearly = SymMatrix::diagonal({1.0, -1e-14});
    SymMatrix r = psd_sqrt(nearly, 1e-10);
    CHECK(r.at(1, 1) == 0.0);
}

TEST_CASE("psd_sqrt is idempotent-consistent") {
    RngStream rng(3, 0, 0);
    for (int t = 0; t < 25; ++t) {
        SymMatrix g = random_spd(4, rng, 0.1);
        SymMatrix a = psd_sqrt(g);
        SymMatrix again = psd_sqrt(a.square());
        CHECK(frob(again - a) / std::max(1.0, frob(a)) < 1e-8);
    }
}

TEST_CASE("diffusion_remainder examples") {
    SymMatrix m2 = SymMatrix::identity(2) * 2.0;
    SymMatrix n = diffusion_remainder(m2, 1.0);
    CHECK(n.at(0, 0) == doctest::Approx(std::sqrt(3.0)).epsilon(1e-12));
    CHECK(n.at(1, 1) == doctest::Approx(std::sqrt(3.0)).epsilon(1e-12));
    CHECK(std::abs(n.at(0, 1)) < 1e-12);

    SymMatrix d = SymMatrix::diagonal({2.0, 4.0});
    SymMatrix nd = diffusion_remainder(d, 1.0);
    CHECK(nd.at(0, 0) == doctest::Approx(std::sqrt(3.0)).epsilon(1e-12));
    CHECK(nd.at(1, 1) == doctest::Approx(std::sqrt(15.0)).epsilon(1e-12));

    CHECK_THROWS_AS(diffusion_remainder(SymMatrix::identity(2) * 1.5, 1.0), FloorViolated);
}

TEST_CASE("diffusion_remainder satisfies N^2 + c^2 I = M^2 and trace bound") {
    RngStream rng(4, 0, 0);
    for (int t = 0; t < 25; ++t) {
        SymMatrix m = random_spd(4, rng, 3.0);  // ridge keeps min eigenvalue comfortably above 2c
        double c = 0.5;
        SymMatrix n = diffusion_remainder(m, c);
        SymMatrix lhs = n.square() + SymMatrix::identity(4) * (c * c);
        SymMatrix m2 = m.square();
        CHECK(frob(lhs - m2) / frob(m2) < 1e-9);
        CHECK(n.square().trace() <= m2.trace() + 1e-12);
    }
}

TEST_CASE("remainder field is L_N-Lipschitz on the 2d builtin") {
    ProblemSpec spec = builtin_sine_2d();
    DerivedConstants dc = derive_constants(spec.params);
    RngStream rng(5, 0, 0);
    for (int t = 0; t < 200; ++t) {
        Vec x = rng.normal_vec(2), y = rng.normal_vec(2);
        SymMatrix nx = diffusion_remainder(spec.diffusion_M(x), spec.params.c_m);
        SymMatrix ny = diffusion_remainder(spec.diffusion_M(y), spec.params.c_m);
        SymMatrix d = nx - ny;
        double lhs = d.square().trace();
        double sep2 = dot(sub(x, y), sub(x, y));
        CHECK(lhs <= dc.L_N * dc.L_N * sep2 + 1e-9);
    }
}

TEST_CASE("sqrt trace inequality examples") {
    SqrtTraceCheck same = check_sqrt_trace_inequality(SymMatrix::identity(2), SymMatrix::identity(2));
    CHECK(same.lhs == doctest::Approx(0.0).epsilon(1e-14));
    CHECK(same.rhs == doctest::Approx(0.0).epsilon(1e-14));
    CHECK(same.holds);

    SymMatrix a1 = SymMatrix::diagonal({4.0});
    SymMatrix b1 = SymMatrix::diagonal({1.0});
    SqrtTraceCheck c = check_sqrt_trace_inequality(a1, b1);
    CHECK(c.lhs == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(c.rhs == doctest::Approx(2.25).epsilon(1e-12));
    CHECK(c.holds);
}

TEST_CASE("sqrt trace inequality holds on random SPD pairs") {
    RngStream rng(6, 0, 0);
    for (int t = 0; t < 1000; ++t) {
        int d = 1 + static_cast<int>(rng.uniform_below(6));
        SymMatrix a = random_spd(d, rng, 0.05);
        SymMatrix b = random_spd(d, rng, 0.05);
        CHECK(check_sqrt_trace_inequality(a, b).holds);
    }
}
