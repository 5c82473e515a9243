#include <doctest.h>

#include <cmath>

#include "langsim/problems.hpp"
#include "langsim/sgdnoise.hpp"

using namespace langsim;

TEST_CASE("worked 1d example matches its reference values") {
    ProblemSpec spec = builtin_1d_example();
    CHECK(spec.value_U(Vec{-2.0}) == doctest::Approx(-1.0).epsilon(1e-14));
    CHECK(spec.value_U(Vec{8.0}) == doctest::Approx(-16.0).epsilon(1e-14));
    CHECK(spec.diffusion_M(Vec{0.0}).at(0, 0) == doctest::Approx(1.0).epsilon(1e-14));
    CHECK(spec.grad_U(Vec{0.0})[0] == 0.0);

    // branch joints agree and the gradient is continuous there
    for (double j : {-1.0, 4.0}) {
        double lo = spec.value_U(Vec{j - 1e-9});
        double hi = spec.value_U(Vec{j + 1e-9});
        CHECK(std::abs(lo - hi) < 1e-8);
        CHECK(std::abs(spec.grad_U(Vec{j - 1e-9})[0] - spec.grad_U(Vec{j + 1e-9})[0]) < 1e-8);
        CHECK(std::abs(spec.value_U(Vec{j}) - spec.value_U(Vec{j - 1e-12})) < 1e-11);
    }

    // outer branches of M win at the boundaries; the floor holds inside
    CHECK(spec.diffusion_M(Vec{-2.0}).at(0, 0) == 1.0);
    CHECK(spec.diffusion_M(Vec{8.0}).at(0, 0) == 6.0);
    CHECK(spec.diffusion_M(Vec{-1.99}).at(0, 0) == doctest::Approx(0.05).epsilon(1e-14));
    CHECK(builtin_1d_example(0.2).diffusion_M(Vec{-1.8}).at(0, 0) == doctest::Approx(0.2).epsilon(1e-14));
}

TEST_CASE("finite-sum barrier and degenerate cases") {
    // single zero component, barrier inactive inside the ball
    FiniteSumObjective obj;
    obj.dim = 2;
    obj.barrier = {4.0, 2.0};
    obj.comp_grad_bound = 0.0;
    obj.comp_lip_bound = 1e-9;
    obj.components.push_back({[](const Vec&) { return 0.0; },
                              [](const Vec& w) { return Vec(w.size(), 0.0); }});
    ProblemSpec spec = finite_sum_problem(obj, 0.01, 1);
    CHECK(norm2(spec.grad_U(Vec{0.0, 0.0})) == 0.0);
    CHECK(norm2(spec.grad_U(Vec{0.5, 0.5})) == 0.0);  // inside radius R/2
    CHECK(norm2(spec.grad_U(Vec{3.0, 0.0})) > 0.0);

    // two identical components: the sampled gradient always equals the mean
    FiniteSumObjective twin = obj;
    twin.components.push_back(twin.components[0]);
    RngStream rng(3, 0, 0);
    for (int t = 0; t < 32; ++t) {
        Vec xi = finite_sum_problem(twin, 0.01, 1).noise_xi(Vec{0.3, -0.2}, rng);
        CHECK(norm2(xi) == 0.0);
    }
}

TEST_CASE("four linear components: sampled covariance matches enumeration") {
    FiniteSumObjective obj = make_linear_objective(2, 4, {4.0, 2.0}, 17);
    Vec w{0.1, -0.2};
    SymMatrix h_exact = exact_H(w, obj);
    RngStream rng(5, 0, 0);
    SymMatrix h_sample = estimate_H(w, obj, 200000, rng);
    for (int i = 0; i < 2; ++i)
        for (int j = 0; j < 2; ++j)
            CHECK(h_sample.at(i, j) == doctest::Approx(h_exact.at(i, j)).epsilon(0.05));
}

TEST_CASE("barrier precondition m >= 4 L_R is enforced") {
    FiniteSumObjective obj = make_logistic_objective(2, 16, {0.1, 2.0}, 3);
    CHECK_THROWS_AS(finite_sum_problem(obj, 0.01, 1), ConstraintViolation);
}

TEST_CASE("noise oracle is mean zero") {
    FiniteSumObjective obj = make_logistic_objective(2, 32, {1.2, 2.0}, 7);
    center_objective(obj);
    ProblemSpec spec = finite_sum_problem(obj, 0.01, 4);
    Vec w{0.2, 0.1};
    RngStream rng(9, 0, 0);
    Vec mean(2, 0.0);
    const int n = 10000;
    for (int t = 0; t < n; ++t) axpy(1.0 / n, spec.noise_xi(w, rng), mean);
    CHECK(norm2(mean) <= 5.0 * spec.params.beta / std::sqrt(static_cast<double>(n)));
}

TEST_CASE("centering drives the gradient at the origin to zero") {
    FiniteSumObjective obj = make_logistic_objective(2, 64, {1.2, 2.0}, 21);
    center_objective(obj);
    CHECK(norm2(obj.grad(Vec{0.0, 0.0})) <= 1e-8);
}

TEST_CASE("every component family is gradient-consistent with its value") {
    Barrier barrier{1.2, 2.0};
    FiniteSumObjective objs[] = {make_linear_objective(2, 8, barrier, 5),
                                 make_logistic_objective(2, 8, barrier, 5),
                                 make_quartic_objective(2, 8, barrier, 5)};
    RngStream rng(6, 0, 0);
    const double step = 1e-6;
    for (auto& obj : objs) {
        for (int t = 0; t < 20; ++t) {
            Vec w = rng.normal_vec(2);
            Vec g = obj.grad(w);
            for (int j = 0; j < 2; ++j) {
                Vec wp = w, wm = w;
                wp[j] += step;
                wm[j] -= step;
                double fd = (obj.value(wp) - obj.value(wm)) / (2.0 * step);
                CHECK(fd == doctest::Approx(g[j]).epsilon(1e-5));
            }
        }
    }
}

TEST_CASE("quartic objective casts into a usable finite-sum problem") {
    FiniteSumObjective obj = make_quartic_objective(2, 32, {12.0, 2.0}, 13);
    center_objective(obj);
    CHECK(norm2(obj.grad(Vec{0.0, 0.0})) <= 1e-8);
    ProblemSpec spec = finite_sum_problem(obj, 0.01, 4);
    RngStream rng(14, 0, 0);
    Vec xi = spec.noise_xi(Vec{0.3, -0.1}, rng);
    CHECK(norm2(xi) <= spec.params.beta);
    EigenDecomposition e = eigen_sym(spec.diffusion_M(Vec{0.3, -0.1}));
    CHECK(e.values.front() >= -1e-12);
}

TEST_CASE("audit passes on honest constants and flags dishonest ones") {
    ProblemSpec good = builtin_quadratic(2);
    AuditReport rep = audit_assumptions(good, 2000, 3.0, 31);
    CHECK(!rep.grad0_warning);
    CHECK(rep.all_pass());

    ProblemSpec lying = good;
    lying.params.L = 0.5;
    AuditReport rep2 = audit_assumptions(lying, 2000, 3.0, 31);
    bool lips_failed = false;
    for (const auto& c : rep2.checks)
        if (c.id == "grad_lipschitz") lips_failed = !c.pass;
    CHECK(lips_failed);

    ProblemSpec floor_liar = builtin_1d_example();
    floor_liar.params.c_m = 0.6;
    AuditReport rep3 = audit_assumptions(floor_liar, 2000, 5.0, 31);
    bool eig_failed = false;
    for (const auto& c : rep3.checks)
        if (c.id == "diffusion_floor") eig_failed = !c.pass;
    CHECK(eig_failed);
}

TEST_CASE("audit input contract") {
    CHECK_THROWS_AS(audit_assumptions(builtin_quadratic(1), 1, 1.0, 0), ConstraintViolation);
}

TEST_CASE("builtin parameter claims survive a large audit") {
    struct Case {
        ProblemSpec spec;
        double radius;
    };
    for (const Case& tc : {Case{builtin_double_well_1d(), 4.0}, Case{builtin_sine_2d(), 4.0},
                           Case{builtin_rademacher_1d(), 4.0}, Case{builtin_quadratic(2), 3.0},
                           Case{builtin_1d_example(), 12.0}}) {
        AuditReport rep = audit_assumptions(tc.spec, 100000, tc.radius, 77);
        INFO("problem: ", tc.spec.name);
        for (const auto& c : rep.checks) {
            INFO(c.id, " worst=", c.worst, " threshold=", c.threshold);
            CHECK(c.pass);
        }
    }
}
