#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <limits>

#include "minmax/errors.hpp"
#include "minmax/problems.hpp"

using namespace minmax;

namespace {

ProblemSpec spec_of(int id, std::size_t d, double b = 1.0) {
    ProblemSpec s;
    s.id = static_cast<ProblemId>(id);
    s.dx = d;
    s.dy = d;
    s.b = b;
    return s;
}

struct GridMax {
    double value;
    double tolerance;
};

// Max of f(x, .) over a regular grid on the y box, with a tolerance from the
// largest slope seen between neighbouring grid points: the true maximizer
// lies within half a cell of some grid point in every coordinate.
GridMax grid_max(const Problem& p, const Vector& x, int g) {
    const std::size_t dy = p.dy();
    const double by = p.by();
    const double h = 2.0 * by / (g - 1);
    auto coord = [&](int k) { return k == g - 1 ? by : -by + h * k; };
    Vector y(dy);
    double best = -std::numeric_limits<double>::infinity();
    double slope = 0.0;
    std::size_t total = 1;
    for (std::size_t i = 0; i < dy; ++i) total *= static_cast<std::size_t>(g);
    for (std::size_t flat = 0; flat < total; ++flat) {
        std::size_t r = flat;
        std::vector<int> k(dy);
        for (std::size_t i = 0; i < dy; ++i) {
            k[i] = static_cast<int>(r % g);
            r /= g;
            y[i] = coord(k[i]);
        }
        const double v = p.value(x, y);
        best = std::max(best, v);
        for (std::size_t i = 0; i < dy; ++i) {
            if (k[i] + 1 >= g) continue;
            Vector n = y;
            n[i] = coord(k[i] + 1);
            slope = std::max(slope, std::abs(p.value(x, n) - v) / h);
        }
    }
    return {best, slope * h * static_cast<double>(dy) + 1e-12};
}

} // namespace

TEST_CASE("evaluate examples") {
    FcallCounter counter;
    const Problem f5(spec_of(5, 1));
    const Vector zero{0.0}, one{1.0};
    CHECK(f5.evaluate(zero, zero, counter) == 0.0);
    CHECK(f5.evaluate(one, one, counter) == doctest::Approx(1.0));
    CHECK(counter.count() == 2);

    const Problem f1(spec_of(1, 2));
    const Vector x{1.0, 2.0}, y{3.0, 4.0};
    CHECK(f1.evaluate(x, y, counter) == doctest::Approx(11.0));
    CHECK(counter.count() == 3);

    const Vector bad{1.0, 2.0, 3.0};
    CHECK_THROWS_AS(f1.evaluate(bad, y, counter), InvalidInput);
    CHECK_THROWS_AS(f1.evaluate(x, bad, counter), InvalidInput);
}

TEST_CASE("worst scenario examples") {
    const Problem f8(spec_of(8, 1));
    const Vector half{0.5};
    CHECK(f8.worst_scenario(half)[0] == 0.0);

    const Problem f5(spec_of(5, 1));
    CHECK(f5.worst_scenario(half)[0] == doctest::Approx(0.5));
    const Vector ten{10.0};
    CHECK(f5.worst_scenario(ten)[0] == doctest::Approx(3.0));

    const Problem f7(spec_of(7, 2));
    const Vector origin{0.0, 0.0};
    CHECK(f7.worst_scenario(origin) == origin);

    // sign(0) = +1 ties
    const Problem f4(spec_of(4, 2));
    CHECK(f4.worst_scenario(origin)[0] == 3.0);
}

TEST_CASE("worst case value examples") {
    for (int id = 1; id <= 11; ++id) {
        if (id == 3 || id == 9) continue;
        const Problem p(spec_of(id, 4));
        const Vector zero(4, 0.0);
        CHECK(p.optimum().x_star == zero);
    }
    const Problem f5(spec_of(5, 3));
    CHECK(f5.worst_case_value(Vector(3, 0.0)) == 0.0);

    ProblemSpec s = spec_of(5, 1);
    s.bounded = false;
    const Problem f5u(s);
    const Vector half{0.5};
    CHECK(f5u.worst_case_value(half) == doctest::Approx(0.25));
    CHECK(f5u.worst_case_value(half) == doctest::Approx((1.0 + 1.0) / 2.0 * 0.25));
}

TEST_CASE("f9 worst case matches a 201^3 grid") {
    ProblemSpec s = spec_of(9, 3);
    const Problem p(s);
    Rng rng(4);
    for (int t = 0; t < 3; ++t) {
        const Vector x = p.x_domain().sample_uniform(rng);
        const auto g = grid_max(p, x, 201);
        CHECK(p.worst_case_value(x) >= g.value - 1e-12);
        CHECK(p.worst_case_value(x) - g.value <= g.tolerance);
    }
}

TEST_CASE("optimum examples") {
    const Problem f5(spec_of(5, 20));
    CHECK(f5.optimum().F_star == 0.0);
    const Problem f2(spec_of(2, 20));
    CHECK(f2.optimum().F_star == 0.0);

    const Problem f9(spec_of(9, 20));
    const auto& xs = f9.optimum().x_star;
    for (std::size_t i = 0; i < 20; ++i) CHECK(xs[i] == doctest::Approx(i < 3 ? -std::sinh(1.0) : 0.0));

    const Problem f9s(spec_of(9, 2));
    const auto g = grid_max(f9s, f9s.optimum().x_star, 401);
    CHECK(std::abs(f9s.optimum().F_star - g.value) <= g.tolerance);

    const Problem f3(spec_of(3, 5, 2.0));
    CHECK(f3.alpha() == doctest::Approx(-0.7 * 2.0));
    for (double v : f3.optimum().x_star) CHECK(v == doctest::Approx(-0.7));
}

TEST_CASE("brute force examples") {
    const Problem f5(spec_of(5, 1));
    const Vector zero{0.0};
    CHECK(f5.brute_force_worst_case(zero, 11) == 0.0);

    const Problem f4(spec_of(4, 1));
    const Vector half{0.5};
    CHECK(f4.brute_force_worst_case(half, 7) == doctest::Approx(6.125));

    const Problem f8(spec_of(8, 1));
    const Vector two{2.0};
    CHECK(f8.brute_force_worst_case(two, 201) == f8.worst_case_value(two));

    const Problem big(spec_of(5, 4));
    CHECK_THROWS_AS(big.brute_force_worst_case(Vector(4, 0.0), 3), Unsupported);
}

TEST_CASE("dominance: F(x) bounds f(x, y) on the domain") {
    Rng rng(17);
    for (int id = 1; id <= 11; ++id) {
        const Problem p(spec_of(id, 5));
        for (int t = 0; t < 1000; ++t) {
            const Vector x = p.x_domain().sample_uniform(rng);
            const Vector y = p.y_domain().sample_uniform(rng);
            CHECK(p.worst_case_value(x) >= p.value(x, y) - 1e-12);
        }
    }
}

TEST_CASE("oracle agreement with grid brute force at d <= 2") {
    Rng rng(23);
    for (int id = 1; id <= 11; ++id) {
        for (std::size_t d : {1u, 2u}) {
            const Problem p(spec_of(id, d));
            const int g = 401;
            const int n_x = d == 1 ? 200 : 30;
            for (int t = 0; t < n_x; ++t) {
                const Vector x = p.x_domain().sample_uniform(rng);
                const auto grid = grid_max(p, x, g);
                const double wc = p.worst_case_value(x);
                CAPTURE(id);
                CAPTURE(d);
                CHECK(wc >= grid.value - 1e-12);
                CHECK(wc - grid.value <= grid.tolerance);
                CHECK(p.brute_force_worst_case(x, g) == doctest::Approx(grid.value).epsilon(1e-12));
            }
        }
    }
}

TEST_CASE("optimality: F(x) >= F* on random points") {
    Rng rng(29);
    for (int id = 1; id <= 11; ++id) {
        for (std::size_t d : {1u, 2u}) {
            const Problem p(spec_of(id, d));
            for (int t = 0; t < 200; ++t) {
                const Vector x = p.x_domain().sample_uniform(rng);
                CHECK(p.worst_case_value(x) >= p.optimum().F_star - 1e-12);
            }
        }
    }
}

TEST_CASE("tie choices at z_i = 0 give the same value for f1-f4") {
    Rng rng(31);
    for (int id = 1; id <= 4; ++id) {
        const Problem p(spec_of(id, 3));
        for (int t = 0; t < 50; ++t) {
            Vector x = p.x_domain().sample_uniform(rng);
            x[1] = 0.0;
            Vector y = p.worst_scenario(x);
            const double a = p.value(x, y);
            y[1] = -y[1];
            CHECK(std::abs(p.value(x, y) - a) <= 1e-14 * std::max(1.0, std::abs(a)));
        }
    }
}

TEST_CASE("categories") {
    CHECK(Problem(spec_of(1, 2)).category() == SaddleCategory::W);
    CHECK(Problem(spec_of(2, 2)).category() == SaddleCategory::W);
    CHECK(Problem(spec_of(4, 2)).category() == SaddleCategory::N);
    CHECK(Problem(spec_of(9, 2)).category() == SaddleCategory::N);
    CHECK(Problem(spec_of(10, 2)).category() == SaddleCategory::N);
    CHECK(Problem(spec_of(8, 2)).category() == SaddleCategory::S);
}

TEST_CASE("unsupported and invalid specs") {
    ProblemSpec band3 = spec_of(3, 2);
    band3.matrix = MatrixKind::Band;
    band3.dy = 3;
    CHECK_THROWS_AS(Problem{band3}, Unsupported);

    CHECK_THROWS_AS(Problem{spec_of(10, 2, 2.0)}, Unsupported);

    ProblemSpec unb = spec_of(1, 2);
    unb.bounded = false;
    CHECK_THROWS_AS(Problem{unb}, Unsupported);

    ProblemSpec f11 = spec_of(11, 2);
    f11.matrix = MatrixKind::Band;
    f11.dy = 3;
    CHECK_THROWS_AS(Problem{f11}, Unsupported);

    ProblemSpec diag_mismatch = spec_of(5, 2);
    diag_mismatch.dy = 3;
    CHECK_THROWS_AS(Problem{diag_mismatch}, InvalidInput);

    ProblemSpec neg = spec_of(5, 2);
    neg.by = -1.0;
    CHECK_THROWS_AS(Problem{neg}, InvalidInput);

    CHECK_THROWS_AS(parse_problem_id("f12"), InvalidInput);
    CHECK(parse_problem_id("f7") == ProblemId::F7);
}

TEST_CASE("band interaction matrix layout") {
    const auto b = InteractionMatrix::band(2, 4, 2.0);
    CHECK(b.bandwidth() == 3);
    const Matrix m = b.dense();
    for (std::size_t i = 0; i < 2; ++i)
        for (std::size_t j = 0; j < 4; ++j) CHECK(m(i, j) == ((j >= i && j < i + 3) ? 2.0 : 0.0));

    const Vector x{1.0, -1.0};
    Vector z(4);
    b.transpose_times(x, z);
    const Vector expect = m.transposed().multiply(x);
    CHECK(z == expect);

    ProblemSpec s = spec_of(5, 2);
    s.matrix = MatrixKind::Band;
    s.dy = 4;
    const Problem p(s);
    Rng rng(2);
    for (int t = 0; t < 100; ++t) {
        const Vector xx = p.x_domain().sample_uniform(rng);
        const Vector yy = p.y_domain().sample_uniform(rng);
        CHECK(p.worst_case_value(xx) >= p.value(xx, yy) - 1e-12);
    }
}
