#include <cmath>

#include "doctest.h"
#include "fpbandits/errors.hpp"
#include "fpbandits/links.hpp"
#include "fpbandits/rng.hpp"

using namespace fpbandits;

TEST_CASE("link constant triples") {
    const LinkSpec lin = LinkSpec::linear();
    CHECK(lin.lipschitz == 1.0);
    CHECK(lin.self_concordance == 0.0);
    const LinkSpec log = LinkSpec::logistic();
    CHECK(log.lipschitz == 0.25);
    CHECK(log.self_concordance == 1.0);
    const LinkSpec poi = LinkSpec::poisson();
    CHECK(poi.lipschitz == doctest::Approx(std::exp(1.0)).epsilon(1e-15));
    CHECK(poi.self_concordance == 1.0);
}

TEST_CASE("mu named values") {
    CHECK(mu(LinkSpec::logistic(), 0.0) == 0.5);
    CHECK(mu(LinkSpec::linear(), 0.37) == 0.37);
    CHECK(mu(LinkSpec::logistic(), 4.0) == doctest::Approx(0.98201379003790844).epsilon(1e-12));
    CHECK(mu(LinkSpec::logistic(), -700.0) > 0.0);  // overflow-safe branch
    CHECK(mu(LinkSpec::poisson(), 2.0) == doctest::Approx(std::exp(2.0)));
    CHECK_THROWS_AS(mu(LinkSpec::poisson(), 1000.0), OverflowError);
}

TEST_CASE("mu_dot named values and floor") {
    CHECK(mu_dot(LinkSpec::logistic(), 0.0) == 0.25);
    CHECK(mu_dot(LinkSpec::linear(), -3.2) == 1.0);
    CHECK(mu_dot(LinkSpec::logistic(), 4.0) ==
          doctest::Approx(0.017662706213291118).epsilon(1e-12));
    CHECK(mu_dot(LinkSpec::logistic(0.25), 4.0) == 0.25);
}

TEST_CASE("derivative matches central finite differences") {
    const double h = 1e-4;
    for (const LinkSpec& link : {LinkSpec::linear(), LinkSpec::logistic(), LinkSpec::poisson()}) {
        for (double z = -6.0; z <= 6.0; z += 0.25) {
            const double fd = (mu(link, z + h) - mu(link, z - h)) / (2.0 * h);
            // The truncation error scales with mu''' ~ mu_dot for the
            // exponential link, so the bound carries that factor.
            CHECK(std::abs(mu_dot(link, z) - fd) <= 10.0 * h * h * std::max(1.0, mu_dot(link, z)));
        }
    }
}

TEST_CASE("self-concordance |mu_ddot| <= M * mu_dot") {
    const double h = 1e-4;
    for (const LinkSpec& link : {LinkSpec::logistic(), LinkSpec::poisson()}) {
        for (double z = -6.0; z <= 6.0; z += 0.25) {
            const double second =
                (mu(link, z + h) - 2.0 * mu(link, z) + mu(link, z - h)) / (h * h);
            CHECK(std::abs(second) <= link.self_concordance * mu_dot(link, z) + 1e-3);
        }
    }
}

TEST_CASE("antiderivative derivative recovers mu") {
    const double h = 1e-5;
    for (const LinkSpec& link : {LinkSpec::linear(), LinkSpec::logistic(), LinkSpec::poisson()}) {
        for (double z : {-5.0, -1.3, 0.0, 0.7, 4.2}) {
            const double fd = (mu_antideriv(link, z + h) - mu_antideriv(link, z - h)) / (2.0 * h);
            CHECK(fd == doctest::Approx(mu(link, z)).epsilon(1e-6));
        }
    }
}

TEST_CASE("sample_reward edge cases") {
    RngStream rng(8);
    CHECK(sample_reward(LinkSpec::logistic(), 50.0, rng) == 1.0);
    CHECK(sample_reward(LinkSpec::linear(0.0), 2.0, rng) == 2.0);
    for (int i = 0; i < 100; ++i) {
        const double r = sample_reward(LinkSpec::logistic(), 0.3, rng);
        CHECK((r == 0.0 || r == 1.0));
    }
}

TEST_CASE("sample_reward empirical means match mu") {
    RngStream rng(123);
    const int n = 100000;
    struct Case {
        LinkSpec link;
        double z;
        double sd;  // reward standard deviation for the MC error bar
    };
    const Case cases[] = {{LinkSpec::logistic(), 0.0, 0.5},
                          {LinkSpec::logistic(), 1.3, 0.44},
                          {LinkSpec::linear(1.0), 0.4, 1.0},
                          {LinkSpec::poisson(), 0.8, std::sqrt(std::exp(0.8))}};
    for (const Case& c : cases) {
        double sum = 0.0;
        for (int i = 0; i < n; ++i) sum += sample_reward(c.link, c.z, rng);
        const double err = 4.0 * c.sd / std::sqrt(static_cast<double>(n));
        CHECK(std::abs(sum / n - mu(c.link, c.z)) <= err);
    }
}
