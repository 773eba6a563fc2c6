// Copyright 2026 The pema Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     https://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <stdexcept>

#include "pema/averager.hpp"
#include "pema/rng.hpp"

using pema::Averager;
using pema::AveragerKind;
using pema::AveragerSpec;

namespace {

std::vector<AveragerSpec> all_kinds() {
    return {AveragerSpec::arithmetic(), AveragerSpec::ema(0.9), AveragerSpec::ema(0.99), AveragerSpec::pema(0.55),
            AveragerSpec::pema(0.75), AveragerSpec::pema(1.0)};
}

double rel_diff(double a, double b) { return std::abs(a - b) / std::max({1.0, std::abs(a), std::abs(b)}); }

}  // namespace

TEST_CASE("p-EMA with p = 0.75 on 1, 2, 3") {
    Averager avg(AveragerSpec::pema(0.75));
    avg.update(1.0);
    CHECK(avg.estimate() == 1.0);
    avg.update(2.0);
    CHECK(avg.estimate() == doctest::Approx(1.594603557501361).epsilon(1e-14));
    avg.update(3.0);
    CHECK(avg.estimate() == doctest::Approx(2.211138802790808).epsilon(1e-14));
}

TEST_CASE("first observation overwrites the estimate") {
    for (const auto& spec : all_kinds()) {
        Averager avg(spec);
        avg.update(-4.25);
        CHECK(avg.estimate() == -4.25);
        CHECK(avg.count() == 1);
    }
}

TEST_CASE("estimate before any update is an error") {
    Averager avg(AveragerSpec::ema(0.5));
    CHECK(avg.empty());
    CHECK_THROWS_AS(avg.estimate(), std::logic_error);
}

TEST_CASE("non-finite observations are rejected and leave the state alone") {
    Averager avg(AveragerSpec::pema(0.75));
    avg.update(2.0);
    CHECK_THROWS_AS(avg.update(std::numeric_limits<double>::quiet_NaN()), std::invalid_argument);
    CHECK_THROWS_AS(avg.update(std::numeric_limits<double>::infinity()), std::invalid_argument);
    CHECK(avg.count() == 1);
    CHECK(avg.estimate() == 2.0);
}

TEST_CASE("parameter validation") {
    CHECK_THROWS_AS(Averager(AveragerSpec::ema(0.0)), std::invalid_argument);
    CHECK_THROWS_AS(Averager(AveragerSpec::ema(1.0)), std::invalid_argument);
    CHECK_THROWS_AS(Averager(AveragerSpec::pema(0.5)), std::invalid_argument);
    CHECK_THROWS_AS(Averager(AveragerSpec::pema(1.2)), std::invalid_argument);
    CHECK_THROWS_AS(Averager(AveragerSpec::pema(0.0, true)), std::invalid_argument);
    CHECK_THROWS_AS(Averager(AveragerSpec::pema(std::nan(""), true)), std::invalid_argument);
    CHECK_NOTHROW(Averager(AveragerSpec::pema(1.5, true)));
    CHECK_NOTHROW(Averager(AveragerSpec::pema(0.3, true)));
    CHECK_NOTHROW(Averager(AveragerSpec::pema(1.0)));
    try {
        Averager bad(AveragerSpec::pema(1.2));
        FAIL("expected rejection");
    } catch (const std::invalid_argument& e) {
        CHECK(std::string(e.what()).find('p') != std::string::npos);
    }
}

TEST_CASE("labels round-trip through parse") {
    for (const auto& spec : all_kinds()) CHECK(AveragerSpec::parse(spec.label()) == spec);
    CHECK(AveragerSpec::parse("pema:0.75") == AveragerSpec::pema(0.75));
    CHECK(AveragerSpec::parse("mean").kind == AveragerKind::Arithmetic);
    CHECK(AveragerSpec::parse("pema-1.5", true).p == 1.5);
    CHECK_THROWS_AS(AveragerSpec::parse("pema-1.5"), std::invalid_argument);
    CHECK_THROWS_AS(AveragerSpec::parse("median"), std::invalid_argument);
    CHECK_THROWS_AS(AveragerSpec::parse("ema-x"), std::invalid_argument);
    CHECK_THROWS_AS(AveragerSpec::parse("ema-0.9junk"), std::invalid_argument);
}

TEST_CASE("mixing factors of the three kinds") {
    Averager a(AveragerSpec::arithmetic());
    Averager e(AveragerSpec::ema(0.9));
    Averager p(AveragerSpec::pema(0.75));
    for (std::uint64_t n = 1; n < 50; ++n) {
        CHECK(a.mixing_factor(n) == doctest::Approx(static_cast<double>(n) / (n + 1)).epsilon(1e-15));
        CHECK(e.mixing_factor(n) == doctest::Approx(0.9).epsilon(1e-15));
        CHECK(p.newest_weight(n) == doctest::Approx(std::pow(n + 1.0, -0.75)).epsilon(1e-15));
    }
}

TEST_CASE("p = 1 reproduces the arithmetic mean") {
    for (std::uint64_t seed = 1; seed <= 5; ++seed) {
        pema::Rng rng(seed);
        Averager p1(AveragerSpec::pema(1.0));
        Averager mean(AveragerSpec::arithmetic());
        double worst = 0.0;
        for (int i = 0; i < 20000; ++i) {
            const double x = rng.uniform(-3.0, 7.0);
            p1.update(x);
            mean.update(x);
            worst = std::max(worst, rel_diff(p1.estimate(), mean.estimate()));
        }
        CHECK(worst <= 1e-12);
    }
}

TEST_CASE("arithmetic averager equals the running sum divided by n") {
    pema::Rng rng(3);
    Averager mean(AveragerSpec::arithmetic());
    long double sum = 0.0L;
    for (int i = 1; i <= 5000; ++i) {
        const double x = rng.normal();
        sum += x;
        mean.update(x);
        CHECK(mean.estimate() == doctest::Approx(static_cast<double>(sum / i)).epsilon(1e-11));
    }
}

TEST_CASE("estimates stay inside the range of the observations") {
    for (const auto& spec : all_kinds()) {
        pema::Rng rng(11);
        Averager avg(spec);
        double lo = std::numeric_limits<double>::infinity();
        double hi = -lo;
        for (int i = 0; i < 5000; ++i) {
            const double x = rng.uniform(-1.0, 1.0) * (1 + i % 17);
            lo = std::min(lo, x);
            hi = std::max(hi, x);
            avg.update(x);
            REQUIRE(avg.estimate() >= lo);
            REQUIRE(avg.estimate() <= hi);
        }
    }
}

TEST_CASE("constant input is a fixed point") {
    for (const auto& spec : all_kinds()) {
        Averager avg(spec);
        for (int i = 0; i < 1000; ++i) avg.update(0.1);
        CHECK(avg.estimate() == 0.1);
    }
}

TEST_CASE("functional update matches in-place update") {
    Averager a(AveragerSpec::pema(0.8));
    Averager b(AveragerSpec::pema(0.8));
    for (double x : {1.0, -2.0, 0.5, 9.0}) {
        a.update(x);
        b = pema::updated(b, x);
    }
    CHECK(a.estimate() == b.estimate());
    const Averager before = a;
    const Averager after = pema::updated(a, 100.0);
    CHECK(a.estimate() == before.estimate());
    CHECK(after.count() == a.count() + 1);
}

TEST_CASE("weight profile after three p-EMA updates") {
    const auto prof = pema::weight_profile(AveragerSpec::pema(0.75), 3);
    REQUIRE(prof.weights.size() == 3);
    CHECK(prof.weights[0] == doctest::Approx(0.227552534860023).epsilon(1e-13));
    CHECK(prof.weights[1] == doctest::Approx(0.333756127489146).epsilon(1e-13));
    CHECK(prof.weights[2] == doctest::Approx(0.438691337650831).epsilon(1e-13));
    CHECK(prof.weights[2] == doctest::Approx(std::pow(3.0, -0.75)).epsilon(1e-14));
}

TEST_CASE("weight profiles sum to one and match the recursion") {
    const std::uint64_t n = 300;
    for (const auto& spec : all_kinds()) {
        const auto prof = pema::weight_profile(spec, n);
        REQUIRE(prof.weights.size() == n);
        const double total = std::accumulate(prof.weights.begin(), prof.weights.end(), 0.0);
        CHECK(total == doctest::Approx(1.0).epsilon(1e-12));
        for (std::uint64_t k : {std::uint64_t{1}, std::uint64_t{2}, std::uint64_t{17}, std::uint64_t{150}, n}) {
            Averager avg(spec);
            for (std::uint64_t i = 1; i <= n; ++i) avg.update(i == k ? 1.0 : 0.0);
            CHECK(std::abs(avg.estimate() - prof.weights[k - 1]) <= 1e-12);
        }
    }
}

TEST_CASE("EMA profile weights") {
    const double g = 0.9;
    const auto prof = pema::weight_profile(AveragerSpec::ema(g), 10);
    CHECK(prof.weights[0] == doctest::Approx(std::pow(g, 9)).epsilon(1e-14));
    for (int k = 2; k <= 10; ++k)
        CHECK(prof.weights[k - 1] == doctest::Approx((1 - g) * std::pow(g, 10 - k)).epsilon(1e-14));
}

TEST_CASE("last weight law") {
    for (double p : {0.55, 0.75, 0.95, 1.0}) {
        for (std::uint64_t n : {1ULL, 2ULL, 10ULL, 1000ULL, 123456ULL})
            CHECK(pema::last_weight(AveragerSpec::pema(p), n) == doctest::Approx(std::pow(double(n), -p)).epsilon(1e-12));
    }
    CHECK(pema::last_weight(AveragerSpec::arithmetic(), 8) == doctest::Approx(0.125));
    CHECK(pema::last_weight(AveragerSpec::ema(0.9), 8) == doctest::Approx(0.1));
    CHECK(pema::last_weight(AveragerSpec::ema(0.9), 1) == 1.0);
}

TEST_CASE("weight profile requires n >= 1") {
    CHECK_THROWS_AS(pema::weight_profile(AveragerSpec::arithmetic(), 0), std::invalid_argument);
}

TEST_CASE("p-EMA weights are increasing in k for p < 1") {
    const auto prof = pema::weight_profile(AveragerSpec::pema(0.75), 2000);
    CHECK(std::is_sorted(prof.weights.begin(), prof.weights.end(), std::less_equal<>()));
}
