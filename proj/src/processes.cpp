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

#include "pema/processes.hpp"

#include <cmath>
#include <sstream>
#include <stdexcept>

namespace pema::process {

namespace {

template <class... Ts>
struct overloaded : Ts... {
    using Ts::operator()...;
};
template <class... Ts>
overloaded(Ts...) -> overloaded<Ts...>;

void require_tail_index(double s) {
    if (!(s > 3.0) || !std::isfinite(s)) {
        std::ostringstream msg;
        msg << "heavy-tail index s must be a finite number > 3, got " << s;
        throw std::invalid_argument(msg.str());
    }
}

}  // namespace

double trend_function(double x) {
    const double r = x / 20.0;
    return std::exp(-std::pow(r, 6));
}

void ProcessSpec::validate() const {
    std::visit(overloaded{
                   [](const TrendNoise& t) {
                       if (t.n_points < 1) throw std::invalid_argument("trend: n_points must be >= 1");
                       if (!(t.grid_lo < t.grid_hi)) throw std::invalid_argument("trend: grid_lo must be < grid_hi");
                       if (!(t.noise_std >= 0.0) || !std::isfinite(t.noise_std))
                           throw std::invalid_argument("trend: noise_std must be finite and >= 0");
                   },
                   [](const Jump& j) {
                       if (!(j.q > 0.0 && j.q < 1.0)) throw std::invalid_argument("jump: q must lie in (0,1)");
                   },
                   [](const HeavyTail& h) { require_tail_index(h.s); },
                   [](const Rademacher&) {},
               },
               kind);
}

std::string ProcessSpec::name() const {
    return std::visit(overloaded{
                          [](const TrendNoise&) { return std::string("trend"); },
                          [](const Jump&) { return std::string("jump"); },
                          [](const HeavyTail&) { return std::string("heavy-tail"); },
                          [](const Rademacher&) { return std::string("rademacher"); },
                      },
                      kind);
}

ProcessStream::ProcessStream(ProcessSpec spec) : spec_(std::move(spec)), rng_(spec_.seed) { spec_.validate(); }

Sample ProcessStream::next() {
    const std::uint64_t i = emitted_++;
    return std::visit(
        overloaded{
            [&](const TrendNoise& t) {
                double x = t.grid_lo;
                if (i >= t.hold_prefix) {
                    const std::uint64_t j = i - t.hold_prefix;
                    if (j >= t.n_points) throw std::out_of_range("trend: grid exhausted");
                    if (t.n_points > 1)
                        x = t.grid_lo + (t.grid_hi - t.grid_lo) * static_cast<double>(j) /
                                            static_cast<double>(t.n_points - 1);
                }
                const double truth = trend_function(x);
                const double noisy = t.noise_std > 0.0 ? truth + t.noise_std * rng_.normal() : truth;
                return Sample{truth, noisy};
            },
            [&](const Jump& j) {
                if (i == 0)
                    jump_state_ = rng_.sign();
                else if (!rng_.bernoulli(j.q))
                    jump_state_ = -jump_state_;
                return Sample{std::nullopt, jump_state_};
            },
            [&](const HeavyTail& h) { return Sample{std::nullopt, sample_heavy_tail(h.s, rng_.uniform_open01())}; },
            [&](const Rademacher& r) {
                const double v = rng_.sign();
                return Sample{std::nullopt, i < r.forced_prefix ? 1.0 : v};
            },
        },
        spec_.kind);
}

std::vector<Sample> generate(const ProcessSpec& spec, std::uint64_t count) {
    ProcessStream stream(spec);
    std::vector<Sample> out;
    out.reserve(count);
    for (std::uint64_t i = 0; i < count; ++i) out.push_back(stream.next());
    return out;
}

namespace {

std::vector<double> observations(const ProcessSpec& spec, std::uint64_t count) {
    ProcessStream stream(spec);
    std::vector<double> out;
    out.reserve(count);
    for (std::uint64_t i = 0; i < count; ++i) out.push_back(stream.next().observation);
    return out;
}

}  // namespace

std::vector<Sample> gen_trend_noise(const TrendNoise& spec, std::uint64_t count, std::uint64_t seed) {
    if (count > spec.n_points + spec.hold_prefix) {
        std::ostringstream msg;
        msg << "trend: requested " << count << " samples from a grid of " << spec.n_points + spec.hold_prefix;
        throw std::invalid_argument(msg.str());
    }
    return generate(ProcessSpec{spec, seed}, count);
}

std::vector<double> gen_jump(double q, std::uint64_t count, std::uint64_t seed) {
    if (count < 1) throw std::invalid_argument("jump: count must be >= 1");
    return observations(ProcessSpec{Jump{q}, seed}, count);
}

std::vector<double> gen_heavy_tail(double s, std::uint64_t count, std::uint64_t seed) {
    return observations(ProcessSpec{HeavyTail{s}, seed}, count);
}

std::vector<double> gen_rademacher(std::uint64_t count, std::uint64_t seed, std::uint64_t forced_prefix) {
    return observations(ProcessSpec{Rademacher{forced_prefix}, seed}, count);
}

double sample_heavy_tail(double s, double u) {
    require_tail_index(s);
    if (!(u > 0.0 && u < 1.0)) {
        std::ostringstream msg;
        msg << "heavy-tail sampler: u must lie in (0,1), got " << u;
        throw std::invalid_argument(msg.str());
    }
    // log1p keeps resolution for u close to 0, where the result is close to 1.
    return std::exp(-std::log1p(-u) / (s - 1.0));
}

double heavy_tail_mean(double s) {
    require_tail_index(s);
    return (s - 1.0) / (s - 2.0);
}

double AutocorrEstimate::normalized(std::size_t m) const {
    if (m >= rho.size()) throw std::out_of_range("autocorrelation: lag beyond max_lag");
    if (rho[0] == 0.0) return 0.0;
    return rho[m] / rho[0];
}

AutocorrEstimate autocorrelation(std::span<const double> series, std::size_t max_lag) {
    const std::size_t n = series.size();
    if (n <= max_lag) {
        std::ostringstream msg;
        msg << "autocorrelation: series length " << n << " must exceed max_lag " << max_lag;
        throw std::invalid_argument(msg.str());
    }
    AutocorrEstimate est;
    est.max_lag = max_lag;
    double sum = 0.0;
    for (double x : series) sum += x;
    est.mean = sum / static_cast<double>(n);

    std::vector<double> centered(n);
    for (std::size_t i = 0; i < n; ++i) centered[i] = series[i] - est.mean;

    est.rho.assign(max_lag + 1, 0.0);
    for (std::size_t m = 0; m <= max_lag; ++m) {
        double acc = 0.0;
        for (std::size_t i = 0; i + m < n; ++i) acc += centered[i] * centered[i + m];
        est.rho[m] = acc / static_cast<double>(n);
    }
    return est;
}

}  // namespace pema::process
