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

#include "pema/averager.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <sstream>
#include <stdexcept>

#include "pema/scheme.hpp"

namespace pema {

namespace {

std::string shortest(double v) {
    char buf[32];
    auto res = std::to_chars(buf, buf + sizeof(buf), v);
    return std::string(buf, res.ptr);
}

double parse_number(const std::string& text, const std::string& what) {
    double v = 0.0;
    const char* first = text.data();
    const char* last = text.data() + text.size();
    auto res = std::from_chars(first, last, v);
    if (res.ec != std::errc{} || res.ptr != last) throw std::invalid_argument("cannot parse " + what + " '" + text + "'");
    return v;
}

}  // namespace

void AveragerSpec::validate() const {
    switch (kind) {
        case AveragerKind::Arithmetic:
            return;
        case AveragerKind::Ema:
            if (!(gamma > 0.0 && gamma < 1.0)) {
                std::ostringstream msg;
                msg << "ema: gamma must lie in (0,1), got " << gamma;
                throw std::invalid_argument(msg.str());
            }
            return;
        case AveragerKind::Pema:
            if (!std::isfinite(p) || !(p > 0.0)) {
                std::ostringstream msg;
                msg << "pema: p must be positive, got " << p;
                throw std::invalid_argument(msg.str());
            }
            if (!unsafe_range && !(p > 0.5 && p <= 1.0)) {
                std::ostringstream msg;
                msg << "pema: p = " << p << " lies outside (1/2, 1]; set the unsafe-range flag to simulate it";
                throw std::invalid_argument(msg.str());
            }
            return;
    }
    throw std::invalid_argument("unknown averager kind");
}

std::string AveragerSpec::label() const {
    switch (kind) {
        case AveragerKind::Arithmetic:
            return "arithmetic";
        case AveragerKind::Ema:
            return "ema-" + shortest(gamma);
        case AveragerKind::Pema:
            return "pema-" + shortest(p);
    }
    return "unknown";
}

AveragerSpec AveragerSpec::parse(const std::string& text, bool unsafe_range) {
    if (text == "arithmetic" || text == "mean") return arithmetic();
    const auto sep = text.find_first_of("-:");
    if (sep == std::string::npos) throw std::invalid_argument("unknown averager '" + text + "'");
    const std::string name = text.substr(0, sep);
    const std::string value = text.substr(sep + 1);
    AveragerSpec spec;
    if (name == "ema") {
        spec = ema(parse_number(value, "ema gamma"));
    } else if (name == "pema") {
        spec = pema(parse_number(value, "pema p"), unsafe_range);
    } else {
        throw std::invalid_argument("unknown averager '" + text + "'");
    }
    spec.validate();
    return spec;
}

Averager::Averager(const AveragerSpec& spec) : spec_(spec) { spec_.validate(); }

double Averager::newest_weight(std::uint64_t n) const {
    if (n == 0) return 1.0;
    const double next = static_cast<double>(n + 1);
    switch (spec_.kind) {
        case AveragerKind::Arithmetic:
            return 1.0 / next;
        case AveragerKind::Ema:
            return 1.0 - spec_.gamma;
        case AveragerKind::Pema:
            return std::pow(next, -spec_.p);
    }
    return 1.0;
}

double Averager::mixing_factor(std::uint64_t n) const { return 1.0 - newest_weight(n); }

void Averager::update(double obs) {
    if (!std::isfinite(obs)) {
        std::ostringstream msg;
        msg << "averager " << spec_.label() << ": rejected non-finite observation " << obs << " at index "
            << count_ + 1;
        throw std::invalid_argument(msg.str());
    }
    // g est + (1 - g) obs, written so that equal inputs are a fixed point.
    estimate_ += newest_weight(count_) * (obs - estimate_);
    ++count_;
}

double Averager::estimate() const {
    if (count_ == 0) throw std::logic_error("averager " + spec_.label() + ": no observations");
    return estimate_;
}

Averager updated(Averager state, double obs) {
    state.update(obs);
    return state;
}

WeightProfile weight_profile(const AveragerSpec& spec, std::uint64_t n) {
    spec.validate();
    if (n == 0) throw std::invalid_argument("weight_profile: n must be >= 1");
    WeightProfile profile;
    profile.n = n;
    profile.weights.resize(n);
    auto& w = profile.weights;
    switch (spec.kind) {
        case AveragerKind::Arithmetic:
            std::fill(w.begin(), w.end(), 1.0 / static_cast<double>(n));
            break;
        case AveragerKind::Ema: {
            // est_0 = obs_1 folds the initialization mass into observation 1.
            const double g = spec.gamma;
            double tail = 1.0;  // gamma^{n-k}
            for (std::uint64_t k = n; k >= 2; --k) {
                w[k - 1] = (1.0 - g) * tail;
                tail *= g;
            }
            w[0] = tail;
            break;
        }
        case AveragerKind::Pema: {
            scheme::BetaSequence seq(spec.p);
            for (std::uint64_t k = 1; k <= n; ++k) {
                seq.advance();
                w[k - 1] = seq.log_beta();
            }
            const double log_lambda = seq.log_lambda();
            for (auto& x : w) x = std::exp(x - log_lambda);
            break;
        }
    }
    return profile;
}

double last_weight(const AveragerSpec& spec, std::uint64_t n) {
    spec.validate();
    if (n == 0) throw std::invalid_argument("last_weight: n must be >= 1");
    if (n == 1) return 1.0;
    switch (spec.kind) {
        case AveragerKind::Arithmetic:
            return 1.0 / static_cast<double>(n);
        case AveragerKind::Ema:
            return 1.0 - spec.gamma;
        case AveragerKind::Pema:
            return std::pow(static_cast<double>(n), -spec.p);
    }
    return 0.0;
}

}  // namespace pema
