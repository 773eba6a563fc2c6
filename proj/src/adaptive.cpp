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

#include "pema/adaptive.hpp"

#include <algorithm>
#include <sstream>
#include <stdexcept>

namespace pema::sgd {

namespace {

template <class Getter>
std::vector<double> collect(const std::vector<TraceRecord>& records, std::size_t from, Getter get) {
    std::vector<double> out;
    for (std::size_t i = from; i < records.size(); ++i) {
        const std::optional<double> v = get(records[i]);
        if (v) out.push_back(*v);
    }
    return out;
}

}  // namespace

std::vector<double> AdaptiveTrace::g_tilde_series(std::size_t from) const {
    return collect(records, from, [](const TraceRecord& r) { return std::optional<double>(r.g_tilde); });
}

std::vector<double> AdaptiveTrace::zeta_series(std::size_t from) const {
    return collect(records, from, [](const TraceRecord& r) { return r.zeta; });
}

std::vector<double> AdaptiveTrace::alpha_suggested_series(std::size_t from) const {
    return collect(records, from, [](const TraceRecord& r) { return r.alpha_suggested; });
}

AdaptiveTrace run_adaptive_trace(const QuadraticSop& sop, double alpha, std::uint64_t n_iters,
                                 const AveragerSpec& averager, const std::optional<Vector>& x0, std::uint64_t seed,
                                 double L_hat, const TraceOptions& options) {
    if (!(alpha > 0.0)) throw std::invalid_argument("run_adaptive_trace: alpha must be > 0");
    if (!(L_hat > 0.0)) throw std::invalid_argument("run_adaptive_trace: L_hat must be > 0");
    if (n_iters < 2) throw std::invalid_argument("run_adaptive_trace: n_iters must be >= 2");

    AdaptiveTrace trace;
    trace.averager = averager;
    trace.alpha = alpha;
    trace.L_hat = L_hat;
    if (alpha * L_hat > 1.0) {
        std::ostringstream msg;
        msg << "step size " << alpha << " exceeds 1/L_hat = " << 1.0 / L_hat;
        trace.warnings.push_back(msg.str());
    }

    Rng rng(seed);
    Vector x;
    if (x0) {
        if (static_cast<std::size_t>(x0->size()) != sop.dim())
            throw std::invalid_argument("run_adaptive_trace: x0 has the wrong dimension");
        x = *x0;
    } else {
        x.resize(static_cast<Eigen::Index>(sop.dim()));
        for (Eigen::Index i = 0; i < x.size(); ++i) x(i) = rng.normal();
    }

    Averager g_avg(averager);
    Averager sigma_avg(averager);
    trace.records.reserve(n_iters);

    SopInstance previous;
    SopInstance current = sop.sample_instance(rng);
    for (std::uint64_t k = 1; k <= n_iters; ++k) {
        TraceRecord rec;
        rec.k = k;
        if (options.keep_iterates) rec.x = x;

        if (k >= 2) {
            const double sigma_obs = (value(current, x) - value(previous, x)) / alpha;
            sigma_avg.update(sigma_obs);
            rec.sigma_tilde = sigma_obs;
        }
        const Vector g = grad(current, x);
        rec.g_tilde = g.squaredNorm();
        g_avg.update(rec.g_tilde);
        rec.g_hat = g_avg.estimate();

        if (!sigma_avg.empty()) {
            rec.sigma_hat = sigma_avg.estimate();
            if (rec.g_hat > 0.0) {
                const double zeta = 1.0 - *rec.sigma_hat / rec.g_hat;
                rec.zeta_raw = zeta;
                rec.zeta = std::clamp(zeta, 0.0, 1.0);
                rec.alpha_suggested = *rec.zeta / L_hat;
            }
        }
        trace.records.push_back(std::move(rec));

        x -= alpha * g;
        previous = std::move(current);
        current = sop.sample_instance(rng);
    }
    return trace;
}

}  // namespace pema::sgd
