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

#include "pema/sop.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>
#include <stdexcept>

namespace pema::sgd {

namespace {

constexpr std::size_t kPdCheckSamples = 2000;
constexpr double kMaxNonPdFraction = 1e-3;

void require_same_dim(const SopInstance& inst, const Vector& x) {
    if (inst.a_matrix.rows() != x.size() || inst.b_vector.size() != x.size()) {
        std::ostringstream msg;
        msg << "dimension mismatch: instance has d = " << inst.b_vector.size() << ", x has " << x.size();
        throw std::invalid_argument(msg.str());
    }
}

}  // namespace

Matrix random_orthogonal(std::size_t dim, Rng& rng) {
    const auto d = static_cast<Eigen::Index>(dim);
    Matrix g(d, d);
    for (Eigen::Index i = 0; i < d; ++i)
        for (Eigen::Index j = 0; j < d; ++j) g(i, j) = rng.normal();
    Eigen::HouseholderQR<Matrix> qr(g);
    Matrix q = qr.householderQ();
    const Matrix r = qr.matrixQR();
    for (Eigen::Index j = 0; j < d; ++j)
        if (r(j, j) < 0.0) q.col(j) *= -1.0;
    return q;
}

std::vector<double> log_spaced_eigenvalues(std::size_t dim, double lo, double hi) {
    if (dim == 0) throw std::invalid_argument("log_spaced_eigenvalues: dim must be >= 1");
    if (!(lo > 0.0) || !(hi >= lo)) throw std::invalid_argument("log_spaced_eigenvalues: need 0 < lo <= hi");
    std::vector<double> out(dim);
    if (dim == 1) {
        out[0] = hi;
        return out;
    }
    const double a = std::log(hi);
    const double b = std::log(lo);
    for (std::size_t i = 0; i < dim; ++i)
        out[i] = std::exp(a + (b - a) * static_cast<double>(i) / static_cast<double>(dim - 1));
    out.front() = hi;
    out.back() = lo;
    return out;
}

QuadraticSop QuadraticSop::build(std::size_t dim, const std::vector<double>& eigenvalues, double sigma_a,
                                 double sigma_b, std::uint64_t seed, LinearNoise linear_noise) {
    if (dim == 0) throw std::invalid_argument("build_sop: dim must be >= 1");
    if (eigenvalues.size() != dim) {
        std::ostringstream msg;
        msg << "build_sop: expected " << dim << " eigenvalues, got " << eigenvalues.size();
        throw std::invalid_argument(msg.str());
    }
    for (double l : eigenvalues) {
        if (!(l > 0.0) || !std::isfinite(l)) {
            std::ostringstream msg;
            msg << "build_sop: eigenvalues must be positive, got " << l;
            throw std::invalid_argument(msg.str());
        }
    }
    if (!(sigma_a >= 0.0) || !(sigma_b >= 0.0)) throw std::invalid_argument("build_sop: noise levels must be >= 0");

    QuadraticSop sop;
    sop.eigenvalues_ = eigenvalues;
    sop.sigma_a_ = sigma_a;
    sop.sigma_b_ = sigma_b;
    sop.linear_noise_ = linear_noise;
    sop.centering_ = static_cast<double>(dim) * sigma_a * sigma_a / 3.0;

    Rng rng(seed);
    sop.rotation_ = random_orthogonal(dim, rng);
    const auto d = static_cast<Eigen::Index>(dim);
    Vector diag(d);
    for (Eigen::Index i = 0; i < d; ++i) diag(i) = eigenvalues[static_cast<std::size_t>(i)];
    Matrix a = sop.rotation_.transpose() * diag.asDiagonal() * sop.rotation_;
    sop.mean_hessian_ = 0.5 * (a + a.transpose());

    if (sigma_a > 0.0) {
        Rng check_rng(derive_seed(seed, 1));
        std::size_t pd = 0;
        for (std::size_t i = 0; i < kPdCheckSamples; ++i) {
            const auto inst = sop.sample_instance(check_rng);
            Eigen::LLT<Matrix> llt(inst.a_matrix);
            if (llt.info() == Eigen::Success) ++pd;
        }
        sop.pd_fraction_ = static_cast<double>(pd) / static_cast<double>(kPdCheckSamples);
        if (1.0 - sop.pd_fraction_ > kMaxNonPdFraction) {
            std::ostringstream msg;
            msg << "build_sop: only " << sop.pd_fraction_ * 100.0
                << " % of sampled Hessians are positive definite; lower sigma_A or raise the smallest eigenvalue";
            throw std::invalid_argument(msg.str());
        }
    }
    return sop;
}

QuadraticSop build_sop(std::size_t dim, const std::vector<double>& eigenvalues, double sigma_a, double sigma_b,
                       std::uint64_t seed, LinearNoise linear_noise) {
    return QuadraticSop::build(dim, eigenvalues, sigma_a, sigma_b, seed, linear_noise);
}

SopInstance QuadraticSop::sample_instance(Rng& rng) const {
    const auto d = mean_hessian_.rows();
    SopInstance inst;
    if (sigma_a_ > 0.0) {
        Matrix xi(d, d);
        for (Eigen::Index i = 0; i < d; ++i)
            for (Eigen::Index j = 0; j < d; ++j) xi(i, j) = rng.uniform(-sigma_a_, sigma_a_);
        Matrix w = xi.transpose() * xi;
        w.diagonal().array() -= centering_;
        inst.a_matrix = mean_hessian_ + w;
    } else {
        inst.a_matrix = mean_hessian_;
    }
    inst.b_vector.resize(d);
    for (Eigen::Index i = 0; i < d; ++i) {
        if (sigma_b_ == 0.0)
            inst.b_vector(i) = 0.0;
        else if (linear_noise_ == LinearNoise::Uniform)
            inst.b_vector(i) = rng.uniform(-sigma_b_, sigma_b_);
        else
            inst.b_vector(i) = sigma_b_ * rng.sign();
    }
    return inst;
}

Vector grad(const SopInstance& inst, const Vector& x) {
    require_same_dim(inst, x);
    return inst.a_matrix * x + inst.b_vector;
}

double value(const SopInstance& inst, const Vector& x) {
    require_same_dim(inst, x);
    return 0.5 * x.dot(inst.a_matrix * x) + inst.b_vector.dot(x);
}

Vector sgd_step(const Vector& x, const SopInstance& inst, double alpha) {
    if (!(alpha >= 0.0)) throw std::invalid_argument("sgd_step: alpha must be >= 0");
    return x - alpha * grad(inst, x);
}

Observables observables(const SopInstance& inst_k, const SopInstance& inst_next, const Vector& x_k,
                        const Vector& x_next, double alpha) {
    if (!(alpha > 0.0)) throw std::invalid_argument("observables: alpha must be > 0");
    Observables obs;
    obs.g_tilde = grad(inst_k, x_k).squaredNorm();
    obs.sigma_tilde = (value(inst_next, x_next) - value(inst_k, x_next)) / alpha;
    return obs;
}

double power_iteration_max_eigenvalue(const Matrix& m, double tol, int max_iter) {
    const auto d = m.rows();
    if (d == 0 || m.cols() != d) throw std::invalid_argument("power iteration: matrix must be square and non-empty");
    if (d == 1) return m(0, 0);
    // Deterministic, non-degenerate start vector.
    Vector v(d);
    for (Eigen::Index i = 0; i < d; ++i) v(i) = 1.0 + 0.1 * static_cast<double>(i) / static_cast<double>(d);
    v.normalize();
    double lambda = v.dot(m * v);
    for (int it = 0; it < max_iter; ++it) {
        Vector w = m * v;
        const double norm = w.norm();
        if (norm == 0.0) return 0.0;
        v = w / norm;
        const Vector mv = m * v;
        lambda = v.dot(mv);
        if ((mv - lambda * v).norm() <= tol * std::abs(lambda)) break;
    }
    return lambda;
}

double estimate_L(const QuadraticSop& sop, std::size_t n_samples, std::uint64_t seed) {
    if (n_samples < 1) throw std::invalid_argument("estimate_L: n_samples must be >= 1");
    if (sop.sigma_a() == 0.0) return power_iteration_max_eigenvalue(sop.mean_hessian());
    Rng rng(seed);
    double best = -std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < n_samples; ++i) {
        const auto inst = sop.sample_instance(rng);
        best = std::max(best, power_iteration_max_eigenvalue(inst.a_matrix));
    }
    return best;
}

double smoothness_estimate(const QuadraticSop& sop, std::size_t n_samples, std::uint64_t seed) {
    return kSmoothnessInflation * estimate_L(sop, n_samples, seed);
}

double estimate_contraction(const QuadraticSop& sop, double alpha, std::size_t n_samples, std::uint64_t seed) {
    if (!(alpha > 0.0)) throw std::invalid_argument("estimate_contraction: alpha must be > 0");
    if (n_samples < 1) throw std::invalid_argument("estimate_contraction: n_samples must be >= 1");
    Rng rng(seed);
    double sum = 0.0;
    for (std::size_t i = 0; i < n_samples; ++i) {
        const auto inst = sop.sample_instance(rng);
        Eigen::SelfAdjointEigenSolver<Matrix> eig(inst.a_matrix, Eigen::EigenvaluesOnly);
        const auto& ev = eig.eigenvalues();
        // ||I - alpha A||_2 for symmetric A: the extreme eigenvalues decide it.
        const double lip = std::max(std::abs(1.0 - alpha * ev(0)), std::abs(1.0 - alpha * ev(ev.size() - 1)));
        sum += std::log(lip);
    }
    return sum / static_cast<double>(n_samples);
}

}  // namespace pema::sgd
