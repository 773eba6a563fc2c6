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

#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <vector>

#include "pema/rng.hpp"

namespace pema::sgd {

using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;

/// Distribution of the entries of the random linear term b.
enum class LinearNoise {
    Uniform,  ///< uniform on [-sigma_b, sigma_b]
    Sign,     ///< +-sigma_b with equal probability
};

/// One sampled objective f(x) = 1/2 x^T A x + b^T x with symmetric A.
struct SopInstance {
    Matrix a_matrix;
    Vector b_vector;
};

/**
 * Synthetic stochastic quadratic problem.
 *
 * The mean Hessian is A = S^T D S with a random orthogonal S. Each draw adds
 * W = Xi^T Xi - c_W I, where Xi has iid entries uniform on [-sigma_A, sigma_A]
 * and c_W = d sigma_A^2 / 3 = E[(Xi^T Xi)_jj], so that E[W] = 0.
 */
class QuadraticSop {
public:
    /**
     * Throws std::invalid_argument for an empty or non-positive spectrum,
     * negative noise levels, or when more than 1e-3 of sampled Hessians
     * fail to be positive definite.
     */
    static QuadraticSop build(std::size_t dim, const std::vector<double>& eigenvalues, double sigma_a,
                              double sigma_b, std::uint64_t seed, LinearNoise linear_noise = LinearNoise::Uniform);

    SopInstance sample_instance(Rng& rng) const;

    std::size_t dim() const noexcept { return static_cast<std::size_t>(mean_hessian_.rows()); }
    const Matrix& mean_hessian() const noexcept { return mean_hessian_; }
    const Matrix& rotation() const noexcept { return rotation_; }
    const std::vector<double>& eigenvalues() const noexcept { return eigenvalues_; }
    double sigma_a() const noexcept { return sigma_a_; }
    double sigma_b() const noexcept { return sigma_b_; }
    double centering() const noexcept { return centering_; }
    LinearNoise linear_noise() const noexcept { return linear_noise_; }
    /// Fraction of positive definite Hessians seen by the construction check.
    double pd_fraction() const noexcept { return pd_fraction_; }

private:
    Matrix mean_hessian_;
    Matrix rotation_;
    std::vector<double> eigenvalues_;
    double sigma_a_ = 0.0;
    double sigma_b_ = 0.0;
    double centering_ = 0.0;
    LinearNoise linear_noise_ = LinearNoise::Uniform;
    double pd_fraction_ = 1.0;
};

/// Shortcut for QuadraticSop::build.
QuadraticSop build_sop(std::size_t dim, const std::vector<double>& eigenvalues, double sigma_a, double sigma_b,
                       std::uint64_t seed, LinearNoise linear_noise = LinearNoise::Uniform);

/// `dim` values log-spaced over [lo, hi] in decreasing order.
std::vector<double> log_spaced_eigenvalues(std::size_t dim, double lo, double hi);

/// Haar-distributed orthogonal matrix from the QR factorization of a Gaussian matrix.
Matrix random_orthogonal(std::size_t dim, Rng& rng);

Vector grad(const SopInstance& inst, const Vector& x);
double value(const SopInstance& inst, const Vector& x);

/// x - alpha * grad(inst, x).
Vector sgd_step(const Vector& x, const SopInstance& inst, double alpha);

struct Observables {
    double g_tilde = 0.0;      ///< squared norm of the sampled gradient at x_k
    double sigma_tilde = 0.0;  ///< (f_next(x_next) - f_k(x_next)) / alpha
};

Observables observables(const SopInstance& inst_k, const SopInstance& inst_next, const Vector& x_k,
                        const Vector& x_next, double alpha);

/// Largest eigenvalue of a symmetric matrix by power iteration with a
/// relative residual tolerance.
double power_iteration_max_eigenvalue(const Matrix& m, double tol = 1e-8, int max_iter = 100000);

/// Max of lambda_max(A_xi) over sampled instances.
double estimate_L(const QuadraticSop& sop, std::size_t n_samples, std::uint64_t seed);

/// estimate_L inflated by 5 %, used as the smoothness constant of step-size rules.
double smoothness_estimate(const QuadraticSop& sop, std::size_t n_samples, std::uint64_t seed);
inline constexpr double kSmoothnessInflation = 1.05;

/// Monte Carlo mean of log ||I - alpha A_xi||_2; negative means the SGD map
/// contracts on average at this step size.
double estimate_contraction(const QuadraticSop& sop, double alpha, std::size_t n_samples, std::uint64_t seed);

/// Default synthetic problem: d = 20, spectrum log-spaced on [1, 10],
/// sigma_A = 0.1, sigma_b = 1.
struct DefaultProblem {
    std::size_t dim = 20;
    double lambda_lo = 1.0;
    double lambda_hi = 10.0;
    double sigma_a = 0.1;
    double sigma_b = 1.0;

    QuadraticSop build(std::uint64_t seed) const {
        return build_sop(dim, log_spaced_eigenvalues(dim, lambda_lo, lambda_hi), sigma_a, sigma_b, seed);
    }
};

}  // namespace pema::sgd
