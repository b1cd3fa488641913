#include "sop/gp.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

namespace sop {

double normal_pdf(double z) noexcept {
    return std::exp(-0.5 * z * z) / std::sqrt(2.0 * std::numbers::pi);
}

double normal_cdf(double z) noexcept { return 0.5 * std::erfc(-z / std::numbers::sqrt2); }

double expected_improvement(double mean, double stddev, double incumbent) noexcept {
    const double delta = mean - incumbent;
    if (stddev <= 0.0) return std::max(delta, 0.0);
    const double z = delta / stddev;
    return std::max(0.0, delta * normal_cdf(z) + stddev * normal_pdf(z));
}

Eigen::VectorXd median_lengthscales(const Eigen::MatrixXd& inputs) {
    const Eigen::Index n = inputs.rows();
    Eigen::VectorXd out(inputs.cols());
    std::vector<double> diffs;
    diffs.reserve(static_cast<std::size_t>(n * (n - 1) / 2));
    for (Eigen::Index d = 0; d < inputs.cols(); ++d) {
        diffs.clear();
        for (Eigen::Index i = 0; i < n; ++i)
            for (Eigen::Index j = i + 1; j < n; ++j)
                diffs.push_back(std::abs(inputs(i, d) - inputs(j, d)));
        double median = 0.0;
        if (!diffs.empty()) {
            const auto mid = diffs.size() / 2;
            std::nth_element(diffs.begin(), diffs.begin() + static_cast<std::ptrdiff_t>(mid),
                             diffs.end());
            median = diffs[mid];
            if (diffs.size() % 2 == 0) {
                const double lower = *std::max_element(
                    diffs.begin(), diffs.begin() + static_cast<std::ptrdiff_t>(mid));
                median = 0.5 * (median + lower);
            }
        }
        out(d) = median > 0.0 ? median : 1e-3;
    }
    return out;
}

GaussianProcess::GaussianProcess(Eigen::MatrixXd inputs, const Eigen::VectorXd& targets,
                                 Eigen::VectorXd lengthscales, double jitter)
    : inputs_(std::move(inputs)), lengthscales_(std::move(lengthscales)), jitter_(jitter) {
    const Eigen::Index n = inputs_.rows();
    inputs_ = inputs_ * lengthscales_.cwiseInverse().asDiagonal();

    y_mean_ = targets.mean();
    const double var = n > 1 ? (targets.array() - y_mean_).square().sum() / static_cast<double>(n)
                             : 0.0;
    y_scale_ = var > 0.0 ? std::sqrt(var) : 1.0;
    const Eigen::VectorXd y = (targets.array() - y_mean_) / y_scale_;

    Eigen::MatrixXd k(n, n);
    for (Eigen::Index i = 0; i < n; ++i) {
        k(i, i) = 1.0 + jitter_;
        for (Eigen::Index j = 0; j < i; ++j) {
            const double v = std::exp(-0.5 * (inputs_.row(i) - inputs_.row(j)).squaredNorm());
            k(i, j) = v;
            k(j, i) = v;
        }
    }
    chol_.compute(k);
    if (chol_.info() != Eigen::Success)
        throw SurrogateSingular("kernel matrix not positive definite at jitter " +
                                std::to_string(jitter_));
    alpha_ = chol_.solve(y);
    if (!alpha_.allFinite()) throw SurrogateSingular("non-finite GP weights");
    const Eigen::MatrixXd& l = chol_.matrixLLT();
    lml_ = -0.5 * y.dot(alpha_) - l.diagonal().array().log().sum() -
           0.5 * static_cast<double>(n) * std::log(2.0 * std::numbers::pi);
}

Eigen::MatrixXd GaussianProcess::cross_kernel(const Eigen::MatrixXd& points) const {
    const Eigen::MatrixXd scaled = points * lengthscales_.cwiseInverse().asDiagonal();
    // |a-b|^2 = |a|^2 + |b|^2 - 2ab, clamped against cancellation.
    const Eigen::VectorXd pn = scaled.rowwise().squaredNorm();
    const Eigen::VectorXd xn = inputs_.rowwise().squaredNorm();
    Eigen::MatrixXd d2 = -2.0 * (scaled * inputs_.transpose());
    d2.colwise() += pn;
    d2.rowwise() += xn.transpose();
    return (-0.5 * d2.array().max(0.0)).exp().matrix();
}

void GaussianProcess::predict_block(const Eigen::MatrixXd& points, Eigen::Ref<Eigen::VectorXd> mean,
                                    Eigen::Ref<Eigen::VectorXd> stddev) const {
    const Eigen::MatrixXd ks = cross_kernel(points);  // m x n
    mean = (ks * alpha_).array() * y_scale_ + y_mean_;
    const Eigen::MatrixXd v = chol_.matrixL().solve(ks.transpose());  // n x m
    const Eigen::VectorXd var = (1.0 - v.colwise().squaredNorm().array()).max(0.0);
    stddev = var.array().sqrt() * y_scale_;
}

GaussianProcess::Prediction GaussianProcess::predict(const Eigen::MatrixXd& points,
                                                     ExecPolicy policy) const {
    const Eigen::Index m = points.rows();
    Prediction out{Eigen::VectorXd(m), Eigen::VectorXd(m)};
    if (policy == ExecPolicy::Serial) {
        predict_block(points, out.mean, out.stddev);
        return out;
    }
    constexpr Eigen::Index kChunk = 256;
    const Eigen::Index chunks = (m + kChunk - 1) / kChunk;
#pragma omp parallel for schedule(static)
    for (Eigen::Index c = 0; c < chunks; ++c) {
        const Eigen::Index begin = c * kChunk;
        const Eigen::Index len = std::min(kChunk, m - begin);
        predict_block(points.middleRows(begin, len), out.mean.segment(begin, len),
                      out.stddev.segment(begin, len));
    }
    return out;
}

}  // namespace sop
