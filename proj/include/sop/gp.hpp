#pragma once

#include <Eigen/Dense>
#include <vector>

#include "sop/errors.hpp"
#include "sop/kernels.hpp"

namespace sop {

class SurrogateSingular : public Error {
public:
    using Error::Error;
};

double normal_pdf(double z) noexcept;
double normal_cdf(double z) noexcept;

/// EI = (mean - incumbent) Phi(z) + stddev phi(z), z = (mean - incumbent) / stddev;
/// max(mean - incumbent, 0) when stddev == 0.
double expected_improvement(double mean, double stddev, double incumbent) noexcept;

/// Per-axis median of pairwise absolute coordinate differences. Rows of
/// `inputs` are observations. Zero medians fall back to a small positive width.
Eigen::VectorXd median_lengthscales(const Eigen::MatrixXd& inputs);

/// Noise-free GP regression with a squared-exponential kernel of unit signal
/// variance over standardised targets.
class GaussianProcess {
public:
    /// Throws SurrogateSingular if the jittered kernel matrix is not positive
    /// definite.
    GaussianProcess(Eigen::MatrixXd inputs, const Eigen::VectorXd& targets,
                    Eigen::VectorXd lengthscales, double jitter);

    struct Prediction {
        Eigen::VectorXd mean;
        Eigen::VectorXd stddev;
    };

    /// Posterior mean and standard deviation in the original target units;
    /// rows of `points` are query locations.
    Prediction predict(const Eigen::MatrixXd& points, ExecPolicy policy = ExecPolicy::Serial) const;

    /// Log marginal likelihood of the standardised targets.
    double log_marginal_likelihood() const noexcept { return lml_; }
    const Eigen::VectorXd& lengthscales() const noexcept { return lengthscales_; }
    double jitter() const noexcept { return jitter_; }

private:
    Eigen::MatrixXd cross_kernel(const Eigen::MatrixXd& points) const;
    void predict_block(const Eigen::MatrixXd& points, Eigen::Ref<Eigen::VectorXd> mean,
                       Eigen::Ref<Eigen::VectorXd> stddev) const;

    Eigen::MatrixXd inputs_;  // scaled by 1/lengthscale
    Eigen::VectorXd lengthscales_;
    Eigen::LLT<Eigen::MatrixXd> chol_;
    Eigen::VectorXd alpha_;
    double y_mean_ = 0.0;
    double y_scale_ = 1.0;
    double jitter_;
    double lml_ = 0.0;
};

}  // namespace sop
