#ifndef SBT_FIT_HPP
#define SBT_FIT_HPP

#include <Eigen/Dense>

#include <functional>
#include <string>
#include <vector>

namespace sbt {

// y = f(p, x) with an analytic gradient in p.
struct CurveModel {
    std::function<double(const std::vector<double>&, double)> value;
    std::function<std::vector<double>(const std::vector<double>&, double)> gradient;
};

struct FitOptions {
    int max_iterations = 200;
    double gradient_tol = 1e-10; // relative infinity norm of the gradient
    double step_tol = 1e-12;     // relative step size
};

struct FitResult {
    std::vector<double> params;
    std::vector<double> sigma;
    Eigen::MatrixXd covariance;
    double chi2 = 0.0;
    int iterations = 0;
    bool converged = false;
    std::string message;
};

// Damped least squares with monotone objective decrease. Weights are
// 1/sigma^2 when sigmas are supplied (empty means unit weights).
FitResult levenberg_marquardt(const CurveModel& model,
                              const std::vector<double>& x,
                              const std::vector<double>& y,
                              const std::vector<double>& sigma,
                              std::vector<double> initial,
                              const FitOptions& options = {});

// Max relative deviation between the analytic gradient and central finite
// differences, over all parameters and sample points.
double jacobian_check(const CurveModel& model, const std::vector<double>& params,
                      const std::vector<double>& x);

// Quantile helpers used by interval construction and acceptance tests.
double normal_quantile(double p);          // inverse standard normal CDF
double chi_squared_quantile_1dof(double p); // for profile-likelihood cuts
double normal_cdf(double x);

} // namespace sbt

#endif
