#include "sbt/fit.hpp"

#include "sbt/errors.hpp"

#include <cmath>

namespace sbt {

namespace {

void residuals_and_jacobian(const CurveModel& model,
                            const std::vector<double>& x,
                            const std::vector<double>& y,
                            const std::vector<double>& weight,
                            const std::vector<double>& params,
                            Eigen::VectorXd& r, Eigen::MatrixXd& J)
{
    const auto n = static_cast<Eigen::Index>(x.size());
    const auto m = static_cast<Eigen::Index>(params.size());
    r.resize(n);
    J.resize(n, m);
    for (Eigen::Index i = 0; i < n; ++i) {
        const double w = weight[static_cast<std::size_t>(i)];
        r(i) = w * (y[static_cast<std::size_t>(i)]
                    - model.value(params, x[static_cast<std::size_t>(i)]));
        const auto grad = model.gradient(params, x[static_cast<std::size_t>(i)]);
        for (Eigen::Index j = 0; j < m; ++j)
            J(i, j) = -w * grad[static_cast<std::size_t>(j)];
    }
}

} // namespace

FitResult levenberg_marquardt(const CurveModel& model,
                              const std::vector<double>& x,
                              const std::vector<double>& y,
                              const std::vector<double>& sigma,
                              std::vector<double> initial,
                              const FitOptions& options)
{
    if (x.size() != y.size())
        throw FitError("levenberg_marquardt: x/y size mismatch");
    if (x.size() < initial.size())
        throw FitError("levenberg_marquardt: fewer points than parameters");

    std::vector<double> weight(x.size(), 1.0);
    if (!sigma.empty()) {
        if (sigma.size() != x.size())
            throw FitError("levenberg_marquardt: sigma size mismatch");
        for (std::size_t i = 0; i < sigma.size(); ++i) {
            if (!(sigma[i] > 0.0))
                throw FitError("levenberg_marquardt: sigmas must be > 0");
            weight[i] = 1.0 / sigma[i];
        }
    }

    const auto m = static_cast<Eigen::Index>(initial.size());
    Eigen::VectorXd r;
    Eigen::MatrixXd J;
    residuals_and_jacobian(model, x, y, weight, initial, r, J);
    double chi2 = r.squaredNorm();
    double lambda = 1e-3;

    FitResult result;
    result.params = initial;
    result.chi2 = chi2;

    for (int iter = 0; iter < options.max_iterations; ++iter) {
        result.iterations = iter + 1;
        const Eigen::MatrixXd JtJ = J.transpose() * J;
        const Eigen::VectorXd g = J.transpose() * r;

        const double gnorm = g.lpNorm<Eigen::Infinity>();
        if (gnorm <= options.gradient_tol * std::max(1.0, chi2)) {
            result.converged = true;
            result.message = "gradient norm below tolerance";
            break;
        }

        bool stepped = false;
        for (int damping = 0; damping < 60; ++damping) {
            Eigen::MatrixXd A = JtJ;
            for (Eigen::Index j = 0; j < m; ++j)
                A(j, j) += lambda * std::max(JtJ(j, j), 1e-30);
            const Eigen::VectorXd step = A.ldlt().solve(-g);

            std::vector<double> trial = result.params;
            for (Eigen::Index j = 0; j < m; ++j)
                trial[static_cast<std::size_t>(j)] += step(j);

            Eigen::VectorXd r_trial;
            Eigen::MatrixXd J_trial;
            residuals_and_jacobian(model, x, y, weight, trial, r_trial, J_trial);
            const double chi2_trial = r_trial.squaredNorm();

            if (std::isfinite(chi2_trial) && chi2_trial <= chi2) {
                double rel_step = 0.0;
                for (Eigen::Index j = 0; j < m; ++j)
                    rel_step = std::max(
                        rel_step,
                        std::abs(step(j))
                            / std::max(1.0, std::abs(trial[static_cast<std::size_t>(j)])));
                result.params = std::move(trial);
                r = std::move(r_trial);
                J = std::move(J_trial);
                const double improvement = chi2 - chi2_trial;
                chi2 = chi2_trial;
                result.chi2 = chi2;
                lambda = std::max(lambda * 0.3, 1e-14);
                stepped = true;
                if (rel_step <= options.step_tol
                    || improvement <= options.step_tol * std::max(1.0, chi2)) {
                    result.converged = true;
                    result.message = "step below tolerance";
                }
                break;
            }
            lambda *= 10.0;
        }
        if (result.converged)
            break;
        if (!stepped) {
            result.message = "no acceptable damped step found";
            break;
        }
    }
    if (!result.converged && result.message.empty())
        result.message = "iteration limit reached";

    // Covariance from the weighted normal matrix at the solution.
    const Eigen::MatrixXd JtJ = J.transpose() * J;
    const auto n = static_cast<Eigen::Index>(x.size());
    // Equilibrate before inverting: parameters can differ by many orders of
    // magnitude (Hz-scale centers next to order-one depths), and an
    // unscaled pseudoinverse would truncate the stiff directions.
    const Eigen::VectorXd d =
        JtJ.diagonal().cwiseMax(1e-300).cwiseSqrt().cwiseInverse();
    const Eigen::MatrixXd scaled =
        d.asDiagonal() * JtJ * d.asDiagonal();
    Eigen::MatrixXd cov = d.asDiagonal()
        * scaled.completeOrthogonalDecomposition().pseudoInverse()
        * d.asDiagonal();
    if (sigma.empty() && n > m) {
        // Unit weights: scale by the reduced chi-square.
        cov *= chi2 / static_cast<double>(n - m);
    }
    result.covariance = 0.5 * (cov + cov.transpose());
    result.sigma.resize(initial.size());
    for (Eigen::Index j = 0; j < m; ++j)
        result.sigma[static_cast<std::size_t>(j)] =
            std::sqrt(std::max(result.covariance(j, j), 0.0));
    return result;
}

double jacobian_check(const CurveModel& model, const std::vector<double>& params,
                      const std::vector<double>& x)
{
    double worst = 0.0;
    for (double xi : x) {
        const auto analytic = model.gradient(params, xi);
        for (std::size_t j = 0; j < params.size(); ++j) {
            const double h = 1e-6 * std::max(std::abs(params[j]), 1e-3);
            auto plus = params;
            auto minus = params;
            plus[j] += h;
            minus[j] -= h;
            const double numeric =
                (model.value(plus, xi) - model.value(minus, xi)) / (2.0 * h);
            const double scale =
                std::max({std::abs(analytic[j]), std::abs(numeric), 1e-12});
            worst = std::max(worst, std::abs(analytic[j] - numeric) / scale);
        }
    }
    return worst;
}

double normal_cdf(double x)
{
    return 0.5 * std::erfc(-x / std::sqrt(2.0));
}

// Wichura's AS241 (PPND16) rational approximations.
double normal_quantile(double p)
{
    if (!(p > 0.0) || !(p < 1.0))
        throw DomainError("normal_quantile: p must be in (0, 1)");
    const double q = p - 0.5;
    double r;
    if (std::abs(q) <= 0.425) {
        r = 0.180625 - q * q;
        return q
            * (((((((2.5090809287301226727e3 * r + 3.3430575583588128105e4) * r
                     + 6.7265770927008700853e4) * r + 4.5921953931549871457e4) * r
                   + 1.3731693765509461125e4) * r + 1.9715909503065514427e3) * r
                 + 1.3314166789178437745e2) * r + 3.3871328727963666080e0)
            / (((((((5.2264952788528545610e3 * r + 2.8729085735721942674e4) * r
                     + 3.9307895800092710610e4) * r + 2.1213794301586595867e4) * r
                   + 5.3941960214247511077e3) * r + 6.8718700749205790830e2) * r
                 + 4.2313330701600911252e1) * r + 1.0);
    }
    r = q < 0.0 ? p : 1.0 - p;
    r = std::sqrt(-std::log(r));
    double value;
    if (r <= 5.0) {
        r -= 1.6;
        value = (((((((7.74545014278341407640e-4 * r + 2.27238449892691845833e-2) * r
                       + 2.41780725177450611770e-1) * r + 1.27045825245236838258e0) * r
                     + 3.64784832476320460504e0) * r + 5.76949722146069140550e0) * r
                   + 4.63033784615654529590e0) * r + 1.42343711074968357734e0)
            / (((((((1.05075007164441684324e-9 * r + 5.47593808499534494600e-4) * r
                       + 1.51986665636164571966e-2) * r + 1.48103976427480074590e-1) * r
                     + 6.89767334985100004550e-1) * r + 1.67638483018380384940e0) * r
                   + 2.05319162663775882187e0) * r + 1.0);
    } else {
        r -= 5.0;
        value = (((((((2.01033439929228813265e-7 * r + 2.71155556874348757815e-5) * r
                       + 1.24266094738807843860e-3) * r + 2.65321895265761230930e-2) * r
                     + 2.96560571828504891230e-1) * r + 1.78482653991729133580e0) * r
                   + 5.46378491116411436990e0) * r + 6.65790464350110377720e0)
            / (((((((2.04426310338993978564e-15 * r + 1.42151175831644588870e-7) * r
                       + 1.84631831751005468180e-5) * r + 7.86869131145613259100e-4) * r
                     + 1.48753612908506148525e-2) * r + 1.36929880922735805310e-1) * r
                   + 5.99832206555887937690e-1) * r + 1.0);
    }
    return q < 0.0 ? -value : value;
}

double chi_squared_quantile_1dof(double p)
{
    const double z = normal_quantile(0.5 * (1.0 + p));
    return z * z;
}

} // namespace sbt
