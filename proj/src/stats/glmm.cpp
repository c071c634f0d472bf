#include "rubricforge/stats/glmm.hpp"

#include "rubricforge/stats/quantile.hpp"
#include "rubricforge/util/errors.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <stdexcept>

namespace rubricforge::stats {

namespace {

constexpr double kMinLogSigma = -12.0;
constexpr double kMaxLogSigma = 4.0;

void check_outcome(std::span<const double> y) {
    for (double v : y) {
        if (!std::isfinite(v) || v < 0.0 || std::floor(v) != v)
            throw DataError("poisson model: outcomes must be nonnegative integers");
    }
}

Eigen::MatrixXd with_intercept(const Eigen::MatrixXd& features) {
    Eigen::MatrixXd X(features.rows(), features.cols() + 1);
    X.col(0).setOnes();
    X.rightCols(features.cols()) = features;
    return X;
}

double lgamma_sum(std::span<const double> y) {
    double s = 0.0;
    for (double v : y) s += std::lgamma(v + 1.0);
    return s;
}

// Solve sum_i(y_i - exp(eta0_i + u)) - u/s2 = 0 for the group mode u.
// Written as Y - S0*e^u - u/s2 with S0 = sum exp(eta0_i); strictly decreasing.
double group_mode(double Y, double S0, double s2, double start) {
    auto r = [&](double u) { return Y - S0 * std::exp(u) - u / s2; };
    double lo, hi;
    if (Y - S0 >= 0.0) {
        lo = 0.0;
        hi = s2 * Y;
    } else {
        lo = -s2 * S0;
        hi = 0.0;
    }
    if (hi - lo <= 0.0) return 0.0;
    double u = std::clamp(start, lo, hi);
    for (int it = 0; it < 100; ++it) {
        const double f = r(u);
        if (f > 0.0) lo = u; else hi = u;
        const double d = -S0 * std::exp(u) - 1.0 / s2;
        double next = u - f / d;
        if (!(next > lo && next < hi)) next = 0.5 * (lo + hi);
        if (std::abs(next - u) <= 1e-14 * (1.0 + std::abs(u)) || hi - lo <= 1e-15 * (1.0 + std::abs(u))) {
            return next;
        }
        u = next;
    }
    return u;
}

class LaplaceObjective {
public:
    LaplaceObjective(const Eigen::MatrixXd& X, std::span<const double> y, std::vector<std::vector<Eigen::Index>> members)
        : X_(X), y_(y.begin(), y.end()), members_(std::move(members)), modes_(members_.size(), 0.0) {
        const_term_ = lgamma_sum(y);
    }

    Eigen::Index dim() const { return X_.cols() + 1; }

    // Returns the Laplace log-likelihood; fills the gradient with respect to
    // (beta, log sigma). group_grads, when given, receives per-group
    // contributions as columns.
    double evaluate(const Eigen::VectorXd& params, Eigen::VectorXd* grad, Eigen::MatrixXd* group_grads = nullptr) {
        const Eigen::Index p = X_.cols();
        const Eigen::VectorXd beta = params.head(p);
        const double theta = params(p);
        const double s2 = std::exp(2.0 * theta);
        const Eigen::VectorXd eta0 = X_ * beta;

        double ll = -const_term_;
        if (grad) grad->setZero(p + 1);
        if (group_grads) group_grads->setZero(p + 1, static_cast<Eigen::Index>(members_.size()));
        Eigen::VectorXd gg(p + 1);
        for (std::size_t g = 0; g < members_.size(); ++g) {
            double Y = 0.0, S0 = 0.0;
            for (auto i : members_[g]) {
                Y += y_[static_cast<std::size_t>(i)];
                S0 += std::exp(eta0(i));
            }
            const double u = group_mode(Y, S0, s2, modes_[g]);
            modes_[g] = u;
            const double eu = std::exp(u);
            const double M = S0 * eu;
            const double H = M + 1.0 / s2;
            double lg = 0.0;
            Eigen::VectorXd score = Eigen::VectorXd::Zero(p);
            Eigen::VectorXd Mx = Eigen::VectorXd::Zero(p);
            for (auto i : members_[g]) {
                const double eta = eta0(i) + u;
                const double mu = std::exp(eta);
                const double yi = y_[static_cast<std::size_t>(i)];
                lg += yi * eta - mu;
                score += (yi - mu) * X_.row(i).transpose();
                Mx += mu * X_.row(i).transpose();
            }
            const double s2M1 = 1.0 + s2 * M;
            lg += -u * u / (2.0 * s2) - 0.5 * std::log(s2M1);
            ll += lg;
            if (grad || group_grads) {
                gg.head(p) = score - 0.5 * Mx * (s2 / (s2M1 * s2M1));
                gg(p) = u * u / s2 - 1.0 + 1.0 / s2M1 - M * u / (s2 * H * H);
                if (grad) *grad += gg;
                if (group_grads) group_grads->col(static_cast<Eigen::Index>(g)) = gg;
            }
        }
        return ll;
    }

    void reset_modes() { std::fill(modes_.begin(), modes_.end(), 0.0); }

private:
    const Eigen::MatrixXd& X_;
    std::vector<double> y_;
    std::vector<std::vector<Eigen::Index>> members_;
    std::vector<double> modes_;
    double const_term_ = 0.0;
};

Eigen::MatrixXd numeric_hessian(LaplaceObjective& obj, const Eigen::VectorXd& x) {
    const Eigen::Index d = x.size();
    Eigen::MatrixXd H(d, d);
    Eigen::VectorXd gp(d), gm(d);
    for (Eigen::Index j = 0; j < d; ++j) {
        const double h = 1e-5 * std::max(1.0, std::abs(x(j)));
        Eigen::VectorXd xp = x, xm = x;
        xp(j) += h;
        xm(j) -= h;
        obj.evaluate(xp, &gp);
        obj.evaluate(xm, &gm);
        H.col(j) = (gp - gm) / (2.0 * h);
    }
    obj.evaluate(x, &gp);
    return 0.5 * (H + H.transpose());
}

bool invert_spd(const Eigen::MatrixXd& info, Eigen::MatrixXd& out) {
    Eigen::LDLT<Eigen::MatrixXd> ldlt(info);
    if (ldlt.info() != Eigen::Success || !ldlt.isPositive()) return false;
    out = ldlt.solve(Eigen::MatrixXd::Identity(info.rows(), info.cols()));
    out = 0.5 * (out + out.transpose());
    return out.allFinite();
}

Eigen::MatrixXd make_psd(const Eigen::MatrixXd& m) {
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(m);
    Eigen::VectorXd ev = es.eigenvalues().cwiseMax(0.0);
    return es.eigenvectors() * ev.asDiagonal() * es.eigenvectors().transpose();
}

void apply_glm(GlmmFit& fit, const PoissonGlmFit& glm) {
    fit.beta = glm.beta;
    fit.covariance = glm.covariance;
    fit.sigma = 0.0;
    fit.log_likelihood = glm.log_likelihood;
    fit.converged = glm.converged;
    fit.iterations = glm.iterations;
}

} // namespace

PoissonGlmFit fit_poisson_glm(std::span<const double> outcome, const Eigen::MatrixXd& features, int max_iterations,
                              double tolerance) {
    if (static_cast<std::size_t>(features.rows()) != outcome.size())
        throw std::invalid_argument("fit_poisson_glm: row/outcome mismatch");
    check_outcome(outcome);
    const Eigen::MatrixXd X = with_intercept(features);
    const Eigen::Index n = X.rows(), d = X.cols();
    if (n <= d) throw std::invalid_argument("fit_poisson_glm: need more observations than parameters");
    const Eigen::Map<const Eigen::VectorXd> y(outcome.data(), n);
    const double ybar = y.mean();
    if (ybar <= 0.0) throw DegenerateError("fit_poisson_glm: all outcomes are zero");

    const double cterm = lgamma_sum(outcome);
    auto loglik = [&](const Eigen::VectorXd& b) {
        const Eigen::VectorXd eta = X * b;
        return (y.array() * eta.array() - eta.array().exp()).sum() - cterm;
    };

    PoissonGlmFit fit;
    Eigen::VectorXd beta = Eigen::VectorXd::Zero(d);
    beta(0) = std::log(ybar);
    double ll = loglik(beta);
    Eigen::MatrixXd info(d, d);
    for (int it = 0; it < max_iterations; ++it) {
        const Eigen::VectorXd mu = (X * beta).array().exp();
        const Eigen::VectorXd grad = X.transpose() * (y - mu);
        info = X.transpose() * mu.asDiagonal() * X;
        fit.iterations = it;
        if (grad.norm() < tolerance) {
            fit.converged = true;
            break;
        }
        const Eigen::VectorXd step = info.ldlt().solve(grad);
        double t = 1.0;
        bool accepted = false;
        for (int half = 0; half < 40; ++half) {
            const Eigen::VectorXd cand = beta + t * step;
            const double cll = loglik(cand);
            if (std::isfinite(cll) && cll >= ll - 1e-12 * std::abs(ll)) {
                beta = cand;
                ll = cll;
                accepted = true;
                break;
            }
            t *= 0.5;
        }
        fit.iterations = it + 1;
        if (!accepted) break;
    }
    const Eigen::VectorXd mu = (X * beta).array().exp();
    info = X.transpose() * mu.asDiagonal() * X;
    if ((X.transpose() * (y - mu)).norm() < std::max(tolerance, 1e-8)) fit.converged = true;
    fit.beta = beta;
    fit.log_likelihood = ll;
    if (!invert_spd(info, fit.covariance)) {
        fit.covariance = Eigen::MatrixXd::Constant(d, d, std::numeric_limits<double>::quiet_NaN());
    }
    return fit;
}

GlmmFit fit_poisson_glmm(std::span<const double> outcome, const Eigen::MatrixXd& features,
                         std::span<const std::string> groups, const GlmmOptions& options) {
    const auto n = static_cast<std::size_t>(features.rows());
    if (outcome.size() != n || groups.size() != n) throw std::invalid_argument("fit_poisson_glmm: length mismatch");
    if (n == 0) throw std::invalid_argument("fit_poisson_glmm: no observations");
    check_outcome(outcome);

    GlmmFit fit;
    fit.n_obs = n;
    const Eigen::Index p = features.cols();

    Eigen::MatrixXd Z = features;
    {
        std::vector<double> sds;
        for (Eigen::Index j = 0; j < p; ++j) {
            const double m = Z.col(j).mean();
            const double sd = std::sqrt((Z.col(j).array() - m).square().sum() / std::max<double>(1.0, n - 1.0));
            if (sd == 0.0) throw DegenerateError("fit_poisson_glmm: covariate " + std::to_string(j) + " is constant");
            sds.push_back(sd);
            if (options.standardize) {
                Z.col(j) = (Z.col(j).array() - m) / sd;
                fit.center.push_back(m);
                fit.scale.push_back(sd);
            }
        }
        if (!options.standardize && !sds.empty()) {
            const auto [mn, mx] = std::minmax_element(sds.begin(), sds.end());
            if (*mx / *mn > 100.0)
                fit.warnings.push_back("covariate scales differ by more than a factor of 100; consider standardizing");
        }
    }

    std::map<std::string, std::size_t> index;
    std::vector<std::vector<Eigen::Index>> members;
    for (std::size_t i = 0; i < n; ++i) {
        auto [it, inserted] = index.try_emplace(groups[i], members.size());
        if (inserted) members.emplace_back();
        members[it->second].push_back(static_cast<Eigen::Index>(i));
    }
    fit.n_groups = members.size();

    const PoissonGlmFit glm = fit_poisson_glm(outcome, Z);
    if (members.size() < 2) {
        fit.identifiable = false;
        fit.warnings.push_back("single group: random-intercept variance is not identifiable; reporting the plain "
                               "Poisson fit with sigma = 0");
    }
    if (options.fix_sigma_zero || members.size() < 2) {
        apply_glm(fit, glm);
        fit.boundary = !options.fix_sigma_zero;
        fit.loglik_trace.push_back(glm.log_likelihood);
        fit.std_errors = fit.covariance.diagonal().cwiseMax(0.0).cwiseSqrt();
        return fit;
    }

    const Eigen::MatrixXd X = with_intercept(Z);
    LaplaceObjective obj(X, outcome, members);
    const Eigen::Index d = obj.dim();

    // Quasi-Newton (BFGS) ascent on the Laplace log-likelihood with an
    // Armijo backtracking line search; only improving steps are accepted.
    Eigen::VectorXd x(d);
    x.head(p + 1) = glm.beta;
    x(p + 1) = std::log(options.initial_sigma);
    Eigen::VectorXd g(d);
    double f = obj.evaluate(x, &g);
    if (!std::isfinite(f)) throw DegenerateError("fit_poisson_glmm: log-likelihood not finite at the start");
    fit.loglik_trace.push_back(f);
    Eigen::MatrixXd Hinv = Eigen::MatrixXd::Identity(d, d);
    {
        // Scale the initial inverse Hessian by the GLM information.
        if (glm.covariance.allFinite()) {
            Hinv.topLeftCorner(p + 1, p + 1) = glm.covariance;
        }
        Hinv(p + 1, p + 1) = 1.0 / static_cast<double>(members.size());
    }

    int iter = 0;
    for (; iter < options.max_iterations; ++iter) {
        if (g.cwiseAbs().maxCoeff() < options.gradient_tolerance) {
            fit.converged = true;
            break;
        }
        Eigen::VectorXd dir = Hinv * g;
        if (dir.dot(g) <= 0.0) {
            Hinv = Eigen::MatrixXd::Identity(d, d) * (1.0 / std::max(1.0, g.norm()));
            dir = Hinv * g;
        }
        double t = 1.0;
        bool accepted = false;
        Eigen::VectorXd xn(d), gn(d);
        double fn = f;
        for (int half = 0; half < 50; ++half) {
            xn = x + t * dir;
            xn(p + 1) = std::clamp(xn(p + 1), kMinLogSigma, kMaxLogSigma);
            fn = obj.evaluate(xn, &gn);
            if (std::isfinite(fn) && fn >= f + 1e-4 * g.dot(xn - x)) {
                accepted = true;
                break;
            }
            t *= 0.5;
        }
        if (!accepted) {
            // No improving step: the gradient is at numerical noise level.
            obj.evaluate(x, &g);
            if (g.cwiseAbs().maxCoeff() < 1e3 * options.gradient_tolerance) fit.converged = true;
            break;
        }
        const Eigen::VectorXd s = xn - x;
        // BFGS for maximization: work with y = -(gn - g).
        const Eigen::VectorXd yv = g - gn;
        const double sy = s.dot(yv);
        const double df = fn - f;
        x = xn;
        g = gn;
        f = fn;
        fit.loglik_trace.push_back(f);
        if (sy > 1e-12 * s.norm() * yv.norm()) {
            const double rho = 1.0 / sy;
            const Eigen::MatrixXd I = Eigen::MatrixXd::Identity(d, d);
            Hinv = (I - rho * s * yv.transpose()) * Hinv * (I - rho * yv * s.transpose()) + rho * s * s.transpose();
        }
        if (x(p + 1) <= kMinLogSigma && g(p + 1) <= 0.0) {
            // Pinned at the lower bound with an outward gradient.
            fit.converged = g.head(p + 1).cwiseAbs().maxCoeff() < 1e-3;
            break;
        }
        if (std::abs(df) < 1e-13 * (1.0 + std::abs(f)) && s.norm() < 1e-10) {
            fit.converged = g.cwiseAbs().maxCoeff() < 1e3 * options.gradient_tolerance;
            break;
        }
    }
    fit.iterations = iter;
    if (!fit.converged && iter >= options.max_iterations) {
        fit.warnings.push_back("outer optimization did not converge within " + std::to_string(options.max_iterations) +
                               " iterations");
    }

    fit.sigma = std::exp(x(p + 1));
    if (fit.sigma < options.sigma_floor) {
        const bool converged = fit.converged;
        apply_glm(fit, glm);
        fit.converged = converged || glm.converged;
        fit.boundary = true;
        fit.warnings.push_back("random-intercept sd collapsed to the boundary; refit as a plain Poisson GLM");
        fit.std_errors = fit.covariance.diagonal().cwiseMax(0.0).cwiseSqrt();
        return fit;
    }

    fit.beta = x.head(p + 1);
    fit.log_likelihood = f;
    const Eigen::MatrixXd info = -numeric_hessian(obj, x);
    Eigen::MatrixXd cov;
    if (!invert_spd(info, cov)) {
        fit.warnings.push_back("observed information is not positive definite; covariance unavailable");
        fit.covariance = Eigen::MatrixXd::Constant(p + 1, p + 1, std::numeric_limits<double>::quiet_NaN());
        fit.std_errors = Eigen::VectorXd::Constant(p + 1, std::numeric_limits<double>::quiet_NaN());
        fit.converged = false;
        return fit;
    }
    if (options.robust_covariance) {
        Eigen::MatrixXd G;
        Eigen::VectorXd tmp;
        obj.evaluate(x, &tmp, &G);
        const Eigen::MatrixXd meat = G * G.transpose();
        cov = cov * meat * cov;
    }
    fit.covariance = make_psd(cov.topLeftCorner(p + 1, p + 1));
    fit.std_errors = fit.covariance.diagonal().cwiseMax(0.0).cwiseSqrt();
    return fit;
}

std::vector<RateRatioRow> rate_ratio_table(const GlmmFit& fit, std::span<const std::string> dimension_names,
                                           double level) {
    const auto p = static_cast<std::size_t>(fit.beta.size());
    if (p == 0 || dimension_names.size() != p - 1)
        throw std::invalid_argument("rate_ratio_table: expected one name per non-intercept coefficient");
    const double z = normal_quantile(0.5 + level / 2.0);
    std::vector<RateRatioRow> rows;
    for (std::size_t j = 1; j < p; ++j) {
        RateRatioRow r;
        r.dimension = dimension_names[j - 1];
        r.beta = fit.beta(static_cast<Eigen::Index>(j));
        r.std_error = fit.std_errors.size() > 0 ? fit.std_errors(static_cast<Eigen::Index>(j))
                                                : std::numeric_limits<double>::quiet_NaN();
        r.rate_ratio = std::exp(r.beta);
        r.ci_low = std::exp(r.beta - z * r.std_error);
        r.ci_high = std::exp(r.beta + z * r.std_error);
        r.p_value = r.std_error > 0.0 ? two_sided_p(r.beta / r.std_error) : (r.beta == 0.0 ? 1.0 : 0.0);
        rows.push_back(r);
    }
    return rows;
}

} // namespace rubricforge::stats
