#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <stdexcept>
#include <string>

#include <Eigen/Cholesky>
#include <Eigen/Dense>

#include "cake/cluster.hpp"

namespace cake {
namespace {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;

Eigen::Map<const Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>> as_eigen(
    const DataMatrix& m) {
    return {m.values().data(), static_cast<Eigen::Index>(m.rows()), static_cast<Eigen::Index>(m.cols())};
}

struct Component {
    Eigen::LLT<Matrix> llt;
    double log_norm = 0.0;  // log weight - d/2 log(2 pi) - 1/2 log det
};

std::vector<Component> factorize(const GmmModel& model) {
    const auto d = static_cast<Eigen::Index>(model.dims());
    std::vector<Component> out(model.weights.size());
    for (std::size_t c = 0; c < out.size(); ++c) {
        Matrix cov = as_eigen(model.covariances[c]);
        out[c].llt.compute(cov);
        if (out[c].llt.info() != Eigen::Success) {
            throw std::runtime_error("gmm: covariance of component " + std::to_string(c) +
                                     " is not positive definite");
        }
        const Matrix& l = out[c].llt.matrixLLT();
        double logdet = 0.0;
        for (Eigen::Index j = 0; j < d; ++j) {
            const double v = l(j, j);
            if (!(v > 0.0) || !std::isfinite(v)) {
                throw std::runtime_error("gmm: covariance of component " + std::to_string(c) + " collapsed");
            }
            logdet += 2.0 * std::log(v);
        }
        out[c].log_norm = std::log(model.weights[c]) - 0.5 * static_cast<double>(d) * std::log(2.0 * std::numbers::pi) -
                          0.5 * logdet;
    }
    return out;
}

// Fills resp (n x k) and returns the mean per-sample log-likelihood.
double e_step(const GmmModel& model, const DataMatrix& data, Matrix& resp) {
    const auto parts = factorize(model);
    const auto n = static_cast<Eigen::Index>(data.rows());
    const auto k = static_cast<Eigen::Index>(parts.size());
    auto x = as_eigen(data);
    auto means = as_eigen(model.means);
    resp.resize(n, k);
    for (Eigen::Index c = 0; c < k; ++c) {
        Matrix centered = (x.rowwise() - means.row(c)).transpose();
        parts[static_cast<std::size_t>(c)].llt.matrixL().solveInPlace(centered);
        Vector maha = centered.colwise().squaredNorm().transpose();
        resp.col(c) = (-0.5 * maha).array() + parts[static_cast<std::size_t>(c)].log_norm;
    }
    double total = 0.0;
    for (Eigen::Index i = 0; i < n; ++i) {
        const double top = resp.row(i).maxCoeff();
        const double s = (resp.row(i).array() - top).exp().sum();
        const double lse = top + std::log(s);
        resp.row(i) = (resp.row(i).array() - lse).exp();
        total += lse;
    }
    return total / static_cast<double>(n);
}

void m_step(const DataMatrix& data, const Matrix& resp, Covariance type, double reg, GmmModel& model) {
    const auto n = static_cast<Eigen::Index>(data.rows());
    const auto d = static_cast<Eigen::Index>(data.cols());
    const auto k = resp.cols();
    auto x = as_eigen(data);
    const double tiny = 10.0 * std::numeric_limits<double>::epsilon();
    Vector nk = resp.colwise().sum().transpose().array() + tiny;
    Matrix means = (resp.transpose() * x).array().colwise() / nk.array();

    model.weights.assign(static_cast<std::size_t>(k), 0.0);
    model.means = DataMatrix(static_cast<std::size_t>(k), static_cast<std::size_t>(d));
    model.covariances.assign(static_cast<std::size_t>(k),
                             DataMatrix(static_cast<std::size_t>(d), static_cast<std::size_t>(d)));
    for (Eigen::Index c = 0; c < k; ++c) {
        model.weights[static_cast<std::size_t>(c)] = nk(c) / static_cast<double>(n);
        Matrix centered = x.rowwise() - means.row(c);
        Matrix cov;
        if (type == Covariance::Full) {
            cov = (centered.array().colwise() * resp.col(c).array()).matrix().transpose() * centered / nk(c);
        } else {
            Vector var = (centered.array().square().colwise() * resp.col(c).array()).colwise().sum().transpose() /
                         nk(c);
            cov = var.asDiagonal();
        }
        cov.diagonal().array() += reg;
        for (Eigen::Index j = 0; j < d; ++j) {
            model.means(static_cast<std::size_t>(c), static_cast<std::size_t>(j)) = means(c, j);
            for (Eigen::Index l = 0; l < d; ++l) {
                model.covariances[static_cast<std::size_t>(c)](static_cast<std::size_t>(j),
                                                               static_cast<std::size_t>(l)) =
                    type == Covariance::Full ? 0.5 * (cov(j, l) + cov(l, j)) : cov(j, l);
            }
        }
    }
    double wsum = 0.0;
    for (double w : model.weights) wsum += w;
    for (double& w : model.weights) w /= wsum;
}

double default_reg(const DataMatrix& data) {
    auto x = as_eigen(data);
    const auto d = static_cast<double>(data.cols());
    const Eigen::RowVectorXd mean = x.colwise().mean();
    const double trace = (x.rowwise() - mean).array().square().sum() / static_cast<double>(data.rows());
    const double reg = 1e-6 * trace / d;
    return reg > 0.0 ? reg : 1e-12;
}

}  // namespace

GmmModel gmm_fit(const DataMatrix& data, const GmmOptions& options) {
    if (data.empty()) {
        throw std::invalid_argument("gmm: empty data");
    }
    if (options.k < 1 || static_cast<std::size_t>(options.k) > data.rows()) {
        throw std::invalid_argument("gmm: k must be in [1, n]");
    }
    if (options.max_iter < 1) {
        throw std::invalid_argument("gmm: max_iter must be at least 1");
    }
    if (options.reg && *options.reg < 0.0) {
        throw std::invalid_argument("gmm: reg must be nonnegative");
    }
    data.require_finite();

    GmmModel model;
    model.covariance = options.covariance;
    model.reg = options.reg.value_or(default_reg(data));

    KMeansOptions init;
    init.k = options.k;
    init.init = KMeansInit::D2Sampling;
    init.seed = derive_seed(options.seed, "gmm_init");
    init.max_iter = 100;
    const Partition start = kmeans(data, init);

    Matrix resp = Matrix::Zero(static_cast<Eigen::Index>(data.rows()), options.k);
    for (std::size_t i = 0; i < data.rows(); ++i) {
        resp(static_cast<Eigen::Index>(i), start.labels[i]) = 1.0;
    }
    m_step(data, resp, options.covariance, model.reg, model);

    for (int it = 0; it < options.max_iter; ++it) {
        const double ll = e_step(model, data, resp);
        model.log_likelihood_trace.push_back(ll);
        model.log_likelihood = ll;
        const auto t = model.log_likelihood_trace.size();
        if (t >= 2 && std::abs(ll - model.log_likelihood_trace[t - 2]) < options.tol) {
            break;
        }
        if (it + 1 == options.max_iter) {
            break;
        }
        m_step(data, resp, options.covariance, model.reg, model);
    }
    return model;
}

DataMatrix gmm_posteriors(const GmmModel& model, const DataMatrix& data) {
    if (data.cols() != model.dims()) {
        throw std::invalid_argument("gmm: data has " + std::to_string(data.cols()) + " columns, model expects " +
                                    std::to_string(model.dims()));
    }
    Matrix resp;
    e_step(model, data, resp);
    DataMatrix out(data.rows(), static_cast<std::size_t>(model.k()));
    for (std::size_t i = 0; i < out.rows(); ++i) {
        for (std::size_t c = 0; c < out.cols(); ++c) {
            out(i, c) = resp(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(c));
        }
    }
    return out;
}

std::vector<double> gmm_pmax(const GmmModel& model, const DataMatrix& data) {
    const DataMatrix post = gmm_posteriors(model, data);
    std::vector<double> out(post.rows());
    for (std::size_t i = 0; i < post.rows(); ++i) {
        auto row = post.row(i);
        out[i] = *std::max_element(row.begin(), row.end());
    }
    return out;
}

Partition gmm_partition(const GmmModel& model, const DataMatrix& data) {
    const DataMatrix post = gmm_posteriors(model, data);
    Partition p;
    p.k = model.k();
    p.labels.resize(post.rows());
    for (std::size_t i = 0; i < post.rows(); ++i) {
        auto row = post.row(i);
        p.labels[i] = static_cast<int>(std::distance(row.begin(), std::max_element(row.begin(), row.end())));
    }
    p.centroids = model.means;
    return p;
}

}  // namespace cake
