#include "msvr/kernels.hpp"

#include <cmath>
#include <string>

#include "msvr/error.hpp"

namespace msvr {

void KernelConfig::validate() const {
    if (kind == KernelKind::Rbf && !(gamma > 0.0 && std::isfinite(gamma)))
        throw InputError("RBF kernel requires a finite gamma > 0, got " + std::to_string(gamma));
}

namespace {

double squared_distance(const Eigen::Ref<const Eigen::VectorXd>& x,
                        const Eigen::Ref<const Eigen::VectorXd>& y) {
    double acc = 0.0;
    for (Eigen::Index k = 0; k < x.size(); ++k) {
        const double d = x[k] - y[k];
        acc += d * d;
    }
    return acc;
}

double eval_unchecked(const Eigen::Ref<const Eigen::VectorXd>& x,
                      const Eigen::Ref<const Eigen::VectorXd>& y,
                      const KernelConfig& cfg) {
    switch (cfg.kind) {
    case KernelKind::Rbf:
        return std::exp(-cfg.gamma * squared_distance(x, y));
    case KernelKind::Linear:
        return x.dot(y);
    }
    return 0.0;
}

} // namespace

double kernel_eval(const Eigen::Ref<const Eigen::VectorXd>& x,
                   const Eigen::Ref<const Eigen::VectorXd>& y,
                   const KernelConfig& cfg) {
    cfg.validate();
    if (x.size() != y.size())
        throw InputError("kernel_eval: dimension mismatch (" + std::to_string(x.size()) + " vs " +
                         std::to_string(y.size()) + ")");
    return eval_unchecked(x, y, cfg);
}

GramMatrix gram(const Eigen::Ref<const Eigen::MatrixXd>& rows,
                const Eigen::Ref<const Eigen::MatrixXd>& cols,
                const KernelConfig& cfg) {
    cfg.validate();
    if (rows.cols() != cols.cols())
        throw InputError("gram: input dimension mismatch (" + std::to_string(rows.cols()) + " vs " +
                         std::to_string(cols.cols()) + ")");
    Eigen::MatrixXd k(rows.rows(), cols.rows());
    for (Eigen::Index i = 0; i < rows.rows(); ++i)
        for (Eigen::Index j = 0; j < cols.rows(); ++j)
            k(i, j) = eval_unchecked(rows.row(i).transpose(), cols.row(j).transpose(), cfg);
    return GramMatrix(std::move(k));
}

GramMatrix gram(const Eigen::Ref<const Eigen::MatrixXd>& inputs, const KernelConfig& cfg) {
    cfg.validate();
    const Eigen::Index n = inputs.rows();
    Eigen::MatrixXd k(n, n);
    for (Eigen::Index i = 0; i < n; ++i) {
        k(i, i) = eval_unchecked(inputs.row(i).transpose(), inputs.row(i).transpose(), cfg);
        for (Eigen::Index j = i + 1; j < n; ++j) {
            const double v = eval_unchecked(inputs.row(i).transpose(), inputs.row(j).transpose(), cfg);
            k(i, j) = v;
            k(j, i) = v;
        }
    }
    return GramMatrix(std::move(k));
}

} // namespace msvr
