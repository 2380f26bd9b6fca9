#pragma once

#include <Eigen/Dense>

namespace msvr {

enum class KernelKind { Rbf, Linear };

struct KernelConfig {
    KernelKind kind = KernelKind::Rbf;
    double gamma = 1.0; // RBF width, k(x, y) = exp(-gamma * |x - y|^2)

    void validate() const;
};

// Immutable Gram matrix; rows index the first input set, columns the second.
class GramMatrix {
public:
    GramMatrix() = default;
    explicit GramMatrix(Eigen::MatrixXd entries) : entries_(std::move(entries)) {}

    [[nodiscard]] const Eigen::MatrixXd& entries() const noexcept { return entries_; }
    [[nodiscard]] Eigen::Index rows() const noexcept { return entries_.rows(); }
    [[nodiscard]] Eigen::Index cols() const noexcept { return entries_.cols(); }
    [[nodiscard]] double operator()(Eigen::Index i, Eigen::Index j) const { return entries_(i, j); }

private:
    Eigen::MatrixXd entries_;
};

double kernel_eval(const Eigen::Ref<const Eigen::VectorXd>& x,
                   const Eigen::Ref<const Eigen::VectorXd>& y,
                   const KernelConfig& cfg);

// Each row of `rows` / `cols` is one input vector.
GramMatrix gram(const Eigen::Ref<const Eigen::MatrixXd>& rows,
                const Eigen::Ref<const Eigen::MatrixXd>& cols,
                const KernelConfig& cfg);

// Symmetric Gram of one input set against itself; mirrors the upper triangle.
GramMatrix gram(const Eigen::Ref<const Eigen::MatrixXd>& inputs, const KernelConfig& cfg);

} // namespace msvr
