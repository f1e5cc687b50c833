#pragma once

#include <Eigen/Dense>
#include <cmath>
#include <stdexcept>
#include <string>
#include <vector>

#include "viewopt/rng.hpp"

namespace viewopt::nn {

template <class T>
using Mat = Eigen::Matrix<T, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
template <class T>
using Vec = Eigen::Matrix<T, Eigen::Dynamic, 1>;

// Flat view of one parameter (or gradient) tensor.
template <class T>
struct TensorRef {
    std::string name;
    T* data = nullptr;
    long rows = 0;
    long cols = 0;
    long size() const { return rows * cols; }
};

template <class T>
struct Linear {
    Mat<T> W;  // in x out
    Vec<T> b;  // out

    Linear() = default;
    Linear(int in, int out) : W(Mat<T>::Zero(in, out)), b(Vec<T>::Zero(out)) {}

    void init_glorot(Rng& rng) {
        double lim = std::sqrt(6.0 / static_cast<double>(W.rows() + W.cols()));
        for (long i = 0; i < W.size(); ++i) W.data()[i] = static_cast<T>(rng.uniform(-lim, lim));
        b.setZero();
    }

    // Y = X W + b, rows are samples
    Mat<T> forward(const Mat<T>& X) const {
        Mat<T> Y = X * W;
        Y.rowwise() += b.transpose();
        return Y;
    }

    void backward(const Mat<T>& X, const Mat<T>& dY, Mat<T>* dX, Linear<T>& grad) const {
        grad.W.noalias() += X.transpose() * dY;
        grad.b.noalias() += dY.colwise().sum().transpose();
        if (dX) dX->noalias() = dY * W.transpose();
    }

    void append_tensors(const std::string& prefix, std::vector<TensorRef<T>>& out) {
        out.push_back({prefix + ".W", W.data(), W.rows(), W.cols()});
        out.push_back({prefix + ".b", b.data(), b.size(), 1});
    }
};

template <class T>
void relu_inplace(Mat<T>& X) {
    X = X.cwiseMax(T(0));
}

// gradient through relu given the activated output
template <class T>
void relu_backward_inplace(Mat<T>& dY, const Mat<T>& activated) {
    dY = (activated.array() > T(0)).template cast<T>() * dY.array();
}

// row-wise stable softmax
template <class T>
Mat<T> softmax_rows(const Mat<T>& logits) {
    Mat<T> p = logits;
    for (long r = 0; r < p.rows(); ++r) {
        T m = p.row(r).maxCoeff();
        p.row(r) = (p.row(r).array() - m).exp();
        p.row(r) /= p.row(r).sum();
    }
    return p;
}

template <class T>
T entropy_row(const Eigen::Ref<const Eigen::Matrix<T, 1, Eigen::Dynamic>>& p) {
    T h = 0;
    for (long i = 0; i < p.size(); ++i)
        if (p(i) > T(0)) h -= p(i) * std::log(p(i));
    return h;
}

template <class T>
bool all_finite(const Mat<T>& m) {
    return m.allFinite();
}

// SGD with momentum and global gradient-norm clipping.
template <class T>
class MomentumOptimizer {
  public:
    MomentumOptimizer(double lr, double momentum, double grad_clip) : lr_(lr), momentum_(momentum), clip_(grad_clip) {}

    void step(const std::vector<TensorRef<T>>& params, const std::vector<TensorRef<T>>& grads) {
        if (params.size() != grads.size()) throw std::logic_error("optimizer: parameter/gradient mismatch");
        if (velocity_.empty()) {
            for (const auto& p : params) velocity_.emplace_back(Vec<T>::Zero(p.size()));
        }
        double norm_sq = 0.0;
        for (const auto& g : grads)
            norm_sq += Eigen::Map<const Vec<T>>(g.data, g.size()).template cast<double>().squaredNorm();
        double scale = 1.0;
        if (clip_ > 0.0) {
            double norm = std::sqrt(norm_sq);
            if (norm > clip_) scale = clip_ / norm;
        }
        for (std::size_t i = 0; i < params.size(); ++i) {
            auto p = Eigen::Map<Vec<T>>(params[i].data, params[i].size());
            auto g = Eigen::Map<const Vec<T>>(grads[i].data, grads[i].size());
            velocity_[i] = static_cast<T>(momentum_) * velocity_[i] - static_cast<T>(lr_ * scale) * g;
            p += velocity_[i];
        }
    }

  private:
    double lr_, momentum_, clip_;
    std::vector<Vec<T>> velocity_;
};

}  // namespace viewopt::nn
