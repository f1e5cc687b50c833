#pragma once

#include <vector>

#include "viewopt/env.hpp"
#include "viewopt/learn/nn.hpp"

namespace viewopt {

namespace nn {

// Convolution as im2col + GEMM. W maps receptive-field columns to output
// channels; layout of a column is (cin, ky, kx).
template <class T>
struct Conv {
    int cin = 0, cout = 0, kh = 0, kw = 0, stride = 1, pad = 0;
    Mat<T> W;  // (cin*kh*kw) x cout
    Vec<T> b;

    Conv() = default;
    Conv(int cin_, int cout_, int k, int stride_, int pad_)
        : cin(cin_), cout(cout_), kh(k), kw(k), stride(stride_), pad(pad_),
          W(Mat<T>::Zero(cin_ * k * k, cout_)), b(Vec<T>::Zero(cout_)) {}

    int out_h(int in_h) const { return (in_h + 2 * pad - kh) / stride + 1; }
    int out_w(int in_w) const { return (in_w + 2 * pad - kw) / stride + 1; }

    void init_glorot(Rng& rng) {
        double lim = std::sqrt(6.0 / static_cast<double>(W.rows() + W.cols()));
        for (long i = 0; i < W.size(); ++i) W.data()[i] = static_cast<T>(rng.uniform(-lim, lim));
        b.setZero();
    }

    // X: B x (cin*in_h*in_w) row-major (c, y, x); columns: (B*oh*ow) x (cin*kh*kw)
    Mat<T> im2col(const Mat<T>& X, int in_h, int in_w) const {
        const int B = static_cast<int>(X.rows());
        const int oh = out_h(in_h), ow = out_w(in_w);
        Mat<T> cols = Mat<T>::Zero(static_cast<long>(B) * oh * ow, static_cast<long>(cin) * kh * kw);
        for (int b = 0; b < B; ++b) {
            for (int oy = 0; oy < oh; ++oy) {
                for (int ox = 0; ox < ow; ++ox) {
                    long row = (static_cast<long>(b) * oh + oy) * ow + ox;
                    for (int c = 0; c < cin; ++c) {
                        for (int ky = 0; ky < kh; ++ky) {
                            int y = oy * stride - pad + ky;
                            if (y < 0 || y >= in_h) continue;
                            for (int kx = 0; kx < kw; ++kx) {
                                int x = ox * stride - pad + kx;
                                if (x < 0 || x >= in_w) continue;
                                cols(row, (static_cast<long>(c) * kh + ky) * kw + kx) =
                                    X(b, (static_cast<long>(c) * in_h + y) * in_w + x);
                            }
                        }
                    }
                }
            }
        }
        return cols;
    }

    // scatter-add of column gradients back onto the input layout
    Mat<T> col2im(const Mat<T>& dcols, int B, int in_h, int in_w) const {
        const int oh = out_h(in_h), ow = out_w(in_w);
        Mat<T> dX = Mat<T>::Zero(B, static_cast<long>(cin) * in_h * in_w);
        for (int b = 0; b < B; ++b) {
            for (int oy = 0; oy < oh; ++oy) {
                for (int ox = 0; ox < ow; ++ox) {
                    long row = (static_cast<long>(b) * oh + oy) * ow + ox;
                    for (int c = 0; c < cin; ++c) {
                        for (int ky = 0; ky < kh; ++ky) {
                            int y = oy * stride - pad + ky;
                            if (y < 0 || y >= in_h) continue;
                            for (int kx = 0; kx < kw; ++kx) {
                                int x = ox * stride - pad + kx;
                                if (x < 0 || x >= in_w) continue;
                                dX(b, (static_cast<long>(c) * in_h + y) * in_w + x) +=
                                    dcols(row, (static_cast<long>(c) * kh + ky) * kw + kx);
                            }
                        }
                    }
                }
            }
        }
        return dX;
    }

    void append_tensors(const std::string& prefix, std::vector<TensorRef<T>>& out) {
        out.push_back({prefix + ".W", W.data(), W.rows(), W.cols()});
        out.push_back({prefix + ".b", b.data(), b.size(), 1});
    }
};

}  // namespace nn

// Convolutional actor-critic baseline over the 2-channel (depth, mask)
// image: conv stages of 64 10x10, 64 5x5, 32 3x3 and 16 3x3 filters, then
// fully connected layers of 4096, 2048 and 1024 units into the same heads as
// the point policy.
template <class T>
class CnnPolicy {
  public:
    using Obs = ImageObservation;
    using Scalar = T;
    static constexpr std::uint32_t kArchTag = 2;

    CnnPolicy(int in_h, int in_w, std::uint64_t init_seed = 0)
        : in_h_(in_h), in_w_(in_w), conv1_(2, 64, 10, 2, 0), conv2_(64, 64, 5, 2, 0), conv3_(64, 32, 3, 1, 1),
          conv4_(32, 16, 3, 1, 1), policy_head_(1024, kActionCount), value_head_(1024, 1) {
        h1_ = conv1_.out_h(in_h_);
        w1_ = conv1_.out_w(in_w_);
        h2_ = conv2_.out_h(h1_);
        w2_ = conv2_.out_w(w1_);
        h3_ = conv3_.out_h(h2_);
        w3_ = conv3_.out_w(w2_);
        h4_ = conv4_.out_h(h3_);
        w4_ = conv4_.out_w(w3_);
        if (h1_ < 1 || w1_ < 1 || h2_ < 1 || w2_ < 1)
            throw std::invalid_argument("cnn policy: input image too small for the filter stack");
        flat_dim_ = 16L * h4_ * w4_;
        fc1_ = nn::Linear<T>(static_cast<int>(flat_dim_), 4096);
        fc2_ = nn::Linear<T>(4096, 2048);
        fc3_ = nn::Linear<T>(2048, 1024);

        Rng rng = Rng::fork(init_seed, 0xc33);
        conv1_.init_glorot(rng);
        conv2_.init_glorot(rng);
        conv3_.init_glorot(rng);
        conv4_.init_glorot(rng);
        fc1_.init_glorot(rng);
        fc2_.init_glorot(rng);
        fc3_.init_glorot(rng);
        policy_head_.init_glorot(rng);
        value_head_.init_glorot(rng);
    }

    int input_height() const { return in_h_; }
    int input_width() const { return in_w_; }

    struct Batch {
        int count = 0;
        nn::Mat<T> X;  // B x (2*H*W)
    };

    static Batch make_batch(const std::vector<const Obs*>& observations) {
        Batch batch;
        batch.count = static_cast<int>(observations.size());
        if (batch.count == 0) return batch;
        long dim = static_cast<long>(observations.front()->data.size());
        batch.X.resize(batch.count, dim);
        for (int b = 0; b < batch.count; ++b) {
            const Obs& obs = *observations[static_cast<std::size_t>(b)];
            if (static_cast<long>(obs.data.size()) != dim)
                throw std::invalid_argument("image batch: inconsistent image sizes");
            for (long i = 0; i < dim; ++i) batch.X(b, i) = static_cast<T>(obs.data[static_cast<std::size_t>(i)]);
        }
        return batch;
    }

    struct Cache {
        nn::Mat<T> cols1, cols2, cols3, cols4;  // im2col inputs per stage
        nn::Mat<T> a1, a2, a3, a4;              // post-relu conv maps, (B*oh*ow) x cout
        nn::Mat<T> flat;                        // B x flat_dim
        nn::Mat<T> f1, f2, f3;                  // post-relu fc activations
    };

    struct Output {
        nn::Mat<T> logits;
        nn::Vec<T> value;
    };

    Output forward(const Batch& batch, Cache* cache) const {
        Cache local;
        Cache& c = cache ? *cache : local;
        const int B = batch.count;

        auto conv_fwd = [B](const nn::Conv<T>& conv, const nn::Mat<T>& X, int in_h, int in_w, nn::Mat<T>& cols,
                            nn::Mat<T>& act) {
            cols = conv.im2col(X, in_h, in_w);
            act.noalias() = cols * conv.W;
            act.rowwise() += conv.b.transpose();
            nn::relu_inplace(act);
            // reshape (B*oh*ow) x cout -> B x (cout*oh*ow) for the next stage
            const int oh = conv.out_h(in_h), ow = conv.out_w(in_w);
            nn::Mat<T> next(B, static_cast<long>(conv.cout) * oh * ow);
            for (int b = 0; b < B; ++b)
                for (int ch = 0; ch < conv.cout; ++ch)
                    for (int p = 0; p < oh * ow; ++p)
                        next(b, static_cast<long>(ch) * oh * ow + p) = act(static_cast<long>(b) * oh * ow + p, ch);
            return next;
        };

        nn::Mat<T> x1 = conv_fwd(conv1_, batch.X, in_h_, in_w_, c.cols1, c.a1);
        nn::Mat<T> x2 = conv_fwd(conv2_, x1, h1_, w1_, c.cols2, c.a2);
        nn::Mat<T> x3 = conv_fwd(conv3_, x2, h2_, w2_, c.cols3, c.a3);
        c.flat = conv_fwd(conv4_, x3, h3_, w3_, c.cols4, c.a4);

        c.f1 = fc1_.forward(c.flat);
        nn::relu_inplace(c.f1);
        c.f2 = fc2_.forward(c.f1);
        nn::relu_inplace(c.f2);
        c.f3 = fc3_.forward(c.f2);
        nn::relu_inplace(c.f3);

        Output out;
        out.logits = policy_head_.forward(c.f3);
        out.value = value_head_.forward(c.f3).col(0);
        return out;
    }

    void backward(const Batch& batch, const Cache& c, const nn::Mat<T>& dlogits, const nn::Vec<T>& dvalue,
                  CnnPolicy<T>& grads) const {
        const int B = batch.count;

        nn::Mat<T> df3_pol, df3_val;
        policy_head_.backward(c.f3, dlogits, &df3_pol, grads.policy_head_);
        nn::Mat<T> dvalue_m = dvalue;
        value_head_.backward(c.f3, dvalue_m, &df3_val, grads.value_head_);
        nn::Mat<T> df3 = df3_pol + df3_val;
        nn::relu_backward_inplace(df3, c.f3);

        nn::Mat<T> df2;
        fc3_.backward(c.f2, df3, &df2, grads.fc3_);
        nn::relu_backward_inplace(df2, c.f2);
        nn::Mat<T> df1;
        fc2_.backward(c.f1, df2, &df1, grads.fc2_);
        nn::relu_backward_inplace(df1, c.f1);
        nn::Mat<T> dflat;
        fc1_.backward(c.flat, df1, &dflat, grads.fc1_);

        // dflat is B x (cout*oh*ow); walk the conv stack back
        auto conv_bwd = [B](const nn::Conv<T>& conv, nn::Conv<T>& grad, const nn::Mat<T>& cols, const nn::Mat<T>& act,
                            const nn::Mat<T>& dnext, int in_h, int in_w, bool need_dx) {
            const int oh = conv.out_h(in_h), ow = conv.out_w(in_w);
            // back to (B*oh*ow) x cout layout
            nn::Mat<T> dact(static_cast<long>(B) * oh * ow, conv.cout);
            for (int b = 0; b < B; ++b)
                for (int ch = 0; ch < conv.cout; ++ch)
                    for (int p = 0; p < oh * ow; ++p)
                        dact(static_cast<long>(b) * oh * ow + p, ch) = dnext(b, static_cast<long>(ch) * oh * ow + p);
            nn::relu_backward_inplace(dact, act);
            grad.W.noalias() += cols.transpose() * dact;
            grad.b.noalias() += dact.colwise().sum().transpose();
            nn::Mat<T> dX;
            if (need_dx) {
                nn::Mat<T> dcols = dact * conv.W.transpose();
                dX = conv.col2im(dcols, B, in_h, in_w);
            }
            return dX;
        };

        nn::Mat<T> dx3 = conv_bwd(conv4_, grads.conv4_, c.cols4, c.a4, dflat, h3_, w3_, true);
        nn::Mat<T> dx2 = conv_bwd(conv3_, grads.conv3_, c.cols3, c.a3, dx3, h2_, w2_, true);
        nn::Mat<T> dx1 = conv_bwd(conv2_, grads.conv2_, c.cols2, c.a2, dx2, h1_, w1_, true);
        conv_bwd(conv1_, grads.conv1_, c.cols1, c.a1, dx1, in_h_, in_w_, false);
    }

    std::vector<nn::TensorRef<T>> tensors() {
        std::vector<nn::TensorRef<T>> out;
        conv1_.append_tensors("conv1", out);
        conv2_.append_tensors("conv2", out);
        conv3_.append_tensors("conv3", out);
        conv4_.append_tensors("conv4", out);
        fc1_.append_tensors("fc1", out);
        fc2_.append_tensors("fc2", out);
        fc3_.append_tensors("fc3", out);
        policy_head_.append_tensors("policy_head", out);
        value_head_.append_tensors("value_head", out);
        return out;
    }

    void zero() {
        for (auto& t : tensors()) Eigen::Map<nn::Vec<T>>(t.data, t.size()).setZero();
    }

  private:
    int in_h_, in_w_;
    int h1_ = 0, w1_ = 0, h2_ = 0, w2_ = 0, h3_ = 0, w3_ = 0, h4_ = 0, w4_ = 0;
    long flat_dim_ = 0;
    nn::Conv<T> conv1_, conv2_, conv3_, conv4_;
    nn::Linear<T> fc1_, fc2_, fc3_, policy_head_, value_head_;
};

}  // namespace viewopt
