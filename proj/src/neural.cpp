#include "risim/neural.hpp"

#include <cmath>
#include <cstring>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace risim {

std::vector<arma::uword> MlpModel::layer_param_counts() const {
    std::vector<arma::uword> counts;
    counts.reserve(W.size());
    for (std::size_t i = 0; i < W.size(); ++i)
        counts.push_back(W[i].n_elem + b[i].n_elem);
    return counts;
}

arma::uword MlpModel::param_count() const {
    arma::uword total = 0;
    for (arma::uword c : layer_param_counts())
        total += c;
    return total;
}

MlpModel make_mlp(arma::uword in_dim, const std::vector<arma::uword>& widths,
                  RngStream& rng) {
    if (in_dim == 0 || widths.empty())
        throw std::invalid_argument("make_mlp: empty layout");
    MlpModel m;
    arma::uword fan_in = in_dim;
    for (arma::uword width : widths) {
        const double limit = std::sqrt(6.0 / static_cast<double>(fan_in));
        arma::mat Wi(width, fan_in);
        for (arma::uword j = 0; j < Wi.n_cols; ++j)
            for (arma::uword i = 0; i < Wi.n_rows; ++i)
                Wi(i, j) = rng.uniform(-limit, limit);
        m.W.push_back(std::move(Wi));
        m.b.emplace_back(width, arma::fill::zeros);
        fan_in = width;
    }
    return m;
}

MlpModel make_default_mlp(arma::uword in_dim, RngStream& rng) {
    return make_mlp(in_dim, {32, 64, 128, 64, 1}, rng);
}

namespace {

// Forward pass keeping pre-activations; A[i] is the input of layer i.
struct ForwardCache {
    std::vector<arma::mat> A;  // n_layers + 1 entries
    std::vector<arma::mat> Z;  // n_layers entries
};

void forward_cached(const MlpModel& m, const arma::mat& X, ForwardCache& c) {
    const std::size_t n = m.W.size();
    c.A.assign(n + 1, {});
    c.Z.assign(n, {});
    c.A[0] = X;
    for (std::size_t i = 0; i < n; ++i) {
        c.Z[i] = m.W[i] * c.A[i];
        c.Z[i].each_col() += m.b[i];
        c.A[i + 1] = (i + 1 < n) ? arma::clamp(c.Z[i], 0.0, arma::datum::inf)
                                 : c.Z[i];
    }
}

}  // namespace

double mlp_forward(const MlpModel& m, const arma::vec& x) {
    if (x.n_elem != m.in_dim())
        throw std::invalid_argument("mlp_forward: feature width mismatch");
    arma::vec a = x;
    const std::size_t n = m.W.size();
    for (std::size_t i = 0; i < n; ++i) {
        a = m.W[i] * a + m.b[i];
        if (i + 1 < n)
            a = arma::clamp(a, 0.0, arma::datum::inf);
    }
    return a(0);
}

arma::vec mlp_forward_batch(const MlpModel& m, const arma::mat& X) {
    if (X.n_rows != m.in_dim())
        throw std::invalid_argument("mlp_forward_batch: feature width mismatch");
    arma::mat A = X;
    const std::size_t n = m.W.size();
    for (std::size_t i = 0; i < n; ++i) {
        A = m.W[i] * A;
        A.each_col() += m.b[i];
        if (i + 1 < n)
            A = arma::clamp(A, 0.0, arma::datum::inf);
    }
    return A.row(0).t();
}

MlpGradients make_zero_gradients(const MlpModel& m) {
    MlpGradients g;
    for (std::size_t i = 0; i < m.W.size(); ++i) {
        g.dW.emplace_back(arma::size(m.W[i]), arma::fill::zeros);
        g.db.emplace_back(arma::size(m.b[i]), arma::fill::zeros);
    }
    return g;
}

double mlp_backward_batch(const MlpModel& m, const arma::mat& X,
                          const arma::vec& y, MlpGradients& grads) {
    const std::size_t n = m.W.size();
    const arma::uword B = X.n_cols;
    if (y.n_elem != B)
        throw std::invalid_argument("mlp_backward_batch: label count mismatch");

    ForwardCache c;
    forward_cached(m, X, c);
    const arma::rowvec out = c.Z[n - 1].row(0);
    const arma::rowvec residual = out - y.t();
    const double mse = arma::dot(residual, residual) / static_cast<double>(B);

    if (grads.dW.size() != n)
        grads = make_zero_gradients(m);

    // dMSE/dout = (2/B) * residual, then the usual affine/ReLU chain.
    arma::mat delta = (2.0 / static_cast<double>(B)) * residual;
    for (std::size_t i = n; i-- > 0;) {
        grads.dW[i] = delta * c.A[i].t();
        grads.db[i] = arma::sum(delta, 1);
        if (i > 0)
            delta = (m.W[i].t() * delta) %
                    arma::conv_to<arma::mat>::from(c.Z[i - 1] > 0.0);
    }
    return mse;
}

MlpGradients mlp_backward(const MlpModel& m, const arma::vec& x, double label) {
    MlpGradients g = make_zero_gradients(m);
    mlp_backward_batch(m, arma::mat(x), arma::vec{label}, g);
    return g;
}

AdamState make_adam_state(const MlpModel& m, double lr) {
    AdamState st;
    st.lr = lr;
    for (std::size_t i = 0; i < m.W.size(); ++i) {
        st.mW.emplace_back(arma::size(m.W[i]), arma::fill::zeros);
        st.vW.emplace_back(arma::size(m.W[i]), arma::fill::zeros);
        st.mb.emplace_back(arma::size(m.b[i]), arma::fill::zeros);
        st.vb.emplace_back(arma::size(m.b[i]), arma::fill::zeros);
    }
    return st;
}

void adam_step(AdamState& st, MlpModel& m, const MlpGradients& g) {
    if (g.dW.size() != m.W.size())
        throw std::invalid_argument("adam_step: gradient shape mismatch");
    st.step += 1;
    const double t = static_cast<double>(st.step);
    const double bc1 = 1.0 - std::pow(st.beta1, t);
    const double bc2 = 1.0 - std::pow(st.beta2, t);
    for (std::size_t i = 0; i < m.W.size(); ++i) {
        st.mW[i] = st.beta1 * st.mW[i] + (1.0 - st.beta1) * g.dW[i];
        st.vW[i] = st.beta2 * st.vW[i] + (1.0 - st.beta2) * arma::square(g.dW[i]);
        m.W[i] -= st.lr * (st.mW[i] / bc1) / (arma::sqrt(st.vW[i] / bc2) + st.eps);

        st.mb[i] = st.beta1 * st.mb[i] + (1.0 - st.beta1) * g.db[i];
        st.vb[i] = st.beta2 * st.vb[i] + (1.0 - st.beta2) * arma::square(g.db[i]);
        m.b[i] -= st.lr * (st.mb[i] / bc1) / (arma::sqrt(st.vb[i] / bc2) + st.eps);
    }
}

void Normalizer::fit(const arma::mat& X, const arma::vec& y) {
    if (X.n_cols == 0)
        throw std::invalid_argument("Normalizer::fit: empty data");
    mean = arma::mean(X, 1);
    stdev = arma::stddev(X, 0, 1);
    stdev.transform([](double s) { return s > 1e-12 ? s : 1.0; });
    label_mean = arma::mean(y);
    label_stdev = arma::stddev(y);
    if (!(label_stdev > 1e-12))
        label_stdev = 1.0;
    fitted = true;
}

arma::mat Normalizer::transform(const arma::mat& X) const {
    if (!fitted)
        throw std::logic_error("Normalizer: transform before fit");
    arma::mat Z = X;
    Z.each_col() -= mean;
    Z.each_col() /= stdev;
    return Z;
}

arma::vec Normalizer::transform_vec(const arma::vec& x) const {
    if (!fitted)
        throw std::logic_error("Normalizer: transform before fit");
    return (x - mean) / stdev;
}

double Normalizer::transform_label(double y) const {
    return (y - label_mean) / label_stdev;
}

double Normalizer::inverse_label(double yhat) const {
    return yhat * label_stdev + label_mean;
}

namespace {

double evaluate_mse(const MlpModel& m, const arma::mat& X, const arma::vec& y,
                    const arma::uvec& idx) {
    const arma::uword chunk = 4096;
    double acc = 0.0;
    for (arma::uword start = 0; start < idx.n_elem; start += chunk) {
        const arma::uword stop = std::min(start + chunk, idx.n_elem) - 1;
        const arma::uvec part = idx.subvec(start, stop);
        arma::vec out = mlp_forward_batch(m, X.cols(part));
        acc += arma::accu(arma::square(out - y.elem(part)));
    }
    return acc / static_cast<double>(idx.n_elem);
}

}  // namespace

TrainHistory train_mlp(MlpModel& model, Normalizer& norm, const arma::mat& X,
                       const arma::vec& y, const arma::uvec& train_idx,
                       const arma::uvec& val_idx, const TrainConfig& cfg) {
    if (train_idx.is_empty())
        throw std::invalid_argument("train_mlp: empty training split");
    if (X.n_rows != model.in_dim())
        throw std::invalid_argument("train_mlp: feature width mismatch");

    norm.fit(X.cols(train_idx), y.elem(train_idx));
    arma::mat Xn = norm.transform(X);
    arma::vec yn = y;
    yn.transform([&](double v) { return norm.transform_label(v); });

    AdamState adam = make_adam_state(model, cfg.lr);
    MlpGradients grads = make_zero_gradients(model);
    TrainHistory hist;
    hist.best_val_mse = arma::datum::inf;
    MlpModel best = model;

    const arma::uword n_train = train_idx.n_elem;
    std::vector<arma::uword> order(train_idx.begin(), train_idx.end());

    for (arma::uword epoch = 0; epoch < cfg.epochs; ++epoch) {
        RngStream shuffle =
            RngStream::derive(cfg.seed, StreamTag::shuffle, epoch);
        for (arma::uword i = n_train; i > 1; --i) {
            const arma::uword j =
                static_cast<arma::uword>(shuffle.uniform_index(i));
            std::swap(order[i - 1], order[j]);
        }

        double loss_acc = 0.0;
        for (arma::uword start = 0; start < n_train; start += cfg.batch) {
            const arma::uword stop = std::min(start + cfg.batch, n_train);
            const arma::uvec batch_idx(
                std::vector<arma::uword>(order.begin() + start,
                                         order.begin() + stop));
            const double mse = mlp_backward_batch(model, Xn.cols(batch_idx),
                                                  yn.elem(batch_idx), grads);
            if (!std::isfinite(mse)) {
                std::ostringstream msg;
                msg << "train_mlp: non-finite loss at epoch " << epoch
                    << ", batch offset " << start << " (lr=" << cfg.lr << ")";
                throw std::runtime_error(msg.str());
            }
            loss_acc += mse * static_cast<double>(stop - start);
            adam_step(adam, model, grads);
        }
        hist.train_mse.push_back(loss_acc / static_cast<double>(n_train));

        const double val = val_idx.is_empty()
                               ? hist.train_mse.back()
                               : evaluate_mse(model, Xn, yn, val_idx);
        hist.val_mse.push_back(val);
        if (val < hist.best_val_mse) {
            hist.best_val_mse = val;
            hist.best_epoch = epoch;
            best = model;
        }
    }
    model = best;
    return hist;
}

std::complex<double> mlp_predict(const MlpModel& m, const Normalizer& norm,
                                 const arma::vec& raw_features) {
    if (!norm.fitted)
        throw std::logic_error("mlp_predict: unfitted normalizer");
    const double out = mlp_forward(m, norm.transform_vec(raw_features));
    return {norm.inverse_label(out), 0.0};
}

namespace {

constexpr char kCkptMagic[8] = {'R', 'I', 'S', 'I', 'M', 'C', 'K', '1'};

template <typename T>
void write_pod(std::ofstream& f, const T& v) {
    f.write(reinterpret_cast<const char*>(&v), sizeof(T));
}

template <typename T>
void read_pod(std::ifstream& f, T& v) {
    f.read(reinterpret_cast<char*>(&v), sizeof(T));
}

void write_doubles(std::ofstream& f, const double* p, std::size_t n) {
    f.write(reinterpret_cast<const char*>(p),
            static_cast<std::streamsize>(n * sizeof(double)));
}

void read_doubles(std::ifstream& f, double* p, std::size_t n) {
    f.read(reinterpret_cast<char*>(p),
           static_cast<std::streamsize>(n * sizeof(double)));
}

}  // namespace

void save_checkpoint(const std::string& path, const MlpModel& m,
                     const Normalizer& norm) {
    std::ofstream f(path, std::ios::binary | std::ios::trunc);
    if (!f)
        throw std::runtime_error("save_checkpoint: cannot open " + path);
    f.write(kCkptMagic, sizeof(kCkptMagic));
    write_pod(f, std::uint32_t{1});  // version
    write_pod(f, static_cast<std::uint32_t>(m.n_layers()));
    write_pod(f, static_cast<std::uint32_t>(m.in_dim()));
    for (std::size_t i = 0; i < m.W.size(); ++i)
        write_pod(f, static_cast<std::uint32_t>(m.W[i].n_rows));
    for (std::size_t i = 0; i < m.W.size(); ++i) {
        // row-major so the layout is independent of the matrix library
        const arma::mat Wt = m.W[i].t();
        write_doubles(f, Wt.memptr(), Wt.n_elem);
        write_doubles(f, m.b[i].memptr(), m.b[i].n_elem);
    }
    write_pod(f, static_cast<std::uint32_t>(norm.mean.n_elem));
    write_doubles(f, norm.mean.memptr(), norm.mean.n_elem);
    write_doubles(f, norm.stdev.memptr(), norm.stdev.n_elem);
    write_pod(f, norm.label_mean);
    write_pod(f, norm.label_stdev);
    if (!f)
        throw std::runtime_error("save_checkpoint: write failed on " + path);
}

void load_checkpoint(const std::string& path, MlpModel& m, Normalizer& norm) {
    std::ifstream f(path, std::ios::binary);
    if (!f)
        throw std::runtime_error("load_checkpoint: cannot open " + path);
    char magic[8];
    f.read(magic, sizeof(magic));
    if (!f || std::memcmp(magic, kCkptMagic, sizeof(magic)) != 0)
        throw std::runtime_error("load_checkpoint: bad magic in " + path);
    std::uint32_t version = 0, n_layers = 0, in_dim = 0;
    read_pod(f, version);
    if (version != 1)
        throw std::runtime_error("load_checkpoint: unsupported version");
    read_pod(f, n_layers);
    read_pod(f, in_dim);
    std::vector<std::uint32_t> widths(n_layers);
    for (auto& w : widths)
        read_pod(f, w);

    m.W.clear();
    m.b.clear();
    std::uint32_t fan_in = in_dim;
    for (std::uint32_t w : widths) {
        arma::mat Wt(fan_in, w);  // transposed (row-major on disk)
        read_doubles(f, Wt.memptr(), Wt.n_elem);
        arma::vec bi(w);
        read_doubles(f, bi.memptr(), bi.n_elem);
        m.W.push_back(Wt.t());
        m.b.push_back(std::move(bi));
        fan_in = w;
    }

    std::uint32_t feat_dim = 0;
    read_pod(f, feat_dim);
    norm.mean.set_size(feat_dim);
    norm.stdev.set_size(feat_dim);
    read_doubles(f, norm.mean.memptr(), feat_dim);
    read_doubles(f, norm.stdev.memptr(), feat_dim);
    read_pod(f, norm.label_mean);
    read_pod(f, norm.label_stdev);
    norm.fitted = true;
    if (!f)
        throw std::runtime_error("load_checkpoint: truncated file " + path);
}

}  // namespace risim
