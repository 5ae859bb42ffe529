#pragma once

#include <cmath>
#include <fstream>
#include <random>
#include <stdexcept>
#include <string>
#include <vector>

#include <Eigen/Dense>
#include <json.hpp>

#include "pbn/spec.hpp"

namespace pbn {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;

// Dense n -> hidden -> hidden -> n+1 approximator: affine layers with
// rectifier hidden activations and a linear output.
struct QNetwork {
    int input_size = 0;
    int output_size = 0;
    Matrix w1, w2, w3;  // (out x in)
    Vector b1, b2, b3;

    bool finite() const {
        return w1.allFinite() && w2.allFinite() && w3.allFinite() && b1.allFinite() &&
               b2.allFinite() && b3.allFinite();
    }
};

struct GradientSet {
    Matrix w1, w2, w3;
    Vector b1, b2, b3;
};

struct ForwardCache {
    Matrix x;   // batch x in
    Matrix a1;  // batch x h1, post-rectifier
    Matrix a2;  // batch x h2
    Matrix y;   // batch x out
};

inline constexpr int kDefaultHiddenUnits = 100;

// Variance 2/fan-in weights, zero biases.
inline QNetwork init_network(int input_size, int output_size, std::mt19937_64& rng,
                             int hidden = kDefaultHiddenUnits) {
    if (input_size < 1 || output_size < 1) throw std::invalid_argument("bad network shape");
    QNetwork net;
    net.input_size = input_size;
    net.output_size = output_size;
    auto fill = [&rng](Matrix& m, int rows, int cols, int fan_in) {
        std::normal_distribution<double> dist(0.0, std::sqrt(2.0 / fan_in));
        m.resize(rows, cols);
        for (int r = 0; r < rows; ++r)
            for (int c = 0; c < cols; ++c) m(r, c) = dist(rng);
    };
    fill(net.w1, hidden, input_size, input_size);
    fill(net.w2, hidden, hidden, hidden);
    fill(net.w3, output_size, hidden, hidden);
    net.b1 = Vector::Zero(hidden);
    net.b2 = Vector::Zero(hidden);
    net.b3 = Vector::Zero(output_size);
    return net;
}

inline ForwardCache forward(const QNetwork& net, const Matrix& x) {
    ForwardCache c;
    c.x = x;
    c.a1 = ((x * net.w1.transpose()).rowwise() + net.b1.transpose()).cwiseMax(0.0);
    c.a2 = ((c.a1 * net.w2.transpose()).rowwise() + net.b2.transpose()).cwiseMax(0.0);
    c.y = (c.a2 * net.w3.transpose()).rowwise() + net.b3.transpose();
    return c;
}

inline Vector forward_one(const QNetwork& net, const Vector& x) {
    Matrix xb = x.transpose();
    return forward(net, xb).y.transpose().col(0);
}

// Exact gradients of sum(upstream .* y) w.r.t. every parameter.
inline GradientSet backward(const QNetwork& net, const ForwardCache& cache,
                            const Matrix& upstream) {
    GradientSet g;
    g.w3 = upstream.transpose() * cache.a2;
    g.b3 = upstream.colwise().sum();
    Matrix d2 = (upstream * net.w3).cwiseProduct(
        (cache.a2.array() > 0.0).cast<double>().matrix());
    g.w2 = d2.transpose() * cache.a1;
    g.b2 = d2.colwise().sum();
    Matrix d1 = (d2 * net.w2).cwiseProduct((cache.a1.array() > 0.0).cast<double>().matrix());
    g.w1 = d1.transpose() * cache.x;
    g.b1 = d1.colwise().sum();
    return g;
}

// Adaptive moment estimation state (bias-corrected first/second moments).
struct AdamState {
    GradientSet m, v;
    long step = 0;
    double beta1 = 0.9;
    double beta2 = 0.999;
    double eps = 1e-8;

    static AdamState like(const QNetwork& net) {
        AdamState s;
        auto zero_like = [](GradientSet& g, const QNetwork& n) {
            g.w1 = Matrix::Zero(n.w1.rows(), n.w1.cols());
            g.w2 = Matrix::Zero(n.w2.rows(), n.w2.cols());
            g.w3 = Matrix::Zero(n.w3.rows(), n.w3.cols());
            g.b1 = Vector::Zero(n.b1.size());
            g.b2 = Vector::Zero(n.b2.size());
            g.b3 = Vector::Zero(n.b3.size());
        };
        zero_like(s.m, net);
        zero_like(s.v, net);
        return s;
    }
};

inline void optimize_step(QNetwork& net, const GradientSet& grad, AdamState& state, double lr) {
    if (!(grad.w1.allFinite() && grad.w2.allFinite() && grad.w3.allFinite() &&
          grad.b1.allFinite() && grad.b2.allFinite() && grad.b3.allFinite()))
        throw std::runtime_error("non-finite gradient");
    ++state.step;
    const double bc1 = 1.0 - std::pow(state.beta1, static_cast<double>(state.step));
    const double bc2 = 1.0 - std::pow(state.beta2, static_cast<double>(state.step));
    auto update = [&](auto& param, auto& m, auto& v, const auto& g) {
        m = state.beta1 * m + (1.0 - state.beta1) * g;
        v = (state.beta2 * v.array() + (1.0 - state.beta2) * g.array().square()).matrix();
        param.array() -= lr * (m.array() / bc1) / ((v.array() / bc2).sqrt() + state.eps);
    };
    update(net.w1, state.m.w1, state.v.w1, grad.w1);
    update(net.w2, state.m.w2, state.v.w2, grad.w2);
    update(net.w3, state.m.w3, state.v.w3, grad.w3);
    update(net.b1, state.m.b1, state.v.b1, grad.b1);
    update(net.b2, state.m.b2, state.v.b2, grad.b2);
    update(net.b3, state.m.b3, state.v.b3, grad.b3);
}

inline QNetwork copy_params(const QNetwork& src) { return src; }

namespace detail {

inline nlohmann::json matrix_to_json(const Matrix& m) {
    std::vector<double> values;
    values.reserve(static_cast<std::size_t>(m.size()));
    for (int r = 0; r < m.rows(); ++r)
        for (int c = 0; c < m.cols(); ++c) values.push_back(m(r, c));
    return {{"rows", m.rows()}, {"cols", m.cols()}, {"data", values}};
}

inline Matrix matrix_from_json(const nlohmann::json& j) {
    const auto rows = j.at("rows").get<Eigen::Index>();
    const auto cols = j.at("cols").get<Eigen::Index>();
    const auto values = j.at("data").get<std::vector<double>>();
    if (static_cast<Eigen::Index>(values.size()) != rows * cols)
        throw std::runtime_error("checkpoint shape mismatch");
    Matrix m(rows, cols);
    std::size_t k = 0;
    for (Eigen::Index r = 0; r < rows; ++r)
        for (Eigen::Index c = 0; c < cols; ++c) m(r, c) = values[k++];
    return m;
}

}  // namespace detail

inline constexpr int kCheckpointVersion = 1;

inline std::string save_checkpoint(const QNetwork& net) {
    nlohmann::json doc;
    doc["version"] = kCheckpointVersion;
    doc["input_size"] = net.input_size;
    doc["output_size"] = net.output_size;
    doc["w1"] = detail::matrix_to_json(net.w1);
    doc["w2"] = detail::matrix_to_json(net.w2);
    doc["w3"] = detail::matrix_to_json(net.w3);
    doc["b1"] = detail::matrix_to_json(net.b1);
    doc["b2"] = detail::matrix_to_json(net.b2);
    doc["b3"] = detail::matrix_to_json(net.b3);
    return doc.dump() + "\n";
}

inline QNetwork load_checkpoint(const std::string& text) {
    const nlohmann::json doc = nlohmann::json::parse(text);
    if (doc.at("version").get<int>() != kCheckpointVersion)
        throw std::runtime_error("unsupported checkpoint version");
    QNetwork net;
    net.input_size = doc.at("input_size").get<int>();
    net.output_size = doc.at("output_size").get<int>();
    net.w1 = detail::matrix_from_json(doc.at("w1"));
    net.w2 = detail::matrix_from_json(doc.at("w2"));
    net.w3 = detail::matrix_from_json(doc.at("w3"));
    net.b1 = detail::matrix_from_json(doc.at("b1"));
    net.b2 = detail::matrix_from_json(doc.at("b2"));
    net.b3 = detail::matrix_from_json(doc.at("b3"));
    return net;
}

}  // namespace pbn
