#include "softtrack/lstm.hpp"

#include <cmath>
#include <fstream>
#include <random>

#include "json.hpp"

namespace softtrack {

namespace {

inline Eigen::ArrayXXd sigmoid(const Eigen::ArrayXXd& a) {
    return 1.0 / (1.0 + (-a).exp());
}

// Bernoulli keep-masks, scaled by 1/(1-p) (inverted dropout). Drawn in a
// fixed order (t, column, row) so loss() and backward() see the same masks.
std::vector<Eigen::ArrayXXd> make_masks(std::uint64_t seed, int steps, int dim,
                                        int batch, double p) {
    std::vector<Eigen::ArrayXXd> masks(steps);
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> uni(0.0, 1.0);
    const double scale = 1.0 / (1.0 - p);
    for (int t = 0; t < steps; ++t) {
        masks[t].resize(dim, batch);
        for (int b = 0; b < batch; ++b)
            for (int r = 0; r < dim; ++r)
                masks[t](r, b) = uni(rng) < p ? 0.0 : scale;
    }
    return masks;
}

struct ForwardCache {
    std::vector<Eigen::MatrixXd> zcat;           // (D+H) x B, dropout applied
    std::vector<Eigen::ArrayXXd> gi, gf, gg, go; // H x B each
    std::vector<Eigen::ArrayXXd> c, tc;          // cell state and tanh(c)
    std::vector<Eigen::MatrixXd> h;              // H x B
    Eigen::MatrixXd y_hat;                       // T x B
};

// Shared train-mode forward for loss() and backward().
double run_forward(const LstmModel& model, const Batch& batch, std::uint64_t mask_seed,
                   ForwardCache* cache) {
    const int steps = static_cast<int>(batch.x.size());
    const int bsz = static_cast<int>(batch.x[0].cols());
    const int hid = model.hidden;
    const int din = model.input_dim;

    const auto masks = model.dropout_rate > 0.0
                           ? make_masks(mask_seed, steps, din, bsz, model.dropout_rate)
                           : std::vector<Eigen::ArrayXXd>{};

    Eigen::MatrixXd h = Eigen::MatrixXd::Zero(hid, bsz);
    Eigen::ArrayXXd c = Eigen::ArrayXXd::Zero(hid, bsz);
    if (cache) {
        cache->zcat.resize(steps);
        cache->gi.resize(steps);
        cache->gf.resize(steps);
        cache->gg.resize(steps);
        cache->go.resize(steps);
        cache->c.resize(steps);
        cache->tc.resize(steps);
        cache->h.resize(steps);
        cache->y_hat.resize(steps, bsz);
    }

    double se = 0.0;
    Eigen::MatrixXd zcat(din + hid, bsz);
    for (int t = 0; t < steps; ++t) {
        Eigen::MatrixXd xn(din, bsz);
        for (int b = 0; b < bsz; ++b) xn.col(b) = model.normalize(batch.x[t].col(b));
        if (!masks.empty()) xn.array() *= masks[t];

        zcat.topRows(din) = xn;
        zcat.bottomRows(hid) = h;
        Eigen::MatrixXd act = model.w_gates * zcat;
        act.colwise() += model.b_gates;

        const Eigen::ArrayXXd gi = sigmoid(act.topRows(hid).array());
        const Eigen::ArrayXXd gf = sigmoid(act.middleRows(hid, hid).array());
        const Eigen::ArrayXXd gg = act.middleRows(2 * hid, hid).array().tanh();
        const Eigen::ArrayXXd go = sigmoid(act.bottomRows(hid).array());

        c = gf * c + gi * gg;
        const Eigen::ArrayXXd tc = c.tanh();
        h = (go * tc).matrix();

        const Eigen::RowVectorXd y_hat =
            (model.w_out * h).array() + model.b_out;
        se += (y_hat.transpose() - batch.y.row(t).transpose()).squaredNorm();

        if (cache) {
            cache->zcat[t] = zcat;
            cache->gi[t] = gi;
            cache->gf[t] = gf;
            cache->gg[t] = gg;
            cache->go[t] = go;
            cache->c[t] = c;
            cache->tc[t] = tc;
            cache->h[t] = h;
            cache->y_hat.row(t) = y_hat;
        }
    }
    return se / (static_cast<double>(steps) * bsz);
}

double l2_penalty(const LstmModel& model, double l2) {
    return l2 * (model.w_gates.squaredNorm() + model.w_out.squaredNorm());
}

}  // namespace

Eigen::VectorXd LstmModel::normalize(const Eigen::VectorXd& x) const {
    if (norm_lo.size() != x.size()) return x;  // unnormalized model (tests)
    Eigen::VectorXd out(x.size());
    for (Eigen::Index i = 0; i < x.size(); ++i) {
        const double span = norm_hi(i) - norm_lo(i);
        out(i) = span > 1e-12 ? 2.0 * (x(i) - norm_lo(i)) / span - 1.0 : 0.0;
    }
    return out;
}

LstmModel init_model(int input_dim, int hidden, double dropout_rate,
                     std::uint64_t seed, double out_weight_scale, double out_bias) {
    LstmModel m;
    m.input_dim = input_dim;
    m.hidden = hidden;
    m.dropout_rate = dropout_rate;
    std::mt19937_64 rng(seed);
    const double r = 1.0 / std::sqrt(static_cast<double>(hidden));
    std::uniform_real_distribution<double> wdist(-r, r);
    m.w_gates.resize(4 * hidden, input_dim + hidden);
    for (Eigen::Index i = 0; i < m.w_gates.rows(); ++i)
        for (Eigen::Index j = 0; j < m.w_gates.cols(); ++j) m.w_gates(i, j) = wdist(rng);
    m.b_gates = Eigen::VectorXd::Zero(4 * hidden);
    m.b_gates.segment(hidden, hidden).setConstant(1.0);  // forget gate open
    std::uniform_real_distribution<double> odist(-out_weight_scale, out_weight_scale);
    m.w_out.resize(hidden);
    for (int j = 0; j < hidden; ++j) m.w_out(j) = odist(rng);
    m.b_out = out_bias;
    return m;
}

void lstm_cell(const LstmModel& model, const Eigen::VectorXd& x,
               const Eigen::VectorXd& h_prev, const Eigen::VectorXd& c_prev,
               Eigen::VectorXd& h, Eigen::VectorXd& c) {
    const int hid = model.hidden;
    if (x.size() != model.input_dim || h_prev.size() != hid || c_prev.size() != hid) {
        throw DimensionMismatch("lstm_cell: input dimensions do not match the model");
    }
    Eigen::VectorXd zcat(model.input_dim + hid);
    zcat << x, h_prev;
    Eigen::VectorXd act = model.w_gates * zcat + model.b_gates;
    const Eigen::ArrayXd gi = sigmoid(act.head(hid).array());
    const Eigen::ArrayXd gf = sigmoid(act.segment(hid, hid).array());
    const Eigen::ArrayXd gg = act.segment(2 * hid, hid).array().tanh();
    const Eigen::ArrayXd go = sigmoid(act.tail(hid).array());
    c = (gf * c_prev.array() + gi * gg).matrix();
    h = (go * c.array().tanh()).matrix();
}

Eigen::VectorXd frame_features(const SensorFrame& frame, int input_dim,
                               FeatureCounters* counters) {
    Eigen::VectorXd x(input_dim);
    if (input_dim == 2) {
        x << frame.duty_a, static_cast<double>(frame.raw_a);
        if (counters) {
            counters->duty_a++;
            counters->raw_a++;
        }
    } else if (input_dim == 4) {
        x << frame.duty_a, frame.duty_b, static_cast<double>(frame.raw_a),
            static_cast<double>(frame.raw_b);
        if (counters) {
            counters->duty_a++;
            counters->duty_b++;
            counters->raw_a++;
            counters->raw_b++;
        }
    } else {
        throw DimensionMismatch("unsupported estimator input width " + std::to_string(input_dim));
    }
    return x;
}

std::vector<double> forward(const LstmModel& model, const std::vector<SensorFrame>& frames,
                            bool train_mode, std::uint64_t seed) {
    std::vector<double> out;
    out.reserve(frames.size());
    const auto masks =
        (train_mode && model.dropout_rate > 0.0)
            ? make_masks(seed, static_cast<int>(frames.size()), model.input_dim, 1,
                         model.dropout_rate)
            : std::vector<Eigen::ArrayXXd>{};

    Eigen::VectorXd h = Eigen::VectorXd::Zero(model.hidden);
    Eigen::VectorXd c = Eigen::VectorXd::Zero(model.hidden);
    for (size_t t = 0; t < frames.size(); ++t) {
        Eigen::VectorXd x = model.normalize(frame_features(frames[t], model.input_dim));
        if (!masks.empty()) x.array() *= masks[t].col(0);
        lstm_cell(model, x, h, c, h, c);
        out.push_back(model.w_out.dot(h) + model.b_out);
    }
    return out;
}

InferenceSession::InferenceSession(const LstmModel& model) : model_(&model) { reset(); }

void InferenceSession::reset() {
    h_ = Eigen::VectorXd::Zero(model_->hidden);
    c_ = Eigen::VectorXd::Zero(model_->hidden);
}

double InferenceSession::predict(const SensorFrame& frame, FeatureCounters* counters) {
    const Eigen::VectorXd x =
        model_->normalize(frame_features(frame, model_->input_dim, counters));
    lstm_cell(*model_, x, h_, c_, h_, c_);
    return model_->w_out.dot(h_) + model_->b_out;
}

double loss(const LstmModel& model, const Batch& batch, double l2, std::uint64_t mask_seed) {
    return run_forward(model, batch, mask_seed, nullptr) + l2_penalty(model, l2);
}

std::pair<double, double> backward(const LstmModel& model, const Batch& batch, double l2,
                                   std::uint64_t mask_seed, Gradients& grads) {
    ForwardCache cache;
    const double mse = run_forward(model, batch, mask_seed, &cache);

    const int steps = static_cast<int>(batch.x.size());
    const int bsz = static_cast<int>(batch.x[0].cols());
    const int hid = model.hidden;
    const int din = model.input_dim;
    const double inv_n = 1.0 / (static_cast<double>(steps) * bsz);

    grads.w_gates = Eigen::MatrixXd::Zero(4 * hid, din + hid);
    grads.b_gates = Eigen::VectorXd::Zero(4 * hid);
    grads.w_out = Eigen::RowVectorXd::Zero(hid);
    grads.b_out = 0.0;

    Eigen::MatrixXd dh = Eigen::MatrixXd::Zero(hid, bsz);
    Eigen::ArrayXXd dc = Eigen::ArrayXXd::Zero(hid, bsz);
    Eigen::MatrixXd d_act(4 * hid, bsz);

    for (int t = steps - 1; t >= 0; --t) {
        const Eigen::RowVectorXd dy =
            2.0 * inv_n * (cache.y_hat.row(t) - batch.y.row(t));
        grads.w_out += dy * cache.h[t].transpose();
        grads.b_out += dy.sum();
        dh += model.w_out.transpose() * dy;

        const Eigen::ArrayXXd dha = dh.array();
        const Eigen::ArrayXXd d_o = dha * cache.tc[t];
        dc += dha * cache.go[t] * (1.0 - cache.tc[t].square());

        const Eigen::ArrayXXd c_prev =
            t > 0 ? cache.c[t - 1] : Eigen::ArrayXXd::Zero(hid, bsz);
        const Eigen::ArrayXXd d_i = dc * cache.gg[t];
        const Eigen::ArrayXXd d_f = dc * c_prev;
        const Eigen::ArrayXXd d_g = dc * cache.gi[t];

        d_act.topRows(hid) = (d_i * cache.gi[t] * (1.0 - cache.gi[t])).matrix();
        d_act.middleRows(hid, hid) = (d_f * cache.gf[t] * (1.0 - cache.gf[t])).matrix();
        d_act.middleRows(2 * hid, hid) = (d_g * (1.0 - cache.gg[t].square())).matrix();
        d_act.bottomRows(hid) = (d_o * cache.go[t] * (1.0 - cache.go[t])).matrix();

        grads.w_gates.noalias() += d_act * cache.zcat[t].transpose();
        grads.b_gates += d_act.rowwise().sum();

        dc *= cache.gf[t];  // flows to c_{t-1}
        dh.noalias() = model.w_gates.transpose().bottomRows(hid) * d_act;
    }

    grads.w_gates += 2.0 * l2 * model.w_gates;
    grads.w_out += 2.0 * l2 * model.w_out;
    return {mse, mse + l2_penalty(model, l2)};
}

AdamState make_adam_state(const LstmModel& model) {
    AdamState s;
    s.m_w = Eigen::MatrixXd::Zero(model.w_gates.rows(), model.w_gates.cols());
    s.v_w = s.m_w;
    s.m_b = Eigen::VectorXd::Zero(model.b_gates.size());
    s.v_b = s.m_b;
    s.m_wo = Eigen::RowVectorXd::Zero(model.w_out.size());
    s.v_wo = s.m_wo;
    return s;
}

void adam_step(LstmModel& model, AdamState& st, const Gradients& g,
               double lr, double beta1, double beta2, double eps) {
    st.t++;
    const double bc1 = 1.0 - std::pow(beta1, static_cast<double>(st.t));
    const double bc2 = 1.0 - std::pow(beta2, static_cast<double>(st.t));

    auto update = [&](auto& w, auto& m, auto& v, const auto& grad) {
        m = beta1 * m + (1.0 - beta1) * grad;
        v.array() = beta2 * v.array() + (1.0 - beta2) * grad.array().square();
        w.array() -= lr * (m.array() / bc1) / ((v.array() / bc2).sqrt() + eps);
    };
    update(model.w_gates, st.m_w, st.v_w, g.w_gates);
    update(model.b_gates, st.m_b, st.v_b, g.b_gates);
    update(model.w_out, st.m_wo, st.v_wo, g.w_out);

    st.m_bo = beta1 * st.m_bo + (1.0 - beta1) * g.b_out;
    st.v_bo = beta2 * st.v_bo + (1.0 - beta2) * g.b_out * g.b_out;
    model.b_out -= lr * (st.m_bo / bc1) / (std::sqrt(st.v_bo / bc2) + eps);
}

double rmse(const std::vector<double>& pred, const std::vector<double>& truth) {
    double se = 0.0;
    for (size_t i = 0; i < pred.size(); ++i) {
        const double e = pred[i] - truth[i];
        se += e * e;
    }
    return pred.empty() ? 0.0 : std::sqrt(se / pred.size());
}

namespace {

std::vector<double> flatten(const Eigen::MatrixXd& m) {
    std::vector<double> out;
    out.reserve(m.size());
    for (Eigen::Index i = 0; i < m.rows(); ++i)
        for (Eigen::Index j = 0; j < m.cols(); ++j) out.push_back(m(i, j));
    return out;
}

}  // namespace

void save_model(const LstmModel& model, const std::string& path,
                const std::string& metadata_json) {
    nlohmann::json j;
    j["format"] = "softtrack-lstm-1";
    j["input_dim"] = model.input_dim;
    j["hidden"] = model.hidden;
    j["dropout_rate"] = model.dropout_rate;
    j["gate_order"] = "ifgo";
    j["weight_layout"] = "row-major, rows = 4*hidden gate blocks, cols = [input; hidden]";
    j["w_gates"] = flatten(model.w_gates);
    j["b_gates"] = std::vector<double>(model.b_gates.data(),
                                       model.b_gates.data() + model.b_gates.size());
    j["w_out"] = std::vector<double>(model.w_out.data(), model.w_out.data() + model.w_out.size());
    j["b_out"] = model.b_out;
    j["norm_lo"] = std::vector<double>(model.norm_lo.data(), model.norm_lo.data() + model.norm_lo.size());
    j["norm_hi"] = std::vector<double>(model.norm_hi.data(), model.norm_hi.data() + model.norm_hi.size());
    j["input_labels"] = model.input_labels;
    j["metadata"] = nlohmann::json::parse(metadata_json);
    std::ofstream out(path);
    if (!out) throw Error("cannot write " + path);
    out << j.dump(2) << "\n";
}

LstmModel load_model(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw Error("cannot read " + path);
    nlohmann::json j;
    in >> j;

    LstmModel m;
    m.input_dim = j.at("input_dim").get<int>();
    m.hidden = j.at("hidden").get<int>();
    m.dropout_rate = j.at("dropout_rate").get<double>();

    const auto w = j.at("w_gates").get<std::vector<double>>();
    m.w_gates.resize(4 * m.hidden, m.input_dim + m.hidden);
    if (static_cast<Eigen::Index>(w.size()) != m.w_gates.size()) {
        throw DimensionMismatch("model file weight count mismatch");
    }
    size_t k = 0;
    for (Eigen::Index i = 0; i < m.w_gates.rows(); ++i)
        for (Eigen::Index jj = 0; jj < m.w_gates.cols(); ++jj) m.w_gates(i, jj) = w[k++];

    const auto b = j.at("b_gates").get<std::vector<double>>();
    m.b_gates = Eigen::Map<const Eigen::VectorXd>(b.data(), b.size());
    const auto wo = j.at("w_out").get<std::vector<double>>();
    m.w_out = Eigen::Map<const Eigen::RowVectorXd>(wo.data(), wo.size());
    m.b_out = j.at("b_out").get<double>();
    const auto lo = j.at("norm_lo").get<std::vector<double>>();
    const auto hi = j.at("norm_hi").get<std::vector<double>>();
    m.norm_lo = Eigen::Map<const Eigen::VectorXd>(lo.data(), lo.size());
    m.norm_hi = Eigen::Map<const Eigen::VectorXd>(hi.data(), hi.size());
    if (j.contains("input_labels")) {
        m.input_labels = j.at("input_labels").get<std::vector<std::string>>();
    }
    return m;
}

}  // namespace softtrack
