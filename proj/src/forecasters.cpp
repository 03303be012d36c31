#include "aalf/forecasters.hpp"

#include <algorithm>
#include <cmath>
#include <istream>
#include <numeric>
#include <random>
#include <set>
#include <sstream>

#include <json.hpp>

#include "aalf/common.hpp"
#include "aalf/ingest.hpp"

namespace aalf {

namespace {

Eigen::MatrixXd design_matrix(const WindowedSet& ws, bool intercept) {
    if (!intercept) return ws.inputs;
    Eigen::MatrixXd x(ws.size(), ws.lag() + 1);
    x.leftCols(ws.lag()) = ws.inputs;
    x.col(ws.lag()).setOnes();
    return x;
}

}  // namespace

ARModel fit_ar(const WindowedSet& train_windows, bool intercept, double ridge) {
    if (train_windows.size() == 0) throw EmptyInput("fit_ar: empty training set");
    if (ridge < 0) throw std::invalid_argument("fit_ar: ridge must be >= 0");
    const Eigen::Index lag = train_windows.lag();
    const Eigen::MatrixXd x = design_matrix(train_windows, intercept);
    const Eigen::Index d = x.cols();

    Eigen::MatrixXd gram = x.transpose() * x;
    gram.diagonal().head(lag).array() += ridge;
    const Eigen::VectorXd rhs = x.transpose() * train_windows.targets;

    Eigen::VectorXd beta;
    if (ridge > 0) {
        beta = gram.ldlt().solve(rhs);
    } else {
        Eigen::FullPivLU<Eigen::MatrixXd> lu(gram);
        if (!lu.isInvertible())
            throw SingularSystem("fit_ar: Gram matrix is singular and ridge is 0");
        beta = lu.solve(rhs);
    }

    ARModel model;
    model.phi = beta.head(lag);
    if (intercept) model.intercept = beta(d - 1);
    const Eigen::VectorXd residuals = x * beta - train_windows.targets;
    model.residual_std = std::sqrt(residuals.squaredNorm() / static_cast<double>(x.rows()));
    return model;
}

double predict_ar(const ARModel& model, const Eigen::VectorXd& window) {
    if (window.size() != model.phi.size())
        throw DimensionMismatch("predict_ar: window length " + std::to_string(window.size()) +
                                " does not match model order " + std::to_string(model.phi.size()));
    return model.phi.dot(window) + model.intercept.value_or(0.0);
}

namespace {

struct ForwardPass {
    Eigen::MatrixXd z1, a1, z2, a2;
    Eigen::VectorXd pred;
};

ForwardPass forward(const MLPModel& m, const Eigen::MatrixXd& x) {
    ForwardPass f;
    f.z1 = (x * m.w1.transpose()).rowwise() + m.b1.transpose();
    f.a1 = f.z1.cwiseMax(0.0);
    f.z2 = (f.a1 * m.w2.transpose()).rowwise() + m.b2.transpose();
    f.a2 = f.z2.cwiseMax(0.0);
    f.pred = f.a2 * m.w3.transpose() + Eigen::VectorXd::Constant(x.rows(), m.b3(0));
    return f;
}

struct GradAndLoss {
    MLPGradient grad;
    double loss = 0.0;
};

GradAndLoss backward(const MLPModel& m, const Eigen::MatrixXd& x, const Eigen::VectorXd& y) {
    const ForwardPass f = forward(m, x);
    const double n = static_cast<double>(x.rows());
    const Eigen::VectorXd err = f.pred - y;

    GradAndLoss out;
    out.loss = err.squaredNorm() / n;

    const Eigen::VectorXd dpred = (2.0 / n) * err;
    out.grad.w3 = dpred.transpose() * f.a2;
    out.grad.b3 = Eigen::VectorXd::Constant(1, dpred.sum());

    const Eigen::MatrixXd dz2 =
        (dpred * m.w3).cwiseProduct((f.z2.array() > 0.0).cast<double>().matrix());
    out.grad.w2 = dz2.transpose() * f.a1;
    out.grad.b2 = dz2.colwise().sum().transpose();

    const Eigen::MatrixXd dz1 =
        (dz2 * m.w2).cwiseProduct((f.z1.array() > 0.0).cast<double>().matrix());
    out.grad.w1 = dz1.transpose() * x;
    out.grad.b1 = dz1.colwise().sum().transpose();
    return out;
}

MLPModel init_model(Eigen::Index input_dim, const TrainConfig& cfg) {
    std::mt19937_64 rng(cfg.seed);
    auto he_matrix = [&rng](Eigen::Index rows, Eigen::Index cols) {
        std::normal_distribution<double> dist(0.0, std::sqrt(2.0 / static_cast<double>(cols)));
        Eigen::MatrixXd w(rows, cols);
        for (Eigen::Index i = 0; i < rows; ++i)
            for (Eigen::Index j = 0; j < cols; ++j) w(i, j) = dist(rng);
        return w;
    };
    MLPModel m;
    m.w1 = he_matrix(cfg.hidden1, input_dim);
    m.b1 = Eigen::VectorXd::Zero(cfg.hidden1);
    m.w2 = he_matrix(cfg.hidden2, cfg.hidden1);
    m.b2 = Eigen::VectorXd::Zero(cfg.hidden2);
    m.w3 = he_matrix(1, cfg.hidden2);
    m.b3 = Eigen::VectorXd::Zero(1);
    return m;
}

}  // namespace

MLPGradient mlp_gradient(const MLPModel& model, const Eigen::MatrixXd& inputs,
                         const Eigen::VectorXd& targets) {
    if (inputs.rows() == 0) throw EmptyInput("mlp_gradient: empty batch");
    if (inputs.cols() != model.input_dim() || inputs.rows() != targets.size())
        throw DimensionMismatch("mlp_gradient: batch shape does not match model");
    return backward(model, inputs, targets).grad;
}

double mlp_loss(const MLPModel& model, const Eigen::MatrixXd& inputs,
                const Eigen::VectorXd& targets) {
    if (inputs.rows() == 0) throw EmptyInput("mlp_loss: empty batch");
    const Eigen::VectorXd pred = predict_mlp(model, inputs);
    return (pred - targets).squaredNorm() / static_cast<double>(inputs.rows());
}

MLPModel fit_mlp(const WindowedSet& pooled, const TrainConfig& cfg) {
    if (pooled.size() == 0) throw EmptyInput("fit_mlp: empty training set");
    if (cfg.epochs <= 0 || cfg.batch_size <= 0 || cfg.learning_rate <= 0 || cfg.hidden1 <= 0 ||
        cfg.hidden2 <= 0 || cfg.l2 < 0)
        throw std::invalid_argument("fit_mlp: invalid training configuration");

    MLPModel m = init_model(pooled.lag(), cfg);
    MLPGradient adam_m, adam_v;
    auto zero_like = [](const MLPModel& ref, MLPGradient& g) {
        g.w1 = Eigen::MatrixXd::Zero(ref.w1.rows(), ref.w1.cols());
        g.b1 = Eigen::VectorXd::Zero(ref.b1.size());
        g.w2 = Eigen::MatrixXd::Zero(ref.w2.rows(), ref.w2.cols());
        g.b2 = Eigen::VectorXd::Zero(ref.b2.size());
        g.w3 = Eigen::MatrixXd::Zero(ref.w3.rows(), ref.w3.cols());
        g.b3 = Eigen::VectorXd::Zero(ref.b3.size());
    };
    zero_like(m, adam_m);
    zero_like(m, adam_v);

    constexpr double beta1 = 0.9, beta2 = 0.999, eps = 1e-8;
    long step = 0;

    std::mt19937_64 shuffle_rng(derive_seed(cfg.seed, "shuffle"));
    std::vector<Eigen::Index> order(static_cast<std::size_t>(pooled.size()));
    std::iota(order.begin(), order.end(), Eigen::Index{0});

    for (int epoch = 0; epoch < cfg.epochs; ++epoch) {
        std::shuffle(order.begin(), order.end(), shuffle_rng);
        for (std::size_t start = 0; start < order.size(); start += cfg.batch_size) {
            const std::size_t count = std::min<std::size_t>(cfg.batch_size, order.size() - start);
            Eigen::MatrixXd bx(count, pooled.lag());
            Eigen::VectorXd by(count);
            for (std::size_t i = 0; i < count; ++i) {
                bx.row(static_cast<Eigen::Index>(i)) = pooled.inputs.row(order[start + i]);
                by(static_cast<Eigen::Index>(i)) = pooled.targets(order[start + i]);
            }

            GradAndLoss gl = backward(m, bx, by);
            if (!std::isfinite(gl.loss))
                throw DivergenceDetected("fit_mlp: loss became non-finite at epoch " +
                                         std::to_string(epoch));
            if (cfg.l2 > 0) {
                gl.grad.w1 += 2.0 * cfg.l2 * m.w1;
                gl.grad.w2 += 2.0 * cfg.l2 * m.w2;
                gl.grad.w3 += 2.0 * cfg.l2 * m.w3;
            }

            ++step;
            auto update = [&](auto& w, const auto& g, auto& mm, auto& vv) {
                if (cfg.optimizer == Optimizer::sgd) {
                    w -= cfg.learning_rate * g;
                    return;
                }
                mm = beta1 * mm + (1.0 - beta1) * g;
                vv = beta2 * vv + (1.0 - beta2) * g.cwiseProduct(g);
                const double mc = 1.0 - std::pow(beta1, static_cast<double>(step));
                const double vc = 1.0 - std::pow(beta2, static_cast<double>(step));
                w -= (cfg.learning_rate * (mm / mc).array() /
                      ((vv / vc).array().sqrt() + eps))
                         .matrix();
            };
            update(m.w1, gl.grad.w1, adam_m.w1, adam_v.w1);
            update(m.b1, gl.grad.b1, adam_m.b1, adam_v.b1);
            update(m.w2, gl.grad.w2, adam_m.w2, adam_v.w2);
            update(m.b2, gl.grad.b2, adam_m.b2, adam_v.b2);
            update(m.w3, gl.grad.w3, adam_m.w3, adam_v.w3);
            update(m.b3, gl.grad.b3, adam_m.b3, adam_v.b3);
        }
    }
    return m;
}

double predict_mlp(const MLPModel& model, const Eigen::VectorXd& window) {
    if (window.size() != model.input_dim())
        throw DimensionMismatch("predict_mlp: window length does not match model input");
    const Eigen::VectorXd a1 = (model.w1 * window + model.b1).cwiseMax(0.0);
    const Eigen::VectorXd a2 = (model.w2 * a1 + model.b2).cwiseMax(0.0);
    return (model.w3 * a2)(0) + model.b3(0);
}

Eigen::VectorXd predict_mlp(const MLPModel& model, const Eigen::MatrixXd& windows) {
    if (windows.cols() != model.input_dim())
        throw DimensionMismatch("predict_mlp: window length does not match model input");
    return forward(model, windows).pred;
}

double baseline_last(const Eigen::VectorXd& window) {
    if (window.size() == 0) throw EmptyInput("baseline_last: empty window");
    return window(window.size() - 1);
}

double baseline_mean(const Eigen::VectorXd& window) {
    if (window.size() == 0) throw EmptyInput("baseline_mean: empty window");
    return window.mean();
}

SegmentPredictions& PredictionTable::slot(const std::string& series, Segment segment) {
    auto it = rows.find(series);
    if (it == rows.end()) throw UnknownSeries("no predictions tracked for series '" + series + "'");
    return it->second[static_cast<std::size_t>(segment)];
}

const SegmentPredictions& PredictionTable::slot(const std::string& series, Segment segment) const {
    auto it = rows.find(series);
    if (it == rows.end()) throw UnknownSeries("no predictions tracked for series '" + series + "'");
    return it->second[static_cast<std::size_t>(segment)];
}

PredictionTable make_prediction_table(const Dataset& dataset, double train_fraction,
                                      double val_fraction) {
    PredictionTable table;
    for (const auto& s : dataset.series) {
        const SplitSpec split = split_series(s.length(), train_fraction, val_fraction);
        std::array<SegmentPredictions, 3> slots;
        for (Segment seg : {Segment::train, Segment::val, Segment::test}) {
            auto [begin, end] = target_range(s, seg, dataset.lag, split);
            auto& slot = slots[static_cast<std::size_t>(seg)];
            slot.origin_indices.resize(end - begin);
            std::iota(slot.origin_indices.begin(), slot.origin_indices.end(), begin);
            slot.truth.resize(static_cast<Eigen::Index>(end - begin));
            for (std::size_t t = begin; t < end; ++t)
                slot.truth(static_cast<Eigen::Index>(t - begin)) = s.values[t];
        }
        table.rows.emplace(s.name, std::move(slots));
    }
    return table;
}

void import_predictions(PredictionTable& table, const Dataset& dataset, Segment segment,
                        const std::string& model_tag, std::istream& file) {
    if (model_tag != "f" && model_tag != "g")
        throw std::invalid_argument("import_predictions: model_tag must be 'f' or 'g'");

    std::map<std::string, std::map<std::size_t, double>> parsed;
    std::string line;
    bool saw_header = false;
    while (std::getline(file, line)) {
        const std::string row{trim(line)};
        if (row.empty()) continue;
        if (!saw_header) {
            if (row != "series,segment,origin_index,value")
                throw MalformedRow("prediction file: unexpected header '" + row + "'");
            saw_header = true;
            continue;
        }
        const auto fields = split(row, ',');
        if (fields.size() != 4)
            throw MalformedRow("prediction file: expected 4 fields, got " +
                               std::to_string(fields.size()));
        const std::string name(trim(fields[0]));
        if (dataset.find(name) == nullptr)
            throw UnknownSeries("prediction file names unknown series '" + name + "'");
        const auto seg = segment_from_name(trim(fields[1]));
        if (!seg) throw MalformedRow("prediction file: unknown segment '" +
                                     std::string(trim(fields[1])) + "'");
        if (*seg != segment) continue;
        std::size_t origin = 0;
        try {
            origin = std::stoull(std::string(trim(fields[2])));
        } catch (const std::exception&) {
            throw MalformedRow("prediction file: bad origin_index '" +
                               std::string(trim(fields[2])) + "'");
        }
        double value = 0.0;
        if (!try_parse_double(trim(fields[3]), value))
            throw MalformedRow("prediction file: bad value '" + std::string(trim(fields[3])) + "'");
        auto [it, inserted] = parsed[name].emplace(origin, value);
        if (!inserted)
            throw AlignmentMismatch("prediction file: duplicate row for series '" + name +
                                    "' origin " + std::to_string(origin));
    }
    if (!saw_header) throw EmptyFile("prediction file has no rows");

    for (const auto& s : dataset.series) {
        const SegmentPredictions& slot = table.slot(s.name, segment);
        const auto it = parsed.find(s.name);
        const std::size_t have = it == parsed.end() ? 0 : it->second.size();
        if (have != slot.origin_indices.size())
            throw AlignmentMismatch("prediction file covers " + std::to_string(have) +
                                    " windows of series '" + s.name + "', expected " +
                                    std::to_string(slot.origin_indices.size()));
        Eigen::VectorXd values(static_cast<Eigen::Index>(have));
        for (std::size_t i = 0; i < have; ++i) {
            const auto row = it->second.find(slot.origin_indices[i]);
            if (row == it->second.end())
                throw AlignmentMismatch("prediction file misses series '" + s.name + "' origin " +
                                        std::to_string(slot.origin_indices[i]));
            values(static_cast<Eigen::Index>(i)) = row->second;
        }
        auto& target = table.slot(s.name, segment);
        (model_tag == "f" ? target.f_pred : target.g_pred) = std::move(values);
    }
    (model_tag == "f" ? table.f_provenance : table.g_provenance) = Provenance::imported;
}

namespace {

nlohmann::json vector_to_json(const Eigen::VectorXd& v) {
    nlohmann::json arr = nlohmann::json::array();
    for (Eigen::Index i = 0; i < v.size(); ++i) arr.push_back(v(i));
    return arr;
}

Eigen::VectorXd vector_from_json(const nlohmann::json& arr) {
    Eigen::VectorXd v(static_cast<Eigen::Index>(arr.size()));
    for (Eigen::Index i = 0; i < v.size(); ++i) v(i) = arr[static_cast<std::size_t>(i)].get<double>();
    return v;
}

nlohmann::json matrix_to_json(const Eigen::MatrixXd& m) {
    nlohmann::json rows = nlohmann::json::array();
    for (Eigen::Index i = 0; i < m.rows(); ++i) rows.push_back(vector_to_json(m.row(i).transpose()));
    return rows;
}

Eigen::MatrixXd matrix_from_json(const nlohmann::json& rows, Eigen::Index cols_hint) {
    const auto nrows = static_cast<Eigen::Index>(rows.size());
    Eigen::Index cols = nrows > 0 ? static_cast<Eigen::Index>(rows[0].size()) : cols_hint;
    Eigen::MatrixXd m(nrows, cols);
    for (Eigen::Index i = 0; i < nrows; ++i)
        m.row(i) = vector_from_json(rows[static_cast<std::size_t>(i)]).transpose();
    return m;
}

}  // namespace

std::string serialize_ar_models(const std::map<std::string, ARModel>& models) {
    nlohmann::json doc;
    doc["format"] = "aalf.ar_models";
    doc["version"] = 1;
    nlohmann::json entries = nlohmann::json::object();
    for (const auto& [name, model] : models) {
        nlohmann::json entry;
        entry["order"] = model.phi.size();
        entry["phi"] = vector_to_json(model.phi);
        if (model.intercept) entry["intercept"] = *model.intercept;
        entry["residual_std"] = model.residual_std;
        entries[name] = std::move(entry);
    }
    doc["models"] = std::move(entries);
    return doc.dump(2) + "\n";
}

std::map<std::string, ARModel> parse_ar_models(const std::string& text) {
    const nlohmann::json doc = nlohmann::json::parse(text);
    if (doc.value("format", "") != "aalf.ar_models" || doc.value("version", 0) != 1)
        throw std::runtime_error("parse_ar_models: unrecognized model file");
    std::map<std::string, ARModel> models;
    for (const auto& [name, entry] : doc.at("models").items()) {
        ARModel m;
        m.phi = vector_from_json(entry.at("phi"));
        if (m.phi.size() != entry.at("order").get<Eigen::Index>())
            throw std::runtime_error("parse_ar_models: declared order does not match phi");
        if (entry.contains("intercept")) m.intercept = entry["intercept"].get<double>();
        m.residual_std = entry.at("residual_std").get<double>();
        models.emplace(name, std::move(m));
    }
    return models;
}

std::string serialize_mlp(const MLPModel& model) {
    nlohmann::json doc;
    doc["format"] = "aalf.mlp";
    doc["version"] = 1;
    doc["shape"] = {{"input", model.w1.cols()},
                    {"hidden1", model.w1.rows()},
                    {"hidden2", model.w2.rows()}};
    doc["w1"] = matrix_to_json(model.w1);
    doc["b1"] = vector_to_json(model.b1);
    doc["w2"] = matrix_to_json(model.w2);
    doc["b2"] = vector_to_json(model.b2);
    doc["w3"] = matrix_to_json(model.w3);
    doc["b3"] = vector_to_json(model.b3);
    return doc.dump(2) + "\n";
}

MLPModel parse_mlp(const std::string& text) {
    const nlohmann::json doc = nlohmann::json::parse(text);
    if (doc.value("format", "") != "aalf.mlp" || doc.value("version", 0) != 1)
        throw std::runtime_error("parse_mlp: unrecognized model file");
    MLPModel m;
    const auto& shape = doc.at("shape");
    m.w1 = matrix_from_json(doc.at("w1"), shape.at("input").get<Eigen::Index>());
    m.b1 = vector_from_json(doc.at("b1"));
    m.w2 = matrix_from_json(doc.at("w2"), shape.at("hidden1").get<Eigen::Index>());
    m.b2 = vector_from_json(doc.at("b2"));
    m.w3 = matrix_from_json(doc.at("w3"), shape.at("hidden2").get<Eigen::Index>());
    m.b3 = vector_from_json(doc.at("b3"));
    if (m.w1.rows() != shape.at("hidden1").get<Eigen::Index>() ||
        m.w2.rows() != shape.at("hidden2").get<Eigen::Index>() || m.w3.rows() != 1)
        throw std::runtime_error("parse_mlp: shape metadata does not match weights");
    return m;
}

}  // namespace aalf
