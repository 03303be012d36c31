#include "aalf/pipeline.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <exception>
#include <filesystem>
#include <fstream>
#include <mutex>
#include <set>
#include <sstream>
#include <thread>

#include <json.hpp>

#include "aalf/common.hpp"
#include "aalf/features.hpp"
#include "aalf/metrics.hpp"
#include "aalf/oracle.hpp"
#include "aalf/selector.hpp"
#include "aalf/stats.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace aalf {

namespace {

constexpr const char* kIngestedFile = "ingested.json";
constexpr const char* kDiscardsFile = "discards.csv";
constexpr const char* kArModelsFile = "ar_models.json";
constexpr const char* kMlpModelFile = "mlp_model.json";
constexpr const char* kPredictionsF = "predictions_f.csv";
constexpr const char* kPredictionsG = "predictions_g.csv";
constexpr const char* kFloorCurves = "floor_curves.csv";
constexpr const char* kFloorAggregate = "floor_curve_aggregate.csv";
constexpr const char* kF1Validation = "f1_validation.csv";
constexpr const char* kMetricsTest = "metrics_test.csv";
constexpr const char* kScatter = "scatter.csv";
constexpr const char* kCdDiagram = "cd_diagram.csv";
constexpr const char* kManifest = "manifest.json";
constexpr const char* kReportJson = "report.json";
constexpr const char* kSummaryTxt = "summary.txt";

std::string checksum_hex(const std::string& content) {
    char buf[17];
    std::snprintf(buf, sizeof(buf), "%016llx",
                  static_cast<unsigned long long>(fnv1a64(content)));
    return buf;
}

std::string read_file(const fs::path& path, const std::string& prerequisite) {
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        if (prerequisite.empty())
            throw std::runtime_error("cannot open '" + path.string() + "'");
        throw MissingArtifact("missing '" + path.string() + "'; run `aalf " + prerequisite +
                              "` first");
    }
    std::ostringstream buf;
    buf << in.rdbuf();
    return buf.str();
}

void write_file_atomic(const fs::path& path, const std::string& content) {
    const fs::path partial = path.string() + ".partial";
    {
        std::ofstream out(partial, std::ios::binary | std::ios::trunc);
        if (!out) throw std::runtime_error("cannot write '" + partial.string() + "'");
        out << content;
    }
    fs::rename(partial, path);
}

/// Collects a stage's outputs, writes them all as .partial, renames on
/// commit, then records the stage in the manifest.
class StageWriter {
  public:
    StageWriter(const ExperimentConfig& cfg, std::string stage)
        : cfg_(cfg), stage_(std::move(stage)), started_(std::chrono::steady_clock::now()) {}

    void add(const std::string& relpath, std::string content) {
        files_.emplace_back(relpath, std::move(content));
    }
    void note_seed(const std::string& name, std::uint64_t value) { seeds_[name] = value; }
    void note(const std::string& key, const std::string& value) { notes_[key] = value; }

    void commit() {
        const fs::path out(cfg_.out);
        fs::create_directories(out);
        for (const auto& [rel, content] : files_) {
            const fs::path target = out / rel;
            if (target.has_parent_path()) fs::create_directories(target.parent_path());
            std::ofstream o(target.string() + ".partial", std::ios::binary | std::ios::trunc);
            if (!o) throw std::runtime_error("cannot write '" + target.string() + ".partial'");
            o << content;
        }
        for (const auto& [rel, content] : files_) {
            const fs::path target = out / rel;
            fs::rename(target.string() + ".partial", target);
        }
        const double wall_ms =
            std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - started_)
                .count();
        update_manifest(wall_ms);
    }

  private:
    void update_manifest(double wall_ms) {
        const fs::path path = fs::path(cfg_.out) / kManifest;
        json manifest = json::object();
        if (fs::exists(path)) {
            try {
                manifest = json::parse(read_file(path, ""));
            } catch (const std::exception&) {
                manifest = json::object();
            }
        }
        const std::string hash = config_hash(cfg_);
        if (manifest.value("config_hash", "") != hash) {
            manifest = json::object();
            manifest["format"] = "aalf.manifest";
            manifest["version"] = 1;
            manifest["config_hash"] = hash;
            manifest["tool_version"] = AALF_VERSION;
            manifest["master_seed"] = cfg_.seed;
            manifest["stages"] = json::object();
        }
        json stage;
        stage["wall_ms"] = wall_ms;
        json file_list = json::array();
        for (const auto& [rel, content] : files_)
            file_list.push_back({{"path", rel}, {"checksum", checksum_hex(content)}});
        stage["files"] = std::move(file_list);
        if (!seeds_.empty()) stage["seeds"] = seeds_;
        for (const auto& [k, v] : notes_) stage[k] = v;
        manifest["stages"][stage_] = std::move(stage);
        write_file_atomic(path, manifest.dump(2) + "\n");
    }

    const ExperimentConfig& cfg_;
    std::string stage_;
    std::chrono::steady_clock::time_point started_;
    std::vector<std::pair<std::string, std::string>> files_;
    std::map<std::string, std::uint64_t> seeds_;
    std::map<std::string, std::string> notes_;
};

std::span<const double> as_span(const Eigen::VectorXd& v) {
    return {v.data(), static_cast<std::size_t>(v.size())};
}

}  // namespace

// ---------------------------------------------------------------------------
// Configuration

namespace {

void validate(const ExperimentConfig& cfg) {
    const std::set<std::string> formats{"tsf", "csv_long", "csv_wide"};
    if (!formats.count(cfg.dataset.format))
        throw ConfigError("dataset.format must be tsf, csv_long or csv_wide");
    if (cfg.dataset.lag < 0) throw ConfigError("dataset.lag must be >= 0");
    if (cfg.split.train_fraction <= 0 || cfg.split.val_fraction <= 0 ||
        cfg.split.train_fraction + cfg.split.val_fraction >= 1)
        throw ConfigError("split fractions must be positive and sum below 1");
    if (cfg.p_grid.empty()) throw ConfigError("p_grid must not be empty");
    for (double p : cfg.p_grid)
        if (!(p > 0.0 && p <= 1.0)) throw ConfigError("p_grid values must lie in (0, 1]");
    if (cfg.oracle_samples < 1) throw ConfigError("oracle_samples must be >= 1");
    if (cfg.threads < 1) throw ConfigError("threads must be >= 1");
    const std::set<std::string> known{"rnd", "lr", "rf", "rfu"};
    if (cfg.selector.classifiers.empty()) throw ConfigError("selector.classifiers is empty");
    for (const auto& c : cfg.selector.classifiers)
        if (!known.count(c)) throw ConfigError("unknown classifier '" + c + "'");
    if (!known.count(cfg.selector.kind))
        throw ConfigError("unknown selector.kind '" + cfg.selector.kind + "'");
    if (!(cfg.selector.threshold > 0.0 && cfg.selector.threshold < 1.0))
        throw ConfigError("selector.threshold must lie in (0, 1)");
    if (cfg.selector.rf_trees < 1 || cfg.selector.rfu_members < 1)
        throw ConfigError("selector tree/member counts must be >= 1");
}

}  // namespace

ExperimentConfig parse_config_text(const std::string& text) {
    json doc;
    try {
        doc = json::parse(text);
    } catch (const json::exception& e) {
        throw ConfigError(std::string("config is not valid JSON: ") + e.what());
    }

    ExperimentConfig cfg;
    if (doc.contains("dataset")) {
        const auto& d = doc["dataset"];
        cfg.dataset.path = d.value("path", cfg.dataset.path);
        cfg.dataset.format = d.value("format", cfg.dataset.format);
        cfg.dataset.name = d.value("name", cfg.dataset.name);
        cfg.dataset.lag = d.value("lag", cfg.dataset.lag);
        cfg.dataset.frequency = d.value("frequency", cfg.dataset.frequency);
        cfg.dataset.horizon = d.value("horizon", cfg.dataset.horizon);
    }
    if (doc.contains("split")) {
        cfg.split.train_fraction = doc["split"].value("train_fraction", cfg.split.train_fraction);
        cfg.split.val_fraction = doc["split"].value("val_fraction", cfg.split.val_fraction);
    }
    cfg.standardize = doc.value("standardize", cfg.standardize);
    if (doc.contains("ar")) {
        cfg.ar.intercept = doc["ar"].value("intercept", cfg.ar.intercept);
        cfg.ar.ridge = doc["ar"].value("ridge", cfg.ar.ridge);
    }
    if (doc.contains("mlp")) {
        const auto& m = doc["mlp"];
        cfg.mlp.epochs = m.value("epochs", cfg.mlp.epochs);
        cfg.mlp.batch_size = m.value("batch_size", cfg.mlp.batch_size);
        cfg.mlp.learning_rate = m.value("learning_rate", cfg.mlp.learning_rate);
        cfg.mlp.l2 = m.value("l2", cfg.mlp.l2);
        cfg.mlp.hidden1 = m.value("hidden1", cfg.mlp.hidden1);
        cfg.mlp.hidden2 = m.value("hidden2", cfg.mlp.hidden2);
        const std::string opt = m.value("optimizer", std::string("adam"));
        if (opt == "adam") {
            cfg.mlp.optimizer = Optimizer::adam;
        } else if (opt == "sgd") {
            cfg.mlp.optimizer = Optimizer::sgd;
        } else {
            throw ConfigError("mlp.optimizer must be adam or sgd");
        }
    }
    cfg.g_import = doc.value("g_import", cfg.g_import);
    if (doc.contains("p_grid")) cfg.p_grid = doc["p_grid"].get<std::vector<double>>();
    cfg.oracle_samples = doc.value("oracle_samples", cfg.oracle_samples);
    if (doc.contains("selector")) {
        const auto& s = doc["selector"];
        cfg.selector.kind = s.value("kind", cfg.selector.kind);
        if (s.contains("classifiers"))
            cfg.selector.classifiers = s["classifiers"].get<std::vector<std::string>>();
        cfg.selector.pooled = s.value("pooled", cfg.selector.pooled);
        cfg.selector.rf_trees = s.value("rf_trees", cfg.selector.rf_trees);
        cfg.selector.rfu_members = s.value("rfu_members", cfg.selector.rfu_members);
        cfg.selector.threshold = s.value("threshold", cfg.selector.threshold);
        cfg.selector.logistic_iterations =
            s.value("logistic_iterations", cfg.selector.logistic_iterations);
        cfg.selector.logistic_lr = s.value("logistic_lr", cfg.selector.logistic_lr);
        cfg.selector.logistic_l2 = s.value("logistic_l2", cfg.selector.logistic_l2);
    }
    cfg.seed = doc.value("seed", cfg.seed);
    cfg.out = doc.value("out", cfg.out);
    cfg.threads = doc.value("threads", cfg.threads);

    validate(cfg);
    return cfg;
}

ExperimentConfig load_config(const std::string& path) {
    return parse_config_text(read_file(path, ""));
}

std::string semantic_config_json(const ExperimentConfig& cfg) {
    json doc;
    doc["dataset"] = {{"path", cfg.dataset.path},   {"format", cfg.dataset.format},
                      {"name", cfg.dataset.name},   {"lag", cfg.dataset.lag},
                      {"frequency", cfg.dataset.frequency}, {"horizon", cfg.dataset.horizon}};
    doc["split"] = {{"train_fraction", cfg.split.train_fraction},
                    {"val_fraction", cfg.split.val_fraction}};
    doc["standardize"] = cfg.standardize;
    doc["ar"] = {{"intercept", cfg.ar.intercept}, {"ridge", cfg.ar.ridge}};
    doc["mlp"] = {{"epochs", cfg.mlp.epochs},
                  {"batch_size", cfg.mlp.batch_size},
                  {"learning_rate", cfg.mlp.learning_rate},
                  {"optimizer", cfg.mlp.optimizer == Optimizer::adam ? "adam" : "sgd"},
                  {"l2", cfg.mlp.l2},
                  {"hidden1", cfg.mlp.hidden1},
                  {"hidden2", cfg.mlp.hidden2}};
    doc["g_import"] = cfg.g_import;
    doc["p_grid"] = cfg.p_grid;
    doc["oracle_samples"] = cfg.oracle_samples;
    doc["selector"] = {{"kind", cfg.selector.kind},
                       {"classifiers", cfg.selector.classifiers},
                       {"pooled", cfg.selector.pooled},
                       {"rf_trees", cfg.selector.rf_trees},
                       {"rfu_members", cfg.selector.rfu_members},
                       {"threshold", cfg.selector.threshold},
                       {"logistic_iterations", cfg.selector.logistic_iterations},
                       {"logistic_lr", cfg.selector.logistic_lr},
                       {"logistic_l2", cfg.selector.logistic_l2}};
    doc["seed"] = cfg.seed;
    return doc.dump();
}

std::string config_hash(const ExperimentConfig& cfg) {
    return checksum_hex(semantic_config_json(cfg));
}

void parallel_for(std::size_t count, int threads, const std::function<void(std::size_t)>& fn) {
    if (count == 0) return;
    const int workers = std::min<int>(threads, static_cast<int>(count));
    if (workers <= 1) {
        for (std::size_t i = 0; i < count; ++i) fn(i);
        return;
    }
    std::atomic<std::size_t> next{0};
    std::mutex error_mutex;
    std::exception_ptr error;
    auto worker = [&] {
        while (true) {
            const std::size_t i = next.fetch_add(1);
            if (i >= count) return;
            try {
                fn(i);
            } catch (...) {
                std::lock_guard<std::mutex> lock(error_mutex);
                if (!error) error = std::current_exception();
            }
        }
    };
    std::vector<std::thread> pool;
    pool.reserve(static_cast<std::size_t>(workers));
    for (int w = 0; w < workers; ++w) pool.emplace_back(worker);
    for (auto& t : pool) t.join();
    if (error) std::rethrow_exception(error);
}

// ---------------------------------------------------------------------------
// Shared stage state

namespace {

struct PreparedSeries {
    TimeSeries working;  // standardized when cfg.standardize, else raw
    SplitSpec split;
    Standardization stats;
};

struct LoadedRun {
    Dataset raw;                        // kept series, raw values
    Dataset working;                    // same series in model space
    std::vector<PreparedSeries> series;
};

std::string p_token(double p) { return format_double(p); }
std::string aalf_label(double p) { return "aalf_p" + p_token(p); }
std::string selector_file(const std::string& kind, double p) {
    return "selector_" + kind + "_p" + p_token(p) + ".json";
}
std::string audit_file(double p) { return "audit_p" + p_token(p) + ".csv"; }

LoadedRun load_ingested(const ExperimentConfig& cfg) {
    const json doc = json::parse(read_file(fs::path(cfg.out) / kIngestedFile, "ingest"));
    if (doc.value("format", "") != "aalf.dataset" || doc.value("version", 0) != 1)
        throw std::runtime_error("ingested.json is not a version-1 dataset store");

    LoadedRun run;
    run.raw.name = doc.at("name").get<std::string>();
    run.raw.lag = doc.at("lag").get<int>();
    run.raw.horizon = doc.at("horizon").get<int>();
    for (const auto& s : doc.at("series")) {
        TimeSeries ts;
        ts.name = s.at("name").get<std::string>();
        ts.frequency = Frequency::from_token(s.value("frequency", "other"));
        if (s.contains("start")) ts.start_timestamp = s["start"].get<std::string>();
        ts.values = s.at("values").get<std::vector<double>>();
        run.raw.series.push_back(std::move(ts));
    }

    run.working = run.raw;
    run.working.series.clear();
    for (const auto& ts : run.raw.series) {
        PreparedSeries prep;
        prep.split = split_series(ts.length(), cfg.split.train_fraction, cfg.split.val_fraction);
        if (cfg.standardize) {
            auto [std_series, stats] = standardize(ts, prep.split);
            prep.working = std::move(std_series);
            prep.stats = stats;
        } else {
            prep.working = ts;
        }
        run.working.series.push_back(prep.working);
        run.series.push_back(std::move(prep));
    }
    return run;
}

PredictionTable load_predictions(const ExperimentConfig& cfg, const LoadedRun& run) {
    PredictionTable table =
        make_prediction_table(run.working, cfg.split.train_fraction, cfg.split.val_fraction);

    const std::string f_text = read_file(fs::path(cfg.out) / kPredictionsF, "train-base");
    for (Segment seg : {Segment::train, Segment::val, Segment::test}) {
        std::istringstream in(f_text);
        import_predictions(table, run.working, seg, "f", in);
    }
    const std::string g_text = read_file(fs::path(cfg.out) / kPredictionsG, "train-base");
    for (Segment seg : {Segment::val, Segment::test}) {
        std::istringstream in(g_text);
        import_predictions(table, run.working, seg, "g", in);
    }
    try {
        std::istringstream in(g_text);
        import_predictions(table, run.working, Segment::train, "g", in);
    } catch (const AlignmentMismatch&) {
        // imported g predictions may not cover the train segment
    }
    return table;
}

void append_prediction_rows(std::ostringstream& out, const std::string& series,
                            const SegmentPredictions& slot, Segment seg,
                            const Eigen::VectorXd& values) {
    for (std::size_t i = 0; i < slot.origin_indices.size(); ++i)
        out << series << ',' << segment_name(seg) << ',' << slot.origin_indices[i] << ','
            << format_double(values(static_cast<Eigen::Index>(i))) << "\n";
}

SeriesPredictions slot_to_series(const std::string& name, const SegmentPredictions& slot) {
    SeriesPredictions sp;
    sp.series = name;
    sp.origin_indices = slot.origin_indices;
    sp.f_pred = slot.f_pred;
    sp.g_pred = slot.g_pred;
    sp.truth = slot.truth;
    return sp;
}

}  // namespace

// ---------------------------------------------------------------------------
// ingest

void cmd_ingest(const ExperimentConfig& cfg) {
    StageWriter stage(cfg, "ingest");
    if (cfg.dataset.path.empty()) throw ConfigError("dataset.path is not set");

    const std::string text = read_file(cfg.dataset.path, "");
    Dataset dataset;
    if (cfg.dataset.format == "tsf") {
        dataset = parse_tsf_text(text);
    } else {
        const CsvLayout layout =
            cfg.dataset.format == "csv_long" ? CsvLayout::long_form : CsvLayout::wide_form;
        dataset = parse_csv_text(text, layout,
                                 cfg.dataset.name.empty() ? "csv" : cfg.dataset.name);
    }
    if (!cfg.dataset.name.empty()) dataset.name = cfg.dataset.name;
    if (cfg.dataset.horizon > 0) dataset.horizon = cfg.dataset.horizon;
    if (!cfg.dataset.frequency.empty()) {
        const Frequency freq = Frequency::from_token(cfg.dataset.frequency);
        for (auto& s : dataset.series) s.frequency = freq;
        dataset.lag = 0;
        if (freq.kind != Frequency::Kind::other) dataset.lag = default_lag(freq);
    }
    if (cfg.dataset.lag > 0) dataset.lag = cfg.dataset.lag;
    if (dataset.lag <= 0) {
        if (dataset.series.empty()) throw std::runtime_error("dataset has no series");
        dataset.lag = default_lag(dataset.series.front().frequency);
    }

    std::vector<std::pair<std::string, std::string>> discards;
    Dataset sized = dataset;
    sized.series.clear();
    for (const auto& s : dataset.series) {
        if (s.length() < 10)
            discards.emplace_back(s.name, "too_short");
        else
            sized.series.push_back(s);
    }
    auto [kept, constant_names] =
        filter_constant(sized, cfg.split.train_fraction, cfg.split.val_fraction);
    for (const auto& name : constant_names) discards.emplace_back(name, "constant");

    Dataset usable = kept;
    usable.series.clear();
    for (const auto& s : kept.series) {
        const SplitSpec split =
            split_series(s.length(), cfg.split.train_fraction, cfg.split.val_fraction);
        if (split.train_end <= static_cast<std::size_t>(dataset.lag))
            discards.emplace_back(s.name, "insufficient_history");
        else
            usable.series.push_back(s);
    }
    if (usable.series.empty())
        throw std::runtime_error("no usable series remain after filtering");

    json doc;
    doc["format"] = "aalf.dataset";
    doc["version"] = 1;
    doc["name"] = usable.name;
    doc["lag"] = usable.lag;
    doc["horizon"] = usable.horizon;
    doc["standardize"] = cfg.standardize;
    doc["split"] = {{"train_fraction", cfg.split.train_fraction},
                    {"val_fraction", cfg.split.val_fraction}};
    json series_list = json::array();
    for (const auto& s : usable.series) {
        json entry;
        entry["name"] = s.name;
        entry["frequency"] = s.frequency.to_token().empty() ? "other" : s.frequency.to_token();
        if (s.start_timestamp) entry["start"] = *s.start_timestamp;
        entry["values"] = s.values;
        series_list.push_back(std::move(entry));
    }
    doc["series"] = std::move(series_list);
    stage.add(kIngestedFile, doc.dump(2) + "\n");

    std::ostringstream disc;
    disc << "name,reason\n";
    for (const auto& [name, reason] : discards) disc << name << ',' << reason << "\n";
    stage.add(kDiscardsFile, disc.str());

    stage.commit();
}

// ---------------------------------------------------------------------------
// train-base

void cmd_train_base(const ExperimentConfig& cfg) {
    StageWriter stage(cfg, "train-base");
    const LoadedRun run = load_ingested(cfg);
    const std::size_t n_series = run.series.size();
    const int lag = run.raw.lag;

    PredictionTable table =
        make_prediction_table(run.working, cfg.split.train_fraction, cfg.split.val_fraction);

    // Local AR models, one per series.
    std::vector<ARModel> ar_models(n_series);
    parallel_for(n_series, cfg.threads, [&](std::size_t i) {
        const PreparedSeries& prep = run.series[i];
        const WindowedSet train = make_windows(prep.working, Segment::train, lag, prep.split);
        ar_models[i] = fit_ar(train, cfg.ar.intercept, cfg.ar.ridge);
        for (Segment seg : {Segment::train, Segment::val, Segment::test}) {
            const WindowedSet ws = make_windows(prep.working, seg, lag, prep.split);
            Eigen::VectorXd pred(ws.size());
            for (Eigen::Index r = 0; r < ws.size(); ++r)
                pred(r) = predict_ar(ar_models[i], ws.inputs.row(r).transpose());
            table.slot(prep.working.name, seg).f_pred = std::move(pred);
        }
    });

    std::map<std::string, ARModel> ar_by_name;
    for (std::size_t i = 0; i < n_series; ++i)
        ar_by_name.emplace(run.series[i].working.name, ar_models[i]);
    stage.add(kArModelsFile, serialize_ar_models(ar_by_name));

    // Global g: either one MLP over the pooled train windows or an import.
    if (cfg.g_import.empty()) {
        Eigen::Index total_rows = 0;
        std::vector<WindowedSet> train_sets(n_series);
        for (std::size_t i = 0; i < n_series; ++i) {
            train_sets[i] =
                make_windows(run.series[i].working, Segment::train, lag, run.series[i].split);
            total_rows += train_sets[i].size();
        }
        WindowedSet pooled;
        pooled.inputs.resize(total_rows, lag);
        pooled.targets.resize(total_rows);
        pooled.origin_indices.reserve(static_cast<std::size_t>(total_rows));
        Eigen::Index at = 0;
        for (const auto& ws : train_sets) {
            pooled.inputs.middleRows(at, ws.size()) = ws.inputs;
            pooled.targets.segment(at, ws.size()) = ws.targets;
            pooled.origin_indices.insert(pooled.origin_indices.end(), ws.origin_indices.begin(),
                                         ws.origin_indices.end());
            at += ws.size();
        }

        TrainConfig mlp_cfg = cfg.mlp;
        mlp_cfg.seed = derive_seed(cfg.seed, "mlp");
        stage.note_seed("mlp", mlp_cfg.seed);
        const MLPModel mlp = fit_mlp(pooled, mlp_cfg);
        stage.add(kMlpModelFile, serialize_mlp(mlp));

        parallel_for(n_series, cfg.threads, [&](std::size_t i) {
            const PreparedSeries& prep = run.series[i];
            for (Segment seg : {Segment::train, Segment::val, Segment::test}) {
                const WindowedSet ws = make_windows(prep.working, seg, lag, prep.split);
                table.slot(prep.working.name, seg).g_pred = predict_mlp(mlp, ws.inputs);
            }
        });
    } else {
        const std::string g_text = read_file(cfg.g_import, "");
        for (Segment seg : {Segment::val, Segment::test}) {
            std::istringstream in(g_text);
            import_predictions(table, run.working, seg, "g", in);
        }
        try {
            std::istringstream in(g_text);
            import_predictions(table, run.working, Segment::train, "g", in);
        } catch (const AlignmentMismatch&) {
            // train rows are optional in imports
        }
        stage.note("g_imported_from", cfg.g_import);
    }

    std::ostringstream f_csv, g_csv;
    f_csv << "series,segment,origin_index,value\n";
    g_csv << "series,segment,origin_index,value\n";
    for (const auto& s : run.working.series) {
        for (Segment seg : {Segment::train, Segment::val, Segment::test}) {
            const SegmentPredictions& slot = table.slot(s.name, seg);
            if (slot.f_pred.size() > 0) append_prediction_rows(f_csv, s.name, slot, seg, slot.f_pred);
            if (slot.g_pred.size() > 0) append_prediction_rows(g_csv, s.name, slot, seg, slot.g_pred);
        }
    }
    stage.add(kPredictionsF, f_csv.str());
    stage.add(kPredictionsG, g_csv.str());

    stage.commit();
}

// ---------------------------------------------------------------------------
// oracle

void cmd_oracle(const ExperimentConfig& cfg) {
    StageWriter stage(cfg, "oracle");
    const LoadedRun run = load_ingested(cfg);
    const PredictionTable table = load_predictions(cfg, run);

    const std::uint64_t sweep_seed = derive_seed(cfg.seed, "oracle");
    stage.note_seed("oracle_sweep", sweep_seed);
    std::vector<double> p_values = sample_p_values(cfg.oracle_samples, sweep_seed);
    p_values.push_back(1.0);  // exact endpoint: the all-f selection

    const std::size_t n_series = run.series.size();
    std::vector<FloorCurve> curves(n_series);
    parallel_for(n_series, cfg.threads, [&](std::size_t i) {
        const std::string& name = run.series[i].working.name;
        curves[i] = floor_sweep(slot_to_series(name, table.slot(name, Segment::test)), p_values);
    });

    std::ostringstream per_series;
    per_series << "series,p,achieved_p,rmse\n";
    for (std::size_t i = 0; i < n_series; ++i)
        for (const FloorPoint& pt : curves[i].points)
            per_series << run.series[i].working.name << ',' << format_double(pt.p) << ','
                       << format_double(pt.achieved_p) << ',' << format_double(pt.rmse) << "\n";
    stage.add(kFloorCurves, per_series.str());

    std::ostringstream aggregate;
    aggregate << "p,achieved_p,rmse\n";
    for (std::size_t k = 0; k < p_values.size(); ++k) {
        std::vector<double> rmses(n_series), achieved(n_series);
        for (std::size_t i = 0; i < n_series; ++i) {
            rmses[i] = curves[i].points[k].rmse;
            achieved[i] = curves[i].points[k].achieved_p;
        }
        aggregate << format_double(p_values[k]) << ',' << format_double(dataset_average(achieved))
                  << ',' << format_double(dataset_average(rmses)) << "\n";
    }
    stage.add(kFloorAggregate, aggregate.str());

    stage.commit();
}

// ---------------------------------------------------------------------------
// fit-selector

namespace {

struct SeriesTrainingData {
    LabeledSelectionSet set;  // validation features + oracle labels
};

/// Everything fit-selector and evaluate need to run one classifier on one
/// feature matrix.
struct FittedSelector {
    std::string kind;  // rnd | lr | rf | rfu | forest (rfu fallback)
    RandomForest forest;
    BalancedForestEnsemble rfu;
    LogisticModel logistic;
    double rnd_p = 0.0;

    double proba(const Eigen::VectorXd& x) const {
        if (kind == "forest" || kind == "rf") return predict_proba(forest, x);
        if (kind == "rfu") return predict_proba(rfu, x);
        if (kind == "lr") return predict_proba(logistic, x);
        throw std::runtime_error("selector kind '" + kind + "' cannot score features");
    }

    json to_json() const {
        if (kind == "forest" || kind == "rf") return json::parse(serialize_forest(forest));
        if (kind == "rfu") return json::parse(serialize_rfu(rfu));
        if (kind == "lr") return json::parse(serialize_logistic(logistic));
        throw std::runtime_error("selector kind '" + kind + "' has no model to serialize");
    }
};

FittedSelector fit_one(const std::string& classifier, const ExperimentConfig& cfg,
                       const LabeledSelectionSet& set, const std::string& series_key, double p) {
    FittedSelector out;
    if (classifier == "lr") {
        out.kind = "lr";
        out.logistic =
            fit_logistic(set.features, set.labels, cfg.selector.logistic_iterations,
                         cfg.selector.logistic_lr, cfg.selector.logistic_l2);
        return out;
    }
    ForestParams fp;
    fp.trees = cfg.selector.rf_trees;
    if (classifier == "rf") {
        out.kind = "rf";
        out.forest = fit_forest(set.features, set.labels, fp,
                                derive_seed(cfg.seed, "rf|" + series_key + "|" + p_token(p)));
        return out;
    }
    RfuParams rp;
    rp.members = cfg.selector.rfu_members;
    rp.threshold = cfg.selector.threshold;
    rp.forest = fp;
    try {
        out.kind = "rfu";
        out.rfu = fit_rfu(set.features, set.labels, rp,
                          derive_seed(cfg.seed, "rfu|" + series_key + "|" + p_token(p)));
    } catch (const SingleClass&) {
        // single-label series cannot be balanced; a plain forest degrades
        // gracefully to the constant prediction
        out.kind = "forest";
        out.forest =
            fit_forest(set.features, set.labels, fp,
                       derive_seed(cfg.seed, "rfu_fallback|" + series_key + "|" + p_token(p)));
    }
    return out;
}

FittedSelector selector_from_json(const json& envelope) {
    FittedSelector out;
    const std::string kind = envelope.value("kind", "");
    if (kind == "forest") {
        out.kind = "forest";
        out.forest = parse_forest(envelope.dump());
    } else if (kind == "rfu") {
        out.kind = "rfu";
        out.rfu = parse_rfu(envelope.dump());
    } else if (kind == "logistic") {
        out.kind = "lr";
        out.logistic = parse_logistic(envelope.dump());
    } else {
        throw std::runtime_error("unknown selector model kind '" + kind + "'");
    }
    return out;
}

}  // namespace

void cmd_fit_selector(const ExperimentConfig& cfg) {
    StageWriter stage(cfg, "fit-selector");
    const LoadedRun run = load_ingested(cfg);
    const PredictionTable table = load_predictions(cfg, run);
    const std::size_t n_series = run.series.size();
    const int lag = run.raw.lag;

    std::vector<double> grid = cfg.p_grid;
    std::sort(grid.begin(), grid.end());

    // Validation windows and boundary carryover are p-independent.
    std::vector<WindowedSet> val_windows(n_series);
    std::vector<PrevStep> prev_steps(n_series);
    parallel_for(n_series, cfg.threads, [&](std::size_t i) {
        const PreparedSeries& prep = run.series[i];
        val_windows[i] = make_windows(prep.working, Segment::val, lag, prep.split);
        prev_steps[i] = carryover(table.slot(prep.working.name, Segment::train));
    });

    std::ostringstream f1_csv;
    f1_csv << "dataset,classifier,p,f1\n";

    for (const std::string& classifier : cfg.selector.classifiers) {
        for (double p : grid) {
            std::vector<LabeledSelectionSet> sets(n_series);
            parallel_for(n_series, cfg.threads, [&](std::size_t i) {
                sets[i] = build_training_set(
                    val_windows[i], table.slot(run.series[i].working.name, Segment::val),
                    prev_steps[i], p);
            });

            std::vector<ConfusionCounts> counts(n_series);
            json models = json::object();

            if (classifier == "rnd") {
                parallel_for(n_series, cfg.threads, [&](std::size_t i) {
                    const std::string& name = run.series[i].working.name;
                    const SelectionVector guess = random_selector(
                        sets[i].labels.size(), p,
                        derive_seed(cfg.seed, "rnd|" + name + "|" + p_token(p)));
                    counts[i] = confusion(guess.s, sets[i].labels);
                });
            } else if (cfg.selector.pooled) {
                const LabeledSelectionSet pooled = merge_training_sets(sets);
                const FittedSelector model = fit_one(classifier, cfg, pooled, "(pooled)", p);
                models["(pooled)"] = model.to_json();
                parallel_for(n_series, cfg.threads, [&](std::size_t i) {
                    std::vector<char> pred(sets[i].labels.size());
                    for (Eigen::Index r = 0; r < sets[i].features.rows(); ++r)
                        pred[static_cast<std::size_t>(r)] =
                            select(model.proba(sets[i].features.row(r).transpose()),
                                   cfg.selector.threshold);
                    counts[i] = confusion(pred, sets[i].labels);
                });
            } else {
                std::vector<FittedSelector> fitted(n_series);
                parallel_for(n_series, cfg.threads, [&](std::size_t i) {
                    const std::string& name = run.series[i].working.name;
                    fitted[i] = fit_one(classifier, cfg, sets[i], name, p);
                    std::vector<char> pred(sets[i].labels.size());
                    for (Eigen::Index r = 0; r < sets[i].features.rows(); ++r)
                        pred[static_cast<std::size_t>(r)] =
                            select(fitted[i].proba(sets[i].features.row(r).transpose()),
                                   cfg.selector.threshold);
                    counts[i] = confusion(pred, sets[i].labels);
                });
                for (std::size_t i = 0; i < n_series; ++i)
                    models[run.series[i].working.name] = fitted[i].to_json();
            }

            f1_csv << run.raw.name << ',' << classifier << ',' << p_token(p) << ','
                   << format_double(f1_pooled(counts)) << "\n";

            if (classifier != "rnd") {
                json file;
                file["format"] = "aalf.selector_set";
                file["version"] = 1;
                file["classifier"] = classifier;
                file["p"] = p;
                file["pooled"] = cfg.selector.pooled;
                file["threshold"] = cfg.selector.threshold;
                file["models"] = std::move(models);
                stage.add(selector_file(classifier, p), file.dump() + "\n");
            }
        }
    }

    stage.note_seed("selector_master", cfg.seed);
    stage.add(kF1Validation, f1_csv.str());
    stage.commit();
}

// ---------------------------------------------------------------------------
// evaluate

namespace {

struct SelectorSet {
    bool pooled = false;
    double threshold = 0.5;
    std::map<std::string, FittedSelector> models;

    const FittedSelector& for_series(const std::string& name) const {
        const auto it = models.find(pooled ? "(pooled)" : name);
        if (it == models.end())
            throw MissingArtifact("no fitted selector for series '" + name +
                                  "'; run `aalf fit-selector` first");
        return it->second;
    }
};

SelectorSet load_selector_set(const ExperimentConfig& cfg, double p) {
    const fs::path path = fs::path(cfg.out) / selector_file(cfg.selector.kind, p);
    const json doc = json::parse(read_file(path, "fit-selector"));
    if (doc.value("format", "") != "aalf.selector_set" || doc.value("version", 0) != 1)
        throw std::runtime_error("'" + path.string() + "' is not a version-1 selector set");
    SelectorSet set;
    set.pooled = doc.value("pooled", false);
    set.threshold = doc.value("threshold", 0.5);
    for (const auto& [name, envelope] : doc.at("models").items())
        set.models.emplace(name, selector_from_json(envelope));
    return set;
}

struct MethodSeriesMetrics {
    double rmse = 0.0;
    double smape = 0.0;
    double empirical = -1.0;  // negative = not a selection method
};

}  // namespace

void cmd_evaluate(const ExperimentConfig& cfg) {
    StageWriter stage(cfg, "evaluate");
    const LoadedRun run = load_ingested(cfg);
    const PredictionTable table = load_predictions(cfg, run);
    const std::size_t n_series = run.series.size();
    const int lag = run.raw.lag;

    std::vector<double> grid = cfg.p_grid;
    std::sort(grid.begin(), grid.end());

    std::vector<std::string> methods{"f_only", "g_only", "mean_value", "last_value"};
    for (double p : grid) methods.push_back(aalf_label(p));

    std::vector<SelectorSet> selector_sets;
    if (cfg.selector.kind != "rnd")
        for (double p : grid) selector_sets.push_back(load_selector_set(cfg, p));

    // metrics[i][m]: series i under method m; audits[k]: rows for grid[k].
    std::vector<std::vector<MethodSeriesMetrics>> metrics(
        n_series, std::vector<MethodSeriesMetrics>(methods.size()));
    std::vector<std::vector<std::string>> audits(grid.size(),
                                                 std::vector<std::string>(n_series));

    parallel_for(n_series, cfg.threads, [&](std::size_t i) {
        const PreparedSeries& prep = run.series[i];
        const std::string& name = prep.working.name;
        const WindowedSet test = make_windows(prep.working, Segment::test, lag, prep.split);
        const SegmentPredictions& slot = table.slot(name, Segment::test);
        const auto truth = as_span(slot.truth);

        auto set_metrics = [&](std::size_t m, const Eigen::VectorXd& pred, double emp) {
            metrics[i][m] = {rmse(as_span(pred), truth), smape(as_span(pred), truth), emp};
        };

        set_metrics(0, slot.f_pred, 1.0);
        set_metrics(1, slot.g_pred, 0.0);

        Eigen::VectorXd mean_pred(test.size()), last_pred(test.size());
        for (Eigen::Index r = 0; r < test.size(); ++r) {
            const Eigen::VectorXd window = test.inputs.row(r).transpose();
            mean_pred(r) = baseline_mean(window);
            last_pred(r) = baseline_last(window);
        }
        set_metrics(2, mean_pred, -1.0);
        set_metrics(3, last_pred, -1.0);

        const PrevStep prev = carryover(table.slot(name, Segment::val));
        const Eigen::MatrixXd features = build_feature_matrix(test, slot, prev);

        for (std::size_t k = 0; k < grid.size(); ++k) {
            const double p = grid[k];
            Eigen::VectorXd proba(test.size());
            if (cfg.selector.kind == "rnd") {
                const SelectionVector s = random_selector(
                    static_cast<std::size_t>(test.size()), p,
                    derive_seed(cfg.seed, "rnd_test|" + name + "|" + p_token(p)));
                for (Eigen::Index r = 0; r < test.size(); ++r)
                    proba(r) = s.s[static_cast<std::size_t>(r)] ? 1.0 : 0.0;
            } else {
                const FittedSelector& model = selector_sets[k].for_series(name);
                for (Eigen::Index r = 0; r < test.size(); ++r)
                    proba(r) = model.proba(features.row(r).transpose());
            }
            const double threshold =
                cfg.selector.kind == "rnd" ? 0.5 : selector_sets[k].threshold;

            SelectionVector s;
            s.s.resize(static_cast<std::size_t>(test.size()), 0);
            Eigen::VectorXd mixed(test.size());
            std::ostringstream audit;
            for (Eigen::Index r = 0; r < test.size(); ++r) {
                const bool take_f = select(proba(r), threshold);
                s.s[static_cast<std::size_t>(r)] = take_f ? 1 : 0;
                s.achieved_count += take_f;
                mixed(r) = take_f ? slot.f_pred(r) : slot.g_pred(r);
                audit << name << ',' << slot.origin_indices[static_cast<std::size_t>(r)] << ','
                      << format_double(proba(r)) << ',' << int(take_f) << "\n";
            }
            audits[k][i] = audit.str();
            set_metrics(4 + k, mixed, empirical_p(s.s));
        }
    });

    std::ostringstream metrics_csv;
    metrics_csv << "dataset,series,model_or_selector,rmse,smape,empirical_p\n";
    for (std::size_t i = 0; i < n_series; ++i)
        for (std::size_t m = 0; m < methods.size(); ++m) {
            const MethodSeriesMetrics& msm = metrics[i][m];
            metrics_csv << run.raw.name << ',' << run.series[i].working.name << ',' << methods[m]
                        << ',' << format_double(msm.rmse) << ',' << format_double(msm.smape)
                        << ',';
            if (msm.empirical >= 0.0) metrics_csv << format_double(msm.empirical);
            metrics_csv << "\n";
        }
    stage.add(kMetricsTest, metrics_csv.str());

    auto method_average = [&](std::size_t m, auto accessor) {
        std::vector<double> values(n_series);
        for (std::size_t i = 0; i < n_series; ++i) values[i] = accessor(metrics[i][m]);
        return dataset_average(values);
    };

    std::ostringstream scatter;
    scatter << "selector,empirical_p,avg_rmse\n";
    for (std::size_t k = 0; k < grid.size(); ++k) {
        const std::size_t m = 4 + k;
        scatter << methods[m] << ','
                << format_double(method_average(m, [](const MethodSeriesMetrics& v) {
                       return v.empirical;
                   }))
                << ','
                << format_double(
                       method_average(m, [](const MethodSeriesMetrics& v) { return v.rmse; }))
                << "\n";
    }
    scatter << "f_only,1," << format_double(method_average(0, [](const MethodSeriesMetrics& v) {
        return v.rmse;
    })) << "\n";
    scatter << "g_only,0," << format_double(method_average(1, [](const MethodSeriesMetrics& v) {
        return v.rmse;
    })) << "\n";
    stage.add(kScatter, scatter.str());

    for (std::size_t k = 0; k < grid.size(); ++k) {
        std::ostringstream audit;
        audit << "series,origin_index,proba,selected\n";
        for (std::size_t i = 0; i < n_series; ++i) audit << audits[k][i];
        stage.add(audit_file(grid[k]), audit.str());
    }

    Eigen::MatrixXd losses(static_cast<Eigen::Index>(n_series),
                           static_cast<Eigen::Index>(methods.size()));
    for (std::size_t i = 0; i < n_series; ++i)
        for (std::size_t m = 0; m < methods.size(); ++m)
            losses(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(m)) =
                metrics[i][m].rmse;
    const CdResult cd = cd_groups(losses, 0.05);

    std::ostringstream cd_csv;
    cd_csv << "method,avg_rank,group_ids\n";
    for (std::size_t m = 0; m < methods.size(); ++m) {
        cd_csv << methods[m] << ','
               << format_double(cd.avg_rank(static_cast<Eigen::Index>(m))) << ',';
        std::string ids;
        for (std::size_t g = 0; g < cd.groups.size(); ++g)
            if (std::find(cd.groups[g].begin(), cd.groups[g].end(), static_cast<int>(m)) !=
                cd.groups[g].end()) {
                if (!ids.empty()) ids += ';';
                ids += std::to_string(g);
            }
        cd_csv << ids << "\n";
    }
    stage.add(kCdDiagram, cd_csv.str());

    stage.commit();
}

// ---------------------------------------------------------------------------
// report

namespace {

std::vector<std::vector<std::string>> parse_csv_rows(const std::string& text) {
    std::vector<std::vector<std::string>> rows;
    std::istringstream in(text);
    std::string line;
    while (std::getline(in, line)) {
        const std::string_view trimmed = trim(line);
        if (trimmed.empty()) continue;
        std::vector<std::string> row;
        for (const auto field : split(trimmed, ',')) row.emplace_back(field);
        rows.push_back(std::move(row));
    }
    return rows;
}

}  // namespace

void cmd_report(const ExperimentConfig& cfg) {
    StageWriter stage(cfg, "report");
    const fs::path out(cfg.out);

    const json manifest = json::parse(read_file(out / kManifest, "ingest"));
    for (const auto& [stage_name, command] :
         std::vector<std::pair<std::string, std::string>>{{"ingest", "ingest"},
                                                          {"train-base", "train-base"},
                                                          {"oracle", "oracle"},
                                                          {"fit-selector", "fit-selector"},
                                                          {"evaluate", "evaluate"}})
        if (!manifest.at("stages").contains(stage_name))
            throw MissingArtifact("stage '" + stage_name + "' has not produced outputs; run `aalf " +
                                  command + "` first");

    const json ingested = json::parse(read_file(out / kIngestedFile, "ingest"));
    const auto discards = parse_csv_rows(read_file(out / kDiscardsFile, "ingest"));
    const auto f1_rows = parse_csv_rows(read_file(out / kF1Validation, "fit-selector"));
    const auto metric_rows = parse_csv_rows(read_file(out / kMetricsTest, "evaluate"));
    const auto scatter_rows = parse_csv_rows(read_file(out / kScatter, "evaluate"));
    const auto cd_rows = parse_csv_rows(read_file(out / kCdDiagram, "evaluate"));
    const auto floor_rows = parse_csv_rows(read_file(out / kFloorAggregate, "oracle"));

    json report;
    report["format"] = "aalf.report";
    report["version"] = 1;
    report["tool_version"] = AALF_VERSION;
    report["config_hash"] = config_hash(cfg);
    report["config"] = json::parse(semantic_config_json(cfg));

    report["dataset"] = {{"name", ingested.at("name")},
                         {"lag", ingested.at("lag")},
                         {"series_kept", ingested.at("series").size()},
                         {"series_discarded", discards.size() > 0 ? discards.size() - 1 : 0}};
    json discard_list = json::array();
    for (std::size_t r = 1; r < discards.size(); ++r)
        discard_list.push_back({{"name", discards[r][0]}, {"reason", discards[r][1]}});
    report["discards"] = std::move(discard_list);

    json f1_table = json::array();
    for (std::size_t r = 1; r < f1_rows.size(); ++r)
        f1_table.push_back({{"classifier", f1_rows[r][1]},
                            {"p", std::stod(f1_rows[r][2])},
                            {"f1", std::stod(f1_rows[r][3])}});
    report["validation_f1"] = std::move(f1_table);

    std::map<std::string, std::vector<double>> rmse_by_method, smape_by_method;
    for (std::size_t r = 1; r < metric_rows.size(); ++r) {
        rmse_by_method[metric_rows[r][2]].push_back(std::stod(metric_rows[r][3]));
        smape_by_method[metric_rows[r][2]].push_back(std::stod(metric_rows[r][4]));
    }
    json test_avg = json::object();
    for (const auto& [method, values] : rmse_by_method)
        test_avg[method] = {{"rmse", dataset_average(values)},
                            {"smape", dataset_average(smape_by_method[method])}};
    report["test_average"] = std::move(test_avg);

    json scatter = json::array();
    for (std::size_t r = 1; r < scatter_rows.size(); ++r)
        scatter.push_back({{"selector", scatter_rows[r][0]},
                           {"empirical_p", std::stod(scatter_rows[r][1])},
                           {"avg_rmse", std::stod(scatter_rows[r][2])}});
    report["scatter"] = std::move(scatter);

    json cd = json::array();
    for (std::size_t r = 1; r < cd_rows.size(); ++r)
        cd.push_back({{"method", cd_rows[r][0]},
                      {"avg_rank", std::stod(cd_rows[r][1])},
                      {"group_ids", cd_rows[r].size() > 2 ? cd_rows[r][2] : ""}});
    report["cd_diagram"] = std::move(cd);

    double floor_end = 0.0, floor_min = std::numeric_limits<double>::infinity();
    for (std::size_t r = 1; r < floor_rows.size(); ++r) {
        const double p = std::stod(floor_rows[r][0]);
        const double v = std::stod(floor_rows[r][2]);
        if (p == 1.0) floor_end = v;
        floor_min = std::min(floor_min, v);
    }
    report["oracle_floor"] = {{"points", floor_rows.size() - 1},
                              {"rmse_at_p1", floor_end},
                              {"best_rmse", floor_min}};

    json artifacts = json::object();
    for (const auto& [name, entry] : manifest.at("stages").items()) {
        if (name == "report") continue;
        json files = json::array();
        for (const auto& f : entry.at("files")) files.push_back(f);
        artifacts[name] = std::move(files);
    }
    report["artifacts"] = std::move(artifacts);

    report["notes"] = json::array({"metrics are computed in the model space (standardized when "
                                   "standardize=true)",
                                   "pairwise Wilcoxon tests are uncorrected",
                                   "rmse uses the mean inside the root"});

    stage.add(kReportJson, report.dump(2) + "\n");

    std::ostringstream txt;
    txt << "aalf run " << config_hash(cfg) << " (" << ingested.at("name").get<std::string>()
        << ")\n";
    txt << "series kept: " << ingested.at("series").size()
        << ", discarded: " << (discards.size() > 0 ? discards.size() - 1 : 0) << ", lag "
        << ingested.at("lag").get<int>() << "\n";
    txt << "oracle floor: rmse " << format_double(floor_end) << " at p=1, best "
        << format_double(floor_min) << "\n";
    txt << "validation F1 (classifier, p, f1):\n";
    for (std::size_t r = 1; r < f1_rows.size(); ++r)
        txt << "  " << f1_rows[r][1] << "  p=" << f1_rows[r][2] << "  " << f1_rows[r][3] << "\n";
    txt << "test average rmse by method:\n";
    for (const auto& [method, values] : rmse_by_method)
        txt << "  " << method << "  " << format_double(dataset_average(values)) << "\n";
    txt << "rank order (avg rank, group ids):\n";
    for (std::size_t r = 1; r < cd_rows.size(); ++r)
        txt << "  " << cd_rows[r][0] << "  " << cd_rows[r][1] << "  "
            << (cd_rows[r].size() > 2 ? cd_rows[r][2] : "") << "\n";
    stage.add(kSummaryTxt, txt.str());

    stage.commit();
}

}  // namespace aalf
