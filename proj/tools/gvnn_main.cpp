// gvnn: command-line front end for the graph-variate toolkit.
//
// Subcommands: generate (chaotic-map signals), train (forecasting pipeline),
// eval (checkpoint evaluation), gvft (transform coefficients), verify
// (theorem suite), bench (complexity trend). Every command resolves its
// configuration (flags > config file > defaults), writes a manifest first,
// and embeds the manifest digest into every output artifact.
//
// Exit codes: 0 success, 2 config error, 3 data error, 4 numeric failure,
// 5 verification failure.

#include <CLI11.hpp>
#include <json.hpp>

#include <cstdio>
#include <filesystem>
#include <iostream>
#include <string>
#include <vector>

#include "gvnn/bench.hpp"
#include "gvnn/checkpoint.hpp"
#include "gvnn/data.hpp"
#include "gvnn/gvft.hpp"
#include "gvnn/io.hpp"
#include "gvnn/model.hpp"
#include "gvnn/reporting.hpp"
#include "gvnn/theory.hpp"
#include "gvnn/train.hpp"

namespace fs = std::filesystem;
using nlohmann::json;
using namespace gvnn;

namespace {

constexpr const char* kToolVersion = "1.0.0";
constexpr const char* kFormatTag = "#gvnn-kit v1";

// ---------------------------------------------------------------------------
// Manifest
// ---------------------------------------------------------------------------

struct Manifest {
    json body;
    std::string digest;
};

Manifest write_manifest(const fs::path& out_dir, const std::string& command, const json& config,
                        std::uint64_t seed, const std::vector<std::string>& input_paths,
                        const std::vector<std::string>& output_names) {
    json m;
    m["command"] = command;
    m["config"] = config;
    m["seed"] = seed;
    m["version"] = kToolVersion;
    json inputs = json::object();
    for (const auto& p : input_paths) inputs[p] = fnv1a64_hex(read_file(p));
    m["inputs"] = inputs;
    json outs = json::array();
    for (const auto& o : output_names) outs.push_back(o);
    m["outputs"] = outs;

    const std::string body = m.dump(2) + "\n";
    fs::create_directories(out_dir);
    write_file((out_dir / "manifest.json").string(), body);
    return {m, fnv1a64_hex(body)};
}

std::string csv_tag_line(const Manifest& man) {
    return std::string(kFormatTag) + " manifest=" + man.digest;
}

void stamp_json(json& j, const Manifest& man) {
    j["format_tag"] = kFormatTag;
    j["manifest_digest"] = man.digest;
}

// ---------------------------------------------------------------------------
// Flag parsing helpers
// ---------------------------------------------------------------------------

NodeFunctionKind parse_one_node_function(const std::string& spec) {
    if (spec == "lde") return NodeFunctionKind::lde();
    if (spec == "ic") return NodeFunctionKind::ic(true);
    if (spec == "ic-nodiag") return NodeFunctionKind::ic(false);
    if (spec.rfind("combo:", 0) == 0) {
        const std::string rest = spec.substr(6);
        const std::size_t comma = rest.find(',');
        if (comma == std::string::npos) {
            throw ConfigError("combo node function needs two weights: combo:a,b");
        }
        try {
            const double alpha = std::stod(rest.substr(0, comma));
            const double beta = std::stod(rest.substr(comma + 1));
            return NodeFunctionKind::combo(alpha, beta);
        } catch (const std::exception&) {
            throw ConfigError("cannot parse combo weights in '" + spec + "'");
        }
    }
    throw ConfigError("unknown node function '" + spec +
                      "' (expected lde | ic | ic-nodiag | combo:a,b)");
}

/// Semicolon-separated per-layer list; a single entry repeats across layers.
std::vector<NodeFunctionKind> parse_node_functions(const std::string& spec, std::size_t layers) {
    std::vector<NodeFunctionKind> kinds;
    std::size_t pos = 0;
    while (pos <= spec.size()) {
        const std::size_t semi = spec.find(';', pos);
        kinds.push_back(parse_one_node_function(
            spec.substr(pos, semi == std::string::npos ? std::string::npos : semi - pos)));
        if (semi == std::string::npos) break;
        pos = semi + 1;
    }
    if (kinds.size() == 1 && layers > 1) kinds.assign(layers, kinds.front());
    if (layers != 0 && kinds.size() != layers) {
        throw ConfigError("--node-fn lists " + std::to_string(kinds.size()) +
                          " functions for " + std::to_string(layers) + " layers");
    }
    return kinds;
}

struct SupportParamSpec {
    SupportParam param = SupportParam::DenseTrainable;
    std::size_t rank = 0;  // 0 -> default max(1, N/8)
};

SupportParamSpec parse_support_param(const std::string& spec) {
    SupportParamSpec out;
    std::string head = spec;
    const std::size_t colon = spec.find(':');
    if (colon != std::string::npos) {
        head = spec.substr(0, colon);
        try {
            out.rank = std::stoul(spec.substr(colon + 1));
        } catch (const std::exception&) {
            throw ConfigError("cannot parse rank in '" + spec + "'");
        }
    }
    if (head == "fixed") out.param = SupportParam::Fixed;
    else if (head == "dense") out.param = SupportParam::DenseTrainable;
    else if (head == "lora") out.param = SupportParam::AdditiveLowRank;
    else if (head == "hira") out.param = SupportParam::HadamardLowRank;
    else
        throw ConfigError("unknown support parameterization '" + spec +
                          "' (expected fixed | dense | lora[:r] | hira[:r])");
    return out;
}

std::vector<std::size_t> parse_size_list(const std::string& spec) {
    std::vector<std::size_t> out;
    std::size_t pos = 0;
    while (pos <= spec.size()) {
        const std::size_t comma = spec.find(',', pos);
        const std::string cell =
            spec.substr(pos, comma == std::string::npos ? std::string::npos : comma - pos);
        try {
            out.push_back(std::stoul(cell));
        } catch (const std::exception&) {
            throw ConfigError("cannot parse size list entry '" + cell + "'");
        }
        if (comma == std::string::npos) break;
        pos = comma + 1;
    }
    return out;
}

json map_config_to_json(const MapConfig& c) {
    json j;
    j["kind"] = map_kind_name(c.kind);
    j["node_count"] = c.node_count;
    j["length"] = c.length;
    j["seed"] = c.seed;
    switch (c.kind) {
        case MapKind::CoupledLorenz:
            j["sigma"] = c.lorenz_sigma;
            j["rho"] = c.lorenz_rho;
            j["beta"] = c.lorenz_beta;
            j["coupling"] = c.coupling;
            j["dt"] = c.dt;
            j["subsample"] = c.subsample;
            j["transient"] = c.transient;
            break;
        case MapKind::Hopfield:
            j["gain"] = c.gain;
            j["transient"] = c.hopfield_transient;
            break;
        case MapKind::MacArthur:
            j["r_lo"] = c.r_lo;
            j["r_hi"] = c.r_hi;
            j["comp_hi"] = c.comp_hi;
            j["transient"] = c.macarthur_transient;
            break;
    }
    return j;
}

// ---------------------------------------------------------------------------
// Shared data-source options (train / eval / gvft)
// ---------------------------------------------------------------------------

struct DataSourceOpts {
    std::string data_path;
    std::string map_name;
    std::size_t nodes = 0;   // 0 -> map default
    std::size_t length = 0;  // 0 -> map default
    bool transpose = false;

    void attach(CLI::App* cmd) {
        cmd->add_option("--data", data_path, "input signal CSV (rows = nodes)");
        cmd->add_option("--map", map_name, "generate input from a chaotic map")
            ->check(CLI::IsMember({"lorenz", "hopfield", "macarthur"}));
        cmd->add_option("--nodes", nodes, "generator node count (map source only)");
        cmd->add_option("--length", length, "generator sample count (map source only)");
        cmd->add_flag("--transpose", transpose, "CSV is time-major (columns = nodes)");
    }

    /// Resolve the signal. Map generation derives its stream from the global
    /// seed so one --seed pins the whole pipeline.
    MultivariateSignal load(std::uint64_t global_seed, json& provenance,
                            std::vector<std::string>& input_paths) const {
        if (data_path.empty() == map_name.empty()) {
            throw ConfigError("exactly one of --data or --map is required");
        }
        if (!data_path.empty()) {
            provenance["source"] = "csv";
            provenance["path"] = data_path;
            input_paths.push_back(data_path);
            return load_csv_signal(data_path, transpose);
        }
        MapConfig cfg = MapConfig::defaults(map_kind_from_name(map_name));
        if (nodes) cfg.node_count = nodes;
        if (length) cfg.length = length;
        cfg.seed = Rng::derive(global_seed, "data");
        provenance["source"] = "map";
        provenance["map_config"] = map_config_to_json(cfg);
        return simulate(cfg);
    }
};

/// Correlation support over the leading columns only (the region covered by
/// training windows) so the support never sees validation or test samples.
Matrix support_base_from(const std::string& spec, const MultivariateSignal& sig,
                         std::size_t train_cols, std::vector<std::string>& input_paths) {
    if (spec == "corr" || spec == "abs-corr") {
        const std::size_t cols = train_cols == 0 ? sig.length() : train_cols;
        Matrix sub(sig.node_count(), cols);
        for (std::size_t i = 0; i < sig.node_count(); ++i)
            for (std::size_t t = 0; t < cols; ++t) sub(i, t) = sig.values(i, t);
        return build_support_correlation(MultivariateSignal(std::move(sub)), spec == "abs-corr")
            .base;
    }
    if (spec.rfind("file:", 0) == 0) {
        const std::string path = spec.substr(5);
        input_paths.push_back(path);
        Matrix w = load_csv_matrix(path);
        if (w.rows() != sig.node_count() || w.cols() != sig.node_count()) {
            throw DataError("support file is " + std::to_string(w.rows()) + "x" +
                            std::to_string(w.cols()) + ", signal has " +
                            std::to_string(sig.node_count()) + " nodes");
        }
        return symmetrize(w);
    }
    throw ConfigError("unknown support '" + spec + "' (expected corr | abs-corr | file:PATH)");
}

SupportMatrix wrap_support(Matrix base, const SupportParamSpec& spec, Rng& rng) {
    const std::size_t n = base.rows();
    const std::size_t rank = spec.rank ? spec.rank : SupportMatrix::default_rank(n);
    switch (spec.param) {
        case SupportParam::Fixed: return SupportMatrix::fixed(std::move(base));
        case SupportParam::DenseTrainable: return SupportMatrix::dense_trainable(std::move(base));
        case SupportParam::AdditiveLowRank:
            return SupportMatrix::additive_low_rank(std::move(base), rank, rng);
        case SupportParam::HadamardLowRank:
            return SupportMatrix::hadamard_low_rank(std::move(base), rank, rng);
    }
    throw ConfigError("unreachable support parameterization");
}

// ---------------------------------------------------------------------------
// generate
// ---------------------------------------------------------------------------

struct GenerateOpts {
    std::string map_name = "hopfield";
    std::string out_dir;
    std::size_t nodes = 0;
    std::size_t length = 0;
    std::uint64_t seed = 124;
    double coupling = -1.0;
    double gain = -1.0;
};

int cmd_generate(const GenerateOpts& o) {
    MapConfig cfg = MapConfig::defaults(map_kind_from_name(o.map_name));
    if (o.nodes) cfg.node_count = o.nodes;
    if (o.length) cfg.length = o.length;
    if (o.coupling >= 0.0) cfg.coupling = o.coupling;
    if (o.gain >= 0.0) cfg.gain = o.gain;
    cfg.seed = o.seed;

    const json cfg_json = map_config_to_json(cfg);
    const Manifest man = write_manifest(o.out_dir, "generate", cfg_json, o.seed, {},
                                        {"signal.csv", "config.json"});

    const MultivariateSignal sig = simulate(cfg);
    write_csv_signal((fs::path(o.out_dir) / "signal.csv").string(), sig, {csv_tag_line(man)});
    json sidecar = cfg_json;
    stamp_json(sidecar, man);
    write_file((fs::path(o.out_dir) / "config.json").string(), sidecar.dump(2) + "\n");
    std::printf("generate: wrote %zux%zu signal to %s\n", sig.node_count(), sig.length(),
                o.out_dir.c_str());
    return 0;
}

// ---------------------------------------------------------------------------
// train
// ---------------------------------------------------------------------------

struct TrainOpts {
    DataSourceOpts source;
    std::string out_dir;
    std::size_t window = 3;
    std::size_t horizon = 1;
    std::size_t stride = 1;
    std::string node_fn = "lde;ic";
    std::size_t layers = 0;  // 0 -> follow node_fn list
    // abs-corr keeps the masked slices entrywise nonnegative, so renormalized
    // degrees stay >= 1 instead of hitting the eps clamp and blowing up the
    // scaling; signed corr remains available.
    std::string support = "abs-corr";
    std::string support_param = "dense";
    std::string renorm = "on";
    std::string zave = "on";
    std::size_t hidden = 128;
    double lr = 1e-4;
    std::size_t epochs = 500;
    std::size_t batch = 128;
    std::uint64_t seed = 124;
    double weight_decay = 0.0;
    double clip_norm = 0.0;
    bool freeze_b = false;
};

json train_opts_to_json(const TrainOpts& o) {
    json j;
    j["window"] = o.window;
    j["horizon"] = o.horizon;
    j["stride"] = o.stride;
    j["node_fn"] = o.node_fn;
    j["support"] = o.support;
    j["support_param"] = o.support_param;
    j["renormalize"] = o.renorm;
    j["zave"] = o.zave;
    j["hidden"] = o.hidden;
    j["lr"] = o.lr;
    j["epochs"] = o.epochs;
    j["batch"] = o.batch;
    j["seed"] = o.seed;
    j["weight_decay"] = o.weight_decay;
    j["clip_norm"] = o.clip_norm;
    j["freeze_b"] = o.freeze_b;
    return j;
}

int cmd_train(const TrainOpts& o) {
    json provenance;
    std::vector<std::string> input_paths;
    const MultivariateSignal sig = o.source.load(o.seed, provenance, input_paths);

    const auto kinds = parse_node_functions(o.node_fn, o.layers);
    const auto sp = parse_support_param(o.support_param);

    json config = train_opts_to_json(o);
    config["data"] = provenance;
    const Manifest man = write_manifest(o.out_dir, "train", config, o.seed, input_paths,
                                        {"report.json", "curve.csv", "checkpoint.json"});

    const WindowedDataset ds = make_windows(sig, o.window, o.horizon, o.stride);
    const auto train_idx = ds.indices(Split::Train);
    if (train_idx.empty()) throw DataError("no training windows");
    const std::size_t train_cols = train_idx.back() * o.stride + o.window;

    Rng model_rng(Rng::derive(o.seed, "model"));
    Matrix base = support_base_from(o.support, sig, train_cols, input_paths);
    const SupportMatrix support = wrap_support(std::move(base), sp, model_rng);

    GvnnModel model = make_model(sig.node_count(), o.window, kinds, support, o.renorm == "on",
                                 o.zave == "on", o.hidden, model_rng);

    TrainConfig cfg;
    cfg.lr = o.lr;
    cfg.epochs = o.epochs;
    cfg.batch = o.batch;
    cfg.seed = Rng::derive(o.seed, "train");
    cfg.weight_decay = o.weight_decay;
    cfg.horizon = o.horizon;
    cfg.window = o.window;
    cfg.clip_norm = o.clip_norm;
    cfg.freeze_b = o.freeze_b;

    const TrainReport report = train_forecaster(ds, model, cfg);

    json rj = train_report_to_json(report);
    rj["persistence_test_mse"] = persistence_mse(ds, Split::Test);
    rj["data"] = provenance;
    stamp_json(rj, man);
    write_file((fs::path(o.out_dir) / "report.json").string(), rj.dump(2) + "\n");
    write_file((fs::path(o.out_dir) / "curve.csv").string(),
               csv_tag_line(man) + "\n" + train_curve_csv(report));

    json extra;
    extra["seed"] = o.seed;
    extra["horizon"] = o.horizon;
    extra["stride"] = o.stride;
    extra["data"] = provenance;
    extra["manifest_digest"] = man.digest;
    save_checkpoint((fs::path(o.out_dir) / "checkpoint.json").string(), model, extra);

    std::printf("train: best val %.6g (epoch %zu), test MSE %.6g -> %s\n", report.best_val,
                report.best_epoch, report.test_mse, o.out_dir.c_str());
    return 0;
}

// ---------------------------------------------------------------------------
// eval
// ---------------------------------------------------------------------------

struct EvalOpts {
    std::string checkpoint;
    DataSourceOpts source;
    std::string split = "test";
    std::string out_dir;
    std::uint64_t seed = 124;
};

int cmd_eval(const EvalOpts& o) {
    const LoadedCheckpoint ckpt = load_checkpoint(o.checkpoint);
    json provenance;
    std::vector<std::string> input_paths{o.checkpoint};
    const MultivariateSignal sig = o.source.load(o.seed, provenance, input_paths);

    json config;
    config["checkpoint"] = o.checkpoint;
    config["split"] = o.split;
    config["data"] = provenance;
    const Manifest man =
        write_manifest(o.out_dir, "eval", config, o.seed, input_paths, {"metrics.json"});

    const std::size_t horizon = ckpt.full.value("horizon", std::size_t{1});
    const std::size_t stride = ckpt.full.value("stride", std::size_t{1});
    const WindowedDataset ds = make_windows(sig, ckpt.model.window, horizon, stride);

    Split split = Split::Test;
    if (o.split == "train") split = Split::Train;
    else if (o.split == "val") split = Split::Val;
    else if (o.split != "test") throw ConfigError("unknown split '" + o.split + "'");

    json metrics;
    metrics["split"] = o.split;
    metrics["mse"] = evaluate_mse(ds, split, ckpt.model);
    metrics["persistence_mse"] = persistence_mse(ds, split);
    metrics["windows"] = ds.indices(split).size();
    stamp_json(metrics, man);
    write_file((fs::path(o.out_dir) / "metrics.json").string(), metrics.dump(2) + "\n");
    std::printf("eval: %s MSE %.6g over %zu windows -> %s\n", o.split.c_str(),
                metrics["mse"].get<double>(), ds.indices(split).size(), o.out_dir.c_str());
    return 0;
}

// ---------------------------------------------------------------------------
// gvft
// ---------------------------------------------------------------------------

struct GvftOpts {
    DataSourceOpts source;
    std::string node_fn = "lde";
    std::string support = "corr";
    std::string out_dir;
    std::uint64_t seed = 124;
    bool svg = false;
};

int cmd_gvft(const GvftOpts& o) {
    json provenance;
    std::vector<std::string> input_paths;
    const MultivariateSignal sig = o.source.load(o.seed, provenance, input_paths);
    const NodeFunctionKind kind = parse_one_node_function(o.node_fn);
    Matrix base = support_base_from(o.support, sig, 0, input_paths);

    json config;
    config["node_fn"] = o.node_fn;
    config["support"] = o.support;
    config["svg"] = o.svg;
    config["data"] = provenance;
    std::vector<std::string> outputs{"coefficients.csv"};
    if (o.svg) outputs.push_back("gvft.svg");
    const Manifest man = write_manifest(o.out_dir, "gvft", config, o.seed, input_paths, outputs);

    const GvftResult res = gvft(sig, SupportMatrix::fixed(std::move(base)), kind);
    write_csv_matrix((fs::path(o.out_dir) / "coefficients.csv").string(), res.coefficients,
                     {csv_tag_line(man)});
    if (o.svg) {
        write_file((fs::path(o.out_dir) / "gvft.svg").string(),
                   matrix_heatmap_svg(res.coefficients));
    }
    std::printf("gvft: wrote %zux%zu coefficients -> %s\n", res.node_count(), res.length(),
                o.out_dir.c_str());
    return 0;
}

// ---------------------------------------------------------------------------
// verify
// ---------------------------------------------------------------------------

struct VerifyOpts {
    std::size_t trials = 100;
    std::uint64_t seed = 124;
    std::string out_dir;
};

int cmd_verify(const VerifyOpts& o) {
    const auto reports = run_theory_suite(o.seed, o.trials);
    std::size_t failures = 0;
    for (const auto& r : reports)
        if (!r.passed) ++failures;

    if (!o.out_dir.empty()) {
        json config;
        config["trials"] = o.trials;
        const Manifest man =
            write_manifest(o.out_dir, "verify", config, o.seed, {}, {"theory.json"});
        json out;
        out["reports"] = theory_reports_to_json(reports);
        out["total"] = reports.size();
        out["failures"] = failures;
        stamp_json(out, man);
        write_file((fs::path(o.out_dir) / "theory.json").string(), out.dump(2) + "\n");
    }
    std::printf("verify: %zu checks, %zu failures\n", reports.size(), failures);
    return failures == 0 ? 0 : 5;
}

// ---------------------------------------------------------------------------
// bench
// ---------------------------------------------------------------------------

struct BenchOpts {
    std::size_t batch = 8;
    std::size_t nodes = 16;
    std::string t_list = "64,128,256,512";
    std::size_t repeats = 7;
    std::uint64_t seed = 124;
    bool parallel = false;
    bool svg = false;
    std::string out_dir;
};

int cmd_bench(const BenchOpts& o) {
    BenchConfig cfg;
    cfg.batch = o.batch;
    cfg.nodes = o.nodes;
    cfg.t_list = parse_size_list(o.t_list);
    cfg.repeats = o.repeats;
    cfg.seed = o.seed;
    cfg.parallel = o.parallel;

    json config;
    config["batch"] = o.batch;
    config["nodes"] = o.nodes;
    config["t_list"] = o.t_list;
    config["repeats"] = o.repeats;
    config["parallel"] = o.parallel;
    std::vector<std::string> outputs{"bench.csv"};
    if (o.svg) outputs.push_back("bench.svg");
    const Manifest man = write_manifest(o.out_dir, "bench", config, o.seed, {}, outputs);

    const BenchSummary summary = run_benchmark(cfg);
    write_file((fs::path(o.out_dir) / "bench.csv").string(),
               csv_tag_line(man) + "\n" + bench_csv(summary));
    if (o.svg) {
        write_file((fs::path(o.out_dir) / "bench.svg").string(), bench_loglog_svg(summary));
    }
    std::printf("bench: batched exponent %.3f, naive exponent %.3f -> %s\n",
                summary.batched_exponent, summary.naive_exponent, o.out_dir.c_str());
    return 0;
}

}  // namespace

// ---------------------------------------------------------------------------

int main(int argc, char** argv) {
    CLI::App app{"graph-variate signal toolkit"};
    app.require_subcommand(1);
    app.set_config("--config", "", "key=value config file (flags take precedence)");

    GenerateOpts gen;
    auto* cgen = app.add_subcommand("generate", "simulate a chaotic map and write signal CSV");
    cgen->add_option("--map", gen.map_name, "map kind")
        ->check(CLI::IsMember({"lorenz", "hopfield", "macarthur"}));
    cgen->add_option("--out", gen.out_dir, "output directory")->required();
    cgen->add_option("--nodes", gen.nodes, "node count (map default if omitted)");
    cgen->add_option("--length", gen.length, "sample count (map default if omitted)");
    cgen->add_option("--seed", gen.seed, "generator seed");
    cgen->add_option("--coupling", gen.coupling, "Lorenz ring coupling strength");
    cgen->add_option("--gain", gen.gain, "Hopfield gain");

    TrainOpts tr;
    auto* ctr = app.add_subcommand("train", "train a forecaster end to end");
    tr.source.attach(ctr);
    ctr->add_option("--out", tr.out_dir, "output directory")->required();
    ctr->add_option("--window", tr.window, "input window length T_w");
    ctr->add_option("--horizon", tr.horizon, "forecast horizon H");
    ctr->add_option("--stride", tr.stride, "window stride");
    ctr->add_option("--node-fn", tr.node_fn,
                    "per-layer node functions, ';'-separated (lde | ic | ic-nodiag | combo:a,b)");
    ctr->add_option("--layers", tr.layers, "layer count (defaults to the --node-fn list length)");
    ctr->add_option("--support", tr.support, "stable support: corr | abs-corr | file:PATH");
    ctr->add_option("--support-param", tr.support_param,
                    "support parameterization: fixed | dense | lora[:r] | hira[:r]");
    ctr->add_option("--renorm", tr.renorm, "slice renormalization")
        ->check(CLI::IsMember({"on", "off"}));
    ctr->add_option("--zave", tr.zave, "per-sample z-scoring inside layers")
        ->check(CLI::IsMember({"on", "off"}));
    ctr->add_option("--hidden", tr.hidden, "readout hidden width");
    ctr->add_option("--lr", tr.lr, "learning rate");
    ctr->add_option("--epochs", tr.epochs, "training epochs");
    ctr->add_option("--batch", tr.batch, "batch size");
    ctr->add_option("--seed", tr.seed, "master seed (data/model/train streams derive from it)");
    ctr->add_option("--weight-decay", tr.weight_decay, "L2 coefficient added to gradients");
    ctr->add_option("--clip-norm", tr.clip_norm, "global gradient-norm clip (0 = off)");
    ctr->add_flag("--freeze-b", tr.freeze_b, "keep the graph tap b at its initial value");

    EvalOpts ev;
    auto* cev = app.add_subcommand("eval", "evaluate a checkpoint on a data split");
    cev->add_option("--checkpoint", ev.checkpoint, "checkpoint.json path")->required();
    ev.source.attach(cev);
    cev->add_option("--split", ev.split, "train | val | test");
    cev->add_option("--out", ev.out_dir, "output directory")->required();
    cev->add_option("--seed", ev.seed, "seed for map-sourced data regeneration");

    GvftOpts gf;
    auto* cgf = app.add_subcommand("gvft", "write transform coefficients for a signal");
    gf.source.attach(cgf);
    cgf->add_option("--node-fn", gf.node_fn, "node function");
    cgf->add_option("--support", gf.support, "stable support: corr | abs-corr | file:PATH");
    cgf->add_option("--out", gf.out_dir, "output directory")->required();
    cgf->add_option("--seed", gf.seed, "seed for map-sourced data");
    cgf->add_flag("--svg", gf.svg, "also write a heatmap SVG");

    VerifyOpts vf;
    auto* cvf = app.add_subcommand("verify", "run the spectral-claims suite");
    cvf->add_option("--trials", vf.trials, "randomized trials per claim and size");
    cvf->add_option("--seed", vf.seed, "suite seed");
    cvf->add_option("--out", vf.out_dir, "directory for theory.json (optional)");

    BenchOpts bn;
    auto* cbn = app.add_subcommand("bench", "time batched vs naive Kronecker convolution");
    cbn->add_option("--batch,-B", bn.batch, "batch size");
    cbn->add_option("--nodes,-N", bn.nodes, "node count");
    cbn->add_option("--t-list", bn.t_list, "comma-separated sequence lengths");
    cbn->add_option("--repeats", bn.repeats, "timed repeats per point (median reported)");
    cbn->add_option("--seed", bn.seed, "input seed");
    cbn->add_flag("--parallel", bn.parallel, "also time a threads-over-batch batched variant");
    cbn->add_flag("--svg", bn.svg, "also write a log-log SVG plot");
    cbn->add_option("--out", bn.out_dir, "output directory")->required();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 2;
    }

    try {
        if (cgen->parsed()) return cmd_generate(gen);
        if (ctr->parsed()) return cmd_train(tr);
        if (cev->parsed()) return cmd_eval(ev);
        if (cgf->parsed()) return cmd_gvft(gf);
        if (cvf->parsed()) return cmd_verify(vf);
        if (cbn->parsed()) return cmd_bench(bn);
    } catch (const ConfigError& e) {
        std::fprintf(stderr, "config error: %s\n", e.what());
        return 2;
    } catch (const DataError& e) {
        std::fprintf(stderr, "data error: %s\n", e.what());
        return 3;
    } catch (const NumericError& e) {
        std::fprintf(stderr, "numeric failure: %s\n", e.what());
        return 4;
    } catch (const std::exception& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 4;
    }
    return 2;
}
