#pragma once

#include <json.hpp>

#include "gvnn/bench.hpp"
#include "gvnn/theory.hpp"
#include "gvnn/train.hpp"

// JSON/CSV renderings of the report structs. Timing-only values live in
// designated fields/columns ("wall_seconds", "median_seconds"); everything
// else is deterministic for a fixed seed.

namespace gvnn {

inline nlohmann::json theory_report_to_json(const SpectralBoundReport& r) {
    nlohmann::json j;
    j["claim_id"] = theory_claim_name(r.claim);
    j["n"] = r.n;
    j["trial"] = r.trial;
    j["seed"] = r.seed;
    j["lhs"] = r.lhs;
    j["rhs"] = r.rhs;
    j["margin"] = r.margin;
    j["passed"] = r.passed;
    if (r.degenerate) j["degenerate"] = true;
    if (!r.witness.empty()) j["witness"] = r.witness;
    return j;
}

inline nlohmann::json theory_reports_to_json(const std::vector<SpectralBoundReport>& reports) {
    nlohmann::json arr = nlohmann::json::array();
    for (const auto& r : reports) arr.push_back(theory_report_to_json(r));
    return arr;
}

inline nlohmann::json train_config_to_json(const TrainConfig& c) {
    return {{"lr", c.lr},
            {"epochs", c.epochs},
            {"batch", c.batch},
            {"seed", c.seed},
            {"weight_decay", c.weight_decay},
            {"horizon", c.horizon},
            {"window", c.window},
            {"clip_norm", c.clip_norm},
            {"freeze_b", c.freeze_b}};
}

inline nlohmann::json train_report_to_json(const TrainReport& r) {
    nlohmann::json j;
    j["best_epoch"] = r.best_epoch;
    j["best_val_mse"] = r.best_val;
    j["test_mse"] = r.test_mse;
    j["epochs_run"] = r.train_loss.size();
    j["final_train_mse"] = r.train_loss.empty() ? 0.0 : r.train_loss.back();
    j["wall_seconds"] = r.wall_seconds;  // timing-only field
    j["config"] = train_config_to_json(r.config);
    j["units"] = "normalized (per-sample z-score; targets scaled by last input column stats)";
    return j;
}

inline std::string train_curve_csv(const TrainReport& r) {
    std::string out = "epoch,train_loss,val_loss\n";
    for (std::size_t e = 0; e < r.train_loss.size(); ++e) {
        out += std::to_string(e) + "," + format_double(r.train_loss[e]) + "," +
               format_double(r.val_loss[e]) + "\n";
    }
    return out;
}

inline std::string bench_csv(const BenchSummary& s) {
    std::string out = "method,B,N,T,median_seconds,est_bytes,exponent,skipped\n";
    for (const auto& r : s.results) {
        double expo = 0.0;
        switch (r.method) {
            case BenchMethod::NaiveKron: expo = s.naive_exponent; break;
            case BenchMethod::BatchedLowRank: expo = s.batched_exponent; break;
            case BenchMethod::BatchedLowRankParallel: expo = s.parallel_exponent; break;
        }
        out += std::string(bench_method_name(r.method)) + "," + std::to_string(r.batch) + "," +
               std::to_string(r.nodes) + "," + std::to_string(r.time_len) + "," +
               format_double(r.median_seconds) + "," + std::to_string(r.est_bytes) + "," +
               format_double(expo) + "," + (r.skipped ? "1" : "0") + "\n";
    }
    return out;
}

// ---- minimal SVG renderings --------------------------------------------------

/// Grayscale heatmap of a matrix (used for transform coefficients).
inline std::string matrix_heatmap_svg(const Matrix& m, std::size_t cell = 12) {
    double lo = m.data()[0], hi = m.data()[0];
    for (std::size_t i = 0; i < m.size(); ++i) {
        lo = std::min(lo, m.data()[i]);
        hi = std::max(hi, m.data()[i]);
    }
    const double span = hi > lo ? hi - lo : 1.0;
    std::string svg = "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" +
                      std::to_string(m.cols() * cell) + "\" height=\"" +
                      std::to_string(m.rows() * cell) + "\">\n";
    for (std::size_t i = 0; i < m.rows(); ++i) {
        for (std::size_t j = 0; j < m.cols(); ++j) {
            const int level = static_cast<int>(255.0 * (m(i, j) - lo) / span);
            svg += "<rect x=\"" + std::to_string(j * cell) + "\" y=\"" + std::to_string(i * cell) +
                   "\" width=\"" + std::to_string(cell) + "\" height=\"" + std::to_string(cell) +
                   "\" fill=\"rgb(" + std::to_string(level) + "," + std::to_string(level) + "," +
                   std::to_string(255 - level) + ")\"/>\n";
        }
    }
    svg += "</svg>\n";
    return svg;
}

/// Log-log scatter of median time vs T, one polyline per method.
inline std::string bench_loglog_svg(const BenchSummary& s) {
    constexpr int w = 480, h = 360, pad = 40;
    double lx0 = 1e300, lx1 = -1e300, ly0 = 1e300, ly1 = -1e300;
    for (const auto& r : s.results) {
        if (r.skipped || r.median_seconds <= 0.0) continue;
        lx0 = std::min(lx0, std::log10(static_cast<double>(r.time_len)));
        lx1 = std::max(lx1, std::log10(static_cast<double>(r.time_len)));
        ly0 = std::min(ly0, std::log10(r.median_seconds));
        ly1 = std::max(ly1, std::log10(r.median_seconds));
    }
    if (lx1 <= lx0) lx1 = lx0 + 1;
    if (ly1 <= ly0) ly1 = ly0 + 1;
    const auto px = [&](double lx) { return pad + (lx - lx0) / (lx1 - lx0) * (w - 2 * pad); };
    const auto py = [&](double ly) { return h - pad - (ly - ly0) / (ly1 - ly0) * (h - 2 * pad); };

    std::string svg = "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" + std::to_string(w) +
                      "\" height=\"" + std::to_string(h) + "\">\n";
    svg += "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
    const char* colors[] = {"#c0392b", "#2980b9", "#27ae60"};
    for (const BenchMethod m : {BenchMethod::NaiveKron, BenchMethod::BatchedLowRank,
                                BenchMethod::BatchedLowRankParallel}) {
        std::string points;
        for (const auto& r : s.results) {
            if (r.method != m || r.skipped || r.median_seconds <= 0.0) continue;
            points += std::to_string(px(std::log10(static_cast<double>(r.time_len)))) + "," +
                      std::to_string(py(std::log10(r.median_seconds))) + " ";
        }
        if (points.empty()) continue;
        svg += "<polyline fill=\"none\" stroke=\"" +
               std::string(colors[static_cast<int>(m)]) + "\" stroke-width=\"2\" points=\"" +
               points + "\"/>\n";
    }
    svg += "</svg>\n";
    return svg;
}

}  // namespace gvnn
