#pragma once

#include <cstdint>
#include <cstring>
#include <string>
#include <vector>

#include <json.hpp>

#include "gvnn/io.hpp"
#include "gvnn/model.hpp"

// Versioned JSON checkpoint holding every parameter array, shape, config
// field and the originating seed. Doubles are stored as 16-hex-digit IEEE-754
// bit patterns, so a save/load round trip is bit-exact by construction.

namespace gvnn {

constexpr const char* kCheckpointFormat = "gvnn-kit-checkpoint";
constexpr int kCheckpointVersion = 1;

// ---- bit-exact double <-> hex ----------------------------------------------

inline std::string encode_doubles(std::span<const double> values) {
    static const char* digits = "0123456789abcdef";
    std::string out;
    out.reserve(values.size() * 16);
    for (const double v : values) {
        std::uint64_t bits = 0;
        std::memcpy(&bits, &v, sizeof bits);
        for (int shift = 60; shift >= 0; shift -= 4) out.push_back(digits[(bits >> shift) & 0xF]);
    }
    return out;
}

inline std::vector<double> decode_doubles(const std::string& hex) {
    if (hex.size() % 16 != 0) throw DataError("checkpoint: malformed hex array");
    std::vector<double> out(hex.size() / 16);
    for (std::size_t k = 0; k < out.size(); ++k) {
        std::uint64_t bits = 0;
        for (std::size_t i = 0; i < 16; ++i) {
            const char c = hex[k * 16 + i];
            std::uint64_t nibble = 0;
            if (c >= '0' && c <= '9') nibble = static_cast<std::uint64_t>(c - '0');
            else if (c >= 'a' && c <= 'f') nibble = static_cast<std::uint64_t>(c - 'a' + 10);
            else throw DataError("checkpoint: invalid hex digit");
            bits = (bits << 4) | nibble;
        }
        std::memcpy(&out[k], &bits, sizeof(double));
    }
    return out;
}

inline nlohmann::json matrix_to_json(const Matrix& m) {
    return {{"rows", m.rows()},
            {"cols", m.cols()},
            {"data", encode_doubles({m.data(), m.size()})}};
}

inline Matrix matrix_from_json(const nlohmann::json& j) {
    const auto rows = j.at("rows").get<std::size_t>();
    const auto cols = j.at("cols").get<std::size_t>();
    auto data = decode_doubles(j.at("data").get<std::string>());
    if (data.size() != rows * cols) throw DataError("checkpoint: matrix size mismatch");
    return Matrix(rows, cols, std::move(data));
}

inline nlohmann::json vector_to_json(std::span<const double> v) {
    return {{"len", v.size()}, {"data", encode_doubles(v)}};
}

inline std::vector<double> vector_from_json(const nlohmann::json& j) {
    auto data = decode_doubles(j.at("data").get<std::string>());
    if (data.size() != j.at("len").get<std::size_t>())
        throw DataError("checkpoint: vector size mismatch");
    return data;
}

// ---- model <-> json ---------------------------------------------------------

inline nlohmann::json node_function_to_json(const NodeFunctionKind& k) {
    nlohmann::json j;
    switch (k.type) {
        case NodeFunctionType::IC: j["type"] = "ic"; break;
        case NodeFunctionType::LDE: j["type"] = "lde"; break;
        case NodeFunctionType::Combo: j["type"] = "combo"; break;
    }
    j["alpha"] = k.alpha;
    j["beta"] = k.beta;
    j["keep_diagonal"] = k.keep_diagonal;
    return j;
}

inline NodeFunctionKind node_function_from_json(const nlohmann::json& j) {
    NodeFunctionKind k;
    const std::string type = j.at("type").get<std::string>();
    if (type == "ic") k.type = NodeFunctionType::IC;
    else if (type == "lde") k.type = NodeFunctionType::LDE;
    else if (type == "combo") k.type = NodeFunctionType::Combo;
    else throw DataError("checkpoint: unknown node function type " + type);
    k.alpha = j.at("alpha").get<double>();
    k.beta = j.at("beta").get<double>();
    k.keep_diagonal = j.at("keep_diagonal").get<bool>();
    return k;
}

inline nlohmann::json support_to_json(const SupportMatrix& s) {
    nlohmann::json j;
    j["param"] = support_param_name(s.param);
    j["base"] = matrix_to_json(s.base);
    if (s.param == SupportParam::AdditiveLowRank || s.param == SupportParam::HadamardLowRank) {
        j["factor_a"] = matrix_to_json(s.factor_a);
        j["factor_b"] = matrix_to_json(s.factor_b);
    }
    return j;
}

inline SupportMatrix support_from_json(const nlohmann::json& j) {
    SupportMatrix s;
    const std::string param = j.at("param").get<std::string>();
    if (param == "fixed") s.param = SupportParam::Fixed;
    else if (param == "dense") s.param = SupportParam::DenseTrainable;
    else if (param == "lora") s.param = SupportParam::AdditiveLowRank;
    else if (param == "hira") s.param = SupportParam::HadamardLowRank;
    else throw DataError("checkpoint: unknown support parameterization " + param);
    s.base = matrix_from_json(j.at("base"));
    if (s.param == SupportParam::AdditiveLowRank || s.param == SupportParam::HadamardLowRank) {
        s.factor_a = matrix_from_json(j.at("factor_a"));
        s.factor_b = matrix_from_json(j.at("factor_b"));
    }
    s.validate();
    return s;
}

/// extra: caller-owned metadata merged into the root object (training config,
/// data provenance, manifest digest). Keys must not collide with the model's.
inline nlohmann::json model_to_json(const GvnnModel& model,
                                    const nlohmann::json& extra = nlohmann::json::object()) {
    nlohmann::json j;
    j["format"] = kCheckpointFormat;
    j["version"] = kCheckpointVersion;
    j["node_count"] = model.node_count;
    j["window"] = model.window;
    nlohmann::json layers = nlohmann::json::array();
    for (const auto& l : model.layers) {
        nlohmann::json lj;
        lj["a"] = vector_to_json(l.a);
        lj["b"] = vector_to_json(l.b);
        lj["theta"] = matrix_to_json(l.theta);
        lj["support"] = support_to_json(l.support);
        lj["node_function"] = node_function_to_json(l.kind);
        lj["renormalize"] = l.renormalize;
        lj["zave"] = l.zave;
        lj["leaky_slope"] = l.leaky_slope;
        layers.push_back(std::move(lj));
    }
    j["layers"] = std::move(layers);
    j["readout"] = {{"w1", matrix_to_json(model.readout.w1)},
                    {"b1", vector_to_json(model.readout.b1)},
                    {"w2", matrix_to_json(model.readout.w2)},
                    {"b2", vector_to_json(model.readout.b2)},
                    {"leaky_slope", model.readout.leaky_slope}};
    for (const auto& [key, value] : extra.items()) j[key] = value;
    return j;
}

inline GvnnModel model_from_json(const nlohmann::json& j) {
    if (j.value("format", "") != kCheckpointFormat) {
        throw DataError("checkpoint: unrecognized format field");
    }
    if (j.at("version").get<int>() != kCheckpointVersion) {
        throw DataError("checkpoint: unsupported version");
    }
    GvnnModel m;
    m.node_count = j.at("node_count").get<std::size_t>();
    m.window = j.at("window").get<std::size_t>();
    for (const auto& lj : j.at("layers")) {
        GvnnLayerParams l;
        l.a = vector_from_json(lj.at("a"));
        l.b = vector_from_json(lj.at("b"));
        l.theta = matrix_from_json(lj.at("theta"));
        l.support = support_from_json(lj.at("support"));
        l.kind = node_function_from_json(lj.at("node_function"));
        l.renormalize = lj.at("renormalize").get<bool>();
        l.zave = lj.at("zave").get<bool>();
        l.leaky_slope = lj.at("leaky_slope").get<double>();
        m.layers.push_back(std::move(l));
    }
    const auto& rj = j.at("readout");
    m.readout.w1 = matrix_from_json(rj.at("w1"));
    m.readout.b1 = vector_from_json(rj.at("b1"));
    m.readout.w2 = matrix_from_json(rj.at("w2"));
    m.readout.b2 = vector_from_json(rj.at("b2"));
    m.readout.leaky_slope = rj.at("leaky_slope").get<double>();
    return m;
}

inline void save_checkpoint(const std::string& path, const GvnnModel& model,
                            const nlohmann::json& extra = nlohmann::json::object()) {
    write_file(path, model_to_json(model, extra).dump(2) + "\n");
}

struct LoadedCheckpoint {
    GvnnModel model;
    nlohmann::json full;
};

inline LoadedCheckpoint load_checkpoint(const std::string& path) {
    nlohmann::json j;
    try {
        j = nlohmann::json::parse(read_file(path));
    } catch (const nlohmann::json::exception& e) {
        throw DataError(std::string("checkpoint: invalid JSON: ") + e.what());
    }
    try {
        return {model_from_json(j), j};
    } catch (const nlohmann::json::exception& e) {
        throw DataError(std::string("checkpoint: missing or mistyped field: ") + e.what());
    }
}

}  // namespace gvnn
