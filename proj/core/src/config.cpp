#include "dsn/config.hpp"

#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <functional>
#include <sstream>
#include <variant>

namespace dsn {

namespace {

using FieldPtr = std::variant<int ExperimentConfig::*, double ExperimentConfig::*,
                              bool ExperimentConfig::*, std::string ExperimentConfig::*,
                              std::vector<int> ExperimentConfig::*>;

struct Field {
    const char* name;
    FieldPtr ptr;
};

// Single source of truth for serialization, parsing and key validation.
const std::vector<Field>& fields() {
    static const std::vector<Field> f = {
        {"data_dir", &ExperimentConfig::data_dir},
        {"dataset_name", &ExperimentConfig::dataset_name},
        {"d_emb", &ExperimentConfig::d_emb},
        {"d_time", &ExperimentConfig::d_time},
        {"d_model", &ExperimentConfig::d_model},
        {"heads", &ExperimentConfig::heads},
        {"attn_layers", &ExperimentConfig::attn_layers},
        {"ff_hidden", &ExperimentConfig::ff_hidden},
        {"msg_hidden", &ExperimentConfig::msg_hidden},
        {"time_hidden", &ExperimentConfig::time_hidden},
        {"head_hidden1", &ExperimentConfig::head_hidden1},
        {"head_hidden2", &ExperimentConfig::head_hidden2},
        {"k_neighbors", &ExperimentConfig::k_neighbors},
        {"walks", &ExperimentConfig::walks},
        {"walk_len", &ExperimentConfig::walk_len},
        {"walk_gamma", &ExperimentConfig::walk_gamma},
        {"walk_pool", &ExperimentConfig::walk_pool},
        {"lambda", &ExperimentConfig::lambda},
        {"lr", &ExperimentConfig::lr},
        {"weight_decay", &ExperimentConfig::weight_decay},
        {"batch", &ExperimentConfig::batch},
        {"patience", &ExperimentConfig::patience},
        {"max_epochs", &ExperimentConfig::max_epochs},
        {"p_unk", &ExperimentConfig::p_unk},
        {"dropout", &ExperimentConfig::dropout},
        {"eps", &ExperimentConfig::eps},
        {"mask_ratio", &ExperimentConfig::mask_ratio},
        {"seeds", &ExperimentConfig::seeds},
        {"threads", &ExperimentConfig::threads},
        {"precision", &ExperimentConfig::precision},
        {"finite_checks", &ExperimentConfig::finite_checks},
        {"hygiene_checks", &ExperimentConfig::hygiene_checks},
        {"ablate_shared_memory", &ExperimentConfig::ablate_shared_memory},
        {"ablate_no_decay", &ExperimentConfig::ablate_no_decay},
        {"ablate_no_walk", &ExperimentConfig::ablate_no_walk},
        {"ablate_static_only", &ExperimentConfig::ablate_static_only},
        {"ablate_dynamic_only", &ExperimentConfig::ablate_dynamic_only},
    };
    return f;
}

std::string fmt_double(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

int parse_int_strict(const std::string& key, const std::string& v) {
    size_t pos = 0;
    int x;
    try {
        x = std::stoi(v, &pos);
    } catch (...) {
        throw validation_error("config: bad integer for " + key + ": '" + v + "'");
    }
    if (pos != v.size()) throw validation_error("config: bad integer for " + key + ": '" + v + "'");
    return x;
}

double parse_double_strict(const std::string& key, const std::string& v) {
    // strtod instead of std::stod: subnormals must round-trip, not throw
    char* end = nullptr;
    const double x = std::strtod(v.c_str(), &end);
    if (v.empty() || end != v.c_str() + v.size() || !std::isfinite(x))
        throw validation_error("config: bad number for " + key + ": '" + v + "'");
    return x;
}

bool parse_bool_strict(const std::string& key, const std::string& v) {
    if (v == "true" || v == "1") return true;
    if (v == "false" || v == "0") return false;
    throw validation_error("config: bad bool for " + key + ": '" + v + "'");
}

}  // namespace

void ExperimentConfig::set(const std::string& key, const std::string& value) {
    for (const Field& f : fields()) {
        if (key != f.name) continue;
        std::visit(
            [&](auto member) {
                auto& slot = this->*member;
                using V = std::remove_reference_t<decltype(slot)>;
                if constexpr (std::is_same_v<V, int>) slot = parse_int_strict(key, value);
                else if constexpr (std::is_same_v<V, double>) slot = parse_double_strict(key, value);
                else if constexpr (std::is_same_v<V, bool>) slot = parse_bool_strict(key, value);
                else if constexpr (std::is_same_v<V, std::string>) slot = value;
                else {  // vector<int>, comma separated
                    slot.clear();
                    if (value.empty()) return;
                    std::stringstream ss(value);
                    std::string tok;
                    while (std::getline(ss, tok, ','))
                        slot.push_back(parse_int_strict(key, tok));
                }
            },
            f.ptr);
        return;
    }
    throw validation_error("config: unknown key '" + key + "'");
}

std::string ExperimentConfig::to_text() const {
    std::ostringstream os;
    for (const Field& f : fields()) {
        os << f.name << "=";
        std::visit(
            [&](auto member) {
                const auto& slot = this->*member;
                using V = std::remove_cvref_t<decltype(slot)>;
                if constexpr (std::is_same_v<V, double>) os << fmt_double(slot);
                else if constexpr (std::is_same_v<V, bool>) os << (slot ? "true" : "false");
                else if constexpr (std::is_same_v<V, std::vector<int>>) {
                    for (size_t i = 0; i < slot.size(); ++i) os << (i ? "," : "") << slot[i];
                } else os << slot;
            },
            f.ptr);
        os << "\n";
    }
    return os.str();
}

ExperimentConfig ExperimentConfig::from_text(const std::string& text) {
    ExperimentConfig cfg;
    std::istringstream is(text);
    std::string line;
    size_t line_no = 0;
    while (std::getline(is, line)) {
        ++line_no;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty() || line[0] == '#') continue;
        const auto eq = line.find('=');
        if (eq == std::string::npos)
            throw validation_error("config: line " + std::to_string(line_no) + " is not key=value");
        cfg.set(line.substr(0, eq), line.substr(eq + 1));
    }
    return cfg;
}

ExperimentConfig ExperimentConfig::from_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw validation_error("cannot open config: " + path);
    std::stringstream ss;
    ss << in.rdbuf();
    ExperimentConfig cfg = from_text(ss.str());
    cfg.validate();
    return cfg;
}

void ExperimentConfig::write_file(const std::string& path) const {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw validation_error("cannot write config: " + path);
    out << to_text();
}

void ExperimentConfig::validate() const {
    auto req = [](bool ok, const std::string& what) {
        if (!ok) throw validation_error("config: " + what);
    };
    req(d_emb > 0 && d_time > 0 && d_model > 0, "dimensions must be positive");
    req(d_model == 2 * d_emb, "d_model must equal 2*d_emb");
    req(heads > 0 && d_model % heads == 0, "heads must divide d_model");
    req(attn_layers >= 1, "attn_layers must be >= 1");
    req(ff_hidden > 0 && msg_hidden > 0 && time_hidden > 0, "hidden sizes must be positive");
    req(head_hidden1 > 0 && head_hidden2 > 0, "head hidden sizes must be positive");
    req(k_neighbors >= 0 && walks >= 0 && walk_len >= 0, "context sizes must be >= 0");
    req(walk_gamma >= 0, "walk_gamma must be >= 0");
    req(walk_pool == "joint" || walk_pool == "mean", "walk_pool must be 'joint' or 'mean'");
    req(lambda >= 0, "lambda must be >= 0");
    req(lr > 0, "lr must be positive");
    req(weight_decay >= 0, "weight_decay must be >= 0");
    req(batch >= 1, "batch must be >= 1");
    req(patience >= 0, "patience must be >= 0");
    req(max_epochs >= 1, "max_epochs must be >= 1");
    req(p_unk >= 0 && p_unk < 1, "p_unk must be in [0,1)");
    req(dropout >= 0 && dropout < 1, "dropout must be in [0,1)");
    req(eps > 0, "eps must be positive");
    req(mask_ratio >= 0 && mask_ratio <= 1, "mask_ratio must be in [0,1]");
    req(!seeds.empty(), "seeds must be non-empty");
    req(threads >= 0, "threads must be >= 0");
    req(precision == "f32" || precision == "f64", "precision must be f32 or f64");
    req(!(ablate_static_only && ablate_dynamic_only),
        "ablate_static_only and ablate_dynamic_only are mutually exclusive");
}

}  // namespace dsn
