#include "dsn/metrics.hpp"

#include <cstdio>
#include <fstream>
#include <sstream>

namespace dsn {

int64_t Metrics::support() const {
    int64_t n = 0;
    for (const auto& row : confusion)
        for (int64_t v : row) n += v;
    return n;
}

Metrics compute_metrics(const Confusion& confusion) {
    Metrics m;
    m.confusion = confusion;
    const int64_t total = m.support();
    int64_t diag = 0;
    for (int c = 0; c < kNumLabels; ++c) diag += confusion[c][c];
    m.accuracy = total ? static_cast<double>(diag) / static_cast<double>(total) : 0.0;

    double macro = 0, weighted = 0;
    for (int c = 0; c < kNumLabels; ++c) {
        int64_t tp = confusion[c][c], fp = 0, fn = 0, sup = 0;
        for (int o = 0; o < kNumLabels; ++o) {
            sup += confusion[c][o];
            if (o == c) continue;
            fp += confusion[o][c];
            fn += confusion[c][o];
        }
        const double p = (tp + fp) ? static_cast<double>(tp) / (tp + fp) : 0.0;
        const double r = (tp + fn) ? static_cast<double>(tp) / (tp + fn) : 0.0;
        const double f = (p + r > 0) ? 2.0 * p * r / (p + r) : 0.0;
        m.precision[c] = p;
        m.recall[c] = r;
        m.f1[c] = f;
        macro += f;
        if (total) weighted += f * static_cast<double>(sup) / static_cast<double>(total);
    }
    m.macro_f1 = macro / kNumLabels;
    m.weighted_f1 = weighted;
    return m;
}

std::string Metrics::to_text() const {
    std::ostringstream os;
    char buf[64];
    auto put = [&](const char* key, double v) {
        std::snprintf(buf, sizeof(buf), "%.17g", v);
        os << key << "=" << buf << "\n";
    };
    put("accuracy", accuracy);
    put("weighted_f1", weighted_f1);
    put("macro_f1", macro_f1);
    static const char* cls[] = {"pos", "neg", "nonedge"};
    for (int c = 0; c < kNumLabels; ++c) {
        put((std::string("precision_") + cls[c]).c_str(), precision[c]);
        put((std::string("recall_") + cls[c]).c_str(), recall[c]);
        put((std::string("f1_") + cls[c]).c_str(), f1[c]);
    }
    for (int i = 0; i < kNumLabels; ++i)
        for (int j = 0; j < kNumLabels; ++j)
            os << "confusion_" << cls[i] << "_" << cls[j] << "=" << confusion[i][j] << "\n";
    return os.str();
}

void write_metrics_file(const std::string& path, const Metrics& m) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw validation_error("cannot write " + path);
    out << m.to_text();
}

Metrics read_metrics_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw validation_error("cannot open " + path);
    Metrics m;
    std::string line;
    static const std::string cls[] = {"pos", "neg", "nonedge"};
    while (std::getline(in, line)) {
        const auto eq = line.find('=');
        if (eq == std::string::npos) continue;
        const std::string key = line.substr(0, eq);
        const std::string val = line.substr(eq + 1);
        if (key == "accuracy") m.accuracy = std::stod(val);
        else if (key == "weighted_f1") m.weighted_f1 = std::stod(val);
        else if (key == "macro_f1") m.macro_f1 = std::stod(val);
        else {
            bool matched = false;
            for (int c = 0; c < kNumLabels && !matched; ++c) {
                if (key == "precision_" + cls[c]) m.precision[c] = std::stod(val), matched = true;
                else if (key == "recall_" + cls[c]) m.recall[c] = std::stod(val), matched = true;
                else if (key == "f1_" + cls[c]) m.f1[c] = std::stod(val), matched = true;
            }
            for (int i = 0; i < kNumLabels && !matched; ++i)
                for (int j = 0; j < kNumLabels && !matched; ++j)
                    if (key == "confusion_" + cls[i] + "_" + cls[j])
                        m.confusion[i][j] = std::stoll(val), matched = true;
        }
    }
    return m;
}

}  // namespace dsn
