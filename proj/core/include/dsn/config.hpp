// Flat key=value experiment configuration. Every hyperparameter of a run
// lives here, round-trips through text bit-exactly, and unknown keys are
// rejected so typos cannot silently fall back to defaults.

#ifndef DSN_CONFIG_HPP
#define DSN_CONFIG_HPP

#include <string>
#include <vector>

#include "dsn/common.hpp"

namespace dsn {

struct ExperimentConfig {
    // data
    std::string data_dir;       // directory produced by `preprocess`
    std::string dataset_name;

    // model dimensions
    int d_emb = 64;
    int d_time = 32;
    int d_model = 128;          // query width; must equal 2*d_emb
    int heads = 4;
    int attn_layers = 2;
    int ff_hidden = 256;
    int msg_hidden = 128;
    int time_hidden = 32;
    int head_hidden1 = 256;
    int head_hidden2 = 128;

    // context
    int k_neighbors = 20;
    int walks = 10;
    int walk_len = 2;
    double walk_gamma = 1.0;
    std::string walk_pool = "joint";  // "joint" or "mean" (per-walk mean variant)

    // objective / optimization
    double lambda = 0.1;
    double lr = 1e-3;
    double weight_decay = 1e-3;
    int batch = 64;
    int patience = 5;
    int max_epochs = 50;
    double p_unk = 0.05;
    double dropout = 0.1;
    double eps = 1e-8;

    // protocol
    double mask_ratio = 0.1;
    std::vector<int> seeds = {0, 1, 2, 3, 4};

    // execution
    int threads = 0;            // 0 = hardware concurrency
    std::string precision = "f32";  // "f32" training / "f64" verification
    bool finite_checks = true;
    bool hygiene_checks = true;

    // ablation switches
    bool ablate_shared_memory = false;
    bool ablate_no_decay = false;
    bool ablate_no_walk = false;
    bool ablate_static_only = false;
    bool ablate_dynamic_only = false;

    int d_msg() const { return 2 * d_emb; }
    int head_dim() const { return d_model / heads; }
    int neighbor_feat_dim() const { return 2 * d_emb + d_time + 3; }
    int walk_feat_dim() const { return 2 * d_emb + d_time + 4; }
    int pair_feat_dim() const { return 4 * d_model + d_time; }

    void validate() const;
    std::string to_text() const;
    static ExperimentConfig from_text(const std::string& text);
    static ExperimentConfig from_file(const std::string& path);
    void write_file(const std::string& path) const;

    /// Typed assignment from strings; throws on unknown key or bad value.
    void set(const std::string& key, const std::string& value);
};

}  // namespace dsn

#endif  // DSN_CONFIG_HPP
