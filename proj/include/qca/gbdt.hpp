#pragma once
// Histogram-binned gradient-boosted regression trees with leaf-wise
// growth. L2 loss, equal-frequency bins computed once from the training
// set, deterministic split selection (ties go to the lowest feature index,
// then the lowest bin).

#include <cstdint>
#include <span>
#include <string>
#include <vector>

namespace qca {

struct DataMatrix {
    std::size_t n_rows = 0;
    std::size_t n_cols = 0;
    std::vector<double> values;  // row-major

    std::span<const double> row(std::size_t r) const {
        return {values.data() + r * n_cols, n_cols};
    }
    double at(std::size_t r, std::size_t c) const { return values[r * n_cols + c]; }
    void push_row(std::span<const double> v);
};

struct GbdtParams {
    double learning_rate = 0.1;
    int n_iterations = 500;
    int num_leaves = 40;
    int min_data_in_leaf = 20;
    int max_bin = 100;
    int max_depth = -1;             // unlimited when negative
    int early_stopping_rounds = 0;  // 0 disables; needs a validation set
    std::uint64_t seed = 0;

    void validate() const;
};

struct TreeNode {
    // internal node when feature >= 0, leaf otherwise
    int feature = -1;
    double threshold = 0.0;  // go left when x[feature] <= threshold
    int left = -1;
    int right = -1;
    double value = 0.0;  // leaf value (raw mean residual)
    double gain = 0.0;   // split gain, kept for feature importance

    bool is_leaf() const { return feature < 0; }
};

struct Tree {
    std::vector<TreeNode> nodes;
    double leaf_value(std::span<const double> x) const;
};

struct GbdtModel {
    double base_score = 0.0;
    double learning_rate = 0.1;
    std::uint64_t schema_fingerprint = 0;
    std::size_t n_features = 0;
    GbdtParams params;
    std::vector<std::vector<double>> bin_upper_bounds;  // per feature
    std::vector<Tree> trees;

    double predict(std::span<const double> x) const;
    // Validates the caller's schema before predicting.
    double predict_checked(std::span<const double> x, std::uint64_t fingerprint) const;

    // Total split gain per feature divided by the maximum (all zeros when
    // no split exists).
    std::vector<double> feature_importance() const;

    void save_file(const std::string& path) const;
    static GbdtModel load_file(const std::string& path);
};

struct TrainLog {
    std::vector<double> train_rmse;  // after each iteration
    std::vector<double> valid_rmse;  // when a validation set is given
    int best_iteration = -1;         // early stopping only
};

GbdtModel train_gbdt(const DataMatrix& X, std::span<const double> y, const GbdtParams& params,
                     std::uint64_t schema_fingerprint, TrainLog* log = nullptr,
                     const DataMatrix* X_valid = nullptr,
                     std::span<const double> y_valid = {});

}  // namespace qca
