#include "qca/gbdt.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <sstream>
#include <stdexcept>

#include "qca/text.hpp"

namespace qca {

void DataMatrix::push_row(std::span<const double> v) {
    if (n_cols == 0) n_cols = v.size();
    if (v.size() != n_cols) throw std::invalid_argument("DataMatrix: inconsistent row length");
    values.insert(values.end(), v.begin(), v.end());
    ++n_rows;
}

void GbdtParams::validate() const {
    if (!(learning_rate > 0) || learning_rate > 1)
        throw std::invalid_argument("gbdt: learning_rate outside (0,1]");
    if (n_iterations < 0) throw std::invalid_argument("gbdt: n_iterations must be >= 0");
    if (num_leaves < 2) throw std::invalid_argument("gbdt: num_leaves must be >= 2");
    if (min_data_in_leaf < 1) throw std::invalid_argument("gbdt: min_data_in_leaf must be >= 1");
    if (max_bin < 2) throw std::invalid_argument("gbdt: max_bin must be >= 2");
    if (max_depth >= 0 && double(max_depth) <= std::log2(double(num_leaves)))
        throw std::invalid_argument("gbdt: max_depth must exceed log2(num_leaves)");
    if (early_stopping_rounds < 0)
        throw std::invalid_argument("gbdt: early_stopping_rounds must be >= 0");
}

double Tree::leaf_value(std::span<const double> x) const {
    int idx = 0;
    while (!nodes[std::size_t(idx)].is_leaf()) {
        const TreeNode& n = nodes[std::size_t(idx)];
        idx = x[std::size_t(n.feature)] <= n.threshold ? n.left : n.right;
    }
    return nodes[std::size_t(idx)].value;
}

double GbdtModel::predict(std::span<const double> x) const {
    if (x.size() != n_features) throw std::invalid_argument("predict: feature count mismatch");
    double acc = base_score;
    for (const Tree& t : trees) acc += learning_rate * t.leaf_value(x);
    return acc;
}

double GbdtModel::predict_checked(std::span<const double> x, std::uint64_t fingerprint) const {
    if (fingerprint != schema_fingerprint)
        throw std::invalid_argument("predict: feature schema fingerprint mismatch");
    return predict(x);
}

std::vector<double> GbdtModel::feature_importance() const {
    std::vector<double> gain(n_features, 0.0);
    for (const Tree& t : trees)
        for (const TreeNode& n : t.nodes)
            if (!n.is_leaf()) gain[std::size_t(n.feature)] += n.gain;
    const double top = *std::max_element(gain.begin(), gain.end());
    if (top > 0)
        for (double& g : gain) g /= top;
    return gain;
}

namespace {

// ---- binning -------------------------------------------------------------

// Equal-frequency cut points; bin b holds values <= bounds[b], the last bin
// is unbounded above. Duplicate cuts collapse, so low-cardinality features
// get fewer bins.
std::vector<double> quantile_bounds(const DataMatrix& X, std::size_t col, int max_bin) {
    std::vector<double> v(X.n_rows);
    for (std::size_t r = 0; r < X.n_rows; ++r) v[r] = X.at(r, col);
    std::sort(v.begin(), v.end());
    std::vector<double> bounds;
    const std::size_t n = v.size();
    for (int b = 1; b < max_bin; ++b) {
        std::size_t rank = std::size_t(double(b) * double(n) / double(max_bin));
        if (rank == 0 || rank >= n) continue;
        const double cut = v[rank - 1];
        if (cut < v[rank] && (bounds.empty() || cut > bounds.back())) bounds.push_back(cut);
    }
    return bounds;
}

int bin_of(const std::vector<double>& bounds, double x) {
    return int(std::lower_bound(bounds.begin(), bounds.end(), x) - bounds.begin());
}

struct BinnedMatrix {
    std::size_t n_rows = 0, n_cols = 0;
    std::vector<std::uint16_t> codes;  // row-major
    std::vector<std::vector<double>> bounds;
    std::vector<int> offsets;  // flattened histogram offset per feature
    int total_bins = 0;

    std::uint16_t code(std::size_t r, std::size_t c) const { return codes[r * n_cols + c]; }
    int bins(std::size_t c) const { return int(bounds[c].size()) + 1; }
};

BinnedMatrix bin_features(const DataMatrix& X, int max_bin) {
    BinnedMatrix bm;
    bm.n_rows = X.n_rows;
    bm.n_cols = X.n_cols;
    bm.codes.resize(X.n_rows * X.n_cols);
    bm.bounds.resize(X.n_cols);
    bm.offsets.resize(X.n_cols);
    for (std::size_t c = 0; c < X.n_cols; ++c) {
        bm.bounds[c] = quantile_bounds(X, c, max_bin);
        bm.offsets[c] = bm.total_bins;
        bm.total_bins += int(bm.bounds[c].size()) + 1;
    }
    for (std::size_t r = 0; r < X.n_rows; ++r)
        for (std::size_t c = 0; c < X.n_cols; ++c)
            bm.codes[r * bm.n_cols + c] = std::uint16_t(bin_of(bm.bounds[c], X.at(r, c)));
    return bm;
}

// ---- leaf-wise growth ----------------------------------------------------

struct HistBin {
    double sum = 0.0;
    int count = 0;
};

struct SplitChoice {
    double gain = 0.0;
    int feature = -1;
    int bin = -1;  // left side takes codes <= bin
};

struct GrowingLeaf {
    std::vector<std::uint32_t> rows;
    std::vector<HistBin> hist;
    double sum = 0.0;
    int depth = 0;
    int node = -1;  // index into tree nodes
    SplitChoice best;
};

void build_histogram(const BinnedMatrix& bm, std::span<const double> grad,
                     const std::vector<std::uint32_t>& rows, std::vector<HistBin>& hist) {
    hist.assign(std::size_t(bm.total_bins), HistBin{});
    for (std::uint32_t r : rows) {
        const std::uint16_t* code_row = &bm.codes[std::size_t(r) * bm.n_cols];
        const double g = grad[r];
        for (std::size_t c = 0; c < bm.n_cols; ++c) {
            HistBin& hb = hist[std::size_t(bm.offsets[c]) + code_row[c]];
            hb.sum += g;
            hb.count += 1;
        }
    }
}

SplitChoice best_split(const BinnedMatrix& bm, const GrowingLeaf& leaf, int min_data_in_leaf) {
    SplitChoice best;
    const int n_total = int(leaf.rows.size());
    if (n_total < 2 * min_data_in_leaf) return best;
    const double parent_score = leaf.sum * leaf.sum / double(n_total);
    for (std::size_t c = 0; c < bm.n_cols; ++c) {
        const int nb = bm.bins(c);
        const HistBin* h = &leaf.hist[std::size_t(bm.offsets[c])];
        double left_sum = 0.0;
        int left_count = 0;
        for (int b = 0; b + 1 < nb; ++b) {  // the last bin cannot be a left boundary
            left_sum += h[b].sum;
            left_count += h[b].count;
            const int right_count = n_total - left_count;
            if (left_count < min_data_in_leaf) continue;
            if (right_count < min_data_in_leaf) break;
            const double right_sum = leaf.sum - left_sum;
            const double gain = left_sum * left_sum / double(left_count) +
                                right_sum * right_sum / double(right_count) - parent_score;
            if (gain > best.gain) {  // strict: ties keep the lowest (feature, bin)
                best.gain = gain;
                best.feature = int(c);
                best.bin = b;
            }
        }
    }
    return best;
}

Tree grow_tree(const BinnedMatrix& bm, std::span<const double> grad, const GbdtParams& params,
               std::vector<std::pair<std::uint32_t, double>>& row_updates) {
    Tree tree;
    constexpr double kMinGain = 1e-12;

    std::vector<GrowingLeaf> leaves;
    {
        GrowingLeaf root;
        root.rows.resize(bm.n_rows);
        for (std::uint32_t r = 0; r < bm.n_rows; ++r) root.rows[r] = r;
        for (std::uint32_t r = 0; r < bm.n_rows; ++r) root.sum += grad[r];
        root.node = 0;
        tree.nodes.push_back(TreeNode{});
        build_histogram(bm, grad, root.rows, root.hist);
        root.best = best_split(bm, root, params.min_data_in_leaf);
        leaves.push_back(std::move(root));
    }

    while (int(leaves.size()) < params.num_leaves) {
        // pick the leaf with the largest gain; earlier leaves win ties
        int pick = -1;
        for (std::size_t i = 0; i < leaves.size(); ++i) {
            if (params.max_depth >= 0 && leaves[i].depth >= params.max_depth) continue;
            if (leaves[i].best.gain <= kMinGain) continue;
            if (pick < 0 || leaves[i].best.gain > leaves[std::size_t(pick)].best.gain)
                pick = int(i);
        }
        if (pick < 0) break;

        GrowingLeaf parent = std::move(leaves[std::size_t(pick)]);
        leaves.erase(leaves.begin() + pick);
        const SplitChoice sp = parent.best;

        GrowingLeaf left, right;
        left.depth = right.depth = parent.depth + 1;
        for (std::uint32_t r : parent.rows) {
            if (bm.code(r, std::size_t(sp.feature)) <= std::uint16_t(sp.bin))
                left.rows.push_back(r);
            else
                right.rows.push_back(r);
        }
        for (std::uint32_t r : left.rows) left.sum += grad[r];
        right.sum = parent.sum - left.sum;

        // histogram subtraction: build the smaller child, derive the other
        GrowingLeaf* small = left.rows.size() <= right.rows.size() ? &left : &right;
        GrowingLeaf* large = small == &left ? &right : &left;
        build_histogram(bm, grad, small->rows, small->hist);
        large->hist = std::move(parent.hist);
        for (std::size_t b = 0; b < large->hist.size(); ++b) {
            large->hist[b].sum -= small->hist[b].sum;
            large->hist[b].count -= small->hist[b].count;
        }

        // parent's node becomes internal
        TreeNode& node = tree.nodes[std::size_t(parent.node)];
        node.feature = sp.feature;
        node.threshold = bm.bounds[std::size_t(sp.feature)][std::size_t(sp.bin)];
        node.gain = sp.gain;
        node.left = int(tree.nodes.size());
        tree.nodes.push_back(TreeNode{});
        node.right = int(tree.nodes.size());
        tree.nodes.push_back(TreeNode{});
        left.node = node.left;
        right.node = node.right;

        left.best = best_split(bm, left, params.min_data_in_leaf);
        right.best = best_split(bm, right, params.min_data_in_leaf);
        leaves.push_back(std::move(left));
        leaves.push_back(std::move(right));
    }

    row_updates.clear();
    for (const GrowingLeaf& leaf : leaves) {
        const double value = leaf.rows.empty() ? 0.0 : leaf.sum / double(leaf.rows.size());
        tree.nodes[std::size_t(leaf.node)].value = value;
        for (std::uint32_t r : leaf.rows) row_updates.emplace_back(r, value);
    }
    return tree;
}

double rmse_of(std::span<const double> y, std::span<const double> pred) {
    double acc = 0.0;
    for (std::size_t i = 0; i < y.size(); ++i) {
        const double d = y[i] - pred[i];
        acc += d * d;
    }
    return std::sqrt(acc / double(y.size()));
}

}  // namespace

GbdtModel train_gbdt(const DataMatrix& X, std::span<const double> y, const GbdtParams& params,
                     std::uint64_t schema_fingerprint, TrainLog* log, const DataMatrix* X_valid,
                     std::span<const double> y_valid) {
    params.validate();
    if (X.n_rows == 0) throw std::invalid_argument("train: empty dataset");
    if (X.n_rows != y.size()) throw std::invalid_argument("train: row/target count mismatch");
    if (X.values.size() != X.n_rows * X.n_cols)
        throw std::invalid_argument("train: inconsistent matrix shape");
    if (int(X.n_rows) < 2 * params.min_data_in_leaf)
        throw std::invalid_argument("train: fewer than 2*min_data_in_leaf rows");
    for (double v : X.values)
        if (!std::isfinite(v)) throw std::invalid_argument("train: non-finite feature value");
    const bool use_valid = X_valid != nullptr;
    if (use_valid && X_valid->n_cols != X.n_cols)
        throw std::invalid_argument("train: validation feature count mismatch");
    if (use_valid && X_valid->n_rows != y_valid.size())
        throw std::invalid_argument("train: validation row/target count mismatch");

    GbdtModel model;
    model.learning_rate = params.learning_rate;
    model.schema_fingerprint = schema_fingerprint;
    model.n_features = X.n_cols;
    model.params = params;

    double mean = 0.0;
    for (double v : y) mean += v;
    mean /= double(y.size());
    model.base_score = mean;

    const BinnedMatrix bm = bin_features(X, params.max_bin);
    model.bin_upper_bounds = bm.bounds;

    std::vector<double> pred(X.n_rows, model.base_score);
    std::vector<double> grad(X.n_rows);
    std::vector<double> valid_pred;
    if (use_valid) valid_pred.assign(X_valid->n_rows, model.base_score);

    std::vector<std::pair<std::uint32_t, double>> row_updates;
    double best_valid = std::numeric_limits<double>::infinity();
    int best_iter = -1;

    for (int iter = 0; iter < params.n_iterations; ++iter) {
        for (std::size_t r = 0; r < X.n_rows; ++r) grad[r] = y[r] - pred[r];
        Tree tree = grow_tree(bm, grad, params, row_updates);
        for (const auto& [r, value] : row_updates)
            pred[r] += params.learning_rate * value;
        model.trees.push_back(std::move(tree));

        if (log) log->train_rmse.push_back(rmse_of(y, pred));
        if (use_valid) {
            const Tree& t = model.trees.back();
            for (std::size_t r = 0; r < X_valid->n_rows; ++r)
                valid_pred[r] += params.learning_rate * t.leaf_value(X_valid->row(r));
            const double vr = rmse_of(y_valid, valid_pred);
            if (log) log->valid_rmse.push_back(vr);
            if (vr < best_valid) {
                best_valid = vr;
                best_iter = iter;
            }
            if (params.early_stopping_rounds > 0 &&
                iter - best_iter >= params.early_stopping_rounds) {
                model.trees.resize(std::size_t(best_iter) + 1);
                break;
            }
        }
    }
    if (log) log->best_iteration = best_iter;
    return model;
}

// ---- serialization ---------------------------------------------------------
//
// Versioned plain-text format. Doubles are written in shortest round-trip
// form, so save/load reproduces predictions bit-exactly; the trailing
// checksum line guards against truncation and corruption.

namespace {
constexpr const char* kMagic = "qca-gbdt 1";
}

void GbdtModel::save_file(const std::string& path) const {
    std::ostringstream body;
    body << kMagic << "\n";
    body << "schema_fingerprint " << fmt_hex64(schema_fingerprint) << "\n";
    body << "n_features " << n_features << "\n";
    body << "learning_rate " << fmt_double(learning_rate) << "\n";
    body << "base_score " << fmt_double(base_score) << "\n";
    body << "params " << fmt_double(params.learning_rate) << " " << params.n_iterations << " "
         << params.num_leaves << " " << params.min_data_in_leaf << " " << params.max_bin << " "
         << params.max_depth << " " << params.early_stopping_rounds << " " << params.seed << "\n";
    for (std::size_t c = 0; c < bin_upper_bounds.size(); ++c) {
        body << "bins " << c << " " << bin_upper_bounds[c].size();
        for (double b : bin_upper_bounds[c]) body << " " << fmt_double(b);
        body << "\n";
    }
    body << "n_trees " << trees.size() << "\n";
    for (std::size_t t = 0; t < trees.size(); ++t) {
        body << "tree " << t << " " << trees[t].nodes.size() << "\n";
        for (std::size_t i = 0; i < trees[t].nodes.size(); ++i) {
            const TreeNode& n = trees[t].nodes[i];
            if (n.is_leaf())
                body << "l " << i << " " << fmt_double(n.value) << "\n";
            else
                body << "n " << i << " " << n.feature << " " << fmt_double(n.threshold) << " "
                     << n.left << " " << n.right << " " << fmt_double(n.gain) << "\n";
        }
    }
    const std::string text = body.str();
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot write model file: " + path);
    out << text << "checksum " << fmt_hex64(fnv1a(text)) << "\n";
}

GbdtModel load_model_text(std::istream& in, const std::string& origin) {
    std::string text;
    std::string checksum_line;
    {
        std::string line;
        std::vector<std::string> lines;
        while (std::getline(in, line)) lines.push_back(line);
        if (lines.empty()) throw std::runtime_error(origin + ": empty model file");
        checksum_line = lines.back();
        lines.pop_back();
        for (const std::string& l : lines) text += l + "\n";
    }
    {
        std::istringstream cs(checksum_line);
        std::string key, value;
        if (!(cs >> key >> value) || key != "checksum" || value != fmt_hex64(fnv1a(text)))
            throw std::runtime_error(origin + ": model checksum mismatch");
    }

    std::istringstream body(text);
    std::string line;
    auto next_line = [&]() {
        if (!std::getline(body, line)) throw std::runtime_error(origin + ": truncated model file");
        return std::istringstream(line);
    };

    next_line();
    if (line != kMagic) throw std::runtime_error(origin + ": unsupported model version");

    GbdtModel model;
    std::string key;
    {
        auto ls = next_line();
        std::string hex;
        ls >> key >> hex;
        if (key != "schema_fingerprint") throw std::runtime_error(origin + ": bad header");
        model.schema_fingerprint = std::stoull(hex, nullptr, 16);
    }
    {
        auto ls = next_line();
        ls >> key >> model.n_features;
        if (key != "n_features") throw std::runtime_error(origin + ": bad header");
    }
    {
        auto ls = next_line();
        std::string v;
        ls >> key >> v;
        if (key != "learning_rate") throw std::runtime_error(origin + ": bad header");
        model.learning_rate = parse_double(v);
    }
    {
        auto ls = next_line();
        std::string v;
        ls >> key >> v;
        if (key != "base_score") throw std::runtime_error(origin + ": bad header");
        model.base_score = parse_double(v);
    }
    {
        auto ls = next_line();
        std::string lr;
        ls >> key >> lr >> model.params.n_iterations >> model.params.num_leaves >>
            model.params.min_data_in_leaf >> model.params.max_bin >> model.params.max_depth >>
            model.params.early_stopping_rounds >> model.params.seed;
        if (key != "params" || !ls) throw std::runtime_error(origin + ": bad params line");
        model.params.learning_rate = parse_double(lr);
    }
    model.bin_upper_bounds.resize(model.n_features);
    for (std::size_t c = 0; c < model.n_features; ++c) {
        auto ls = next_line();
        std::size_t idx = 0, count = 0;
        ls >> key >> idx >> count;
        if (key != "bins" || idx != c || !ls) throw std::runtime_error(origin + ": bad bins line");
        model.bin_upper_bounds[c].resize(count);
        for (std::size_t b = 0; b < count; ++b) {
            std::string v;
            if (!(ls >> v)) throw std::runtime_error(origin + ": bad bins line");
            model.bin_upper_bounds[c][b] = parse_double(v);
        }
    }
    std::size_t n_trees = 0;
    {
        auto ls = next_line();
        ls >> key >> n_trees;
        if (key != "n_trees" || !ls) throw std::runtime_error(origin + ": bad tree count");
    }
    model.trees.resize(n_trees);
    for (std::size_t t = 0; t < n_trees; ++t) {
        auto ls = next_line();
        std::size_t idx = 0, n_nodes = 0;
        ls >> key >> idx >> n_nodes;
        if (key != "tree" || idx != t || !ls) throw std::runtime_error(origin + ": bad tree header");
        model.trees[t].nodes.resize(n_nodes);
        for (std::size_t i = 0; i < n_nodes; ++i) {
            auto ns = next_line();
            std::string tag;
            std::size_t ni = 0;
            ns >> tag >> ni;
            if (ni != i || !ns) throw std::runtime_error(origin + ": bad node line");
            TreeNode& n = model.trees[t].nodes[i];
            if (tag == "l") {
                std::string v;
                ns >> v;
                n.value = parse_double(v);
            } else if (tag == "n") {
                std::string thr, gain;
                ns >> n.feature >> thr >> n.left >> n.right >> gain;
                if (!ns) throw std::runtime_error(origin + ": bad node line");
                n.threshold = parse_double(thr);
                n.gain = parse_double(gain);
                if (n.feature < 0 || n.feature >= int(model.n_features) || n.left < 0 ||
                    n.right < 0 || n.left >= int(n_nodes) || n.right >= int(n_nodes))
                    throw std::runtime_error(origin + ": node reference out of range");
            } else {
                throw std::runtime_error(origin + ": unknown node tag");
            }
        }
    }
    return model;
}

GbdtModel GbdtModel::load_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot open model file: " + path);
    return load_model_text(in, path);
}

}  // namespace qca
