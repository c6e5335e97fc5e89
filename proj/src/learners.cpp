#include "telem/learners.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>
#include <stdexcept>

namespace telem {

namespace {

constexpr double kProbClamp = 1e-6;
constexpr double kGbtLambda = 1.0;  // leaf L2 regularizer
constexpr double kHessFloor = 1e-12;

struct ParamRange {
    double lo;
    double hi;
};

const std::map<std::string, ParamRange>& gbt_ranges() {
    static const std::map<std::string, ParamRange> r = {
        {"n_trees", {0, 5000}},        {"max_depth", {1, 32}},
        {"learning_rate", {1e-4, 1}},  {"min_leaf", {1, 1e9}},
        {"subsample", {1e-3, 1}},
    };
    return r;
}

const std::map<std::string, ParamRange>& logreg_ranges() {
    static const std::map<std::string, ParamRange> r = {
        {"l2_penalty", {0, 1e9}},
        {"max_iter", {1, 1e6}},
        {"tol", {1e-15, 1}},
    };
    return r;
}

double clamp_prob(double p) {
    return std::clamp(p, kProbClamp, 1.0 - kProbClamp);
}

/// Dense symmetric-positive-definite solve via Cholesky with a diagonal
/// fallback bump; dimensions here are small (stacked probabilities or group
/// reductions).
std::vector<double> spd_solve(std::vector<double> A, std::vector<double> b) {
    const std::size_t n = b.size();
    for (int attempt = 0; attempt < 6; ++attempt) {
        std::vector<double> L(n * n, 0.0);
        bool ok = true;
        for (std::size_t i = 0; i < n && ok; ++i) {
            for (std::size_t j = 0; j <= i; ++j) {
                double sum = A[i * n + j];
                for (std::size_t k = 0; k < j; ++k)
                    sum -= L[i * n + k] * L[j * n + k];
                if (i == j) {
                    if (sum <= 0) { ok = false; break; }
                    L[i * n + i] = std::sqrt(sum);
                } else {
                    L[i * n + j] = sum / L[j * n + j];
                }
            }
        }
        if (ok) {
            std::vector<double> x(n);
            for (std::size_t i = 0; i < n; ++i) {
                double sum = b[i];
                for (std::size_t k = 0; k < i; ++k) sum -= L[i * n + k] * x[k];
                x[i] = sum / L[i * n + i];
            }
            for (std::size_t ii = n; ii-- > 0;) {
                double sum = x[ii];
                for (std::size_t k = ii + 1; k < n; ++k)
                    sum -= L[k * n + ii] * x[k];
                x[ii] = sum / L[ii * n + ii];
            }
            return x;
        }
        for (std::size_t i = 0; i < n; ++i)
            A[i * n + i] += std::pow(10.0, attempt - 8);
    }
    throw std::runtime_error("logreg: normal equations not positive definite");
}

struct GbtFitResult {
    std::vector<GbtTree> trees;
    double base_score = 0;
    std::vector<double> round_losses;
};

GbtFitResult fit_gbt(const ClassifierSpec& spec,
                     const std::vector<std::vector<double>>& X,
                     const std::vector<std::uint8_t>& y,
                     const std::vector<double>& w) {
    const std::size_t n = X.size();
    const std::size_t dim = X[0].size();
    const int n_trees = static_cast<int>(spec.get("n_trees"));
    const int max_depth = static_cast<int>(spec.get("max_depth"));
    const double lr = spec.get("learning_rate");
    const std::size_t min_leaf = static_cast<std::size_t>(spec.get("min_leaf"));
    const double subsample = spec.get("subsample");

    GbtFitResult res;
    {
        double pos = 0, tot = 0;
        for (std::size_t i = 0; i < n; ++i) {
            pos += y[i] ? w[i] : 0.0;
            tot += w[i];
        }
        const double rate = clamp_prob(pos / tot);
        res.base_score = std::log(rate / (1.0 - rate));
    }

    std::vector<double> margin(n, res.base_score);
    auto training_loss = [&] {
        double loss = 0;
        for (std::size_t i = 0; i < n; ++i) {
            const double p = clamp_prob(sigmoid(margin[i]));
            loss -= w[i] * (y[i] ? std::log(p) : std::log(1.0 - p));
        }
        return loss;
    };

    std::mt19937_64 rng(spec.seed);
    std::vector<std::size_t> all_rows(n);
    std::iota(all_rows.begin(), all_rows.end(), 0);

    for (int t = 0; t < n_trees; ++t) {
        std::vector<std::size_t> rows = all_rows;
        if (subsample < 1.0) {
            std::shuffle(rows.begin(), rows.end(), rng);
            rows.resize(std::max<std::size_t>(
                1, static_cast<std::size_t>(subsample * static_cast<double>(n))));
            std::sort(rows.begin(), rows.end());
        }

        std::vector<double> grad(n), hess(n);
        for (std::size_t i = 0; i < n; ++i) {
            const double p = sigmoid(margin[i]);
            grad[i] = w[i] * (p - (y[i] ? 1.0 : 0.0));
            hess[i] = std::max(kHessFloor, w[i] * p * (1.0 - p));
        }

        GbtTree tree;
        // (node, rows, depth) work list; exact greedy Newton-gain splits.
        struct Item {
            int node;
            std::vector<std::size_t> rows;
            int depth;
        };
        tree.nodes.push_back({});
        std::vector<Item> work;
        work.push_back({0, std::move(rows), 0});
        while (!work.empty()) {
            Item item = std::move(work.back());
            work.pop_back();
            auto& node_rows = item.rows;

            double G = 0, H = 0;
            for (auto i : node_rows) {
                G += grad[i];
                H += hess[i];
            }
            const double leaf_value = -G / (H + kGbtLambda) * lr;

            bool split_found = false;
            int best_feature = -1;
            double best_threshold = 0, best_gain = 0;
            if (item.depth < max_depth && node_rows.size() >= 2 * min_leaf) {
                const double parent = G * G / (H + kGbtLambda);
                for (std::size_t f = 0; f < dim; ++f) {
                    std::vector<std::size_t> order = node_rows;
                    std::stable_sort(order.begin(), order.end(),
                                     [&](std::size_t a, std::size_t b) {
                                         return X[a][f] < X[b][f];
                                     });
                    double GL = 0, HL = 0;
                    for (std::size_t k = 0; k + 1 < order.size(); ++k) {
                        GL += grad[order[k]];
                        HL += hess[order[k]];
                        if (k + 1 < min_leaf || order.size() - k - 1 < min_leaf)
                            continue;
                        const double xl = X[order[k]][f];
                        const double xr = X[order[k + 1]][f];
                        if (xl == xr) continue;
                        const double GR = G - GL, HR = H - HL;
                        const double gain = GL * GL / (HL + kGbtLambda) +
                                            GR * GR / (HR + kGbtLambda) - parent;
                        // Scan order (ascending feature, then threshold) makes
                        // the first max-gain candidate the tie-break winner.
                        if (gain > best_gain + 1e-12 && gain > 1e-12) {
                            best_gain = gain;
                            best_feature = static_cast<int>(f);
                            best_threshold = xl + 0.5 * (xr - xl);
                            split_found = true;
                        }
                    }
                }
            }

            if (!split_found) {
                tree.nodes[item.node].feature = -1;
                tree.nodes[item.node].value = leaf_value;
                continue;
            }
            std::vector<std::size_t> left_rows, right_rows;
            for (auto i : node_rows)
                (X[i][best_feature] <= best_threshold ? left_rows : right_rows)
                    .push_back(i);
            const int left = static_cast<int>(tree.nodes.size());
            tree.nodes.push_back({});
            const int right = static_cast<int>(tree.nodes.size());
            tree.nodes.push_back({});
            tree.nodes[item.node].feature = best_feature;
            tree.nodes[item.node].threshold = best_threshold;
            tree.nodes[item.node].left = left;
            tree.nodes[item.node].right = right;
            work.push_back({left, std::move(left_rows), item.depth + 1});
            work.push_back({right, std::move(right_rows), item.depth + 1});
        }

        for (std::size_t i = 0; i < n; ++i) margin[i] += tree.predict(X[i]);
        res.trees.push_back(std::move(tree));
        res.round_losses.push_back(training_loss());
    }
    if (res.round_losses.empty()) res.round_losses.push_back(training_loss());
    return res;
}

struct LogRegFitResult {
    std::vector<double> weights;
    double intercept = 0;
};

/// Damped IRLS on the weighted penalized negative log-likelihood
///   J(beta) = sum_i w_i * nll_i + l2/2 * ||weights||^2   (intercept free).
LogRegFitResult fit_logreg(const ClassifierSpec& spec,
                           const std::vector<std::vector<double>>& X,
                           const std::vector<std::uint8_t>& y,
                           const std::vector<double>& w) {
    const std::size_t n = X.size();
    const std::size_t dim = X[0].size();
    const double l2 = spec.get("l2_penalty");
    const int max_iter = static_cast<int>(spec.get("max_iter"));
    const double tol = spec.get("tol");

    const std::size_t d = dim + 1;  // intercept last
    std::vector<double> beta(d, 0.0);

    auto probs = [&](const std::vector<double>& b, std::vector<double>& p) {
        for (std::size_t i = 0; i < n; ++i) {
            double z = b[dim];
            for (std::size_t f = 0; f < dim; ++f) z += b[f] * X[i][f];
            p[i] = sigmoid(z);
        }
    };
    auto objective = [&](const std::vector<double>& b,
                         const std::vector<double>& p) {
        double J = 0;
        for (std::size_t i = 0; i < n; ++i) {
            const double q = clamp_prob(p[i]);
            J -= w[i] * (y[i] ? std::log(q) : std::log(1.0 - q));
        }
        for (std::size_t f = 0; f < dim; ++f) J += 0.5 * l2 * b[f] * b[f];
        return J;
    };
    auto gradient = [&](const std::vector<double>& b,
                        const std::vector<double>& p, std::vector<double>& g) {
        std::fill(g.begin(), g.end(), 0.0);
        for (std::size_t i = 0; i < n; ++i) {
            const double r = w[i] * (p[i] - (y[i] ? 1.0 : 0.0));
            for (std::size_t f = 0; f < dim; ++f) g[f] += r * X[i][f];
            g[dim] += r;
        }
        for (std::size_t f = 0; f < dim; ++f) g[f] += l2 * b[f];
    };

    std::vector<double> p(n), g(d);
    probs(beta, p);
    double J = objective(beta, p);

    for (int iter = 0; iter < max_iter; ++iter) {
        gradient(beta, p, g);

        // Newton direction from the IRLS normal equations.
        std::vector<double> A(d * d, 0.0);
        for (std::size_t i = 0; i < n; ++i) {
            const double h = std::max(kHessFloor, w[i] * p[i] * (1.0 - p[i]));
            for (std::size_t a = 0; a < dim; ++a) {
                for (std::size_t b2 = a; b2 < dim; ++b2)
                    A[a * d + b2] += h * X[i][a] * X[i][b2];
                A[a * d + dim] += h * X[i][a];
            }
            A[dim * d + dim] += h;
        }
        for (std::size_t f = 0; f < dim; ++f) A[f * d + f] += l2;
        for (std::size_t a = 0; a < d; ++a)
            for (std::size_t b2 = 0; b2 < a; ++b2) A[a * d + b2] = A[b2 * d + a];

        std::vector<double> rhs(d);
        for (std::size_t k = 0; k < d; ++k) rhs[k] = -g[k];
        std::vector<double> step = spd_solve(std::move(A), std::move(rhs));

        // Damping: halve until the objective stops increasing.
        double scale = 1.0;
        std::vector<double> cand(d), pc(n);
        double Jc = J;
        for (int half = 0; half < 30; ++half) {
            for (std::size_t k = 0; k < d; ++k)
                cand[k] = beta[k] + scale * step[k];
            probs(cand, pc);
            Jc = objective(cand, pc);
            if (Jc <= J + 1e-12) break;
            scale *= 0.5;
        }
        double max_update = 0;
        for (std::size_t k = 0; k < d; ++k)
            max_update = std::max(max_update, std::abs(scale * step[k]));
        beta = cand;
        p = pc;
        J = Jc;

        if (max_update < tol) {
            gradient(beta, p, g);
            double gmax = 0;
            for (double v : g) gmax = std::max(gmax, std::abs(v));
            if (gmax <= 10.0 * tol) break;  // converged per contract
        }
    }

    LogRegFitResult res;
    res.weights.assign(beta.begin(), beta.begin() + dim);
    res.intercept = beta[dim];
    return res;
}

}  // namespace

double sigmoid(double z) { return 1.0 / (1.0 + std::exp(-z)); }

std::string to_string(ClassifierKind kind) {
    return kind == ClassifierKind::gbt ? "gbt" : "logreg";
}

ClassifierKind classifier_kind_from_string(const std::string& s) {
    if (s == "gbt") return ClassifierKind::gbt;
    if (s == "logreg") return ClassifierKind::logreg;
    throw std::invalid_argument("unknown classifier kind '" + s + "'");
}

ClassifierSpec ClassifierSpec::defaults(ClassifierKind kind,
                                        std::uint64_t seed) {
    ClassifierSpec spec;
    spec.kind = kind;
    spec.seed = seed;
    if (kind == ClassifierKind::gbt) {
        spec.params = {{"n_trees", 50},
                       {"max_depth", 3},
                       {"learning_rate", 0.2},
                       {"min_leaf", 5},
                       {"subsample", 1.0}};
    } else {
        spec.params = {{"l2_penalty", 1.0}, {"max_iter", 100}, {"tol", 1e-8}};
    }
    return spec;
}

void ClassifierSpec::validate() const {
    const auto& ranges =
        kind == ClassifierKind::gbt ? gbt_ranges() : logreg_ranges();
    for (const auto& [name, value] : params) {
        auto it = ranges.find(name);
        if (it == ranges.end())
            throw std::invalid_argument("classifier spec: unknown key '" + name +
                                        "' for kind " + to_string(kind));
        if (!(value >= it->second.lo && value <= it->second.hi))
            throw std::invalid_argument("classifier spec: '" + name +
                                        "' out of range");
    }
    for (const auto& [name, range] : ranges)
        if (!params.count(name))
            throw std::invalid_argument("classifier spec: missing key '" + name +
                                        "'");
}

double ClassifierSpec::get(const std::string& name) const {
    auto it = params.find(name);
    if (it == params.end())
        throw std::invalid_argument("classifier spec: missing key '" + name + "'");
    return it->second;
}

nlohmann::json ClassifierSpec::to_json() const {
    return {{"kind", to_string(kind)}, {"params", params}, {"seed", seed}};
}

ClassifierSpec ClassifierSpec::from_json(const nlohmann::json& j) {
    ClassifierSpec spec;
    spec.kind = classifier_kind_from_string(j.at("kind").get<std::string>());
    spec.params = j.at("params").get<std::map<std::string, double>>();
    spec.seed = j.at("seed").get<std::uint64_t>();
    return spec;
}

double GbtTree::predict(const std::vector<double>& x) const {
    int node = 0;
    while (nodes[node].feature >= 0)
        node = x[nodes[node].feature] <= nodes[node].threshold
                   ? nodes[node].left
                   : nodes[node].right;
    return nodes[node].value;
}

double TrainedClassifier::predict_one(const std::vector<double>& x) const {
    if (x.size() != feature_dim_)
        throw std::invalid_argument("predict: feature dimension mismatch");
    for (double v : x)
        if (!std::isfinite(v))
            throw std::invalid_argument("predict: non-finite feature");
    switch (form_) {
        case Form::constant:
            return constant_;
        case Form::gbt: {
            double z = base_score_;
            for (const auto& tree : trees_) z += tree.predict(x);
            return clamp_prob(sigmoid(z));
        }
        case Form::logreg: {
            double z = intercept_;
            for (std::size_t f = 0; f < feature_dim_; ++f)
                z += weights_[f] * x[f];
            return clamp_prob(sigmoid(z));
        }
    }
    return 0.5;
}

std::vector<double> TrainedClassifier::predict_proba(
    const std::vector<std::vector<double>>& X) const {
    std::vector<double> out;
    out.reserve(X.size());
    for (const auto& x : X) out.push_back(predict_one(x));
    return out;
}

TrainedClassifier fit(const ClassifierSpec& spec,
                      const std::vector<std::vector<double>>& X,
                      const std::vector<std::uint8_t>& y,
                      const std::vector<std::string>& feature_names) {
    spec.validate();
    if (X.empty() || X.size() != y.size())
        throw std::invalid_argument("fit: |X| must equal |y| and be >= 1");
    const std::size_t dim = X[0].size();
    for (const auto& row : X) {
        if (row.size() != dim)
            throw std::invalid_argument("fit: ragged feature matrix");
        for (double v : row)
            if (!std::isfinite(v))
                throw std::invalid_argument("fit: non-finite feature");
    }

    TrainedClassifier model;
    model.spec_ = spec;
    model.feature_dim_ = dim;
    model.feature_names_ = feature_names;

    std::size_t positives = 0;
    for (auto v : y) positives += v;
    if (positives == 0 || positives == y.size()) {
        model.form_ = TrainedClassifier::Form::constant;
        model.constant_ = clamp_prob(static_cast<double>(positives) /
                                     static_cast<double>(y.size()));
        return model;
    }

    // Positive-class weight = negatives/positives.
    const double pos_weight =
        static_cast<double>(y.size() - positives) / static_cast<double>(positives);
    std::vector<double> w(y.size());
    for (std::size_t i = 0; i < y.size(); ++i) w[i] = y[i] ? pos_weight : 1.0;

    if (spec.kind == ClassifierKind::gbt) {
        auto res = fit_gbt(spec, X, y, w);
        model.form_ = TrainedClassifier::Form::gbt;
        model.trees_ = std::move(res.trees);
        model.base_score_ = res.base_score;
        model.round_losses_ = std::move(res.round_losses);
    } else {
        auto res = fit_logreg(spec, X, y, w);
        model.form_ = TrainedClassifier::Form::logreg;
        model.weights_ = std::move(res.weights);
        model.intercept_ = res.intercept;
    }
    return model;
}

nlohmann::json TrainedClassifier::to_json() const {
    nlohmann::json j;
    j["version"] = 1;
    j["spec"] = spec_.to_json();
    j["feature_dim"] = feature_dim_;
    j["feature_names"] = feature_names_;
    switch (form_) {
        case Form::constant:
            j["form"] = "constant";
            j["constant"] = constant_;
            break;
        case Form::gbt: {
            j["form"] = "gbt";
            j["base_score"] = base_score_;
            nlohmann::json trees = nlohmann::json::array();
            for (const auto& tree : trees_) {
                nlohmann::json nodes = nlohmann::json::array();
                for (const auto& node : tree.nodes)
                    nodes.push_back({{"f", node.feature},
                                     {"t", node.threshold},
                                     {"v", node.value},
                                     {"l", node.left},
                                     {"r", node.right}});
                trees.push_back(std::move(nodes));
            }
            j["trees"] = std::move(trees);
            break;
        }
        case Form::logreg:
            j["form"] = "logreg";
            j["weights"] = weights_;
            j["intercept"] = intercept_;
            break;
    }
    return j;
}

TrainedClassifier TrainedClassifier::from_json(const nlohmann::json& j) {
    TrainedClassifier model;
    model.spec_ = ClassifierSpec::from_json(j.at("spec"));
    model.feature_dim_ = j.at("feature_dim").get<std::size_t>();
    model.feature_names_ =
        j.at("feature_names").get<std::vector<std::string>>();
    const std::string form = j.at("form").get<std::string>();
    if (form == "constant") {
        model.form_ = Form::constant;
        model.constant_ = j.at("constant").get<double>();
    } else if (form == "gbt") {
        model.form_ = Form::gbt;
        model.base_score_ = j.at("base_score").get<double>();
        for (const auto& tj : j.at("trees")) {
            GbtTree tree;
            for (const auto& nj : tj)
                tree.nodes.push_back({nj.at("f").get<int>(),
                                      nj.at("t").get<double>(),
                                      nj.at("v").get<double>(),
                                      nj.at("l").get<int>(),
                                      nj.at("r").get<int>()});
            model.trees_.push_back(std::move(tree));
        }
    } else if (form == "logreg") {
        model.form_ = Form::logreg;
        model.weights_ = j.at("weights").get<std::vector<double>>();
        model.intercept_ = j.at("intercept").get<double>();
    } else {
        throw std::invalid_argument("unknown model form '" + form + "'");
    }
    return model;
}

}  // namespace telem
