#pragma once

#include <cstdint>
#include <json.hpp>
#include <map>
#include <memory>
#include <string>
#include <vector>

namespace telem {

enum class ClassifierKind { gbt, logreg };

std::string to_string(ClassifierKind kind);
ClassifierKind classifier_kind_from_string(const std::string& s);

/// Hyperparameter bundle. Unknown keys and out-of-range values are rejected
/// at validation time.
///   gbt:    n_trees, max_depth, learning_rate, min_leaf, subsample
///   logreg: l2_penalty, max_iter, tol
struct ClassifierSpec {
    ClassifierKind kind = ClassifierKind::gbt;
    std::map<std::string, double> params;
    std::uint64_t seed = 0;

    static ClassifierSpec defaults(ClassifierKind kind, std::uint64_t seed = 0);
    void validate() const;
    double get(const std::string& name) const;

    nlohmann::json to_json() const;
    static ClassifierSpec from_json(const nlohmann::json& j);
};

struct GbtNode {
    int feature = -1;       // -1 marks a leaf
    double threshold = 0;   // go left when x[feature] <= threshold
    double value = 0;       // leaf contribution (log-odds space)
    int left = -1;
    int right = -1;
};

struct GbtTree {
    std::vector<GbtNode> nodes;
    double predict(const std::vector<double>& x) const;
};

/// Immutable fitted binary classifier behind one probabilistic interface.
class TrainedClassifier {
  public:
    TrainedClassifier() = default;

    double predict_one(const std::vector<double>& x) const;
    std::vector<double> predict_proba(
        const std::vector<std::vector<double>>& X) const;

    const ClassifierSpec& spec() const { return spec_; }
    std::size_t feature_dim() const { return feature_dim_; }
    const std::vector<std::string>& feature_names() const {
        return feature_names_;
    }

    nlohmann::json to_json() const;
    static TrainedClassifier from_json(const nlohmann::json& j);

    // Fitted state, exposed for inspection in tests.
    enum class Form { constant, gbt, logreg };
    Form form() const { return form_; }
    const std::vector<GbtTree>& trees() const { return trees_; }
    const std::vector<double>& weights() const { return weights_; }
    double intercept() const { return intercept_; }
    double base_score() const { return base_score_; }
    const std::vector<double>& round_losses() const { return round_losses_; }

  private:
    friend TrainedClassifier fit(const ClassifierSpec&,
                                 const std::vector<std::vector<double>>&,
                                 const std::vector<std::uint8_t>&,
                                 const std::vector<std::string>&);

    ClassifierSpec spec_;
    std::size_t feature_dim_ = 0;
    std::vector<std::string> feature_names_;
    Form form_ = Form::constant;

    double constant_ = 0.5;

    std::vector<GbtTree> trees_;
    double base_score_ = 0;          // log-odds prior
    std::vector<double> round_losses_;  // training loss after each round

    std::vector<double> weights_;
    double intercept_ = 0;
};

/// Trains per the spec kind. Single-class targets yield a constant-probability
/// classifier at the clamped empirical rate. Positive-class weighting
/// (negatives/positives) is applied in both losses.
TrainedClassifier fit(const ClassifierSpec& spec,
                      const std::vector<std::vector<double>>& X,
                      const std::vector<std::uint8_t>& y,
                      const std::vector<std::string>& feature_names = {});

double sigmoid(double z);

}  // namespace telem
