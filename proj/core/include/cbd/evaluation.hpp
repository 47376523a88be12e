#pragma once

#include <nlohmann/json.hpp>

#include <cstddef>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

namespace cbd {

/// Positive class is CYBERBULLYING (label 1).
struct ConfusionMatrix {
    std::size_t tp = 0, fp = 0, tn = 0, fn = 0;
    std::size_t total() const noexcept { return tp + fp + tn + fn; }
    friend bool operator==(const ConfusionMatrix&, const ConfusionMatrix&) = default;
};

inline constexpr double kDefaultThreshold = 0.5;

/// prediction = (p >= threshold). Throws DataError on empty or mismatched
/// inputs, or labels outside {0, 1}.
ConfusionMatrix confusion(std::span<const double> probabilities, std::span<const int> labels,
                          double threshold = kDefaultThreshold);

struct ClassMetrics {
    double precision = 0, recall = 0, f1 = 0;
    // Set when the corresponding denominator was zero and the value forced to 0.
    bool precision_undefined = false, recall_undefined = false, f1_undefined = false;
};

struct MetricValues {
    ClassMetrics positive;  // CYBERBULLYING
    ClassMetrics negative;  // NORMAL
    double accuracy = 0;
    double macro_precision = 0, macro_recall = 0, macro_f1 = 0;
};

/// Throws DataError when cm.total() == 0.
MetricValues metrics(const ConfusionMatrix& cm);

struct RocPoint {
    double threshold;  // +inf for the (0,0) sentinel
    double fpr;
    double tpr;
};

struct RocCurve {
    std::vector<RocPoint> points;  // starts at (0,0), ends at (1,1)
};

/// Sweep the distinct scores in descending order; tied scores share a point.
/// Throws DataError unless both classes are present.
RocCurve roc_curve(std::span<const double> probabilities, std::span<const int> labels);

/// Trapezoidal area under the curve points.
double auc(const RocCurve& curve);

struct MetricsReport {
    std::string model;
    bool slang = true;
    double threshold = kDefaultThreshold;
    std::size_t n = 0;
    ConfusionMatrix confusion;
    MetricValues values;
    double auc = 0;

    double precision() const noexcept { return values.positive.precision; }
    double recall() const noexcept { return values.positive.recall; }
    double f1() const noexcept { return values.positive.f1; }
    double accuracy() const noexcept { return values.accuracy; }
};

struct Evaluation {
    MetricsReport report;
    RocCurve roc;
};

Evaluation evaluate_run(std::string model_tag, std::span<const double> probabilities, std::span<const int> labels,
                        bool slang, double threshold = kDefaultThreshold);

/// Stable keys: precision, recall, f1, accuracy, auc, threshold, n, model,
/// slang; plus confusion, degenerate, negative_class and macro blocks.
nlohmann::json to_json(const MetricsReport& report);

/// Writes `<dir>/metrics.json` (report plus a "config" member) and
/// `<dir>/roc.csv` (threshold,fpr,tpr).
void write_evaluation(const std::filesystem::path& dir, const Evaluation& evaluation,
                      const nlohmann::json& config = nlohmann::json::object());
void write_roc_csv(const std::filesystem::path& path, const RocCurve& curve);

}  // namespace cbd
