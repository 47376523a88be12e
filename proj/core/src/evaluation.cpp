#include "cbd/evaluation.hpp"

#include "cbd/error.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <numeric>

namespace cbd {
namespace {

void check_inputs(std::span<const double> p, std::span<const int> y) {
    if (p.size() != y.size())
        throw DataError("probabilities and labels differ in length (" + std::to_string(p.size()) + " vs " +
                        std::to_string(y.size()) + ")");
    if (p.empty()) throw DataError("cannot evaluate an empty prediction set");
    for (int label : y)
        if (label != 0 && label != 1) throw DataError("labels must be 0 or 1");
    for (double v : p)
        if (!std::isfinite(v)) throw DataError("non-finite score");
}

ClassMetrics class_metrics(std::size_t tp, std::size_t fp, std::size_t fn) {
    ClassMetrics m;
    if (tp + fp == 0) m.precision_undefined = true;
    else m.precision = static_cast<double>(tp) / static_cast<double>(tp + fp);
    if (tp + fn == 0) m.recall_undefined = true;
    else m.recall = static_cast<double>(tp) / static_cast<double>(tp + fn);
    if (m.precision + m.recall > 0) m.f1 = 2.0 * m.precision * m.recall / (m.precision + m.recall);
    else m.f1_undefined = true;
    return m;
}

std::string format_double(double v) {
    if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

}  // namespace

ConfusionMatrix confusion(std::span<const double> probabilities, std::span<const int> labels, double threshold) {
    check_inputs(probabilities, labels);
    ConfusionMatrix cm;
    for (std::size_t i = 0; i < probabilities.size(); ++i) {
        const bool predicted = probabilities[i] >= threshold;
        if (labels[i] == 1) (predicted ? cm.tp : cm.fn)++;
        else (predicted ? cm.fp : cm.tn)++;
    }
    return cm;
}

MetricValues metrics(const ConfusionMatrix& cm) {
    if (cm.total() == 0) throw DataError("confusion matrix is empty");
    MetricValues v;
    v.positive = class_metrics(cm.tp, cm.fp, cm.fn);
    v.negative = class_metrics(cm.tn, cm.fn, cm.fp);
    v.accuracy = static_cast<double>(cm.tp + cm.tn) / static_cast<double>(cm.total());
    v.macro_precision = 0.5 * (v.positive.precision + v.negative.precision);
    v.macro_recall = 0.5 * (v.positive.recall + v.negative.recall);
    v.macro_f1 = 0.5 * (v.positive.f1 + v.negative.f1);
    return v;
}

RocCurve roc_curve(std::span<const double> probabilities, std::span<const int> labels) {
    check_inputs(probabilities, labels);
    const auto positives = static_cast<std::size_t>(std::count(labels.begin(), labels.end(), 1));
    const std::size_t negatives = labels.size() - positives;
    if (positives == 0 || negatives == 0) throw DataError("ROC needs both positive and negative labels");

    std::vector<std::size_t> order(probabilities.size());
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::stable_sort(order.begin(), order.end(),
                     [&](std::size_t a, std::size_t b) { return probabilities[a] > probabilities[b]; });

    RocCurve curve;
    curve.points.push_back({std::numeric_limits<double>::infinity(), 0.0, 0.0});
    std::size_t tp = 0, fp = 0;
    for (std::size_t k = 0; k < order.size();) {
        const double score = probabilities[order[k]];
        while (k < order.size() && probabilities[order[k]] == score) {
            (labels[order[k]] == 1 ? tp : fp)++;
            ++k;
        }
        curve.points.push_back({score, static_cast<double>(fp) / static_cast<double>(negatives),
                                static_cast<double>(tp) / static_cast<double>(positives)});
    }
    return curve;
}

double auc(const RocCurve& curve) {
    double area = 0.0;
    for (std::size_t k = 1; k < curve.points.size(); ++k) {
        const auto& a = curve.points[k - 1];
        const auto& b = curve.points[k];
        area += (b.fpr - a.fpr) * (a.tpr + b.tpr) * 0.5;
    }
    return area;
}

Evaluation evaluate_run(std::string model_tag, std::span<const double> probabilities, std::span<const int> labels,
                        bool slang, double threshold) {
    Evaluation e;
    e.report.model = std::move(model_tag);
    e.report.slang = slang;
    e.report.threshold = threshold;
    e.report.n = probabilities.size();
    e.report.confusion = confusion(probabilities, labels, threshold);
    e.report.values = metrics(e.report.confusion);
    e.roc = roc_curve(probabilities, labels);
    e.report.auc = auc(e.roc);
    return e;
}

nlohmann::json to_json(const MetricsReport& r) {
    const auto& v = r.values;
    nlohmann::json j;
    j["model"] = r.model;
    j["slang"] = r.slang;
    j["threshold"] = r.threshold;
    j["n"] = r.n;
    j["precision"] = v.positive.precision;
    j["recall"] = v.positive.recall;
    j["f1"] = v.positive.f1;
    j["accuracy"] = v.accuracy;
    j["auc"] = r.auc;
    j["confusion"] = {{"tp", r.confusion.tp}, {"fp", r.confusion.fp}, {"tn", r.confusion.tn}, {"fn", r.confusion.fn}};
    j["degenerate"] = {{"precision", v.positive.precision_undefined},
                       {"recall", v.positive.recall_undefined},
                       {"f1", v.positive.f1_undefined}};
    j["negative_class"] = {{"precision", v.negative.precision}, {"recall", v.negative.recall}, {"f1", v.negative.f1}};
    j["macro"] = {{"precision", v.macro_precision}, {"recall", v.macro_recall}, {"f1", v.macro_f1}};
    return j;
}

void write_roc_csv(const std::filesystem::path& path, const RocCurve& curve) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw DataError("cannot write " + path.string());
    out << "threshold,fpr,tpr\n";
    for (const auto& p : curve.points)
        out << format_double(p.threshold) << ',' << format_double(p.fpr) << ',' << format_double(p.tpr) << '\n';
}

void write_evaluation(const std::filesystem::path& dir, const Evaluation& evaluation, const nlohmann::json& config) {
    std::filesystem::create_directories(dir);
    nlohmann::json j = to_json(evaluation.report);
    j["config"] = config;
    std::ofstream out(dir / "metrics.json", std::ios::binary);
    if (!out) throw DataError("cannot write " + (dir / "metrics.json").string());
    out << j.dump(2) << '\n';
    write_roc_csv(dir / "roc.csv", evaluation.roc);
}

}  // namespace cbd
