#include "satcore/selective.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <stdexcept>

#include "satcore/error.hpp"
#include "trainer_impl.hpp"

namespace sat {

LossValueGrad selective_loss_grad(const Tensor& probs,
                                  std::span<const double> target_on_label,
                                  const std::vector<std::uint32_t>& label_indices) {
    const std::size_t m = probs.rows(), cp1 = probs.cols();
    if (cp1 < 2) throw std::invalid_argument("selective loss: need >= 2 outputs");
    const std::size_t abstain = cp1 - 1;
    if (target_on_label.size() != m || label_indices.size() != m)
        throw std::invalid_argument("selective loss: batch length mismatch");

    LossValueGrad out;
    out.dlogits = Tensor(m, cp1);
    const double inv_m = 1.0 / static_cast<double>(m);
    double total = 0.0;
    for (std::size_t i = 0; i < m; ++i) {
        const std::size_t y = label_indices[i];
        if (y >= abstain)
            throw std::invalid_argument("selective loss: label index out of range");
        auto pr = probs.row(i);
        const double a = target_on_label[i];
        const double py = pr[y], pc = pr[abstain];
        const bool live_y = py > kProbFloor;
        const bool live_c = pc > kProbFloor;
        const double term = -(a * std::log(std::max(py, kProbFloor)) +
                              (1.0 - a) * std::log(std::max(pc, kProbFloor)));
        if (!std::isfinite(term))
            throw DivergenceError("non-finite abstention loss term", 0, 0,
                                  static_cast<std::ptrdiff_t>(i));
        total += term;
        // gradient of -[a log p_y + (1-a) log p_c] w.r.t. the logits
        const double mass = (live_y ? a : 0.0) + (live_c ? 1.0 - a : 0.0);
        auto gr = out.dlogits.row(i);
        for (std::size_t j = 0; j < cp1; ++j) gr[j] = inv_m * mass * pr[j];
        if (live_y) gr[y] -= inv_m * a;
        if (live_c) gr[abstain] -= inv_m * (1.0 - a);
    }
    out.value = total * inv_m;
    return out;
}

double selective_loss(const Tensor& probs, std::span<const double> target_on_label,
                      const std::vector<std::uint32_t>& label_indices) {
    return selective_loss_grad(probs, target_on_label, label_indices).value;
}

SelectivePrediction selective_predict(const SelectiveModel& model, const Tensor& x_row,
                                      double tau) {
    const Tensor logits = model.net.forward(x_row);
    const Tensor probs = softmax(logits);
    auto row = probs.row(0);
    SelectivePrediction pred;
    pred.abstain_score = row[model.abstain_index()];
    if (pred.abstain_score > tau) {
        pred.abstained = true;
    } else {
        pred.predicted_class = argmax_row(row.subspan(0, model.class_count));
    }
    return pred;
}

std::vector<double> abstain_scores(const SelectiveModel& model, const Tensor& inputs) {
    const std::size_t n = inputs.rows(), d = inputs.cols();
    std::vector<double> scores(n);
    constexpr std::size_t kChunk = 512;
    for (std::size_t start = 0; start < n; start += kChunk) {
        const std::size_t m = std::min(kChunk, n - start);
        Tensor chunk(m, d);
        std::memcpy(chunk.data().data(), inputs.data().data() + start * d,
                    m * d * sizeof(double));
        const Tensor probs = softmax(model.net.forward(chunk));
        for (std::size_t r = 0; r < m; ++r)
            scores[start + r] = probs.at(r, model.abstain_index());
    }
    return scores;
}

CalibratedThreshold calibrate_threshold(const std::vector<double>& scores,
                                        double target_coverage) {
    if (scores.empty())
        throw std::invalid_argument("calibrate_threshold: empty score set");
    if (!(target_coverage > 0.0) || target_coverage > 1.0)
        throw std::invalid_argument("calibrate_threshold: coverage must be in (0, 1]");
    std::vector<double> sorted = scores;
    std::sort(sorted.begin(), sorted.end());
    const std::size_t n = sorted.size();
    // Smallest k with k/n >= target; the 1e-9 slack absorbs floating-point
    // round-up in target * n.
    std::size_t k = static_cast<std::size_t>(
        std::ceil(target_coverage * static_cast<double>(n) - 1e-9));
    k = std::clamp<std::size_t>(k, 1, n);
    CalibratedThreshold result;
    result.tau = sorted[k - 1];
    std::size_t covered = 0;
    for (double g : scores)
        if (g <= result.tau) ++covered;
    result.achieved_coverage = static_cast<double>(covered) / static_cast<double>(n);
    return result;
}

std::vector<CoveragePoint> risk_coverage(const SelectiveModel& model,
                                         const LabeledDataset& eval_ds,
                                         const std::vector<double>& coverages) {
    const std::vector<double> scores = abstain_scores(model, eval_ds.inputs);
    const std::size_t n = eval_ds.size();

    // Real-class predictions, computed once.
    std::vector<std::size_t> preds(n);
    {
        constexpr std::size_t kChunk = 512;
        const std::size_t d = eval_ds.dim();
        for (std::size_t start = 0; start < n; start += kChunk) {
            const std::size_t m = std::min(kChunk, n - start);
            Tensor chunk(m, d);
            std::memcpy(chunk.data().data(), eval_ds.inputs.data().data() + start * d,
                        m * d * sizeof(double));
            const Tensor logits = model.net.forward(chunk);
            for (std::size_t r = 0; r < m; ++r)
                preds[start + r] = argmax_row(logits.row(r).subspan(0, model.class_count));
        }
    }

    std::vector<CoveragePoint> points;
    points.reserve(coverages.size());
    for (double target : coverages) {
        const CalibratedThreshold cal = calibrate_threshold(scores, target);
        CoveragePoint pt;
        pt.coverage_target = target;
        pt.coverage_achieved = cal.achieved_coverage;
        pt.tau = cal.tau;
        std::size_t covered = 0, wrong = 0;
        for (std::size_t i = 0; i < n; ++i) {
            if (scores[i] <= cal.tau) {
                ++covered;
                if (preds[i] != eval_ds.clean_labels[i]) ++wrong;
            }
        }
        if (covered == 0) {
            pt.defined = false;
        } else {
            pt.selective_error = static_cast<double>(wrong) / static_cast<double>(covered);
        }
        points.push_back(pt);
    }
    return points;
}

void emit_risk_coverage_csv(const std::vector<CoveragePoint>& points, std::ostream& out) {
    out << "coverage_target,coverage_achieved,tau,selective_error_pct\n";
    char buf[160];
    for (const CoveragePoint& pt : points) {
        if (!pt.defined) {
            std::snprintf(buf, sizeof(buf), "%.17g,%.17g,%.17g,undefined\n",
                          pt.coverage_target, pt.coverage_achieved, pt.tau);
        } else {
            std::snprintf(buf, sizeof(buf), "%.17g,%.17g,%.17g,%.17g\n", pt.coverage_target,
                          pt.coverage_achieved, pt.tau, pt.selective_error * 100.0);
        }
        out << buf;
    }
}

void emit_risk_coverage_csv(const std::vector<CoveragePoint>& points,
                            const std::string& path) {
    std::ofstream out(path, std::ios::trunc);
    if (!out) throw std::invalid_argument("cannot open file for writing: " + path);
    emit_risk_coverage_csv(points, out);
}

SelectiveTrainResult train_selective(const LabeledDataset& train_ds,
                                     const LabeledDataset& val_ds, const MlpSpec& mlp,
                                     const SelectiveTrainConfig& cfg) {
    detail::EngineConfig engine;
    engine.mode = detail::EngineMode::Selective;
    engine.sat = cfg.sat;
    engine.optim = cfg.optim;
    engine.epochs = cfg.epochs;
    engine.batch_size = cfg.batch_size;
    engine.seed = cfg.seed;
    engine.check_invariants = cfg.check_invariants;
    engine.epoch_callback = cfg.epoch_callback;
    TrainResult r = detail::run_training(train_ds, val_ds, mlp, engine);

    SelectiveTrainResult out;
    out.model.net = std::move(r.model);
    out.model.class_count = train_ds.class_count;
    out.store = std::move(r.store);
    out.log = std::move(r.log);
    return out;
}

}  // namespace sat
