#include "satcore/adversarial.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <stdexcept>

#include "satcore/rng.hpp"
#include "trainer_impl.hpp"

namespace sat {

void AttackSpec::validate() const {
    if (epsilon < 0.0) throw std::invalid_argument("attack: epsilon must be >= 0");
    if (steps < 1) throw std::invalid_argument("attack: steps must be >= 1");
    if (!(step_size > 0.0)) throw std::invalid_argument("attack: step_size must be > 0");
    if (!(bound_lo < bound_hi)) throw std::invalid_argument("attack: empty pixel bounds");
}

void TradesConfig::validate() const {
    if (inv_lambda < 0.0) throw std::invalid_argument("trades: inv_lambda must be >= 0");
    attack.validate();
}

namespace {

double log_floored(double v) { return std::log(std::max(v, kProbFloor)); }

// Per-row attack objective and its logit gradient.
struct AttackEval {
    std::vector<double> objective;
    std::vector<char> fooled;  // CE objective only
    Tensor dlogits;
};

AttackEval eval_objective(const Tensor& probs, AttackObjective objective,
                          const std::vector<std::uint32_t>& labels, const Tensor& ref,
                          bool with_grad) {
    const std::size_t m = probs.rows(), c = probs.cols();
    AttackEval out;
    out.objective.resize(m);
    out.fooled.assign(m, 0);
    if (with_grad) out.dlogits = Tensor(m, c);

    for (std::size_t i = 0; i < m; ++i) {
        auto pr = probs.row(i);
        if (objective == AttackObjective::CeWrtLabel) {
            const std::size_t y = labels[i];
            out.objective[i] = -log_floored(pr[y]);
            out.fooled[i] = argmax_row(pr) != y;
            if (with_grad) {
                auto gr = out.dlogits.row(i);
                if (pr[y] > kProbFloor) {
                    for (std::size_t j = 0; j < c; ++j) gr[j] = pr[j];
                    gr[y] -= 1.0;
                }
            }
        } else {
            auto rr = ref.row(i);
            double kl = 0.0;
            double cover = 0.0;
            for (std::size_t j = 0; j < c; ++j) {
                kl += rr[j] * (log_floored(rr[j]) - log_floored(pr[j]));
                if (pr[j] > kProbFloor) cover += rr[j];
            }
            out.objective[i] = kl;
            if (with_grad) {
                auto gr = out.dlogits.row(i);
                for (std::size_t j = 0; j < c; ++j)
                    gr[j] = pr[j] * cover - (pr[j] > kProbFloor ? rr[j] : 0.0);
            }
        }
    }
    return out;
}

}  // namespace

Tensor pgd_attack(const MlpModel& model, const Tensor& x0,
                  const std::vector<std::uint32_t>& labels, const AttackSpec& spec,
                  AttackObjective objective, std::uint64_t seed,
                  const std::vector<std::size_t>* sample_indices) {
    spec.validate();
    const std::size_t m = x0.rows(), d = x0.cols();
    if (objective == AttackObjective::CeWrtLabel && labels.size() != m)
        throw std::invalid_argument("pgd_attack: CE objective needs one label per row");
    for (double v : x0.data())
        if (v < spec.bound_lo || v > spec.bound_hi)
            throw std::invalid_argument("pgd_attack: input outside pixel bounds");

    if (spec.epsilon == 0.0) return x0;  // degenerate radius: no-op attack

    Tensor ref;
    if (objective == AttackObjective::KlWrtReference)
        ref = softmax(model.forward(x0));

    // Clean start is the first candidate; it can only be improved upon.
    Tensor best = x0;
    AttackEval best_eval = eval_objective(softmax(model.forward(x0)), objective, labels,
                                          ref, /*with_grad=*/false);

    auto consider = [&](const Tensor& candidate, const AttackEval& eval) {
        for (std::size_t i = 0; i < m; ++i) {
            bool better;
            if (objective == AttackObjective::CeWrtLabel) {
                // A flipped prediction beats any loss value.
                better = eval.fooled[i] > best_eval.fooled[i] ||
                         (eval.fooled[i] == best_eval.fooled[i] &&
                          eval.objective[i] > best_eval.objective[i]);
            } else {
                better = eval.objective[i] > best_eval.objective[i];
            }
            if (better) {
                best_eval.objective[i] = eval.objective[i];
                best_eval.fooled[i] = eval.fooled[i];
                std::memcpy(best.row(i).data(), candidate.row(i).data(),
                            d * sizeof(double));
            }
        }
    };

    auto project = [&](Tensor& x) {
        for (std::size_t i = 0; i < m; ++i) {
            auto xr = x.row(i);
            auto x0r = x0.row(i);
            for (std::size_t j = 0; j < d; ++j) {
                const double lo = std::max(spec.bound_lo, x0r[j] - spec.epsilon);
                const double hi = std::min(spec.bound_hi, x0r[j] + spec.epsilon);
                xr[j] = std::clamp(xr[j], lo, hi);
            }
        }
    };

    // Random start: per-sample streams derived from (seed, sample index).
    Tensor x = x0;
    for (std::size_t i = 0; i < m; ++i) {
        const std::uint64_t idx = sample_indices ? (*sample_indices)[i] : i;
        Rng rng(derive_seed(seed, idx));
        auto xr = x.row(i);
        for (std::size_t j = 0; j < d; ++j)
            xr[j] += rng.uniform(-spec.epsilon, spec.epsilon);
    }
    project(x);

    for (std::size_t step = 0; step < spec.steps; ++step) {
        ForwardCache cache;
        const Tensor& logits = model.forward(x, cache);
        const Tensor probs = softmax(logits);
        AttackEval eval = eval_objective(probs, objective, labels, ref, /*with_grad=*/true);
        consider(x, eval);
        const Tensor dx = model.backward_input(cache, eval.dlogits);
        double* px = x.data().data();
        const double* pg = dx.data().data();
        for (std::size_t k = 0; k < x.size(); ++k) {
            if (pg[k] > 0.0)
                px[k] += spec.step_size;
            else if (pg[k] < 0.0)
                px[k] -= spec.step_size;
        }
        project(x);
    }
    consider(x, eval_objective(softmax(model.forward(x)), objective, labels, ref, false));
    return best;
}

double kl_divergence_mean(const Tensor& p, const Tensor& q) {
    if (!p.same_shape(q)) throw std::invalid_argument("kl: shape mismatch");
    const std::size_t m = p.rows(), c = p.cols();
    double total = 0.0;
    for (std::size_t i = 0; i < m; ++i) {
        auto pr = p.row(i);
        auto qr = q.row(i);
        for (std::size_t j = 0; j < c; ++j)
            total += pr[j] * (log_floored(pr[j]) - log_floored(qr[j]));
    }
    return total / static_cast<double>(m);
}

KlMeanGrad kl_divergence_mean_grad(const Tensor& p, const Tensor& q) {
    if (!p.same_shape(q)) throw std::invalid_argument("kl: shape mismatch");
    const std::size_t m = p.rows(), c = p.cols();
    KlMeanGrad out;
    out.dp_logits = Tensor(m, c);
    out.dq_logits = Tensor(m, c);
    const double inv_m = 1.0 / static_cast<double>(m);
    double total = 0.0;
    std::vector<double> a(c);
    for (std::size_t i = 0; i < m; ++i) {
        auto pr = p.row(i);
        auto qr = q.row(i);
        double kl = 0.0;
        double cover = 0.0;  // p mass on unclamped q slots
        for (std::size_t j = 0; j < c; ++j) {
            a[j] = log_floored(pr[j]) - log_floored(qr[j]);
            kl += pr[j] * a[j];
            if (qr[j] > kProbFloor) cover += pr[j];
        }
        total += kl;
        auto dp = out.dp_logits.row(i);
        auto dq = out.dq_logits.row(i);
        for (std::size_t j = 0; j < c; ++j) {
            dp[j] = inv_m * pr[j] * (a[j] - kl);
            dq[j] = inv_m * (qr[j] * cover - (qr[j] > kProbFloor ? pr[j] : 0.0));
        }
    }
    out.mean = total * inv_m;
    return out;
}

double trades_sat_loss(const MlpModel& model, const Tensor& x, const Tensor& x_adv,
                       const Tensor& targets, std::span<const double> weights,
                       const TradesConfig& cfg) {
    cfg.validate();
    const Tensor p = softmax(model.forward(x));
    const Tensor q = softmax(model.forward(x_adv));
    return sat_loss(p, targets, weights) + cfg.inv_lambda * kl_divergence_mean(p, q);
}

double robust_accuracy(const MlpModel& model, const LabeledDataset& eval_ds,
                       const AttackSpec& spec, std::uint64_t seed) {
    spec.validate();
    const std::size_t n = eval_ds.size(), d = eval_ds.dim();
    constexpr std::size_t kChunk = 256;
    std::size_t hits = 0;
    for (std::size_t start = 0; start < n; start += kChunk) {
        const std::size_t m = std::min(kChunk, n - start);
        Tensor chunk(m, d);
        std::memcpy(chunk.data().data(), eval_ds.inputs.data().data() + start * d,
                    m * d * sizeof(double));
        std::vector<std::uint32_t> labels(eval_ds.clean_labels.begin() + start,
                                          eval_ds.clean_labels.begin() + start + m);
        std::vector<std::size_t> indices(m);
        for (std::size_t i = 0; i < m; ++i) indices[i] = start + i;
        const Tensor adv =
            pgd_attack(model, chunk, labels, spec, AttackObjective::CeWrtLabel, seed,
                       &indices);
        const Tensor logits = model.forward(adv);
        for (std::size_t r = 0; r < m; ++r)
            if (argmax_row(logits.row(r)) == labels[r]) ++hits;
    }
    return static_cast<double>(hits) / static_cast<double>(n);
}

TrainResult train_adversarial(const LabeledDataset& train_ds,
                              const LabeledDataset& val_ds, const MlpSpec& mlp,
                              const AdvTrainConfig& cfg) {
    detail::EngineConfig engine;
    engine.mode = cfg.mode == AdvTrainMode::Trades ? detail::EngineMode::Trades
                                                   : detail::EngineMode::TradesSat;
    engine.sat = cfg.sat;
    engine.optim = cfg.optim;
    engine.trades = cfg.trades;
    engine.epochs = cfg.epochs;
    engine.batch_size = cfg.batch_size;
    engine.seed = cfg.seed;
    engine.robust_eval_every = cfg.robust_eval_every;
    engine.eval_attack = cfg.eval_attack;
    engine.check_invariants = cfg.check_invariants;
    engine.epoch_callback = cfg.epoch_callback;
    return detail::run_training(train_ds, val_ds, mlp, engine);
}

void emit_robustness_csv(const std::vector<EpochRecord>& log, std::ostream& out) {
    out << "epoch,clean_acc,robust_acc\n";
    char buf[120];
    for (const EpochRecord& r : log) {
        if (!r.robust_acc) continue;
        std::snprintf(buf, sizeof(buf), "%zu,%.17g,%.17g\n", r.epoch, r.acc_clean_val,
                      *r.robust_acc);
        out << buf;
    }
}

void emit_robustness_csv(const std::vector<EpochRecord>& log, const std::string& path) {
    std::ofstream out(path, std::ios::trunc);
    if (!out) throw std::invalid_argument("cannot open file for writing: " + path);
    emit_robustness_csv(log, out);
}

}  // namespace sat
