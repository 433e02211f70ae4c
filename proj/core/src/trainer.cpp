#include "trainer_impl.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <numeric>
#include <stdexcept>

#include "satcore/error.hpp"
#include "satcore/rng.hpp"
#include "satcore/selective.hpp"

namespace sat::detail {

namespace {

constexpr std::size_t kEvalChunk = 512;

bool uses_ema(EngineMode mode) {
    return mode == EngineMode::Sat || mode == EngineMode::SatSce ||
           mode == EngineMode::Selective || mode == EngineMode::TradesSat;
}

bool is_trades(EngineMode mode) {
    return mode == EngineMode::Trades || mode == EngineMode::TradesSat;
}

void gather_rows(const Tensor& src, const std::vector<std::size_t>& idx, Tensor& dst) {
    const std::size_t d = src.cols();
    for (std::size_t r = 0; r < idx.size(); ++r)
        std::memcpy(dst.row(r).data(), src.row(idx[r]).data(), d * sizeof(double));
}

void check_logits_finite(const Tensor& logits, const std::vector<std::size_t>& idx,
                         std::size_t epoch, std::size_t batch) {
    for (std::size_t r = 0; r < logits.rows(); ++r)
        for (double v : logits.row(r))
            if (!std::isfinite(v))
                throw DivergenceError("non-finite logits", epoch, batch,
                                      static_cast<std::ptrdiff_t>(idx[r]));
}

}  // namespace

std::pair<double, double> accuracy_pair(const MlpModel& model, const Tensor& inputs,
                                        const std::vector<std::uint32_t>& labels_a,
                                        const std::vector<std::uint32_t>& labels_b,
                                        std::size_t restrict_classes) {
    const std::size_t n = inputs.rows(), d = inputs.cols();
    if (labels_a.size() != n || labels_b.size() != n)
        throw std::invalid_argument("accuracy: label count mismatch");
    std::size_t hits_a = 0, hits_b = 0;
    for (std::size_t start = 0; start < n; start += kEvalChunk) {
        const std::size_t m = std::min(kEvalChunk, n - start);
        Tensor chunk(m, d);
        std::memcpy(chunk.data().data(), inputs.data().data() + start * d,
                    m * d * sizeof(double));
        const Tensor logits = model.forward(chunk);
        const std::size_t cols =
            restrict_classes > 0 ? restrict_classes : logits.cols();
        for (std::size_t r = 0; r < m; ++r) {
            const std::size_t pred = argmax_row(logits.row(r).subspan(0, cols));
            if (pred == labels_a[start + r]) ++hits_a;
            if (pred == labels_b[start + r]) ++hits_b;
        }
    }
    return {static_cast<double>(hits_a) / static_cast<double>(n),
            static_cast<double>(hits_b) / static_cast<double>(n)};
}

TrainResult run_training(const LabeledDataset& train_ds, const LabeledDataset& val_ds,
                         const MlpSpec& mlp, const EngineConfig& cfg) {
    cfg.sat.validate();
    cfg.optim.validate();
    if (cfg.epochs < 1) throw std::invalid_argument("train: epochs must be >= 1");
    if (cfg.batch_size < 1) throw std::invalid_argument("train: batch_size must be >= 1");
    train_ds.validate();
    val_ds.validate();
    if (val_ds.class_count != train_ds.class_count)
        throw std::invalid_argument("train: train/val class counts differ");
    if (mlp.num_classes != train_ds.class_count)
        throw std::invalid_argument("train: model num_classes must match the dataset");
    if (is_trades(cfg.mode)) cfg.trades.validate();

    const std::size_t n = train_ds.size();
    const std::size_t d = train_ds.dim();
    const std::size_t c = train_ds.class_count;
    const bool selective = cfg.mode == EngineMode::Selective;
    const bool trades = is_trades(cfg.mode);
    const bool ema = uses_ema(cfg.mode);

    MlpSpec eff = mlp;
    if (selective) eff.num_classes = c + 1;

    TrainResult result;
    result.model = MlpModel(eff, derive_seed(cfg.seed, 0));
    if (cfg.initial_store) {
        if (cfg.initial_store->size() != n || cfg.initial_store->classes() != c)
            throw std::invalid_argument("train: initial store does not match the dataset");
        cfg.initial_store->check_simplex(1e-6);
        result.store = *cfg.initial_store;
    } else {
        result.store = init_targets(train_ds);
    }
    OptimizerState opt = make_optimizer(result.model, cfg.optim, cfg.epochs);
    Rng shuffle_rng(derive_seed(cfg.seed, 1));

    std::vector<std::uint32_t> train_noisy(n), val_noisy(val_ds.size());
    for (std::size_t i = 0; i < n; ++i) train_noisy[i] = train_ds.noisy_label_index(i);
    for (std::size_t i = 0; i < val_ds.size(); ++i)
        val_noisy[i] = val_ds.noisy_label_index(i);

    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), 0);

    std::vector<double> renorm(c);
    const std::size_t restrict_classes = selective ? c : 0;

    for (std::size_t e = 1; e <= cfg.epochs; ++e) {
        const double lr = cosine_lr(e - 1, cfg.epochs, cfg.optim.lr0);
        shuffle_rng.shuffle(order);

        double loss_sum = 0.0;
        std::size_t batch_count = 0;
        for (std::size_t start = 0; start < n; start += cfg.batch_size, ++batch_count) {
            const std::size_t m = std::min(cfg.batch_size, n - start);
            std::vector<std::size_t> idx(order.begin() + start, order.begin() + start + m);
            std::sort(idx.begin(), idx.end());  // fixed reduction order

            Tensor x(m, d);
            gather_rows(train_ds.inputs, idx, x);

            ForwardCache cache;
            const Tensor& logits = result.model.forward(x, cache);
            check_logits_finite(logits, idx, e, batch_count);
            const Tensor probs = softmax(logits);

            if (ema && e > cfg.sat.start_epoch) {
                for (std::size_t r = 0; r < m; ++r) {
                    auto target = result.store.targets.row(idx[r]);
                    auto pred = probs.row(r);
                    if (selective) {
                        // EMA runs over the real classes only.
                        double mass = 0.0;
                        for (std::size_t j = 0; j < c; ++j) mass += pred[j];
                        if (mass > kProbFloor) {
                            for (std::size_t j = 0; j < c; ++j) renorm[j] = pred[j] / mass;
                        } else {
                            for (std::size_t j = 0; j < c; ++j)
                                renorm[j] = 1.0 / static_cast<double>(c);
                        }
                        ema_update_inplace(target, renorm, cfg.sat.alpha);
                    } else {
                        ema_update_inplace(target, pred, cfg.sat.alpha);
                    }
                }
                result.store.last_updated_epoch = e;
            }

            Tensor t_batch(m, c);
            gather_rows(result.store.targets, idx, t_batch);
            std::vector<double> weights(m);
            for (std::size_t r = 0; r < m; ++r) weights[r] = sample_weight(t_batch.row(r));

            std::vector<Tensor> grads = result.model.zero_grads();
            double batch_loss = 0.0;
            try {
                switch (cfg.mode) {
                    case EngineMode::Erm:
                    case EngineMode::Sat: {
                        LossValueGrad lg = sat_loss_grad(probs, t_batch, weights);
                        result.model.backward(cache, lg.dlogits, grads);
                        batch_loss = lg.value;
                        break;
                    }
                    case EngineMode::SatSce: {
                        LossValueGrad lg = sce_sat_loss_grad(probs, t_batch, weights);
                        result.model.backward(cache, lg.dlogits, grads);
                        batch_loss = lg.value;
                        break;
                    }
                    case EngineMode::Selective: {
                        std::vector<double> on_label(m);
                        std::vector<std::uint32_t> batch_labels(m);
                        for (std::size_t r = 0; r < m; ++r) {
                            batch_labels[r] = train_noisy[idx[r]];
                            on_label[r] = t_batch.at(r, batch_labels[r]);
                        }
                        LossValueGrad lg = selective_loss_grad(probs, on_label, batch_labels);
                        result.model.backward(cache, lg.dlogits, grads);
                        batch_loss = lg.value;
                        break;
                    }
                    case EngineMode::Trades:
                    case EngineMode::TradesSat: {
                        const std::uint64_t attack_seed =
                            derive_seed(derive_seed(cfg.seed, 2), e);
                        const Tensor x_adv =
                            pgd_attack(result.model, x, {}, cfg.trades.attack,
                                       AttackObjective::KlWrtReference, attack_seed, &idx);
                        ForwardCache adv_cache;
                        const Tensor& adv_logits = result.model.forward(x_adv, adv_cache);
                        check_logits_finite(adv_logits, idx, e, batch_count);
                        const Tensor q = softmax(adv_logits);

                        LossValueGrad nat = sat_loss_grad(probs, t_batch, weights);
                        KlMeanGrad kl = kl_divergence_mean_grad(probs, q);
                        batch_loss = nat.value + cfg.trades.inv_lambda * kl.mean;

                        axpy(cfg.trades.inv_lambda, kl.dp_logits, nat.dlogits);
                        result.model.backward(cache, nat.dlogits, grads);
                        Tensor dadv(m, q.cols());
                        axpy(cfg.trades.inv_lambda, kl.dq_logits, dadv);
                        result.model.backward(adv_cache, dadv, grads);
                        break;
                    }
                }
            } catch (const DivergenceError& err) {
                throw DivergenceError(std::string("training diverged: ") + err.what(), e,
                                      batch_count, err.sample_index());
            }
            if (!std::isfinite(batch_loss))
                throw DivergenceError("non-finite batch loss", e, batch_count);

            loss_sum += batch_loss;
            sgd_step(result.model.params(), grads, opt, lr);
        }

        if (cfg.check_invariants) {
            result.store.check_simplex(1e-9);
            const double lo = 1.0 / static_cast<double>(c) - 1e-9;
            for (std::size_t i = 0; i < n; ++i) {
                const double w = result.store.weight(i);
                if (w < lo || w > 1.0 + 1e-9)
                    throw std::logic_error("train: sample weight left [1/c, 1]");
            }
        }

        EpochRecord rec;
        rec.epoch = e;
        rec.lr = lr;
        rec.loss = batch_count > 0 ? loss_sum / static_cast<double>(batch_count) : 0.0;
        if (train_ds.clean_inputs) {
            rec.acc_noisy_train = accuracy_pair(result.model, train_ds.inputs, train_noisy,
                                                train_noisy, restrict_classes)
                                      .first;
            rec.acc_clean_train = accuracy_pair(result.model, *train_ds.clean_inputs,
                                                train_ds.clean_labels, train_ds.clean_labels,
                                                restrict_classes)
                                      .first;
        } else {
            auto [noisy, clean] = accuracy_pair(result.model, train_ds.inputs, train_noisy,
                                                train_ds.clean_labels, restrict_classes);
            rec.acc_noisy_train = noisy;
            rec.acc_clean_train = clean;
        }
        if (val_ds.clean_inputs) {
            rec.acc_noisy_val = accuracy_pair(result.model, val_ds.inputs, val_noisy,
                                              val_noisy, restrict_classes)
                                    .first;
            rec.acc_clean_val = accuracy_pair(result.model, *val_ds.clean_inputs,
                                              val_ds.clean_labels, val_ds.clean_labels,
                                              restrict_classes)
                                    .first;
        } else {
            auto [noisy, clean] = accuracy_pair(result.model, val_ds.inputs, val_noisy,
                                                val_ds.clean_labels, restrict_classes);
            rec.acc_noisy_val = noisy;
            rec.acc_clean_val = clean;
        }
        if (trades && cfg.robust_eval_every > 0 &&
            (e % cfg.robust_eval_every == 0 || e == cfg.epochs)) {
            rec.robust_acc = robust_accuracy(result.model, val_ds, cfg.eval_attack,
                                             derive_seed(derive_seed(cfg.seed, 3), e));
        }
        result.log.push_back(rec);
        if (cfg.epoch_callback) cfg.epoch_callback(e, result.model);
    }
    return result;
}

}  // namespace sat::detail
