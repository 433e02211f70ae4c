#include "satcore/sat.hpp"

#include <cmath>
#include <cstring>
#include <limits>
#include <fstream>
#include <stdexcept>

#include "satcore/error.hpp"
#include "trainer_impl.hpp"

namespace sat {

void SatConfig::validate() const {
    if (alpha < 0.0 || alpha > 1.0)
        throw std::invalid_argument("sat: alpha must be in [0, 1]");
}

double TargetStore::weight(std::size_t i) const { return sample_weight(targets.row(i)); }

void TargetStore::check_simplex(double tol) const {
    const std::size_t n = targets.rows();
    for (std::size_t i = 0; i < n; ++i) {
        double sum = 0.0;
        for (double v : targets.row(i)) {
            if (v < -tol) throw std::logic_error("target store: negative entry");
            sum += v;
        }
        if (std::abs(sum - 1.0) > tol)
            throw std::logic_error("target store: row left the simplex");
    }
}

TargetStore init_targets(const LabeledDataset& ds) {
    TargetStore store;
    store.targets = ds.noisy_labels;  // deep copy, independent of later ds mutation
    store.last_updated_epoch = 0;
    return store;
}

namespace {

void check_simplex_input(std::span<const double> v, const char* who) {
    double sum = 0.0;
    for (double x : v) {
        if (x < -1e-6) throw std::invalid_argument(std::string(who) + ": negative entry");
        sum += x;
    }
    if (std::abs(sum - 1.0) > 1e-6)
        throw std::invalid_argument(std::string(who) + ": input off the simplex");
}

}  // namespace

void ema_update_inplace(std::span<double> t, std::span<const double> p, double alpha) {
    if (t.size() != p.size()) throw std::invalid_argument("ema_update: length mismatch");
    if (alpha < 0.0 || alpha > 1.0)
        throw std::invalid_argument("ema_update: alpha must be in [0, 1]");
    check_simplex_input(t, "ema_update");
    check_simplex_input(p, "ema_update");
    const double beta = 1.0 - alpha;
    for (std::size_t j = 0; j < t.size(); ++j) t[j] = alpha * t[j] + beta * p[j];
}

std::vector<double> ema_update(std::span<const double> t, std::span<const double> p,
                               double alpha) {
    std::vector<double> out(t.begin(), t.end());
    ema_update_inplace(out, p, alpha);
    return out;
}

double sample_weight(std::span<const double> t) {
    double mx = t[0];
    for (double v : t)
        if (v > mx) mx = v;
    return mx;
}

// ---------------------------------------------------------------------------
// Losses
// ---------------------------------------------------------------------------

namespace {

void check_loss_shapes(const Tensor& probs, const Tensor& targets,
                       std::span<const double> weights) {
    if (!probs.same_shape(targets))
        throw std::invalid_argument("loss: probs/targets shape mismatch");
    if (weights.size() != probs.rows())
        throw std::invalid_argument("loss: weight count mismatch");
}

double weight_total(std::span<const double> weights) {
    double sum = 0.0;
    for (double w : weights) sum += w;
    if (!(sum > 0.0)) throw std::invalid_argument("loss: weights must sum to > 0");
    return sum;
}

}  // namespace

LossValueGrad sat_loss_grad(const Tensor& probs, const Tensor& targets,
                            std::span<const double> weights) {
    check_loss_shapes(probs, targets, weights);
    const std::size_t m = probs.rows(), c = probs.cols();
    const double wsum = weight_total(weights);

    LossValueGrad out;
    out.dlogits = Tensor(m, c);
    double total = 0.0;
    for (std::size_t i = 0; i < m; ++i) {
        auto pr = probs.row(i);
        auto tr = targets.row(i);
        double ce = 0.0;
        double covered = 0.0;  // target mass on unclamped probabilities
        for (std::size_t j = 0; j < c; ++j) {
            if (pr[j] > kProbFloor) {
                ce -= tr[j] * std::log(pr[j]);
                covered += tr[j];
            } else if (pr[j] >= 0.0) {
                ce -= tr[j] * std::log(kProbFloor);
            } else {  // negative or NaN probability
                ce = std::numeric_limits<double>::quiet_NaN();
                break;
            }
        }
        if (!std::isfinite(ce))
            throw DivergenceError("non-finite cross-entropy term", 0, 0,
                                  static_cast<std::ptrdiff_t>(i));
        total += weights[i] * ce;
        const double scale = weights[i] / wsum;
        auto gr = out.dlogits.row(i);
        for (std::size_t j = 0; j < c; ++j)
            gr[j] = scale * (pr[j] * covered - (pr[j] > kProbFloor ? tr[j] : 0.0));
    }
    out.value = total / wsum;
    return out;
}

double sat_loss(const Tensor& probs, const Tensor& targets,
                std::span<const double> weights) {
    check_loss_shapes(probs, targets, weights);
    const double wsum = weight_total(weights);
    const std::size_t m = probs.rows(), c = probs.cols();
    double total = 0.0;
    for (std::size_t i = 0; i < m; ++i) {
        auto pr = probs.row(i);
        auto tr = targets.row(i);
        double ce = 0.0;
        for (std::size_t j = 0; j < c; ++j) {
            if (!(pr[j] >= 0.0)) {
                ce = std::numeric_limits<double>::quiet_NaN();
                break;
            }
            ce -= tr[j] * std::log(std::max(pr[j], kProbFloor));
        }
        if (!std::isfinite(ce))
            throw DivergenceError("non-finite cross-entropy term", 0, 0,
                                  static_cast<std::ptrdiff_t>(i));
        total += weights[i] * ce;
    }
    return total / wsum;
}

double erm_loss(const Tensor& probs, const Tensor& one_hot_labels) {
    const std::vector<double> ones(probs.rows(), 1.0);
    return sat_loss(probs, one_hot_labels, ones);
}

LossValueGrad erm_loss_grad(const Tensor& probs, const Tensor& one_hot_labels) {
    const std::vector<double> ones(probs.rows(), 1.0);
    return sat_loss_grad(probs, one_hot_labels, ones);
}

LossValueGrad sce_sat_loss_grad(const Tensor& probs, const Tensor& targets,
                                std::span<const double> weights, double w1, double w2) {
    check_loss_shapes(probs, targets, weights);
    const std::size_t m = probs.rows(), c = probs.cols();
    const double wsum = weight_total(weights);

    LossValueGrad out;
    out.dlogits = Tensor(m, c);
    double total = 0.0;
    std::vector<double> log_t(c);
    for (std::size_t i = 0; i < m; ++i) {
        auto pr = probs.row(i);
        auto tr = targets.row(i);
        double fwd = 0.0, covered = 0.0, rev = 0.0;
        for (std::size_t j = 0; j < c; ++j) {
            if (pr[j] > kProbFloor) {
                fwd -= tr[j] * std::log(pr[j]);
                covered += tr[j];
            } else if (pr[j] >= 0.0) {
                fwd -= tr[j] * std::log(kProbFloor);
            } else {
                fwd = std::numeric_limits<double>::quiet_NaN();
            }
            log_t[j] = std::log(std::max(tr[j], kReverseFloor));
            rev -= pr[j] * log_t[j];
        }
        const double per_sample = w1 * fwd + w2 * rev;
        if (!std::isfinite(per_sample))
            throw DivergenceError("non-finite symmetric loss term", 0, 0,
                                  static_cast<std::ptrdiff_t>(i));
        total += weights[i] * per_sample;
        const double scale = weights[i] / wsum;
        auto gr = out.dlogits.row(i);
        for (std::size_t j = 0; j < c; ++j) {
            const double dfwd = pr[j] * covered - (pr[j] > kProbFloor ? tr[j] : 0.0);
            const double drev = -pr[j] * (log_t[j] + rev);
            gr[j] = scale * (w1 * dfwd + w2 * drev);
        }
    }
    out.value = total / wsum;
    return out;
}

double sce_sat_loss(const Tensor& probs, const Tensor& targets,
                    std::span<const double> weights, double w1, double w2) {
    return sce_sat_loss_grad(probs, targets, weights, w1, w2).value;
}

// ---------------------------------------------------------------------------
// Training entry point ({erm, sat, sat_sce} modes)
// ---------------------------------------------------------------------------

TrainResult train(const LabeledDataset& train_ds, const LabeledDataset& val_ds,
                  const MlpSpec& mlp, const TrainConfig& cfg) {
    detail::EngineConfig engine;
    switch (cfg.mode) {
        case SatTrainMode::Erm: engine.mode = detail::EngineMode::Erm; break;
        case SatTrainMode::Sat: engine.mode = detail::EngineMode::Sat; break;
        case SatTrainMode::SatSce: engine.mode = detail::EngineMode::SatSce; break;
    }
    engine.sat = cfg.sat;
    engine.optim = cfg.optim;
    engine.epochs = cfg.epochs;
    engine.batch_size = cfg.batch_size;
    engine.seed = cfg.seed;
    engine.check_invariants = cfg.check_invariants;
    engine.initial_store = cfg.initial_store;
    engine.epoch_callback = cfg.epoch_callback;
    return detail::run_training(train_ds, val_ds, mlp, engine);
}

double evaluate_accuracy(const MlpModel& model, const Tensor& inputs,
                         const std::vector<std::uint32_t>& labels,
                         std::size_t restrict_classes) {
    return detail::accuracy_pair(model, inputs, labels, labels, restrict_classes).first;
}

// ---------------------------------------------------------------------------
// Target checkpoint, magic "SATT" version 1:
//   magic[4] version:u32 n:u64 c:u64 epoch:u64 targets (n*c f64)
// ---------------------------------------------------------------------------

namespace {
constexpr char kTargetMagic[4] = {'S', 'A', 'T', 'T'};
constexpr std::uint32_t kTargetVersion = 1;
}  // namespace

void save_targets(const TargetStore& store, const std::string& path) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw std::invalid_argument("cannot open file for writing: " + path);
    out.write(kTargetMagic, 4);
    out.write(reinterpret_cast<const char*>(&kTargetVersion), sizeof(kTargetVersion));
    const std::uint64_t n = store.size(), c = store.classes(),
                        epoch = store.last_updated_epoch;
    out.write(reinterpret_cast<const char*>(&n), sizeof(n));
    out.write(reinterpret_cast<const char*>(&c), sizeof(c));
    out.write(reinterpret_cast<const char*>(&epoch), sizeof(epoch));
    out.write(reinterpret_cast<const char*>(store.targets.data().data()),
              static_cast<std::streamsize>(n * c * sizeof(double)));
    if (!out) throw std::runtime_error("target checkpoint: write failed: " + path);
}

TargetStore load_targets(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::invalid_argument("cannot open file: " + path);
    std::size_t offset = 0;
    char magic[4];
    in.read(magic, 4);
    if (!in || std::memcmp(magic, kTargetMagic, 4) != 0)
        throw FormatError("target checkpoint: bad magic, expected SATT", 0);
    offset += 4;
    std::uint32_t version = 0;
    in.read(reinterpret_cast<char*>(&version), sizeof(version));
    if (!in || version != kTargetVersion)
        throw FormatError("target checkpoint: unsupported version", offset);
    offset += sizeof(version);
    std::uint64_t n = 0, c = 0, epoch = 0;
    in.read(reinterpret_cast<char*>(&n), sizeof(n));
    in.read(reinterpret_cast<char*>(&c), sizeof(c));
    in.read(reinterpret_cast<char*>(&epoch), sizeof(epoch));
    if (!in) throw FormatError("target checkpoint: truncated header", offset);
    offset += 3 * sizeof(std::uint64_t);

    TargetStore store;
    store.targets = Tensor(n, c);
    store.last_updated_epoch = epoch;
    in.read(reinterpret_cast<char*>(store.targets.data().data()),
            static_cast<std::streamsize>(n * c * sizeof(double)));
    if (!in) throw FormatError("target checkpoint: truncated payload", offset);
    return store;
}

}  // namespace sat
