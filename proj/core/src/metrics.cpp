#include "satcore/metrics.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <stdexcept>

#include "satcore/mlp.hpp"

namespace sat {

namespace {

std::string fmt_double(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

std::vector<std::string> split_csv_line(const std::string& line) {
    std::vector<std::string> fields;
    std::string cur;
    std::istringstream in(line);
    while (std::getline(in, cur, ',')) fields.push_back(cur);
    if (!line.empty() && line.back() == ',') fields.emplace_back();
    return fields;
}

}  // namespace

void emit_epoch_csv(const std::vector<EpochRecord>& records, std::ostream& out) {
    bool with_robust = false;
    for (const EpochRecord& r : records)
        if (r.robust_acc) with_robust = true;
    out << "epoch,lr,loss,acc_noisy_train,acc_clean_train,acc_noisy_val,acc_clean_val";
    if (with_robust) out << ",robust_acc";
    out << "\n";
    for (const EpochRecord& r : records) {
        out << r.epoch << ',' << fmt_double(r.lr) << ',' << fmt_double(r.loss) << ','
            << fmt_double(r.acc_noisy_train) << ',' << fmt_double(r.acc_clean_train) << ','
            << fmt_double(r.acc_noisy_val) << ',' << fmt_double(r.acc_clean_val);
        if (with_robust) {
            out << ',';
            if (r.robust_acc) out << fmt_double(*r.robust_acc);
        }
        out << "\n";
    }
}

void emit_epoch_csv(const std::vector<EpochRecord>& records, const std::string& path) {
    std::ofstream out(path, std::ios::trunc);
    if (!out) throw std::invalid_argument("cannot open file for writing: " + path);
    emit_epoch_csv(records, out);
}

std::vector<EpochRecord> parse_epoch_csv(std::istream& in) {
    std::string line;
    if (!std::getline(in, line)) throw std::invalid_argument("epoch csv: missing header");
    const std::vector<std::string> header = split_csv_line(line);
    const bool with_robust = !header.empty() && header.back() == "robust_acc";
    const std::size_t expected = with_robust ? 8 : 7;
    if (header.size() != expected)
        throw std::invalid_argument("epoch csv: unexpected header: " + line);

    std::vector<EpochRecord> records;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        const std::vector<std::string> f = split_csv_line(line);
        if (f.size() != expected)
            throw std::invalid_argument("epoch csv: bad field count in row: " + line);
        EpochRecord r;
        r.epoch = std::stoull(f[0]);
        r.lr = std::stod(f[1]);
        r.loss = std::stod(f[2]);
        r.acc_noisy_train = std::stod(f[3]);
        r.acc_clean_train = std::stod(f[4]);
        r.acc_noisy_val = std::stod(f[5]);
        r.acc_clean_val = std::stod(f[6]);
        if (with_robust && !f[7].empty()) r.robust_acc = std::stod(f[7]);
        records.push_back(r);
    }
    return records;
}

std::vector<EpochRecord> parse_epoch_csv_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::invalid_argument("cannot open file: " + path);
    return parse_epoch_csv(in);
}

double recovered_accuracy(const Tensor& targets,
                          const std::vector<std::uint32_t>& clean_labels) {
    const std::size_t n = targets.rows();
    if (clean_labels.size() != n)
        throw std::invalid_argument("recovered_accuracy: store/labels length mismatch");
    std::size_t hits = 0;
    for (std::size_t i = 0; i < n; ++i)
        if (argmax_row(targets.row(i)) == clean_labels[i]) ++hits;
    return static_cast<double>(hits) / static_cast<double>(n);
}

RecoveryReport recovery_report(const Tensor& targets,
                               const std::vector<std::uint32_t>& clean_labels) {
    const std::size_t n = targets.rows(), c = targets.cols();
    if (clean_labels.size() != n)
        throw std::invalid_argument("recovery_report: store/labels length mismatch");
    RecoveryReport rep;
    rep.confusion.assign(c, std::vector<std::size_t>(c, 0));
    rep.weight_matrix.assign(c, std::vector<double>(c, 0.0));
    rep.present.assign(c, std::vector<bool>(c, false));
    std::size_t hits = 0;
    for (std::size_t i = 0; i < n; ++i) {
        auto row = targets.row(i);
        const std::size_t recovered = argmax_row(row);
        const std::size_t clean = clean_labels[i];
        if (recovered == clean) ++hits;
        rep.confusion[clean][recovered] += 1;
        rep.weight_matrix[clean][recovered] += row[recovered];  // w_i = max_j t_ij
    }
    for (std::size_t i = 0; i < c; ++i)
        for (std::size_t j = 0; j < c; ++j) {
            if (rep.confusion[i][j] > 0) {
                rep.present[i][j] = true;
                rep.weight_matrix[i][j] /= static_cast<double>(rep.confusion[i][j]);
            }
        }
    rep.recovered_acc = static_cast<double>(hits) / static_cast<double>(n);
    return rep;
}

double generalization_error(const EpochRecord& record) {
    return record.acc_noisy_train - record.acc_noisy_val;
}

CapacityParams capacity_sweep_params(std::size_t width, std::size_t base_width) {
    if (width < 1) throw std::invalid_argument("capacity_sweep_params: width must be >= 1");
    const double r = static_cast<double>(base_width) / static_cast<double>(width);
    CapacityParams params;
    params.start_epoch = static_cast<std::size_t>(std::llround(40.0 * r));
    params.alpha = std::pow(0.9, 1.0 / r);
    return params;
}

EarlyStopResult early_stop_select(const std::vector<EpochRecord>& records,
                                  EarlyStopCriterion criterion) {
    if (records.empty()) throw std::invalid_argument("early_stop_select: empty log");
    auto value = [&](const EpochRecord& r) {
        return criterion == EarlyStopCriterion::NoisyValAccuracy ? r.acc_noisy_val
                                                                 : r.acc_clean_val;
    };
    std::size_t best = 0;
    for (std::size_t i = 1; i < records.size(); ++i)
        if (value(records[i]) > value(records[best])) best = i;
    return {records[best].epoch, value(records[best]), records[best].acc_clean_val};
}

}  // namespace sat
