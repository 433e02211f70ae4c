#include "satcore/dataset.hpp"

#include <cmath>
#include <cstring>
#include <fstream>
#include <numbers>
#include <stdexcept>

#include "satcore/error.hpp"
#include "satcore/rng.hpp"

namespace sat {

std::uint32_t LabeledDataset::noisy_label_index(std::size_t i) const {
    auto row = noisy_labels.row(i);
    for (std::size_t j = 0; j < row.size(); ++j)
        if (row[j] == 1.0) return static_cast<std::uint32_t>(j);
    throw std::invalid_argument("dataset: label row is not one-hot");
}

bool LabeledDataset::any_corrupted() const {
    for (std::uint8_t m : corrupted_mask)
        if (m) return true;
    return false;
}

void LabeledDataset::validate() const {
    const std::size_t n = size();
    if (inputs.rows() != n || noisy_labels.rows() != n || corrupted_mask.size() != n)
        throw std::invalid_argument("dataset: field lengths disagree");
    if (noisy_labels.cols() != class_count)
        throw std::invalid_argument("dataset: label width does not match class count");
    for (std::size_t i = 0; i < n; ++i) {
        auto row = noisy_labels.row(i);
        double sum = 0.0;
        for (double v : row) {
            if (v != 0.0 && v != 1.0)
                throw std::invalid_argument("dataset: labels must be one-hot");
            sum += v;
        }
        if (sum != 1.0) throw std::invalid_argument("dataset: labels must be one-hot");
        if (clean_labels[i] >= class_count)
            throw std::invalid_argument("dataset: clean label out of range");
    }
}

LabeledDataset make_dataset(Tensor inputs, std::vector<std::uint32_t> labels,
                            std::size_t class_count) {
    LabeledDataset ds;
    const std::size_t n = labels.size();
    ds.noisy_labels = Tensor(n, class_count);
    for (std::size_t i = 0; i < n; ++i) {
        if (labels[i] >= class_count)
            throw std::invalid_argument("dataset: label out of range");
        ds.noisy_labels.at(i, labels[i]) = 1.0;
    }
    ds.inputs = std::move(inputs);
    ds.clean_labels = std::move(labels);
    ds.corrupted_mask.assign(n, 0);
    ds.class_count = class_count;
    return ds;
}

std::pair<LabeledDataset, LabeledDataset> split_train_val(const LabeledDataset& ds,
                                                          std::size_t train_count) {
    const std::size_t n = ds.size();
    if (train_count >= n)
        throw std::invalid_argument("split: train_count must be < dataset size");
    if (train_count < 1) throw std::invalid_argument("split: train_count must be >= 1");

    auto take = [&](std::size_t begin, std::size_t count) {
        LabeledDataset out;
        const std::size_t d = ds.dim();
        out.inputs = Tensor(count, d);
        std::memcpy(out.inputs.data().data(), ds.inputs.data().data() + begin * d,
                    count * d * sizeof(double));
        out.noisy_labels = Tensor(count, ds.class_count);
        std::memcpy(out.noisy_labels.data().data(),
                    ds.noisy_labels.data().data() + begin * ds.class_count,
                    count * ds.class_count * sizeof(double));
        out.clean_labels.assign(ds.clean_labels.begin() + begin,
                                ds.clean_labels.begin() + begin + count);
        out.corrupted_mask.assign(ds.corrupted_mask.begin() + begin,
                                  ds.corrupted_mask.begin() + begin + count);
        out.class_count = ds.class_count;
        if (ds.clean_inputs) {
            Tensor ci(count, d);
            std::memcpy(ci.data().data(), ds.clean_inputs->data().data() + begin * d,
                        count * d * sizeof(double));
            out.clean_inputs = std::move(ci);
        }
        return out;
    };
    return {take(0, train_count), take(train_count, n - train_count)};
}

void SyntheticSpec::validate() const {
    if (classes < 2) throw std::invalid_argument("synthetic: classes must be >= 2");
    if (per_class < 1) throw std::invalid_argument("synthetic: per_class must be >= 1");
    if (dim < 1) throw std::invalid_argument("synthetic: dim must be >= 1");
    if (!(separation > 0.0)) throw std::invalid_argument("synthetic: separation must be > 0");
}

namespace {

std::vector<double> class_mean(std::size_t k, std::size_t classes, std::size_t dim) {
    std::vector<double> mean(dim, 0.0);
    if (dim >= classes) {
        mean[k] = 1.0;
    } else if (dim >= 2) {
        const double angle = 2.0 * std::numbers::pi * static_cast<double>(k) /
                             static_cast<double>(classes);
        mean[0] = std::cos(angle);
        mean[1] = std::sin(angle);
    } else {
        // 1-d: evenly spaced points in [-1, 1]
        mean[0] = classes == 1 ? 0.0
                               : -1.0 + 2.0 * static_cast<double>(k) /
                                     static_cast<double>(classes - 1);
    }
    return mean;
}

}  // namespace

LabeledDataset gen_synthetic(const SyntheticSpec& spec) {
    spec.validate();
    const std::size_t n = spec.classes * spec.per_class;
    const std::size_t d = spec.dim;
    Tensor inputs(n, d);
    std::vector<std::uint32_t> labels(n);
    Rng rng(spec.seed);
    const double noise = 1.0 / spec.separation;

    if (spec.generator == SyntheticGenerator::GaussianBlobs) {
        std::vector<std::vector<double>> means;
        for (std::size_t k = 0; k < spec.classes; ++k)
            means.push_back(class_mean(k, spec.classes, d));
        for (std::size_t i = 0; i < n; ++i) {
            const std::size_t k = i % spec.classes;  // interleave classes
            labels[i] = static_cast<std::uint32_t>(k);
            auto row = inputs.row(i);
            for (std::size_t j = 0; j < d; ++j) row[j] = means[k][j] + noise * rng.normal();
        }
    } else {  // Spirals: interleaved arcs in the first two dimensions
        if (d < 2) throw std::invalid_argument("synthetic: spirals need dim >= 2");
        const double turns = 1.5 * std::numbers::pi;
        for (std::size_t i = 0; i < n; ++i) {
            const std::size_t k = i % spec.classes;
            labels[i] = static_cast<std::uint32_t>(k);
            const double t = rng.uniform();
            const double theta = t * turns + 2.0 * std::numbers::pi *
                                                 static_cast<double>(k) /
                                                 static_cast<double>(spec.classes);
            const double r = 0.25 + 0.75 * t;
            auto row = inputs.row(i);
            row[0] = r * std::cos(theta) + noise * rng.normal();
            row[1] = r * std::sin(theta) + noise * rng.normal();
            for (std::size_t j = 2; j < d; ++j) row[j] = noise * rng.normal();
        }
    }
    return make_dataset(std::move(inputs), std::move(labels), spec.classes);
}

// ---------------------------------------------------------------------------
// Loaders
// ---------------------------------------------------------------------------

namespace {

constexpr std::size_t kCifarRecordBytes = 3073;  // 1 label byte + 32*32*3 pixels
constexpr std::size_t kCifarPixels = 3072;
constexpr std::size_t kCifarClasses = 10;

std::vector<unsigned char> read_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::invalid_argument("cannot open file: " + path);
    return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

std::uint32_t read_be32(const unsigned char* p) {
    return (std::uint32_t(p[0]) << 24) | (std::uint32_t(p[1]) << 16) |
           (std::uint32_t(p[2]) << 8) | std::uint32_t(p[3]);
}

}  // namespace

LabeledDataset load_cifar_binary(const std::string& path) {
    const std::vector<unsigned char> bytes = read_file(path);
    if (bytes.empty()) throw FormatError("cifar: empty file", 0);
    if (bytes.size() % kCifarRecordBytes != 0)
        throw FormatError("cifar: file size is not a multiple of the 3073-byte record",
                          bytes.size() - bytes.size() % kCifarRecordBytes);
    const std::size_t n = bytes.size() / kCifarRecordBytes;
    Tensor inputs(n, kCifarPixels);
    std::vector<std::uint32_t> labels(n);
    for (std::size_t i = 0; i < n; ++i) {
        const std::size_t base = i * kCifarRecordBytes;
        const unsigned char label = bytes[base];
        if (label >= kCifarClasses)
            throw FormatError("cifar: label byte out of range", base);
        labels[i] = label;
        auto row = inputs.row(i);
        for (std::size_t j = 0; j < kCifarPixels; ++j)
            row[j] = static_cast<double>(bytes[base + 1 + j]) / 255.0;
    }
    return make_dataset(std::move(inputs), std::move(labels), kCifarClasses);
}

LabeledDataset load_idx(const std::string& images_path, const std::string& labels_path) {
    const std::vector<unsigned char> img = read_file(images_path);
    const std::vector<unsigned char> lab = read_file(labels_path);

    if (img.size() < 16) throw FormatError("idx: truncated image header", img.size());
    if (read_be32(img.data()) != 0x00000803u)
        throw FormatError("idx: bad image magic, expected 0x00000803", 0);
    const std::size_t n = read_be32(img.data() + 4);
    const std::size_t rows = read_be32(img.data() + 8);
    const std::size_t cols = read_be32(img.data() + 12);
    const std::size_t d = rows * cols;
    if (img.size() != 16 + n * d)
        throw FormatError("idx: image payload truncated", img.size());

    if (lab.size() < 8) throw FormatError("idx: truncated label header", lab.size());
    if (read_be32(lab.data()) != 0x00000801u)
        throw FormatError("idx: bad label magic, expected 0x00000801", 0);
    if (read_be32(lab.data() + 4) != n)
        throw FormatError("idx: image/label counts disagree", 4);
    if (lab.size() != 8 + n)
        throw FormatError("idx: label payload truncated", lab.size());

    Tensor inputs(n, d);
    std::vector<std::uint32_t> labels(n);
    std::uint32_t max_label = 0;
    for (std::size_t i = 0; i < n; ++i) {
        labels[i] = lab[8 + i];
        max_label = std::max(max_label, labels[i]);
        auto row = inputs.row(i);
        for (std::size_t j = 0; j < d; ++j)
            row[j] = static_cast<double>(img[16 + i * d + j]) / 255.0;
    }
    const std::size_t c = std::max<std::size_t>(max_label + 1, 2);
    return make_dataset(std::move(inputs), std::move(labels), c);
}

// ---------------------------------------------------------------------------
// Snapshot format, magic "SATD" version 1:
//   magic[4] version:u32 n:u64 d:u64 c:u64 has_clean_inputs:u8
//   inputs (n*d f64) [clean_inputs (n*d f64)] noisy:u32[n] clean:u32[n] mask:u8[n]
// ---------------------------------------------------------------------------

namespace {

template <typename T>
void write_pod(std::ofstream& out, const T& v) {
    out.write(reinterpret_cast<const char*>(&v), sizeof(T));
}

template <typename T>
T read_pod(std::ifstream& in, std::size_t& offset) {
    T v{};
    in.read(reinterpret_cast<char*>(&v), sizeof(T));
    if (!in) throw FormatError("snapshot: truncated", offset);
    offset += sizeof(T);
    return v;
}

void read_bytes(std::ifstream& in, void* dst, std::size_t count, std::size_t& offset) {
    in.read(reinterpret_cast<char*>(dst), static_cast<std::streamsize>(count));
    if (!in) throw FormatError("snapshot: truncated", offset);
    offset += count;
}

constexpr char kDatasetMagic[4] = {'S', 'A', 'T', 'D'};
constexpr std::uint32_t kDatasetVersion = 1;

}  // namespace

void save_dataset(const LabeledDataset& ds, const std::string& path) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw std::invalid_argument("cannot open file for writing: " + path);
    out.write(kDatasetMagic, 4);
    write_pod(out, kDatasetVersion);
    const std::uint64_t n = ds.size(), d = ds.dim(), c = ds.class_count;
    write_pod(out, n);
    write_pod(out, d);
    write_pod(out, c);
    const std::uint8_t has_clean = ds.clean_inputs ? 1 : 0;
    write_pod(out, has_clean);
    out.write(reinterpret_cast<const char*>(ds.inputs.data().data()),
              static_cast<std::streamsize>(n * d * sizeof(double)));
    if (has_clean)
        out.write(reinterpret_cast<const char*>(ds.clean_inputs->data().data()),
                  static_cast<std::streamsize>(n * d * sizeof(double)));
    for (std::size_t i = 0; i < n; ++i) write_pod(out, ds.noisy_label_index(i));
    out.write(reinterpret_cast<const char*>(ds.clean_labels.data()),
              static_cast<std::streamsize>(n * sizeof(std::uint32_t)));
    out.write(reinterpret_cast<const char*>(ds.corrupted_mask.data()),
              static_cast<std::streamsize>(n));
    if (!out) throw std::runtime_error("snapshot: write failed: " + path);
}

LabeledDataset load_dataset(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::invalid_argument("cannot open file: " + path);
    std::size_t offset = 0;
    char magic[4];
    read_bytes(in, magic, 4, offset);
    if (std::memcmp(magic, kDatasetMagic, 4) != 0)
        throw FormatError("snapshot: bad magic, expected SATD", 0);
    const auto version = read_pod<std::uint32_t>(in, offset);
    if (version != kDatasetVersion)
        throw FormatError("snapshot: unsupported version " + std::to_string(version), 4);
    const auto n = read_pod<std::uint64_t>(in, offset);
    const auto d = read_pod<std::uint64_t>(in, offset);
    const auto c = read_pod<std::uint64_t>(in, offset);
    const auto has_clean = read_pod<std::uint8_t>(in, offset);

    LabeledDataset ds;
    ds.class_count = c;
    ds.inputs = Tensor(n, d);
    read_bytes(in, ds.inputs.data().data(), n * d * sizeof(double), offset);
    if (has_clean) {
        Tensor ci(n, d);
        read_bytes(in, ci.data().data(), n * d * sizeof(double), offset);
        ds.clean_inputs = std::move(ci);
    }
    std::vector<std::uint32_t> noisy(n);
    read_bytes(in, noisy.data(), n * sizeof(std::uint32_t), offset);
    ds.noisy_labels = Tensor(n, c);
    for (std::size_t i = 0; i < n; ++i) {
        if (noisy[i] >= c) throw FormatError("snapshot: noisy label out of range", offset);
        ds.noisy_labels.at(i, noisy[i]) = 1.0;
    }
    ds.clean_labels.resize(n);
    read_bytes(in, ds.clean_labels.data(), n * sizeof(std::uint32_t), offset);
    ds.corrupted_mask.resize(n);
    read_bytes(in, ds.corrupted_mask.data(), n, offset);
    return ds;
}

}  // namespace sat
