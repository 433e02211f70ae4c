#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace sat {

/// Malformed on-disk data (bad magic, truncation, ...). Message names the byte offset.
class FormatError : public std::runtime_error {
public:
    FormatError(const std::string& what, std::size_t byte_offset)
        : std::runtime_error(what + " (byte offset " + std::to_string(byte_offset) + ")"),
          byte_offset_(byte_offset) {}

    std::size_t byte_offset() const noexcept { return byte_offset_; }

private:
    std::size_t byte_offset_;
};

/// Training produced a non-finite quantity. Carries where it happened.
class DivergenceError : public std::runtime_error {
public:
    DivergenceError(const std::string& what, std::size_t epoch, std::size_t batch,
                    std::ptrdiff_t sample_index = -1)
        : std::runtime_error(what + " (epoch " + std::to_string(epoch) + ", batch " +
                             std::to_string(batch) +
                             (sample_index >= 0 ? ", sample " + std::to_string(sample_index) : "") +
                             ")"),
          epoch_(epoch),
          batch_(batch),
          sample_index_(sample_index) {}

    std::size_t epoch() const noexcept { return epoch_; }
    std::size_t batch() const noexcept { return batch_; }
    /// Index of the offending sample within the dataset, or -1 if unknown.
    std::ptrdiff_t sample_index() const noexcept { return sample_index_; }

private:
    std::size_t epoch_;
    std::size_t batch_;
    std::ptrdiff_t sample_index_;
};

}  // namespace sat
