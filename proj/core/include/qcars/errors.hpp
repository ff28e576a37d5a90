// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <stdexcept>
#include <string>

namespace qcars {

/// Thrown when a waveform does not fit into the sample memory of a channel.
class CapacityError : public std::runtime_error {
  public:
    CapacityError(std::size_t requested, std::size_t capacity, int channel)
        : std::runtime_error("waveform of " + std::to_string(requested) +
                             " samples exceeds the " + std::to_string(capacity) +
                             "-sample capacity of channel " + std::to_string(channel)),
          requested_samples(requested), capacity_samples(capacity), channel(channel) {}

    std::size_t requested_samples;
    std::size_t capacity_samples;
    int channel;
};

/// Thrown when capture windows of consecutive triggers overlap.
class FramingError : public std::runtime_error {
  public:
    FramingError(int first, int second)
        : std::runtime_error("capture windows of triggers " + std::to_string(first) +
                             " and " + std::to_string(second) + " overlap"),
          first_trigger(first), second_trigger(second) {}

    int first_trigger;
    int second_trigger;
};

/// Thrown when a capture window extends past the end of the sample stream.
class TruncationError : public std::runtime_error {
  public:
    explicit TruncationError(int record_index)
        : std::runtime_error("record " + std::to_string(record_index) +
                             " extends past the end of the stream"),
          record_index(record_index) {}

    int record_index;
};

/// Thrown when a numerical routine fails its internal convergence check.
class NumericalError : public std::runtime_error {
  public:
    explicit NumericalError(const std::string& what) : std::runtime_error(what) {}
};

} // namespace qcars
