// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "migsim/worker.hpp"

namespace migsim::fixture {

struct FormatError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// Versioned, length-prefixed binary layout shared by checkpoint and
/// recorded-comms fixtures: magic "TMV1", then all integers little-endian.
inline constexpr char kMagic[4] = {'T', 'M', 'V', '1'};
inline constexpr std::uint32_t kVersion = 1;

std::vector<std::uint8_t> serialize_checkpoint_store(const worker::CheckpointStore& store);
worker::CheckpointStore deserialize_checkpoint_store(const std::vector<std::uint8_t>& bytes);

std::vector<std::uint8_t> serialize_model_state(const worker::ModelState& state);
worker::ModelState deserialize_model_state(const std::vector<std::uint8_t>& bytes);

void write_file(const std::string& path, const std::vector<std::uint8_t>& bytes);
std::vector<std::uint8_t> read_file(const std::string& path);

}  // namespace migsim::fixture
