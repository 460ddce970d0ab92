// Copyright (c) 2026 semra contributors
//
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <filesystem>
#include <string>

#include "semra/diffusion_policy.hpp"

namespace semra {

inline constexpr int kCheckpointVersion = 1;

struct Checkpoint {
    DiffusionPolicy policy;
    TrainConfig config;
};

/// Serialises a trained policy and the config that produced it. The layout is
/// described in docs/checkpoint.md; doubles are written with round-trip
/// precision so load(save(x)) reproduces every parameter bit for bit.
std::string checkpoint_to_json_text(const DiffusionPolicy& policy, const TrainConfig& config);
Checkpoint checkpoint_from_json_text(const std::string& text);

void save_checkpoint(const DiffusionPolicy& policy, const TrainConfig& config, const std::filesystem::path& path);
Checkpoint load_checkpoint(const std::filesystem::path& path);

}  // namespace semra
