// Copyright (c) 2026 semra contributors
//
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <filesystem>
#include <stdexcept>
#include <string>

#include "semra/harness.hpp"

namespace semra {

class config_error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Parses a `key = value` experiment file. Blank lines and `#` comments are
/// ignored; lists are comma separated and may be wrapped in brackets; strings
/// may be double quoted. Unknown or repeated keys are errors. A relative
/// `corpus` path is resolved against `base_dir`. The accepted keys are listed
/// in docs/config.md.
ExperimentConfig parse_experiment_config(const std::string& text, const std::filesystem::path& base_dir = {});

ExperimentConfig load_experiment_config(const std::filesystem::path& path);

}  // namespace semra
