#pragma once

#include <cstddef>
#include <string>

#include "recipebench/decoding.hpp"

namespace recipebench::lm {

/// Reference fine-tuning configuration, recorded verbatim in run manifests
/// for provenance. Never interpreted by this toolkit's training paths; the
/// n-gram backend has no use for it.
struct ExperimentConfig {
    double learning_rate = 3e-5;
    std::size_t batch_size = 8;
    std::size_t epochs = 20;
    std::string precision_mode = "fp16";
    std::string optimizer_name = "adamw";
    decoding::SamplerConfig sampler;
};

} // namespace recipebench::lm
