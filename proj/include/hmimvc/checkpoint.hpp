#pragma once

#include <filesystem>
#include <optional>

#include "hmimvc/objective.hpp"

namespace hmimvc {

/// Position within the staged training schedule: completed epochs of the
/// current stage. Lets a run resume bit-exactly.
struct TrainProgress {
    int stage = 0;            // 0..2
    index_t epoch_in_stage = 0;
};

/// Everything a resumed run needs: parameters (with batch-norm running
/// stats), optimizer moments, the fixed temperature, and the schedule
/// position. File format: magic "HMIW", version, architecture descriptor,
/// then little-endian 64-bit parameter blocks in visit_model order.
struct Checkpoint {
    ModelParams params;
    std::optional<AdamState> adam;
    std::optional<Temperature> tau;
    std::optional<TrainProgress> progress;
};

void save_checkpoint(const Checkpoint& ckpt, const std::filesystem::path& path);
Checkpoint load_checkpoint(const std::filesystem::path& path);

/// Parameter-only convenience wrappers.
void save_params(const ModelParams& params, const std::filesystem::path& path);
ModelParams load_params(const std::filesystem::path& path);

}  // namespace hmimvc
