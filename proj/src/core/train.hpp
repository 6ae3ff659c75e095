#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "core/dataset.hpp"
#include "core/model.hpp"
#include "core/optim.hpp"
#include "core/pipeline.hpp"

namespace bvoc {

struct TrainConfig {
    ScheduleConfig schedule;
    uint32_t batch_size = 16;
    uint64_t seed = 0;
    uint64_t validation_interval = 100; // iterations between metric probes
    size_t validation_max_pairs = 64;   // prefix of the validation split
    std::string checkpoint_path;        // best model written here if set
    std::string log_path;               // log lines written here if set
};

/// model holds the parameters that maximized validation SSIM, or the final
/// parameters when no validation ran. Losses are the transformed-domain MSE
/// of the first and last training batch.
struct TrainResult {
    Model model;
    uint64_t best_iteration = 0; // 1-based; 0 when no validation ran
    double best_val_ssim = 0;
    double first_train_loss = 0;
    double final_train_loss = 0;
    std::vector<std::string> log_lines;
};

/// Minimizes mean((N(T(lr)) - T(hr))^2) over split.train with Adam under the
/// cosine restart schedule. Batches are drawn with replacement: each
/// iteration consumes batch_size values of Rng(seed).below(n_train), in
/// order. Identical seeds and data give bit-identical parameters.
///
/// Every validation_interval iterations (and at the last one) the model is
/// scored on the validation prefix: SSIM in the transformed domain, NMSE in
/// the physical domain after the deployment inversion. Log lines are
/// `iter, lr, train_loss, val_ssim, val_nmse_db`.
TrainResult train_model(Model model, const DatasetSplit& split, const Preproc& preproc,
                        const TrainConfig& cfg);

} // namespace bvoc
