#ifndef BEATNOTE_TRAINER_HPP
#define BEATNOTE_TRAINER_HPP

#include <cstdint>
#include <string>
#include <vector>

#include "beatnote/model.hpp"
#include "beatnote/signal.hpp"

namespace beatnote {

struct TrainConfig {
    std::uint64_t n_train = 200000;
    std::uint64_t n_val = 20000;
    int batch_size = 64;
    int max_epochs = 60;
    double lr = 1e-3;
    int patience = 8;
    std::uint64_t master_seed = 1;
    LossWeights loss_weights{};
    ParamRanges ranges{};
    ModelConfig model{};
    unsigned n_threads = 0;  // 0 = hardware concurrency
    // Halve the learning rate when validation stalls for this many epochs
    // (0 disables the schedule).
    int lr_decay_patience = 0;
    bool verbose = false;
};

struct EpochStats {
    double train_loss = 0.0;
    double val_loss = 0.0;
    double seconds = 0.0;
};

struct TrainHistory {
    std::vector<EpochStats> epochs;
    int best_epoch = -1;  // 0-based index into epochs
    double best_val_loss = 0.0;
};

struct TrainResult {
    FreqNet model;
    TrainHistory history;
};

/// Trains the denoise+regress network on synthetic records streamed from
/// the generator. Train record i uses seed derive_seed(derive_seed(seed, 1), i),
/// validation record i uses derive_seed(derive_seed(seed, 2), i) and weight
/// init uses derive_seed(seed, 3), so the whole run is reproducible from
/// master_seed. Returns the checkpoint with the lowest validation loss;
/// early-stops after `patience` epochs without improvement.
/// Throws TrainError with the epoch index if the loss turns non-finite.
TrainResult train(const TrainConfig& config);

/// Writes "epoch,train_loss,val_loss,seconds" rows.
void write_history_csv(const std::string& path, const TrainHistory& history);

/// Flat key=value config file ('#' comments). Unknown keys are rejected.
TrainConfig parse_train_config(const std::string& path);

}  // namespace beatnote

#endif  // BEATNOTE_TRAINER_HPP
