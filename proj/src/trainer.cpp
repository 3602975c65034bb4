#include "beatnote/trainer.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>

#include "beatnote/dataset_io.hpp"
#include "beatnote/parallel.hpp"
#include "beatnote/rng.hpp"

namespace beatnote {

namespace {

// Chunk boundaries are fixed by record index, so gradient reduction order
// (and therefore the trained model) does not depend on the thread count.
constexpr std::size_t kChunk = 16;

struct PreparedRecord {
    std::vector<float> x;       // standardized noisy window
    std::vector<float> clean;   // regression target for the denoiser
    float freq_norm = 0.0f;
};

std::vector<PreparedRecord> prepare_records(std::uint64_t stream_seed,
                                            std::uint64_t count,
                                            const TrainConfig& cfg) {
    std::vector<PreparedRecord> out(count);
    parallel_for(count, cfg.n_threads, [&](std::size_t i) {
        const GenParams params =
            sample_params(derive_seed(stream_seed, i), cfg.ranges,
                          cfg.model.input_len, 5000.0);
        const DatasetRecord rec = generate_pair(params);
        PreparedRecord& p = out[i];
        standardize_window(rec.noisy, p.x);
        p.clean = rec.clean.samples;
        p.freq_norm = static_cast<float>((rec.frequency_hz - cfg.model.freq_min_hz) /
                                         cfg.model.freq_span_hz);
    });
    return out;
}

void add_grads(FreqNet& acc, const FreqNet& part) {
    std::vector<const nn::Tensor<float>*> src;
    part.visit_params([&src](const nn::Tensor<float>& t) { src.push_back(&t); });
    std::size_t k = 0;
    acc.visit_params([&](nn::Tensor<float>& t) {
        const auto& s = *src[k++];
        for (std::size_t i = 0; i < t.size(); ++i) t.data[i] += s.data[i];
    });
}

void scale_grads(FreqNet& g, float factor) {
    g.visit_params([factor](nn::Tensor<float>& t) {
        for (float& v : t.data) v *= factor;
    });
}

}  // namespace

TrainResult train(const TrainConfig& cfg) {
    if (cfg.n_train < 1 || cfg.n_val < 1 || cfg.batch_size < 1 || cfg.patience < 1 ||
        !(cfg.lr > 0.0) || cfg.max_epochs < 1) {
        throw TrainError("train: invalid configuration");
    }
    if (cfg.loss_weights.w_clean < 0.0 || cfg.loss_weights.w_freq < 0.0 ||
        (cfg.loss_weights.w_clean == 0.0 && cfg.loss_weights.w_freq == 0.0)) {
        throw TrainError("train: invalid loss weights");
    }

    const auto train_set = prepare_records(derive_seed(cfg.master_seed, 1), cfg.n_train, cfg);
    const auto val_set = prepare_records(derive_seed(cfg.master_seed, 2), cfg.n_val, cfg);

    FreqNet net(cfg.model);
    net.init_weights(derive_seed(cfg.master_seed, 3));
    AdamOptimizer opt(net, AdamConfig{cfg.lr});

    const int L = cfg.model.input_len;
    const float w_clean = static_cast<float>(cfg.loss_weights.w_clean);
    const float w_freq = static_cast<float>(cfg.loss_weights.w_freq);

    const std::size_t n_batches =
        (train_set.size() + cfg.batch_size - 1) / static_cast<std::size_t>(cfg.batch_size);
    const std::size_t max_chunks =
        (static_cast<std::size_t>(cfg.batch_size) + kChunk - 1) / kChunk;

    // Per-chunk gradient buffers and workspaces, reused across batches.
    std::vector<FreqNet> chunk_grads(max_chunks, FreqNet(cfg.model));
    std::vector<FreqNet::Workspace> chunk_ws;
    chunk_ws.reserve(max_chunks);
    for (std::size_t i = 0; i < max_chunks; ++i) chunk_ws.emplace_back(cfg.model);
    std::vector<double> chunk_loss(max_chunks, 0.0);

    FreqNet batch_grad(cfg.model);
    FreqNet best_model = net;

    // Forward-only pass over a record returning its loss.
    auto record_loss = [&](const PreparedRecord& rec, FreqNet::Workspace& ws) {
        net.forward(rec.x.data(), ws);
        double mse = 0.0;
        for (int i = 0; i < L; ++i) {
            const double d = static_cast<double>(ws.clean_hat[static_cast<std::size_t>(i)]) -
                             rec.clean[static_cast<std::size_t>(i)];
            mse += d * d;
        }
        mse /= L;
        const double df = static_cast<double>(ws.freq_norm) - rec.freq_norm;
        return cfg.loss_weights.w_clean * mse + cfg.loss_weights.w_freq * df * df;
    };

    auto val_loss_now = [&]() {
        const std::size_t n_chunks = (val_set.size() + kChunk - 1) / kChunk;
        std::vector<double> sums(n_chunks, 0.0);
        parallel_for(n_chunks, cfg.n_threads, [&](std::size_t c) {
            FreqNet::Workspace ws(cfg.model);
            double s = 0.0;
            const std::size_t lo = c * kChunk;
            const std::size_t hi = std::min(val_set.size(), lo + kChunk);
            for (std::size_t r = lo; r < hi; ++r) s += record_loss(val_set[r], ws);
            sums[c] = s;
        });
        double total = 0.0;
        for (double s : sums) total += s;
        return total / static_cast<double>(val_set.size());
    };

    TrainResult result{std::move(best_model), {}};
    result.history.best_val_loss = std::numeric_limits<double>::infinity();
    int epochs_since_best = 0;
    int epochs_since_decay = 0;
    double lr_now = cfg.lr;

    for (int epoch = 0; epoch < cfg.max_epochs; ++epoch) {
        const auto t0 = std::chrono::steady_clock::now();
        double epoch_loss = 0.0;

        for (std::size_t b = 0; b < n_batches; ++b) {
            const std::size_t batch_lo = b * static_cast<std::size_t>(cfg.batch_size);
            const std::size_t batch_hi =
                std::min(train_set.size(), batch_lo + static_cast<std::size_t>(cfg.batch_size));
            const std::size_t batch_n = batch_hi - batch_lo;
            const std::size_t n_chunks = (batch_n + kChunk - 1) / kChunk;

            parallel_for(n_chunks, cfg.n_threads, [&](std::size_t c) {
                FreqNet& grads = chunk_grads[c];
                FreqNet::Workspace& ws = chunk_ws[c];
                grads.zero();
                double loss_sum = 0.0;
                std::vector<float> dc(static_cast<std::size_t>(L));
                const std::size_t lo = batch_lo + c * kChunk;
                const std::size_t hi = std::min(batch_hi, lo + kChunk);
                for (std::size_t r = lo; r < hi; ++r) {
                    const PreparedRecord& rec = train_set[r];
                    net.forward(rec.x.data(), ws);
                    double mse = 0.0;
                    for (int i = 0; i < L; ++i) {
                        const float diff = ws.clean_hat[static_cast<std::size_t>(i)] -
                                           rec.clean[static_cast<std::size_t>(i)];
                        mse += static_cast<double>(diff) * diff;
                        dc[static_cast<std::size_t>(i)] =
                            w_clean * 2.0f * diff / static_cast<float>(L);
                    }
                    mse /= L;
                    const float df = ws.freq_norm - rec.freq_norm;
                    loss_sum += cfg.loss_weights.w_clean * mse +
                                cfg.loss_weights.w_freq * static_cast<double>(df) * df;
                    net.backward(ws, dc.data(), w_freq * 2.0f * df, grads);
                }
                chunk_loss[c] = loss_sum;
            });

            batch_grad.zero();
            double batch_loss = 0.0;
            for (std::size_t c = 0; c < n_chunks; ++c) {
                add_grads(batch_grad, chunk_grads[c]);
                batch_loss += chunk_loss[c];
            }
            scale_grads(batch_grad, 1.0f / static_cast<float>(batch_n));
            batch_loss /= static_cast<double>(batch_n);
            epoch_loss += batch_loss * static_cast<double>(batch_n);

            if (!std::isfinite(batch_loss)) {
                throw TrainError("train: non-finite loss at epoch " + std::to_string(epoch));
            }
            opt.step(net, batch_grad);
        }
        epoch_loss /= static_cast<double>(train_set.size());

        const double vloss = val_loss_now();
        if (!std::isfinite(vloss)) {
            throw TrainError("train: non-finite validation loss at epoch " +
                             std::to_string(epoch));
        }
        const auto t1 = std::chrono::steady_clock::now();
        const double secs = std::chrono::duration<double>(t1 - t0).count();
        result.history.epochs.push_back({epoch_loss, vloss, secs});

        if (vloss < result.history.best_val_loss) {
            result.history.best_val_loss = vloss;
            result.history.best_epoch = epoch;
            result.model = net;
            epochs_since_best = 0;
        } else {
            ++epochs_since_best;
        }

        if (cfg.verbose) {
            std::fprintf(stderr, "epoch %3d  train %.6g  val %.6g  lr %.3g  (%.1fs)%s\n",
                         epoch, epoch_loss, vloss, lr_now, secs,
                         epoch == result.history.best_epoch ? "  *" : "");
        }

        if (epochs_since_best >= cfg.patience) break;

        if (cfg.lr_decay_patience > 0) {
            if (epoch == result.history.best_epoch) {
                epochs_since_decay = 0;
            } else if (++epochs_since_decay >= cfg.lr_decay_patience) {
                lr_now *= 0.5;
                opt.set_lr(lr_now);
                epochs_since_decay = 0;
            }
        }
    }

    return result;
}

void write_history_csv(const std::string& path, const TrainHistory& history) {
    std::ofstream out(path);
    if (!out) throw IoError("history: cannot open for writing: " + path);
    out << "epoch,train_loss,val_loss,seconds\n";
    char line[128];
    for (std::size_t e = 0; e < history.epochs.size(); ++e) {
        const EpochStats& s = history.epochs[e];
        std::snprintf(line, sizeof(line), "%zu,%.9g,%.9g,%.3f\n", e, s.train_loss,
                      s.val_loss, s.seconds);
        out << line;
    }
}

TrainConfig parse_train_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw IoError("train config: cannot open: " + path);
    TrainConfig cfg;
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        const auto hash = line.find('#');
        if (hash != std::string::npos) line.erase(hash);
        const auto eq = line.find('=');
        if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
        if (eq == std::string::npos) {
            throw IoError("train config: expected key=value at line " +
                          std::to_string(lineno));
        }
        auto trim = [](std::string s) {
            const auto b = s.find_first_not_of(" \t\r");
            const auto e = s.find_last_not_of(" \t\r");
            return b == std::string::npos ? std::string() : s.substr(b, e - b + 1);
        };
        const std::string key = trim(line.substr(0, eq));
        const std::string value = trim(line.substr(eq + 1));
        try {
            if (key == "n_train") cfg.n_train = std::stoull(value);
            else if (key == "n_val") cfg.n_val = std::stoull(value);
            else if (key == "batch_size") cfg.batch_size = std::stoi(value);
            else if (key == "max_epochs") cfg.max_epochs = std::stoi(value);
            else if (key == "lr") cfg.lr = std::stod(value);
            else if (key == "patience") cfg.patience = std::stoi(value);
            else if (key == "seed") cfg.master_seed = std::stoull(value);
            else if (key == "w_clean") cfg.loss_weights.w_clean = std::stod(value);
            else if (key == "w_freq") cfg.loss_weights.w_freq = std::stod(value);
            else if (key == "threads") cfg.n_threads = static_cast<unsigned>(std::stoul(value));
            else if (key == "lr_decay_patience") cfg.lr_decay_patience = std::stoi(value);
            else if (key == "input_len") cfg.model.input_len = std::stoi(value);
            else if (key == "kernel") cfg.model.kernel = std::stoi(value);
            else if (key == "c1") cfg.model.c1 = std::stoi(value);
            else if (key == "c2") cfg.model.c2 = std::stoi(value);
            else if (key == "c3") cfg.model.c3 = std::stoi(value);
            else if (key == "bottleneck") cfg.model.bottleneck = std::stoi(value);
            else if (key == "head_ch") cfg.model.head_ch = std::stoi(value);
            else if (key == "fc_dim") cfg.model.fc_dim = std::stoi(value);
            else throw IoError("train config: unknown key '" + key + "'");
        } catch (const std::invalid_argument&) {
            throw IoError("train config: bad value for '" + key + "' at line " +
                          std::to_string(lineno));
        }
    }
    return cfg;
}

}  // namespace beatnote
