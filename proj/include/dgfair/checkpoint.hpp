#pragma once

#include <string>
#include <utility>
#include <vector>

#include "dgfair/nn.hpp"

namespace dgfair {

// Per-epoch loss component values. `monitor` re-evaluates the joint loss on
// a fixed probe batch so convergence is measured without resampling noise.
struct EpochRecord {
    double total = 0, ds = 0, cls = 0, contrast = 0, fair = 0;
    double monitor = 0;
};

// Single-file training state archive: config echo, seed, epoch counter,
// sampler rng state, loss trace, parameter tensors and optimizer moments,
// all at 64-bit precision so a resumed run continues bit-exactly.
struct Checkpoint {
    std::vector<std::pair<std::string, std::string>> config;
    unsigned long seed = 0;
    int epochs_done = 0;
    int converged_epoch = 0;  // 0 = not yet converged
    bool plugin_mode = false;
    std::string rng_state;
    std::vector<EpochRecord> trace;
    nn::ParamStore params;
};

void save_checkpoint(const Checkpoint& ck, const std::string& path);
Checkpoint load_checkpoint(const std::string& path);

}  // namespace dgfair
