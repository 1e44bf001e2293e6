#pragma once

#include <cstddef>
#include <functional>
#include <span>
#include <vector>

#include "courtesy/numerics/optim.hpp"
#include "courtesy/numerics/tape.hpp"

namespace courtesy::dialogue {

struct TrainOptions {
  int epochs = 10;
  int batch_size = 96;
  double lr = 0.001;
  double clip_norm = 5.0;

  void validate() const;
};

struct TrainLog {
  std::vector<double> epoch_losses;
  std::vector<double> step_losses;
  std::size_t steps = 0;
};

// Builds the loss of one minibatch (example indices) on `tape`.
using BatchLoss = std::function<numerics::Var<float>(numerics::Tape<float>&, std::span<const std::size_t>,
                                                     numerics::Rng& dropout_rng)>;

// Called after each epoch with its index; returning false stops training.
using EpochHook = std::function<bool(int epoch)>;

// Seeded minibatch Adam loop. Per epoch the example order is a shuffle drawn
// from rng.fork(1); dropout masks come from rng.fork(2).
void run_training(const numerics::ParamList<float>& params, std::size_t n_examples, const TrainOptions& options,
                  const numerics::Rng& rng, const BatchLoss& batch_loss, TrainLog* log = nullptr,
                  const EpochHook& after_epoch = {});

}  // namespace courtesy::dialogue
