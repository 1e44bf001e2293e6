#include "courtesy/dialogue/train.hpp"

#include <algorithm>
#include <numeric>

#include "courtesy/errors.hpp"

namespace courtesy::dialogue {

void TrainOptions::validate() const {
  if (epochs < 0) throw UsageError("epochs must be >= 0");
  if (batch_size < 1) throw UsageError("batch size must be >= 1");
  if (!(lr > 0)) throw UsageError("learning rate must be positive");
  if (!(clip_norm > 0)) throw UsageError("clip norm must be positive");
}

void run_training(const numerics::ParamList<float>& params, std::size_t n_examples, const TrainOptions& options,
                  const numerics::Rng& rng, const BatchLoss& batch_loss, TrainLog* log, const EpochHook& after_epoch) {
  options.validate();
  if (n_examples == 0) throw UsageError("training set is empty");
  numerics::Rng shuffle_rng = rng.fork(1);
  numerics::Rng dropout_rng = rng.fork(2);
  auto adam = numerics::make_adam(params, numerics::AdamOptions{.lr = options.lr});
  std::vector<std::size_t> order(n_examples);
  const auto batch = static_cast<std::size_t>(options.batch_size);

  for (int epoch = 0; epoch < options.epochs; ++epoch) {
    std::iota(order.begin(), order.end(), 0);
    shuffle_rng.shuffle(std::span<std::size_t>(order));
    double total = 0;
    std::size_t batches = 0;
    for (std::size_t start = 0; start < n_examples; start += batch) {
      const std::size_t end = std::min(n_examples, start + batch);
      numerics::zero_grads(params);
      numerics::Tape<float> tape;
      auto loss = batch_loss(tape, std::span<const std::size_t>(order).subspan(start, end - start), dropout_rng);
      const double value = loss.scalar();
      total += value;
      ++batches;
      tape.backward(loss);
      numerics::clip_grad_norm(params, options.clip_norm);
      numerics::adam_step(params, adam);
      if (log != nullptr) {
        log->step_losses.push_back(value);
        ++log->steps;
      }
    }
    if (log != nullptr) log->epoch_losses.push_back(total / static_cast<double>(batches));
    if (after_epoch && !after_epoch(epoch)) break;
  }
}

}  // namespace courtesy::dialogue
