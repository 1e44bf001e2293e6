#pragma once

#include <filesystem>

#include "courtesy/corpus/vocab.hpp"
#include "courtesy/numerics/rng.hpp"
#include "courtesy/numerics/tensor.hpp"

namespace courtesy::corpus {

// |V| x d embedding table. Rows for tokens found in the file are copied from
// it; every other row is Glorot-uniform with bound sqrt(6 / (|V| + d)); the
// <pad> row is zero. The file is UTF-8 text, one "token v1 ... vd" per line,
// with an optional leading "count dim" header. A vector of the wrong length
// is a UsageError.
numerics::Matrix<float> load_pretrained_embeddings(const std::filesystem::path& path, const Vocab& vocab,
                                                   numerics::Index dim, numerics::Rng& rng);

// Same initialisation with no file (all rows random except <pad>).
numerics::Matrix<float> random_embeddings(const Vocab& vocab, numerics::Index dim, numerics::Rng& rng);

}  // namespace courtesy::corpus
