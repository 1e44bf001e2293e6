#include "courtesy/corpus/embeddings.hpp"

#include <fstream>
#include <sstream>

#include "courtesy/errors.hpp"
#include "courtesy/numerics/optim.hpp"

namespace courtesy::corpus {

numerics::Matrix<float> random_embeddings(const Vocab& vocab, numerics::Index dim, numerics::Rng& rng) {
  auto table = numerics::xavier<float>(static_cast<numerics::Index>(vocab.size()), dim, rng);
  table.row(Vocab::kPad).setZero();
  return table;
}

numerics::Matrix<float> load_pretrained_embeddings(const std::filesystem::path& path, const Vocab& vocab,
                                                   numerics::Index dim, numerics::Rng& rng) {
  auto table = random_embeddings(vocab, dim, rng);
  std::ifstream in(path);
  if (!in) throw UsageError("cannot open embeddings " + path.string());
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    std::istringstream fields(line);
    std::string token;
    if (!(fields >> token)) continue;
    std::vector<float> values;
    float v;
    while (fields >> v) values.push_back(v);
    if (line_no == 1 && values.size() == 1 && token.find_first_not_of("0123456789") == std::string::npos) {
      if (static_cast<numerics::Index>(values[0]) != dim) {
        throw UsageError(path.string() + ": header dimension " + std::to_string(static_cast<long>(values[0])) +
                         " != configured " + std::to_string(dim));
      }
      continue;
    }
    if (static_cast<numerics::Index>(values.size()) != dim) {
      throw UsageError(path.string() + ":" + std::to_string(line_no) + ": vector has " + std::to_string(values.size()) +
                       " dims, expected " + std::to_string(dim));
    }
    if (!vocab.contains(token)) continue;
    const int id = vocab.id(token);
    if (id == Vocab::kPad) continue;
    for (numerics::Index j = 0; j < dim; ++j) table(id, j) = values[static_cast<std::size_t>(j)];
  }
  return table;
}

}  // namespace courtesy::corpus
