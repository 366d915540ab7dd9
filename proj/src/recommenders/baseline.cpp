#include "fairbook/error.hpp"
#include "fairbook/recommender.hpp"

namespace fairbook {

std::unique_ptr<RecModel> fit_baseline(const ModelConfig& config, const RatingMatrix& train) {
  switch (config.algorithm) {
    case Algorithm::Random:
      return std::make_unique<RandomModel>(config.seed, train.n_users(), train.n_items());
    case Algorithm::MostPop: {
      std::vector<double> counts(train.n_items());
      for (ItemIndex i = 0; i < counts.size(); ++i) counts[i] = static_cast<double>(train.item_degree(i));
      return std::make_unique<MostPopModel>(train.n_users(), std::move(counts));
    }
    default:
      throw ContractError("fit_baseline: algorithm must be Random or MostPop");
  }
}

}  // namespace fairbook
