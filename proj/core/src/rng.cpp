#include "mlsep/rng.hpp"

#include <stdexcept>

namespace mlsep {

void AliasTable::build(const std::vector<double>& weights) {
    const std::size_t n = weights.size();
    if (n == 0) throw std::invalid_argument("AliasTable: empty weight vector");
    total_ = 0;
    for (double w : weights) {
        if (w < 0 || !std::isfinite(w)) throw std::invalid_argument("AliasTable: bad weight");
        total_ += w;
    }
    if (total_ <= 0) throw std::invalid_argument("AliasTable: total weight must be positive");
    prob_.assign(n, 0.0);
    alias_.assign(n, 0);
    std::vector<double> scaled(n);
    for (std::size_t i = 0; i < n; ++i) scaled[i] = weights[i] * n / total_;
    std::vector<std::uint32_t> small, large;
    for (std::size_t i = 0; i < n; ++i)
        (scaled[i] < 1.0 ? small : large).push_back(static_cast<std::uint32_t>(i));
    while (!small.empty() && !large.empty()) {
        const auto s = small.back();
        const auto l = large.back();
        small.pop_back();
        prob_[s] = scaled[s];
        alias_[s] = l;
        scaled[l] -= 1.0 - scaled[s];
        if (scaled[l] < 1.0) {
            large.pop_back();
            small.push_back(l);
        }
    }
    for (auto i : large) prob_[i] = 1.0;
    for (auto i : small) prob_[i] = 1.0;  // numerical leftovers
}

}  // namespace mlsep
