#pragma once

#include <cstdint>
#include <string>

#include "structdiv/chain.hpp"
#include "structdiv/kmeans.hpp"

namespace structdiv {

enum class Strategy { Random, SS, CoS, CoSPdc, RandomPdc };

Strategy strategy_from_string(const std::string& s);
const char* to_string(Strategy s);

// Number of chain stages a strategy expects: random needs exactly 1, ss
// exactly 2, cos at least 2; the *_pdc variants wrap their base strategy.
void validate_chain_for_strategy(Strategy s, const ChainConfig& chain);

// random/ss/cos run the chain k times. The *_pdc strategies run it
// pdc.oversample times, embed the texts through the gateway, and pdc_select
// down to clusters_k (which must equal k); PDC outputs keep their embeddings
// inline.
SampleSet run_strategy(Strategy s, const ChainConfig& chain, std::uint32_t k, Gateway& gateway,
                       const PdcConfig& pdc);

}  // namespace structdiv
