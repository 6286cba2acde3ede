#include "structdiv/strategy.hpp"

#include "structdiv/errors.hpp"

namespace structdiv {

Strategy strategy_from_string(const std::string& s) {
    if (s == "random") return Strategy::Random;
    if (s == "ss") return Strategy::SS;
    if (s == "cos") return Strategy::CoS;
    if (s == "cos-pdc") return Strategy::CoSPdc;
    if (s == "random-pdc") return Strategy::RandomPdc;
    throw ValidationError("unknown strategy \"" + s +
                          "\" (expected random|ss|cos|cos-pdc|random-pdc)");
}

const char* to_string(Strategy s) {
    switch (s) {
        case Strategy::Random: return "random";
        case Strategy::SS: return "ss";
        case Strategy::CoS: return "cos";
        case Strategy::CoSPdc: return "cos-pdc";
        case Strategy::RandomPdc: return "random-pdc";
    }
    return "?";
}

void validate_chain_for_strategy(Strategy s, const ChainConfig& chain) {
    const std::size_t stages = chain.stages.size();
    switch (s) {
        case Strategy::Random:
        case Strategy::RandomPdc:
            if (stages != 1)
                throw ValidationError("strategy " + std::string(to_string(s)) +
                                      " needs a 1-stage chain; \"" + chain.name + "\" has " +
                                      std::to_string(stages));
            break;
        case Strategy::SS:
            if (stages != 2)
                throw ValidationError("strategy ss needs a 2-stage chain; \"" + chain.name +
                                      "\" has " + std::to_string(stages));
            break;
        case Strategy::CoS:
        case Strategy::CoSPdc:
            if (stages < 2)
                throw ValidationError("strategy " + std::string(to_string(s)) +
                                      " needs at least 2 stages; \"" + chain.name + "\" has " +
                                      std::to_string(stages));
            break;
    }
}

SampleSet run_strategy(Strategy s, const ChainConfig& chain, std::uint32_t k, Gateway& gateway,
                       const PdcConfig& pdc) {
    validate_chain_for_strategy(s, chain);
    const bool uses_pdc = s == Strategy::CoSPdc || s == Strategy::RandomPdc;
    if (!uses_pdc) return run_chain(chain, k, gateway);

    pdc.validate();
    if (k != pdc.clusters_k)
        throw ValidationError("pdc strategies return clusters_k samples; got k=" +
                              std::to_string(k) + " but clusters_k=" +
                              std::to_string(pdc.clusters_k));

    SampleSet oversampled = run_chain(chain, pdc.oversample, gateway);
    std::vector<std::string> texts;
    texts.reserve(oversampled.samples.size());
    for (const auto& rec : oversampled.samples) texts.push_back(rec.text);

    const EmbeddingMatrix emb = gateway.embed(texts);
    if (emb.rows != oversampled.k())
        throw DimensionMismatchError("embedding count " + std::to_string(emb.rows) +
                                     " != oversampled count " + std::to_string(oversampled.k()));
    for (std::size_t i = 0; i < oversampled.samples.size(); ++i) {
        const auto row = emb.row(i);
        oversampled.samples[i].embedding = std::vector<float>(row.begin(), row.end());
    }
    return pdc_select(oversampled, emb, pdc);
}

}  // namespace structdiv
