#include <doctest.h>

#include <fstream>
#include <set>

#include <json.hpp>

#include "structdiv/chain.hpp"
#include "structdiv/errors.hpp"
#include "structdiv/kmeans.hpp"
#include "structdiv/rng.hpp"
#include "structdiv/strategy.hpp"
#include "test_helpers.hpp"

using namespace structdiv;
using nlohmann::json;

namespace {

LlmConfig stub_cfg() {
    LlmConfig cfg;
    cfg.base_url = "http://stub.invalid/v1";
    cfg.model = "stub-model";
    cfg.requests_per_minute = 0;
    return cfg;
}

class RecordingTransport : public Transport {
public:
    explicit RecordingTransport(std::shared_ptr<Transport> inner) : inner_(std::move(inner)) {}
    WireResponse send(const WireRequest& req) override {
        {
            std::lock_guard lock(m_);
            requests.push_back(req);
        }
        return inner_->send(req);
    }
    std::vector<WireRequest> requests;

private:
    std::mutex m_;
    std::shared_ptr<Transport> inner_;
};

ChainConfig make_chain(std::vector<ChainStage> stages) {
    ChainConfig c;
    c.name = "test-chain";
    c.stages = std::move(stages);
    c.validate();
    return c;
}

}  // namespace

TEST_CASE("template rendering") {
    CHECK(render_template("no placeholders", {}) == "no placeholders");
    CHECK(render_template("{a} and {b} and {a}", {{"a", "X"}, {"b", "Y"}}) == "X and Y and X");
    CHECK(render_template("regex {2,3} stays literal", {}) == "regex {2,3} stays literal");
    CHECK_THROWS_AS(render_template("{missing}", {}), TemplateError);
    CHECK(template_placeholders("{a} {b} {a} {not ok} {c}") ==
          std::vector<std::string>{"a", "b", "c"});
}

TEST_CASE("chain validation") {
    CHECK_THROWS_AS(make_chain({}), ValidationError);
    CHECK_THROWS_AS(make_chain({{"s", "", {}}}), ValidationError);
    CHECK_THROWS_AS(make_chain({{"s", "{later}", {}}, {"later", "x", {}}}), ValidationError);
    CHECK_THROWS_AS(make_chain({{"s", "x", {}}, {"s", "y", {}}}), ValidationError);
    CHECK_THROWS_AS(make_chain({{"bad name", "x", {}}}), ValidationError);
    CHECK_NOTHROW(make_chain({{"a", "first", {}}, {"b", "uses {a}", {}}}));
}

TEST_CASE("chain config file round-trip") {
    testutil::TempDir tmp("chain");
    {
        std::ofstream out(tmp.path("c.json"));
        out << R"({"name":"demo","stages":[
            {"name":"spec","template":"Pick a spec."},
            {"name":"text","template":"Write using {spec}.",
             "overrides":{"temperature":0.7,"top_p":0.9}}]})";
    }
    const ChainConfig c = ChainConfig::load(tmp.path("c.json"));
    CHECK(c.name == "demo");
    REQUIRE(c.stages.size() == 2);
    CHECK(c.stages[1].overrides.temperature == 0.7);
    CHECK(c.stages[1].overrides.top_p == 0.9);
    const auto j = c.to_json();
    CHECK(j["stages"][1]["overrides"]["temperature"] == 0.7);
}

TEST_CASE("1-stage chain is plain random sampling") {
    const json table{{"stages", {{"text", json{{"cycle", {"P1", "P2", "P3"}}}}}}};
    Gateway gw = Gateway::stub(stub_cfg(), table);
    const auto chain = make_chain({{"text", "Write a poem.", {}}});
    const SampleSet set = run_chain(chain, 3, gw);
    REQUIRE(set.k() == 3);
    CHECK(set.samples[0].text == "P1");
    CHECK(set.samples[1].text == "P2");
    CHECK(set.samples[2].text == "P3");
    for (const auto& s : set.samples) CHECK(s.provenance.empty());
    CHECK(set.samples[0].id == "s000000");
}

TEST_CASE("2-stage chain substitutes the spec into the final prompt") {
    const json table{{"stages",
                      {{"spec", "S"}, {"text", "final text"}}}};
    auto recording = std::make_shared<RecordingTransport>(make_stub_transport(table));
    Gateway gw(stub_cfg(), recording, system_clock(), std::make_shared<ResponseCache>());

    const auto chain =
        make_chain({{"spec", "Generate a spec.", {}}, {"text", "{spec} -> write", {}}});
    const SampleSet set = run_chain(chain, 1, gw);
    REQUIRE(set.k() == 1);
    CHECK(set.samples[0].text == "final text");
    CHECK(set.samples[0].provenance.at("spec") == "S");

    REQUIRE(recording->requests.size() == 2);
    const auto prompt_of = [&](std::size_t i) {
        return json::parse(recording->requests[i].body)["messages"][0]["content"]
            .get<std::string>();
    };
    CHECK(prompt_of(0) == "Generate a spec.");
    CHECK(prompt_of(1) == "S -> write");
}

TEST_CASE("provenance replay reproduces every prompt exactly") {
    const json table{{"stages",
                      {{"style", json{{"cycle", {"noir", "pastoral"}}}},
                       {"theme", json{{"cycle", {"loss", "renewal", "echoes"}}}},
                       {"poem", json{{"cycle", {"poem A", "poem B"}}}}}}};
    auto recording = std::make_shared<RecordingTransport>(make_stub_transport(table));
    Gateway gw(stub_cfg(), recording, system_clock(), std::make_shared<ResponseCache>());

    const auto chain = make_chain({{"style", "Pick a style.", {}},
                                   {"theme", "Theme for {style}.", {}},
                                   {"poem", "Write {style} poem about {theme}.", {}}});
    const std::uint32_t k = 4;
    const SampleSet set = run_chain(chain, k, gw);

    // prompts by (sample, stage) from the recorded wire traffic
    std::map<std::uint64_t, std::string> prompts;
    for (const auto& r : recording->requests)
        prompts[r.sample_index] = json::parse(r.body)["messages"][0]["content"];

    for (std::uint32_t i = 0; i < k; ++i) {
        const auto& rec = set.samples[i];
        // non-final stage outputs are all present
        REQUIRE(rec.provenance.size() == 2);
        std::map<std::string, std::string> ctx(rec.provenance.begin(), rec.provenance.end());
        for (std::uint32_t j = 0; j < 3; ++j) {
            const std::string replayed = render_template(chain.stages[j].template_text, ctx);
            CHECK(replayed == prompts.at(std::uint64_t{i} * 3 + j));
        }
    }
}

TEST_CASE("k chain executions are independent draws") {
    json table;
    for (char ch = 'a'; ch <= 'j'; ++ch)
        table["stages"]["spec"]["cycle"].push_back(std::string(1, ch));
    table["stages"]["text"]["value"] = "t";
    // note: stages resolve by sample_index; with 2 stages the spec stage sees
    // even indices 0,2,4,... so a 10-cycle yields 5 distinct values twice
    Gateway gw = Gateway::stub(stub_cfg(), table);
    const auto chain = make_chain({{"spec", "Pick.", {}}, {"text", "Use {spec}.", {}}});
    const SampleSet set = run_chain(chain, 10, gw);
    std::set<std::string> specs;
    for (const auto& s : set.samples) specs.insert(s.provenance.at("spec"));
    CHECK(specs.size() == 5);
    CHECK(gw.transport_calls() == 20);  // no cross-sample cache collapse
}

TEST_CASE("stage overrides reach the wire") {
    auto recording = std::make_shared<RecordingTransport>(
        make_stub_transport(json{{"default", "x"}}));
    Gateway gw(stub_cfg(), recording, system_clock(), std::make_shared<ResponseCache>());
    ChainConfig chain = make_chain({{"a", "p", {}}});
    chain.stages[0].overrides.temperature = 0.25;
    chain.stages[0].overrides.top_p = 0.5;
    run_chain(chain, 1, gw);
    const auto body = json::parse(recording->requests.at(0).body);
    CHECK(body["temperature"] == 0.25);
    CHECK(body["top_p"] == 0.5);
    CHECK(body["model"] == "stub-model");
}

// ---- kmeans ----------------------------------------------------------------

namespace {

EmbeddingMatrix blob_matrix(std::uint32_t blobs, std::uint32_t per_blob, double separation,
                            std::uint64_t seed, std::vector<std::uint32_t>* labels = nullptr) {
    SplitMix64 rng(seed);
    const std::size_t dim = 4;
    std::vector<std::vector<double>> centers;
    while (centers.size() < blobs) {
        std::vector<double> c(dim);
        for (auto& v : c) v = (rng.next_double() * 2 - 1) * separation * 2.5;
        bool ok = true;
        for (const auto& other : centers) {
            double d2 = 0;
            for (std::size_t t = 0; t < dim; ++t) d2 += (c[t] - other[t]) * (c[t] - other[t]);
            ok = ok && d2 >= separation * separation;
        }
        if (ok) centers.push_back(c);
    }
    EmbeddingMatrix m;
    for (std::uint32_t b = 0; b < blobs; ++b)
        for (std::uint32_t i = 0; i < per_blob; ++i) {
            std::vector<float> row(dim);
            for (std::size_t t = 0; t < dim; ++t) {
                // approximate unit gaussian from 12 uniforms
                double g = 0;
                for (int u = 0; u < 12; ++u) g += rng.next_double();
                row[t] = static_cast<float>(centers[b][t] + (g - 6.0));
            }
            m.push_row(row);
            if (labels) labels->push_back(b);
        }
    return m;
}

}  // namespace

TEST_CASE("kmeans: one cluster per point when k equals rows") {
    SplitMix64 rng(1);
    EmbeddingMatrix m;
    for (int i = 0; i < 6; ++i) {
        std::vector<float> row(3);
        for (auto& v : row) v = static_cast<float>(rng.next_double() * 10);
        m.push_row(row);
    }
    PdcConfig cfg;
    cfg.seed = 3;
    const auto res = kmeans(m, 6, cfg);
    std::set<std::uint32_t> seen(res.assignments.begin(), res.assignments.end());
    CHECK(seen.size() == 6);  // a permutation
}

TEST_CASE("kmeans recovers two well-separated blobs") {
    std::vector<std::uint32_t> labels;
    const auto m = blob_matrix(2, 20, 15.0, 42, &labels);
    PdcConfig cfg;
    cfg.seed = 7;
    const auto res = kmeans(m, 2, cfg);
    // all points of one blob share a cluster, and the two blobs differ
    CHECK(res.assignments[0] != res.assignments[20]);
    for (std::size_t i = 0; i < labels.size(); ++i)
        CHECK(res.assignments[i] == res.assignments[labels[i] == 0 ? 0 : 20]);
}

TEST_CASE("kmeans is deterministic for a given seed") {
    const auto m = blob_matrix(3, 15, 12.0, 5);
    PdcConfig cfg;
    cfg.seed = 99;
    const auto a = kmeans(m, 3, cfg);
    const auto b = kmeans(m, 3, cfg);
    CHECK(a.assignments == b.assignments);
    CHECK(a.centroids == b.centroids);
}

TEST_CASE("kmeans objective never increases between non-reseed iterations") {
    const auto m = blob_matrix(4, 25, 6.0, 11);
    PdcConfig cfg;
    cfg.seed = 2;
    const auto res = kmeans(m, 4, cfg);
    const std::set<std::uint32_t> reseeds(res.reseed_iterations.begin(),
                                          res.reseed_iterations.end());
    for (std::size_t t = 1; t < res.wcss_trace.size(); ++t) {
        if (reseeds.count(static_cast<std::uint32_t>(t))) continue;
        CHECK(res.wcss_trace[t] <= res.wcss_trace[t - 1] + 1e-9);
    }
}

TEST_CASE("kmeans rejects degenerate input") {
    EmbeddingMatrix m;
    for (int i = 0; i < 5; ++i) m.push_row(std::vector<float>{1.0f, 2.0f});
    PdcConfig cfg;
    CHECK_THROWS_AS(kmeans(m, 2, cfg), DegenerateInputError);
}

// ---- pdc_select -------------------------------------------------------------

TEST_CASE("pdc_select returns exactly one representative per blob") {
    std::vector<std::uint32_t> labels;
    const auto m = blob_matrix(2, 15, 15.0, 21, &labels);
    std::vector<std::vector<std::uint32_t>> active(m.rows, std::vector<std::uint32_t>{0});
    auto set = testutil::make_set(active, 2);

    PdcConfig cfg;
    cfg.oversample = 30;
    cfg.clusters_k = 2;
    cfg.seed = 4;
    const SampleSet out = pdc_select(set, m, cfg);
    REQUIRE(out.k() == 2);
    std::set<std::uint32_t> rep_blobs;
    for (const auto& rec : out.samples) {
        const std::uint32_t idx = static_cast<std::uint32_t>(std::stoul(rec.id.substr(1)));
        rep_blobs.insert(labels[idx]);
    }
    CHECK(rep_blobs.size() == 2);
}

TEST_CASE("pdc_select contract errors") {
    const auto m = blob_matrix(2, 10, 12.0, 8);
    std::vector<std::vector<std::uint32_t>> active(m.rows, std::vector<std::uint32_t>{0});
    const auto set = testutil::make_set(active, 2);

    PdcConfig cfg;
    cfg.oversample = 19;  // mismatch with set.k == 20
    cfg.clusters_k = 2;
    CHECK_THROWS_AS(pdc_select(set, m, cfg), ValidationError);

    EmbeddingMatrix identical;
    for (int i = 0; i < 20; ++i) identical.push_row(std::vector<float>{1.0f, 1.0f});
    cfg.oversample = 20;
    CHECK_THROWS_AS(pdc_select(set, identical, cfg), DegenerateInputError);
}

// ---- strategies ---------------------------------------------------------------

TEST_CASE("strategy parsing and chain arity") {
    CHECK(strategy_from_string("cos-pdc") == Strategy::CoSPdc);
    CHECK_THROWS_AS(strategy_from_string("bogus"), ValidationError);

    const auto one = make_chain({{"text", "p", {}}});
    const auto two = make_chain({{"a", "p", {}}, {"b", "{a}", {}}});
    CHECK_NOTHROW(validate_chain_for_strategy(Strategy::Random, one));
    CHECK_THROWS_AS(validate_chain_for_strategy(Strategy::Random, two), ValidationError);
    CHECK_THROWS_AS(validate_chain_for_strategy(Strategy::SS, one), ValidationError);
    CHECK_NOTHROW(validate_chain_for_strategy(Strategy::SS, two));
    CHECK_THROWS_AS(validate_chain_for_strategy(Strategy::CoS, one), ValidationError);
}

TEST_CASE("strategy random equals run_chain on the same 1-stage chain") {
    const json table{{"stages", {{"text", json{{"cycle", {"A", "B", "C"}}}}}}};
    const auto chain = make_chain({{"text", "Write.", {}}});
    PdcConfig pdc;

    Gateway gw1 = Gateway::stub(stub_cfg(), table);
    const auto via_strategy = run_strategy(Strategy::Random, chain, 3, gw1, pdc);
    Gateway gw2 = Gateway::stub(stub_cfg(), table);
    const auto via_chain = run_chain(chain, 3, gw2);

    REQUIRE(via_strategy.k() == via_chain.k());
    for (std::uint32_t i = 0; i < 3; ++i)
        CHECK(via_strategy.samples[i] == via_chain.samples[i]);
}

TEST_CASE("cos-pdc oversamples, embeds, and selects clusters_k outputs") {
    json by_index = json::object();
    for (int idx = 0; idx < 80; ++idx)
        by_index[std::to_string(idx)] = "output " + std::to_string(idx);
    const json table{{"stages",
                      {{"spec", json{{"by_index", by_index}}},
                       {"text", json{{"by_index", by_index}}}}},
                     {"embeddings", {{"dim", 6}, {"mode", "hash"}}}};
    Gateway gw = Gateway::stub(stub_cfg(), table);

    const auto chain = make_chain({{"spec", "Pick.", {}}, {"text", "Use {spec}.", {}}});
    PdcConfig pdc;
    pdc.oversample = 40;
    pdc.clusters_k = 10;
    pdc.seed = 6;

    CHECK_THROWS_AS(run_strategy(Strategy::CoSPdc, chain, 9, gw, pdc), ValidationError);

    const SampleSet out = run_strategy(Strategy::CoSPdc, chain, 10, gw, pdc);
    CHECK(out.k() == 10);
    CHECK(gw.transport_calls() == 40 * 2 + 1);  // chains + one batched embed call
    for (const auto& rec : out.samples) {
        REQUIRE(rec.embedding.has_value());
        CHECK(rec.embedding->size() == 6);
    }
}
