#include <gtest/gtest.h>

#include <cmath>
#include <fstream>
#include <random>
#include <sstream>

#include "gahmm/errors.hpp"
#include "gahmm/pipelines.hpp"
#include "gahmm/text_util.hpp"

using namespace gahmm;

namespace {

std::string read_fixture(const std::string& name) {
  std::ifstream in(std::string(GAHMM_DATA_DIR) + "/" + name);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

LayerConfig layer_from(const std::string& catalog_text, double alpha = kDefaultSmoothing) {
  auto c = parse_catalog(catalog_text);
  auto b = build_model_bank(c, alpha);
  return make_layer(std::move(c), std::move(b));
}

LayerConfig fixture_layer(const std::string& name) { return layer_from(read_fixture(name)); }

Stream stream_of(const std::vector<std::string>& tokens) {
  std::vector<ObservationEvent> ev;
  for (const auto& t : tokens) ev.push_back({t});
  return make_stream(ev);
}

const std::vector<std::string> kCabinet{"Towards_cabinet", "opens_cabinet", "object_picked", "Object_Carrying",
                                        "Walking"};

std::vector<std::string> labels_of(const std::vector<RecognitionResult>& rs) {
  std::vector<std::string> out;
  for (const auto& r : rs) out.push_back(r.label);
  return out;
}

struct GoldenContext {
  std::vector<std::size_t> indices;
  std::vector<std::string> tokens;
};

std::map<std::string, GoldenContext> read_golden_contexts() {
  std::map<std::string, GoldenContext> out;
  const auto content = read_fixture("exchange_boxes.contexts");
  for (auto line : text::lines(content)) {
    if (line.empty() || line.front() == '#') continue;
    const auto cols = text::split(line, '\t');
    auto& g = out[std::string(cols.at(0))];
    for (auto i : text::split_ws(cols.at(1))) g.indices.push_back(static_cast<std::size_t>(*text::parse_int(i)));
    for (auto t : text::split_ws(cols.at(2))) g.tokens.emplace_back(t);
  }
  return out;
}

}  // namespace

TEST(Cascade, CabinetSingleLayer) {
  const auto layer = fixture_layer("cabinet.ont");
  Trace trace;
  RunContext ctx;
  ctx.trace = &trace;
  const auto out = run_chmm(stream_of(kCabinet), layer, ctx);
  EXPECT_EQ(labels_of(out.results), (std::vector<std::string>{"Object_taken_cabinet", "Unloading"}));
  EXPECT_EQ(tokens_of(out.stream), (std::vector<std::string>{"Unloading"}));
  EXPECT_EQ(out.stream.front().sources, (std::vector<std::size_t>{0, 1, 2, 3, 4}));
  EXPECT_EQ(out.results[0].sources, (std::vector<std::size_t>{0, 1, 2}));
  const auto log = trace.str();
  const auto a = log.find("stream(5)"), b = log.find("stream(3)"), c = log.find("stream(1)");
  ASSERT_NE(a, std::string::npos);
  ASSERT_NE(b, std::string::npos);
  ASSERT_NE(c, std::string::npos);
  EXPECT_LT(a, b);
  EXPECT_LT(b, c);
}

TEST(Cascade, TwoLayerIntermediateStream) {
  LayerStack stack{{fixture_layer("cabinet_x1.ont"), fixture_layer("cabinet_x2.ont")}};
  const auto out = run_layer_stack(stream_of(kCabinet), stack);
  ASSERT_EQ(out.size(), 2u);
  EXPECT_EQ(tokens_of(out[0].output),
            (std::vector<std::string>{"Object_taken_cabinet", "Object_Carrying", "Walking"}));
  EXPECT_EQ(labels_of(out[0].results), (std::vector<std::string>{"Object_taken_cabinet"}));
  EXPECT_EQ(labels_of(out[1].results), (std::vector<std::string>{"Unloading"}));
  EXPECT_EQ(out[1].results[0].layer, 2);
  EXPECT_EQ(out[1].results[0].sources, (std::vector<std::size_t>{0, 1, 2, 3, 4}));
}

TEST(Cascade, CodesOverload) {
  const auto layer = fixture_layer("cabinet.ont");
  std::vector<Code> codes;
  for (const auto& t : kCabinet) codes.push_back(layer.catalog.encode(t));
  const auto [final_codes, results] = run_chmm(codes, layer, 4);
  EXPECT_EQ(final_codes, (std::vector<Code>{layer.catalog.encode("Unloading")}));
  EXPECT_EQ(results.size(), 2u);
  EXPECT_THROW(run_chmm(codes, layer, 0), DomainError);
}

TEST(Cascade, UnrecognizableStreamIsUnchanged) {
  const auto layer = fixture_layer("cabinet.ont");
  const auto in = stream_of({"a", "b", "c", "d", "e"});
  const auto out = run_chmm(in, layer);
  EXPECT_EQ(out.stream, in);
  EXPECT_TRUE(out.results.empty());
}

TEST(Cascade, UnreachableFloorDegeneratesToIdentity) {
  auto layer = fixture_layer("activities.ont");
  layer.floor.kind = AcceptanceFloor::Kind::Unreachable;
  const auto& names = layer.catalog.vocab().names();
  std::mt19937_64 rng(5);
  for (int trial = 0; trial < 100; ++trial) {
    std::vector<std::string> toks(3 + rng() % 10);
    for (auto& t : toks) t = names[1 + rng() % (names.size() - 1)];
    const auto in = stream_of(toks);
    const auto out = run_chmm(in, layer);
    EXPECT_EQ(out.stream, in);
    EXPECT_TRUE(out.results.empty());
  }
  // The same stream with the default floor cascades.
  layer.floor = {};
  EXPECT_FALSE(run_chmm(stream_of({"Group_Merging", "Group_United", "Group_Shaking_hands"}), layer).results.empty());
}

TEST(Cascade, SubstitutionCountIsBounded) {
  // Permissive floor: almost every window is accepted.
  auto layer = layer_from("a - b - c -> X\nX - X - X -> Y\nb - X - a -> Z\n");
  layer.floor = {AcceptanceFloor::Kind::Fixed, -1e9};
  layer.max_passes = 1000;
  std::mt19937_64 rng(42);
  const std::vector<std::string> pool{"a", "b", "c", "X", "Y", "q"};
  for (int trial = 0; trial < 200; ++trial) {
    std::vector<std::string> toks(3 + rng() % 20);
    for (auto& t : toks) t = pool[rng() % pool.size()];
    const auto n = toks.size();
    const auto out = run_chmm(stream_of(toks), layer);
    const auto bound = (n + 1) / 2;  // ceil(n / (w - 1)) with w = 3
    EXPECT_LE(out.results.size(), bound);
    EXPECT_EQ(out.stream.size(), n - 2 * out.results.size());
  }
}

TEST(Concatenated, FixedWindowTrainingIdentity) {
  auto layer = fixture_layer("activities.ont");
  layer.architecture = Architecture::Concatenated;
  layer.windowing.kind = WindowCase::Fixed;
  for (const auto& e : layer.catalog.entries()) {
    const auto rs = run_nhmm(stream_of(e.pattern), layer);
    ASSERT_EQ(rs.size(), 1u);
    EXPECT_EQ(rs[0].label, e.label);
    EXPECT_EQ(rs[0].architecture, Architecture::Concatenated);
  }
}

TEST(Concatenated, SocialInteractionWindow) {
  const auto layer = fixture_layer("activities.ont");
  const auto rs = run_nhmm(stream_of({"Walking", "Group_Merging", "Group_United", "Group_Shaking_hands", "Left"}),
                           layer);
  ASSERT_EQ(rs.size(), 1u);
  EXPECT_EQ(rs[0].label, "Social_interaction");
  EXPECT_EQ(rs[0].span_start, 1u);
  EXPECT_EQ(rs[0].span_end, 3u);
}

TEST(Concatenated, OovStreamIsRejected) {
  const auto layer = fixture_layer("activities.ont");
  const auto stream = stream_of({"x1", "x2", "x3", "x4", "x5", "x6"});
  EXPECT_TRUE(run_nhmm(stream, layer).empty());
  // Each window is all-OOV, so its best score sits under the uniform floor.
  std::vector<Code> oov(3, Vocabulary::kOov);
  const auto d = decode_window(layer, oov);
  EXPECT_LT(d.log_likelihood, uniform_log_likelihood(layer.catalog.vocab().size(), 3));
  EXPECT_FALSE(d.accepted);
}

TEST(Concatenated, FlooringTraceNotesUnconsumed) {
  auto layer = fixture_layer("activities.ont");
  layer.windowing.kind = WindowCase::Flooring;
  Trace trace;
  RunContext ctx;
  ctx.trace = &trace;
  std::vector<std::string> toks(11, "Walking");
  run_nhmm(stream_of(toks), layer, ctx);
  EXPECT_NE(trace.str().find("windows: 3"), std::string::npos);
  EXPECT_NE(trace.str().find("unconsumed trailing events: 2"), std::string::npos);
}

TEST(Concatenated, ShortStream) {
  const auto layer = fixture_layer("activities.ont");
  EXPECT_TRUE(run_nhmm(stream_of({"Walking"}), layer).empty());
  EXPECT_TRUE(run_nhmm(Stream{}, layer).empty());
}

TEST(Decoder, LabelState) {
  auto layer = fixture_layer("cabinet.ont");
  layer.decoder = Decoder::LabelState;
  std::vector<Code> codes;
  for (const auto& t : kCabinet) codes.push_back(layer.catalog.encode(t));
  const auto d = decode_window(layer, std::span<const Code>(codes).subspan(0, 3));
  EXPECT_EQ(d.label, "Object_taken_cabinet");
  EXPECT_TRUE(d.accepted);
  EXPECT_GT(d.confidence, 0.0);
  EXPECT_LE(d.confidence, 1.0);
}

TEST(Decoder, MinConfidenceGate) {
  auto layer = fixture_layer("cabinet.ont");
  const std::vector<Code> near{layer.catalog.encode("Towards_cabinet"), layer.catalog.encode("opens_cabinet"),
                               Vocabulary::kOov};
  EXPECT_TRUE(decode_window(layer, near).accepted);
  layer.min_confidence = 0.5;
  EXPECT_FALSE(decode_window(layer, near).accepted);
}

TEST(Layer, Filters) {
  auto layer = fixture_layer("cabinet.ont");
  layer.filters.confidence_floor = 0.5;
  layer.filters.trivial_symbols = {"Blink"};
  layer.filters.distinct = true;
  layer.filters.frequency_rules = {{"Walking", "Towards_cabinet", "Leaving", "Arriving", 1}};
  std::vector<ObservationEvent> ev{{"Towards_cabinet"}, {"Blink"}, {"opens_cabinet"}, {"opens_cabinet"},
                                   {"Noise", {}, {}, 0, 0.2},     {"object_picked"}, {"Object_Carrying"},
                                   {"Walking"},       {"Walking"}};
  Trace trace;
  RunContext ctx;
  ctx.trace = &trace;
  const auto out = run_layer(make_stream(ev), layer, ctx);
  EXPECT_EQ(tokens_of(out.input), (std::vector<std::string>{"Towards_cabinet", "opens_cabinet", "object_picked",
                                                            "Object_Carrying", "Walking"}));
  EXPECT_EQ(out.input[1].sources, (std::vector<std::size_t>{2, 3}));
  EXPECT_EQ(labels_of(out.results), (std::vector<std::string>{"Object_taken_cabinet", "Unloading"}));
  EXPECT_EQ(out.frequency, (std::vector<FrequencyFinding>{{"Leaving", 1}}));
  const auto log = trace.str();
  EXPECT_NE(log.find("confidence filter: removed Noise"), std::string::npos);
  EXPECT_NE(log.find("trivial filter: removed Blink"), std::string::npos);
  const auto& prov = out.results[0].provenance;
  EXPECT_NE(std::find(prov.begin(), prov.end(), "confidence-filter"), prov.end());
  EXPECT_NE(std::find(prov.begin(), prov.end(), "trivial-filter"), prov.end());
}

TEST(Layer, CorrelationProvenance) {
  auto layer = fixture_layer("cabinet.ont");
  layer.architecture = Architecture::Concatenated;
  layer.filters.correlation = true;
  const auto rs = run_nhmm(stream_of({"Towards_cabinet", "Noise", "opens_cabinet", "object_picked"}), layer);
  ASSERT_FALSE(rs.empty());
  EXPECT_EQ(rs[0].label, "Object_taken_cabinet");
  EXPECT_EQ(rs[0].sources, (std::vector<std::size_t>{0, 2, 3}));
  const auto& prov = rs[0].provenance;
  EXPECT_NE(std::find(prov.begin(), prov.end(), "correlation-substituted"), prov.end());
}

TEST(Stack, DepthOneEqualsSingleCascade) {
  const auto layer = fixture_layer("cabinet.ont");
  const auto out = run_layer_stack(stream_of(kCabinet), LayerStack{{layer}});
  const auto direct = run_chmm(stream_of(kCabinet), layer);
  ASSERT_EQ(out.size(), 1u);
  EXPECT_EQ(out[0].results, direct.results);
  EXPECT_EQ(out[0].output, direct.stream);
}

TEST(Stack, ValidationErrors) {
  LayerStack missing{{fixture_layer("cabinet_x1.ont"), layer_from("a - b - c -> Q\n")}};
  EXPECT_THROW(missing.validate(), ConfigError);
  EXPECT_THROW(LayerStack{}.validate(), ConfigError);
  auto width = fixture_layer("cabinet.ont");
  width.windowing.width = 2;
  EXPECT_THROW(LayerStack{{width}}.validate(), ConfigError);
  auto hybrid = fixture_layer("cabinet.ont");
  hybrid.architecture = Architecture::Hybrid;
  EXPECT_THROW(LayerStack{{hybrid}}.validate(), ConfigError);
  auto corr = layer_from("a -> X\nb -> Y\n");
  corr.filters.correlation = true;
  EXPECT_THROW(LayerStack{{corr}}.validate(), ConfigError);
}

TEST(Partition, EntitySplitGolden) {
  const auto ev = parse_event_stream(read_fixture("exchange_boxes.events"));
  const auto part = partition_contexts(ev, ContextMode::PerEntity);
  const auto golden = read_golden_contexts();
  ASSERT_EQ(part.contexts.size(), golden.size());
  for (const auto& [key, g] : golden) {
    const auto& got = part.contexts.at(key);
    EXPECT_EQ(got, g.indices) << key;
    std::vector<std::string> toks;
    for (auto i : got) toks.push_back(ev[i].token);
    EXPECT_EQ(toks, g.tokens) << key;
  }
  const auto& h1 = part.contexts.at("H1");
  EXPECT_EQ(ev[h1[0]].token, "H1_Walking");
  EXPECT_EQ(ev[h1[1]].token, "H1_O1_Object_carrying");
  EXPECT_EQ(ev[h1[2]].token, "Group_Merging");
}

TEST(Partition, OrderAndFanOutProperties) {
  std::mt19937_64 rng(77);
  const std::vector<std::string> pool{"H1_Walking", "H2_O1_Object_carrying", "H1_H2_Hand_shaking",
                                      "Group_Merging", "H3_O2_Giving_H1", "Standing"};
  for (int trial = 0; trial < 300; ++trial) {
    std::vector<ObservationEvent> ev(1 + rng() % 25);
    for (auto& e : ev) e.token = pool[rng() % pool.size()];
    ev.front().token = "H1_Walking";
    annotate_ids(ev);
    const auto part = partition_contexts(ev, ContextMode::PerEntity);
    for (const auto& [key, idx] : part.contexts) {
      EXPECT_TRUE(std::is_sorted(idx.begin(), idx.end()));
      EXPECT_EQ(std::adjacent_find(idx.begin(), idx.end()), idx.end());
      for (auto i : idx) EXPECT_LT(i, ev.size());
    }
    for (std::size_t i = 0; i < ev.size(); ++i) {
      std::set<std::string> holders;
      for (const auto& [key, idx] : part.contexts) {
        if (std::binary_search(idx.begin(), idx.end(), i)) holders.insert(key);
      }
      if (!ev[i].entity_ids.empty()) {
        EXPECT_EQ(holders, std::set<std::string>(ev[i].entity_ids.begin(), ev[i].entity_ids.end()));
      } else {
        EXPECT_FALSE(holders.empty());
      }
    }
  }
}

TEST(Partition, SingleEntityAndErrors) {
  std::vector<ObservationEvent> ev{{"H1_Walking"}, {"H1_Standing"}, {"H1_Left"}};
  annotate_ids(ev);
  const auto part = partition_contexts(ev, ContextMode::PerEntity);
  ASSERT_EQ(part.contexts.size(), 1u);
  EXPECT_EQ(part.contexts.at("H1"), (std::vector<std::size_t>{0, 1, 2}));

  const std::vector<ObservationEvent> anon{{"Walking"}, {"Standing"}};
  EXPECT_THROW(partition_contexts(anon, ContextMode::PerEntity), ConfigError);
  EXPECT_TRUE(partition_contexts({}, ContextMode::PerEntity).contexts.empty());
  EXPECT_THROW(partition_contexts(anon, ContextMode::ByTag), ConfigError);
}

TEST(Partition, ByTag) {
  const auto c = parse_catalog(
      "Walking - Standing - Left -> Leaving @indoor\n"
      "Vehicle_stopped - Door_open - Entering -> Boarding @HVI\n"
      "Group_Merging - Group_United - Group_Shaking_hands -> Social_interaction\n");
  const std::vector<ObservationEvent> ev{{"Walking"}, {"Door_open"}, {"Group_Merging"}, {"Standing"}};
  const auto part = partition_contexts(ev, ContextMode::ByTag, &c);
  EXPECT_EQ(part.contexts.at("indoor"), (std::vector<std::size_t>{0, 2, 3}));
  EXPECT_EQ(part.contexts.at("HVI"), (std::vector<std::size_t>{1, 2}));
  const auto only = partition_contexts(ev, ContextMode::ByTag, &c, {"indoor"});
  EXPECT_EQ(only.contexts.size(), 1u);
  EXPECT_THROW(partition_contexts(ev, ContextMode::ByTag, &c, {"outdoor"}), ConfigError);
  const auto untagged = parse_catalog("a - b -> X\n");
  EXPECT_EQ(partition_contexts(ev, ContextMode::ByTag, &untagged).contexts.at("all").size(), 4u);
}

TEST(Hybrid, ScenarioMilestones) {
  const auto ev = parse_event_stream(read_fixture("exchange_boxes.events"));
  auto layer = fixture_layer("exchange_boxes.ont");
  layer.min_confidence = 0.5;
  const auto run = run_hhmm(ev, LayerStack{{layer}}, ContextMode::PerEntity);
  const auto results = run.results();
  EXPECT_EQ(labels_of(results.at("H2")), (std::vector<std::string>{"Social_Interaction", "Object_exchange-2"}));
  EXPECT_EQ(results.at("H2")[0].sources, (std::vector<std::size_t>{9, 10, 13}));
  EXPECT_EQ(labels_of(results.at("H1")), (std::vector<std::string>{"Object_exchange-1"}));
  EXPECT_EQ(labels_of(results.at("H3")), (std::vector<std::string>{"Social_Interaction", "Object_exchange-2"}));
  for (const auto& [key, rs] : results) {
    for (const auto& r : rs) {
      EXPECT_EQ(r.context, key);
      EXPECT_EQ(r.architecture, Architecture::Hybrid);
    }
  }
}

TEST(Hybrid, TagExclusion) {
  const auto c = parse_catalog(
      "Walking - Standing - Left -> Leaving @indoor\n"
      "Vehicle_stopped - Door_open - Entering -> Boarding @HVI\n");
  const auto layer = make_layer(c, build_model_bank(c));
  std::vector<ObservationEvent> ev;
  for (const char* t : {"Vehicle_stopped", "Door_open", "Entering", "Walking", "Standing", "Left"}) ev.push_back({t});
  const auto run = run_hhmm(ev, LayerStack{{layer}}, ContextMode::ByTag, {"indoor"});
  const auto rs = run.results();
  EXPECT_EQ(labels_of(rs.at("indoor")), (std::vector<std::string>{"Leaving"}));
  // The HVI pattern never reaches the indoor context, and its label is never admissible there.
  std::vector<Code> codes{c.encode("Vehicle_stopped"), c.encode("Door_open"), c.encode("Entering")};
  const auto d = decode_window(layer, codes, std::string("indoor"));
  EXPECT_NE(d.label, "Boarding");
}

TEST(Hybrid, EmptyContext) {
  const auto c = parse_catalog("a - b - c -> X @t1\nd - e - f -> Y @t2\n");
  const auto layer = make_layer(c, build_model_bank(c));
  const std::vector<ObservationEvent> ev{{"a"}, {"b"}, {"c"}};
  const auto run = run_hhmm(ev, LayerStack{{layer}}, ContextMode::ByTag);
  const auto rs = run.results();
  EXPECT_TRUE(rs.at("t2").empty());
  EXPECT_EQ(labels_of(rs.at("t1")), (std::vector<std::string>{"X"}));
}

TEST(Fuse, MaxLikelihood) {
  RecognitionResult a, b, c;
  a.label = "A";
  a.log_likelihood = -1.0;
  a.span_start = 4;
  b.label = "B";
  b.log_likelihood = -2.5;
  c.label = "C";
  c.log_likelihood = -1.0;
  c.span_start = 2;
  EXPECT_EQ(ml_fuse(std::vector<RecognitionResult>{a}).label, "A");
  EXPECT_EQ(ml_fuse(std::vector<RecognitionResult>{a, b}).label, "A");
  EXPECT_EQ(ml_fuse(std::vector<RecognitionResult>{a, b, c}).label, "C");
  c.span_start = 4;
  EXPECT_EQ(ml_fuse(std::vector<RecognitionResult>{c, b, a}).label, "A");
  EXPECT_THROW(ml_fuse({}), DomainError);
}

TEST(Fuse, InvariantUnderMonotoneTransform) {
  std::mt19937_64 rng(12);
  std::uniform_real_distribution<double> u(-20.0, 0.0);
  for (int trial = 0; trial < 300; ++trial) {
    std::vector<RecognitionResult> rs(1 + rng() % 6);
    for (std::size_t i = 0; i < rs.size(); ++i) {
      rs[i].label = std::string(1, static_cast<char>('A' + i));
      rs[i].log_likelihood = std::round(u(rng));
      rs[i].span_start = rng() % 4;
    }
    const auto base = ml_fuse(rs).label;
    auto shifted = rs;
    for (auto& r : shifted) r.log_likelihood = 2.0 * r.log_likelihood + 13.0;
    EXPECT_EQ(ml_fuse(shifted).label, base);
  }
}

TEST(Determinism, RepeatedRunsAreIdentical) {
  const auto ev = parse_event_stream(read_fixture("exchange_boxes.events"));
  auto layer = fixture_layer("exchange_boxes.ont");
  layer.min_confidence = 0.5;
  const LayerStack stack{{layer}};
  Trace t1, t2;
  const auto a = run_hhmm(ev, stack, ContextMode::PerEntity, {}, &t1).results();
  const auto b = run_hhmm(ev, stack, ContextMode::PerEntity, {}, &t2).results();
  EXPECT_EQ(a, b);
  EXPECT_EQ(t1.str(), t2.str());
}
