#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <sstream>

#include "twkit/augment.hpp"
#include "twkit/csv.hpp"
#include "twkit/synth.hpp"

using namespace twkit;

namespace {

Table parse(const std::string& body) {
  std::istringstream in("c_id,t_id,corps,position,height,weapon,hairstyle,headgear,robe_num,armor_type,tw_class\n" +
                        body);
  return parse_csv(in, terracotta_schema());
}

std::size_t class_index(const std::string& token) {
  const auto tokens = terracotta_schema()->class_tokens();
  return static_cast<std::size_t>(std::find(tokens.begin(), tokens.end(), token) - tokens.begin());
}

CganConfig quick_cgan(std::size_t epochs) {
  CganConfig c;
  c.train.epochs = epochs;
  c.hidden = 32;
  return c;
}

}  // namespace

TEST(Smotenc, DistanceExamples) {
  const auto t = parse(
      "1,1,1,1,170,0,1,3,1,1,MR\n"
      "1,1,1,1,170,0,1,3,1,1,MR\n"
      "1,1,1,1,170,0,1,0,1,1,MR\n"
      "1,1,1,1,174,0,1,0,1,1,MR\n");
  const auto& s = t.schema();
  EXPECT_EQ(smotenc_distance(t.row(0), t.row(1), s, 3.0), 0.0);
  EXPECT_DOUBLE_EQ(smotenc_distance(t.row(0), t.row(2), s, 3.0), 3.0);
  EXPECT_DOUBLE_EQ(smotenc_distance(t.row(0), t.row(3), s, 3.0), 5.0);
}

TEST(Smotenc, DistanceIgnoresLabelAndRejectsMissing) {
  const auto t = parse("1,1,1,1,170,0,1,3,1,1,MR\n1,1,1,1,170,0,1,3,1,1,LR\n1,1,1,1,,0,1,3,1,1,LR\n");
  EXPECT_EQ(smotenc_distance(t.row(0), t.row(1), t.schema(), 2.0), 0.0);
  EXPECT_THROW(smotenc_distance(t.row(0), t.row(2), t.schema(), 2.0), DataError);
}

TEST(Smotenc, PenaltyIsNumericStandardDeviation) {
  const auto t = parse("1,1,1,1,170,0,1,3,1,1,MR\n1,1,1,1,180,0,1,3,1,1,MR\n");
  EXPECT_DOUBLE_EQ(smotenc_penalty(t), std::sqrt(50.0));
}

TEST(Smotenc, InterpolatesBetweenParents) {
  const auto t = parse("1,1,1,1,170,0,1,3,1,1,MR\n1,1,1,1,180,0,1,3,1,1,MR\n1,1,1,1,150,0,1,3,1,1,RW\n");
  const auto rows = smotenc_generate(t, class_index("MR"), 200, 5, 7);
  ASSERT_EQ(rows.size(), 200u);
  const auto hc = t.schema().require("height");
  for (const auto& r : rows) {
    EXPECT_GE(r[hc].number(), 170.0);
    EXPECT_LE(r[hc].number(), 180.0);
    EXPECT_EQ(r[t.schema().label_index()].level(), class_index("MR"));
  }
}

TEST(Smotenc, UnanimousNeighboursFixCategoricals) {
  const auto t = parse(
      "1,1,1,1,170,0,1,3,1,1,LR\n"
      "2,1,1,1,171,0,1,3,1,1,LR\n"
      "3,1,1,1,172,0,1,3,1,1,LR\n"
      "4,1,1,1,173,0,1,3,1,1,LR\n");
  const auto hg = t.schema().require("headgear");
  const auto level3 = *t.schema().at(hg).level_of("3");
  for (const auto& r : smotenc_generate(t, class_index("LR"), 50, 3, 1)) EXPECT_EQ(r[hg].level(), level3);
}

TEST(Smotenc, MajorityVoteTiesKeepSeedValue) {
  // With k = 1 the single neighbour decides.
  const auto two = parse("1,1,1,1,170,0,1,3,1,1,LR\n2,1,1,1,170,0,1,3,1,1,LR\n");
  const auto cid = two.schema().require("c_id");
  std::size_t seen2[3] = {0, 0, 0};
  for (const auto& r : smotenc_generate(two, class_index("LR"), 40, 1, 3)) ++seen2[r[cid].level()];
  EXPECT_GT(seen2[1], 0u);
  EXPECT_GT(seen2[2], 0u);
  // Three distinct c_id values and k = 2: every vote is a tie, so each row
  // keeps the c_id of its seed row and all three values appear.
  const auto three = parse(
      "1,1,1,1,170,0,1,3,1,1,LR\n"
      "2,1,1,1,170,0,1,3,1,1,LR\n"
      "3,1,1,1,170,0,1,3,1,1,LR\n");
  std::size_t seen[4] = {0, 0, 0, 0};
  for (const auto& r : smotenc_generate(three, class_index("LR"), 60, 2, 3)) ++seen[r[cid].level()];
  EXPECT_EQ(seen[0], 0u);
  EXPECT_GT(seen[1], 0u);
  EXPECT_GT(seen[2], 0u);
  EXPECT_GT(seen[3], 0u);
}

TEST(Smotenc, SmallClassLowersKWithWarning) {
  const auto t = synthesize_corpus(default_synthesis_spec(), 1087, 5);
  const auto hr = class_index("HR");
  Warnings w;
  const auto rows = smotenc_generate(t, hr, 45, 5, 11, &w);
  ASSERT_EQ(rows.size(), 45u);
  ASSERT_EQ(w.size(), 1u);
  EXPECT_NE(w[0].find("k lowered to 4"), std::string::npos);
  const auto members = t.rows_of_class(hr);
  const auto hc = t.schema().require("height");
  double lo = 1e300, hi = -1e300;
  for (std::size_t r = 0; r < members.size(); ++r) {
    lo = std::min(lo, members.at(r, hc).number());
    hi = std::max(hi, members.at(r, hc).number());
  }
  Table check(t.schema_ptr());
  for (const auto& r : rows) {
    EXPECT_NO_THROW(check.add_row(r));
    EXPECT_EQ(r[t.schema().label_index()].level(), hr);
    EXPECT_GE(r[hc].number(), lo);
    EXPECT_LE(r[hc].number(), hi);
  }
}

TEST(Smotenc, DeterministicAndValidated) {
  const auto t = synthesize_corpus(default_synthesis_spec(), 300, 5);
  const auto lr = class_index("LR");
  EXPECT_EQ(smotenc_generate(t, lr, 30, 5, 2), smotenc_generate(t, lr, 30, 5, 2));
  EXPECT_NE(smotenc_generate(t, lr, 30, 5, 2), smotenc_generate(t, lr, 30, 5, 3));
  EXPECT_TRUE(smotenc_generate(t, lr, 0, 5, 2).empty());
  EXPECT_THROW(smotenc_generate(t, lr, 3, 0, 2), std::invalid_argument);
  const auto single = parse("1,1,1,1,170,0,1,3,1,1,LR\n1,1,1,1,170,0,1,3,1,1,RW\n");
  EXPECT_THROW(smotenc_generate(single, class_index("LR"), 3, 5, 2), DataError);
}

TEST(Plan, DefaultOnInventoryCounts) {
  const std::vector<std::size_t> counts{396, 633, 8, 8, 5, 10, 27};
  const auto plan = default_augment_plan(counts);
  EXPECT_EQ(plan.total(), 1800u);
  EXPECT_EQ(plan.stage2, (std::vector<std::size_t>{396, 633, 155, 154, 154, 154, 154}));
  EXPECT_EQ(plan.stage1, (std::vector<std::size_t>{396, 633, 100, 100, 100, 100, 100}));
  EXPECT_NO_THROW(plan.validate(counts));
}

TEST(Plan, ValidationAndJson) {
  const std::vector<std::size_t> counts{396, 633, 8, 8, 5, 10, 27};
  EXPECT_THROW(default_augment_plan(counts, 1000), std::invalid_argument);
  const auto same = default_augment_plan(counts, 1087);
  EXPECT_EQ(same.stage2, counts);
  EXPECT_EQ(same.stage1, counts);
  AugmentPlan bad = default_augment_plan(counts);
  bad.stage1[4] = 4;
  EXPECT_THROW(bad.validate(counts), std::invalid_argument);
  bad = default_augment_plan(counts);
  bad.stage2[3] = 99;
  EXPECT_THROW(bad.validate(counts), std::invalid_argument);

  const auto& schema = *terracotta_schema();
  const auto plan = default_augment_plan(counts);
  const auto j = plan.to_json(schema);
  EXPECT_EQ(j["total"], 1800);
  EXPECT_EQ(j["stage2"]["HR"], 154);
  const auto back = AugmentPlan::from_json(j, schema);
  EXPECT_EQ(back.stage1, plan.stage1);
  EXPECT_EQ(back.stage2, plan.stage2);
  auto wrong = j;
  wrong["total"] = 1799;
  EXPECT_THROW(AugmentPlan::from_json(wrong, schema), DataError);
  wrong = j;
  wrong["stage1"]["XX"] = 3;
  EXPECT_THROW(AugmentPlan::from_json(wrong, schema), DataError);
}

TEST(Cgan, ShapesRangeAndDeterminism) {
  const auto t = synthesize_corpus(default_synthesis_spec(), 200, 5);
  const auto enc = encode(t, Codec::fit_features(t));
  const auto labels = t.labels();
  const auto a = train_table_cgan(enc, labels, 7, quick_cgan(3), 4);
  const auto b = train_table_cgan(enc, labels, 7, quick_cgan(3), 4);
  EXPECT_TRUE(a.generator == b.generator);
  EXPECT_TRUE(a.discriminator == b.discriminator);
  EXPECT_TRUE(a.classifier == b.classifier);
  EXPECT_EQ(a.generator.input_width(), 32u + 7u);
  EXPECT_EQ(a.generator.output_width(), enc.codec.width());
  EXPECT_EQ(a.discriminator.input_width(), enc.codec.width() + 7u);
  EXPECT_EQ(a.classifier.output_width(), 7u);
  for (std::size_t c = 0; c < 7; ++c) {
    const auto g = cgan_generate(a, c, 50, c);
    EXPECT_GE(g.minCoeff(), 0.0);
    EXPECT_LE(g.maxCoeff(), 1.0);
  }
  EXPECT_TRUE(sample_table_cgan(a, t.schema(), 2, 0, 1).empty());
  EXPECT_THROW(sample_table_cgan(a, t.schema(), 7, 3, 1), std::invalid_argument);
  Table check(t.schema_ptr());
  for (const auto& r : sample_table_cgan(a, t.schema(), 4, 40, 1)) {
    EXPECT_NO_THROW(check.add_row(r));
    EXPECT_EQ(r[t.schema().label_index()].level(), 4u);
  }
  const auto back = TableCganModel::from_json(nlohmann::json::parse(a.to_json().dump()));
  EXPECT_TRUE(back.generator == a.generator);
  EXPECT_EQ(sample_table_cgan(back, t.schema(), 3, 10, 9), sample_table_cgan(a, t.schema(), 3, 10, 9));
}

TEST(Cgan, RejectsBadInput) {
  const auto t = synthesize_corpus(default_synthesis_spec(), 50, 5);
  const auto enc = encode(t, Codec::fit_features(t));
  auto labels = t.labels();
  labels.pop_back();
  EXPECT_THROW(train_table_cgan(enc, labels, 7, quick_cgan(1), 1), std::invalid_argument);
  CganConfig c = quick_cgan(1);
  c.noise_dim = 0;
  EXPECT_THROW(train_table_cgan(enc, t.labels(), 7, c, 1), std::invalid_argument);
}

TEST(Cgan, LearnsClassConditionalRows) {
  auto spec = default_synthesis_spec();
  for (auto& [cls, profile] : spec.profiles) profile.record_noise = 0.0;
  const auto t = synthesize_corpus(spec, 1087, 21);
  const auto counts = class_histogram(t);
  AugmentPlan plan = default_augment_plan(counts);
  plan.stage2 = plan.stage1;
  const auto stage1 = two_stage_augment(t, plan, {}, 3);
  const auto enc = encode(stage1, Codec::fit_features(stage1));
  const auto model = train_table_cgan(enc, stage1.labels(), 7, {}, 8);
  const auto& s = stage1.schema();
  for (std::size_t c = 0; c < 7; ++c) {
    EXPECT_GE(cgan_class_agreement(model, c, 200, 100 + c), 0.9) << s.class_tokens()[c];
    const auto rows = sample_table_cgan(model, s, c, 200, 200 + c);
    const auto real = stage1.rows_of_class(c);
    for (auto a : s.categorical_feature_indices()) {
      std::vector<double> p(s.at(a).level_count(), 0.0), q(p.size(), 0.0);
      for (const auto& r : rows) p[r[a].level()] += 1.0 / static_cast<double>(rows.size());
      for (std::size_t r = 0; r < real.size(); ++r) q[real.at(r, a).level()] += 1.0 / static_cast<double>(real.size());
      double tv = 0.0;
      for (std::size_t l = 0; l < p.size(); ++l) tv += 0.5 * std::abs(p[l] - q[l]);
      EXPECT_LE(tv, 0.25) << s.class_tokens()[c] << " " << s.at(a).name;
    }
  }
}

TEST(TwoStage, PlanEqualToCountsIsIdentity) {
  const auto t = synthesize_corpus(default_synthesis_spec(), 300, 5);
  const auto counts = class_histogram(t);
  const auto out = two_stage_augment(t, default_augment_plan(counts, t.size()), {}, 1);
  ASSERT_EQ(out.size(), t.size());
  for (std::size_t r = 0; r < t.size(); ++r) {
    EXPECT_EQ(out.row(r), t.row(r));
    EXPECT_EQ(out.origin(r), Origin::real);
  }
}

TEST(TwoStage, CountsOriginsAndDeterminism) {
  const auto t = synthesize_corpus(default_synthesis_spec(), 400, 5);
  const auto counts = class_histogram(t);
  const auto plan = default_augment_plan(counts, 700, 40);
  AugmentConfig cfg;
  cfg.cgan = quick_cgan(5);
  Warnings w;
  const auto out = two_stage_augment(t, plan, cfg, 2, &w);
  ASSERT_EQ(out.size(), 700u);
  EXPECT_EQ(class_histogram(out), plan.stage2);
  std::vector<std::size_t> smote(7, 0), cgan(7, 0);
  for (std::size_t r = 0; r < out.size(); ++r) {
    if (r < t.size()) {
      EXPECT_EQ(out.row(r), t.row(r));
      EXPECT_EQ(out.origin(r), Origin::real);
    } else {
      EXPECT_NE(out.origin(r), Origin::real);
      ++(out.origin(r) == Origin::smotenc ? smote : cgan)[out.label_of(r)];
    }
  }
  for (std::size_t c = 0; c < 7; ++c) {
    EXPECT_EQ(smote[c], plan.stage1[c] - counts[c]);
    EXPECT_EQ(cgan[c], plan.stage2[c] - plan.stage1[c]);
  }
  EXPECT_TRUE(out == two_stage_augment(t, plan, cfg, 2));
}

TEST(TwoStage, RejectsIncompleteInputAndBadPlans) {
  const auto t = parse("1,1,1,1,,0,1,3,1,1,LR\n1,1,1,1,170,0,1,3,1,1,LR\n");
  const auto counts = class_histogram(t);
  EXPECT_THROW(two_stage_augment(t, default_augment_plan(counts, 4), {}, 1), DataError);
  AugmentPlan tiny{std::vector<std::size_t>(7, 0), std::vector<std::size_t>(7, 0)};
  EXPECT_THROW(two_stage_augment(t, tiny, {}, 1), std::invalid_argument);
}
