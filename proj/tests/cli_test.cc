// Copyright 2026 The etrkit Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include <gtest/gtest.h>
#include <sys/wait.h>

#include <cstdio>

#include "etr/agreement.h"
#include "etr/corpus.h"
#include "etr/service.h"
#include "test_util.h"

namespace {

using etr::Json;

struct Result {
  int code = -1;
  std::string out;
};

// Runs the etr binary with `args`; stderr goes to the temp dir.
Result Etr(const testutil::TempDir& dir, const std::string& args) {
  const std::string cmd = std::string(ETR_BINARY) + " " + args + " 2>" + (dir / "stderr.txt").string();
  FILE* pipe = popen(cmd.c_str(), "r");
  Result r;
  if (pipe == nullptr) return r;
  char buf[4096];
  std::size_t n;
  while ((n = fread(buf, 1, sizeof buf, pipe)) > 0) r.out.append(buf, n);
  const int status = pclose(pipe);
  r.code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  return r;
}

std::string Q(const std::filesystem::path& p) { return "'" + p.string() + "'"; }

// Three books of mixed sentence lengths.
void WriteCorpus(const std::filesystem::path& path) {
  const std::vector<std::string> sources = {
      "Le conseil municipal a adopté hier soir le budget annuel après un long débat.",
      "Les habitants pourront consulter les documents à la mairie jusqu'à vendredi.",
      "La bibliothèque ouvrira ses portes plus tôt pendant les vacances scolaires.",
      "Un nouveau parc sera construit près de la gare avant la fin de l'année."};
  const std::vector<std::string> targets = {"Le conseil a voté le budget.", "Vous pouvez lire les documents.",
                                            "La bibliothèque ouvre plus tôt.", "Un parc sera construit."};
  std::string text;
  int id = 0;
  for (int book = 0; book < 3; ++book) {
    for (int i = 0; i < 8; ++i, ++id) {
      text += Json{{"id", "p" + std::to_string(id)},
                   {"book_id", "book" + std::to_string(book)},
                   {"source", sources[(i + book) % 4]},
                   {"target", targets[(i + 2 * book) % 4]}}
                  .dump() +
              "\n";
    }
  }
  testutil::WriteText(path, text);
}

class CliTest : public ::testing::Test {
 protected:
  void SetUp() override {
    WriteCorpus(dir_ / "corpus.jsonl");
    ASSERT_EQ(Etr(dir_, "split " + Q(dir_ / "corpus.jsonl") + " --test-books book2 --seed 9 --out " +
                            Q(dir_ / "split.jsonl"))
                  .code,
              0);
  }
  testutil::TempDir dir_;
};

TEST_F(CliTest, HelpExitsZero) {
  const auto r = Etr(dir_, "--help");
  EXPECT_EQ(r.code, 0);
  EXPECT_NE(r.out.find("score"), std::string::npos);
  EXPECT_EQ(Etr(dir_, "score --help").code, 0);
}

TEST_F(CliTest, ExitCodes) {
  EXPECT_EQ(Etr(dir_, "stats " + Q(dir_ / "missing.jsonl")).code, 2);
  EXPECT_EQ(Etr(dir_, "no-such-command").code, 1);
  EXPECT_EQ(Etr(dir_, "split " + Q(dir_ / "corpus.jsonl") + " --test-books book2").code, 1);
  testutil::WriteText(dir_ / "bad.jsonl", "{\"id\":\"x\"}\n");
  EXPECT_EQ(Etr(dir_, "stats " + Q(dir_ / "bad.jsonl")).code, 1);
  EXPECT_EQ(Etr(dir_, "split " + Q(dir_ / "corpus.jsonl") + " --test-books nobook --seed 1").code, 1);
}

TEST_F(CliTest, SplitIsDeterministic) {
  const auto again = Etr(dir_, "split " + Q(dir_ / "corpus.jsonl") + " --test-books book2 --seed 9");
  ASSERT_EQ(again.code, 0);
  EXPECT_EQ(again.out, testutil::ReadText(dir_ / "split.jsonl"));
  const auto corpus = etr::corpus::LoadCorpus(dir_ / "split.jsonl", nullptr);
  int test = 0;
  for (const auto& p : corpus.pairs()) {
    ASSERT_TRUE(p.split.has_value());
    if (*p.split == etr::corpus::Split::kTest) {
      ++test;
      EXPECT_EQ(p.book_id, "book2");
    }
  }
  EXPECT_EQ(test, 8);
}

TEST_F(CliTest, StatsTableAndCsv) {
  const auto table = Etr(dir_, "stats " + Q(dir_ / "split.jsonl"));
  EXPECT_EQ(table.code, 0);
  EXPECT_NE(table.out.find("KMRE"), std::string::npos) << table.out;
  const auto csv = Etr(dir_, "stats " + Q(dir_ / "split.jsonl") + " --split test --format csv --json " +
                                 Q(dir_ / "stats.json"));
  EXPECT_EQ(csv.code, 0);
  EXPECT_NE(csv.out.find(','), std::string::npos);
  EXPECT_FALSE(Json::parse(testutil::ReadText(dir_ / "stats.json")).empty());
  EXPECT_EQ(Etr(dir_, "compare a=" + Q(dir_ / "split.jsonl") + " b=" + Q(dir_ / "corpus.jsonl")).code, 0);
}

TEST_F(CliTest, ScoreIsByteIdenticalAcrossJobs) {
  std::string run;
  const auto corpus = etr::corpus::LoadCorpus(dir_ / "split.jsonl", nullptr);
  for (const auto& p : corpus.pairs()) {
    if (p.split == etr::corpus::Split::kTest) run += Json{{"id", p.id}, {"output", p.target}}.dump() + "\n";
  }
  testutil::WriteText(dir_ / "run.jsonl", run);
  const std::string base = "score " + Q(dir_ / "split.jsonl") + " " + Q(dir_ / "run.jsonl") + " --format csv";
  const auto one = Etr(dir_, base + " --jobs 1");
  const auto four = Etr(dir_, base + " --jobs 4");
  ASSERT_EQ(one.code, 0);
  EXPECT_EQ(one.out, four.out);
  EXPECT_NE(one.out.find("#mean"), std::string::npos) << one.out;

  testutil::WriteText(dir_ / "r1.csv", one.out);
  testutil::WriteText(dir_ / "r2.csv", one.out);
  const auto agg = Etr(dir_, "aggregate " + Q(dir_ / "r1.csv") + " " + Q(dir_ / "r2.csv") + " --format csv");
  EXPECT_EQ(agg.code, 0) << agg.out;
  // Selection needs BERT-F1, which is empty without embeddings.
  EXPECT_EQ(Etr(dir_, "select lr1=" + Q(dir_ / "r1.csv")).code, 1);
  const std::string header = "id,ROUGE-1,ROUGE-2,ROUGE-L,BERT-F1,SARI,KMRE,Comp. ratio,Novelty\n";
  testutil::WriteText(dir_ / "s1.csv", header + "d1,0,0,20,70,40,0,0,0\n");
  testutil::WriteText(dir_ / "s2.csv", header + "d1,0,0,30,60,35,0,0,0\n");
  const auto sel = Etr(dir_, "select lr1=" + Q(dir_ / "s1.csv") + " lr2=" + Q(dir_ / "s2.csv"));
  EXPECT_EQ(sel.code, 0);
  EXPECT_NE(sel.out.find("lr2"), std::string::npos) << sel.out;

  // A run missing test ids is rejected unless partial scoring is asked for.
  testutil::WriteText(dir_ / "short.jsonl", run.substr(0, run.find('\n') + 1));
  const std::string partial = "score " + Q(dir_ / "split.jsonl") + " " + Q(dir_ / "short.jsonl");
  EXPECT_EQ(Etr(dir_, partial).code, 1);
  EXPECT_EQ(Etr(dir_, partial + " --allow-partial").code, 0);
}

TEST_F(CliTest, AgreementMatchesLibrary) {
  const etr::agreement::Questionnaire q = etr::agreement::Questionnaire::Load(ETR_CONFIG_DIR "/questionnaire_fr.json");
  std::vector<etr::agreement::AnnotationRecord> records;
  for (int i = 0; i < 6; ++i) {
    for (const char* a : {"x", "y", "z"}) {
      etr::agreement::AnnotationRecord r{a, "item" + std::to_string(i), {}, ""};
      for (const auto& c : q.criteria()) {
        int v = (i + static_cast<int>(c.id.size())) % (c.MaxValue() + 1);
        if (std::string(a) == "z" && i == 2) v = c.MaxValue() - v;
        r.answers[c.id] = v;
      }
      records.push_back(r);
    }
  }
  testutil::WriteText(dir_ / "export.jsonl",
                      etr::agreement::SerializeAnnotationExport({{"questionnaire", q.ToJson()}}, records));
  const auto r = Etr(dir_, "agreement " + Q(dir_ / "export.jsonl") + " --format csv --categories " +
                               Q(dir_ / "cats.csv"));
  ASSERT_EQ(r.code, 0);
  EXPECT_EQ(r.out, etr::agreement::RenderAlphaReport(etr::agreement::PerCriterionAlpha(records, q), true));
  EXPECT_EQ(testutil::ReadText(dir_ / "cats.csv").rfind("group,label,n,mean,min,q1,median,q3,max", 0), 0u);
  EXPECT_EQ(Etr(dir_, "agreement " + Q(dir_ / "export.jsonl") + " --binarize-threshold 3").code, 0);
  EXPECT_EQ(Etr(dir_, "agreement " + Q(dir_ / "export.jsonl") + " --level ordinal").code, 1);
}

TEST_F(CliTest, OfflineCampaign) {
  std::string pool;
  for (int i = 0; i < 30; ++i) {
    pool += Json{{"item_id", "it" + std::to_string(i)},
                 {"model_label", "m1"},
                 {"dataset_tag", i < 20 ? "etr-fr" : "etr-fr-politic"},
                 {"source", "s"},
                 {"candidate", "c"}}
                .dump() +
            "\n";
  }
  testutil::WriteText(dir_ / "pool.jsonl", pool);
  const std::string data = " --data-dir " + Q(dir_ / "data");
  const auto created = Etr(dir_, "campaign" + data + " create --pool " + Q(dir_ / "pool.jsonl") +
                                     " --roster ann1 ann2 --seed 4 --id demo");
  ASSERT_EQ(created.code, 0);
  EXPECT_NE(created.out.find("ann2"), std::string::npos) << created.out;
  const auto progress = Etr(dir_, "campaign" + data + " progress demo");
  EXPECT_EQ(progress.code, 0);
  EXPECT_NE(progress.out.find("30"), std::string::npos) << progress.out;
  const auto exported = Etr(dir_, "campaign" + data + " export demo");
  EXPECT_EQ(exported.code, 0);
  EXPECT_TRUE(etr::agreement::ParseAnnotationExport(exported.out, "cli").records.empty());
  EXPECT_EQ(Etr(dir_, "campaign" + data + " progress nope").code, 1);
}

}  // namespace
