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

// etr: corpus statistics, run scoring, annotator agreement and the
// annotation campaign server behind one command.

#include <CLI11.hpp>
#include <fmt/format.h>

#include <csignal>
#include <cstdlib>
#include <filesystem>
#include <iostream>
#include <memory>
#include <random>

#include "etr/agreement.h"
#include "etr/corpus.h"
#include "etr/embeddings.h"
#include "etr/error.h"
#include "etr/evalrun.h"
#include "etr/http_server.h"
#include "etr/jsonl.h"
#include "etr/service.h"
#include "etr/textcore.h"

namespace fs = std::filesystem;

namespace etr {
namespace {

fs::path ConfigDir() {
  if (const char* dir = std::getenv("ETR_CONFIG_DIR"); dir && *dir) return dir;
  return ETR_DEFAULT_CONFIG_DIR;
}

fs::path DataDir(const std::string& flag) {
  if (!flag.empty()) return flag;
  if (const char* dir = std::getenv("ETR_DATA_DIR"); dir && *dir) return dir;
  return "etr-data";
}

void RequireFile(const std::string& path) {
  std::error_code ec;
  if (!fs::is_regular_file(path, ec)) {
    throw IoError("cannot open " + path + ": " + (ec ? ec.message() : "no such file"));
  }
}

void Emit(const std::string& content, const std::string& out) {
  if (out.empty()) {
    std::cout << content;
    std::cout.flush();
  } else {
    WriteFileAtomic(out, content);
  }
}

evalrun::Format FormatOf(const std::string& name) {
  auto f = evalrun::ParseFormat(name);
  if (!f) throw Error("--format must be 'table' or 'csv'");
  return *f;
}

// "name=path" or a bare path named after its stem.
std::pair<std::string, std::string> NamedPath(const std::string& arg) {
  const auto eq = arg.find('=');
  if (eq != std::string::npos && eq > 0) return {arg.substr(0, eq), arg.substr(eq + 1)};
  return {fs::path(arg).stem().string(), arg};
}

agreement::Questionnaire LoadQuestionnaire(const std::string& path) {
  const std::string file = path.empty() ? (ConfigDir() / "questionnaire_fr.json").string() : path;
  RequireFile(file);
  return agreement::Questionnaire::Load(file);
}

struct Common {
  int jobs = 1;
  std::string abbrev;
  std::string format = "table";
  std::string out;
  std::unique_ptr<text::AbbreviationList> abbreviations;

  const text::AbbreviationList* Abbreviations() {
    if (abbrev.empty()) return &text::AbbreviationList::BuiltIn();
    if (!abbreviations) {
      RequireFile(abbrev);
      abbreviations = std::make_unique<text::AbbreviationList>(text::AbbreviationList::Load(abbrev));
    }
    return abbreviations.get();
  }
};

corpus::Selector MakeSelector(const std::string& split, const std::string& domain) {
  corpus::Selector sel;
  if (!split.empty()) {
    sel.split = corpus::ParseSplit(split);
    if (!sel.split) throw Error("unknown split '" + split + "'");
  }
  if (!domain.empty()) sel.domain_tag = domain;
  return sel;
}

evalrun::RunReport LoadReport(const std::string& path) {
  RequireFile(path);
  return evalrun::LoadReportCsv(path);
}

int Main(int argc, char** argv) {
  CLI::App app{"ETR corpus, evaluation and annotation toolkit", "etr"};
  app.require_subcommand(1);
  app.set_help_all_flag("--help-all", "Show help for every subcommand");

  Common c;
  auto add_common = [&](CLI::App* sub, bool format = true) {
    sub->add_option("--jobs", c.jobs, "Worker threads")->check(CLI::PositiveNumber);
    sub->add_option("--abbrev", c.abbrev, "Abbreviation list overriding the built-in one");
    if (format) sub->add_option("--format", c.format, "Output format: table or csv");
    sub->add_option("--out", c.out, "Write output to this file instead of stdout");
  };

  // stats
  std::string stats_corpus, stats_split, stats_domain, stats_json;
  auto* stats = app.add_subcommand("stats", "Corpus statistics (mean ± std over documents)");
  stats->add_option("corpus", stats_corpus, "Corpus file")->required();
  stats->add_option("--split", stats_split, "Only pairs of this split");
  stats->add_option("--domain", stats_domain, "Only pairs with this domain tag");
  stats->add_option("--json", stats_json, "Also write the statistics as JSON to this file");
  add_common(stats);

  // compare
  std::vector<std::string> compare_inputs;
  std::string compare_split, compare_domain;
  auto* compare = app.add_subcommand("compare", "Side-by-side statistics of several corpora");
  compare->add_option("corpora", compare_inputs, "Corpus files as name=path or path")->required();
  compare->add_option("--split", compare_split, "Only pairs of this split");
  compare->add_option("--domain", compare_domain, "Only pairs with this domain tag");
  add_common(compare);

  // split
  std::string split_corpus;
  std::vector<std::string> split_test_books;
  double split_val_fraction = 0.15;
  std::uint64_t split_seed = 0;
  auto* split = app.add_subcommand("split", "Assign train/validation/test splits by book");
  split->add_option("corpus", split_corpus, "Corpus file")->required();
  split->add_option("--test-books", split_test_books, "Books reserved for test")
      ->required()
      ->delimiter(',');
  split->add_option("--val-fraction", split_val_fraction, "Validation share of non-test pairs")
      ->check(CLI::Range(0.0, 1.0));
  split->add_option("--seed", split_seed, "Shuffle seed")->required();
  add_common(split, false);

  // score
  std::string score_corpus, score_run, score_split = "test", score_emb, score_ref_emb;
  bool score_partial = false;
  auto* score = app.add_subcommand("score", "Score a system run against a corpus split");
  score->add_option("corpus", score_corpus, "Corpus file")->required();
  score->add_option("run", score_run, "Run file of {id, output} records")->required();
  score->add_option("--split", score_split, "Split to score against");
  score->add_flag("--allow-partial", score_partial, "Score only the ids present in the run");
  score->add_option("--embeddings", score_emb, "Token embeddings of the outputs, keyed by pair id");
  score->add_option("--ref-embeddings", score_ref_emb, "Token embeddings of the targets, keyed by pair id");
  add_common(score);

  // aggregate
  std::vector<std::string> aggregate_reports;
  auto* aggregate = app.add_subcommand("aggregate", "Mean and std of metrics across runs");
  aggregate->add_option("reports", aggregate_reports, "Report csv files from score")->required();
  add_common(aggregate);

  // select
  std::vector<std::string> select_inputs;
  auto* select = app.add_subcommand("select", "Pick the config with the best selection score");
  select->add_option("reports", select_inputs, "Report csv files as config=path or path")->required();
  add_common(select);

  // agreement
  std::string agree_export, agree_questionnaire, agree_level = "auto", agree_categories;
  std::optional<int> agree_threshold;
  auto* agree = app.add_subcommand("agreement", "Krippendorff's alpha of an annotation export");
  agree->add_option("export", agree_export, "Annotation export file")->required();
  agree->add_option("--questionnaire", agree_questionnaire,
                    "Questionnaire (default: the export header, then the shipped one)");
  agree->add_option("--level", agree_level, "nominal, interval or auto");
  agree->add_option("--binarize-threshold", agree_threshold,
                    "Also report alpha on binarized category aggregates")
      ->check(CLI::Range(1, 4));
  agree->add_option("--categories", agree_categories, "Write category score distributions here");
  add_common(agree);

  // campaign
  std::string data_dir;
  auto* campaign = app.add_subcommand("campaign", "Manage annotation campaigns offline");
  campaign->require_subcommand(1);
  campaign->add_option("--data-dir", data_dir, "Campaign data directory (default $ETR_DATA_DIR)");

  std::string create_pool, create_questionnaire, create_id, create_presentation = "shuffled";
  std::vector<std::string> create_roster;
  std::uint64_t create_seed = 0;
  int create_in = 20, create_out = 10;
  auto* create = campaign->add_subcommand("create", "Create a campaign and print annotator tokens");
  create->add_option("--pool", create_pool, "Item pool file")->required();
  create->add_option("--roster", create_roster, "Annotator ids")->required()->delimiter(',');
  create->add_option("--seed", create_seed, "Sampling seed")->required();
  create->add_option("--questionnaire", create_questionnaire, "Questionnaire file");
  create->add_option("--id", create_id, "Campaign id (generated when omitted)");
  create->add_option("--per-model-in", create_in, "In-domain items per model")->check(CLI::NonNegativeNumber);
  create->add_option("--per-model-out", create_out, "Out-of-domain items per model")
      ->check(CLI::NonNegativeNumber);
  create->add_option("--presentation", create_presentation, "shuffled or blocked");

  std::string campaign_id;
  auto* progress = campaign->add_subcommand("progress", "Done and pending items per annotator");
  progress->add_option("id", campaign_id, "Campaign id")->required();
  auto* cexport = campaign->add_subcommand("export", "Write the campaign's annotation export");
  cexport->add_option("id", campaign_id, "Campaign id")->required();
  cexport->add_option("--out", c.out, "Output file");

  // serve
  int serve_port = 8080;
  std::string serve_host = "127.0.0.1", serve_questionnaire;
  auto* serve = app.add_subcommand("serve", "Run the campaign HTTP service");
  serve->add_option("--port", serve_port, "TCP port (0 picks a free one)")->check(CLI::Range(0, 65535));
  serve->add_option("--host", serve_host, "Bind address");
  serve->add_option("--data-dir", data_dir, "Campaign data directory (default $ETR_DATA_DIR)");
  serve->add_option("--questionnaire", serve_questionnaire,
                    "Questionnaire for campaigns created without one");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 1;
  }

  if (*stats) {
    RequireFile(stats_corpus);
    const auto fmt_kind = FormatOf(c.format);
    const auto corpus = corpus::LoadCorpus(stats_corpus, &std::cerr);
    const auto s = corpus::ComputeStats(corpus, MakeSelector(stats_split, stats_domain),
                                        {c.jobs, c.Abbreviations()});
    if (!stats_json.empty()) WriteFileAtomic(stats_json, corpus::StatsToJson(s).dump(2) + "\n");
    const std::string name = fs::path(stats_corpus).stem().string();
    if (fmt_kind == evalrun::Format::kTable) {
      Emit(corpus::RenderStatsTable(name, s), c.out);
    } else {
      const corpus::NamedStats one[] = {{name, s}};
      Emit(corpus::RenderComparisonCsv(corpus::CompareCorpora(one)), c.out);
    }
  } else if (*compare) {
    const auto fmt_kind = FormatOf(c.format);
    std::vector<std::pair<std::string, std::string>> inputs;
    for (const auto& arg : compare_inputs) {
      inputs.push_back(NamedPath(arg));
      RequireFile(inputs.back().second);
    }
    const auto selector = MakeSelector(compare_split, compare_domain);
    std::vector<corpus::NamedStats> all;
    for (const auto& [name, path] : inputs) {
      const auto corpus = corpus::LoadCorpus(path, &std::cerr);
      all.push_back({name, corpus::ComputeStats(corpus, selector, {c.jobs, c.Abbreviations()})});
    }
    const auto table = corpus::CompareCorpora(all);
    Emit(fmt_kind == evalrun::Format::kTable ? corpus::RenderComparison(table)
                                             : corpus::RenderComparisonCsv(table),
         c.out);
  } else if (*split) {
    RequireFile(split_corpus);
    const auto corpus = corpus::LoadCorpus(split_corpus, &std::cerr);
    const auto assignment =
        corpus::StratifiedSplit(corpus, split_test_books, split_val_fraction, split_seed);
    Emit(corpus::SerializeCorpus(corpus::ApplySplit(corpus, assignment)), c.out);
    std::cerr << fmt::format("train {} validation {} test {}\n", assignment.Count(corpus::Split::kTrain),
                             assignment.Count(corpus::Split::kValidation),
                             assignment.Count(corpus::Split::kTest));
  } else if (*score) {
    RequireFile(score_corpus);
    RequireFile(score_run);
    if (score_emb.empty() != score_ref_emb.empty()) {
      throw Error("--embeddings and --ref-embeddings must be given together");
    }
    if (!score_emb.empty()) {
      RequireFile(score_emb);
      RequireFile(score_ref_emb);
    }
    const auto fmt_kind = FormatOf(c.format);
    const auto sel = MakeSelector(score_split, "");
    const auto corpus = corpus::LoadCorpus(score_corpus, &std::cerr);
    std::vector<corpus::AlignedPair> pairs;
    for (const auto& p : corpus.pairs()) {
      if (sel.Matches(p)) pairs.push_back(p);
    }
    if (pairs.empty()) throw Error("no pairs in split '" + score_split + "'");
    const auto run = evalrun::LoadRun(score_run);
    std::optional<metrics::EmbeddingTable> cand_emb, ref_emb;
    evalrun::ScoreOptions opts{score_partial, c.jobs, c.Abbreviations()};
    if (!score_emb.empty()) {
      cand_emb = metrics::EmbeddingTable::Load(score_emb);
      ref_emb = metrics::EmbeddingTable::Load(score_ref_emb);
      opts.candidate_embeddings = &*cand_emb;
      opts.reference_embeddings = &*ref_emb;
    }
    Emit(evalrun::RenderReport(evalrun::ScoreRun(pairs, run, opts), fmt_kind), c.out);
  } else if (*aggregate) {
    const auto fmt_kind = FormatOf(c.format);
    std::vector<evalrun::RunReport> reports;
    for (const auto& path : aggregate_reports) reports.push_back(LoadReport(path));
    Emit(evalrun::RenderAggregate(evalrun::AggregateRuns(reports), fmt_kind), c.out);
  } else if (*select) {
    std::vector<evalrun::Candidate> candidates;
    for (const auto& arg : select_inputs) {
      auto [config, path] = NamedPath(arg);
      candidates.push_back({config, LoadReport(path)});
    }
    const std::string best = evalrun::SelectBest(candidates);
    std::string body;
    if (FormatOf(c.format) == evalrun::Format::kCsv) {
      body = "config,selection_score\n";
      for (const auto& cand : candidates) {
        body += fmt::format("{},{}\n", cand.config, evalrun::SelectionScoreOf(cand.report));
      }
      body += "#best," + best + "\n";
    } else {
      for (const auto& cand : candidates) {
        body += fmt::format("{:<24} {:>8.2f}\n", cand.config, evalrun::SelectionScoreOf(cand.report));
      }
      body += "best: " + best + "\n";
    }
    Emit(body, c.out);
  } else if (*agree) {
    RequireFile(agree_export);
    const bool csv = FormatOf(c.format) == evalrun::Format::kCsv;
    std::optional<agreement::Level> level;
    if (agree_level != "auto") {
      level = agreement::ParseLevel(agree_level);
      if (!level) throw Error("--level must be nominal, interval or auto");
    }
    auto exported = agreement::LoadAnnotationExport(agree_export);
    std::optional<agreement::Questionnaire> q;
    if (!agree_questionnaire.empty()) {
      q = LoadQuestionnaire(agree_questionnaire);
    } else if (exported.questionnaire) {
      q = std::move(exported.questionnaire);
    } else {
      q = LoadQuestionnaire("");
    }
    const auto report = agreement::PerCriterionAlpha(exported.records, *q, level);
    std::string body = agreement::RenderAlphaReport(report, csv);
    if (agree_threshold) {
      const auto matrix = agreement::ThresholdMatrix(
          agreement::BinarizeAndAggregate(exported.records, *q, *agree_threshold), 0.5);
      std::string value = "undefined";
      try {
        const double a = agreement::Alpha(matrix, agreement::Level::kNominal);
        value = csv ? fmt::format("{}", a) : fmt::format("{:.4f}", a);
      } catch (const Error&) {
      }
      body += csv ? fmt::format("#binarized_t{},{}\n", *agree_threshold, value)
                  : fmt::format("binarized (threshold {}): {}\n", *agree_threshold, value);
    }
    if (!agree_categories.empty()) {
      WriteFileAtomic(agree_categories, agreement::RenderCategoryScores(
                                            agreement::CategoryScores(exported.records, *q), csv));
    }
    Emit(body, c.out);
  } else if (*campaign) {
    service::CampaignService svc(DataDir(data_dir));
    if (*create) {
      RequireFile(create_pool);
      service::SamplingPolicy policy;
      policy.per_model_in_domain = create_in;
      policy.per_model_out_domain = create_out;
      policy.seed = create_seed;
      policy.presentation = create_presentation;
      policy = service::PolicyFromJson(service::PolicyToJson(policy));  // validates
      service::CampaignSpec spec{create_id, LoadQuestionnaire(create_questionnaire),
                                 service::LoadPool(create_pool), create_roster, policy};
      const auto created = svc.CreateCampaign(std::move(spec));
      const Json out = {{"campaign_id", created.campaign_id},
                        {"tokens", created.tokens},
                        {"items_per_annotator", created.items_per_annotator}};
      std::cout << out.dump(2) << "\n";
    } else if (*progress) {
      std::string body;
      for (const auto& [annotator, p] : svc.Progress(campaign_id)) {
        body += fmt::format("{}\tdone {}\tpending {}\n", annotator, p.done, p.pending);
      }
      std::cout << body;
    } else if (*cexport) {
      Emit(svc.Export(campaign_id), c.out);
    }
  } else if (*serve) {
    service::HttpOptions options;
    if (const char* token = std::getenv("ETR_ADMIN_TOKEN"); token && *token) {
      options.admin_token = token;
    } else {
      std::random_device rd;
      for (int i = 0; i < 4; ++i) options.admin_token += fmt::format("{:08x}", rd());
      std::cerr << "admin token: " << options.admin_token << "\n";
    }
    options.default_questionnaire = LoadQuestionnaire(serve_questionnaire);
    service::CampaignService svc(DataDir(data_dir));
    service::HttpServer server(svc, options);
    const int port = server.Bind(serve_host, serve_port);
    std::cerr << fmt::format("listening on {}:{}\n", serve_host, port);
    server.Listen();
  }
  return 0;
}

}  // namespace
}  // namespace etr

int main(int argc, char** argv) {
  try {
    return etr::Main(argc, argv);
  } catch (const etr::IoError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const etr::Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
}
