// s2vntm command line: prepare | embed | train | topics | refine | eval | infer | serve | planted
//
// Exit codes: 0 success, 1 any library error, 2 bad or missing flags.

#include <algorithm>
#include <csignal>
#include <cstdio>
#include <filesystem>
#include <iomanip>
#include <iostream>
#include <numeric>
#include <optional>
#include <sstream>

#include <CLI11.hpp>
#include <json.hpp>

#include "s2vntm/checkpoint.hpp"
#include "s2vntm/config.hpp"
#include "s2vntm/corpus_io.hpp"
#include "s2vntm/embeddings.hpp"
#include "s2vntm/errors.hpp"
#include "s2vntm/eval.hpp"
#include "s2vntm/http_api.hpp"
#include "s2vntm/synthetic.hpp"
#include "s2vntm/trainer.hpp"
#include "s2vntm/workbench.hpp"

namespace fs = std::filesystem;
using namespace s2vntm;

namespace {

fs::path embeddings_path(const fs::path& corpus_dir, const std::string& flag) {
  return flag.empty() ? corpus_dir / "embeddings.bin" : fs::path(flag);
}

std::shared_ptr<const EmbeddingMatrix> load_embeddings_for(const Corpus& corpus, const fs::path& path) {
  auto emb = std::make_shared<const EmbeddingMatrix>(load_embeddings_binary(path));
  if (emb->vocab_hash() != corpus.vocabulary.hash())
    throw VocabularyMismatch(path.string() + " was built for a different vocabulary");
  return emb;
}

// Config file (optional) over defaults; num_topics falls back to classes + 1.
RunConfig load_run_config(const std::string& path, const Corpus& corpus, std::size_t seed_groups) {
  RunConfig config;
  std::vector<std::string> keys;
  if (!path.empty()) {
    const std::string text = read_text_file(path);
    config = parse_config_text(text);
    keys = config_keys(text);
  }
  if (std::find(keys.begin(), keys.end(), "model.num_topics") == keys.end()) {
    const std::size_t base = corpus.class_names.empty() ? seed_groups : corpus.class_names.size();
    config.model.num_topics = static_cast<int>(base) + 1;
  }
  return config;
}

std::vector<std::size_t> split_indices(const Corpus& corpus, const std::string& split) {
  if (split == "all" || corpus.split.empty()) {
    std::vector<std::size_t> all(corpus.documents.size());
    std::iota(all.begin(), all.end(), 0);
    return all;
  }
  return corpus.indices(split == "train" ? Split::train : Split::test);
}

void write_file(const fs::path& path, const std::string& content) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  write_text_file_atomic(path, content);
}

HttpServer* g_server = nullptr;

void handle_signal(int) {
  if (g_server) g_server->stop();
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Seeded vMF neural topic model: corpus preparation, training, refinement and serving"};
  app.require_subcommand(1);

  // prepare
  auto* prepare = app.add_subcommand("prepare", "Tokenize raw text into a corpus bundle (vocabulary, bag-of-words)");
  std::string prep_input, prep_out, prep_stopwords;
  bool prep_tsv = false;
  PrepareOptions prep_opts;
  prepare->add_option("--input", prep_input, "Raw documents: one per line, or label<TAB>text with --tsv")->required()->check(CLI::ExistingFile);
  prepare->add_option("--out", prep_out, "Output corpus directory")->required();
  prepare->add_flag("--tsv", prep_tsv, "Input lines are label<TAB>text");
  prepare->add_option("--stopwords", prep_stopwords, "Stopword file (one per line) replacing the built-in list")->check(CLI::ExistingFile);
  prepare->add_option("--min-count", prep_opts.vocabulary.min_count, "Keep unigrams with frequency above this")->capture_default_str();
  prepare->add_option("--ngram-min-count", prep_opts.vocabulary.ngram_min_count, "Keep phrases with frequency above this")->capture_default_str();
  prepare->add_option("--max-ngram", prep_opts.vocabulary.max_ngram, "Longest phrase length (1 disables phrases)")->capture_default_str();
  prepare->add_option("--train-fraction", prep_opts.train_fraction, "Fraction of documents marked train")->capture_default_str();
  prepare->add_option("--split-seed", prep_opts.split_seed, "Seed of the train/test split")->capture_default_str();

  // embed
  auto* embed = app.add_subcommand("embed", "Train spherical word embeddings for a corpus (or import text vectors)");
  std::string emb_corpus, emb_out, emb_pretrained;
  EmbeddingOptions emb_opts;
  embed->add_option("--corpus", emb_corpus, "Corpus directory")->required()->check(CLI::ExistingDirectory);
  embed->add_option("--out", emb_out, "Embedding file (default <corpus>/embeddings.bin)");
  embed->add_option("--pretrained", emb_pretrained, "Import 'term v1 .. vE' text vectors instead of training")->check(CLI::ExistingFile);
  embed->add_option("--dim", emb_opts.dim, "Embedding dimension")->capture_default_str();
  embed->add_option("--window", emb_opts.window, "Context window")->capture_default_str();
  embed->add_option("--negatives", emb_opts.negatives, "Negative samples per pair")->capture_default_str();
  embed->add_option("--epochs", emb_opts.epochs, "Passes over the corpus")->capture_default_str();
  embed->add_option("--seed", emb_opts.seed, "Random seed")->capture_default_str();

  // train
  auto* train = app.add_subcommand("train", "Fit a topic model; writes a checkpoint and JSON-lines telemetry");
  std::string tr_corpus, tr_seeds, tr_config, tr_out, tr_telemetry, tr_embeddings;
  int tr_derive = 3;
  std::optional<std::uint64_t> tr_seed;
  train->add_option("--corpus", tr_corpus, "Corpus directory")->required()->check(CLI::ExistingDirectory);
  train->add_option("--seeds", tr_seeds, "Seed file: JSON list of {label, keywords}; omitted = tf-idf seeds from the train split")->check(CLI::ExistingFile);
  train->add_option("--derive-top", tr_derive, "Keywords per class when deriving tf-idf seeds")->capture_default_str();
  train->add_option("--config", tr_config, "Config file (key = value)")->check(CLI::ExistingFile);
  train->add_option("--out", tr_out, "Checkpoint path")->required();
  train->add_option("--telemetry", tr_telemetry, "Telemetry path (default <out>.telemetry.jsonl)");
  train->add_option("--embeddings", tr_embeddings, "Embedding file (default <corpus>/embeddings.bin)");
  train->add_option("--seed", tr_seed, "Override train.seed");

  // topics
  auto* topics = app.add_subcommand("topics", "Print the top words of every topic with matched seed groups");
  std::string tp_corpus, tp_checkpoint, tp_embeddings;
  int tp_top = 10;
  bool tp_json = false;
  topics->add_option("--corpus", tp_corpus, "Corpus directory")->required()->check(CLI::ExistingDirectory);
  topics->add_option("--checkpoint", tp_checkpoint, "Checkpoint path")->required()->check(CLI::ExistingFile);
  topics->add_option("--embeddings", tp_embeddings, "Embedding file (default <corpus>/embeddings.bin)");
  topics->add_option("--top", tp_top, "Words per topic")->capture_default_str()->check(CLI::PositiveNumber);
  topics->add_flag("--json", tp_json, "Emit JSON");

  // refine
  auto* refine = app.add_subcommand("refine", "Warm-start fine-tune a checkpoint with an edited seed file");
  std::string rf_corpus, rf_checkpoint, rf_seeds, rf_config, rf_out, rf_telemetry, rf_embeddings;
  refine->add_option("--corpus", rf_corpus, "Corpus directory")->required()->check(CLI::ExistingDirectory);
  refine->add_option("--checkpoint", rf_checkpoint, "Trained checkpoint")->required()->check(CLI::ExistingFile);
  refine->add_option("--seeds", rf_seeds, "Edited seed file")->required()->check(CLI::ExistingFile);
  refine->add_option("--config", rf_config, "Config file (train.* keys apply)")->check(CLI::ExistingFile);
  refine->add_option("--out", rf_out, "Fine-tuned checkpoint path")->required();
  refine->add_option("--telemetry", rf_telemetry, "Telemetry path (default <out>.telemetry.jsonl)");
  refine->add_option("--embeddings", rf_embeddings, "Embedding file (default <corpus>/embeddings.bin)");

  // eval
  auto* eval = app.add_subcommand("eval", "Classify labelled documents and report accuracy, macro F1, AUC, diversity");
  std::string ev_corpus, ev_checkpoint, ev_out, ev_confusion, ev_config, ev_embeddings, ev_split = "test";
  eval->add_option("--corpus", ev_corpus, "Corpus directory")->required()->check(CLI::ExistingDirectory);
  eval->add_option("--checkpoint", ev_checkpoint, "Checkpoint path")->required()->check(CLI::ExistingFile);
  eval->add_option("--split", ev_split, "Documents to evaluate")->check(CLI::IsMember({"test", "train", "all"}))->capture_default_str();
  eval->add_option("--out", ev_out, "Write the report JSON here (default: stdout)");
  eval->add_option("--confusion", ev_confusion, "Write the confusion matrix CSV here");
  eval->add_option("--config", ev_config, "Config file (eval.* keys apply)")->check(CLI::ExistingFile);
  eval->add_option("--embeddings", ev_embeddings, "Embedding file (default <corpus>/embeddings.bin)");

  // infer
  auto* infer = app.add_subcommand("infer", "Label raw documents with a trained checkpoint");
  std::string in_corpus, in_checkpoint, in_input, in_embeddings, in_config;
  infer->add_option("--corpus", in_corpus, "Corpus directory")->required()->check(CLI::ExistingDirectory);
  infer->add_option("--checkpoint", in_checkpoint, "Checkpoint path")->required()->check(CLI::ExistingFile);
  infer->add_option("--input", in_input, "One document per line")->required()->check(CLI::ExistingFile);
  infer->add_option("--config", in_config, "Config file (eval.rule applies)")->check(CLI::ExistingFile);
  infer->add_option("--embeddings", in_embeddings, "Embedding file (default <corpus>/embeddings.bin)");

  // serve
  auto* serve = app.add_subcommand("serve", "Run the HTTP workbench service");
  std::string sv_root, sv_host = "127.0.0.1", sv_register_id, sv_register_dir;
  int sv_port = 8080;
  serve->add_option("--root", sv_root, "Service directory (corpora/ and sessions/)")->required();
  serve->add_option("--host", sv_host, "Listen address")->capture_default_str();
  serve->add_option("--port", sv_port, "Listen port (0 = any free port)")->capture_default_str();
  auto* reg_id = serve->add_option("--register", sv_register_id, "Register a corpus under this id before serving");
  serve->add_option("--corpus", sv_register_dir, "Corpus directory to register (with embeddings.bin)")
      ->check(CLI::ExistingDirectory)
      ->needs(reg_id);
  reg_id->needs("--corpus");

  // planted
  auto* planted = app.add_subcommand("planted", "Write a planted-topic synthetic corpus bundle and its seed file");
  std::string pl_out;
  PlantedOptions pl_opts;
  planted->add_option("--out", pl_out, "Output corpus directory")->required();
  planted->add_option("--documents", pl_opts.documents, "Number of documents")->capture_default_str();
  planted->add_option("--blocks", pl_opts.blocks, "Number of planted blocks")->capture_default_str();
  planted->add_option("--seed", pl_opts.seed, "Generator seed")->capture_default_str();

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 2;
  }

  try {
    if (*prepare) {
      TokenRules rules = TokenRules::defaults();
      if (!prep_stopwords.empty()) {
        rules.stopwords.clear();
        std::istringstream in(read_text_file(prep_stopwords));
        for (std::string w; std::getline(in, w);)
          if (!w.empty()) rules.stopwords.insert(w);
      }
      const Corpus corpus = prepare_corpus(read_raw_documents(prep_input, prep_tsv), rules, prep_opts);
      save_corpus_bundle(prep_out, corpus, rules);
      std::cout << "prepared " << corpus.documents.size() << " documents, vocabulary " << corpus.vocabulary.size()
                << ", classes " << corpus.class_names.size() << " -> " << prep_out << "\n";
    } else if (*embed) {
      const Corpus corpus = load_corpus_bundle(emb_corpus);
      const EmbeddingMatrix emb = emb_pretrained.empty() ? train_embeddings(corpus, emb_opts)
                                                         : load_embeddings(emb_pretrained, corpus.vocabulary);
      const fs::path out = embeddings_path(emb_corpus, emb_out);
      save_embeddings_binary(out, emb);
      std::cout << "embeddings " << emb.rows() << " x " << emb.dim() << " checksum " << std::hex << emb.checksum()
                << std::dec << " -> " << out.string() << "\n";
    } else if (*train) {
      const Corpus corpus = load_corpus_bundle(tr_corpus);
      const auto emb = load_embeddings_for(corpus, embeddings_path(tr_corpus, tr_embeddings));
      SeedSets seeds;
      if (!tr_seeds.empty()) {
        seeds = read_seeds(tr_seeds, corpus.vocabulary);
      } else {
        seeds = derive_seed_keywords(corpus, split_indices(corpus, "train"), tr_derive);
      }
      RunConfig config = load_run_config(tr_config, corpus, seeds.size());
      if (tr_seed) config.train.seed = *tr_seed;
      config.model.vocab_size = static_cast<int>(corpus.vocabulary.size());
      config.model.embed_dim = static_cast<int>(emb->dim());
      const fs::path telemetry = tr_telemetry.empty() ? fs::path(tr_out + ".telemetry.jsonl") : fs::path(tr_telemetry);
      FitResult result = fit(corpus, seeds, config.model, config.train, emb, [](const EpochTelemetry& t, const TopicModel&) {
        std::cerr << "epoch " << t.epoch << " total " << t.total << " recon " << t.losses.recon << "\n";
      });
      save_checkpoint(tr_out, result.model, seeds, corpus.vocabulary.hash());
      write_file(telemetry, result.log.to_jsonl());
      std::cout << "trained " << result.log.epochs.size() << " epochs in " << std::fixed << std::setprecision(2)
                << result.log.wall_seconds << " s -> " << tr_out << "\n";
    } else if (*topics) {
      const Corpus corpus = load_corpus_bundle(tp_corpus);
      const auto emb = load_embeddings_for(corpus, embeddings_path(tp_corpus, tp_embeddings));
      const Checkpoint ck = load_checkpoint(tp_checkpoint, emb);
      const DecoderState decoder = decode(ck.model);
      std::optional<MatchResult> match;
      if (!ck.seeds.groups.empty()) match = match_topics(ck.seeds, decoder.log_beta, ck.model.config().match_includes_own_group);
      nlohmann::json out = nlohmann::json::array();
      for (int t = 0; t < ck.model.num_topics(); ++t) {
        std::vector<std::string> labels;
        if (match)
          for (std::size_t g = 0; g < match->assignments.size(); ++g)
            if (match->assignments[g] == t) labels.push_back(ck.seeds.groups[g].label);
        const auto words = top_words(decoder, t, tp_top);
        if (tp_json) {
          nlohmann::json w = nlohmann::json::array();
          for (const auto& [id, p] : words) w.push_back({{"term", corpus.vocabulary.term(id)}, {"prob", p}});
          out.push_back({{"topic", t}, {"groups", labels}, {"words", w}});
          continue;
        }
        std::string label = labels.empty() ? "-" : labels[0];
        for (std::size_t i = 1; i < labels.size(); ++i) label += "+" + labels[i];
        std::cout << "topic " << t << "\t[" << label << "]\t";
        for (std::size_t i = 0; i < words.size(); ++i)
          std::cout << (i ? " " : "") << corpus.vocabulary.term(words[i].first) << ":" << std::fixed
                    << std::setprecision(4) << words[i].second;
        std::cout << "\n";
      }
      if (tp_json) std::cout << out.dump(2) << "\n";
    } else if (*refine) {
      const Corpus corpus = load_corpus_bundle(rf_corpus);
      const auto emb = load_embeddings_for(corpus, embeddings_path(rf_corpus, rf_embeddings));
      const Checkpoint ck = load_checkpoint(rf_checkpoint, emb);
      if (ck.vocab_hash != corpus.vocabulary.hash()) throw VocabularyMismatch("checkpoint was trained on another corpus");
      const SeedSets seeds = read_seeds(rf_seeds, corpus.vocabulary);
      const RunConfig config = rf_config.empty() ? RunConfig{} : read_config_file(rf_config);
      FitResult result = fine_tune(ck.model, corpus, seeds, config.train);
      save_checkpoint(rf_out, result.model, seeds, corpus.vocabulary.hash());
      write_file(rf_telemetry.empty() ? fs::path(rf_out + ".telemetry.jsonl") : fs::path(rf_telemetry), result.log.to_jsonl());
      std::cout << "fine-tuned " << result.log.epochs.size() << " epochs in " << std::fixed << std::setprecision(2)
                << result.log.wall_seconds << " s -> " << rf_out << "\n";
    } else if (*eval) {
      const Corpus corpus = load_corpus_bundle(ev_corpus);
      const auto emb = load_embeddings_for(corpus, embeddings_path(ev_corpus, ev_embeddings));
      const Checkpoint ck = load_checkpoint(ev_checkpoint, emb);
      const RunConfig config = ev_config.empty() ? RunConfig{} : read_config_file(ev_config);
      const EvalReport report = evaluate(corpus, split_indices(corpus, ev_split), ck.model, ck.seeds, config.eval);
      if (ev_out.empty())
        std::cout << report.to_json().dump(2) << "\n";
      else
        write_file(ev_out, report.to_json().dump(2) + "\n");
      if (!ev_confusion.empty()) write_file(ev_confusion, report.confusion_csv());
    } else if (*infer) {
      const Corpus corpus = load_corpus_bundle(in_corpus);
      const TokenRules rules = load_bundle_rules(in_corpus);
      const auto emb = load_embeddings_for(corpus, embeddings_path(in_corpus, in_embeddings));
      const Checkpoint ck = load_checkpoint(in_checkpoint, emb);
      const RunConfig config = in_config.empty() ? RunConfig{} : read_config_file(in_config);
      const MatchResult match = match_topics(ck.seeds, ck.model);
      const auto raw = read_raw_documents(in_input, false);
      std::cout << "index\tlabel\ttopic\tscore\n";
      for (std::size_t i = 0; i < raw.size(); ++i) {
        const Document doc = make_document(std::to_string(i), map_tokens(tokenize(raw[i].text, rules), corpus.vocabulary));
        const Classification c = classify(doc, ck.model, ck.seeds, match, config.eval.rule);
        const double score = c.group >= 0 ? c.scores[c.group] : 0.0;
        std::cout << i << "\t" << c.label.value_or("-") << "\t" << c.topic << "\t" << std::fixed << std::setprecision(4)
                  << score << "\n";
      }
    } else if (*serve) {
      Workbench workbench({sv_root, true});
      if (!sv_register_id.empty()) {
        const RegisteredCorpus rc = load_registered_corpus(sv_register_dir, sv_register_id);
        workbench.register_corpus(sv_register_id, rc.corpus, rc.rules, *rc.embeddings);
      }
      HttpServer server(workbench);
      const int port = server.bind(sv_host, sv_port);
      std::cout << "listening on http://" << sv_host << ":" << port << std::endl;
      g_server = &server;
      std::signal(SIGINT, handle_signal);
      std::signal(SIGTERM, handle_signal);
      server.run();
      g_server = nullptr;
    } else if (*planted) {
      const PlantedCorpus pc = make_planted_corpus(pl_opts);
      save_corpus_bundle(pl_out, pc.corpus, TokenRules::defaults());
      write_seeds(fs::path(pl_out) / "seeds.json", pc.seeds, pc.corpus.vocabulary);
      std::cout << "planted corpus " << pc.corpus.documents.size() << " documents, vocabulary "
                << pc.corpus.vocabulary.size() << " -> " << pl_out << "\n";
    }
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
