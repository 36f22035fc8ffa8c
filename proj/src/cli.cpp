#include "ddx/cli.hpp"

#include <algorithm>
#include <chrono>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <sstream>

#include <CLI11.hpp>
#include <json.hpp>

#include "ddx/case_simulator.hpp"
#include "ddx/dataset.hpp"
#include "ddx/error.hpp"
#include "ddx/evaluator.hpp"
#include "ddx/expert_engine.hpp"
#include "ddx/knowledge_base.hpp"
#include "ddx/model.hpp"
#include "ddx/synthetic_kb.hpp"
#include "ddx/trainer.hpp"

namespace ddx {

namespace {

using ordered_json = nlohmann::ordered_json;

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot open '" + path + "'");
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

void write_file(const std::string& path, const std::string& bytes) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot write '" + path + "'");
  out << bytes;
  if (!out) throw Error("failed writing '" + path + "'");
}

std::vector<std::string> split_list(const std::string& text) {
  std::vector<std::string> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    item.erase(0, item.find_first_not_of(" \t"));
    item.erase(item.find_last_not_of(" \t") + 1);
    if (!item.empty()) out.push_back(item);
  }
  return out;
}

std::vector<std::size_t> parse_ks(const std::string& text) {
  std::vector<std::size_t> ks;
  for (const auto& item : split_list(text)) {
    std::size_t pos = 0;
    unsigned long value = 0;
    try {
      value = std::stoul(item, &pos);
    } catch (const std::exception&) {
      pos = 0;
    }
    if (pos != item.size() || value == 0) throw Error("--topk expects positive integers, got '" + item + "'");
    ks.push_back(value);
  }
  if (ks.empty()) throw Error("--topk is empty");
  return ks;
}

// Finding ids from either a knowledge-base document or a plain list (one
// id per line, '#' starts a comment).
std::set<std::string> read_finding_list(const std::string& path) {
  const auto text = read_file(path);
  const auto first = text.find_first_not_of(" \t\r\n");
  std::set<std::string> ids;
  if (first != std::string::npos && text[first] == '{') {
    for (const auto& f : parse_knowledge_base(text).findings()) ids.insert(f.id);
    return ids;
  }
  std::stringstream ss(text);
  std::string line;
  while (std::getline(ss, line)) {
    line = line.substr(0, line.find('#'));
    line.erase(0, line.find_first_not_of(" \t\r"));
    line.erase(line.find_last_not_of(" \t\r") + 1);
    if (!line.empty()) ids.insert(line);
  }
  return ids;
}

std::string utc_timestamp(std::chrono::system_clock::time_point t) {
  const auto tt = std::chrono::system_clock::to_time_t(t);
  std::tm tm{};
  gmtime_r(&tt, &tm);
  std::ostringstream os;
  os << std::put_time(&tm, "%Y-%m-%dT%H:%M:%SZ");
  return os.str();
}

// Written next to the primary output as <out>.manifest.json.
class RunManifest {
 public:
  explicit RunManifest(std::string command)
      : command_(std::move(command)), started_(std::chrono::system_clock::now()),
        clock_(std::chrono::steady_clock::now()) {}

  ordered_json config = ordered_json::object();
  ordered_json seeds = ordered_json::object();
  std::vector<std::string> inputs;
  std::vector<std::string> outputs;

  void write(const std::string& primary_output) const {
    ordered_json j;
    j["command"] = command_;
    j["tool_version"] = kToolVersion;
    j["config"] = config;
    j["seeds"] = seeds;
    j["inputs"] = inputs;
    j["outputs"] = outputs;
    j["started_at"] = utc_timestamp(started_);
    j["duration_seconds"] =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - clock_).count();
    write_file(primary_output + ".manifest.json", j.dump(2) + "\n");
  }

 private:
  std::string command_;
  std::chrono::system_clock::time_point started_;
  std::chrono::steady_clock::time_point clock_;
};

CaseSet load_all(const std::vector<std::string>& paths) {
  std::vector<CaseSet> sets;
  for (const auto& p : paths) sets.push_back(load_cases(p));
  return merge(sets);
}

struct KbValidateArgs {
  std::string path;
  std::size_t min_findings = ValidationOptions{}.min_clinical_findings;
  std::string out;
};

int kb_validate(const KbValidateArgs& a, std::ostream& out) {
  RunManifest manifest("kb validate");
  const auto kb = read_knowledge_base_document(read_file(a.path));
  const auto report = validate_knowledge_base(kb, {a.min_findings});

  for (const auto& issue : report.issues) {
    out << (issue.severity == Severity::error ? "error" : "warning") << " " << issue.location << ": "
        << issue.message << "\n";
  }
  out << a.path << ": " << report.error_count() << " error(s), " << report.warning_count() << " warning(s)\n";

  if (!a.out.empty()) {
    ordered_json j;
    j["valid"] = report.valid();
    j["issues"] = ordered_json::array();
    for (const auto& issue : report.issues) {
      j["issues"].push_back({{"severity", issue.severity == Severity::error ? "error" : "warning"},
                             {"location", issue.location},
                             {"message", issue.message}});
    }
    write_file(a.out, j.dump(2) + "\n");
    manifest.config = {{"min_findings", a.min_findings}};
    manifest.inputs = {a.path};
    manifest.outputs = {a.out};
    manifest.write(a.out);
  }
  return report.valid() ? 0 : 1;
}

struct KbSynthArgs {
  SeparableKbSpec spec;
  std::string out;
};

int kb_synth(const KbSynthArgs& a, std::ostream& out) {
  RunManifest manifest("kb synth");
  const auto kb = make_separable_kb(a.spec);
  write_file(a.out, serialize_knowledge_base(kb));
  out << "wrote " << a.out << ": " << kb.diseases().size() << " diseases, " << kb.findings().size()
      << " findings\n";
  manifest.config = {{"diseases", a.spec.diseases},
                     {"exclusive_per_disease", a.spec.exclusive_per_disease},
                     {"background_per_disease", a.spec.background_per_disease}};
  manifest.seeds = {{"seed", a.spec.seed}};
  manifest.outputs = {a.out};
  manifest.write(a.out);
  return 0;
}

struct SimulateArgs {
  std::string kb;
  SimConfig cfg;
  std::size_t threads = 1;
  std::string out;
};

int simulate(const SimulateArgs& a, std::ostream& out) {
  RunManifest manifest("simulate");
  const auto kb = load_knowledge_base(a.kb);
  CaseSet cs;
  cs.cases = simulate_dataset(kb, a.cfg, a.threads);
  save_cases(cs, a.out);
  out << "wrote " << cs.size() << " cases to " << a.out << "\n";
  manifest.config = {{"cases", a.cfg.cases_total},
                     {"min_per_disease", a.cfg.min_cases_per_disease},
                     {"ddx_top_k", a.cfg.ddx_top_k},
                     {"pos_threshold", a.cfg.pos_threshold},
                     {"neg_gate", a.cfg.neg_gate},
                     {"max_findings", a.cfg.max_findings_cap},
                     {"threads", a.threads}};
  manifest.seeds = {{"seed", a.cfg.seed}};
  manifest.inputs = {a.kb};
  manifest.outputs = {a.out};
  manifest.write(a.out);
  return 0;
}

struct SplitArgs {
  std::string cases;
  double fraction = 0.7;
  std::uint64_t seed = 0;
  std::string out_train;
  std::string out_test;
};

int split(const SplitArgs& a, std::ostream& out) {
  RunManifest manifest("split");
  const auto cs = load_cases(a.cases);
  const auto [train_set, test_set] = split_train_test(cs, a.fraction, a.seed);
  save_cases(train_set, a.out_train);
  save_cases(test_set, a.out_test);
  out << "train " << train_set.size() << " -> " << a.out_train << ", test " << test_set.size() << " -> "
      << a.out_test << "\n";
  manifest.config = {{"train_fraction", a.fraction}};
  manifest.seeds = {{"seed", a.seed}};
  manifest.inputs = {a.cases};
  manifest.outputs = {a.out_train, a.out_test};
  manifest.write(a.out_train);
  return 0;
}

struct TrainArgs {
  std::vector<std::string> cases;
  std::string kb;
  std::string restrict_findings;
  std::string holdout;
  std::size_t dim = kDefaultEmbeddingDim;
  TrainConfig cfg;
  std::string out;
};

std::string format_epoch(const EpochStats& s) {
  std::ostringstream os;
  os << "epoch " << s.epoch << " loss " << std::setprecision(10) << s.mean_loss;
  if (s.holdout_top1) {
    os << std::fixed << std::setprecision(4) << " holdout_top1 " << *s.holdout_top1 << " holdout_top3 "
       << *s.holdout_top3 << " holdout_top5 " << *s.holdout_top5;
  }
  return os.str();
}

int train_cmd(const TrainArgs& a, std::ostream& out) {
  RunManifest manifest("train");
  std::vector<CaseSet> sets;
  for (const auto& p : a.cases) sets.push_back(load_cases(p));
  const auto train_set = merge(sets);

  std::optional<KnowledgeBase> kb;
  if (!a.kb.empty()) kb = load_knowledge_base(a.kb);
  std::optional<std::set<std::string>> restrict_to;
  if (!a.restrict_findings.empty()) restrict_to = read_finding_list(a.restrict_findings);

  const auto vocab = build_vocabulary(sets, kb ? &*kb : nullptr, restrict_to ? &*restrict_to : nullptr);
  const auto p0 = init_parameters(vocab, a.dim, a.cfg.seed, kb ? &*kb : nullptr);

  std::optional<CaseSet> holdout;
  if (!a.holdout.empty()) holdout = load_cases(a.holdout);

  std::string log;
  const auto result = train(p0, train_set, a.cfg, holdout ? &*holdout : nullptr, [&](const EpochStats& s) {
    const auto line = format_epoch(s);
    out << line << "\n" << std::flush;
    log += line + "\n";
  });
  save_checkpoint(result.params, a.out);
  write_file(a.out + ".log", log);
  out << "wrote " << a.out << " (" << vocab.finding_count() << " findings, " << vocab.disease_count()
      << " diseases, " << result.optimizer_steps << " steps)\n";

  manifest.config = {{"dim", a.dim},
                     {"dropout", a.cfg.dropout_rate},
                     {"lr", a.cfg.learning_rate},
                     {"epochs", a.cfg.epochs},
                     {"batch", a.cfg.batch_size},
                     {"adam_beta1", a.cfg.adam_beta1},
                     {"adam_beta2", a.cfg.adam_beta2},
                     {"adam_eps", a.cfg.adam_eps},
                     {"threads", a.cfg.threads},
                     {"restrict_findings", a.restrict_findings},
                     {"vocab_findings", vocab.finding_count()},
                     {"vocab_diseases", vocab.disease_count()}};
  manifest.seeds = {{"seed", a.cfg.seed}};
  manifest.inputs = a.cases;
  if (!a.kb.empty()) manifest.inputs.push_back(a.kb);
  if (!a.holdout.empty()) manifest.inputs.push_back(a.holdout);
  if (!a.restrict_findings.empty()) manifest.inputs.push_back(a.restrict_findings);
  manifest.outputs = {a.out, a.out + ".log"};
  manifest.write(a.out);
  return 0;
}

struct EvalArgs {
  std::string engine = "model";
  std::vector<std::string> models;
  std::string kb;
  std::vector<std::string> cases;
  std::string topk = "1,3,5";
  std::string target;
  std::string truth = "argmax";
  std::size_t threads = 1;
  std::string out;
};

int eval_cmd(const EvalArgs& a, std::ostream& out) {
  RunManifest manifest("eval");
  const auto cases = load_all(a.cases);
  EvalOptions options;
  options.ks = parse_ks(a.topk);
  options.truth_mode = parse_truth_mode(a.truth);
  options.threads = a.threads;
  if (!a.target.empty()) options.target_disease = a.target;

  std::vector<std::pair<std::string, EvalReport>> reports;
  if (a.engine == "expert") {
    if (a.kb.empty()) throw Error("--engine expert requires --kb");
    reports.emplace_back("expert", evaluate_expert(load_knowledge_base(a.kb), cases, options));
  } else {
    if (a.models.empty()) throw Error("--engine model requires at least one --model");
    for (const auto& path : a.models) reports.emplace_back(path, evaluate(load_checkpoint(path), cases, options));
  }

  std::vector<std::pair<std::string, const EvalReport*>> columns;
  for (const auto& [name, rep] : reports) columns.emplace_back(std::filesystem::path(name).filename().string(), &rep);
  out << format_report_table(columns);

  if (!a.out.empty()) {
    std::string doc;
    if (reports.size() == 1) {
      doc = report_to_json(reports.front().second);
    } else {
      ordered_json j = ordered_json::array();
      for (const auto& [name, rep] : reports) {
        auto r = ordered_json::parse(report_to_json(rep));
        r["source"] = name;
        j.push_back(std::move(r));
      }
      doc = j.dump(2) + "\n";
    }
    write_file(a.out, doc);
    manifest.config = {{"engine", a.engine}, {"topk", a.topk}, {"truth", a.truth}, {"target_disease", a.target},
                       {"threads", a.threads}};
    manifest.inputs = a.cases;
    manifest.inputs.insert(manifest.inputs.end(), a.models.begin(), a.models.end());
    if (!a.kb.empty()) manifest.inputs.push_back(a.kb);
    manifest.outputs = {a.out};
    manifest.write(a.out);
  }
  return 0;
}

struct PredictArgs {
  std::string engine = "model";
  std::string model;
  std::string kb;
  std::string pos;
  std::string neg;
  std::string cases;
  std::size_t topk = 5;
  std::size_t ddx_top_k = kDefaultDdxTopK;
  std::string out;
};

int predict_cmd(const PredictArgs& a, std::ostream& out) {
  RunManifest manifest("predict");
  std::optional<ModelParameters> model;
  std::optional<KnowledgeBase> kb;
  if (a.engine == "expert") {
    if (a.kb.empty()) throw Error("--engine expert requires --kb");
    kb = load_knowledge_base(a.kb);
  } else {
    if (a.model.empty()) throw Error("--engine model requires --model");
    model = load_checkpoint(a.model);
  }

  CaseSet cases;
  if (!a.cases.empty()) {
    cases = load_cases(a.cases);
  } else {
    ClinicalCase c;
    c.id = "input";
    for (const auto& f : split_list(a.pos)) c.pos.insert(f);
    for (const auto& f : split_list(a.neg)) c.neg.insert(f);
    for (const auto& f : c.pos) {
      if (c.neg.count(f)) throw Error("finding '" + f + "' given as both present and absent");
    }
    cases.cases.push_back(std::move(c));
  }

  std::string lines;
  for (const auto& c : cases.cases) {
    std::vector<RankedDisease> ranked;
    std::vector<std::string> skipped;
    if (model) {
      const auto encoded = encode_case(model->vocab, c);
      skipped = encoded.skipped;
      ranked = predict_topk(*model, encoded.input, a.topk);
    } else {
      FindingSet pos;
      FindingSet neg;
      for (const auto& f : c.pos) {
        if (kb->finding_index(f)) pos.insert(f);
        else skipped.push_back(f);
      }
      for (const auto& f : c.neg) {
        if (kb->finding_index(f)) neg.insert(f);
        else skipped.push_back(f);
      }
      for (const auto& e : expert_inference(*kb, pos, neg, std::max(a.topk, a.ddx_top_k)).entries) {
        if (ranked.size() < a.topk) ranked.push_back({e.disease, e.probability});
      }
    }
    ordered_json j;
    j["id"] = c.id;
    j["ranked"] = ordered_json::array();
    for (const auto& r : ranked) j["ranked"].push_back({{"disease", r.disease}, {"p", r.probability}});
    j["skipped"] = skipped;
    lines += j.dump() + "\n";

    if (a.out.empty()) {
      out << c.id << "\n";
      for (std::size_t i = 0; i < ranked.size(); ++i) {
        out << "  " << (i + 1) << ". " << std::left << std::setw(32) << ranked[i].disease << std::fixed
            << std::setprecision(4) << ranked[i].probability << "\n";
      }
      for (const auto& f : skipped) out << "  warning: finding '" << f << "' is unknown and was skipped\n";
    }
  }
  if (!a.out.empty()) {
    write_file(a.out, lines);
    manifest.config = {{"engine", a.engine}, {"topk", a.topk}, {"pos", a.pos}, {"neg", a.neg}};
    manifest.inputs = {a.engine == "expert" ? a.kb : a.model};
    if (!a.cases.empty()) manifest.inputs.push_back(a.cases);
    manifest.outputs = {a.out};
    manifest.write(a.out);
  }
  return 0;
}

}  // namespace

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Differential diagnosis toolkit: knowledge-base case simulation, model training and top-k evaluation",
               "ddx"};
  app.set_version_flag("--version", kToolVersion);
  app.require_subcommand(1);

  auto* kb_cmd = app.add_subcommand("kb", "Knowledge-base utilities");
  kb_cmd->require_subcommand(1);

  KbValidateArgs kv;
  auto* kb_validate_cmd = kb_cmd->add_subcommand("validate", "Check a knowledge-base document");
  kb_validate_cmd->add_option("file", kv.path, "Knowledge-base JSON document")->required();
  kb_validate_cmd->add_option("--min-findings", kv.min_findings, "Warn below this many nonzero clinical findings")
      ->capture_default_str();
  kb_validate_cmd->add_option("--out", kv.out, "Write the report as JSON");

  KbSynthArgs ks;
  auto* kb_synth_cmd = kb_cmd->add_subcommand("synth", "Generate a separable synthetic knowledge base");
  kb_synth_cmd->add_option("--diseases", ks.spec.diseases, "Number of diseases")->capture_default_str();
  kb_synth_cmd->add_option("--per-disease", ks.spec.exclusive_per_disease, "Exclusive findings per disease")
      ->capture_default_str();
  kb_synth_cmd->add_option("--background", ks.spec.background_per_disease, "Low-frequency foreign links per disease")
      ->capture_default_str();
  kb_synth_cmd->add_option("--seed", ks.spec.seed, "Random seed")->capture_default_str();
  kb_synth_cmd->add_option("--out", ks.out, "Output knowledge-base path")->required();

  SimulateArgs sa;
  auto* sim_cmd = app.add_subcommand("simulate", "Simulate labeled clinical cases from a knowledge base");
  sim_cmd->add_option("--kb", sa.kb, "Knowledge-base JSON document")->required();
  sim_cmd->add_option("--cases", sa.cfg.cases_total, "Total number of cases")->capture_default_str();
  sim_cmd->add_option("--min-per-disease", sa.cfg.min_cases_per_disease, "Minimum cases per simulable disease")
      ->capture_default_str();
  sim_cmd->add_option("--seed", sa.cfg.seed, "Random seed")->capture_default_str();
  sim_cmd->add_option("--ddx-top-k", sa.cfg.ddx_top_k, "Diseases kept in each label differential")
      ->capture_default_str();
  sim_cmd->add_option("--pos-threshold", sa.cfg.pos_threshold, "Minimum frequency for a present finding")
      ->capture_default_str();
  sim_cmd->add_option("--neg-gate", sa.cfg.neg_gate, "Uniform draw must exceed this to record an absent finding")
      ->capture_default_str();
  sim_cmd->add_option("--max-findings", sa.cfg.max_findings_cap, "Cap on elicited clinical findings")
      ->capture_default_str();
  sim_cmd->add_option("--threads", sa.threads, "Worker threads")->capture_default_str();
  sim_cmd->add_option("--out", sa.out, "Output case file (JSON lines)")->required();

  SplitArgs sp;
  auto* split_cmd = app.add_subcommand("split", "Shuffle and split a case file into train and test");
  split_cmd->add_option("--cases", sp.cases, "Input case file")->required();
  split_cmd->add_option("--train-fraction", sp.fraction, "Fraction of cases for training")->capture_default_str();
  split_cmd->add_option("--seed", sp.seed, "Random seed")->capture_default_str();
  split_cmd->add_option("--out-train", sp.out_train, "Training split output")->required();
  split_cmd->add_option("--out-test", sp.out_test, "Test split output")->required();

  TrainArgs ta;
  auto* train_sub = app.add_subcommand("train", "Train the embedding-bag diagnosis model");
  train_sub->add_option("--cases", ta.cases, "Training case files")->required()->expected(1, -1);
  train_sub->add_option("--kb", ta.kb, "Knowledge base for demographic priors and finding kinds");
  train_sub->add_option("--restrict-findings", ta.restrict_findings,
                        "Limit the finding vocabulary to this list (ids per line, or a knowledge base)");
  train_sub->add_option("--holdout", ta.holdout, "Case file scored after every epoch");
  train_sub->add_option("--dim", ta.dim, "Embedding dimension")->capture_default_str();
  train_sub->add_option("--dropout", ta.cfg.dropout_rate, "Dropout rate")->capture_default_str();
  train_sub->add_option("--lr", ta.cfg.learning_rate, "ADAM learning rate")->capture_default_str();
  train_sub->add_option("--epochs", ta.cfg.epochs, "Training epochs")->capture_default_str();
  train_sub->add_option("--batch", ta.cfg.batch_size, "Minibatch size")->capture_default_str();
  train_sub->add_option("--seed", ta.cfg.seed, "Random seed")->capture_default_str();
  train_sub->add_option("--threads", ta.cfg.threads, "Worker threads")->capture_default_str();
  train_sub->add_option("--out", ta.out, "Output checkpoint")->required();

  EvalArgs ea;
  auto* eval_sub = app.add_subcommand("eval", "Top-k evaluation of a model or the expert engine");
  eval_sub->add_option("--engine", ea.engine, "Diagnoser")->check(CLI::IsMember({"model", "expert"}))
      ->capture_default_str();
  eval_sub->add_option("--model", ea.models, "Checkpoint (repeat for one table column per model)");
  eval_sub->add_option("--kb", ea.kb, "Knowledge base (expert engine)");
  eval_sub->add_option("--cases", ea.cases, "Evaluation case files")->required()->expected(1, -1);
  eval_sub->add_option("--topk", ea.topk, "Comma-separated k values")->capture_default_str();
  eval_sub->add_option("--target-disease", ea.target, "Also report this disease within top-k");
  eval_sub->add_option("--truth", ea.truth, "Ground truth")->check(CLI::IsMember({"argmax", "seed-disease"}))
      ->capture_default_str();
  eval_sub->add_option("--threads", ea.threads, "Worker threads")->capture_default_str();
  eval_sub->add_option("--out", ea.out, "Write the report as JSON");

  PredictArgs pa;
  auto* predict_sub = app.add_subcommand("predict", "Rank diseases for findings with a model or the expert engine");
  predict_sub->add_option("--engine", pa.engine, "Diagnoser")->check(CLI::IsMember({"model", "expert"}))
      ->capture_default_str();
  predict_sub->add_option("--model", pa.model, "Checkpoint (model engine)");
  predict_sub->add_option("--kb", pa.kb, "Knowledge base (expert engine)");
  predict_sub->add_option("--pos", pa.pos, "Comma-separated present findings");
  predict_sub->add_option("--neg", pa.neg, "Comma-separated absent findings");
  predict_sub->add_option("--cases", pa.cases, "Case file to rank instead of --pos/--neg");
  predict_sub->add_option("--topk", pa.topk, "Diseases to print")->capture_default_str();
  predict_sub->add_option("--ddx-top-k", pa.ddx_top_k, "Diseases kept by the expert engine")->capture_default_str();
  predict_sub->add_option("--out", pa.out, "Write predictions as JSON lines");

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    app.parse(reversed);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e, out, err);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e, out, err);
  } catch (const CLI::CallForVersion& e) {
    return app.exit(e, out, err);
  } catch (const CLI::ParseError& e) {
    app.exit(e, out, err);
    return 2;
  }

  try {
    if (kb_validate_cmd->parsed()) return kb_validate(kv, out);
    if (kb_synth_cmd->parsed()) return kb_synth(ks, out);
    if (sim_cmd->parsed()) return simulate(sa, out);
    if (split_cmd->parsed()) return split(sp, out);
    if (train_sub->parsed()) return train_cmd(ta, out);
    if (eval_sub->parsed()) return eval_cmd(ea, out);
    if (predict_sub->parsed()) return predict_cmd(pa, out);
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return 1;
  }
  return 2;
}

}  // namespace ddx
