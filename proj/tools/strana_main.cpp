// strana: structural-analysis pipeline for fault detection and isolation.
// Machine artifacts go to stdout (or -o), diagnostics to stderr.

#include <fstream>
#include <functional>
#include <iostream>
#include <sstream>
#include <string>

#include <CLI11.hpp>

#include "strana/pipeline.hpp"

namespace {

using namespace strana;

std::string slurp(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ModelError("cannot open '" + path + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void emit(const std::string& text, const std::string& out_path) {
  if (out_path.empty()) {
    std::cout << text;
    if (text.empty() || text.back() != '\n') std::cout << '\n';
  } else {
    std::ofstream out(out_path, std::ios::binary);
    if (!out) throw ModelError("cannot write '" + out_path + "'");
    out << text;
  }
}

// Options shared by every subcommand that ingests a model.
struct ModelArgs {
  std::string path;
  std::string cost_spec;
  double noise_k = 0.0;

  void attach(CLI::App* cmd) {
    cmd->add_option("model", path, "model file (text format or strana-model-v1 JSON)")
        ->required();
    cmd->add_option("--cost", cost_spec,
                    "cost table overrides, e.g. add=1,mul=5,div=10,trig=100,integ=100,diff=200");
    cmd->add_option("--noise-k", noise_k,
                    "noise surcharge factor: weight += round(k * noise_variance)");
  }

  StructuralModel load() const {
    ParseOptions opt;
    opt.noise_k = noise_k;
    if (!cost_spec.empty()) {
      size_t i = 0;
      while (i <= cost_spec.size()) {
        size_t j = cost_spec.find(',', i);
        if (j == std::string::npos) j = cost_spec.size();
        std::string item = cost_spec.substr(i, j - i);
        size_t eq = item.find('=');
        if (eq == std::string::npos) throw ModelError("bad --cost item '" + item + "'");
        auto kind = op_kind_from_string(item.substr(0, eq));
        if (!kind) throw ModelError("unknown --cost operation '" + item.substr(0, eq) + "'");
        Cost value = std::stoll(item.substr(eq + 1));
        switch (*kind) {
          case OpKind::add_sub: opt.cost_table.add_sub = value; break;
          case OpKind::mul: opt.cost_table.mul = value; break;
          case OpKind::div: opt.cost_table.div = value; break;
          case OpKind::trig_pow_root: opt.cost_table.trig_pow_root = value; break;
          case OpKind::integration: opt.cost_table.integration = value; break;
          case OpKind::differentiation: opt.cost_table.differentiation = value; break;
        }
        i = j + 1;
      }
    }
    std::string text = slurp(path);
    size_t first = text.find_first_not_of(" \t\r\n");
    if (first != std::string::npos && text[first] == '{')
      return model_from_json(nlohmann::json::parse(text));
    return parse_model(text, opt);
  }
};

ToolSet parse_tools_or_throw(const std::string& spec) {
  auto t = tools_from_string(spec);
  if (!t)
    throw ModelError("bad --tools value '" + spec +
                     "' (expected all|none|differentiator|integrator|linear-solver|"
                     "nonlinear-solver|de-solver, comma separated)");
  return *t;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"structural analysis for fault detection: DM decomposition, weighted "
               "matchings, MSO enumeration and minimum-cost residual selection"};
  app.require_subcommand(1);
  std::function<int()> action;

  // --- export ---------------------------------------------------------------
  auto* cmd_export = app.add_subcommand("export", "validate a model and print its "
                                                  "canonical form");
  auto export_args = std::make_shared<ModelArgs>();
  export_args->attach(cmd_export);
  auto export_json = std::make_shared<bool>(false);
  auto export_out = std::make_shared<std::string>();
  cmd_export->add_flag("--json", *export_json, "emit strana-model-v1 JSON instead of text");
  cmd_export->add_option("-o,--output", *export_out, "write to a file instead of stdout");
  cmd_export->callback([=, &action] {
    action = [=] {
      auto m = export_args->load();
      emit(*export_json ? model_to_json(m).dump(2) + "\n" : serialize_model(m),
           *export_out);
      return 0;
    };
  });

  // --- dm -------------------------------------------------------------------
  auto* cmd_dm = app.add_subcommand("dm", "Dulmage-Mendelsohn decomposition: part sizes, "
                                          "memberships, Hall blocks");
  auto dm_args = std::make_shared<ModelArgs>();
  dm_args->attach(cmd_dm);
  auto dm_csv = std::make_shared<std::string>();
  auto dm_out = std::make_shared<std::string>();
  cmd_dm->add_option("--csv", *dm_csv, "also write the permuted block-triangular "
                                       "biadjacency as CSV");
  cmd_dm->add_option("-o,--output", *dm_out, "write to a file instead of stdout");
  cmd_dm->callback([=, &action] {
    action = [=] {
      auto m = dm_args->load();
      auto rep = dm_report(m);
      emit(rep.summary.dump(2) + "\n", *dm_out);
      if (!dm_csv->empty()) emit(rep.permuted_csv, *dm_csv);
      return 0;
    };
  });

  // --- match ----------------------------------------------------------------
  auto* cmd_match = app.add_subcommand("match", "run one matching engine on the model");
  auto match_args = std::make_shared<ModelArgs>();
  match_args->attach(cmd_match);
  auto match_algo = std::make_shared<std::string>("ranking");
  auto match_causality = std::make_shared<std::string>("mixed");
  auto match_out = std::make_shared<std::string>();
  cmd_match->add_option("--algorithm", *match_algo, "ranking|weighted-elimination|hungarian")
      ->required();
  cmd_match->add_option("--causality", *match_causality, "differential|integral|mixed");
  cmd_match->add_option("-o,--output", *match_out, "write to a file instead of stdout");
  cmd_match->callback([=, &action] {
    action = [=] {
      auto algo = match_algorithm_from_string(*match_algo);
      if (!algo) throw ModelError("unknown --algorithm '" + *match_algo + "'");
      auto causality = causality_from_string(*match_causality);
      if (!causality) throw ModelError("unknown --causality '" + *match_causality + "'");
      auto m = match_args->load();
      emit(match_report(m, *algo, *causality).dump(2) + "\n", *match_out);
      return 0;
    };
  });

  // --- check ----------------------------------------------------------------
  auto* cmd_check = app.add_subcommand("check", "calculability verdict for a matching "
                                                "under a tool set");
  auto check_args = std::make_shared<ModelArgs>();
  check_args->attach(cmd_check);
  auto check_matching = std::make_shared<std::string>();
  auto check_tools = std::make_shared<std::string>("all");
  auto check_out = std::make_shared<std::string>();
  cmd_check->add_option("--matching", *check_matching,
                        "matching JSON (strana-match-v1 or any {pairs:[...]})")
      ->required();
  cmd_check->add_option("--tools", *check_tools, "available solver tools");
  cmd_check->add_option("-o,--output", *check_out, "write to a file instead of stdout");
  cmd_check->callback([=, &action] {
    action = [=] {
      auto m = check_args->load();
      auto matching = nlohmann::json::parse(slurp(*check_matching));
      emit(check_report(m, matching, parse_tools_or_throw(*check_tools)).dump(2) + "\n",
           *check_out);
      return 0;
    };
  });

  // --- msos -----------------------------------------------------------------
  auto* cmd_msos = app.add_subcommand("msos", "enumerate MSO sets of the post-elimination "
                                              "over-constrained remainder");
  auto msos_args = std::make_shared<ModelArgs>();
  msos_args->attach(cmd_msos);
  auto msos_faultable = std::make_shared<bool>(false);
  auto msos_cap = std::make_shared<std::int64_t>(1'000'000);
  auto msos_jobs = std::make_shared<int>(1);
  auto msos_out = std::make_shared<std::string>();
  cmd_msos->add_flag("--faultable-only", *msos_faultable,
                     "keep only MSOs containing a faultable constraint");
  cmd_msos->add_option("--mso-cap", *msos_cap, "abort if more MSOs than this exist");
  cmd_msos->add_option("--jobs", *msos_jobs, "parallel search branches");
  cmd_msos->add_option("-o,--output", *msos_out, "write to a file instead of stdout");
  cmd_msos->callback([=, &action] {
    action = [=] {
      auto model = msos_args->load();
      PipelineConfig cfg;
      cfg.mso_cap = *msos_cap;
      cfg.jobs = *msos_jobs;
      cfg.faultable_only = *msos_faultable;
      auto st = run_stages(model, cfg);
      if (st.cap_exceeded) {
        std::cerr << "error: MSO enumeration exceeded the cap of " << *msos_cap << "\n";
        return static_cast<int>(kExitBudget);
      }
      const auto& list = *msos_faultable ? st.msos : st.msos_all;
      nlohmann::json j;
      j["schema"] = "strana-msos-v1";
      j["count"] = list.size();
      j["faultable_only"] = *msos_faultable;
      nlohmann::json arr = nlohmann::json::array();
      for (const auto& mso : list) {
        nlohmann::json cs = nlohmann::json::array();
        for (int c : mso.constraints) cs.push_back(model.constraint(c).id);
        nlohmann::json vs = nlohmann::json::array();
        for (int v : mso.variables) vs.push_back(model.variable(v).id);
        arr.push_back({{"constraints", std::move(cs)}, {"variables", std::move(vs)}});
      }
      j["msos"] = std::move(arr);
      emit(j.dump(2) + "\n", *msos_out);
      return 0;
    };
  });

  // --- residuals / pipeline ---------------------------------------------------
  auto add_pipeline_cmd = [&](const char* name, const char* help) {
    auto* cmd = app.add_subcommand(name, help);
    auto args = std::make_shared<ModelArgs>();
    args->attach(cmd);
    auto target = std::make_shared<std::string>("detectability");
    auto tools = std::make_shared<std::string>("all");
    auto causality = std::make_shared<std::string>("differential");
    auto budget = std::make_shared<std::int64_t>(-1);
    auto cap = std::make_shared<std::int64_t>(1'000'000);
    auto jobs = std::make_shared<int>(1);
    auto all_msos = std::make_shared<bool>(false);
    auto csv = std::make_shared<std::string>();
    auto out = std::make_shared<std::string>();
    cmd->add_option("--target", *target, "detectability|isolability");
    cmd->add_option("--tools", *tools, "available solver tools (comma list, all, none)");
    cmd->add_option("--causality", *causality,
                    "causality for the a-priori matching step");
    cmd->add_option("--budget", *budget,
                    "Murty matchings per candidate (-1: |C|-1 default, 0: unlimited)");
    cmd->add_option("--mso-cap", *cap, "abort if more MSOs than this exist");
    cmd->add_option("--jobs", *jobs, "worker threads for MSO and residual search");
    cmd->add_flag("--all-msos", *all_msos, "do not filter MSOs by fault content");
    cmd->add_option("--csv", *csv, "write the fault signature matrix CSV here");
    cmd->add_option("-o,--output", *out, "write the JSON artifact to a file");
    cmd->callback([=, &action] {
      action = [=] {
        auto model = args->load();
        PipelineConfig cfg;
        if (*target == "isolability") cfg.target = SelectionTarget::isolability;
        else if (*target != "detectability")
          throw ModelError("unknown --target '" + *target + "'");
        cfg.tools = parse_tools_or_throw(*tools);
        auto c = causality_from_string(*causality);
        if (!c) throw ModelError("unknown --causality '" + *causality + "'");
        cfg.causality = *c;
        cfg.murty_budget = *budget;
        cfg.mso_cap = *cap;
        cfg.jobs = *jobs;
        cfg.faultable_only = !*all_msos;
        auto result = run_pipeline(model, cfg);
        for (const auto& d : result.diagnostics) std::cerr << d << "\n";
        emit(result.summary.dump(2) + "\n", *out);
        if (!csv->empty()) emit(result.signature_csv, *csv);
        return result.exit_code;
      };
    });
  };
  add_pipeline_cmd("residuals", "select minimum-cost residual generators for the target");
  add_pipeline_cmd("pipeline", "full pipeline: dm, elimination, MSOs, residual selection");

  // --- dot --------------------------------------------------------------------
  auto* cmd_dot = app.add_subcommand("dot", "Graphviz export of the structural graph");
  auto dot_args = std::make_shared<ModelArgs>();
  dot_args->attach(cmd_dot);
  auto dot_matching = std::make_shared<std::string>();
  auto dot_directed = std::make_shared<bool>(false);
  auto dot_out = std::make_shared<std::string>();
  cmd_dot->add_option("--matching", *dot_matching, "matching JSON to highlight/orient");
  cmd_dot->add_flag("--directed", *dot_directed,
                    "emit the oriented evaluation graph (needs --matching)");
  cmd_dot->add_option("-o,--output", *dot_out, "write to a file instead of stdout");
  cmd_dot->callback([=, &action] {
    action = [=] {
      auto model = dot_args->load();
      auto g = BipartiteGraph::from_model(model);
      Matching m;
      bool have_matching = !dot_matching->empty();
      if (have_matching) {
        auto mj = nlohmann::json::parse(slurp(*dot_matching));
        std::vector<int> local;
        for (const auto& jp : mj.at("pairs")) {
          int c = model.constraint_index(jp.at("constraint").get<std::string>());
          int v = model.variable_index(jp.at("variable").get<std::string>());
          int e = (c >= 0 && v >= 0) ? g.find_edge(c, v) : -1;
          if (e < 0) throw ModelError("matching pair is not an edge of the model");
          local.push_back(e);
        }
        m = Matching::from_local_edges(g, local);
      }
      if (*dot_directed) {
        if (!have_matching) throw ModelError("--directed requires --matching");
        emit(to_dot(orient(g, m), g, model), *dot_out);
      } else {
        emit(to_dot(g, model, have_matching ? &m : nullptr), *dot_out);
      }
      return 0;
    };
  });

  // --- generate -----------------------------------------------------------------
  auto* cmd_gen = app.add_subcommand("generate", "deterministic random model from a seed");
  auto gen_seed = std::make_shared<std::uint64_t>(0);
  auto gen_opt = std::make_shared<GenerateOptions>();
  auto gen_out = std::make_shared<std::string>();
  cmd_gen->add_option("--seed", *gen_seed, "PRNG seed")->required();
  cmd_gen->add_option("--constraints", gen_opt->constraints, "algebraic constraint count");
  cmd_gen->add_option("--unknowns", gen_opt->unknowns, "unknown variable count");
  cmd_gen->add_option("--knowns", gen_opt->knowns, "known variable count");
  cmd_gen->add_option("--differential", gen_opt->differential_pairs,
                      "differentiation constraint count");
  cmd_gen->add_option("--extra-edge-prob", gen_opt->extra_edge_prob, "extra edge chance");
  cmd_gen->add_option("--faultable-frac", gen_opt->faultable_frac, "faultable fraction");
  cmd_gen->add_option("--unsolvable-prob", gen_opt->unsolvable_prob,
                      "non-invertible edge chance");
  cmd_gen->add_option("--max-weight", gen_opt->max_weight, "max random edge weight");
  cmd_gen->add_option("--noise-prob", gen_opt->noise_prob, "sensor noise chance");
  cmd_gen->add_option("-o,--output", *gen_out, "write to a file instead of stdout");
  cmd_gen->callback([=, &action] {
    action = [=] {
      emit(serialize_model(generate_model(*gen_seed, *gen_opt)), *gen_out);
      return 0;
    };
  });

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    int code = app.exit(e);
    return code == 0 ? 0 : strana::kExitUsage;
  } catch (const strana::ModelError& e) {
    std::cerr << "model error: " << e.what() << "\n";
    return strana::kExitModelError;
  } catch (const strana::MsoCapExceeded& e) {
    std::cerr << "error: " << e.what() << "\n";
    return strana::kExitBudget;
  } catch (const nlohmann::json::exception& e) {
    std::cerr << "error: malformed JSON input: " << e.what() << "\n";
    return strana::kExitModelError;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return strana::kExitModelError;
  }

  try {
    return action ? action() : strana::kExitUsage;
  } catch (const strana::ModelError& e) {
    std::cerr << "model error: " << e.what() << "\n";
    return strana::kExitModelError;
  } catch (const strana::MsoCapExceeded& e) {
    std::cerr << "error: " << e.what() << "\n";
    return strana::kExitBudget;
  } catch (const nlohmann::json::exception& e) {
    std::cerr << "error: malformed JSON input: " << e.what() << "\n";
    return strana::kExitModelError;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return strana::kExitModelError;
  }
}
