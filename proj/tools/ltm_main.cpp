// Command line front end: generate synthetic models, learn latent trees from
// samples (or analytic moments), and score learned structures.
//
// Exit codes: 0 ok, 1 I/O or configuration error, 2 disconnected distance
// graph, 3 local recursive grouping did not converge.

#include <filesystem>
#include <iostream>
#include <memory>
#include <optional>
#include <sstream>
#include <string>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "ltm/eval.hpp"
#include "ltm/exact.hpp"
#include "ltm/io.hpp"
#include "ltm/model.hpp"
#include "ltm/pipeline.hpp"
#include "ltm/sampling.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

struct CommonFlags {
  int k = 2;
  std::string svd = "exact";
  double alpha = 3.0;
  std::string epsilon = "auto";
  int restarts = 50;
  int iters = 100;
  double tol = 1e-8;
  int threads = 0;
  std::uint64_t seed = 0;
  std::string out_dir = ".";
};

void add_common(CLI::App* cmd, CommonFlags& f) {
  cmd->add_option("--k", f.k, "Hidden state dimension");
  cmd->add_option("--svd", f.svd, "SVD mode: exact|randomized")
      ->check(CLI::IsMember({"exact", "randomized"}));
  cmd->add_option("--alpha", f.alpha, "Randomized sketch width factor");
  cmd->add_option("--epsilon", f.epsilon, "Grouping tolerance (float or 'auto')");
  cmd->add_option("--restarts", f.restarts, "Tensor power method restarts");
  cmd->add_option("--iters", f.iters, "Tensor power method iterations");
  cmd->add_option("--tol", f.tol, "Tensor power method tolerance");
  cmd->add_option("--threads", f.threads, "Worker cap (0 = all cores)");
  cmd->add_option("--seed", f.seed, "Random seed");
  cmd->add_option("--out", f.out_dir, "Output directory");
}

ltm::RunConfig to_config(const CommonFlags& f, const std::string& family) {
  ltm::RunConfig cfg;
  cfg.k = f.k;
  cfg.svd_mode = f.svd == "randomized" ? ltm::SvdMode::randomized : ltm::SvdMode::exact;
  cfg.alpha = f.alpha;
  if (f.epsilon != "auto") cfg.epsilon = std::stod(f.epsilon);
  cfg.tensor_restarts = f.restarts;
  cfg.tensor_iterations = f.iters;
  cfg.tensor_tolerance = f.tol;
  cfg.threads = f.threads;
  cfg.seed = f.seed;
  cfg.family = family == "gaussian" ? ltm::ObservationFamily::gaussian
                                    : ltm::ObservationFamily::categorical;
  return cfg;
}

int run_gen(const CommonFlags& flags, int p, const std::string& dims_arg,
            const std::string& topology, int max_degree,
            const std::string& family, double sigma, long n_samples) {
  ltm::GeneratorOptions gopt;
  if (topology == "balanced")
    gopt.topology = ltm::Topology::balanced;
  else if (topology == "caterpillar")
    gopt.topology = ltm::Topology::caterpillar;
  else
    gopt.topology = ltm::Topology::random_degree;
  gopt.max_degree = max_degree;
  gopt.family = family == "gaussian" ? ltm::ObservationFamily::gaussian
                                     : ltm::ObservationFamily::categorical;
  gopt.noise_sigma = sigma;

  std::vector<int> dims;
  if (dims_arg.find(',') == std::string::npos) {
    dims.assign(p, std::stoi(dims_arg));
  } else {
    std::istringstream ds(dims_arg);
    std::string field;
    while (std::getline(ds, field, ',')) dims.push_back(std::stoi(field));
  }

  ltm::GroundTruthModel model =
      ltm::random_latent_tree(p, flags.k, dims, gopt, flags.seed);

  fs::create_directories(flags.out_dir);
  json meta = ltm::ground_truth_meta(model);
  meta["config"] = to_config(flags, family).to_json();
  const std::string model_path = (fs::path(flags.out_dir) / "model.json").string();
  ltm::write_json_file(model_path, ltm::model_to_json(model.tree, meta));

  json summary;
  summary["model"] = model_path;
  if (n_samples > 0) {
    ltm::SampleSet samples = ltm::sample_model(model, n_samples, flags.seed + 1);
    const std::string samples_path =
        (fs::path(flags.out_dir) / "samples.csv").string();
    ltm::write_samples(samples_path, samples, meta);
    summary["samples"] = samples_path;
    summary["n"] = n_samples;
  }
  summary["p"] = p;
  summary["k"] = flags.k;
  summary["hidden_count"] = model.tree.hidden_count();
  std::cout << summary.dump() << std::endl;
  return 0;
}

int run_learn(const CommonFlags& flags, const std::string& samples_path,
              const std::string& exact_model_path, const std::string& family,
              const std::string& group_map_path, const std::string& hidden_dist,
              bool boruvka, bool dump_distances, bool dump_groups) {
  ltm::RunConfig cfg = to_config(flags, family);
  cfg.boruvka_mst = boruvka;
  cfg.hidden_dist = hidden_dist == "moments" ? ltm::HiddenDistanceMode::moments
                    : hidden_dist == "posterior"
                        ? ltm::HiddenDistanceMode::posterior
                        : ltm::HiddenDistanceMode::metric;

  std::optional<ltm::GroundTruthModel> exact_model;
  std::optional<ltm::SampleSet> samples;
  std::unique_ptr<ltm::MomentSource> moments;

  if (!exact_model_path.empty()) {
    exact_model = ltm::ground_truth_from_json(ltm::read_json_file(exact_model_path));
    moments = std::make_unique<ltm::ModelMoments>(*exact_model);
  } else {
    std::optional<ltm::GroupMap> gm;
    if (!group_map_path.empty()) gm = ltm::read_group_map(group_map_path);
    samples = ltm::read_samples(samples_path, gm ? &*gm : nullptr);
    auto issues = samples->validate();
    for (const auto& s : issues) std::cerr << "warning: " << s << "\n";
    moments = std::make_unique<ltm::SampleMoments>(*samples);
  }

  ltm::LearnOutput out =
      ltm::learn(*moments, cfg, samples ? &*samples : nullptr);

  fs::create_directories(flags.out_dir);
  json meta;
  meta["config"] = cfg.to_json();
  meta["version"] = ltm::version_string();
  const fs::path dir(flags.out_dir);
  ltm::write_json_file((dir / "tree.json").string(),
                       ltm::model_to_json(out.tree, meta));
  const std::string comment = "config " + cfg.to_json().dump();
  ltm::write_text_file((dir / "tree.dot").string(),
                       ltm::tree_to_dot(out.tree, &out.edge_length, comment));
  ltm::write_text_file((dir / "tree.newick").string(),
                       ltm::tree_to_newick(out.tree, comment));
  json report = out.report(cfg);
  report["outputs"] = {{"tree", (dir / "tree.json").string()},
                       {"dot", (dir / "tree.dot").string()},
                       {"newick", (dir / "tree.newick").string()}};
  ltm::write_json_file((dir / "report.json").string(), report);
  if (dump_distances) {
    ltm::write_text_file((dir / "distances.csv").string(),
                         ltm::distances_to_csv(out.distances.d));
  }
  if (dump_groups) {
    json groups = json::array();
    for (const auto& s : out.subtrees) groups.push_back(json::parse(s.to_json()));
    ltm::write_json_file((dir / "groups.json").string(), groups);
  }
  for (const auto& w : out.warnings) std::cerr << "warning: " << w << "\n";
  std::cout << report.dump() << std::endl;
  return 0;
}

int run_eval(const std::string& tree1, const std::string& tree2) {
  ltm::LatentTree a = ltm::model_from_json(ltm::read_json_file(tree1));
  ltm::LatentTree b = ltm::model_from_json(ltm::read_json_file(tree2));
  const double rf = ltm::robinson_foulds(a, b);
  json out;
  out["rf"] = rf;
  out["param_max_err"] = nullptr;
  if (rf == 0.0 && a.fully_parameterized() && b.fully_parameterized()) {
    try {
      ltm::ParameterError pe = ltm::parameter_error(a, b);
      out["param_max_err"] = pe.max_column_l2;
      out["prior_err"] = pe.prior_linf;
    } catch (const std::exception& e) {
      std::cerr << "warning: parameter comparison failed: " << e.what() << "\n";
    }
  }
  std::cout << out.dump() << std::endl;
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Latent tree structure and parameter learning"};
  app.require_subcommand(1);

  CommonFlags gen_flags, learn_flags;

  // gen
  auto* gen = app.add_subcommand("gen", "Generate a synthetic model (+ samples)");
  int gen_p = 10;
  std::string gen_dims = "2";
  std::string gen_topology = "random";
  int gen_max_degree = 4;
  std::string gen_family = "discrete";
  double gen_sigma = 0.2;
  long gen_n = 0;
  gen->add_option("--p", gen_p, "Observed variable count")->required();
  gen->add_option("--dims", gen_dims, "Observed dimension (int or comma list)");
  gen->add_option("--topology", gen_topology,
                  "balanced|caterpillar|random")
      ->check(CLI::IsMember({"balanced", "caterpillar", "random"}));
  gen->add_option("--max-degree", gen_max_degree, "Degree cap (random topology)");
  gen->add_option("--family", gen_family, "discrete|gaussian")
      ->check(CLI::IsMember({"discrete", "gaussian"}));
  gen->add_option("--sigma", gen_sigma, "Gaussian observation noise");
  gen->add_option("--n", gen_n, "Samples to draw (omit for model only)");
  add_common(gen, gen_flags);

  // learn
  auto* learn = app.add_subcommand("learn", "Learn a latent tree from samples");
  std::string learn_samples, learn_exact, learn_family = "discrete";
  std::string learn_group_map, learn_hidden_dist = "metric";
  bool learn_boruvka = false, learn_dump_d = false, learn_dump_g = false;
  learn->add_option("samples", learn_samples, "Samples file (header + CSV)");
  learn->add_option("--exact-from-model", learn_exact,
                    "Learn from the analytic moments of a model JSON");
  learn->add_option("--family", learn_family, "discrete|gaussian")
      ->check(CLI::IsMember({"discrete", "gaussian"}));
  learn->add_option("--group-map", learn_group_map,
                    "CSV raw_feature_id,variable_id,coord");
  learn->add_option("--hidden-dist", learn_hidden_dist,
                    "metric|moments|posterior")
      ->check(CLI::IsMember({"metric", "moments", "posterior"}));
  learn->add_flag("--boruvka", learn_boruvka, "Parallel-style Boruvka MST");
  learn->add_flag("--dump-distances", learn_dump_d, "Write distances.csv");
  learn->add_flag("--dump-groups", learn_dump_g, "Write groups.json");
  add_common(learn, learn_flags);

  // eval
  auto* eval = app.add_subcommand("eval", "Robinson-Foulds + parameter error");
  std::string eval_t1, eval_t2;
  eval->add_option("tree1", eval_t1, "Model/tree JSON")->required();
  eval->add_option("tree2", eval_t2, "Model/tree JSON")->required();

  CLI11_PARSE(app, argc, argv);

  try {
    if (gen->parsed())
      return run_gen(gen_flags, gen_p, gen_dims, gen_topology, gen_max_degree,
                     gen_family, gen_sigma, gen_n);
    if (learn->parsed()) {
      if (learn_samples.empty() && learn_exact.empty()) {
        std::cerr << "error: learn needs a samples file or --exact-from-model\n";
        return 1;
      }
      return run_learn(learn_flags, learn_samples, learn_exact, learn_family,
                       learn_group_map, learn_hidden_dist, learn_boruvka,
                       learn_dump_d, learn_dump_g);
    }
    if (eval->parsed()) return run_eval(eval_t1, eval_t2);
  } catch (const ltm::disconnected_error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const ltm::convergence_error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 3;
  } catch (const ltm::io_error& e) {
    std::cerr << "error: " << e.what();
    if (e.line > 0) std::cerr << " (line " << e.line << ")";
    std::cerr << "\n";
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 1;
}
