#include "ltm/io.hpp"

#include <fstream>
#include <functional>
#include <limits>
#include <map>
#include <sstream>

#include <nlohmann/json.hpp>

#include "ltm/common.hpp"

namespace ltm {

using nlohmann::json;

std::string version_string() {
#ifdef LTM_VERSION_STRING
  return LTM_VERSION_STRING;
#else
  return "0.0.0+unknown";
#endif
}

nlohmann::json model_to_json(const LatentTree& tree, const json& meta) {
  json j;
  j["k"] = tree.hidden_dim();
  json nodes = json::array();
  for (int v = 0; v < tree.node_count(); ++v) {
    nodes.push_back({{"id", v},
                     {"kind", tree.is_hidden(v) ? "hid" : "obs"},
                     {"dim", tree.dim(v)}});
  }
  j["nodes"] = std::move(nodes);
  json edges = json::array();
  for (auto [a, b] : tree.edges()) edges.push_back({a, b});
  j["edges"] = std::move(edges);

  json params = json::object();
  for (auto [a, b] : tree.edges()) {
    for (auto [child, parent] : {std::pair{a, b}, std::pair{b, a}}) {
      const Matrix* m = tree.transition(child, parent);
      if (!m) continue;
      json rows = json::array();
      for (int r = 0; r < m->rows(); ++r) {
        json row = json::array();
        for (int c = 0; c < m->cols(); ++c) row.push_back((*m)(r, c));
        rows.push_back(std::move(row));
      }
      params[std::to_string(child) + "-" + std::to_string(parent)] =
          std::move(rows);
    }
  }
  j["params"] = std::move(params);

  json priors = json::object();
  for (int h = tree.observed_count(); h < tree.node_count(); ++h) {
    if (const Vector* pi = tree.prior(h)) {
      json v = json::array();
      for (int i = 0; i < pi->size(); ++i) v.push_back((*pi)(i));
      priors[std::to_string(h)] = std::move(v);
    }
  }
  j["priors"] = std::move(priors);
  j["meta"] = meta;
  return j;
}

LatentTree model_from_json(const json& j) {
  const int k = j.at("k").get<int>();
  std::vector<int> dims;
  int hidden = 0;
  for (const auto& n : j.at("nodes")) {
    if (n.at("kind").get<std::string>() == "obs") {
      int id = n.at("id").get<int>();
      if (id != static_cast<int>(dims.size()))
        throw io_error("model json: observed ids must be dense and ordered");
      dims.push_back(n.at("dim").get<int>());
    } else {
      ++hidden;
    }
  }
  LatentTree tree(dims, k);
  for (int i = 0; i < hidden; ++i) tree.add_hidden();
  for (const auto& e : j.at("edges"))
    tree.add_edge(e.at(0).get<int>(), e.at(1).get<int>());
  if (j.contains("params")) {
    for (auto& [key, rows] : j.at("params").items()) {
      auto dash = key.find('-');
      if (dash == std::string::npos) throw io_error("model json: bad param key");
      int child = std::stoi(key.substr(0, dash));
      int parent = std::stoi(key.substr(dash + 1));
      Matrix m(rows.size(), rows.at(0).size());
      for (int r = 0; r < m.rows(); ++r)
        for (int c = 0; c < m.cols(); ++c)
          m(r, c) = rows.at(r).at(c).get<double>();
      tree.set_transition(child, parent, std::move(m));
    }
  }
  if (j.contains("priors")) {
    for (auto& [key, vals] : j.at("priors").items()) {
      Vector pi(vals.size());
      for (int i = 0; i < pi.size(); ++i) pi(i) = vals.at(i).get<double>();
      tree.set_prior(std::stoi(key), std::move(pi));
    }
  }
  return tree;
}

nlohmann::json ground_truth_meta(const GroundTruthModel& model) {
  json meta;
  meta["root"] = model.root;
  meta["family"] =
      model.family == ObservationFamily::categorical ? "categorical" : "gaussian";
  meta["noise_sigma"] = model.noise_sigma;
  meta["seed"] = model.seed;
  meta["version"] = version_string();
  return meta;
}

GroundTruthModel ground_truth_from_json(const json& j) {
  GroundTruthModel model;
  model.tree = model_from_json(j);
  const json& meta = j.at("meta");
  model.root = meta.value("root", model.tree.observed_count());
  model.family = meta.value("family", std::string("categorical")) == "gaussian"
                     ? ObservationFamily::gaussian
                     : ObservationFamily::categorical;
  model.noise_sigma = meta.value("noise_sigma", 0.0);
  model.seed = meta.value("seed", std::uint64_t{0});
  return model;
}

void write_json_file(const std::string& path, const json& j) {
  std::ofstream out(path);
  if (!out) throw io_error("cannot open for writing: " + path);
  out << j.dump(2) << "\n";
}

json read_json_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw io_error("cannot open: " + path);
  json j;
  try {
    in >> j;
  } catch (const json::parse_error& e) {
    throw io_error("json parse error in " + path + ": " + e.what());
  }
  return j;
}

void write_samples(const std::string& path, const SampleSet& samples,
                   const json& meta) {
  std::ofstream out(path);
  if (!out) throw io_error("cannot open for writing: " + path);
  out.precision(std::numeric_limits<double>::max_digits10);
  json header;
  header["format"] = samples.is_sparse() ? "sparse" : "dense";
  header["p"] = samples.variable_count();
  json dims = json::array();
  for (int v = 0; v < samples.variable_count(); ++v) dims.push_back(samples.dim(v));
  header["dims"] = std::move(dims);
  header["n"] = samples.sample_count();
  header["meta"] = meta;
  out << header.dump() << "\n";
  if (samples.is_sparse()) {
    for (int v = 0; v < samples.variable_count(); ++v) {
      const auto& s = samples.sparse_var(v);
      for (int c = 0; c < s.outerSize(); ++c)
        for (SampleSet::Sparse::InnerIterator it(s, c); it; ++it)
          out << it.col() << "," << v << "," << it.row() << "," << it.value()
              << "\n";
    }
  } else {
    for (long s = 0; s < samples.sample_count(); ++s) {
      out << s;
      for (int v = 0; v < samples.variable_count(); ++v) {
        const Matrix& m = samples.dense_var(v);
        for (int r = 0; r < m.rows(); ++r) out << "," << m(r, s);
      }
      out << "\n";
    }
  }
}

GroupMap read_group_map(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw io_error("cannot open group map: " + path);
  GroupMap gm;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty() || line[0] == '#') continue;
    std::istringstream ls(line);
    std::string f0, f1, f2;
    if (!std::getline(ls, f0, ',') || !std::getline(ls, f1, ',') ||
        !std::getline(ls, f2, ','))
      throw io_error("group map: expected raw_id,variable,coord", line_no);
    try {
      int raw = std::stoi(f0), var = std::stoi(f1), coord = std::stoi(f2);
      if (raw < 0 || var < 0 || coord < 0) throw std::invalid_argument("neg");
      if (raw >= static_cast<int>(gm.variable.size())) {
        gm.variable.resize(raw + 1, -1);
        gm.coord.resize(raw + 1, -1);
      }
      gm.variable[raw] = var;
      gm.coord[raw] = coord;
      gm.p = std::max(gm.p, var + 1);
      if (var >= static_cast<int>(gm.dims.size())) gm.dims.resize(var + 1, 0);
      gm.dims[var] = std::max(gm.dims[var], coord + 1);
    } catch (const std::exception&) {
      throw io_error("group map: malformed integer", line_no);
    }
  }
  if (gm.p == 0) throw io_error("group map: empty");
  return gm;
}

namespace {

std::vector<std::string> split_csv(const std::string& line) {
  std::vector<std::string> out;
  std::istringstream ls(line);
  std::string field;
  while (std::getline(ls, field, ',')) out.push_back(field);
  return out;
}

}  // namespace

SampleSet read_samples(const std::string& path, const GroupMap* group_map) {
  std::ifstream in(path);
  if (!in) throw io_error("cannot open: " + path);
  std::string line;
  if (!std::getline(in, line)) throw io_error("empty samples file", 1);
  json header;
  try {
    header = json::parse(line);
  } catch (const json::parse_error&) {
    throw io_error("samples: first line must be a JSON header", 1);
  }
  const std::string format = header.value("format", "sparse");
  long n = header.at("n").get<long>();
  std::vector<int> dims;
  int p;
  if (group_map) {
    p = group_map->p;
    dims = group_map->dims;
  } else {
    p = header.at("p").get<int>();
    dims = header.at("dims").get<std::vector<int>>();
  }
  if (static_cast<int>(dims.size()) != p)
    throw io_error("samples: dims/p mismatch", 1);

  std::size_t line_no = 1;
  if (format == "sparse") {
    std::vector<std::vector<Eigen::Triplet<double>>> trips(p);
    while (std::getline(in, line)) {
      ++line_no;
      if (line.empty()) continue;
      auto f = split_csv(line);
      try {
        if (group_map) {
          if (f.size() != 3)
            throw io_error("samples: expected sample_id,raw_id,value", line_no);
          long s = std::stol(f[0]);
          int raw = std::stoi(f[1]);
          double val = std::stod(f[2]);
          if (raw < 0 || raw >= static_cast<int>(group_map->variable.size()) ||
              group_map->variable[raw] < 0)
            throw io_error("samples: raw feature not in group map", line_no);
          int var = group_map->variable[raw];
          int coord = group_map->coord[raw];
          if (s < 0 || s >= n) throw io_error("samples: sample id out of range", line_no);
          trips[var].emplace_back(coord, s, val);
        } else {
          if (f.size() != 4)
            throw io_error("samples: expected sample_id,var_id,coord,value",
                           line_no);
          long s = std::stol(f[0]);
          int var = std::stoi(f[1]);
          int coord = std::stoi(f[2]);
          double val = std::stod(f[3]);
          if (var < 0 || var >= p) throw io_error("samples: var out of range", line_no);
          if (coord < 0 || coord >= dims[var])
            throw io_error("samples: coord out of range", line_no);
          if (s < 0 || s >= n) throw io_error("samples: sample id out of range", line_no);
          trips[var].emplace_back(coord, s, val);
        }
      } catch (const io_error&) {
        throw;
      } catch (const std::exception&) {
        throw io_error("samples: malformed row", line_no);
      }
    }
    SampleSet out = SampleSet::sparse(dims, n);
    for (int v = 0; v < p; ++v) {
      out.sparse_var(v).setFromTriplets(trips[v].begin(), trips[v].end());
      out.sparse_var(v).makeCompressed();
    }
    return out;
  }

  if (format != "dense") throw io_error("samples: unknown format " + format, 1);
  SampleSet out = SampleSet::dense(dims, n);
  int total = 0;
  for (int d : dims) total += d;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    auto f = split_csv(line);
    if (static_cast<int>(f.size()) != total + 1)
      throw io_error("samples: dense row has wrong field count", line_no);
    try {
      long s = std::stol(f[0]);
      if (s < 0 || s >= n) throw io_error("samples: sample id out of range", line_no);
      int idx = 1;
      for (int v = 0; v < p; ++v)
        for (int r = 0; r < dims[v]; ++r)
          out.dense_var(v)(r, s) = std::stod(f[idx++]);
    } catch (const io_error&) {
      throw;
    } catch (const std::exception&) {
      throw io_error("samples: malformed number", line_no);
    }
  }
  return out;
}

std::string tree_to_dot(const LatentTree& tree,
                        const std::map<std::pair<int, int>, double>* lengths,
                        const std::string& comment) {
  std::ostringstream os;
  os.precision(6);
  os << "// " << comment << "\n";
  os << "graph latent_tree {\n";
  for (int v = 0; v < tree.node_count(); ++v) {
    if (tree.is_hidden(v))
      os << "  h" << v << " [shape=ellipse,style=dashed];\n";
    else
      os << "  v" << v << " [shape=box];\n";
  }
  auto name = [&](int v) {
    return std::string(tree.is_hidden(v) ? "h" : "v") + std::to_string(v);
  };
  for (auto [a, b] : tree.edges()) {
    os << "  " << name(a) << " -- " << name(b);
    if (lengths) {
      auto it = lengths->find({a, b});
      if (it != lengths->end()) os << " [label=\"" << it->second << "\"]";
    }
    os << ";\n";
  }
  os << "}\n";
  return os.str();
}

std::string tree_to_newick(const LatentTree& tree, const std::string& comment) {
  const int root =
      tree.hidden_count() > 0 ? tree.observed_count() : 0;
  std::ostringstream os;
  std::function<void(int, int)> emit = [&](int v, int from) {
    std::vector<int> children;
    for (int u : tree.neighbors(v))
      if (u != from) children.push_back(u);
    if (!children.empty()) {
      os << "(";
      for (std::size_t i = 0; i < children.size(); ++i) {
        if (i) os << ",";
        emit(children[i], v);
      }
      os << ")";
    }
    os << (tree.is_hidden(v) ? "h" : "v") << v;
  };
  emit(root, -1);
  os << ";";
  if (!comment.empty()) os << "\n[" << comment << "]";
  os << "\n";
  return os.str();
}

std::string distances_to_csv(const DistanceMatrix& d) {
  std::ostringstream os;
  os.precision(std::numeric_limits<double>::max_digits10);
  os << "node";
  for (int j = 0; j < d.size(); ++j) os << "," << j;
  os << "\n";
  for (int i = 0; i < d.size(); ++i) {
    os << i;
    for (int j = 0; j < d.size(); ++j) {
      os << ",";
      if (d.finite(i, j))
        os << d(i, j);
      else
        os << "inf";
    }
    os << "\n";
  }
  return os.str();
}

void write_text_file(const std::string& path, const std::string& text) {
  std::ofstream out(path);
  if (!out) throw io_error("cannot open for writing: " + path);
  out << text;
}

}  // namespace ltm
