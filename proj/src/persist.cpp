#include "prediag/persist.hpp"

#include <limits>

#include "prediag/error.hpp"
#include "prediag/fileio.hpp"

namespace prediag::persist {

namespace {

using json::Json;

const Json& field(const Json& obj, const std::string& key, const std::string& path) {
  if (!obj.is_object()) throw DataError("model schema: '" + path + "' must be an object");
  const auto it = obj.find(key);
  if (it == obj.end()) throw DataError("model schema: missing field '" + path + "." + key + "'");
  return *it;
}

double real_at(const Json& v, const std::string& path) {
  if (!v.is_number()) throw DataError("model schema: '" + path + "' must be a number");
  return v.get<double>();
}

std::uint64_t uint_at(const Json& v, const std::string& path) {
  if (!v.is_number_unsigned()) throw DataError("model schema: '" + path + "' must be a non-negative integer");
  return v.get<std::uint64_t>();
}

const Json& array_at(const Json& v, const std::string& path) {
  if (!v.is_array()) throw DataError("model schema: '" + path + "' must be an array");
  return v;
}

std::string idx(const std::string& path, std::size_t i) { return path + "[" + std::to_string(i) + "]"; }

Json svm_payload(const ml::SvmModel& m) {
  Json p;
  p["gamma"] = m.gamma;
  p["c"] = m.c;
  p["bias"] = m.bias;
  p["dimension"] = m.dimension();
  p["alpha_y"] = m.alpha_y;
  Json svs = Json::array();
  for (const auto& sv : m.support_vectors) svs.push_back(sv);
  p["support_vectors"] = std::move(svs);
  return p;
}

Json node_json(const ml::DecisionTree& tree, std::size_t i) {
  const auto& n = tree.nodes[i];
  Json j;
  if (n.is_leaf()) {
    j["counts"] = Json::array({n.counts[0], n.counts[1]});
  } else {
    j["feature"] = n.feature;
    j["threshold"] = n.threshold;
    j["left"] = node_json(tree, static_cast<std::size_t>(n.left));
    j["right"] = node_json(tree, static_cast<std::size_t>(n.right));
  }
  return j;
}

Json forest_payload(const ml::ForestModel& m) {
  Json p;
  p["n_features"] = m.n_features;
  p["params"] = {{"n_trees", m.params.n_trees},
                 {"max_depth", m.params.max_depth},
                 {"min_samples_leaf", m.params.min_samples_leaf},
                 {"mtry", m.params.mtry},
                 {"seed", m.params.seed}};
  Json trees = Json::array();
  for (const auto& t : m.trees) trees.push_back(node_json(t, 0));
  p["trees"] = std::move(trees);
  return p;
}

ml::SvmModel svm_from(const Json& p, const std::string& path) {
  ml::SvmModel m;
  m.gamma = real_at(field(p, "gamma", path), path + ".gamma");
  m.c = real_at(field(p, "c", path), path + ".c");
  m.bias = real_at(field(p, "bias", path), path + ".bias");
  const auto dim = uint_at(field(p, "dimension", path), path + ".dimension");
  const auto& alphas = array_at(field(p, "alpha_y", path), path + ".alpha_y");
  for (std::size_t i = 0; i < alphas.size(); ++i) m.alpha_y.push_back(real_at(alphas[i], idx(path + ".alpha_y", i)));
  const auto& svs = array_at(field(p, "support_vectors", path), path + ".support_vectors");
  for (std::size_t i = 0; i < svs.size(); ++i) {
    const std::string sv_path = idx(path + ".support_vectors", i);
    const auto& row = array_at(svs[i], sv_path);
    if (row.size() != dim) throw DataError("model schema: '" + sv_path + "' length differs from dimension");
    FeatureVector fv;
    fv.reserve(row.size());
    for (std::size_t k = 0; k < row.size(); ++k) {
      // the path is only built on failure; rows can hold tens of thousands of entries
      if (!row[k].is_number()) real_at(row[k], idx(sv_path, k));
      fv.push_back(row[k].get<double>());
    }
    m.support_vectors.push_back(std::move(fv));
  }
  try {
    m.validate();
  } catch (const InvalidArgument& e) {
    throw DataError(std::string("model schema: ") + e.what());
  }
  return m;
}

int read_node(const Json& j, const std::string& path, ml::DecisionTree& tree, std::size_t depth) {
  if (depth > 4096) throw DataError("model schema: tree at '" + path + "' is too deep");
  const int index = static_cast<int>(tree.nodes.size());
  tree.nodes.emplace_back();
  if (!j.is_object()) throw DataError("model schema: '" + path + "' must be an object");
  if (j.contains("counts")) {
    const auto& counts = array_at(j["counts"], path + ".counts");
    if (counts.size() != 2) throw DataError("model schema: '" + path + ".counts' must have two entries");
    for (std::size_t k = 0; k < 2; ++k) {
      const auto c = uint_at(counts[k], idx(path + ".counts", k));
      if (c > std::numeric_limits<std::uint32_t>::max()) throw DataError("model schema: leaf count too large");
      tree.nodes[static_cast<std::size_t>(index)].counts[k] = static_cast<std::uint32_t>(c);
    }
    return index;
  }
  const auto feature = uint_at(field(j, "feature", path), path + ".feature");
  if (feature > static_cast<std::uint64_t>(std::numeric_limits<int>::max()))
    throw DataError("model schema: '" + path + ".feature' out of range");
  const double threshold = real_at(field(j, "threshold", path), path + ".threshold");
  const int left = read_node(field(j, "left", path), path + ".left", tree, depth + 1);
  const int right = read_node(field(j, "right", path), path + ".right", tree, depth + 1);
  auto& node = tree.nodes[static_cast<std::size_t>(index)];
  node.feature = static_cast<int>(feature);
  node.threshold = threshold;
  node.left = left;
  node.right = right;
  return index;
}

ml::ForestModel forest_from(const Json& p, const std::string& path) {
  ml::ForestModel m;
  m.n_features = uint_at(field(p, "n_features", path), path + ".n_features");
  const auto& params = field(p, "params", path);
  const std::string pp = path + ".params";
  m.params.n_trees = uint_at(field(params, "n_trees", pp), pp + ".n_trees");
  m.params.max_depth = uint_at(field(params, "max_depth", pp), pp + ".max_depth");
  m.params.min_samples_leaf = uint_at(field(params, "min_samples_leaf", pp), pp + ".min_samples_leaf");
  m.params.mtry = uint_at(field(params, "mtry", pp), pp + ".mtry");
  m.params.seed = uint_at(field(params, "seed", pp), pp + ".seed");
  const auto& trees = array_at(field(p, "trees", path), path + ".trees");
  for (std::size_t t = 0; t < trees.size(); ++t) {
    ml::DecisionTree tree;
    read_node(trees[t], idx(path + ".trees", t), tree, 0);
    m.trees.push_back(std::move(tree));
  }
  try {
    m.validate();
  } catch (const InvalidArgument& e) {
    throw DataError(std::string("model schema: ") + e.what());
  }
  return m;
}

} // namespace

std::string_view to_string(ModelKind kind) { return kind == ModelKind::Svm ? "svm" : "forest"; }

std::string save_model(const ModelEnvelope& envelope) {
  if (!envelope.created_with.is_object()) throw InvalidArgument("created_with must be a JSON object");
  Json doc;
  doc["format_version"] = envelope.format_version;
  doc["kind"] = to_string(envelope.kind());
  doc["created_with"] = envelope.created_with;
  if (const auto* svm = std::get_if<ml::SvmModel>(&envelope.payload)) {
    svm->validate();
    doc["payload"] = svm_payload(*svm);
  } else {
    const auto& forest = std::get<ml::ForestModel>(envelope.payload);
    forest.validate();
    doc["payload"] = forest_payload(forest);
  }
  return json::dump(doc, json::RealStyle::Scientific17);
}

ModelEnvelope load_model(std::string_view text) {
  Json doc;
  try {
    doc = Json::parse(text);
  } catch (const nlohmann::json::exception& e) {
    throw DataError(std::string("model file is not valid JSON: ") + e.what());
  }
  if (!doc.is_object()) throw DataError("model schema: document must be an object");
  const auto& version = field(doc, "format_version", "$");
  if (!version.is_number_integer()) throw DataError("model schema: '$.format_version' must be an integer");
  if (version.get<long long>() != kFormatVersion)
    throw DataError("unsupported model format_version " + std::to_string(version.get<long long>()) + " (expected 1)");
  const auto& kind = field(doc, "kind", "$");
  if (!kind.is_string()) throw DataError("model schema: '$.kind' must be a string");
  const auto& created = field(doc, "created_with", "$");
  if (!created.is_object()) throw DataError("model schema: '$.created_with' must be an object");
  const auto& payload = field(doc, "payload", "$");

  ModelEnvelope env;
  env.created_with = created;
  const auto k = kind.get<std::string>();
  if (k == "svm") {
    env.payload = svm_from(payload, "$.payload");
  } else if (k == "forest") {
    env.payload = forest_from(payload, "$.payload");
  } else {
    throw DataError("unknown model kind '" + k + "'");
  }
  return env;
}

void save_model_file(const std::filesystem::path& path, const ModelEnvelope& envelope) {
  io::write_atomic(path, save_model(envelope));
}

ModelEnvelope load_model_file(const std::filesystem::path& path) {
  try {
    return load_model(io::read_text(path));
  } catch (const DataError& e) {
    throw DataError(path.string() + ": " + e.what());
  }
}

} // namespace prediag::persist
