#include "softlabel/dataset_io.hpp"

#include <fstream>
#include <sstream>

#include <nlohmann/json.hpp>

namespace softlabel {

using nlohmann::json;

namespace {

json distribution_to_json(const LabelDistribution& p) {
  return json(p.probs());
}

LabelDistribution distribution_from_json(const json& j, int expect_k,
                                         std::size_t line) {
  if (!j.is_array()) {
    throw DataError("line " + std::to_string(line) +
                    ": distribution is not an array");
  }
  std::vector<double> probs;
  probs.reserve(j.size());
  for (const json& v : j) {
    if (!v.is_number()) {
      throw DataError("line " + std::to_string(line) +
                      ": distribution entry is not a number");
    }
    probs.push_back(v.get<double>());
  }
  if (expect_k > 0 && static_cast<int>(probs.size()) != expect_k) {
    throw DataError("line " + std::to_string(line) + ": expected " +
                    std::to_string(expect_k) + " classes, found " +
                    std::to_string(probs.size()));
  }
  try {
    return LabelDistribution(std::move(probs));
  } catch (const Error& e) {
    throw DataError("line " + std::to_string(line) + ": " + e.what());
  }
}

}  // namespace

std::string format_jsonl(const DatasetMeta& meta,
                         const std::vector<SupervisedInstance>& instances) {
  std::ostringstream out;
  json m;
  m["k"] = meta.num_classes;
  m["d"] = meta.feature_dim;
  m["seed"] = meta.seed;
  m["split"] = meta.split;
  m["rng"] = meta.rng_name;
  m["class_separation"] = meta.class_separation;
  m["temperature"] = meta.temperature;
  m["n"] = instances.size();
  out << json{{"meta", m}}.dump() << "\n";

  for (const SupervisedInstance& inst : instances) {
    json row;
    row["x"] = inst.x;
    row["y"] = inst.y.class_index;
    row["p_star"] = distribution_to_json(inst.p_star);
    if (inst.p_a) row["p_a"] = distribution_to_json(*inst.p_a);
    if (inst.lambda) row["lambda"] = *inst.lambda;
    if (inst.p_lambda) row["p_lambda"] = distribution_to_json(*inst.p_lambda);
    out << row.dump() << "\n";
  }
  return out.str();
}

void write_jsonl(const std::string& path, const DatasetMeta& meta,
                 const std::vector<SupervisedInstance>& instances) {
  std::ofstream out(path, std::ios::binary);
  if (!out) {
    throw DataError("cannot open " + path + " for writing");
  }
  out << format_jsonl(meta, instances);
  if (!out) {
    throw DataError("write failed for " + path);
  }
}

LoadedDataset parse_jsonl(std::istream& in, const std::string& origin) {
  LoadedDataset loaded;
  std::string line;
  std::size_t line_no = 0;
  bool have_meta = false;

  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    json j;
    try {
      j = json::parse(line);
    } catch (const json::parse_error& e) {
      throw DataError(origin + " line " + std::to_string(line_no) + ": " +
                      e.what());
    }

    if (!have_meta) {
      if (!j.contains("meta")) {
        throw DataError(origin + " line 1: missing meta header");
      }
      const json& m = j["meta"];
      loaded.meta.num_classes = m.value("k", 0);
      loaded.meta.feature_dim = m.value("d", 0);
      loaded.meta.seed = m.value("seed", std::uint64_t{0});
      loaded.meta.split = m.value("split", "");
      loaded.meta.rng_name = m.value("rng", "");
      loaded.meta.class_separation = m.value("class_separation", 0.0);
      loaded.meta.temperature = m.value("temperature", 0.0);
      if (loaded.meta.num_classes < 2) {
        throw DataError(origin + " line 1: meta.k missing or < 2");
      }
      have_meta = true;
      continue;
    }

    if (!j.contains("x") || !j.contains("y") || !j.contains("p_star")) {
      throw DataError(origin + " line " + std::to_string(line_no) +
                      ": instance needs x, y, p_star");
    }
    std::vector<double> x;
    for (const json& v : j["x"]) {
      if (!v.is_number()) {
        throw DataError(origin + " line " + std::to_string(line_no) +
                        ": x entry is not a number");
      }
      x.push_back(v.get<double>());
    }
    if (loaded.meta.feature_dim > 0 &&
        static_cast<int>(x.size()) != loaded.meta.feature_dim) {
      throw DataError(origin + " line " + std::to_string(line_no) +
                      ": x has wrong dimension");
    }
    const int y = j["y"].get<int>();
    if (y < 0 || y >= loaded.meta.num_classes) {
      throw DataError(origin + " line " + std::to_string(line_no) +
                      ": label out of range");
    }
    SupervisedInstance inst{
        std::move(x), HardLabel{y},
        distribution_from_json(j["p_star"], loaded.meta.num_classes, line_no),
        {}, {}, {}};
    if (j.contains("p_a")) {
      inst.p_a =
          distribution_from_json(j["p_a"], loaded.meta.num_classes, line_no);
    }
    if (j.contains("lambda")) {
      inst.lambda = j["lambda"].get<double>();
    }
    if (j.contains("p_lambda")) {
      inst.p_lambda = distribution_from_json(j["p_lambda"],
                                             loaded.meta.num_classes, line_no);
    }
    loaded.instances.push_back(std::move(inst));
  }

  if (!have_meta) {
    throw DataError(origin + ": empty file, missing meta header");
  }
  return loaded;
}

LoadedDataset read_jsonl(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) {
    throw DataError("cannot open " + path);
  }
  return parse_jsonl(in, path);
}

}  // namespace softlabel
