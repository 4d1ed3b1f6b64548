#pragma once

#include <iosfwd>
#include <string>
#include <vector>

#include "softlabel/instance.hpp"
#include "softlabel/synth.hpp"

namespace softlabel {

// JSON Lines: first line {"meta":{"k":...,"d":...,"seed":...,"rng":"splitmix64",...}},
// then one instance per line {"x":[...],"y":k,"p_star":[...]} with optional
// "p_a", "lambda", "p_lambda".

struct DatasetMeta {
  int num_classes = 0;
  int feature_dim = 0;
  std::uint64_t seed = 0;
  std::string split;  // "train", "test", or free-form
  std::string rng_name = "splitmix64";
  double class_separation = 0.0;
  double temperature = 0.0;
};

std::string format_jsonl(const DatasetMeta& meta,
                         const std::vector<SupervisedInstance>& instances);

void write_jsonl(const std::string& path, const DatasetMeta& meta,
                 const std::vector<SupervisedInstance>& instances);

struct LoadedDataset {
  DatasetMeta meta;
  std::vector<SupervisedInstance> instances;
};

// Throws DataError with the offending line number on malformed input.
LoadedDataset read_jsonl(const std::string& path);
LoadedDataset parse_jsonl(std::istream& in, const std::string& origin);

}  // namespace softlabel
