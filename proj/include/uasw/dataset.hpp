// Labeled feature samples and their train/validation/test partition.
#pragma once

#include <cstddef>
#include <vector>

#include "uasw/labels.hpp"
#include "uasw/pipeline.hpp"

namespace uasw {

using FeatureVector = BinArray;

struct Sample {
  FeatureVector features{};
  ObstacleLabel label{};
};

struct LabeledDataset {
  std::vector<Sample> samples;
  std::vector<std::size_t> train;
  std::vector<std::size_t> validation;
  std::vector<std::size_t> test;

  [[nodiscard]] std::vector<Sample> gather(const std::vector<std::size_t>& idx) const {
    std::vector<Sample> out;
    out.reserve(idx.size());
    for (auto i : idx) out.push_back(samples.at(i));
    return out;
  }
};

}  // namespace uasw
