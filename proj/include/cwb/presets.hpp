#pragma once

#include <string>
#include <vector>

#include "cwb/scm.hpp"
#include "cwb/train.hpp"

namespace cwb {

// One named experiment: a training corpus, the test corpora the trained
// model is scored on, and the training configuration. The trainer holds out
// its validation split from the training corpus itself.
struct ExperimentPreset {
  std::string name;
  std::string scale;  // "desk" or "paper"
  CorpusConfig train_corpus;
  std::vector<CorpusConfig> test_corpora;
  TrainConfig train;
};

// Catalog families:
//   indist-<mech>-<noise>       train/test on one SCM class
//   ood-mech-<mech>             mlp-noise training, all three mechanisms at test
//   ood-noise-<mech>            fixed-mechanism training on mlp, noises vary at test
//   invertible-<f>-<b>          f:b mix of the invertible forward/backward pair
//   linear-gaussian-<l>-<n>     l:n mix of linear- and nonlinear-Gaussian data
//   mix-mech-<combo>            equal mechanism mixtures at fixed mlp noise
//   mix-noise-<mech>            equal non-Gaussian noise mixture, fixed mechanism
//   three-class-<mech>          empty graphs plus one connected class
std::vector<std::string> preset_names();

// scale: "desk" (2000x200 training datasets, 200 test; 32-wide model) or
// "paper" (15000x1500, 1500 test; 64-wide model). All corpus and training
// seeds derive from `seed`.
ExperimentPreset make_preset(const std::string& name, const std::string& scale,
                             std::uint64_t seed);

}  // namespace cwb
