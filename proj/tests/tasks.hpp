#pragma once

// Seeded perturbation tasks shared by the optimizer tests and the
// acceptance run.

#include <cstdint>

#include "soskit/optimizer.hpp"
#include "soskit/sos_script.hpp"
#include "soskit/synthetic.hpp"

namespace tasks {

struct PerturbationTask {
  soskit::Motion truth;
  soskit::Motion perturbed;
  soskit::SOSScript script;
};

inline PerturbationTask perturbation_task(std::uint64_t seed, double sigma = 0.2, double theta = 0.9,
                                          int frames = 60) {
  PerturbationTask task;
  task.truth = soskit::synthetic::random_smooth(seed, soskit::synthetic::humanoid(), frames);
  task.script = soskit::extract_sos(task.truth, theta).script;
  task.perturbed = soskit::synthetic::perturb(task.truth, sigma, seed + 1000);
  return task;
}

inline soskit::OptimizationProblem problem_for(const PerturbationTask& task, int iters = 100,
                                               soskit::ParamMode mode = soskit::ParamMode::Direct) {
  soskit::OptimizationProblem p;
  p.initial = task.perturbed;
  p.target = task.script;
  p.mode = mode;
  p.max_iters = iters;
  return p;
}

}  // namespace tasks
