#pragma once

// Umbrella header: diffusion models, MIA structures, target selection and the
// experiment harness for prebunking interventions on social networks.

#include "prebunk/activation.hpp"
#include "prebunk/baselines.hpp"
#include "prebunk/config.hpp"
#include "prebunk/diffusion.hpp"
#include "prebunk/errors.hpp"
#include "prebunk/experiment.hpp"
#include "prebunk/export.hpp"
#include "prebunk/graph.hpp"
#include "prebunk/intervention.hpp"
#include "prebunk/mia.hpp"
#include "prebunk/rng.hpp"
#include "prebunk/solver.hpp"
