#pragma once

// Umbrella header for the fidelity-weighted learning library.

#include "fwl/adam.hpp"
#include "fwl/annotators.hpp"
#include "fwl/checkpoint.hpp"
#include "fwl/clustered_gp.hpp"
#include "fwl/config.hpp"
#include "fwl/csv.hpp"
#include "fwl/dataset.hpp"
#include "fwl/engine.hpp"
#include "fwl/errors.hpp"
#include "fwl/gp.hpp"
#include "fwl/kernels.hpp"
#include "fwl/kmeans.hpp"
#include "fwl/linalg.hpp"
#include "fwl/metrics.hpp"
#include "fwl/net.hpp"
#include "fwl/rng.hpp"
#include "fwl/train.hpp"
#include "fwl/vecmat.hpp"
