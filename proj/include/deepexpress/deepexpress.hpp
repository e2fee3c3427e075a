#pragma once

// Everything: the autodiff engine, the network, data handling, training,
// evaluation and the ablation/baseline harnesses.

#include "ablation.hpp"
#include "attention.hpp"
#include "autodiff.hpp"
#include "baselines.hpp"
#include "config_file.hpp"
#include "dataset.hpp"
#include "hfr.hpp"
#include "layers.hpp"
#include "metrics.hpp"
#include "model.hpp"
#include "rng.hpp"
#include "synthetic.hpp"
#include "tensor.hpp"
#include "training.hpp"
