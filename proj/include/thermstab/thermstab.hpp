#pragma once

#define THERMSTAB_VERSION "0.1.0"

#include "thermstab/channel_algebra.hpp"
#include "thermstab/circuit.hpp"
#include "thermstab/config.hpp"
#include "thermstab/decoder.hpp"
#include "thermstab/dense_oracle.hpp"
#include "thermstab/gf2.hpp"
#include "thermstab/noise_sampler.hpp"
#include "thermstab/qec_experiments.hpp"
#include "thermstab/rng.hpp"
#include "thermstab/tableau_engine.hpp"
#include "thermstab/validation.hpp"
