#pragma once

#include "nbvs/errors.hpp"
#include "nbvs/rng.hpp"
#include "nbvs/model.hpp"
#include "nbvs/augmentation.hpp"
#include "nbvs/dependence.hpp"
#include "nbvs/samplers.hpp"
#include "nbvs/tempering.hpp"
#include "nbvs/diagnostics.hpp"
#include "nbvs/simgen.hpp"
#include "nbvs/io.hpp"
#include "nbvs/config.hpp"
