#pragma once

#include "squeezelab/boson_algebra.hpp"
#include "squeezelab/errors.hpp"
#include "squeezelab/evolve.hpp"
#include "squeezelab/fock.hpp"
#include "squeezelab/io.hpp"
#include "squeezelab/krylov.hpp"
#include "squeezelab/series_analysis.hpp"
#include "squeezelab/verify.hpp"
