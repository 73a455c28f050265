#pragma once

#include "cradle/potentials.hpp"
#include "cradle/sequence.hpp"
#include "cradle/ode.hpp"
#include "cradle/lattice.hpp"
#include "cradle/dps.hpp"
#include "cradle/loop.hpp"
#include "cradle/ansatz.hpp"
#include "cradle/breather.hpp"
#include "cradle/experiments.hpp"
