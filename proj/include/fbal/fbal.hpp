#pragma once

// Umbrella header for the fermion-lattice detailed balance toolkit.

#include "fbal/algebra.hpp"
#include "fbal/balance.hpp"
#include "fbal/duality.hpp"
#include "fbal/dynamics.hpp"
#include "fbal/fock.hpp"
#include "fbal/lattice.hpp"
#include "fbal/linalg.hpp"
#include "fbal/states.hpp"
