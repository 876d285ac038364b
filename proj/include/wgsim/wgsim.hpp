#pragma once

#include "fock.hpp"
#include "gates.hpp"
#include "lattice.hpp"
#include "open_dynamics.hpp"
#include "quench.hpp"
#include "schedule.hpp"
#include "spectral.hpp"
#include "subtraction.hpp"
