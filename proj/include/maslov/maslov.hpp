#pragma once
// Umbrella header.

#include "maslov/assumptions.hpp"
#include "maslov/box_audit.hpp"
#include "maslov/config.hpp"
#include "maslov/errors.hpp"
#include "maslov/expression.hpp"
#include "maslov/hamiltonian.hpp"
#include "maslov/lagrangian.hpp"
#include "maslov/linalg.hpp"
#include "maslov/maslov_flow.hpp"
#include "maslov/ode.hpp"
#include "maslov/oracle.hpp"
#include "maslov/propagation.hpp"
#include "maslov/renormalized_count.hpp"
#include "maslov/report.hpp"
#include "maslov/spectral_curves.hpp"
