#pragma once

// Composite EV charging games: individuals at a Wardrop split next to
// cost-minimizing coalitions.

#include <evcg/analytic3.hpp>
#include <evcg/costfn.hpp>
#include <evcg/dynamics.hpp>
#include <evcg/errors.hpp>
#include <evcg/gradient.hpp>
#include <evcg/model.hpp>
#include <evcg/sweep.hpp>
#include <evcg/verify.hpp>
