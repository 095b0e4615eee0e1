#pragma once

#include "dataset.hpp"
#include "decision.hpp"
#include "example_spec.hpp"
#include "generator.hpp"
#include "losses.hpp"
#include "oracle.hpp"
#include "penalty.hpp"
#include "quadrature.hpp"
#include "serialize.hpp"
#include "solver.hpp"
#include "studies.hpp"
#include "util.hpp"
