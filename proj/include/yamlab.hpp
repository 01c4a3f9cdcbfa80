#pragma once

// single-header entry point for the whole laboratory

#include "yamlab/numeric.hpp"
#include "yamlab/grid.hpp"
#include "yamlab/model.hpp"
#include "yamlab/fields.hpp"
#include "yamlab/symmetrize.hpp"
#include "yamlab/solver.hpp"
#include "yamlab/trial_fields.hpp"
#include "yamlab/report.hpp"
#include "yamlab/config.hpp"
#include "yamlab/scenarios.hpp"
